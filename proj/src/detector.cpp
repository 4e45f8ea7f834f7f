#include "courl/detector.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "courl/error.hpp"
#include "courl/graph.hpp"
#include "courl/ingest.hpp"

namespace courl {

using nlohmann::json;

double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ConfigError("percentile of an empty sample");
  if (!(p > 0.0 && p < 100.0)) throw ConfigError("percentile must lie in (0, 100)");
  const auto n = values.size();
  // p * n first keeps integer percentiles exact
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) / 100.0 - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

std::set<std::string> CoordinationReport::flagged_ids() const {
  std::set<std::string> ids;
  for (const auto& f : flagged) ids.insert(f.user_id);
  return ids;
}

CoordinationReport percentile_threshold(const CentralityScores& scores, double p) {
  if (scores.scores.empty()) throw ConfigError("no centrality scores to threshold");
  CoordinationReport report;
  report.percentile = p;
  report.mode = scores.mode;

  const std::size_t n = scores.scores.size();
  std::vector<char> flag(n, 0);
  if (scores.mode == CentralityMode::per_component && scores.component.size() == n) {
    std::uint32_t n_comp = 0;
    for (auto c : scores.component) n_comp = std::max(n_comp, c + 1);
    std::vector<std::vector<double>> samples(n_comp);
    for (std::size_t v = 0; v < n; ++v) samples[scores.component[v]].push_back(scores.scores[v]);
    for (const auto& s : samples) report.component_thresholds.push_back(nearest_rank_percentile(s, p));
    for (std::size_t v = 0; v < n; ++v)
      flag[v] = scores.scores[v] > report.component_thresholds[scores.component[v]];
    report.threshold_value =
        *std::min_element(report.component_thresholds.begin(), report.component_thresholds.end());
  } else {
    report.threshold_value = nearest_rank_percentile(scores.scores, p);
    for (std::size_t v = 0; v < n; ++v) flag[v] = scores.scores[v] > report.threshold_value;
  }

  for (std::size_t v = 0; v < n; ++v) {
    if (flag[v]) report.flagged.push_back({scores.nodes[v], scores.scores[v]});
  }
  std::sort(report.flagged.begin(), report.flagged.end(), [](const FlaggedUser& a, const FlaggedUser& b) {
    return a.score != b.score ? a.score > b.score : a.user_id < b.user_id;
  });
  return report;
}

namespace {

void attach_evidence(Cluster& cluster, const UserUrlMatrix& m, std::size_t top_k) {
  struct Tally {
    std::size_t members = 0;
    double weight = 0.0;
  };
  std::map<std::uint32_t, Tally> per_url;
  for (const auto& user : cluster.members) {
    auto it = std::lower_bound(m.users.begin(), m.users.end(), user);
    if (it == m.users.end() || *it != user) continue;
    const auto row = static_cast<std::size_t>(it - m.users.begin());
    auto cols = m.row_cols(row);
    auto w = m.row_weights(row);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      auto& t = per_url[cols[k]];
      ++t.members;
      t.weight += w[k];
    }
  }
  const std::size_t need = std::min<std::size_t>(2, cluster.members.size());

  std::map<std::string, Tally> per_domain;
  for (const auto& [col, t] : per_url) {
    if (t.members < need) continue;
    cluster.shared_urls.push_back({m.urls[col], m.url_domains[col], t.members, t.weight});
    auto& d = per_domain[m.url_domains[col]];
    d.members = std::max(d.members, t.members);
    d.weight += t.weight;
  }
  for (const auto& [domain, t] : per_domain) cluster.shared_domains.push_back({domain, t.members, t.weight});

  auto by_weight = [](const auto& a, const auto& b) { return a.total_weight > b.total_weight; };
  std::stable_sort(cluster.shared_urls.begin(), cluster.shared_urls.end(), by_weight);
  std::stable_sort(cluster.shared_domains.begin(), cluster.shared_domains.end(), by_weight);
  if (cluster.shared_urls.size() > top_k) cluster.shared_urls.resize(top_k);
  if (cluster.shared_domains.size() > top_k) cluster.shared_domains.resize(top_k);
}

}  // namespace

std::vector<Cluster> extract_clusters(const SimilarityNetwork& g, const std::set<std::string>& flagged,
                                      const UserUrlMatrix* m, std::size_t top_k) {
  std::vector<std::uint32_t> keep;
  for (std::uint32_t v = 0; v < g.n_nodes(); ++v) {
    if (flagged.contains(g.nodes[v])) keep.push_back(v);
  }
  const SimilarityNetwork sub = induced_subgraph(g, keep);
  const auto comps = connected_components(sub);

  std::vector<Cluster> clusters(comps.count);
  for (std::uint32_t v = 0; v < sub.n_nodes(); ++v) clusters[comps.label[v]].members.push_back(sub.nodes[v]);
  for (auto& c : clusters) std::sort(c.members.begin(), c.members.end());
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    return a.members.size() != b.members.size() ? a.members.size() > b.members.size() : a.members < b.members;
  });
  if (m) {
    for (auto& c : clusters) attach_evidence(c, *m, top_k);
  }
  return clusters;
}

CoordinationReport annotate_suspensions(CoordinationReport report, const std::set<std::string>& suspended_handles,
                                        std::span<const UserProfile> profiles) {
  std::unordered_map<std::string, std::string> user_of_handle;
  for (const auto& p : profiles) {
    if (!p.handle.empty()) user_of_handle.emplace(normalize_tag(p.handle, '@'), p.user_id);
  }
  std::set<std::string> suspended_users;
  report.unmatched_handles = 0;
  for (const auto& h : suspended_handles) {
    auto it = user_of_handle.find(normalize_tag(h, '@'));
    if (it == user_of_handle.end()) {
      ++report.unmatched_handles;
    } else {
      suspended_users.insert(it->second);
    }
  }
  report.suspended.clear();
  for (const auto& f : report.flagged) {
    if (suspended_users.contains(f.user_id)) report.suspended.push_back(f.user_id);
  }
  std::sort(report.suspended.begin(), report.suspended.end());
  report.suspended_count = report.suspended.size();
  return report;
}

json CoordinationReport::to_json() const {
  json j;
  j["percentile"] = percentile;
  j["threshold_value"] = threshold_value;
  j["mode"] = std::string(to_string(mode));
  if (!component_thresholds.empty()) j["component_thresholds"] = component_thresholds;
  json f = json::array();
  for (const auto& u : flagged) f.push_back({{"user_id", u.user_id}, {"score", u.score}});
  j["flagged"] = std::move(f);
  json cs = json::array();
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    json urls = json::array(), domains = json::array();
    for (const auto& u : c.shared_urls)
      urls.push_back({{"url", u.url}, {"domain", u.domain}, {"members", u.members}, {"total_weight", u.total_weight}});
    for (const auto& d : c.shared_domains)
      domains.push_back({{"domain", d.domain}, {"members", d.members}, {"total_weight", d.total_weight}});
    cs.push_back({{"cluster_id", i}, {"members", c.members}, {"shared_urls", urls}, {"shared_domains", domains}});
  }
  j["clusters"] = std::move(cs);
  j["suspended"] = suspended;
  j["suspended_count"] = suspended_count;
  j["unmatched_handles"] = unmatched_handles;
  return j;
}

CoordinationReport CoordinationReport::from_json(const json& j) {
  CoordinationReport r;
  r.percentile = j.value("percentile", 99.0);
  r.threshold_value = j.value("threshold_value", 0.0);
  r.mode = parse_centrality_mode(j.value("mode", std::string("global")));
  if (j.contains("component_thresholds")) r.component_thresholds = j["component_thresholds"].get<std::vector<double>>();
  for (const auto& f : j.at("flagged")) r.flagged.push_back({f.at("user_id").get<std::string>(), f.value("score", 0.0)});
  if (j.contains("clusters")) {
    for (const auto& c : j["clusters"]) {
      Cluster cl;
      cl.members = c.at("members").get<std::vector<std::string>>();
      for (const auto& u : c.value("shared_urls", json::array()))
        cl.shared_urls.push_back({u.at("url"), u.at("domain"), u.at("members"), u.at("total_weight")});
      for (const auto& d : c.value("shared_domains", json::array()))
        cl.shared_domains.push_back({d.at("domain"), d.at("members"), d.at("total_weight")});
      r.clusters.push_back(std::move(cl));
    }
  }
  r.suspended = j.value("suspended", std::vector<std::string>{});
  r.suspended_count = j.value("suspended_count", std::size_t{0});
  r.unmatched_handles = j.value("unmatched_handles", std::size_t{0});
  return r;
}

}  // namespace courl
