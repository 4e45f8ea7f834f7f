#include "courl/pipeline.hpp"

#include "courl/error.hpp"
#include "courl/graph.hpp"

namespace courl {

using nlohmann::json;

void DetectionParams::validate() const {
  if (min_urls < 1) throw ConfigError("min_urls must be >= 1");
  if (!(similarity_threshold >= 0.0 && similarity_threshold <= 1.0))
    throw ConfigError("similarity_threshold must lie in [0, 1]");
  if (!(percentile > 0.0 && percentile < 100.0)) throw ConfigError("percentile must lie in (0, 100)");
  if (!(centrality.tol > 0.0)) throw ConfigError("centrality_tol must be > 0");
  if (centrality.max_iter < 1) throw ConfigError("centrality_max_iter must be >= 1");
}

json DetectionParams::to_json() const {
  json j;
  j["min_urls"] = min_urls;
  j["tfidf_variant"] = std::string(to_string(tfidf_variant));
  j["similarity_threshold"] = similarity_threshold;
  j["k_core"] = k_core ? json(*k_core) : json(nullptr);
  j["centrality_tol"] = centrality.tol;
  j["centrality_max_iter"] = centrality.max_iter;
  j["normalization"] = std::string(to_string(centrality.normalization));
  j["centrality_mode"] = std::string(to_string(centrality.mode));
  j["percentile"] = percentile;
  j["evidence_top_k"] = evidence_top_k;
  return j;
}

void DetectionParams::update_from_json(const json& j) {
  try {
    if (j.contains("min_urls")) min_urls = j["min_urls"].get<std::size_t>();
    if (j.contains("tfidf_variant")) tfidf_variant = parse_tfidf_variant(j["tfidf_variant"].get<std::string>());
    if (j.contains("similarity_threshold")) similarity_threshold = j["similarity_threshold"].get<double>();
    if (j.contains("k_core")) {
      if (j["k_core"].is_null()) {
        k_core.reset();
      } else {
        k_core = j["k_core"].get<std::size_t>();
      }
    }
    if (j.contains("centrality_tol")) centrality.tol = j["centrality_tol"].get<double>();
    if (j.contains("centrality_max_iter")) centrality.max_iter = j["centrality_max_iter"].get<std::size_t>();
    if (j.contains("normalization")) centrality.normalization = parse_normalization(j["normalization"].get<std::string>());
    if (j.contains("centrality_mode"))
      centrality.mode = parse_centrality_mode(j["centrality_mode"].get<std::string>());
    if (j.contains("percentile")) percentile = j["percentile"].get<double>();
    if (j.contains("evidence_top_k")) evidence_top_k = j["evidence_top_k"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad detection parameter: ") + e.what());
  }
}

MatrixBuilder collect_shares(std::span<const Post> posts, const UrlCanonicalizer& canon,
                             const ExpansionMap* expansion) {
  MatrixBuilder builder;
  for (const auto& p : posts) {
    for (const auto& raw : p.raw_urls) {
      auto url = canon(raw);
      if (!url) continue;
      if (expansion) url = expansion->apply(*url, canon);
      builder.add(p.author_id, *url);
    }
  }
  return builder;
}

DetectionResult run_detection(const MatrixBuilder& shares, const DetectionParams& params) {
  params.validate();
  DetectionResult r;
  r.n_shares = shares.n_shares();
  const auto active = shares.active_users(params.min_urls);
  r.n_active_users = active.size();
  if (active.empty()) throw EmptyResultError("no user has at least min_urls URL shares");

  r.matrix = shares.build(active, params.tfidf_variant);
  r.full_network = project_similarity(r.matrix, params.similarity_threshold, &r.projection);
  if (r.full_network.n_edges() == 0) throw EmptyResultError("similarity network has no edges");
  r.network = params.k_core ? k_core(r.full_network, *params.k_core) : r.full_network;
  if (r.network.n_edges() == 0) throw EmptyResultError("k-core of the similarity network is empty");

  r.scores = eigenvector_centrality(r.network, params.centrality);
  r.report = percentile_threshold(r.scores, params.percentile);
  r.report.clusters = extract_clusters(r.network, r.report.flagged_ids(), &r.matrix, params.evidence_top_k);
  return r;
}

DetectionResult run_detection(std::span<const Post> posts, const DetectionParams& params,
                              const UrlCanonicalizer& canon, const ExpansionMap* expansion) {
  return run_detection(collect_shares(posts, canon, expansion), params);
}

}  // namespace courl
