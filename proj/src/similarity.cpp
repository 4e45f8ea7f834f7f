#include "courl/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <omp.h>

#include "courl/error.hpp"

namespace courl {

namespace {

// Slack on the prefix bound so that rounding can never move a qualifying pair
// out of the candidate set.
constexpr double kBoundSlack = 1e-9;

void check_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("similarity threshold must lie in [0, 1]");
}

struct NodeMap {
  std::vector<std::uint32_t> row_of_node;
  std::vector<std::int64_t> node_of_row;  // -1 for excluded rows
};

NodeMap select_nodes(const UserUrlMatrix& m, std::span<const double> norms, SimilarityNetwork& g) {
  NodeMap map;
  map.node_of_row.assign(m.n_users(), -1);
  for (std::size_t i = 0; i < m.n_users(); ++i) {
    if (norms[i] > 0.0) {
      map.node_of_row[i] = static_cast<std::int64_t>(map.row_of_node.size());
      map.row_of_node.push_back(static_cast<std::uint32_t>(i));
      g.nodes.push_back(m.users[i]);
    } else {
      g.excluded_users.push_back(m.users[i]);
    }
  }
  return map;
}

double clamp_unit(double c) { return c > 1.0 ? 1.0 : c; }

}  // namespace

double row_cosine(const UserUrlMatrix& m, std::size_t i, std::size_t j, std::span<const double> norms) {
  if (norms[i] == 0.0 || norms[j] == 0.0) return 0.0;
  auto ci = m.row_cols(i), cj = m.row_cols(j);
  auto wi = m.row_weights(i), wj = m.row_weights(j);
  double dot = 0.0;
  std::size_t p = 0, q = 0;
  while (p < ci.size() && q < cj.size()) {
    if (ci[p] < cj[q]) {
      ++p;
    } else if (cj[q] < ci[p]) {
      ++q;
    } else {
      if (wi[p] != 0.0 && wj[q] != 0.0) dot += wi[p] * wj[q];
      ++p;
      ++q;
    }
  }
  return dot / (norms[i] * norms[j]);
}

SimilarityNetwork project_similarity(const UserUrlMatrix& m, double threshold, ProjectionStats* stats) {
  check_threshold(threshold);
  SimilarityNetwork g;
  g.threshold = threshold;
  const auto norms = m.row_norms();
  const NodeMap nodes = select_nodes(m, norms, g);
  const std::size_t n = nodes.row_of_node.size();
  const std::size_t n_urls = m.n_urls();

  // per-feature popularity and max unit weight
  std::vector<std::size_t> df(n_urls, 0);
  std::vector<double> max_unit(n_urls, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const auto row = nodes.row_of_node[v];
    auto cols = m.row_cols(row);
    auto w = m.row_weights(row);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (w[k] == 0.0) continue;
      ++df[cols[k]];
      max_unit[cols[k]] = std::max(max_unit[cols[k]], w[k] / norms[row]);
    }
  }
  // most popular features form the unindexed prefix
  std::vector<std::uint32_t> feature_rank(n_urls);
  {
    std::vector<std::uint32_t> order(n_urls);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return df[a] != df[b] ? df[a] > df[b] : a < b; });
    for (std::uint32_t r = 0; r < n_urls; ++r) feature_rank[order[r]] = r;
  }

  std::vector<std::vector<std::uint32_t>> index(n_urls);
  std::size_t indexed = 0;
  std::vector<std::pair<std::uint32_t, double>> entries;
  for (std::size_t v = 0; v < n; ++v) {
    const auto row = nodes.row_of_node[v];
    auto cols = m.row_cols(row);
    auto w = m.row_weights(row);
    entries.clear();
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (w[k] != 0.0) entries.emplace_back(cols[k], w[k] / norms[row]);
    }
    std::sort(entries.begin(), entries.end(),
              [&](const auto& a, const auto& b) { return feature_rank[a.first] < feature_rank[b.first]; });
    double bound = 0.0;
    for (const auto& [col, x] : entries) {
      bound += x * max_unit[col];
      if (bound >= threshold - kBoundSlack) {
        index[col].push_back(static_cast<std::uint32_t>(v));
        ++indexed;
      }
    }
  }

  const int n_threads = omp_get_max_threads();
  std::vector<std::vector<Edge>> found(static_cast<std::size_t>(n_threads));
  std::vector<std::size_t> scored(static_cast<std::size_t>(n_threads), 0);

#pragma omp parallel num_threads(n_threads)
  {
    const auto tid = static_cast<std::size_t>(omp_get_thread_num());
    std::vector<std::uint32_t> stamp(n, 0);
    std::vector<std::uint32_t> candidates;
    auto& out = found[tid];
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t vi = 0; vi < static_cast<std::int64_t>(n); ++vi) {
      const auto v = static_cast<std::uint32_t>(vi);
      const auto row = nodes.row_of_node[v];
      auto cols = m.row_cols(row);
      auto w = m.row_weights(row);
      candidates.clear();
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (w[k] == 0.0) continue;
        const auto& postings = index[cols[k]];
        auto it = std::upper_bound(postings.begin(), postings.end(), v);
        for (; it != postings.end(); ++it) {
          if (stamp[*it] != v + 1) {
            stamp[*it] = v + 1;
            candidates.push_back(*it);
          }
        }
      }
      scored[tid] += candidates.size();
      for (auto u : candidates) {
        const double c = row_cosine(m, row, nodes.row_of_node[u], norms);
        if (c > 0.0 && c >= threshold) out.push_back({v, u, clamp_unit(c)});
      }
    }
  }

  std::size_t total = 0;
  for (const auto& part : found) total += part.size();
  g.edges.reserve(total);
  for (auto& part : found) g.edges.insert(g.edges.end(), part.begin(), part.end());
  std::sort(g.edges.begin(), g.edges.end(),
            [](const Edge& x, const Edge& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });
  if (stats) {
    stats->candidate_pairs = std::accumulate(scored.begin(), scored.end(), std::size_t{0});
    stats->indexed_entries = indexed;
  }
  return g;
}

SimilarityNetwork project_similarity_serial(const UserUrlMatrix& m, double threshold) {
  check_threshold(threshold);
  SimilarityNetwork g;
  g.threshold = threshold;
  const auto norms = m.row_norms();
  const NodeMap nodes = select_nodes(m, norms, g);
  const std::size_t n = nodes.row_of_node.size();

  struct Posting {
    std::uint32_t node;
    double weight;
  };
  std::vector<std::vector<Posting>> index(m.n_urls());
  for (std::uint32_t v = 0; v < n; ++v) {
    const auto row = nodes.row_of_node[v];
    auto cols = m.row_cols(row);
    auto w = m.row_weights(row);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (w[k] != 0.0) index[cols[k]].push_back({v, w[k]});
    }
  }

  std::vector<double> acc(n, 0.0);
  std::vector<std::uint32_t> touched;
  for (std::uint32_t v = 0; v < n; ++v) {
    const auto row = nodes.row_of_node[v];
    auto cols = m.row_cols(row);
    auto w = m.row_weights(row);
    touched.clear();
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (w[k] == 0.0) continue;
      for (const auto& p : index[cols[k]]) {
        if (p.node <= v) continue;
        if (acc[p.node] == 0.0) touched.push_back(p.node);
        acc[p.node] += w[k] * p.weight;
      }
    }
    std::sort(touched.begin(), touched.end());
    for (auto u : touched) {
      const double c = acc[u] / (norms[row] * norms[nodes.row_of_node[u]]);
      acc[u] = 0.0;
      if (c > 0.0 && c >= threshold) g.edges.push_back({v, u, clamp_unit(c)});
    }
  }
  return g;
}

}  // namespace courl
