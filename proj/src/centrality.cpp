#include "courl/centrality.hpp"

#include <algorithm>
#include <cmath>

#include "courl/error.hpp"

namespace courl {

std::string_view to_string(Normalization n) { return n == Normalization::l2 ? "l2" : "max"; }
std::string_view to_string(CentralityMode m) { return m == CentralityMode::global ? "global" : "per_component"; }

Normalization parse_normalization(std::string_view s) {
  if (s == "l2") return Normalization::l2;
  if (s == "max") return Normalization::max;
  throw ConfigError("unknown normalization: " + std::string(s));
}

CentralityMode parse_centrality_mode(std::string_view s) {
  if (s == "global") return CentralityMode::global;
  if (s == "per_component" || s == "per-component") return CentralityMode::per_component;
  throw ConfigError("unknown centrality mode: " + std::string(s));
}

double CentralityScores::score_of(std::string_view user) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] == user) return scores[i];
  }
  return 0.0;
}

void shifted_spmv(const Adjacency& adj, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(adj.n_nodes());
#pragma omp parallel for schedule(static)
  for (std::int64_t vi = 0; vi < n; ++vi) {
    const auto v = static_cast<std::size_t>(vi);
    auto nb = adj.neighbors_of(v);
    auto w = adj.weights_of(v);
    double sum = x[v];
    for (std::size_t k = 0; k < nb.size(); ++k) sum += w[k] * x[nb[k]];
    y[v] = sum;
  }
}

void shifted_spmv_serial(const Adjacency& adj, std::span<const double> x, std::span<double> y) {
  for (std::size_t v = 0; v < adj.n_nodes(); ++v) {
    auto nb = adj.neighbors_of(v);
    auto w = adj.weights_of(v);
    double sum = x[v];
    for (std::size_t k = 0; k < nb.size(); ++k) sum += w[k] * x[nb[k]];
    y[v] = sum;
  }
}

namespace {

using Kernel = void (*)(const Adjacency&, std::span<const double>, std::span<double>);

struct PowerResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  bool converged = false;
};

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e * e;
  return std::sqrt(s);
}

PowerResult power_iteration(const Adjacency& adj, const CentralityOptions& opts, Kernel kernel) {
  const std::size_t n = adj.n_nodes();
  PowerResult r;
  r.x.assign(n, 0.0);
  std::size_t active = 0;
  for (std::size_t v = 0; v < n; ++v) active += adj.degree(v) > 0;
  if (active == 0) {
    r.converged = true;
    return r;
  }
  const double start = 1.0 / std::sqrt(static_cast<double>(active));
  for (std::size_t v = 0; v < n; ++v) r.x[v] = adj.degree(v) > 0 ? start : 0.0;

  std::vector<double> y(n, 0.0);
  while (r.iterations < opts.max_iter) {
    kernel(adj, r.x, y);
    ++r.iterations;
    for (std::size_t v = 0; v < n; ++v) {
      if (adj.degree(v) == 0) y[v] = 0.0;
    }
    const double norm = l2_norm(y);
    double diff = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      y[v] /= norm;
      diff = std::max(diff, std::abs(y[v] - r.x[v]));
    }
    r.x.swap(y);
    if (diff < opts.tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

void apply_normalization(std::span<double> x, Normalization n) {
  if (n == Normalization::l2) {
    const double norm = l2_norm(x);
    if (norm > 0.0)
      for (auto& e : x) e /= norm;
  } else {
    const double peak = x.empty() ? 0.0 : *std::max_element(x.begin(), x.end());
    if (peak > 0.0)
      for (auto& e : x) e /= peak;
  }
}

void validate(const SimilarityNetwork& g, const CentralityOptions& opts) {
  if (g.n_nodes() == 0) throw ConfigError("eigenvector centrality needs at least one node");
  if (!(opts.tol > 0.0)) throw ConfigError("centrality tolerance must be > 0");
  if (opts.max_iter == 0) throw ConfigError("centrality max_iter must be >= 1");
}

CentralityScores run(const SimilarityNetwork& g, const CentralityOptions& opts, Kernel kernel) {
  validate(g, opts);
  CentralityScores out;
  out.nodes = g.nodes;
  out.normalization = opts.normalization;
  out.mode = opts.mode;

  if (opts.mode == CentralityMode::global) {
    auto r = power_iteration(to_adjacency(g), opts, kernel);
    apply_normalization(r.x, opts.normalization);
    out.scores = std::move(r.x);
    out.iterations_used = r.iterations;
    out.converged = r.converged;
    return out;
  }

  const auto comps = connected_components(g);
  out.component = comps.label;
  out.scores.assign(g.n_nodes(), 0.0);
  out.converged = true;
  std::vector<std::vector<std::uint32_t>> members(comps.count);
  for (std::uint32_t v = 0; v < g.n_nodes(); ++v) members[comps.label[v]].push_back(v);
  for (const auto& m : members) {
    if (m.size() < 2) continue;
    auto r = power_iteration(to_adjacency(induced_subgraph(g, m)), opts, kernel);
    apply_normalization(r.x, opts.normalization);
    for (std::size_t k = 0; k < m.size(); ++k) out.scores[m[k]] = r.x[k];
    out.iterations_used = std::max(out.iterations_used, r.iterations);
    out.converged = out.converged && r.converged;
  }
  return out;
}

}  // namespace

CentralityScores eigenvector_centrality(const SimilarityNetwork& g, const CentralityOptions& opts) {
  return run(g, opts, &shifted_spmv);
}

CentralityScores eigenvector_centrality_serial(const SimilarityNetwork& g, const CentralityOptions& opts) {
  return run(g, opts, &shifted_spmv_serial);
}

}  // namespace courl
