#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "courl/similarity.hpp"

namespace courl {

/// Symmetric CSR view of a SimilarityNetwork; neighbours ascending.
struct Adjacency {
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> neighbors;
  std::vector<double> weights;

  std::size_t n_nodes() const { return offsets.size() - 1; }
  std::size_t degree(std::size_t v) const { return offsets[v + 1] - offsets[v]; }
  std::span<const std::uint32_t> neighbors_of(std::size_t v) const {
    return {neighbors.data() + offsets[v], degree(v)};
  }
  std::span<const double> weights_of(std::size_t v) const { return {weights.data() + offsets[v], degree(v)}; }
};

Adjacency to_adjacency(const SimilarityNetwork& g);

/// Core number of every node (Batagelj-Zaversnik bucket peeling, unweighted degree).
std::vector<std::size_t> core_numbers(const SimilarityNetwork& g);

/// Maximal subgraph whose nodes all have degree >= k. Node order is kept.
SimilarityNetwork k_core(const SimilarityNetwork& g, std::size_t k);

/// Subgraph on `keep` (node indices of g), node order kept.
SimilarityNetwork induced_subgraph(const SimilarityNetwork& g, std::span<const std::uint32_t> keep);

struct Components {
  std::vector<std::uint32_t> label;  // per node; labels numbered by smallest member
  std::size_t count = 0;
};

Components connected_components(const SimilarityNetwork& g);

struct GraphMetrics {
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  std::map<std::size_t, std::size_t> degree_distribution;  // degree -> node count
  std::vector<std::size_t> component_sizes;                // descending
};

GraphMetrics graph_metrics(const SimilarityNetwork& g);

}  // namespace courl
