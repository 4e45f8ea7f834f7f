#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "courl/matrix.hpp"

namespace courl {

struct Edge {
  std::uint32_t a = 0;  // a < b, indices into SimilarityNetwork::nodes
  std::uint32_t b = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted undirected user graph. Edges are sorted by (a, b) with a < b.
struct SimilarityNetwork {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  double threshold = 0.0;
  /// Users left out because their weight rows are all zero.
  std::vector<std::string> excluded_users;

  std::size_t n_nodes() const { return nodes.size(); }
  std::size_t n_edges() const { return edges.size(); }
};

struct ProjectionStats {
  std::size_t candidate_pairs = 0;  // pairs scored exactly
  std::size_t indexed_entries = 0;  // postings kept in the inverted index
};

/// Cosine projection of the TF-IDF rows. Edge (i, j) exists iff
/// cos(w_i, w_j) >= threshold and > 0.
///
/// Candidates come from an inverted index that only holds each row's suffix
/// beyond the point where the remaining features could still reach
/// `threshold` (prefix bound sum x_u * max_u < threshold on unit rows), so
/// only pairs that can qualify are scored. Scoring is an exact sparse dot
/// product in ascending column order; rows are distributed over OpenMP
/// threads and the output does not depend on the thread count.
SimilarityNetwork project_similarity(const UserUrlMatrix& m, double threshold, ProjectionStats* stats = nullptr);

/// Single-threaded reference: unpruned inverted index over every posting.
/// Produces bit-identical output to project_similarity.
SimilarityNetwork project_similarity_serial(const UserUrlMatrix& m, double threshold);

/// Exact cosine of two matrix rows, accumulated in ascending column order.
double row_cosine(const UserUrlMatrix& m, std::size_t i, std::size_t j, std::span<const double> norms);

}  // namespace courl
