#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "courl/graph.hpp"
#include "courl/similarity.hpp"

namespace courl {

enum class Normalization { l2, max };
enum class CentralityMode { global, per_component };

std::string_view to_string(Normalization n);
std::string_view to_string(CentralityMode m);
Normalization parse_normalization(std::string_view s);
CentralityMode parse_centrality_mode(std::string_view s);

struct CentralityOptions {
  double tol = 1e-10;
  std::size_t max_iter = 1000;
  Normalization normalization = Normalization::l2;
  CentralityMode mode = CentralityMode::global;
};

/// Scores aligned with the network's node order.
struct CentralityScores {
  std::vector<std::string> nodes;
  std::vector<double> scores;
  Normalization normalization = Normalization::l2;
  CentralityMode mode = CentralityMode::global;
  std::size_t iterations_used = 0;
  bool converged = false;
  /// Component label per node (per_component mode only).
  std::vector<std::uint32_t> component;

  double score_of(std::string_view user) const;
};

/// y = (A + I) x with a fixed ascending per-row accumulation order.
void shifted_spmv(const Adjacency& adj, std::span<const double> x, std::span<double> y);
void shifted_spmv_serial(const Adjacency& adj, std::span<const double> x, std::span<double> y);

/// Eigenvector centrality by power iteration on A + I (same eigenvectors as
/// A; the shift keeps bipartite graphs from oscillating). Starts from a
/// uniform vector, stops when successive l2-normalised iterates differ by
/// less than `tol` in max-norm. Zero-degree nodes score 0. Throws ConfigError
/// for an empty graph or tol <= 0.
CentralityScores eigenvector_centrality(const SimilarityNetwork& g, const CentralityOptions& opts = {});

/// Same iteration with the serial kernel.
CentralityScores eigenvector_centrality_serial(const SimilarityNetwork& g, const CentralityOptions& opts = {});

}  // namespace courl
