#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>

#include "json.hpp"

#include "courl/centrality.hpp"
#include "courl/detector.hpp"
#include "courl/matrix.hpp"
#include "courl/post.hpp"
#include "courl/similarity.hpp"
#include "courl/url.hpp"

namespace courl {

struct DetectionParams {
  std::size_t min_urls = 5;
  TfidfVariant tfidf_variant = TfidfVariant::standard;
  double similarity_threshold = 0.5;
  std::optional<std::size_t> k_core;  // pre-filter before centrality; off by default
  CentralityOptions centrality;
  double percentile = 99.0;
  std::size_t evidence_top_k = 10;

  /// Throws ConfigError on any out-of-domain value.
  void validate() const;
  nlohmann::json to_json() const;
  /// Overrides fields present in `j`; unknown keys are ignored.
  void update_from_json(const nlohmann::json& j);
};

struct DetectionResult {
  UserUrlMatrix matrix;
  SimilarityNetwork full_network;  // before the optional k-core
  SimilarityNetwork network;       // what centrality ran on
  ProjectionStats projection;
  CentralityScores scores;
  CoordinationReport report;
  std::size_t n_shares = 0;
  std::size_t n_active_users = 0;
};

/// Collects canonical URL shares from posts (expansion map applied when given).
MatrixBuilder collect_shares(std::span<const Post> posts, const UrlCanonicalizer& canon = {},
                             const ExpansionMap* expansion = nullptr);

/// activity filter -> TF-IDF matrix -> cosine projection -> optional k-core ->
/// eigenvector centrality -> percentile threshold -> clusters.
/// Throws EmptyResultError when the similarity network has no edges.
DetectionResult run_detection(const MatrixBuilder& shares, const DetectionParams& params);

DetectionResult run_detection(std::span<const Post> posts, const DetectionParams& params,
                              const UrlCanonicalizer& canon = {}, const ExpansionMap* expansion = nullptr);

}  // namespace courl
