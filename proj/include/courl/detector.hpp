#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "courl/centrality.hpp"
#include "courl/matrix.hpp"
#include "courl/post.hpp"
#include "courl/similarity.hpp"

namespace courl {

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value.
double nearest_rank_percentile(std::vector<double> values, double p);

struct FlaggedUser {
  std::string user_id;
  double score = 0.0;
};

struct UrlEvidence {
  std::string url;
  std::string domain;
  std::size_t members = 0;  // cluster members sharing it
  double total_weight = 0.0;
};

struct DomainEvidence {
  std::string domain;
  std::size_t members = 0;
  double total_weight = 0.0;
};

struct Cluster {
  std::vector<std::string> members;  // sorted
  std::vector<UrlEvidence> shared_urls;
  std::vector<DomainEvidence> shared_domains;
};

struct CoordinationReport {
  std::vector<FlaggedUser> flagged;  // score descending, then id
  double percentile = 99.0;
  double threshold_value = 0.0;
  CentralityMode mode = CentralityMode::global;
  std::vector<double> component_thresholds;  // per_component mode
  std::vector<Cluster> clusters;
  std::vector<std::string> suspended;  // flagged users found on the suspension list
  std::size_t suspended_count = 0;
  std::size_t unmatched_handles = 0;

  std::set<std::string> flagged_ids() const;
  nlohmann::json to_json() const;
  static CoordinationReport from_json(const nlohmann::json& j);
};

/// Flags nodes whose score is strictly greater than the nearest-rank p-th
/// percentile (per component in per_component mode). p must lie in (0, 100).
CoordinationReport percentile_threshold(const CentralityScores& scores, double p);

/// Connected components of the subgraph induced by `flagged`, with the URLs
/// and domains shared by at least two members (or the single member's own)
/// ranked by total TF-IDF weight. Evidence is omitted when `m` is null.
std::vector<Cluster> extract_clusters(const SimilarityNetwork& g, const std::set<std::string>& flagged,
                                      const UserUrlMatrix* m = nullptr, std::size_t top_k = 10);

/// Sets suspended_count = |flagged ∩ suspended|, resolving handles through the
/// profiles. Handles with no profile are counted in unmatched_handles.
CoordinationReport annotate_suspensions(CoordinationReport report, const std::set<std::string>& suspended_handles,
                                        std::span<const UserProfile> profiles);

}  // namespace courl
