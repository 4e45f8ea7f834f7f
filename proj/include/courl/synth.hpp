#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "courl/pipeline.hpp"
#include "courl/post.hpp"

namespace courl {

/// Name recorded in corpus metadata; the generator only consumes raw 64-bit
/// outputs of std::mt19937_64, whose sequence is fixed by the C++ standard.
inline constexpr const char* kSynthRng = "mt19937_64";

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_organic = 1000;
  std::size_t n_coordinated = 30;
  std::size_t url_catalog_size = 5000;
  double zipf_exponent = 1.1;
  std::size_t min_shares = 5;
  std::size_t max_shares = 15;
  std::size_t campaign_pool_size = 10;
  double campaign_overlap = 0.9;

  void validate() const;
  nlohmann::json to_json() const;
  void update_from_json(const nlohmann::json& j);
};

struct GroundTruth {
  std::set<std::string> coordinated_ids;
  nlohmann::json to_json() const;
  static GroundTruth from_json(const nlohmann::json& j);
};

struct SynthCorpus {
  std::vector<Post> posts;
  std::vector<UserProfile> profiles;
  GroundTruth truth;
};

/// Streams the corpus; posts arrive grouped by user in user-index order.
GroundTruth generate(const SynthConfig& config, const std::function<void(Post&&)>& post_sink,
                     const std::function<void(UserProfile&&)>& profile_sink);

SynthCorpus generate(const SynthConfig& config);

nlohmann::json post_to_json(const Post& p);
nlohmann::json profile_to_json(const UserProfile& p);

/// Inverse-CDF sampler over ranks 0..n-1 with P(k) proportional to (k+1)^-s.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent);
  std::size_t operator()(std::mt19937_64& rng) const;

 private:
  std::vector<double> cdf_;
};

/// [0, 1) with 53 random bits.
double uniform_unit(std::mt19937_64& rng);
/// Uniform integer in [lo, hi] by rejection sampling.
std::uint64_t uniform_int(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi);

struct Metrics {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::optional<std::size_t> true_negatives;  // needs the universe size
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;

  nlohmann::json to_json() const;
};

Metrics evaluate(const std::set<std::string>& flagged, const GroundTruth& truth,
                 std::optional<std::size_t> universe = std::nullopt);
Metrics evaluate(const CoordinationReport& report, const GroundTruth& truth,
                 std::optional<std::size_t> universe = std::nullopt);

struct SweepGrid {
  std::vector<std::uint64_t> seeds;
  std::vector<double> campaign_overlaps;
  std::vector<double> similarity_thresholds;
  std::vector<double> percentiles;
};

struct SweepRow {
  std::uint64_t seed = 0;
  double campaign_overlap = 0.0;
  double similarity_threshold = 0.0;
  double percentile = 0.0;
  std::size_t flagged = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  Metrics metrics;
  std::string status = "ok";  // or the error message
};

/// Cartesian product in (seed, overlap, threshold, percentile) order. Empty
/// axes take the base value. Points run in parallel; rows keep grid order.
/// A failing point is recorded with its error status.
std::vector<SweepRow> sweep(const SynthConfig& base, const DetectionParams& params, const SweepGrid& grid);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace courl
