#include "courl/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "courl/error.hpp"
#include "courl/ingest.hpp"
#include "courl/io.hpp"

namespace courl {

using nlohmann::json;

namespace {

constexpr std::int64_t kCorpusStart = 1714521600;  // 2024-05-01T00:00:00Z
constexpr std::int64_t kCorpusSpan = 31 * 86400;

const std::array<const char*, 12> kOrganicTags{"election2024", "politics", "news", "vote", "economy", "debate",
                                               "breaking", "usa", "senate", "policy", "media", "freedom"};
const std::array<const char*, 3> kCampaignTags{"truthnow", "realnews2024", "wakeupamerica"};
const std::array<const char*, 8> kMentions{"newsdesk", "pollwatch", "cityherald", "factcheck",
                                           "campaignhq", "statewire", "dailybrief", "civicvoice"};
const std::array<const char*, 10> kBioHeads{"Dad, runner and coffee addict.", "Teacher. Opinions my own.",
                                            "Policy nerd from Ohio.", "Retired nurse who loves gardening.",
                                            "Small business owner.", "Veteran. Fisherman. Grandfather.",
                                            "Writing about local politics.", "Student of history.",
                                            "Mom of three, Cubs fan.", "Engineer by day, guitarist by night."};
const std::array<const char*, 8> kBioTails{"", " Views are mine.", " #vote", " Proud American.",
                                           " Follow for daily news.", " RT != endorsement.", " Be kind.",
                                           " Faith, family, freedom."};
constexpr const char* kCampaignBio = "Tired of the lies? Follow the link below for the real news";
const std::array<const char*, 3> kCampaignBioTails{"", " #TruthNow #RealNews2024 #WakeUpAmerica",
                                                   " \xF0\x9F\x87\xBA\xF0\x9F\x87\xB8"};

std::string padded(const char* prefix, std::size_t value, int width) {
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

int digits_for(std::size_t n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return std::max(d, 6);
}

std::string catalog_url(std::size_t rank) {
  return "https://site" + std::to_string(rank % 211) + ".example.com/story/" + std::to_string(rank);
}

std::string pool_url(std::size_t j) { return "https://outlet.example.net/article/" + std::to_string(j); }

std::int64_t heavy_tail_count(std::mt19937_64& rng) {
  // Pareto(alpha = 1.5) shifted to start at 0
  const double u = uniform_unit(rng);
  const double x = std::pow(1.0 - u, -1.0 / 1.5) - 1.0;
  return static_cast<std::int64_t>(std::min(x, 1e6));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

double uniform_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t uniform_int(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t span = hi - lo;
  if (span == ~std::uint64_t{0}) return rng();
  const std::uint64_t range = span + 1;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return lo + x % range;
}

ZipfSampler::ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    total += std::pow(static_cast<double>(k + 1), -exponent);
    cdf_[k] = total;
  }
  for (auto& c : cdf_) c /= total;
}

std::size_t ZipfSampler::operator()(std::mt19937_64& rng) const {
  const double u = uniform_unit(rng);
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

void SynthConfig::validate() const {
  if (n_organic + n_coordinated == 0) throw ConfigError("synthetic corpus needs at least one user");
  if (url_catalog_size < 1) throw ConfigError("url_catalog_size must be >= 1");
  if (!(zipf_exponent > 0.0)) throw ConfigError("zipf_exponent must be > 0");
  if (min_shares < 1 || min_shares > max_shares) throw ConfigError("shares_per_user needs 1 <= min <= max");
  if (n_coordinated > 0 && campaign_pool_size < 1) throw ConfigError("campaign_pool_size must be >= 1");
  if (!(campaign_overlap >= 0.0 && campaign_overlap <= 1.0)) throw ConfigError("campaign_overlap must lie in [0, 1]");
}

json SynthConfig::to_json() const {
  return {{"seed", seed},
          {"n_organic", n_organic},
          {"n_coordinated", n_coordinated},
          {"url_catalog_size", url_catalog_size},
          {"zipf_exponent", zipf_exponent},
          {"shares_per_user", {min_shares, max_shares}},
          {"campaign_pool_size", campaign_pool_size},
          {"campaign_overlap", campaign_overlap},
          {"rng", kSynthRng}};
}

void SynthConfig::update_from_json(const json& j) {
  try {
    if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
    if (j.contains("n_organic")) n_organic = j["n_organic"].get<std::size_t>();
    if (j.contains("n_coordinated")) n_coordinated = j["n_coordinated"].get<std::size_t>();
    if (j.contains("url_catalog_size")) url_catalog_size = j["url_catalog_size"].get<std::size_t>();
    if (j.contains("zipf_exponent")) zipf_exponent = j["zipf_exponent"].get<double>();
    if (j.contains("shares_per_user")) {
      const auto& s = j["shares_per_user"];
      if (!s.is_array() || s.size() != 2) throw ConfigError("shares_per_user must be [min, max]");
      min_shares = s[0].get<std::size_t>();
      max_shares = s[1].get<std::size_t>();
    }
    if (j.contains("campaign_pool_size")) campaign_pool_size = j["campaign_pool_size"].get<std::size_t>();
    if (j.contains("campaign_overlap")) campaign_overlap = j["campaign_overlap"].get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad synth parameter: ") + e.what());
  }
}

json GroundTruth::to_json() const { return {{"coordinated_ids", coordinated_ids}}; }

GroundTruth GroundTruth::from_json(const json& j) {
  GroundTruth t;
  for (const auto& id : j.at("coordinated_ids")) t.coordinated_ids.insert(id.get<std::string>());
  return t;
}

GroundTruth generate(const SynthConfig& config, const std::function<void(Post&&)>& post_sink,
                     const std::function<void(UserProfile&&)>& profile_sink) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  const std::size_t n_users = config.n_organic + config.n_coordinated;
  const int width = digits_for(n_users);

  std::vector<std::size_t> order(n_users);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<char> coordinated(n_users, 0);
  for (std::size_t i = 0; i < config.n_coordinated; ++i) {
    const auto j = static_cast<std::size_t>(uniform_int(rng, i, n_users - 1));
    std::swap(order[i], order[j]);
    coordinated[order[i]] = 1;
  }

  const ZipfSampler zipf(config.url_catalog_size, config.zipf_exponent);
  GroundTruth truth;
  std::size_t post_counter = 0;
  const int post_width = std::max(8, digits_for(n_users * config.max_shares));

  for (std::size_t u = 0; u < n_users; ++u) {
    const bool coord = coordinated[u] != 0;
    const std::string user_id = padded("u", u, width);
    if (coord) truth.coordinated_ids.insert(user_id);

    UserProfile profile;
    profile.user_id = user_id;
    profile.handle = padded("acct", u, width);
    profile.display_name = "User " + std::to_string(u);
    if (coord) {
      profile.bio = std::string(kCampaignBio) + kCampaignBioTails[uniform_int(rng, 0, kCampaignBioTails.size() - 1)];
      profile.bio_urls.push_back("https://outlet.example.net/");
      profile.profile_image_digest = "sha256:campaign-avatar-" + std::to_string(uniform_int(rng, 0, 2));
    } else {
      profile.bio = std::string(kBioHeads[uniform_int(rng, 0, kBioHeads.size() - 1)]) +
                    kBioTails[uniform_int(rng, 0, kBioTails.size() - 1)];
      if (uniform_unit(rng) < 0.2) profile.bio_urls.push_back(catalog_url(zipf(rng)));
      profile.profile_image_digest = "sha256:" + hex64(rng());
    }

    const auto n_shares = static_cast<std::size_t>(uniform_int(rng, config.min_shares, config.max_shares));
    const auto pool_shares =
        coord ? static_cast<std::size_t>(std::ceil(config.campaign_overlap * static_cast<double>(n_shares) - 1e-9)) : 0;

    for (std::size_t s = 0; s < n_shares; ++s) {
      Post p;
      p.post_id = padded("p", post_counter++, post_width);
      p.author_id = user_id;
      p.created_at = kCorpusStart + static_cast<std::int64_t>(uniform_int(rng, 0, kCorpusSpan - 1));
      const std::string url =
          s < pool_shares ? pool_url(uniform_int(rng, 0, config.campaign_pool_size - 1)) : catalog_url(zipf(rng));
      p.text = "Worth a read: " + url;
      p.raw_urls.push_back(url);

      const auto n_tags = uniform_int(rng, 0, 2);
      for (std::uint64_t t = 0; t < n_tags; ++t) {
        p.hashtags.emplace_back(coord ? kCampaignTags[uniform_int(rng, 0, kCampaignTags.size() - 1)]
                                      : kOrganicTags[uniform_int(rng, 0, kOrganicTags.size() - 1)]);
      }
      if (uniform_unit(rng) < 0.3) p.mentions.emplace_back(kMentions[uniform_int(rng, 0, kMentions.size() - 1)]);

      const double lang = uniform_unit(rng);
      p.language = lang < 0.90 ? "en" : lang < 0.95 ? "es" : lang < 0.98 ? "fr" : "";

      p.likes = heavy_tail_count(rng);
      p.retweets = heavy_tail_count(rng);
      p.replies = heavy_tail_count(rng);
      p.quotes = heavy_tail_count(rng);

      const double media = uniform_unit(rng);
      if (coord) {
        if (media < 0.15) p.media_digests.push_back("sha256:campaign-image-" + std::to_string(uniform_int(rng, 0, 2)));
      } else {
        p.is_repost = uniform_unit(rng) < 0.25;
        if (media < 0.05) p.media_digests.push_back("sha256:" + hex64(rng()));
      }
      post_sink(std::move(p));
    }
    profile_sink(std::move(profile));
  }
  return truth;
}

SynthCorpus generate(const SynthConfig& config) {
  SynthCorpus corpus;
  corpus.truth = generate(
      config, [&](Post&& p) { corpus.posts.push_back(std::move(p)); },
      [&](UserProfile&& p) { corpus.profiles.push_back(std::move(p)); });
  return corpus;
}

json post_to_json(const Post& p) {
  const PostSchema s;
  json j;
  j[s.post_id] = p.post_id;
  j[s.author_id] = p.author_id;
  j[s.created_at] = p.created_at;
  j[s.text] = p.text;
  j[s.urls] = p.raw_urls;
  j[s.hashtags] = p.hashtags;
  j[s.mentions] = p.mentions;
  j[s.media] = p.media_digests;
  if (!p.language.empty()) j[s.language] = p.language;
  j[s.likes] = p.likes;
  j[s.retweets] = p.retweets;
  j[s.replies] = p.replies;
  j[s.quotes] = p.quotes;
  j[s.is_repost] = p.is_repost;
  return j;
}

json profile_to_json(const UserProfile& p) {
  const ProfileSchema s;
  json j;
  j[s.user_id] = p.user_id;
  j[s.handle] = p.handle;
  j[s.display_name] = p.display_name;
  j[s.bio] = p.bio;
  j[s.bio_urls] = p.bio_urls;
  if (p.profile_image_digest) j[s.profile_image_digest] = *p.profile_image_digest;
  if (p.cover_image_digest) j[s.cover_image_digest] = *p.cover_image_digest;
  if (p.suspended) j[s.suspended] = *p.suspended;
  return j;
}

Metrics evaluate(const std::set<std::string>& flagged, const GroundTruth& truth, std::optional<std::size_t> universe) {
  Metrics m;
  for (const auto& f : flagged) m.true_positives += truth.coordinated_ids.contains(f);
  m.false_positives = flagged.size() - m.true_positives;
  m.false_negatives = truth.coordinated_ids.size() - m.true_positives;
  if (universe) {
    const std::size_t seen = m.true_positives + m.false_positives + m.false_negatives;
    m.true_negatives = *universe >= seen ? *universe - seen : 0;
  }
  const auto tp = static_cast<double>(m.true_positives);
  if (!flagged.empty()) {
    m.precision = tp / static_cast<double>(flagged.size());
  } else if (truth.coordinated_ids.empty()) {
    m.precision = 1.0;
  }
  if (!truth.coordinated_ids.empty()) {
    m.recall = tp / static_cast<double>(truth.coordinated_ids.size());
  } else if (flagged.empty()) {
    m.recall = 1.0;
  }
  if (m.precision && m.recall) {
    const double s = *m.precision + *m.recall;
    m.f1 = s > 0.0 ? 2.0 * *m.precision * *m.recall / s : 0.0;
  }
  return m;
}

Metrics evaluate(const CoordinationReport& report, const GroundTruth& truth, std::optional<std::size_t> universe) {
  return evaluate(report.flagged_ids(), truth, universe);
}

json Metrics::to_json() const {
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  return {{"true_positives", true_positives}, {"false_positives", false_positives},
          {"false_negatives", false_negatives}, {"true_negatives", opt(true_negatives)},
          {"precision", opt(precision)},         {"recall", opt(recall)},
          {"f1", opt(f1)}};
}

std::vector<SweepRow> sweep(const SynthConfig& base, const DetectionParams& params, const SweepGrid& grid) {
  auto or_base = [](auto axis, auto value) {
    if (axis.empty()) axis.push_back(value);
    return axis;
  };
  const auto seeds = or_base(grid.seeds, base.seed);
  const auto overlaps = or_base(grid.campaign_overlaps, base.campaign_overlap);
  const auto thresholds = or_base(grid.similarity_thresholds, params.similarity_threshold);
  const auto percentiles = or_base(grid.percentiles, params.percentile);

  std::vector<SweepRow> rows;
  for (auto seed : seeds)
    for (auto overlap : overlaps)
      for (auto threshold : thresholds)
        for (auto pct : percentiles) {
          SweepRow r;
          r.seed = seed;
          r.campaign_overlap = overlap;
          r.similarity_threshold = threshold;
          r.percentile = pct;
          rows.push_back(r);
        }

  const auto n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    try {
      SynthConfig cfg = base;
      cfg.seed = row.seed;
      cfg.campaign_overlap = row.campaign_overlap;
      DetectionParams p = params;
      p.similarity_threshold = row.similarity_threshold;
      p.percentile = row.percentile;
      const auto corpus = generate(cfg);
      const auto result = run_detection(corpus.posts, p);
      row.flagged = result.report.flagged.size();
      row.nodes = result.network.n_nodes();
      row.edges = result.network.n_edges();
      row.metrics = evaluate(result.report, corpus.truth, corpus.profiles.size());
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "seed,campaign_overlap,similarity_threshold,percentile,status,nodes,edges,flagged,"
         "true_positives,false_positives,false_negatives,precision,recall,f1\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    out << r.seed << ',' << format_double(r.campaign_overlap) << ',' << format_double(r.similarity_threshold) << ','
        << format_double(r.percentile) << ',' << csv_escape(r.status) << ',' << r.nodes << ',' << r.edges << ','
        << r.flagged << ',' << r.metrics.true_positives << ',' << r.metrics.false_positives << ','
        << r.metrics.false_negatives << ',' << opt(r.metrics.precision) << ',' << opt(r.metrics.recall) << ','
        << opt(r.metrics.f1) << '\n';
  }
  return out.str();
}

}  // namespace courl
