#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "courl/post.hpp"
#include "courl/url.hpp"

namespace courl {

/// JSON field names for posts. Defaults follow the names written by `synth`.
struct PostSchema {
  std::string post_id = "id";
  std::string author_id = "author_id";
  std::string created_at = "created_at";
  std::string text = "text";
  std::string urls = "urls";
  std::string hashtags = "hashtags";
  std::string mentions = "mentions";
  std::string media = "media";
  std::string language = "lang";
  std::string likes = "like_count";
  std::string retweets = "retweet_count";
  std::string replies = "reply_count";
  std::string quotes = "quote_count";
  std::string is_repost = "is_repost";

  /// Overrides any subset of names from a JSON object; unknown keys are a ConfigError.
  static PostSchema from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ProfileSchema {
  std::string user_id = "user_id";
  std::string handle = "handle";
  std::string display_name = "display_name";
  std::string bio = "bio";
  std::string bio_urls = "bio_urls";
  std::string profile_image_digest = "profile_image_digest";
  std::string cover_image_digest = "cover_image_digest";
  std::string suspended = "suspended";

  static ProfileSchema from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ParseStats {
  std::size_t lines = 0;     // non-blank lines seen
  std::size_t accepted = 0;
  std::size_t rejects = 0;   // malformed JSON, missing ids, bad field types, duplicate ids
};

/// Streams posts from a line-delimited JSON file in input order. Lines are
/// parsed in parallel in fixed-size batches; the callback runs on the calling
/// thread. Throws IoError when the file cannot be opened.
ParseStats read_posts(const std::string& path, const PostSchema& schema,
                      const std::function<void(Post&&)>& sink);

struct PostCorpus {
  std::vector<Post> posts;
  ParseStats stats;
};

PostCorpus parse_corpus(const std::string& path, const PostSchema& schema = {});

/// Parses a single line; std::nullopt when the line is rejected.
std::optional<Post> parse_post_line(std::string_view line, const PostSchema& schema);

struct ProfileSet {
  std::vector<UserProfile> profiles;
  ParseStats stats;
};

ProfileSet read_profiles(const std::string& path, const ProfileSchema& schema = {});

/// Newline-delimited handles; '@' prefixes stripped, lowercased.
std::set<std::string> read_handle_list(const std::string& path);

std::string normalize_tag(std::string_view tag, char prefix);

/// Users whose posts contain at least `min_urls` canonicalizable URL shares,
/// counting repeats. min_urls < 1 is a ConfigError.
std::set<std::string> filter_active_users(std::span<const Post> posts, std::size_t min_urls,
                                          const UrlCanonicalizer& canon = {});

using CountMap = std::map<std::string, std::uint64_t>;
using Histogram = std::map<std::int64_t, std::uint64_t>;

struct CorpusStats {
  std::uint64_t n_posts = 0;
  std::uint64_t n_authors = 0;
  std::uint64_t n_urls = 0;            // raw URL occurrences
  std::uint64_t n_rejected_urls = 0;   // failed canonicalization
  CountMap hashtag_counts;
  CountMap mention_counts;
  CountMap domain_counts;
  CountMap language_distribution;
  std::map<std::string, Histogram> interaction_histograms;  // likes/retweets/replies/quotes

  nlohmann::json to_json() const;
};

/// Order-independent accumulator; merge() is associative and commutative.
class CorpusStatsBuilder {
 public:
  explicit CorpusStatsBuilder(const UrlCanonicalizer* canon = nullptr, const ExpansionMap* expansion = nullptr);

  void add(const Post& post);
  void merge(const CorpusStatsBuilder& other);
  CorpusStats finish() const;

 private:
  const UrlCanonicalizer* canon_;
  const ExpansionMap* expansion_;
  CorpusStats stats_;
  std::set<std::string> authors_;
};

CorpusStats compute_corpus_stats(std::span<const Post> posts, const UrlCanonicalizer& canon = {},
                                 const ExpansionMap* expansion = nullptr);

/// Highest counts first; ties broken by item ascending.
std::vector<std::pair<std::string, std::uint64_t>> top_k(const CountMap& counts, std::size_t k);

}  // namespace courl
