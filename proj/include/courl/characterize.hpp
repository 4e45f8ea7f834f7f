#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "courl/post.hpp"
#include "courl/url.hpp"

namespace courl {

/// Lowercase ASCII, ASCII punctuation removed, whitespace collapsed and
/// trimmed. Non-ASCII bytes (emoji, accented letters) are kept.
std::string normalize_bio(std::string_view bio);

/// Set of character 3-grams over code points; strings shorter than three code
/// points yield themselves as a single shingle.
std::set<std::u32string> char_shingles(std::string_view text, std::size_t n = 3);

double jaccard(const std::set<std::u32string>& a, const std::set<std::u32string>& b);

enum class BioMatchKind { exact_template, near_duplicate };
std::string_view to_string(BioMatchKind k);

struct BioCluster {
  std::string normalized_text;
  std::set<std::string> members;
  BioMatchKind match_kind = BioMatchKind::exact_template;
};

struct BioTemplateOptions {
  std::size_t min_members = 2;
  double jaccard_min = 0.8;
  /// Known phrases; every profile whose normalised bio contains a probe joins
  /// that probe's exact_template cluster.
  std::vector<std::string> template_probes;
};

/// Probe clusters first. Profiles not captured by a probe are then grouped by
/// identical normalised bio (exact_template) and by single-linkage over
/// distinct bios with 3-gram Jaccard >= jaccard_min (near_duplicate).
std::vector<BioCluster> find_bio_templates(std::span<const UserProfile> profiles, const BioTemplateOptions& opts = {});

/// Hashtags in a bio, in order of appearance, lowercased without '#'.
std::vector<std::string> extract_hashtags(std::string_view text);

struct HashtagSequenceCluster {
  std::vector<std::string> sequence;
  std::set<std::string> members;
};

/// Groups users whose bios carry the identical ordered hashtag list (at
/// least `min_length` tags).
std::vector<HashtagSequenceCluster> find_hashtag_sequences(std::span<const UserProfile> profiles,
                                                           std::size_t min_members = 2, std::size_t min_length = 2);

struct MediaPosting {
  std::string user_id;
  std::string post_id;
  std::int64_t created_at = 0;
};

struct DuplicateMediaGroup {
  std::string media_digest;
  std::vector<MediaPosting> postings;  // original posts only, by time then post id
  std::size_t distinct_users() const;
};

std::vector<DuplicateMediaGroup> find_duplicate_media(std::span<const Post> posts, std::size_t min_posters = 2);

/// Registered-domain suffix -> platform label; longest matching suffix wins,
/// unmatched domains are "web".
class PlatformMap {
 public:
  static PlatformMap defaults();
  static PlatformMap from_json(const nlohmann::json& j);

  void set(std::string domain, std::string label);
  std::string classify(std::string_view domain) const;
  nlohmann::json to_json() const;

 private:
  std::map<std::string, std::string> labels_;
};

struct LinkTargetProfile {
  std::map<std::string, std::uint64_t> domain_counts;
  std::map<std::string, std::uint64_t> platform_counts;
  std::uint64_t rejected_urls = 0;
};

/// Counts canonical registered domains over posts authored by `users`.
LinkTargetProfile domain_stats(std::span<const Post> posts, const std::set<std::string>& users,
                               const PlatformMap& platforms = PlatformMap::defaults(),
                               const UrlCanonicalizer& canon = {}, const ExpansionMap* expansion = nullptr);

struct BioLinkReport {
  std::map<std::string, std::set<std::string>> users_by_domain;  // domains with >= 2 users
  std::size_t skipped_urls = 0;
};

BioLinkReport shared_bio_links(std::span<const UserProfile> profiles, const UrlCanonicalizer& canon = {});

struct ForensicsReport {
  std::vector<BioCluster> bio_clusters;
  std::vector<HashtagSequenceCluster> hashtag_clusters;
  std::vector<DuplicateMediaGroup> media_groups;
  LinkTargetProfile domains;
  BioLinkReport bio_links;
  std::vector<std::string> missing_profiles;  // flagged ids without a profile
  std::vector<std::string> users_without_posts;
  std::map<std::string, std::uint64_t> posts_per_user;  // every requested user, zero included
  std::map<std::string, std::uint64_t> links_per_user;

  nlohmann::json to_json() const;
};

struct ForensicsOptions {
  BioTemplateOptions bios;
  std::size_t hashtag_min_members = 2;
  std::size_t hashtag_min_length = 2;
  std::size_t media_min_posters = 2;
  PlatformMap platforms = PlatformMap::defaults();
};

/// Runs every forensic over the posts and profiles of `users`.
ForensicsReport characterize(std::span<const Post> posts, std::span<const UserProfile> profiles,
                             const std::set<std::string>& users, const ForensicsOptions& opts = {},
                             const UrlCanonicalizer& canon = {}, const ExpansionMap* expansion = nullptr);

}  // namespace courl
