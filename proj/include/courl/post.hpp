#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace courl {

/// One social-media message.
struct Post {
  std::string post_id;
  std::string author_id;
  std::int64_t created_at = 0;  // UTC seconds
  std::string text;
  std::vector<std::string> raw_urls;
  std::vector<std::string> hashtags;  // lowercase, no '#'
  std::vector<std::string> mentions;  // lowercase, no '@'
  std::vector<std::string> media_digests;
  std::string language;
  std::int64_t likes = 0;
  std::int64_t retweets = 0;
  std::int64_t replies = 0;
  std::int64_t quotes = 0;
  bool is_repost = false;
};

struct UserProfile {
  std::string user_id;
  std::string handle;
  std::string display_name;
  std::string bio;
  std::vector<std::string> bio_urls;
  std::optional<std::string> profile_image_digest;
  std::optional<std::string> cover_image_digest;
  std::optional<bool> suspended;
};

}  // namespace courl
