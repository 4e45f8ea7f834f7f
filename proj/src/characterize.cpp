#include "courl/characterize.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <unordered_map>

#include "courl/error.hpp"

namespace courl {

using nlohmann::json;

namespace {

bool ascii(unsigned char c) { return c < 0x80; }

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1f) : len == 3 ? (c & 0x0f) : (c & 0x07);
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (!ok) {
      out.push_back(U'\uFFFD');
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::string normalize_bio(std::string_view bio) {
  std::string out;
  out.reserve(bio.size());
  bool pending_space = false;
  for (char ch : bio) {
    const auto c = static_cast<unsigned char>(ch);
    if (ascii(c) && std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (ascii(c) && std::ispunct(c)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(ascii(c) ? static_cast<char>(std::tolower(c)) : ch);
  }
  return out;
}

std::set<std::u32string> char_shingles(std::string_view text, std::size_t n) {
  const auto cps = decode_utf8(text);
  std::set<std::u32string> out;
  if (cps.empty()) return out;
  if (cps.size() < n) {
    out.insert(cps);
    return out;
  }
  for (std::size_t i = 0; i + n <= cps.size(); ++i) out.insert(cps.substr(i, n));
  return out;
}

double jaccard(const std::set<std::u32string>& a, const std::set<std::u32string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::string_view to_string(BioMatchKind k) {
  return k == BioMatchKind::exact_template ? "exact_template" : "near_duplicate";
}

std::vector<BioCluster> find_bio_templates(std::span<const UserProfile> profiles, const BioTemplateOptions& opts) {
  if (opts.min_members < 2) throw ConfigError("bio min_members must be >= 2");
  if (!(opts.jaccard_min > 0.0 && opts.jaccard_min <= 1.0)) throw ConfigError("jaccard_min must lie in (0, 1]");

  std::vector<std::pair<std::string, std::string>> bios;  // (user, normalised bio)
  for (const auto& p : profiles) {
    auto b = normalize_bio(p.bio);
    if (!b.empty()) bios.emplace_back(p.user_id, std::move(b));
  }
  std::sort(bios.begin(), bios.end());

  std::vector<BioCluster> clusters;
  std::set<std::string> captured;
  for (const auto& probe_raw : opts.template_probes) {
    const auto probe = normalize_bio(probe_raw);
    if (probe.empty()) continue;
    BioCluster c{probe, {}, BioMatchKind::exact_template};
    for (const auto& [user, bio] : bios) {
      if (bio.find(probe) != std::string::npos) c.members.insert(user);
    }
    if (c.members.size() >= opts.min_members) {
      captured.insert(c.members.begin(), c.members.end());
      clusters.push_back(std::move(c));
    }
  }

  std::map<std::string, std::set<std::string>> by_text;
  for (const auto& [user, bio] : bios) {
    if (!captured.contains(user)) by_text[bio].insert(user);
  }
  for (const auto& [text, users] : by_text) {
    if (users.size() >= opts.min_members) clusters.push_back({text, users, BioMatchKind::exact_template});
  }

  // single linkage over distinct bios
  std::vector<const std::string*> texts;
  std::vector<std::set<std::u32string>> shingles;
  for (const auto& [text, users] : by_text) {
    texts.push_back(&text);
    shingles.push_back(char_shingles(text));
  }
  DisjointSet dsu(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    for (std::size_t j = i + 1; j < texts.size(); ++j) {
      const auto lo = std::min(shingles[i].size(), shingles[j].size());
      const auto hi = std::max(shingles[i].size(), shingles[j].size());
      if (static_cast<double>(lo) < opts.jaccard_min * static_cast<double>(hi)) continue;
      if (jaccard(shingles[i], shingles[j]) >= opts.jaccard_min) dsu.unite(i, j);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < texts.size(); ++i) groups[dsu.find(i)].push_back(i);
  for (const auto& [root, idx] : groups) {
    if (idx.size() < 2) continue;
    BioCluster c{*texts[idx.front()], {}, BioMatchKind::near_duplicate};
    for (auto i : idx) {
      const auto& users = by_text[*texts[i]];
      c.members.insert(users.begin(), users.end());
    }
    if (c.members.size() >= opts.min_members) clusters.push_back(std::move(c));
  }
  return clusters;
}

std::vector<std::string> extract_hashtags(std::string_view text) {
  std::vector<std::string> tags;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '#') continue;
    std::size_t j = i + 1;
    std::string tag;
    while (j < text.size()) {
      const auto c = static_cast<unsigned char>(text[j]);
      if (!ascii(c) || std::isalnum(c) || c == '_') {
        tag.push_back(ascii(c) ? static_cast<char>(std::tolower(c)) : text[j]);
        ++j;
      } else {
        break;
      }
    }
    if (!tag.empty()) tags.push_back(std::move(tag));
    i = j - 1;
  }
  return tags;
}

std::vector<HashtagSequenceCluster> find_hashtag_sequences(std::span<const UserProfile> profiles,
                                                           std::size_t min_members, std::size_t min_length) {
  if (min_members < 2) throw ConfigError("hashtag min_members must be >= 2");
  std::map<std::vector<std::string>, std::set<std::string>> groups;
  for (const auto& p : profiles) {
    auto seq = extract_hashtags(p.bio);
    if (!seq.empty() && seq.size() >= min_length) groups[std::move(seq)].insert(p.user_id);
  }
  std::vector<HashtagSequenceCluster> out;
  for (auto& [seq, users] : groups) {
    if (users.size() >= min_members) out.push_back({seq, users});
  }
  return out;
}

std::size_t DuplicateMediaGroup::distinct_users() const {
  std::set<std::string_view> users;
  for (const auto& p : postings) users.insert(p.user_id);
  return users.size();
}

std::vector<DuplicateMediaGroup> find_duplicate_media(std::span<const Post> posts, std::size_t min_posters) {
  if (min_posters < 2) throw ConfigError("media min_posters must be >= 2");
  std::map<std::string, std::vector<MediaPosting>> by_digest;
  for (const auto& p : posts) {
    if (p.is_repost) continue;
    std::set<std::string_view> seen;
    for (const auto& d : p.media_digests) {
      if (d.empty() || !seen.insert(d).second) continue;
      by_digest[d].push_back({p.author_id, p.post_id, p.created_at});
    }
  }
  std::vector<DuplicateMediaGroup> out;
  for (auto& [digest, postings] : by_digest) {
    DuplicateMediaGroup g{digest, std::move(postings)};
    if (g.distinct_users() < min_posters) continue;
    std::sort(g.postings.begin(), g.postings.end(), [](const MediaPosting& a, const MediaPosting& b) {
      return a.created_at != b.created_at ? a.created_at < b.created_at : a.post_id < b.post_id;
    });
    out.push_back(std::move(g));
  }
  return out;
}

PlatformMap PlatformMap::defaults() {
  PlatformMap m;
  for (const char* d : {"youtube.com", "youtu.be"}) m.set(d, "video-platform");
  for (const char* d : {"facebook.com", "instagram.com", "reddit.com", "t.me"}) m.set(d, "other-social");
  for (const char* d : {"x.com", "twitter.com", "t.co"}) m.set(d, "this-platform");
  return m;
}

PlatformMap PlatformMap::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("platform map must be a JSON object of domain -> label");
  PlatformMap m;
  for (const auto& [domain, label] : j.items()) {
    if (!label.is_string()) throw ConfigError("platform label for " + domain + " must be a string");
    m.set(domain, label.get<std::string>());
  }
  return m;
}

void PlatformMap::set(std::string domain, std::string label) {
  for (auto& c : domain) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  labels_[std::move(domain)] = std::move(label);
}

std::string PlatformMap::classify(std::string_view domain) const {
  while (!domain.empty()) {
    if (auto it = labels_.find(std::string(domain)); it != labels_.end()) return it->second;
    auto dot = domain.find('.');
    if (dot == std::string_view::npos) break;
    domain.remove_prefix(dot + 1);
  }
  return "web";
}

json PlatformMap::to_json() const { return labels_; }

LinkTargetProfile domain_stats(std::span<const Post> posts, const std::set<std::string>& users,
                               const PlatformMap& platforms, const UrlCanonicalizer& canon,
                               const ExpansionMap* expansion) {
  LinkTargetProfile out;
  for (const char* label : {"this-platform", "video-platform", "other-social", "web"}) out.platform_counts[label] = 0;
  for (const auto& p : posts) {
    if (!users.contains(p.author_id)) continue;
    for (const auto& raw : p.raw_urls) {
      auto url = canon(raw);
      if (!url) {
        ++out.rejected_urls;
        continue;
      }
      if (expansion) url = expansion->apply(*url, canon);
      ++out.domain_counts[url->registered_domain];
      ++out.platform_counts[platforms.classify(url->registered_domain)];
    }
  }
  return out;
}

BioLinkReport shared_bio_links(std::span<const UserProfile> profiles, const UrlCanonicalizer& canon) {
  BioLinkReport out;
  std::map<std::string, std::set<std::string>> all;
  for (const auto& p : profiles) {
    for (const auto& raw : p.bio_urls) {
      auto url = canon(raw);
      if (!url) {
        ++out.skipped_urls;
        continue;
      }
      all[url->registered_domain].insert(p.user_id);
    }
  }
  for (auto& [domain, users] : all) {
    if (users.size() >= 2) out.users_by_domain.emplace(domain, std::move(users));
  }
  return out;
}

ForensicsReport characterize(std::span<const Post> posts, std::span<const UserProfile> profiles,
                             const std::set<std::string>& users, const ForensicsOptions& opts,
                             const UrlCanonicalizer& canon, const ExpansionMap* expansion) {
  ForensicsReport r;
  std::vector<UserProfile> selected_profiles;
  std::set<std::string> with_profile;
  for (const auto& p : profiles) {
    if (users.contains(p.user_id)) {
      selected_profiles.push_back(p);
      with_profile.insert(p.user_id);
    }
  }
  std::vector<Post> selected_posts;
  for (const auto& u : users) {
    r.posts_per_user[u] = 0;
    r.links_per_user[u] = 0;
  }
  for (const auto& p : posts) {
    if (!users.contains(p.author_id)) continue;
    selected_posts.push_back(p);
    ++r.posts_per_user[p.author_id];
    r.links_per_user[p.author_id] += p.raw_urls.size();
  }
  for (const auto& u : users) {
    if (!with_profile.contains(u)) r.missing_profiles.push_back(u);
    if (r.posts_per_user[u] == 0) r.users_without_posts.push_back(u);
  }

  r.bio_clusters = find_bio_templates(selected_profiles, opts.bios);
  r.hashtag_clusters = find_hashtag_sequences(selected_profiles, opts.hashtag_min_members, opts.hashtag_min_length);
  r.media_groups = find_duplicate_media(selected_posts, opts.media_min_posters);
  r.domains = domain_stats(selected_posts, users, opts.platforms, canon, expansion);
  r.bio_links = shared_bio_links(selected_profiles, canon);
  return r;
}

json ForensicsReport::to_json() const {
  json j;
  json bios = json::array();
  for (const auto& c : bio_clusters)
    bios.push_back({{"normalized_text", c.normalized_text},
                    {"members", c.members},
                    {"match_kind", std::string(to_string(c.match_kind))}});
  j["bio_clusters"] = std::move(bios);
  json tags = json::array();
  for (const auto& c : hashtag_clusters) tags.push_back({{"sequence", c.sequence}, {"members", c.members}});
  j["hashtag_sequence_clusters"] = std::move(tags);
  json media = json::array();
  for (const auto& g : media_groups) {
    json postings = json::array();
    for (const auto& p : g.postings)
      postings.push_back({{"user_id", p.user_id}, {"post_id", p.post_id}, {"created_at", p.created_at}});
    media.push_back({{"media_digest", g.media_digest}, {"distinct_users", g.distinct_users()}, {"postings", postings}});
  }
  j["duplicate_media_groups"] = std::move(media);
  j["domain_counts"] = domains.domain_counts;
  j["platform_counts"] = domains.platform_counts;
  j["rejected_urls"] = domains.rejected_urls;
  json links = json::object();
  for (const auto& [d, u] : bio_links.users_by_domain) links[d] = u;
  j["bio_links"] = std::move(links);
  j["bio_links_skipped"] = bio_links.skipped_urls;
  j["missing_profiles"] = missing_profiles;
  j["users_without_posts"] = users_without_posts;
  j["posts_per_user"] = posts_per_user;
  j["links_per_user"] = links_per_user;
  return j;
}

}  // namespace courl
