#include "courl/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "courl/error.hpp"

namespace courl {

using nlohmann::json;

namespace {

constexpr std::size_t kBatchLines = 16384;

template <class Schema, std::size_t N>
Schema schema_from_json(const json& j, const std::array<std::pair<const char*, std::string Schema::*>, N>& fields,
                        const char* what) {
  Schema schema;
  if (j.is_null()) return schema;
  if (!j.is_object()) throw ConfigError(std::string(what) + " mapping must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    auto it = std::find_if(fields.begin(), fields.end(), [&](const auto& f) { return key == f.first; });
    if (it == fields.end()) throw ConfigError(std::string("unknown ") + what + " field: " + key);
    if (!value.is_string() || value.template get<std::string>().empty())
      throw ConfigError(std::string(what) + " field name for '" + key + "' must be a non-empty string");
    schema.*(it->second) = value.template get<std::string>();
  }
  return schema;
}

template <class Schema, std::size_t N>
json schema_to_json(const Schema& schema, const std::array<std::pair<const char*, std::string Schema::*>, N>& fields) {
  json j = json::object();
  for (const auto& [key, member] : fields) j[key] = schema.*member;
  return j;
}

const std::array<std::pair<const char*, std::string PostSchema::*>, 14> kPostFields{{
    {"post_id", &PostSchema::post_id},
    {"author_id", &PostSchema::author_id},
    {"created_at", &PostSchema::created_at},
    {"text", &PostSchema::text},
    {"urls", &PostSchema::urls},
    {"hashtags", &PostSchema::hashtags},
    {"mentions", &PostSchema::mentions},
    {"media", &PostSchema::media},
    {"language", &PostSchema::language},
    {"likes", &PostSchema::likes},
    {"retweets", &PostSchema::retweets},
    {"replies", &PostSchema::replies},
    {"quotes", &PostSchema::quotes},
    {"is_repost", &PostSchema::is_repost},
}};

const std::array<std::pair<const char*, std::string ProfileSchema::*>, 8> kProfileFields{{
    {"user_id", &ProfileSchema::user_id},
    {"handle", &ProfileSchema::handle},
    {"display_name", &ProfileSchema::display_name},
    {"bio", &ProfileSchema::bio},
    {"bio_urls", &ProfileSchema::bio_urls},
    {"profile_image_digest", &ProfileSchema::profile_image_digest},
    {"cover_image_digest", &ProfileSchema::cover_image_digest},
    {"suspended", &ProfileSchema::suspended},
}};

struct BadField {};

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

// ids may arrive as JSON numbers (tweet ids); anything else is rejected
std::string get_id(const json& obj, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) return {};
  if (v->is_string()) return v->get<std::string>();
  if (v->is_number_integer()) return v->dump();
  throw BadField{};
}

std::string get_string(const json& obj, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) return {};
  if (!v->is_string()) throw BadField{};
  return v->get<std::string>();
}

std::optional<std::string> get_optional_string(const json& obj, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) return std::nullopt;
  if (!v->is_string()) throw BadField{};
  return v->get<std::string>();
}

std::vector<std::string> get_string_list(const json& obj, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) return {};
  if (!v->is_array()) throw BadField{};
  std::vector<std::string> out;
  out.reserve(v->size());
  for (const auto& e : *v) {
    if (!e.is_string()) throw BadField{};
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::int64_t get_int(const json& obj, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) return 0;
  if (v->is_number_integer()) return v->get<std::int64_t>();
  if (v->is_string()) {
    const auto& s = v->get_ref<const std::string&>();
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw BadField{};
    return out;
  }
  throw BadField{};
}

std::int64_t get_count(const json& obj, const std::string& key) {
  std::int64_t n = get_int(obj, key);
  if (n < 0) throw BadField{};
  return n;
}

bool get_bool(const json& obj, const std::string& key) {
  const json* v = find(obj, key);
  if (!v) return false;
  if (!v->is_boolean()) throw BadField{};
  return v->get<bool>();
}

std::vector<std::string> normalize_tags(std::vector<std::string> tags, char prefix) {
  std::vector<std::string> out;
  out.reserve(tags.size());
  for (auto& t : tags) {
    auto n = normalize_tag(t, prefix);
    if (!n.empty()) out.push_back(std::move(n));
  }
  return out;
}

std::optional<UserProfile> parse_profile_line(std::string_view line, const ProfileSchema& schema) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) return std::nullopt;
  try {
    UserProfile p;
    p.user_id = get_id(obj, schema.user_id);
    if (p.user_id.empty()) return std::nullopt;
    p.handle = get_string(obj, schema.handle);
    p.display_name = get_string(obj, schema.display_name);
    p.bio = get_string(obj, schema.bio);
    p.bio_urls = get_string_list(obj, schema.bio_urls);
    p.profile_image_digest = get_optional_string(obj, schema.profile_image_digest);
    p.cover_image_digest = get_optional_string(obj, schema.cover_image_digest);
    if (const json* s = find(obj, schema.suspended)) {
      if (!s->is_boolean()) return std::nullopt;
      p.suspended = s->get<bool>();
    }
    return p;
  } catch (const BadField&) {
    return std::nullopt;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

// Reads `path` in batches, parses each batch in parallel and hands accepted
// records to `emit` in input order.
template <class Record, class Parse, class Emit>
ParseStats read_jsonl(const std::string& path, Parse parse, Emit emit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path);

  ParseStats stats;
  std::vector<std::string> lines;
  std::vector<std::optional<Record>> parsed;
  lines.reserve(kBatchLines);
  std::string line;
  bool more = true;
  while (more) {
    lines.clear();
    while (lines.size() < kBatchLines && (more = static_cast<bool>(std::getline(in, line)))) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (is_blank(line)) continue;
      lines.push_back(std::move(line));
    }
    if (in.bad()) throw IoError("read error: " + path);
    parsed.assign(lines.size(), std::nullopt);
    const auto n = static_cast<std::int64_t>(lines.size());
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n; ++i) parsed[static_cast<std::size_t>(i)] = parse(lines[static_cast<std::size_t>(i)]);
    for (auto& rec : parsed) {
      ++stats.lines;
      if (rec && emit(std::move(*rec))) {
        ++stats.accepted;
      } else {
        ++stats.rejects;
      }
    }
  }
  return stats;
}

}  // namespace

PostSchema PostSchema::from_json(const json& j) { return schema_from_json<PostSchema>(j, kPostFields, "post"); }
json PostSchema::to_json() const { return schema_to_json(*this, kPostFields); }

ProfileSchema ProfileSchema::from_json(const json& j) {
  return schema_from_json<ProfileSchema>(j, kProfileFields, "profile");
}
json ProfileSchema::to_json() const { return schema_to_json(*this, kProfileFields); }

std::string normalize_tag(std::string_view tag, char prefix) {
  while (!tag.empty() && std::isspace(static_cast<unsigned char>(tag.front()))) tag.remove_prefix(1);
  while (!tag.empty() && std::isspace(static_cast<unsigned char>(tag.back()))) tag.remove_suffix(1);
  while (!tag.empty() && tag.front() == prefix) tag.remove_prefix(1);
  std::string out(tag);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<Post> parse_post_line(std::string_view line, const PostSchema& schema) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) return std::nullopt;
  try {
    Post p;
    p.post_id = get_id(obj, schema.post_id);
    p.author_id = get_id(obj, schema.author_id);
    if (p.post_id.empty() || p.author_id.empty()) return std::nullopt;
    p.created_at = get_int(obj, schema.created_at);
    p.text = get_string(obj, schema.text);
    p.raw_urls = get_string_list(obj, schema.urls);
    p.hashtags = normalize_tags(get_string_list(obj, schema.hashtags), '#');
    p.mentions = normalize_tags(get_string_list(obj, schema.mentions), '@');
    p.media_digests = get_string_list(obj, schema.media);
    p.language = get_string(obj, schema.language);
    p.likes = get_count(obj, schema.likes);
    p.retweets = get_count(obj, schema.retweets);
    p.replies = get_count(obj, schema.replies);
    p.quotes = get_count(obj, schema.quotes);
    p.is_repost = get_bool(obj, schema.is_repost);
    return p;
  } catch (const BadField&) {
    return std::nullopt;
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

ParseStats read_posts(const std::string& path, const PostSchema& schema, const std::function<void(Post&&)>& sink) {
  std::unordered_set<std::string> seen;
  return read_jsonl<Post>(
      path, [&](const std::string& line) { return parse_post_line(line, schema); },
      [&](Post&& p) {
        if (!seen.insert(p.post_id).second) return false;
        sink(std::move(p));
        return true;
      });
}

PostCorpus parse_corpus(const std::string& path, const PostSchema& schema) {
  PostCorpus corpus;
  corpus.stats = read_posts(path, schema, [&](Post&& p) { corpus.posts.push_back(std::move(p)); });
  return corpus;
}

ProfileSet read_profiles(const std::string& path, const ProfileSchema& schema) {
  ProfileSet set;
  std::unordered_set<std::string> seen;
  set.stats = read_jsonl<UserProfile>(
      path, [&](const std::string& line) { return parse_profile_line(line, schema); },
      [&](UserProfile&& p) {
        if (!seen.insert(p.user_id).second) return false;
        set.profiles.push_back(std::move(p));
        return true;
      });
  return set;
}

std::set<std::string> read_handle_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open handle list: " + path);
  std::set<std::string> handles;
  std::string line;
  while (std::getline(in, line)) {
    auto h = normalize_tag(line, '@');
    if (!h.empty() && h.front() != '#') handles.insert(std::move(h));
  }
  return handles;
}

std::set<std::string> filter_active_users(std::span<const Post> posts, std::size_t min_urls,
                                          const UrlCanonicalizer& canon) {
  if (min_urls < 1) throw ConfigError("min_urls must be >= 1");
  std::unordered_map<std::string, std::size_t> shares;
  for (const auto& p : posts) {
    for (const auto& u : p.raw_urls) {
      if (canon(u)) ++shares[p.author_id];
    }
  }
  std::set<std::string> active;
  for (const auto& [user, n] : shares) {
    if (n >= min_urls) active.insert(user);
  }
  return active;
}

json CorpusStats::to_json() const {
  json j;
  j["n_posts"] = n_posts;
  j["n_authors"] = n_authors;
  j["n_urls"] = n_urls;
  j["n_rejected_urls"] = n_rejected_urls;
  j["hashtag_counts"] = hashtag_counts;
  j["mention_counts"] = mention_counts;
  j["domain_counts"] = domain_counts;
  j["language_distribution"] = language_distribution;
  json hist = json::object();
  for (const auto& [kind, h] : interaction_histograms) {
    json rows = json::array();
    for (const auto& [value, freq] : h) rows.push_back({value, freq});
    hist[kind] = std::move(rows);
  }
  j["interaction_histograms"] = std::move(hist);
  return j;
}

CorpusStatsBuilder::CorpusStatsBuilder(const UrlCanonicalizer* canon, const ExpansionMap* expansion)
    : canon_(canon), expansion_(expansion) {
  for (const char* kind : {"likes", "retweets", "replies", "quotes"}) stats_.interaction_histograms[kind];
}

void CorpusStatsBuilder::add(const Post& post) {
  static const UrlCanonicalizer default_canon;
  const UrlCanonicalizer& canon = canon_ ? *canon_ : default_canon;

  ++stats_.n_posts;
  authors_.insert(post.author_id);
  for (const auto& h : post.hashtags) ++stats_.hashtag_counts[h];
  for (const auto& m : post.mentions) ++stats_.mention_counts[m];
  for (const auto& raw : post.raw_urls) {
    ++stats_.n_urls;
    auto url = canon(raw);
    if (!url) {
      ++stats_.n_rejected_urls;
      continue;
    }
    if (expansion_) url = expansion_->apply(*url, canon);
    ++stats_.domain_counts[url->registered_domain];
  }
  if (!post.language.empty()) ++stats_.language_distribution[post.language];
  auto& hist = stats_.interaction_histograms;
  ++hist["likes"][post.likes];
  ++hist["retweets"][post.retweets];
  ++hist["replies"][post.replies];
  ++hist["quotes"][post.quotes];
}

void CorpusStatsBuilder::merge(const CorpusStatsBuilder& other) {
  const auto& o = other.stats_;
  stats_.n_posts += o.n_posts;
  stats_.n_urls += o.n_urls;
  stats_.n_rejected_urls += o.n_rejected_urls;
  authors_.insert(other.authors_.begin(), other.authors_.end());
  auto add_all = [](CountMap& into, const CountMap& from) {
    for (const auto& [k, v] : from) into[k] += v;
  };
  add_all(stats_.hashtag_counts, o.hashtag_counts);
  add_all(stats_.mention_counts, o.mention_counts);
  add_all(stats_.domain_counts, o.domain_counts);
  add_all(stats_.language_distribution, o.language_distribution);
  for (const auto& [kind, h] : o.interaction_histograms) {
    auto& into = stats_.interaction_histograms[kind];
    for (const auto& [value, freq] : h) into[value] += freq;
  }
}

CorpusStats CorpusStatsBuilder::finish() const {
  CorpusStats out = stats_;
  out.n_authors = authors_.size();
  return out;
}

CorpusStats compute_corpus_stats(std::span<const Post> posts, const UrlCanonicalizer& canon,
                                 const ExpansionMap* expansion) {
  CorpusStatsBuilder builder(&canon, expansion);
  for (const auto& p : posts) builder.add(p);
  return builder.finish();
}

std::vector<std::pair<std::string, std::uint64_t>> top_k(const CountMap& counts, std::size_t k) {
  std::vector<std::pair<std::string, std::uint64_t>> rows(counts.begin(), counts.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (rows.size() > k) rows.resize(k);
  return rows;
}

}  // namespace courl
