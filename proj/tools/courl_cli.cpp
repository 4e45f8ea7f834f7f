// courl: command-line driver for the co-URL coordination pipeline.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "courl/characterize.hpp"
#include "courl/error.hpp"
#include "courl/graph.hpp"
#include "courl/ingest.hpp"
#include "courl/io.hpp"
#include "courl/pipeline.hpp"
#include "courl/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace courl;

namespace {

constexpr const char* kVersion = "1.0.0";

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kIo = 3, kEmpty = 4 };

// Options shared by commands that read posts.
struct InputOptions {
  std::optional<std::string> config;
  std::optional<std::string> input;
  std::optional<std::string> schema;
  std::optional<std::string> expansion;
  std::optional<std::vector<std::string>> tracking;
  std::optional<std::string> out;
};

struct DetectFlags {
  std::optional<std::size_t> min_urls;
  std::optional<std::string> tfidf;
  std::optional<double> threshold;
  std::optional<std::size_t> k_core;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::optional<std::string> normalization;
  std::optional<std::string> mode;
  std::optional<double> percentile;
  std::optional<std::size_t> top_k;
};

struct SynthFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_organic;
  std::optional<std::size_t> n_coordinated;
  std::optional<std::size_t> catalog;
  std::optional<double> zipf;
  std::optional<std::vector<std::size_t>> shares;
  std::optional<std::size_t> pool;
  std::optional<double> overlap;
};

json load_config(const std::optional<std::string>& path) {
  if (!path) return json::object();
  json j = read_json_file(*path);
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object: " + *path);
  return j;
}

template <typename T>
std::optional<T> config_value(const json& cfg, const char* key) {
  if (!cfg.contains(key) || cfg[key].is_null()) return std::nullopt;
  try {
    return cfg[key].get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

// Flag value if given, else config value.
template <typename T>
std::optional<T> pick(const std::optional<T>& flag, const json& cfg, const char* key) {
  return flag ? flag : config_value<T>(cfg, key);
}

std::string require(const std::optional<std::string>& v, const char* what) {
  if (!v || v->empty()) throw ConfigError(std::string("missing required setting: ") + what);
  return *v;
}

void add_input_options(CLI::App* cmd, InputOptions& o, bool with_input = true) {
  cmd->add_option("--config", o.config, "JSON config file; flags override its keys");
  if (with_input) {
    cmd->add_option("-i,--input", o.input, "Posts, one JSON object per line");
    cmd->add_option("--schema", o.schema, "JSON object mapping post fields to input keys");
    cmd->add_option("--expansion-map", o.expansion, "TSV of shortened -> expanded URLs");
    cmd->add_option("--tracking-param", o.tracking, "Query parameter to strip (repeatable; replaces defaults)");
  }
  cmd->add_option("-o,--out", o.out, "Output directory");
}

void add_detect_flags(CLI::App* cmd, DetectFlags& f) {
  cmd->add_option("--min-urls", f.min_urls, "Minimum URL shares for a user to enter the matrix");
  cmd->add_option("--tfidf", f.tfidf, "standard | smoothed");
  cmd->add_option("--threshold", f.threshold, "Cosine similarity edge threshold in [0, 1]");
  cmd->add_option("--k-core", f.k_core, "Restrict centrality to the k-core");
  cmd->add_option("--tol", f.tol, "Power-iteration tolerance");
  cmd->add_option("--max-iter", f.max_iter, "Power-iteration cap");
  cmd->add_option("--normalization", f.normalization, "l2 | max");
  cmd->add_option("--centrality-mode", f.mode, "global | per_component");
  cmd->add_option("--percentile", f.percentile, "Flag scores above this percentile, in (0, 100)");
  cmd->add_option("--evidence-top-k", f.top_k, "Shared URLs listed per cluster");
}

void add_synth_flags(CLI::App* cmd, SynthFlags& f) {
  cmd->add_option("--seed", f.seed, "Generator seed");
  cmd->add_option("--n-organic", f.n_organic, "Organic users");
  cmd->add_option("--n-coordinated", f.n_coordinated, "Coordinated users");
  cmd->add_option("--url-catalog", f.catalog, "Organic URL catalog size");
  cmd->add_option("--zipf", f.zipf, "Zipf exponent of URL popularity");
  cmd->add_option("--shares", f.shares, "Shares per user as MIN MAX")->expected(2);
  cmd->add_option("--pool", f.pool, "Campaign URL pool size");
  cmd->add_option("--overlap", f.overlap, "Fraction of coordinated shares drawn from the pool");
}

DetectionParams resolve_detection(const json& cfg, const DetectFlags& f) {
  DetectionParams p;
  p.update_from_json(cfg);
  if (f.min_urls) p.min_urls = *f.min_urls;
  if (f.tfidf) p.tfidf_variant = parse_tfidf_variant(*f.tfidf);
  if (f.threshold) p.similarity_threshold = *f.threshold;
  if (f.k_core) p.k_core = *f.k_core;
  if (f.tol) p.centrality.tol = *f.tol;
  if (f.max_iter) p.centrality.max_iter = *f.max_iter;
  if (f.normalization) p.centrality.normalization = parse_normalization(*f.normalization);
  if (f.mode) p.centrality.mode = parse_centrality_mode(*f.mode);
  if (f.percentile) p.percentile = *f.percentile;
  if (f.top_k) p.evidence_top_k = *f.top_k;
  p.validate();
  return p;
}

SynthConfig resolve_synth(const json& cfg, const SynthFlags& f) {
  SynthConfig c;
  c.update_from_json(cfg);
  if (f.seed) c.seed = *f.seed;
  if (f.n_organic) c.n_organic = *f.n_organic;
  if (f.n_coordinated) c.n_coordinated = *f.n_coordinated;
  if (f.catalog) c.url_catalog_size = *f.catalog;
  if (f.zipf) c.zipf_exponent = *f.zipf;
  if (f.shares) {
    c.min_shares = (*f.shares)[0];
    c.max_shares = (*f.shares)[1];
  }
  if (f.pool) c.campaign_pool_size = *f.pool;
  if (f.overlap) c.campaign_overlap = *f.overlap;
  c.validate();
  return c;
}

// Everything needed to read and canonicalize posts.
struct InputContext {
  std::string path;
  PostSchema schema;
  UrlCanonicalizer canon;
  std::optional<ExpansionMap> expansion;
  std::optional<std::string> expansion_path;
  std::optional<std::string> schema_path;

  const ExpansionMap* expansion_ptr() const { return expansion ? &*expansion : nullptr; }

  json describe() const {
    json j = {{"post_schema", schema.to_json()}, {"tracking_params", canon.tracking_params()}};
    j["expansion_map"] = expansion_path ? json(*expansion_path) : json(nullptr);
    return j;
  }
};

InputContext resolve_input(const json& cfg, const InputOptions& o) {
  InputContext ctx;
  ctx.path = require(pick(o.input, cfg, "input"), "input");
  if (!fs::is_regular_file(ctx.path)) throw IoError("input not found: " + ctx.path);
  ctx.schema_path = pick(o.schema, cfg, "schema");
  if (ctx.schema_path) {
    ctx.schema = PostSchema::from_json(read_json_file(*ctx.schema_path));
  } else if (cfg.contains("post_schema")) {
    ctx.schema = PostSchema::from_json(cfg["post_schema"]);
  }
  if (auto t = pick(o.tracking, cfg, "tracking_params")) ctx.canon = UrlCanonicalizer(*t);
  ctx.expansion_path = pick(o.expansion, cfg, "expansion_map");
  if (ctx.expansion_path) ctx.expansion = ExpansionMap::load(*ctx.expansion_path, ctx.canon);
  return ctx;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Collects output files in memory and writes them, plus run.json, at the end
// so a failing command leaves nothing behind.
class OutputSet {
 public:
  OutputSet(std::string command, std::string dir) : command_(std::move(command)), dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }
  void add_json(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }
  void input(const std::string& role, const std::string& path) {
    inputs_.push_back({{"role", role}, {"path", path}, {"sha256", sha256_file(path)}});
  }
  void extra_output(const std::string& name) { extra_.push_back(name); }
  json& parameters() { return params_; }
  json& summary() { return summary_; }
  const std::string& dir() const { return dir_; }
  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  void ensure_dir() const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory " + dir_);
  }

  void commit() {
    ensure_dir();
    json outputs = json::array();
    for (const auto& name : extra_) outputs.push_back(name);
    for (const auto& [name, content] : files_) {
      write_file_atomic(path(name), content);
      outputs.push_back(name);
    }
    json run = {{"command", command_},
                {"version", kVersion},
                {"created_at", iso_timestamp()},
                {"threads", omp_get_max_threads()},
                {"parameters", params_},
                {"inputs", inputs_},
                {"outputs", outputs}};
    if (!summary_.is_null()) run["summary"] = summary_;
    write_file_atomic(path("run.json"), run.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::string dir_;
  std::vector<std::pair<std::string, std::string>> files_;
  std::vector<std::string> extra_;
  json params_ = json::object();
  json inputs_ = json::array();
  json summary_;
};

void add_post_shares(MatrixBuilder& builder, const Post& p, const InputContext& ctx) {
  for (const auto& raw : p.raw_urls) {
    auto url = ctx.canon(raw);
    if (!url) continue;
    if (ctx.expansion) url = ctx.expansion->apply(*url, ctx.canon);
    builder.add(p.author_id, *url);
  }
}

json parse_stats_json(const ParseStats& s) {
  return {{"lines", s.lines}, {"accepted", s.accepted}, {"rejects", s.rejects}};
}

void warn_rejects(const ParseStats& s, const std::string& path) {
  if (s.rejects > 0) std::cerr << "warning: " << s.rejects << " of " << s.lines << " lines rejected in " << path << "\n";
}

std::set<std::string> read_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::set<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    ids.insert(line.substr(b, e - b + 1));
  }
  return ids;
}

// report.json, a JSON array of ids, or one id per line.
std::set<std::string> read_flagged(const std::string& path) {
  const std::string text = read_file(path);
  json j = json::parse(text, nullptr, false);
  if (!j.is_discarded()) {
    try {
      if (j.is_object()) return CoordinationReport::from_json(j).flagged_ids();
      if (j.is_array()) return j.get<std::set<std::string>>();
    } catch (const json::exception& e) {
      throw IoError("malformed flagged file " + path + ": " + e.what());
    }
  }
  return read_id_list(path);
}

// ---- stats ----------------------------------------------------------------

int cmd_stats(const InputOptions& o, std::optional<std::size_t> top_k_flag) {
  const json cfg = load_config(o.config);
  const auto ctx = resolve_input(cfg, o);
  const std::size_t k = pick(top_k_flag, cfg, "top_k").value_or(20);
  OutputSet out("stats", require(pick(o.out, cfg, "out"), "out"));

  CorpusStatsBuilder builder(&ctx.canon, ctx.expansion_ptr());
  const auto parsed = read_posts(ctx.path, ctx.schema, [&](Post&& p) { builder.add(p); });
  warn_rejects(parsed, ctx.path);
  const auto stats = builder.finish();

  json j = stats.to_json();
  j["parse"] = parse_stats_json(parsed);
  out.add_json("stats.json", j);
  out.add("top_hashtags.csv", count_csv(top_k(stats.hashtag_counts, k)));
  out.add("top_mentions.csv", count_csv(top_k(stats.mention_counts, k)));
  out.add("top_domains.csv", count_csv(top_k(stats.domain_counts, k)));
  out.add("languages.csv", count_csv(top_k(stats.language_distribution, stats.language_distribution.size())));

  out.parameters() = ctx.describe();
  out.parameters()["top_k"] = k;
  out.input("posts", ctx.path);
  if (ctx.expansion_path) out.input("expansion_map", *ctx.expansion_path);
  out.commit();
  std::cout << stats.n_posts << " posts, " << stats.n_authors << " authors, " << stats.n_urls << " URLs\n";
  return kOk;
}

// ---- build / detect --------------------------------------------------------

struct Collected {
  MatrixBuilder builder;
  ParseStats parse;
};

Collected collect(const InputContext& ctx) {
  Collected c;
  c.parse = read_posts(ctx.path, ctx.schema, [&](Post&& p) { add_post_shares(c.builder, p, ctx); });
  warn_rejects(c.parse, ctx.path);
  return c;
}

int cmd_build(const InputOptions& o, const DetectFlags& f) {
  const json cfg = load_config(o.config);
  const auto ctx = resolve_input(cfg, o);
  const auto params = resolve_detection(cfg, f);
  OutputSet out("build", require(pick(o.out, cfg, "out"), "out"));

  const auto c = collect(ctx);
  const auto active = c.builder.active_users(params.min_urls);
  if (active.empty()) throw EmptyResultError("no user has at least min_urls URL shares");
  const auto matrix = c.builder.build(active, params.tfidf_variant);
  ProjectionStats proj;
  auto network = project_similarity(matrix, params.similarity_threshold, &proj);
  if (params.k_core) network = k_core(network, *params.k_core);

  out.add_json("matrix.json", matrix_snapshot(matrix, params.similarity_threshold));
  out.add_json("network.json", network_snapshot(network));
  out.parameters() = ctx.describe();
  out.parameters()["detection"] = params.to_json();
  out.input("posts", ctx.path);
  if (ctx.expansion_path) out.input("expansion_map", *ctx.expansion_path);
  out.summary() = {{"parse", parse_stats_json(c.parse)},
                   {"n_users", matrix.n_users()},
                   {"n_urls", matrix.n_urls()},
                   {"nnz", matrix.nnz()},
                   {"n_nodes", network.n_nodes()},
                   {"n_edges", network.n_edges()},
                   {"candidate_pairs", proj.candidate_pairs}};
  out.commit();
  std::cout << matrix.n_users() << " users x " << matrix.n_urls() << " URLs, " << network.n_edges() << " edges\n";
  return kOk;
}

json diagnostics_json(const DetectionResult& r, const ParseStats& parse, const InputContext& ctx) {
  const auto metrics = graph_metrics(r.network);
  json degree = json::array();
  for (const auto& [d, n] : metrics.degree_distribution) degree.push_back({d, n});
  return {{"parse", parse_stats_json(parse)},
          {"n_shares", r.n_shares},
          {"n_active_users", r.n_active_users},
          {"matrix", {{"n_users", r.matrix.n_users()}, {"n_urls", r.matrix.n_urls()}, {"nnz", r.matrix.nnz()}}},
          {"zero_weight_users", r.full_network.excluded_users.size()},
          {"projection",
           {{"candidate_pairs", r.projection.candidate_pairs}, {"indexed_entries", r.projection.indexed_entries}}},
          {"full_network", {{"n_nodes", r.full_network.n_nodes()}, {"n_edges", r.full_network.n_edges()}}},
          {"network", {{"n_nodes", metrics.n_nodes}, {"n_edges", metrics.n_edges}}},
          {"degree_distribution", degree},
          {"component_sizes", metrics.component_sizes},
          {"centrality", {{"iterations", r.scores.iterations_used}, {"converged", r.scores.converged}}},
          {"expansion_warnings", ctx.expansion ? ctx.expansion->warnings() : 0}};
}

int cmd_detect(const InputOptions& o, const DetectFlags& f, const std::optional<std::string>& profiles_flag,
               const std::optional<std::string>& suspended_flag) {
  const json cfg = load_config(o.config);
  const auto ctx = resolve_input(cfg, o);
  const auto params = resolve_detection(cfg, f);
  const auto profiles_path = pick(profiles_flag, cfg, "profiles");
  const auto suspended_path = pick(suspended_flag, cfg, "suspended");
  if (suspended_path && !profiles_path) throw ConfigError("--suspended needs --profiles to resolve handles");
  OutputSet out("detect", require(pick(o.out, cfg, "out"), "out"));

  const auto c = collect(ctx);
  auto r = run_detection(c.builder, params);
  if (!r.scores.converged)
    std::cerr << "warning: power iteration stopped at max_iter=" << params.centrality.max_iter
              << " without converging\n";
  if (suspended_path) {
    const auto handles = read_handle_list(*suspended_path);
    const auto profiles = read_profiles(*profiles_path);
    warn_rejects(profiles.stats, *profiles_path);
    r.report = annotate_suspensions(std::move(r.report), handles, profiles.profiles);
  }

  out.add_json("report.json", r.report.to_json());
  out.add("report.csv", report_csv(r.scores, r.report));
  out.add("edges.csv", edge_list_csv(r.network));
  out.add("network.graphml", graphml(r.network, &r.scores, &r.report));
  out.add_json("network.json", network_snapshot(r.network));
  out.add_json("diagnostics.json", diagnostics_json(r, c.parse, ctx));

  out.parameters() = ctx.describe();
  out.parameters()["detection"] = params.to_json();
  out.input("posts", ctx.path);
  if (ctx.expansion_path) out.input("expansion_map", *ctx.expansion_path);
  if (profiles_path && suspended_path) {
    out.input("profiles", *profiles_path);
    out.input("suspended", *suspended_path);
  }
  out.summary() = {{"flagged", r.report.flagged.size()},
                   {"clusters", r.report.clusters.size()},
                   {"threshold_value", r.report.threshold_value}};
  out.commit();
  std::cout << r.network.n_nodes() << " nodes, " << r.network.n_edges() << " edges, " << r.report.flagged.size()
            << " flagged in " << r.report.clusters.size() << " clusters\n";
  return kOk;
}

// ---- characterize ----------------------------------------------------------

std::string bio_clusters_csv(const std::vector<BioCluster>& clusters) {
  std::string s = "cluster_id,match_kind,size,normalized_text\n";
  for (std::size_t i = 0; i < clusters.size(); ++i)
    s += std::to_string(i) + "," + std::string(to_string(clusters[i].match_kind)) + "," +
         std::to_string(clusters[i].members.size()) + "," + csv_escape(clusters[i].normalized_text) + "\n";
  return s;
}

std::string user_activity_csv(const ForensicsReport& r) {
  std::string s = "user_id,posts,links\n";
  for (const auto& [u, n] : r.posts_per_user) {
    auto it = r.links_per_user.find(u);
    s += csv_escape(u) + "," + std::to_string(n) + "," + std::to_string(it == r.links_per_user.end() ? 0 : it->second) +
         "\n";
  }
  return s;
}

int cmd_characterize(const InputOptions& o, const std::optional<std::string>& profiles_flag,
                     const std::optional<std::string>& flagged_flag,
                     const std::optional<std::vector<std::string>>& probes_flag,
                     const std::optional<std::string>& platform_flag, std::optional<double> jaccard_flag) {
  const json cfg = load_config(o.config);
  const auto ctx = resolve_input(cfg, o);
  const auto profiles_path = require(pick(profiles_flag, cfg, "profiles"), "profiles");
  const auto flagged_path = require(pick(flagged_flag, cfg, "flagged"), "flagged");
  if (!fs::is_regular_file(profiles_path)) throw IoError("profiles not found: " + profiles_path);
  if (!fs::is_regular_file(flagged_path)) throw IoError("flagged file not found: " + flagged_path);

  ForensicsOptions opts;
  if (auto p = pick(probes_flag, cfg, "template_probes")) opts.bios.template_probes = *p;
  if (auto jm = pick(jaccard_flag, cfg, "jaccard_min")) opts.bios.jaccard_min = *jm;
  if (!(opts.bios.jaccard_min > 0.0 && opts.bios.jaccard_min <= 1.0)) throw ConfigError("jaccard_min must lie in (0, 1]");
  const auto platform_path = pick(platform_flag, cfg, "platform_map");
  if (platform_path) {
    opts.platforms = PlatformMap::from_json(read_json_file(*platform_path));
  } else if (cfg.contains("platforms")) {
    opts.platforms = PlatformMap::from_json(cfg["platforms"]);
  }
  OutputSet out("characterize", require(pick(o.out, cfg, "out"), "out"));

  const auto flagged = read_flagged(flagged_path);
  std::vector<Post> posts;
  const auto parsed = read_posts(ctx.path, ctx.schema, [&](Post&& p) {
    if (flagged.contains(p.author_id)) posts.push_back(std::move(p));
  });
  warn_rejects(parsed, ctx.path);
  const auto profile_set = read_profiles(profiles_path);
  warn_rejects(profile_set.stats, profiles_path);

  const auto report = characterize(posts, profile_set.profiles, flagged, opts, ctx.canon, ctx.expansion_ptr());
  if (!report.missing_profiles.empty())
    std::cerr << "warning: " << report.missing_profiles.size() << " flagged users have no profile\n";

  out.add_json("forensics.json", report.to_json());
  out.add("bio_clusters.csv", bio_clusters_csv(report.bio_clusters));
  out.add("domains.csv", count_csv(top_k(report.domains.domain_counts, report.domains.domain_counts.size())));
  out.add("platforms.csv", count_csv(top_k(report.domains.platform_counts, report.domains.platform_counts.size())));
  out.add("user_activity.csv", user_activity_csv(report));

  out.parameters() = ctx.describe();
  out.parameters()["template_probes"] = opts.bios.template_probes;
  out.parameters()["jaccard_min"] = opts.bios.jaccard_min;
  out.parameters()["platforms"] = opts.platforms.to_json();
  out.input("posts", ctx.path);
  out.input("profiles", profiles_path);
  out.input("flagged", flagged_path);
  out.summary() = {{"flagged", flagged.size()},
                   {"bio_clusters", report.bio_clusters.size()},
                   {"media_groups", report.media_groups.size()}};
  out.commit();
  std::cout << flagged.size() << " users characterized, " << report.bio_clusters.size() << " bio clusters, "
            << report.media_groups.size() << " duplicate media groups\n";
  return kOk;
}

// ---- synth / eval / sweep --------------------------------------------------

int cmd_synth(const InputOptions& o, const SynthFlags& f) {
  const json cfg = load_config(o.config);
  const auto config = resolve_synth(cfg, f);
  OutputSet out("synth", require(pick(o.out, cfg, "out"), "out"));
  out.ensure_dir();

  // Posts can be large, so they stream straight to disk.
  AtomicWriter posts(out.path("posts.jsonl"));
  AtomicWriter profiles(out.path("profiles.jsonl"));
  std::size_t n_posts = 0, n_profiles = 0;
  const auto truth = generate(
      config,
      [&](Post&& p) {
        posts.stream() << post_to_json(p).dump() << '\n';
        ++n_posts;
      },
      [&](UserProfile&& u) {
        profiles.stream() << profile_to_json(u).dump() << '\n';
        ++n_profiles;
      });
  posts.commit();
  profiles.commit();
  out.extra_output("posts.jsonl");
  out.extra_output("profiles.jsonl");
  out.add_json("truth.json", truth.to_json());

  out.parameters() = config.to_json();
  out.summary() = {{"n_posts", n_posts},
                   {"n_profiles", n_profiles},
                   {"n_coordinated", truth.coordinated_ids.size()},
                   {"posts_sha256", sha256_file(out.path("posts.jsonl"))},
                   {"profiles_sha256", sha256_file(out.path("profiles.jsonl"))}};
  out.commit();
  std::cout << n_posts << " posts, " << n_profiles << " profiles written to " << out.dir() << "\n";
  return kOk;
}

std::string metrics_csv(const Metrics& m, std::size_t n_flagged) {
  auto opt = [](const auto& v) { return v ? format_double(static_cast<double>(*v)) : std::string(); };
  return "flagged,true_positives,false_positives,false_negatives,true_negatives,precision,recall,f1\n" +
         std::to_string(n_flagged) + "," + std::to_string(m.true_positives) + "," +
         std::to_string(m.false_positives) + "," + std::to_string(m.false_negatives) + "," +
         (m.true_negatives ? std::to_string(*m.true_negatives) : std::string()) + "," + opt(m.precision) + "," +
         opt(m.recall) + "," + opt(m.f1) + "\n";
}

int cmd_eval(const InputOptions& o, const std::optional<std::string>& flagged_flag,
             const std::optional<std::string>& truth_flag, std::optional<std::size_t> universe_flag) {
  const json cfg = load_config(o.config);
  const auto flagged_path = require(pick(flagged_flag, cfg, "flagged"), "flagged");
  const auto truth_path = require(pick(truth_flag, cfg, "truth"), "truth");
  const auto universe = pick(universe_flag, cfg, "universe");
  OutputSet out("eval", require(pick(o.out, cfg, "out"), "out"));

  const auto flagged = read_flagged(flagged_path);
  GroundTruth truth;
  try {
    truth = GroundTruth::from_json(read_json_file(truth_path));
  } catch (const json::exception& e) {
    throw IoError("malformed truth file " + truth_path + ": " + e.what());
  }
  const auto m = evaluate(flagged, truth, universe);

  out.add("metrics.csv", metrics_csv(m, flagged.size()));
  out.add_json("metrics.json", m.to_json());
  out.parameters() = {{"universe", universe ? json(*universe) : json(nullptr)}};
  out.input("flagged", flagged_path);
  out.input("truth", truth_path);
  out.commit();
  auto show = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("undefined"); };
  std::cout << "precision " << show(m.precision) << ", recall " << show(m.recall) << ", f1 " << show(m.f1) << "\n";
  return kOk;
}

template <typename T>
std::vector<T> axis(const std::optional<std::vector<T>>& flag, const json& cfg, const char* key) {
  if (flag) return *flag;
  return config_value<std::vector<T>>(cfg, key).value_or(std::vector<T>{});
}

struct SweepFlags {
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::vector<double>> overlaps;
  std::optional<std::vector<double>> thresholds;
  std::optional<std::vector<double>> percentiles;
};

int cmd_sweep(const InputOptions& o, const SynthFlags& sf, const DetectFlags& df, const SweepFlags& grid_flags) {
  const json cfg = load_config(o.config);
  const auto base = resolve_synth(cfg, sf);
  const auto params = resolve_detection(cfg, df);
  SweepGrid grid;
  grid.seeds = axis(grid_flags.seeds, cfg, "seeds");
  grid.campaign_overlaps = axis(grid_flags.overlaps, cfg, "campaign_overlaps");
  grid.similarity_thresholds = axis(grid_flags.thresholds, cfg, "similarity_thresholds");
  grid.percentiles = axis(grid_flags.percentiles, cfg, "percentiles");
  OutputSet out("sweep", require(pick(o.out, cfg, "out"), "out"));

  const auto rows = sweep(base, params, grid);
  out.add("metrics.csv", sweep_csv(rows));
  out.parameters() = {{"synth", base.to_json()},
                      {"detection", params.to_json()},
                      {"grid",
                       {{"seeds", grid.seeds},
                        {"campaign_overlaps", grid.campaign_overlaps},
                        {"similarity_thresholds", grid.similarity_thresholds},
                        {"percentiles", grid.percentiles}}}};
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.status != "ok";
  out.summary() = {{"points", rows.size()}, {"failed_points", failed}};
  out.commit();
  std::cout << rows.size() << " grid points, " << failed << " failed\n";
  return kOk;
}

// ---- export ----------------------------------------------------------------

int cmd_export(const InputOptions& o, const std::optional<std::string>& network_flag, std::optional<std::size_t> k_flag,
               bool no_k_core, const std::optional<std::string>& format_flag) {
  const json cfg = load_config(o.config);
  const auto network_path = require(pick(network_flag, cfg, "network"), "network");
  const std::size_t k_value = pick(k_flag, cfg, "export_k_core").value_or(10);
  const bool use_core = !no_k_core;
  const auto format = pick(format_flag, cfg, "format").value_or("both");
  if (format != "csv" && format != "graphml" && format != "both")
    throw ConfigError("format must be csv, graphml or both");
  OutputSet out("export", require(pick(o.out, cfg, "out"), "out"));

  auto g = network_from_snapshot(read_json_file(network_path));
  if (use_core) g = k_core(g, k_value);
  if (format != "graphml") out.add("edges.csv", edge_list_csv(g));
  if (format != "csv") out.add("network.graphml", graphml(g));
  out.parameters() = {{"k_core", use_core ? json(k_value) : json(nullptr)}, {"format", format}};
  out.input("network", network_path);
  out.summary() = {{"n_nodes", g.n_nodes()}, {"n_edges", g.n_edges()}};
  out.commit();
  std::cout << g.n_nodes() << " nodes, " << g.n_edges() << " edges exported\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-URL coordination detection: similarity networks of URL co-sharing"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  std::optional<int> threads;
  app.add_option("-j,--threads", threads, "Cap on OpenMP threads (default: all cores)")
      ->check(CLI::PositiveNumber);

  InputOptions in;
  DetectFlags df;
  SynthFlags sf;
  SweepFlags grid;
  std::optional<std::size_t> top_k;
  std::optional<std::string> profiles, suspended, flagged, truth, platform_map, network, format;
  std::optional<std::vector<std::string>> probes;
  std::optional<double> jaccard_min;
  std::optional<std::size_t> universe, export_k;
  bool no_k_core = false;

  auto* stats = app.add_subcommand("stats", "Corpus statistics and top-K tables");
  add_input_options(stats, in);
  stats->add_option("--top-k", top_k, "Rows per top-K table (default 20)");

  auto* build = app.add_subcommand("build", "Build the user x URL matrix and similarity network");
  add_input_options(build, in);
  add_detect_flags(build, df);

  auto* detect = app.add_subcommand("detect", "Run detection and write the coordination report");
  add_input_options(detect, in);
  add_detect_flags(detect, df);
  detect->add_option("--profiles", profiles, "Profiles JSONL (needed with --suspended)");
  detect->add_option("--suspended", suspended, "Suspended handles, one per line");

  auto* charac = app.add_subcommand("characterize", "Forensic reports for a flagged set");
  add_input_options(charac, in);
  charac->add_option("--profiles", profiles, "Profiles JSONL");
  charac->add_option("--flagged", flagged, "report.json, JSON id array or one id per line");
  charac->add_option("--probe", probes, "Known template phrase (repeatable)");
  charac->add_option("--platform-map", platform_map, "JSON object of domain suffix -> platform label");
  charac->add_option("--jaccard-min", jaccard_min, "Near-duplicate bio threshold in (0, 1]");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with planted coordination");
  add_input_options(synth_cmd, in, false);
  add_synth_flags(synth_cmd, sf);

  auto* eval_cmd = app.add_subcommand("eval", "Score a flagged set against ground truth");
  add_input_options(eval_cmd, in, false);
  eval_cmd->add_option("--flagged", flagged, "report.json, JSON id array or one id per line");
  eval_cmd->add_option("--truth", truth, "truth.json from synth");
  eval_cmd->add_option("--universe", universe, "Total user count, enables true negatives");

  auto* sweep_cmd = app.add_subcommand("sweep", "Synthetic parameter sweep");
  add_input_options(sweep_cmd, in, false);
  add_synth_flags(sweep_cmd, sf);
  add_detect_flags(sweep_cmd, df);
  sweep_cmd->add_option("--seeds", grid.seeds, "Seed axis");
  sweep_cmd->add_option("--overlaps", grid.overlaps, "Campaign overlap axis");
  sweep_cmd->add_option("--thresholds", grid.thresholds, "Similarity threshold axis");
  sweep_cmd->add_option("--percentiles", grid.percentiles, "Percentile axis");

  auto* export_cmd = app.add_subcommand("export", "Convert a network snapshot to CSV or GraphML");
  add_input_options(export_cmd, in, false);
  export_cmd->add_option("--network", network, "network.json snapshot");
  export_cmd->add_option("--k-core", export_k, "Core to keep (default 10)");
  export_cmd->add_flag("--no-k-core", no_k_core, "Export the whole network");
  export_cmd->add_option("--format", format, "csv | graphml | both (default both)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }
  if (threads) omp_set_num_threads(*threads);

  try {
    if (*stats) return cmd_stats(in, top_k);
    if (*build) return cmd_build(in, df);
    if (*detect) return cmd_detect(in, df, profiles, suspended);
    if (*charac) return cmd_characterize(in, profiles, flagged, probes, platform_map, jaccard_min);
    if (*synth_cmd) return cmd_synth(in, sf);
    if (*eval_cmd) return cmd_eval(in, flagged, truth, universe);
    if (*sweep_cmd) return cmd_sweep(in, sf, df, grid);
    if (*export_cmd) return cmd_export(in, network, export_k, no_k_core, format);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const EmptyResultError& e) {
    std::cerr << "empty result: " << e.what() << "\n";
    return kEmpty;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
