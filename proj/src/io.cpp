#include "courl/io.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <unistd.h>

#include <openssl/evp.h>

#include "courl/error.hpp"

namespace courl {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into " + path);
  }
}

AtomicWriter::AtomicWriter(std::string path)
    : path_(std::move(path)), tmp_(path_ + ".tmp." + std::to_string(::getpid())) {
  out_.open(tmp_, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot write " + tmp_);
}

AtomicWriter::~AtomicWriter() {
  if (committed_) return;
  out_.close();
  std::error_code ec;
  fs::remove(tmp_, ec);
}

void AtomicWriter::commit() {
  out_.flush();
  if (!out_) throw IoError("write failed: " + tmp_);
  out_.close();
  std::error_code ec;
  fs::rename(tmp_, path_, ec);
  if (ec) throw IoError("cannot rename into " + path_);
  committed_ = true;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw IoError("malformed JSON in " + path);
  return j;
}

namespace {

std::string to_hex(const unsigned char* data, unsigned len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xf]);
  }
  return out;
}

struct DigestContext {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  DigestContext() {
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) throw IoError("sha256 unavailable");
  }
  ~DigestContext() { EVP_MD_CTX_free(ctx); }
  DigestContext(const DigestContext&) = delete;
  DigestContext& operator=(const DigestContext&) = delete;

  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx, data, n); }
  std::string finish() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    return to_hex(md, len);
  }
};

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  DigestContext d;
  d.update(data.data(), data.size());
  return d.finish();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  DigestContext d;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.finish();
}

std::string count_csv(const std::vector<std::pair<std::string, std::uint64_t>>& rows) {
  std::string out = "item,count\n";
  for (const auto& [item, count] : rows) out += csv_escape(item) + "," + std::to_string(count) + "\n";
  return out;
}

std::string edge_list_csv(const SimilarityNetwork& g) {
  std::string out = "source,target,weight\n";
  for (const auto& e : g.edges)
    out += csv_escape(g.nodes[e.a]) + "," + csv_escape(g.nodes[e.b]) + "," + format_double(e.weight) + "\n";
  return out;
}

std::string graphml(const SimilarityNetwork& g, const CentralityScores* scores, const CoordinationReport* report) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" "
         "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
         "xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
         "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n"
         "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n";
  if (scores) out << "  <key id=\"centrality\" for=\"node\" attr.name=\"centrality\" attr.type=\"double\"/>\n";
  if (report) out << "  <key id=\"flagged\" for=\"node\" attr.name=\"flagged\" attr.type=\"boolean\"/>\n";
  out << "  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n"
         "  <graph id=\"similarity\" edgedefault=\"undirected\">\n";

  std::map<std::string_view, double> score_of;
  if (scores)
    for (std::size_t i = 0; i < scores->nodes.size(); ++i) score_of[scores->nodes[i]] = scores->scores[i];
  const auto flagged = report ? report->flagged_ids() : std::set<std::string>{};

  for (std::size_t v = 0; v < g.n_nodes(); ++v) {
    out << "    <node id=\"n" << v << "\"><data key=\"label\">" << xml_escape(g.nodes[v]) << "</data>";
    if (scores) {
      auto it = score_of.find(g.nodes[v]);
      out << "<data key=\"centrality\">" << format_double(it == score_of.end() ? 0.0 : it->second) << "</data>";
    }
    if (report) out << "<data key=\"flagged\">" << (flagged.contains(g.nodes[v]) ? "true" : "false") << "</data>";
    out << "</node>\n";
  }
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto& e = g.edges[k];
    out << "    <edge id=\"e" << k << "\" source=\"n" << e.a << "\" target=\"n" << e.b << "\"><data key=\"weight\">"
        << format_double(e.weight) << "</data></edge>\n";
  }
  out << "  </graph>\n</graphml>\n";
  return out.str();
}

json matrix_snapshot(const UserUrlMatrix& m, double similarity_threshold) {
  json j;
  j["header"] = {{"n_users", m.n_users()},
                 {"n_urls", m.n_urls()},
                 {"nnz", m.nnz()},
                 {"tfidf_variant", std::string(to_string(m.variant))},
                 {"similarity_threshold", similarity_threshold}};
  j["users"] = m.users;
  j["urls"] = m.urls;
  j["url_domains"] = m.url_domains;
  json entries = json::array();
  for (std::size_t i = 0; i < m.n_users(); ++i) {
    auto cols = m.row_cols(i);
    auto counts = m.row_counts(i);
    auto w = m.row_weights(i);
    for (std::size_t k = 0; k < cols.size(); ++k) entries.push_back({i, cols[k], counts[k], w[k]});
  }
  j["entries"] = std::move(entries);
  return j;
}

UserUrlMatrix matrix_from_snapshot(const json& j) {
  try {
    UserUrlMatrix m;
    m.variant = parse_tfidf_variant(j.at("header").at("tfidf_variant").get<std::string>());
    m.users = j.at("users").get<std::vector<std::string>>();
    m.urls = j.at("urls").get<std::vector<std::string>>();
    m.url_domains = j.value("url_domains", std::vector<std::string>(m.urls.size()));
    m.row_ptr.assign(m.users.size() + 1, 0);
    std::size_t last_row = 0;
    for (const auto& e : j.at("entries")) {
      const auto row = e.at(0).get<std::size_t>();
      const auto col = e.at(1).get<std::uint32_t>();
      if (row >= m.users.size() || col >= m.urls.size() || row < last_row)
        throw IoError("matrix snapshot entries out of range or unsorted");
      last_row = row;
      ++m.row_ptr[row + 1];
      m.cols.push_back(col);
      m.counts.push_back(e.at(2).get<std::uint32_t>());
      m.weights.push_back(e.at(3).get<double>());
    }
    for (std::size_t i = 0; i < m.users.size(); ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed matrix snapshot: ") + e.what());
  }
}

json network_snapshot(const SimilarityNetwork& g) {
  json j;
  j["header"] = {{"n_nodes", g.n_nodes()}, {"n_edges", g.n_edges()}, {"similarity_threshold", g.threshold}};
  j["nodes"] = g.nodes;
  j["excluded_users"] = g.excluded_users;
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back({e.a, e.b, e.weight});
  j["edges"] = std::move(edges);
  return j;
}

SimilarityNetwork network_from_snapshot(const json& j) {
  try {
    SimilarityNetwork g;
    g.threshold = j.at("header").value("similarity_threshold", 0.0);
    g.nodes = j.at("nodes").get<std::vector<std::string>>();
    g.excluded_users = j.value("excluded_users", std::vector<std::string>{});
    for (const auto& e : j.at("edges")) {
      Edge edge{e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>(), e.at(2).get<double>()};
      if (edge.a >= edge.b || edge.b >= g.nodes.size()) throw IoError("network snapshot edge out of range");
      g.edges.push_back(edge);
    }
    std::sort(g.edges.begin(), g.edges.end(),
              [](const Edge& x, const Edge& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });
    return g;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed network snapshot: ") + e.what());
  }
}

std::string report_csv(const CentralityScores& scores, const CoordinationReport& report) {
  std::map<std::string_view, std::size_t> cluster_of;
  for (std::size_t c = 0; c < report.clusters.size(); ++c)
    for (const auto& m : report.clusters[c].members) cluster_of[m] = c;
  const std::set<std::string> suspended(report.suspended.begin(), report.suspended.end());
  const auto flagged = report.flagged_ids();

  std::string out = "user_id,score,flagged,cluster_id,suspended\n";
  for (std::size_t i = 0; i < scores.nodes.size(); ++i) {
    const auto& u = scores.nodes[i];
    const bool f = flagged.contains(u);
    auto it = cluster_of.find(u);
    out += csv_escape(u) + "," + format_double(scores.scores[i]) + "," + (f ? "true" : "false") + "," +
           (it == cluster_of.end() ? "" : std::to_string(it->second)) + "," +
           (suspended.contains(u) ? "true" : "false") + "\n";
  }
  return out;
}

}  // namespace courl
