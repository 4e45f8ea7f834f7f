#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "courl/centrality.hpp"
#include "courl/detector.hpp"
#include "courl/matrix.hpp"
#include "courl/similarity.hpp"

namespace courl {

/// Shortest decimal form that round-trips.
std::string format_double(double v);

std::string csv_escape(std::string_view field);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view content);

/// Streams into a sibling temporary file; commit() renames it into place and
/// destruction without commit() removes it.
class AtomicWriter {
 public:
  explicit AtomicWriter(std::string path);
  ~AtomicWriter();
  AtomicWriter(const AtomicWriter&) = delete;
  AtomicWriter& operator=(const AtomicWriter&) = delete;

  std::ostream& stream() { return out_; }
  void commit();

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

std::string read_file(const std::string& path);
nlohmann::json read_json_file(const std::string& path);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

/// "item,count" table.
std::string count_csv(const std::vector<std::pair<std::string, std::uint64_t>>& rows);

/// "source,target,weight" with user ids.
std::string edge_list_csv(const SimilarityNetwork& g);

std::string graphml(const SimilarityNetwork& g, const CentralityScores* scores = nullptr,
                    const CoordinationReport* report = nullptr);

/// Sparse triplet snapshot: header {n_users, n_urls, tfidf_variant,
/// similarity_threshold}, users, urls, entries [[row, col, count, weight], ...].
nlohmann::json matrix_snapshot(const UserUrlMatrix& m, double similarity_threshold);
UserUrlMatrix matrix_from_snapshot(const nlohmann::json& j);

nlohmann::json network_snapshot(const SimilarityNetwork& g);
SimilarityNetwork network_from_snapshot(const nlohmann::json& j);

/// One row per node: user_id,score,flagged,cluster_id,suspended. cluster_id
/// is empty for unflagged users.
std::string report_csv(const CentralityScores& scores, const CoordinationReport& report);

}  // namespace courl
