#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "courl/url.hpp"

namespace courl {

enum class TfidfVariant {
  standard,  // count * ln(N / df)
  smoothed,  // count * (ln((1 + N) / (1 + df)) + 1)
};

std::string_view to_string(TfidfVariant v);
TfidfVariant parse_tfidf_variant(std::string_view s);

double inverse_document_frequency(TfidfVariant variant, std::size_t n_users, std::size_t df);

/// One URL share by one user.
struct Share {
  std::string user_id;
  CanonicalUrl url;
};

/// User x URL bipartite graph in CSR form. Rows are users sorted by id,
/// columns are URLs sorted by canonical string; column indices within a row
/// are ascending.
struct UserUrlMatrix {
  std::vector<std::string> users;
  std::vector<std::string> urls;
  std::vector<std::string> url_domains;  // registered domain per column
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> cols;
  std::vector<std::uint32_t> counts;
  std::vector<double> weights;
  TfidfVariant variant = TfidfVariant::standard;

  std::size_t n_users() const { return users.size(); }
  std::size_t n_urls() const { return urls.size(); }
  std::size_t nnz() const { return cols.size(); }

  std::span<const std::uint32_t> row_cols(std::size_t i) const {
    return {cols.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
  }
  std::span<const std::uint32_t> row_counts(std::size_t i) const {
    return {counts.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
  }
  std::span<const double> row_weights(std::size_t i) const {
    return {weights.data() + row_ptr[i], row_ptr[i + 1] - row_ptr[i]};
  }

  /// Users sharing each URL at least once.
  std::vector<std::size_t> document_frequency() const;
  /// Euclidean norm of each user's weight row.
  std::vector<double> row_norms() const;
  /// True when every weight is zero (nothing but ubiquitous URLs).
  bool empty_signal() const;
};

/// Interns shares as they stream in; `build` produces the matrix.
class MatrixBuilder {
 public:
  void add(std::string_view user_id, const CanonicalUrl& url);
  void add(const Share& share) { add(share.user_id, share.url); }

  /// Total shares per user, counting repeats.
  std::unordered_map<std::string, std::size_t> user_share_totals() const;

  /// Users with at least `min_urls` shares.
  std::set<std::string> active_users(std::size_t min_urls) const;

  /// Restricts to `active_users`. Throws ConfigError when it is empty and
  /// EmptyResultError when no share survives.
  UserUrlMatrix build(const std::set<std::string>& active_users, TfidfVariant variant = TfidfVariant::standard) const;

  std::size_t n_shares() const { return n_shares_; }

 private:
  std::unordered_map<std::string, std::uint32_t> user_index_;
  std::vector<std::string> user_names_;
  std::unordered_map<std::string, std::uint32_t> url_index_;
  std::vector<CanonicalUrl> url_values_;
  std::unordered_map<std::uint64_t, std::uint32_t> cell_counts_;
  std::size_t n_shares_ = 0;
};

UserUrlMatrix build_matrix(std::span<const Share> shares, const std::set<std::string>& active_users,
                           TfidfVariant variant = TfidfVariant::standard);

}  // namespace courl
