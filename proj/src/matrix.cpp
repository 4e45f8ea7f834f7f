#include "courl/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "courl/error.hpp"

namespace courl {

std::string_view to_string(TfidfVariant v) { return v == TfidfVariant::standard ? "standard" : "smoothed"; }

TfidfVariant parse_tfidf_variant(std::string_view s) {
  if (s == "standard") return TfidfVariant::standard;
  if (s == "smoothed") return TfidfVariant::smoothed;
  throw ConfigError("unknown tfidf variant: " + std::string(s));
}

double inverse_document_frequency(TfidfVariant variant, std::size_t n_users, std::size_t df) {
  const auto n = static_cast<double>(n_users);
  const auto d = static_cast<double>(df);
  if (variant == TfidfVariant::standard) return std::log(n / d);
  return std::log((1.0 + n) / (1.0 + d)) + 1.0;
}

std::vector<std::size_t> UserUrlMatrix::document_frequency() const {
  std::vector<std::size_t> df(n_urls(), 0);
  for (std::size_t k = 0; k < nnz(); ++k) {
    if (counts[k] > 0) ++df[cols[k]];
  }
  return df;
}

std::vector<double> UserUrlMatrix::row_norms() const {
  std::vector<double> norms(n_users(), 0.0);
  for (std::size_t i = 0; i < n_users(); ++i) {
    double sum = 0.0;
    for (double w : row_weights(i)) sum += w * w;
    norms[i] = std::sqrt(sum);
  }
  return norms;
}

bool UserUrlMatrix::empty_signal() const {
  return std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; });
}

void MatrixBuilder::add(std::string_view user_id, const CanonicalUrl& url) {
  auto [uit, new_user] = user_index_.try_emplace(std::string(user_id), static_cast<std::uint32_t>(user_names_.size()));
  if (new_user) user_names_.emplace_back(user_id);
  auto [lit, new_url] = url_index_.try_emplace(url.full, static_cast<std::uint32_t>(url_values_.size()));
  if (new_url) url_values_.push_back(url);
  const std::uint64_t key = (static_cast<std::uint64_t>(uit->second) << 32) | lit->second;
  ++cell_counts_[key];
  ++n_shares_;
}

std::unordered_map<std::string, std::size_t> MatrixBuilder::user_share_totals() const {
  std::vector<std::size_t> totals(user_names_.size(), 0);
  for (const auto& [key, n] : cell_counts_) totals[key >> 32] += n;
  std::unordered_map<std::string, std::size_t> out;
  out.reserve(totals.size());
  for (std::size_t i = 0; i < totals.size(); ++i) out.emplace(user_names_[i], totals[i]);
  return out;
}

std::set<std::string> MatrixBuilder::active_users(std::size_t min_urls) const {
  if (min_urls < 1) throw ConfigError("min_urls must be >= 1");
  std::set<std::string> active;
  for (const auto& [user, n] : user_share_totals()) {
    if (n >= min_urls) active.insert(user);
  }
  return active;
}

UserUrlMatrix MatrixBuilder::build(const std::set<std::string>& active_users, TfidfVariant variant) const {
  if (active_users.empty()) throw ConfigError("active user set is empty");

  struct Cell {
    std::uint32_t user;
    std::uint32_t url;
    std::uint32_t count;
  };
  std::vector<Cell> cells;
  cells.reserve(cell_counts_.size());
  for (const auto& [key, n] : cell_counts_) {
    const auto user = static_cast<std::uint32_t>(key >> 32);
    if (active_users.contains(user_names_[user]))
      cells.push_back({user, static_cast<std::uint32_t>(key & 0xffffffffu), n});
  }
  if (cells.empty()) throw EmptyResultError("no URL shares survive the activity filter");

  // deterministic ordering: users by id, URLs by canonical string
  std::vector<std::uint32_t> user_order, url_order;
  {
    std::vector<char> used_user(user_names_.size(), 0), used_url(url_values_.size(), 0);
    for (const auto& c : cells) used_user[c.user] = used_url[c.url] = 1;
    for (std::uint32_t i = 0; i < used_user.size(); ++i)
      if (used_user[i]) user_order.push_back(i);
    for (std::uint32_t i = 0; i < used_url.size(); ++i)
      if (used_url[i]) url_order.push_back(i);
  }
  std::sort(user_order.begin(), user_order.end(),
            [&](auto a, auto b) { return user_names_[a] < user_names_[b]; });
  std::sort(url_order.begin(), url_order.end(),
            [&](auto a, auto b) { return url_values_[a].full < url_values_[b].full; });
  std::vector<std::uint32_t> user_rank(user_names_.size()), url_rank(url_values_.size());
  for (std::uint32_t r = 0; r < user_order.size(); ++r) user_rank[user_order[r]] = r;
  for (std::uint32_t r = 0; r < url_order.size(); ++r) url_rank[url_order[r]] = r;
  for (auto& c : cells) {
    c.user = user_rank[c.user];
    c.url = url_rank[c.url];
  }
  std::sort(cells.begin(), cells.end(),
            [](const Cell& a, const Cell& b) { return a.user != b.user ? a.user < b.user : a.url < b.url; });

  UserUrlMatrix m;
  m.variant = variant;
  m.users.reserve(user_order.size());
  for (auto u : user_order) m.users.push_back(user_names_[u]);
  m.urls.reserve(url_order.size());
  m.url_domains.reserve(url_order.size());
  for (auto u : url_order) {
    m.urls.push_back(url_values_[u].full);
    m.url_domains.push_back(url_values_[u].registered_domain);
  }
  m.row_ptr.assign(m.users.size() + 1, 0);
  m.cols.reserve(cells.size());
  m.counts.reserve(cells.size());
  for (const auto& c : cells) {
    ++m.row_ptr[c.user + 1];
    m.cols.push_back(c.url);
    m.counts.push_back(c.count);
  }
  std::partial_sum(m.row_ptr.begin(), m.row_ptr.end(), m.row_ptr.begin());

  const auto df = m.document_frequency();
  std::vector<double> idf(df.size());
  for (std::size_t u = 0; u < df.size(); ++u) idf[u] = inverse_document_frequency(variant, m.n_users(), df[u]);
  m.weights.resize(m.nnz());
  for (std::size_t k = 0; k < m.nnz(); ++k) m.weights[k] = static_cast<double>(m.counts[k]) * idf[m.cols[k]];
  return m;
}

UserUrlMatrix build_matrix(std::span<const Share> shares, const std::set<std::string>& active_users,
                           TfidfVariant variant) {
  MatrixBuilder builder;
  for (const auto& s : shares) builder.add(s);
  return builder.build(active_users, variant);
}

}  // namespace courl
