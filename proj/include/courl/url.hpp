#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace courl {

/// URL identity used for co-sharing.
///
/// `full` has a lowercase scheme and host, no "www." prefix, no fragment, no
/// tracking parameters, remaining query parameters sorted by name and no
/// trailing slash. `registered_domain` is the host without port.
struct CanonicalUrl {
  std::string full;
  std::string registered_domain;

  friend bool operator==(const CanonicalUrl&, const CanonicalUrl&) = default;
};

/// Query-parameter names removed during canonicalization. A trailing '*'
/// makes an entry a prefix pattern ("utm_*").
std::vector<std::string> default_tracking_params();

class UrlCanonicalizer {
 public:
  UrlCanonicalizer();
  explicit UrlCanonicalizer(std::vector<std::string> tracking_params);

  /// Returns std::nullopt when no parseable host remains.
  std::optional<CanonicalUrl> operator()(std::string_view raw) const;

  bool is_tracking_param(std::string_view name) const;
  const std::vector<std::string>& tracking_params() const { return tracking_; }

 private:
  std::vector<std::string> tracking_;
};

std::optional<CanonicalUrl> canonicalize_url(std::string_view raw);

/// Offline substitute for resolving shortened links. Keys are canonical
/// `full` strings of the shortened form.
class ExpansionMap {
 public:
  ExpansionMap() = default;

  /// Two-column TSV: shortened<TAB>expanded. Blank lines and lines starting
  /// with '#' are ignored. Keys that fail canonicalization are skipped.
  static ExpansionMap load(const std::string& path, const UrlCanonicalizer& canon = {});

  void insert(std::string_view shortened, std::string expanded, const UrlCanonicalizer& canon = {});

  /// Canonical form of the expansion target when `url.full` is a key; the
  /// original when absent or when the target fails canonicalization (the
  /// latter increments warnings()).
  CanonicalUrl apply(const CanonicalUrl& url, const UrlCanonicalizer& canon = {}) const;

  std::size_t size() const { return table_.size(); }
  std::size_t warnings() const { return warnings_; }
  bool empty() const { return table_.empty(); }

 private:
  std::unordered_map<std::string, std::string> table_;
  mutable std::size_t warnings_ = 0;
};

CanonicalUrl apply_expansion_map(const CanonicalUrl& url, const ExpansionMap& map);

}  // namespace courl
