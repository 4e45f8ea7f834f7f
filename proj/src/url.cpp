#include "courl/url.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "courl/error.hpp"

namespace courl {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool valid_scheme(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
  });
}

bool valid_host(std::string_view h) {
  if (h.empty()) return false;
  if (h.front() == '[') return h.size() > 2 && h.back() == ']';
  if (h == "localhost") return true;
  if (h.front() == '.' || h.back() == '.' || h.front() == '-') return false;
  if (h.find('.') == std::string_view::npos) return false;
  return std::all_of(h.begin(), h.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u) || c == '.' || c == '-' || c == '_';
  });
}

}  // namespace

std::vector<std::string> default_tracking_params() {
  return {"utm_*", "fbclid", "gclid", "igshid", "ref_src", "s", "t"};
}

UrlCanonicalizer::UrlCanonicalizer() : tracking_(default_tracking_params()) {}

UrlCanonicalizer::UrlCanonicalizer(std::vector<std::string> tracking_params)
    : tracking_(std::move(tracking_params)) {
  for (auto& t : tracking_) t = to_lower(t);
}

bool UrlCanonicalizer::is_tracking_param(std::string_view name) const {
  const std::string lname = to_lower(name);
  for (const auto& pattern : tracking_) {
    if (!pattern.empty() && pattern.back() == '*') {
      std::string_view prefix(pattern.data(), pattern.size() - 1);
      if (std::string_view(lname).starts_with(prefix)) return true;
    } else if (lname == pattern) {
      return true;
    }
  }
  return false;
}

std::optional<CanonicalUrl> UrlCanonicalizer::operator()(std::string_view raw) const {
  std::string_view s = trim(raw);
  if (s.empty()) return std::nullopt;
  if (std::any_of(s.begin(), s.end(), is_space)) return std::nullopt;

  std::string scheme = "https";
  std::string_view rest = s;
  if (auto pos = s.find("://"); pos != std::string_view::npos) {
    if (!valid_scheme(s.substr(0, pos))) return std::nullopt;
    scheme = to_lower(s.substr(0, pos));
    rest = s.substr(pos + 3);
  } else if (s.starts_with("//")) {
    rest = s.substr(2);
  }

  // fragment goes first so a '#' can never be mistaken for part of the query
  if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);

  const auto auth_end = rest.find_first_of("/?");
  std::string_view authority = rest.substr(0, auth_end);
  std::string_view tail = auth_end == std::string_view::npos ? std::string_view{} : rest.substr(auth_end);

  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority = authority.substr(at + 1);

  std::string_view host_part = authority;
  std::string_view port;
  if (!authority.empty() && authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host_part = authority.substr(0, close + 1);
    std::string_view after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') return std::nullopt;
      port = after.substr(1);
    }
  } else if (auto colon = authority.find(':'); colon != std::string_view::npos) {
    host_part = authority.substr(0, colon);
    port = authority.substr(colon + 1);
  }
  if (!std::all_of(port.begin(), port.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return std::nullopt;

  std::string host = to_lower(host_part);
  while (host.starts_with("www.") && host.find('.', 4) != std::string::npos) host.erase(0, 4);
  if (!valid_host(host)) return std::nullopt;

  std::string_view path = tail;
  std::string_view query;
  if (auto q = tail.find('?'); q != std::string_view::npos) {
    path = tail.substr(0, q);
    query = tail.substr(q + 1);
  }
  while (!path.empty() && path.back() == '/') path.remove_suffix(1);

  std::vector<std::string_view> params;
  while (!query.empty()) {
    auto amp = query.find('&');
    std::string_view param = query.substr(0, amp);
    query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
    if (param.empty()) continue;
    std::string_view name = param.substr(0, param.find('='));
    if (!is_tracking_param(name)) params.push_back(param);
  }
  std::stable_sort(params.begin(), params.end(), [](std::string_view a, std::string_view b) {
    return a.substr(0, a.find('=')) < b.substr(0, b.find('='));
  });

  CanonicalUrl out;
  out.registered_domain = host;
  out.full.reserve(s.size());
  out.full.append(scheme).append("://").append(host);
  if (!port.empty()) out.full.append(":").append(port);
  out.full.append(path);
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.full.push_back(i == 0 ? '?' : '&');
    out.full.append(params[i]);
  }
  return out;
}

std::optional<CanonicalUrl> canonicalize_url(std::string_view raw) {
  static const UrlCanonicalizer canon;
  return canon(raw);
}

ExpansionMap ExpansionMap::load(const std::string& path, const UrlCanonicalizer& canon) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open expansion map: " + path);
  ExpansionMap map;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    map.insert(std::string_view(line).substr(0, tab), line.substr(tab + 1), canon);
  }
  return map;
}

void ExpansionMap::insert(std::string_view shortened, std::string expanded, const UrlCanonicalizer& canon) {
  if (auto key = canon(shortened)) table_[key->full] = std::move(expanded);
}

CanonicalUrl ExpansionMap::apply(const CanonicalUrl& url, const UrlCanonicalizer& canon) const {
  auto it = table_.find(url.full);
  if (it == table_.end()) return url;
  if (auto target = canon(it->second)) return *target;
  ++warnings_;
  return url;
}

CanonicalUrl apply_expansion_map(const CanonicalUrl& url, const ExpansionMap& map) { return map.apply(url); }

}  // namespace courl
