// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef SERPAUDIT_DOMAIN_HPP
#define SERPAUDIT_DOMAIN_HPP

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "serpaudit/errors.hpp"
#include "serpaudit/psl_snapshot.hpp"

namespace serpaudit {

namespace detail {

struct SuffixTables {
  std::unordered_set<std::string> exact;
  std::unordered_set<std::string> wildcard;   // stored without the "*."
  std::unordered_set<std::string> exception;  // stored without the "!"
};

inline const SuffixTables& suffix_tables() {
  static const SuffixTables tables = [] {
    SuffixTables t;
    for (int i = 0; i < kPublicSuffixRuleCount; ++i) {
      std::string_view rule = kPublicSuffixRules[i];
      if (rule.size() > 1 && rule[0] == '!') {
        t.exception.emplace(rule.substr(1));
      } else if (rule.size() > 2 && rule[0] == '*' && rule[1] == '.') {
        t.wildcard.emplace(rule.substr(2));
      } else {
        t.exact.emplace(rule);
      }
    }
    return t;
  }();
  return tables;
}

inline std::vector<std::string> split_labels(std::string_view host) {
  std::vector<std::string> labels;
  std::size_t start = 0;
  while (start <= host.size()) {
    std::size_t dot = host.find('.', start);
    if (dot == std::string_view::npos) dot = host.size();
    labels.emplace_back(host.substr(start, dot - start));
    start = dot + 1;
    if (dot == host.size()) break;
  }
  return labels;
}

inline std::string join_labels(const std::vector<std::string>& labels,
                               std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < labels.size(); ++i) {
    if (i > from) out.push_back('.');
    out += labels[i];
  }
  return out;
}

inline bool looks_like_ipv4(const std::vector<std::string>& labels) {
  if (labels.size() != 4) return false;
  for (const std::string& l : labels) {
    if (l.empty() || l.size() > 3) return false;
    for (char c : l)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace detail

// Extracts the host from an absolute http(s) URL: scheme check, strip
// userinfo, port, path/query/fragment, lowercase, drop a trailing dot.
inline std::string host_of_url(std::string_view url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos)
    throw Error("not an absolute URL: '" + std::string(url) + "'");
  std::string scheme;
  for (char c : url.substr(0, scheme_end))
    scheme.push_back(static_cast<char>(
        std::tolower(static_cast<unsigned char>(c))));
  if (scheme != "http" && scheme != "https")
    throw Error("unsupported scheme '" + scheme + "'");
  std::string_view rest = url.substr(scheme_end + 3);
  std::size_t authority_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, authority_end);
  std::size_t at = authority.rfind('@');
  if (at != std::string_view::npos) authority = authority.substr(at + 1);
  if (!authority.empty() && authority.front() == '[')
    throw Error("IP-literal host has no registrable domain");
  std::size_t colon = authority.rfind(':');
  if (colon != std::string_view::npos) authority = authority.substr(0, colon);
  if (authority.empty())
    throw Error("empty host in URL '" + std::string(url) + "'");
  std::string host;
  host.reserve(authority.size());
  for (char c : authority)
    host.push_back(static_cast<char>(
        std::tolower(static_cast<unsigned char>(c))));
  if (host.back() == '.') host.pop_back();
  if (host.empty()) throw Error("empty host in URL '" + std::string(url) + "'");
  return host;
}

// Registrable domain of a bare hostname under the pinned suffix snapshot.
// Follows list semantics: exceptions beat wildcards, longest rule wins, and
// an unmatched host falls back to treating its last label as the suffix.
inline std::string registrable_domain_of_host(const std::string& host) {
  const auto& tables = detail::suffix_tables();
  std::vector<std::string> labels = detail::split_labels(host);
  for (const std::string& l : labels)
    if (l.empty()) throw Error("malformed host '" + host + "'");
  if (detail::looks_like_ipv4(labels))
    throw Error("IP address has no registrable domain: '" + host + "'");

  std::size_t suffix_start = labels.size();  // label index where suffix begins
  bool matched = false;
  for (std::size_t from = 0; from < labels.size() && !matched; ++from) {
    std::string candidate = detail::join_labels(labels, from);
    if (tables.exception.count(candidate)) {
      suffix_start = from + 1;  // the exception label itself is registrable
      matched = true;
    } else if (tables.exact.count(candidate)) {
      suffix_start = from;
      matched = true;
    } else if (from + 1 < labels.size() &&
               tables.wildcard.count(detail::join_labels(labels, from + 1))) {
      suffix_start = from;
      matched = true;
    }
  }
  if (!matched) suffix_start = labels.size() - 1;  // implicit "*" rule
  if (suffix_start == 0)
    throw Error("host '" + host + "' is itself a public suffix");
  return detail::join_labels(labels, suffix_start - 1);
}

// Registrable domain of an absolute http(s) URL.
inline std::string registrable_domain(std::string_view url) {
  return registrable_domain_of_host(host_of_url(url));
}

}  // namespace serpaudit

#endif  // SERPAUDIT_DOMAIN_HPP
