// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Closed vocabularies shared by the simulator, the annotation pipeline, and
// the reports: website categories (split by query category) and the 5-point
// leaning scale.

#ifndef SERPAUDIT_VOCAB_HPP
#define SERPAUDIT_VOCAB_HPP

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "serpaudit/errors.hpp"

namespace serpaudit::vocab {

// Categories observed for general-query results.
inline const std::vector<std::string>& general_categories() {
  static const std::vector<std::string> kCategories = {
      "Reference",  "Entertainment", "Education", "Technology", "News",
      "Lifestyle",  "Business",      "Finance",   "Health",     "Government",
      "Non-Profit", "Social Media",  "Travel",    "E-Commerce", "Art",
      "Science",    "Fashion",       "Legal",     "Career",     "Retail",
      "Automotive", "Food",
  };
  return kCategories;
}

// Categories observed for conflict-specific query results.
inline const std::vector<std::string>& specific_categories() {
  static const std::vector<std::string> kCategories = {
      "Reference",  "Education",    "Government", "News",       "Fact-Checking",
      "Social Media", "Non-Profit", "Entertainment", "Finance", "Religion",
      "E-Commerce", "Technology",   "Sports",     "Travel",     "Science",
  };
  return kCategories;
}

// Union of both lists; the closed set every category label must come from.
inline const std::vector<std::string>& all_categories() {
  static const std::vector<std::string> kAll = [] {
    std::vector<std::string> all = general_categories();
    for (const std::string& c : specific_categories())
      if (std::find(all.begin(), all.end(), c) == all.end()) all.push_back(c);
    std::sort(all.begin(), all.end());
    return all;
  }();
  return kAll;
}

inline bool is_known_category(std::string_view category) {
  const auto& all = all_categories();
  return std::binary_search(all.begin(), all.end(), category);
}

// Lowercased category with non-alphanumerics removed; used in generated
// domain names ("Fact-Checking" -> "factchecking3.example") and for
// tolerant matching of annotator responses.
inline std::string category_slug(std::string_view category) {
  std::string slug;
  for (char c : category) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      slug.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(c))));
  }
  return slug;
}

// Resolves a free-form annotator response to a vocabulary category, or
// throws quoting the response.
inline const std::string& category_from_response(std::string_view response) {
  std::string slug = category_slug(response);
  for (const std::string& c : all_categories())
    if (category_slug(c) == slug) return c;
  throw Error("annotator response '" + std::string(response) +
              "' is not a known category");
}

// ---------------------------------------------------------------------------
// Leaning scale.
// ---------------------------------------------------------------------------

enum class Leaning {
  kProIsrael,
  kSlightlyProIsrael,
  kNeutral,
  kSlightlyProPalestine,
  kProPalestine,
};

inline constexpr int kLeaningCount = 5;

inline const std::vector<Leaning>& all_leanings() {
  static const std::vector<Leaning> kAll = {
      Leaning::kProIsrael, Leaning::kSlightlyProIsrael, Leaning::kNeutral,
      Leaning::kSlightlyProPalestine, Leaning::kProPalestine};
  return kAll;
}

inline std::string to_string(Leaning l) {
  switch (l) {
    case Leaning::kProIsrael: return "pro_israel";
    case Leaning::kSlightlyProIsrael: return "slightly_pro_israel";
    case Leaning::kNeutral: return "neutral";
    case Leaning::kSlightlyProPalestine: return "slightly_pro_palestine";
    case Leaning::kProPalestine: return "pro_palestine";
  }
  throw Error("unknown Leaning");
}

inline Leaning leaning_from_string(std::string_view s) {
  if (s == "pro_israel") return Leaning::kProIsrael;
  if (s == "slightly_pro_israel") return Leaning::kSlightlyProIsrael;
  if (s == "neutral") return Leaning::kNeutral;
  if (s == "slightly_pro_palestine") return Leaning::kSlightlyProPalestine;
  if (s == "pro_palestine") return Leaning::kProPalestine;
  throw ParseError("unknown leaning '" + std::string(s) + "'");
}

inline int leaning_index(Leaning l) { return static_cast<int>(l); }

// Three-way collapse used as an optional consensus relaxation: pro-Israel
// side, neutral, pro-Palestine side.
inline int leaning_side(Leaning l) {
  switch (l) {
    case Leaning::kProIsrael:
    case Leaning::kSlightlyProIsrael:
      return -1;
    case Leaning::kNeutral:
      return 0;
    case Leaning::kSlightlyProPalestine:
    case Leaning::kProPalestine:
      return 1;
  }
  throw Error("unknown Leaning");
}

}  // namespace serpaudit::vocab

#endif  // SERPAUDIT_VOCAB_HPP
