// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// The built-in query corpus: 27 conflict-specific and 27 general queries.
// History-profiled (type-3) bots run only the 10-per-category subset marked
// in_type3_subset. A TSV load/save pair lets audits swap in their own corpus.

#ifndef SERPAUDIT_QUERY_CORPUS_HPP
#define SERPAUDIT_QUERY_CORPUS_HPP

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "serpaudit/errors.hpp"
#include "serpaudit/model.hpp"

namespace serpaudit {

inline std::vector<Query> builtin_query_corpus() {
  struct Row {
    const char* text;
    QueryCategory category;
    bool subset;
  };
  static const Row kRows[] = {
      {"military complex Al-Shifa hospital", QueryCategory::kSpecific, false},
      {"Israel banned Olympics", QueryCategory::kSpecific, false},
      {"Tiktok antisemitism", QueryCategory::kSpecific, false},
      {"Israeli babies beheaded", QueryCategory::kSpecific, false},
      {"Hamas rapes", QueryCategory::kSpecific, true},
      {"strike Al-Ahli hospital", QueryCategory::kSpecific, false},
      {"Gaza tunnels", QueryCategory::kSpecific, true},
      {"Palestine banned Olympics", QueryCategory::kSpecific, false},
      {"Saint Porphyrios Orthodox Church Gaza", QueryCategory::kSpecific,
       false},
      {"Hamas", QueryCategory::kSpecific, true},
      {"Supernova festival attack", QueryCategory::kSpecific, false},
      {"Israel destroyed an orthodox church in Gaza", QueryCategory::kSpecific,
       false},
      {"Erdogan threatened to intervene and support Palestinians?",
       QueryCategory::kSpecific, true},
      {"Ukraine provided weapons to Hamas", QueryCategory::kSpecific, false},
      {"Yemen has declared war against Israel", QueryCategory::kSpecific,
       false},
      {"Gaza", QueryCategory::kSpecific, true},
      {"Palestinian nurse claims Hamas steals food and medicine from al-Shifa "
       "Hospital",
       QueryCategory::kSpecific, false},
      {"Israel", QueryCategory::kSpecific, true},
      {"American troops have landed in Israel to help Netanyahu's war efforts",
       QueryCategory::kSpecific, true},
      {"Orthodox church Gaza destroyed by Israel", QueryCategory::kSpecific,
       false},
      {"Houthis", QueryCategory::kSpecific, true},
      {"Erdogan threatens to support Palestinians", QueryCategory::kSpecific,
       true},
      {"Ukraine provides weapons to Hamas", QueryCategory::kSpecific, false},
      {"Yemen declares war on Israel", QueryCategory::kSpecific, false},
      {"Palestinian nurse alleges Hamas theft from al-Shifa Hospital",
       QueryCategory::kSpecific, false},
      {"American troops land in Israel to aid Netanyahu's war",
       QueryCategory::kSpecific, true},
      {"Middle East conflict", QueryCategory::kSpecific, false},
      {"How to tie a tie", QueryCategory::kGeneral, false},
      {"Popular books 2024", QueryCategory::kGeneral, false},
      {"Home workout routines", QueryCategory::kGeneral, true},
      {"best movies ever", QueryCategory::kGeneral, false},
      {"How to grow indoor plants", QueryCategory::kGeneral, false},
      {"Uncommon hobbies to try", QueryCategory::kGeneral, false},
      {"Rare and endangered plant species", QueryCategory::kGeneral, false},
      {"Experimental music genres", QueryCategory::kGeneral, true},
      {"organic gardening tips", QueryCategory::kGeneral, false},
      {"how to be smarter", QueryCategory::kGeneral, false},
      {"Financial planning tips", QueryCategory::kGeneral, true},
      {"Benefits of meditation for mental health", QueryCategory::kGeneral,
       true},
      {"Nutritional value of quinoa", QueryCategory::kGeneral, false},
      {"How to improve sleep quality naturally?", QueryCategory::kGeneral,
       false},
      {"Interesting facts about dolphins", QueryCategory::kGeneral, false},
      {"Guide to composting at home", QueryCategory::kGeneral, true},
      {"Popular science fiction books 2024", QueryCategory::kGeneral, false},
      {"How to set up a home office?", QueryCategory::kGeneral, false},
      {"Effects of climate change on wildlife", QueryCategory::kGeneral, true},
      {"Tips for growing herbs indoors", QueryCategory::kGeneral, false},
      {"underrated movies you must see", QueryCategory::kGeneral, false},
      {"Current trends in sustainable fashion", QueryCategory::kGeneral, true},
      {"How do electric cars work?", QueryCategory::kGeneral, true},
      {"Healthy lunch ideas for work", QueryCategory::kGeneral, true},
      {"How to invest in stocks for beginners?", QueryCategory::kGeneral,
       false},
      {"DIY home decor on a budget", QueryCategory::kGeneral, true},
      {"What is virtual reality and how does it work?",
       QueryCategory::kGeneral, false},
  };
  std::vector<Query> corpus;
  for (const Row& row : kRows)
    corpus.push_back(make_query(row.text, row.category, row.subset));
  return corpus;
}

// Corpus file: tab-separated rows of (text, category, in_type3_subset),
// one query per line, '#' comment lines allowed.
inline std::vector<Query> load_query_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open query corpus: " + path);
  std::vector<Query> corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string text, category, subset;
    if (!std::getline(fields, text, '\t') ||
        !std::getline(fields, category, '\t') ||
        !std::getline(fields, subset, '\t'))
      throw ParseError("query corpus row needs 3 tab-separated fields",
                       line_no);
    if (subset != "0" && subset != "1")
      throw ParseError("in_type3_subset must be 0 or 1", line_no);
    try {
      corpus.push_back(make_query(text, query_category_from_string(category),
                                  subset == "1"));
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (corpus.empty()) throw Error("query corpus is empty: " + path);
  return corpus;
}

inline void save_query_corpus(const std::vector<Query>& corpus,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write query corpus: " + path);
  out << "# text<TAB>category<TAB>in_type3_subset\n";
  for (const Query& q : corpus)
    out << q.text << '\t' << to_string(q.category) << '\t'
        << (q.in_type3_subset ? '1' : '0') << '\n';
  if (!out) throw Error("query corpus write failed: " + path);
}

inline std::vector<Query> type3_subset(const std::vector<Query>& corpus) {
  std::vector<Query> subset;
  for (const Query& q : corpus)
    if (q.in_type3_subset) subset.push_back(q);
  return subset;
}

}  // namespace serpaudit

#endif  // SERPAUDIT_QUERY_CORPUS_HPP
