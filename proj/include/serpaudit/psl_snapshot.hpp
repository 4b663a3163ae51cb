// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.
//
// Pinned snapshot of public-suffix rules, trimmed to the registries this
// project encounters in audits and tests. Rule grammar follows the public
// suffix list: one rule per entry, "*." prefixes match exactly one label,
// "!" marks an exception to a wildcard rule.

#ifndef SERPAUDIT_PSL_SNAPSHOT_HPP
#define SERPAUDIT_PSL_SNAPSHOT_HPP

namespace serpaudit {

inline constexpr const char* kPublicSuffixRules[] = {
    // Generic top-level domains.
    "com", "org", "net", "edu", "gov", "mil", "int", "info", "biz", "name",
    "io", "co", "app", "dev", "page", "xyz", "online", "site", "tech",
    "store", "blog", "news", "wiki", "media", "social", "network", "agency",
    "digital", "academy", "institute", "foundation", "museum", "travel",
    "jobs", "aero", "coop", "post", "pro", "tel", "asia", "cat", "tv", "me",
    "cc", "fm", "am", "ws", "fyi", "example", "invalid", "test", "localhost",
    // Country registries relevant to the audit locations.
    "il", "co.il", "org.il", "net.il", "ac.il", "gov.il", "muni.il", "idf.il",
    "sa", "com.sa", "net.sa", "org.sa", "gov.sa", "med.sa", "pub.sa",
    "edu.sa", "sch.sa",
    "br", "com.br", "net.br", "org.br", "gov.br", "art.br", "blog.br",
    "edu.br", "jus.br",
    "us", "ny.us", "ca.us", "tx.us", "fl.us",
    // Other registries that commonly appear in ranked results.
    "uk", "co.uk", "org.uk", "net.uk", "ac.uk", "gov.uk", "me.uk",
    "tr", "com.tr", "net.tr", "org.tr", "gen.tr", "gov.tr",
    "ps", "com.ps", "net.ps", "org.ps", "gov.ps", "edu.ps",
    "eg", "com.eg", "gov.eg", "org.eg",
    "jo", "com.jo", "gov.jo", "org.jo",
    "lb", "com.lb", "gov.lb", "org.lb",
    "qa", "com.qa", "gov.qa",
    "ae", "co.ae", "gov.ae",
    "ir", "co.ir", "gov.ir",
    "de", "fr", "it", "nl", "es", "com.es", "ch", "at", "be", "se", "no",
    "dk", "fi", "pl", "com.pl", "ie", "ru", "com.ru", "ua", "com.ua",
    "jp", "co.jp", "ne.jp", "or.jp", "ac.jp", "go.jp",
    "cn", "com.cn", "edu.cn", "gov.cn",
    "kr", "co.kr", "go.kr",
    "in", "co.in", "org.in", "gov.in",
    "au", "com.au", "org.au", "edu.au", "gov.au",
    "nz", "co.nz", "org.nz", "govt.nz",
    "ca", "qc.ca", "on.ca", "bc.ca",
    "mx", "com.mx", "gob.mx",
    "ar", "com.ar", "gob.ar",
    "za", "co.za", "org.za", "gov.za",
    "eu", "gr", "pt", "cz", "hu", "ro", "bg", "sk", "si", "hr", "lt", "lv",
    "ee", "is", "mt", "cy",
    // Wildcard registry with a carve-out, exercising full rule semantics.
    "ck", "*.ck", "!www.ck",
    "bd", "*.bd",
    "kw", "*.kw",
};

inline constexpr int kPublicSuffixRuleCount =
    sizeof(kPublicSuffixRules) / sizeof(kPublicSuffixRules[0]);

}  // namespace serpaudit

#endif  // SERPAUDIT_PSL_SNAPSHOT_HPP
