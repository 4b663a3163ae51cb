// Copyright 2026 The serpaudit Authors
// Use of this source code is governed by the Apache-2.0 license that can be
// found in the LICENSE file.

#ifndef SERPAUDIT_ERRORS_HPP
#define SERPAUDIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace serpaudit {

// Base for all data-level failures (CLI exit code 2).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed record or file content; carries the offending line when known.
class ParseError : public Error {
 public:
  using Error::Error;
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

// Log written by an incompatible format version.
class VersionError : public Error {
 public:
  using Error::Error;
};

}  // namespace serpaudit

#endif  // SERPAUDIT_ERRORS_HPP
