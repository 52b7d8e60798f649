// Copyright 2026 The fedkat Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#ifndef FEDKAT_ERRORS_HPP_
#define FEDKAT_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedkat {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input text (LIBSVM data, JSON configs).  Carries the 1-based
// line number when one is known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// An iterate escaped: the traced objective rose an order of magnitude above
// its starting point, so the run is aborted instead of looping to max_rounds.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// An iterative numerical routine (power iteration, reference solve) hit its
// iteration cap before meeting its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedkat

#endif  // FEDKAT_ERRORS_HPP_
