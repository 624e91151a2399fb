// Copyright 2026 The ltr Authors
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

#ifndef LTR_ERRORS_H_
#define LTR_ERRORS_H_

#include <stdexcept>
#include <string>

namespace ltr {

// Base class for every error raised by the library. Subclasses name the
// failure category; the message carries the detail.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Too few items to form any interaction (N < 2 where peers are required).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public TrainingError {
 public:
  DivergenceError(const std::string& what, long step)
      : TrainingError(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line)
      : Error(what), line_(line) {}
  // 1-based line number, or 0 when not line oriented.
  long line() const { return line_; }

 private:
  long line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ltr

#endif  // LTR_ERRORS_H_
