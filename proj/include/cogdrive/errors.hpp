// Copyright 2026 The cogdrive Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COGDRIVE_ERRORS_HPP_
#define COGDRIVE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cogdrive {

enum class ErrorKind {
  kPrecondition,
  kEmptyActionSet,
  kMismatchedSampling,
  kMissingStrategy,
  kStuck,
  kEmptyBelief,
  kNoPureEquilibrium,
  kTooLarge,
  kSchema,
  kGap,
  kConfig,
};

const char* ErrorKindName(ErrorKind kind);

// All library failures surface as this exception; `kind()` lets callers
// (notably the CLI exit-code mapping) branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cogdrive

#endif  // COGDRIVE_ERRORS_HPP_
