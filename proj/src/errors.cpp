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

#include "cogdrive/errors.hpp"

namespace cogdrive {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kPrecondition: return "Precondition";
    case ErrorKind::kEmptyActionSet: return "EmptyActionSet";
    case ErrorKind::kMismatchedSampling: return "MismatchedSampling";
    case ErrorKind::kMissingStrategy: return "MissingStrategy";
    case ErrorKind::kStuck: return "Stuck";
    case ErrorKind::kEmptyBelief: return "EmptyBelief";
    case ErrorKind::kNoPureEquilibrium: return "NoPureEquilibrium";
    case ErrorKind::kTooLarge: return "TooLarge";
    case ErrorKind::kSchema: return "SchemaError";
    case ErrorKind::kGap: return "GapError";
    case ErrorKind::kConfig: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace cogdrive
