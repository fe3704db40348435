// Copyright 2026 The kimoi Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kimoi {

enum class ErrorKind {
  kInvalidInput,
  kSingularGeometry,
  kTrainingFailure,
  kIo,
  kCorruptCheckpoint,
  kConfig,
  kShapeMismatch,
  kSequenceMismatch,
  kCorpusNotFound,
  kUsage,
};

// Stable strings used in the CLI's machine-readable error output.
constexpr std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kSingularGeometry: return "singular-geometry";
    case ErrorKind::kTrainingFailure: return "training-failure";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kCorruptCheckpoint: return "corrupt-checkpoint";
    case ErrorKind::kConfig: return "config-invalid";
    case ErrorKind::kShapeMismatch: return "shape-mismatch";
    case ErrorKind::kSequenceMismatch: return "sequence-mismatch";
    case ErrorKind::kCorpusNotFound: return "corpus-not-found";
    case ErrorKind::kUsage: return "usage";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace kimoi
