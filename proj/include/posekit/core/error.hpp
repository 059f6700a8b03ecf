// Copyright 2026 The Posekit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace posekit {

// Every error carries a stable category string. The CLI maps categories to
// exit codes (see exit_code_for).
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

// Shape or rank mismatch. The message names the offending axis.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error("dimension-error", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config-error", what) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error("input-error", what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("parse-error", what) {}
};

// Forward called on a graph with layers that have no weights bound.
class InitializationError : public Error {
 public:
  explicit InitializationError(const std::string& what)
      : Error("unbound-weights", what) {}
};

// Weight-file failures. Category is one of weights-not-found,
// weights-bad-magic, weights-bad-version, weights-truncated,
// weights-missing-tensor, weights-shape-mismatch, weights-bad-dtype.
class WeightsError : public Error {
 public:
  WeightsError(std::string category, const std::string& what)
      : Error(std::move(category), what) {}
};

// OKS is undefined for a ground truth with no labeled keypoints.
class NoLabeledKeypoints : public Error {
 public:
  NoLabeledKeypoints()
      : Error("no-labeled-keypoints",
              "ground truth has no labeled keypoints; OKS undefined") {}
  explicit NoLabeledKeypoints(const std::string& what)
      : Error("no-labeled-keypoints", what) {}
};

// A result references an image id absent from the ground truth.
class IngestionError : public Error {
 public:
  explicit IngestionError(const std::string& what)
      : Error("ingestion-error", what) {}
};

class InferenceError : public Error {
 public:
  explicit InferenceError(const std::string& what)
      : Error("inference-error", what) {}
};

// 0 success, 1 evaluation/inference failure, 2 I/O or configuration failure.
inline int exit_code_for(const std::string& category) {
  if (category == "ingestion-error" || category == "inference-error" ||
      category == "no-labeled-keypoints" || category == "dimension-error" ||
      category == "unbound-weights" || category == "nondeterministic-output") {
    return 1;
  }
  return 2;
}

}  // namespace posekit
