// Copyright 2026 The ehcap Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace ehcap {

/// A parameter is outside the domain of the operation.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A policy tried to spend more energy than the battery holds.
class AdmissibilityViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An iterative solver stopped before reaching its tolerance.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Too few renewal epochs in a trajectory to form statistics.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The epoch-length cap of an augmented MDP state carries non-negligible mass.
class CapTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ehcap
