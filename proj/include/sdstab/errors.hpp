/******************************************************************************
 * Copyright 2026 The sdstab Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *****************************************************************************/

#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace sdstab {

/// Bad argument to a public entry point (wrong dimension, non-positive step, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of a numerical routine does not hold.
class PreconditionViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An iterative or direct solver failed to produce a trustworthy answer.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors that carry the state at which they were detected.
class WitnessedError : public std::runtime_error {
 public:
  WitnessedError(const std::string& what, Eigen::VectorXd witness)
      : std::runtime_error(what), witness_(std::move(witness)) {}

  const Eigen::VectorXd& witness() const { return witness_; }

 private:
  Eigen::VectorXd witness_;
};

class NotStabilizable : public WitnessedError {
 public:
  using WitnessedError::WitnessedError;
};

class OffsetSelectionFailure : public WitnessedError {
 public:
  using WitnessedError::WitnessedError;
};

class UncoveredPoint : public WitnessedError {
 public:
  using WitnessedError::WitnessedError;
};

class ControllerError : public WitnessedError {
 public:
  using WitnessedError::WitnessedError;
};

class NoCertifiedStep : public WitnessedError {
 public:
  NoCertifiedStep(const std::string& what, Eigen::VectorXd witness, std::string trace)
      : WitnessedError(what, std::move(witness)), trace_(std::move(trace)) {}

  const std::string& trace() const { return trace_; }

 private:
  std::string trace_;
};

/// Syntax error in an expression or configuration string; `position` is a
/// zero-based character offset into the offending text.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " (at offset " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace sdstab
