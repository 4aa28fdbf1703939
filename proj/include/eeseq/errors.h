// Copyright 2026  The eeseq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef EESEQ_ERRORS_H_
#define EESEQ_ERRORS_H_

#include <stdexcept>
#include <string>

namespace eeseq {

// Shapes of operands do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A NaN or infinity showed up where a finite value is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Misuse of a stateful object, e.g. calling backward() twice on one graph.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The CTC lattice has no path: the target needs more frames than given.
class InfeasibleTargetError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Input sequence is shorter than the subsampling factor.
class InputTooShortError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration value or file.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed snapshot or corpus file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eeseq

#endif  // EESEQ_ERRORS_H_
