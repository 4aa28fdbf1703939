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

#ifndef EESEQ_PARAMS_H_
#define EESEQ_PARAMS_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "eeseq/tensor.h"

namespace eeseq {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value
};

// Named learnable tensors. Iteration order is lexicographic by name, which
// makes snapshots and optimizer updates independent of creation order.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore& other);
  ParamStore& operator=(const ParamStore& other);
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  // Creates a parameter initialized uniformly in +-1/sqrt(fan_in), from a
  // stream keyed on (seed, name). Re-adding an existing name is an error.
  Parameter& AddUniform(const std::string& name, Shape shape,
                        std::size_t fan_in, std::uint64_t seed);
  Parameter& Add(const std::string& name, Tensor value);

  bool Contains(const std::string& name) const;
  Parameter& Get(const std::string& name);
  const Parameter& Get(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t NumScalars() const;
  std::vector<std::string> Names() const;

  void ZeroGrad();

  template <typename Fn>
  void ForEach(Fn&& fn) {
    for (auto& [name, p] : params_) fn(*p);
  }
  template <typename Fn>
  void ForEach(Fn&& fn) const {
    for (const auto& [name, p] : params_) fn(static_cast<const Parameter&>(*p));
  }

  // Binary snapshot: "EESEQ1", u64 count, then per tensor u64 name length,
  // name bytes, u64 rank, u64 extents, little-endian f64 values.
  void Save(std::ostream& os) const;
  void SaveFile(const std::string& path) const;
  static ParamStore Load(std::istream& is);
  static ParamStore LoadFile(const std::string& path);

  // Copies values from `other` for every name present in both stores. Shapes
  // must match.
  void CopyValuesFrom(const ParamStore& other);

 private:
  // unique_ptr keeps Parameter addresses stable for graphs holding pointers.
  std::map<std::string, std::unique_ptr<Parameter>> params_;
};

}  // namespace eeseq

#endif  // EESEQ_PARAMS_H_
