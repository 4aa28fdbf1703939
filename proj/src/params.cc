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

#include "eeseq/params.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "eeseq/errors.h"
#include "eeseq/rng.h"

namespace eeseq {

namespace {

constexpr char kMagic[] = "EESEQ1";
constexpr std::size_t kMagicLen = 6;
// Sanity bounds when reading untrusted files.
constexpr std::uint64_t kMaxNameLen = 4096;
constexpr std::uint64_t kMaxRank = 8;

void WriteU64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t ReadU64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw FormatError("snapshot truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void WriteF64(std::ostream& os, double d) {
  WriteU64(os, std::bit_cast<std::uint64_t>(d));
}

double ReadF64(std::istream& is) { return std::bit_cast<double>(ReadU64(is)); }

}  // namespace

ParamStore::ParamStore(const ParamStore& other) {
  for (const auto& [name, p] : other.params_)
    params_.emplace(name, std::make_unique<Parameter>(*p));
}

ParamStore& ParamStore::operator=(const ParamStore& other) {
  if (this != &other) {
    ParamStore copy(other);
    params_ = std::move(copy.params_);
  }
  return *this;
}

Parameter& ParamStore::AddUniform(const std::string& name, Shape shape,
                                  std::size_t fan_in, std::uint64_t seed) {
  Tensor value(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Rng rng = Rng::ForKey(seed, name);
  for (double& v : value.data()) v = rng.Uniform(-bound, bound);
  return Add(name, std::move(value));
}

Parameter& ParamStore::Add(const std::string& name, Tensor value) {
  if (params_.count(name)) throw ConfigError("duplicate parameter " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Tensor(value.shape());
  p->value = std::move(value);
  p->value.set_requires_grad(true);
  Parameter& ref = *p;
  params_.emplace(name, std::move(p));
  return ref;
}

bool ParamStore::Contains(const std::string& name) const {
  return params_.count(name) != 0;
}

Parameter& ParamStore::Get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter " + name);
  return *it->second;
}

const Parameter& ParamStore::Get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter " + name);
  return *it->second;
}

std::size_t ParamStore::NumScalars() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p->value.size();
  return n;
}

std::vector<std::string> ParamStore::Names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

void ParamStore::ZeroGrad() {
  for (auto& [name, p] : params_) p->grad.Fill(0.0);
}

void ParamStore::Save(std::ostream& os) const {
  os.write(kMagic, kMagicLen);
  WriteU64(os, params_.size());
  for (const auto& [name, p] : params_) {
    WriteU64(os, name.size());
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    WriteU64(os, p->value.rank());
    for (std::size_t e : p->value.shape()) WriteU64(os, e);
    for (double v : p->value.data()) WriteF64(os, v);
  }
  if (!os) throw FormatError("failed writing snapshot");
}

void ParamStore::SaveFile(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open " + path + " for writing");
  Save(os);
}

ParamStore ParamStore::Load(std::istream& is) {
  char magic[kMagicLen];
  if (!is.read(magic, kMagicLen) || std::memcmp(magic, kMagic, kMagicLen) != 0)
    throw FormatError("bad snapshot magic");
  ParamStore store;
  const std::uint64_t count = ReadU64(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t len = ReadU64(is);
    if (len == 0 || len > kMaxNameLen) throw FormatError("bad name length");
    std::string name(len, '\0');
    if (!is.read(name.data(), static_cast<std::streamsize>(len)))
      throw FormatError("snapshot truncated");
    const std::uint64_t rank = ReadU64(is);
    if (rank == 0 || rank > kMaxRank) throw FormatError("bad rank for " + name);
    Shape shape(rank);
    for (auto& e : shape) {
      e = ReadU64(is);
      if (e == 0 || e > (1u << 28)) throw FormatError("bad extent for " + name);
    }
    std::vector<double> data(NumElements(shape));
    for (double& v : data) v = ReadF64(is);
    store.Add(name, Tensor(std::move(shape), std::move(data)));
  }
  return store;
}

ParamStore ParamStore::LoadFile(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path);
  return Load(is);
}

void ParamStore::CopyValuesFrom(const ParamStore& other) {
  for (auto& [name, p] : params_) {
    auto it = other.params_.find(name);
    if (it == other.params_.end()) continue;
    if (it->second->value.shape() != p->value.shape())
      throw DimensionError("shape mismatch for parameter " + name);
    const bool rg = p->value.requires_grad();
    p->value = it->second->value;
    p->value.set_requires_grad(rg);
  }
}

}  // namespace eeseq
