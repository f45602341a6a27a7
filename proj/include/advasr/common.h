// include/advasr/common.h

// Copyright 2026  The advasr authors

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

#ifndef ADVASR_COMMON_H_
#define ADVASR_COMMON_H_

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace advasr {

/// Shape or dimension mismatch between operands.
struct ShapeError : std::runtime_error {
  explicit ShapeError(const std::string &msg) : std::runtime_error(msg) {}
};

/// Non-finite values, degenerate covariances, infeasible losses.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string &msg) : std::runtime_error(msg) {}
};

/// Malformed corpora, manifests, checkpoints, or argument combinations
/// that refer to data (missing splits, stage/dataset mismatch, ...).
struct DataError : std::runtime_error {
  explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};

namespace detail {
inline void str_append(std::ostringstream &) {}
template <typename T, typename... Rest>
void str_append(std::ostringstream &os, const T &v, const Rest &...rest) {
  os << v;
  str_append(os, rest...);
}
}  // namespace detail

template <typename... Args>
std::string str_cat(const Args &...args) {
  std::ostringstream os;
  detail::str_append(os, args...);
  return os.str();
}

/// Deterministic 64-bit seed derived from a master seed and a component name,
/// so every random consumer in a run draws from its own named stream.
inline uint64_t sub_seed(uint64_t master, const std::string &name) {
  uint64_t h = 1469598103934665603ULL ^ master;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  // splitmix64 finalizer
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

}  // namespace advasr

#endif  // ADVASR_COMMON_H_
