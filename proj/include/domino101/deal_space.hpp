// Copyright 2026 The domino101 Authors.
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

// Number of distinct deals of the 28 tiles into four labelled 7-tile hands.

#pragma once

#include <array>

#include <boost/multiprecision/cpp_int.hpp>

namespace domino101 {

using BigInt = boost::multiprecision::cpp_int;

// Multiplicative form: each step C(n, i) = C(n, i-1) * (n-i+1) / i is exact.
inline BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  BigInt r = 1;
  for (unsigned i = 1; i <= k; ++i) {
    r *= n - i + 1;
    r /= i;
  }
  return r;
}

// C(28,7), C(21,7), C(14,7). The last hand is forced (C(7,7) = 1).
inline std::array<BigInt, 3> deal_space_factors() {
  return {binomial(28, 7), binomial(21, 7), binomial(14, 7)};
}

inline BigInt deal_space_count() {
  BigInt product = 1;
  for (const BigInt& f : deal_space_factors()) product *= f;
  return product;
}

}  // namespace domino101
