// Copyright 2026 The isd-evo Authors.
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

#ifndef ISD_RANDOM_H_
#define ISD_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>

namespace isd {

// All stochastic components draw from this engine. The raw output sequence
// of mt19937_64 is fixed by the standard; the helpers below avoid the
// implementation-defined std distributions so streams are portable.
using Rng = std::mt19937_64;

// Derives an independent child seed from a parent seed and a stream tag
// (splitmix64 finalizer over the combined words).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag);

// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

// Uniform double in [lo, hi).
double uniform(Rng& rng, double lo, double hi);

// Unbiased integer in [0, n). n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

bool bernoulli(Rng& rng, double p);

// Fisher-Yates shuffle driven by uniform_index.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = uniform_index(rng, i);
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

// Text round trip of the full engine state (used by checkpoints).
std::string rng_to_string(const Rng& rng);
Rng rng_from_string(const std::string& text);

}  // namespace isd

#endif  // ISD_RANDOM_H_
