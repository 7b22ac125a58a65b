/*
 * Copyright 2026 The Replica Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef REPLICA_RNG_H_
#define REPLICA_RNG_H_

#include <cstddef>
#include <cstdint>
#include <random>

namespace replica {

using Engine = std::mt19937_64;

// SplitMix64 finalizer; used only to decorrelate derived seeds.
inline std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of the independent substream `index` under `seed`. Every replicate
// draws from its own substream so results do not depend on execution order.
inline std::uint64_t SubstreamSeed(std::uint64_t seed, std::uint64_t index) {
  return MixSeed(MixSeed(seed) ^ MixSeed(index + 0x632be59bd9b4e019ULL));
}

inline Engine SubstreamEngine(std::uint64_t seed, std::uint64_t index) {
  return Engine(SubstreamSeed(seed, index));
}

// Uniform index in [0, n).
inline std::size_t UniformIndex(Engine& engine, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine);
}

inline double Uniform01(Engine& engine) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine);
}

}  // namespace replica

#endif  // REPLICA_RNG_H_
