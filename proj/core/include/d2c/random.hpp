/*
 Copyright 2026 The d2c Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <cstdint>
#include <initializer_list>

#include "d2c/types.hpp"

namespace d2c {

// Stream domains keep independent consumers of the same seed apart.
enum class StreamDomain : std::uint64_t {
  kProcessNoise = 0x6e6f697365ULL,
  kEstimation = 0x657374696dULL,
  kHessian = 0x6865737369ULL,
  kReplan = 0x7265706c616eULL,
  kBootstrap = 0x626f6f74ULL,
  kUser = 0x75736572ULL,
};

std::uint64_t splitmix64(std::uint64_t x);

// Order-sensitive combination of 64-bit words into one key.
std::uint64_t hash_words(std::initializer_list<std::uint64_t> words);

// Identifies one counter-based stream: (seed, domain, a, b, c).
// Two keys with equal fields produce identical draws on every platform,
// independent of thread scheduling.
struct StreamKey {
  std::uint64_t seed = 0;
  StreamDomain domain = StreamDomain::kUser;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  std::uint64_t c = 0;

  std::uint64_t digest() const;
  StreamKey with(std::uint64_t a_, std::uint64_t b_ = 0, std::uint64_t c_ = 0) const {
    return {seed, domain, a_, b_, c_};
  }
};

// Standard-normal generator driven by a counter over a hashed key.
class NormalStream {
 public:
  explicit NormalStream(const StreamKey& key);
  explicit NormalStream(std::uint64_t key_digest);

  std::uint64_t key_digest() const { return key_; }

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double next_uniform();
  double next_normal();
  Vector normal_vector(Eigen::Index n);
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a over raw bytes; used for digests of draws and configs.
class Fnv1a {
 public:
  void update(const void* data, std::size_t size);
  void update(double v) { update(&v, sizeof v); }
  void update(std::uint64_t v) { update(&v, sizeof v); }
  void update(const Vector& v) { update(v.data(), sizeof(double) * static_cast<std::size_t>(v.size())); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace d2c
