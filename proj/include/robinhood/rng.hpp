#pragma once

#include <cstdint>
#include <string_view>

#include "robinhood/bigint.hpp"

namespace robinhood {

// Name and version of the generator; part of every trace digest so that a
// change to the draw sequence can never silently reuse old digests.
inline constexpr std::string_view kPrngName = "splitmix64-counter/1";

inline constexpr std::uint64_t kDefaultSeed = 42;

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z);

// Child stream key for `index` under `parent`. Streams used by the engine:
//   trial  = derive_stream(seed, trial_index)
//   night  = derive_stream(trial, night_index)        night_index >= 1
//   labels = derive_stream(derive_stream(trial, 0), bag_id)
std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t index);

// Counter-based generator: draw n of the stream keyed k is
// mix64(k + (n + 1) * 0x9e3779b97f4a7c15), i.e. SplitMix64 seeded with k.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next();
  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  // Uniform on [0, bound); bound > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound);
  BigInt below(const BigInt& bound);
  // True with probability num / den exactly; 0 <= num <= den, den > 0.
  bool bernoulli(const BigInt& num, const BigInt& den);
  // Uniform on [0, 1) with 53 random bits.
  double unit();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace robinhood
