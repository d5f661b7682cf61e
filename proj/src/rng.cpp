#include "robinhood/rng.hpp"

#include <vector>

namespace robinhood {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t index) {
  return mix64(parent ^ mix64(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t CounterRng::next() {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

std::uint64_t CounterRng::below(std::uint64_t bound) {
  // Reject the lowest (2^64 mod bound) values.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t x = next();
    if (x >= threshold) return x % bound;
  }
}

BigInt CounterRng::below(const BigInt& bound) {
  if (bound.fits_ulong_p()) return BigInt(below(static_cast<std::uint64_t>(bound.get_ui())));
  const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  const std::size_t words = (bits + 63) / 64;
  const unsigned top_bits = static_cast<unsigned>(bits - (words - 1) * 64);
  const std::uint64_t top_mask = top_bits == 64 ? ~0ULL : ((1ULL << top_bits) - 1);
  std::vector<std::uint64_t> limbs(words);
  BigInt candidate;
  for (;;) {
    // Most significant word first.
    for (std::size_t k = 0; k < words; ++k) limbs[k] = next();
    limbs[0] &= top_mask;
    mpz_import(candidate.get_mpz_t(), words, 1, sizeof(std::uint64_t), 0, 0, limbs.data());
    if (candidate < bound) return candidate;
  }
}

bool CounterRng::bernoulli(const BigInt& num, const BigInt& den) {
  if (num <= 0) return false;
  if (num >= den) return true;
  return below(den) < num;
}

double CounterRng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

}  // namespace robinhood
