#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace robinhood {

using BigInt = mpz_class;
using Rational = mpq_class;

inline constexpr std::size_t kDefaultDigitBudget = 1'000'000;

std::string to_decimal(const BigInt& value);
// "num/den" in lowest terms; integers keep the "/1" so the format is fixed.
std::string to_fraction(const Rational& value);

// Accepts an optional leading '-' followed by decimal digits only.
std::optional<BigInt> parse_decimal(std::string_view text);
std::optional<Rational> parse_fraction(std::string_view text);

// Upper bound on the decimal digit count (GMP may overestimate by one).
std::size_t decimal_digits(const BigInt& value);

// Throws LimitExceeded when `value` needs more than `budget` decimal digits.
void check_digit_budget(const BigInt& value, std::size_t budget, std::string_view what);

// Natural logarithm of a positive integer of any size.
double log_of(const BigInt& value);

// num/den as a double without overflowing either operand; tiny ratios flush to 0.
double ratio_to_double(const BigInt& num, const BigInt& den);

BigInt make_bigint(std::int64_t value);
// Throws SpecInvalid if the value does not fit.
std::int64_t to_int64(const BigInt& value, std::string_view what);

}  // namespace robinhood
