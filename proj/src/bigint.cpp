#include "robinhood/bigint.hpp"

#include <cmath>
#include <limits>

#include "robinhood/errors.hpp"

namespace robinhood {

std::string to_decimal(const BigInt& value) { return value.get_str(10); }

std::string to_fraction(const Rational& value) {
  return value.get_num().get_str(10) + "/" + value.get_den().get_str(10);
}

std::optional<BigInt> parse_decimal(std::string_view text) {
  std::string_view digits = text;
  if (!digits.empty() && digits.front() == '-') digits.remove_prefix(1);
  if (digits.empty()) return std::nullopt;
  for (char ch : digits) {
    if (ch < '0' || ch > '9') return std::nullopt;
  }
  BigInt out;
  if (out.set_str(std::string(text), 10) != 0) return std::nullopt;
  return out;
}

std::optional<Rational> parse_fraction(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    auto num = parse_decimal(text);
    if (!num) return std::nullopt;
    return Rational(*num);
  }
  auto num = parse_decimal(text.substr(0, slash));
  auto den = parse_decimal(text.substr(slash + 1));
  if (!num || !den || *den == 0) return std::nullopt;
  Rational out(*num, *den);
  out.canonicalize();
  return out;
}

std::size_t decimal_digits(const BigInt& value) {
  return mpz_sizeinbase(value.get_mpz_t(), 10);
}

void check_digit_budget(const BigInt& value, std::size_t budget, std::string_view what) {
  auto digits = decimal_digits(value);
  if (digits > budget) {
    throw Error(ErrorKind::LimitExceeded, std::string(what) + " needs " + std::to_string(digits) +
                                              " digits, budget is " + std::to_string(budget));
  }
}

double log_of(const BigInt& value) {
  if (value <= 0) return -std::numeric_limits<double>::infinity();
  long exponent = 0;
  double mantissa = mpz_get_d_2exp(&exponent, value.get_mpz_t());
  return std::log(mantissa) + static_cast<double>(exponent) * std::log(2.0);
}

double ratio_to_double(const BigInt& num, const BigInt& den) {
  if (num == 0) return 0.0;
  long num_exp = 0;
  long den_exp = 0;
  double num_m = mpz_get_d_2exp(&num_exp, num.get_mpz_t());
  double den_m = mpz_get_d_2exp(&den_exp, den.get_mpz_t());
  long shift = num_exp - den_exp;
  if (shift < std::numeric_limits<int>::min()) return 0.0;
  if (shift > std::numeric_limits<int>::max()) return std::numeric_limits<double>::infinity();
  return std::ldexp(num_m / den_m, static_cast<int>(shift));
}

static_assert(sizeof(long) == sizeof(std::int64_t), "GMP's long interface is used for 64-bit values");

BigInt make_bigint(std::int64_t value) { return BigInt(static_cast<long>(value)); }

std::int64_t to_int64(const BigInt& value, std::string_view what) {
  if (!mpz_fits_slong_p(value.get_mpz_t())) {
    throw Error(ErrorKind::SpecInvalid, std::string(what) + " does not fit in 64 bits");
  }
  return static_cast<std::int64_t>(value.get_si());
}

}  // namespace robinhood
