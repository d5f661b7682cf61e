#include "robinhood/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <sstream>

#include "robinhood/errors.hpp"

namespace robinhood {

namespace {

std::string decimal_string(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

// Bag counts of the oldest-first partition, replayed without any randomness:
// the count taken from each cell on each night does not depend on which bags
// are chosen.
class CellCountReplay {
 public:
  explicit CellCountReplay(const GameInstance& instance) : instance_(instance) {}

  void day(std::int64_t i) {
    window_.push_back({i, instance_.s(i)});
    const std::int64_t boundary = instance_.forgotten_through(i);
    if (boundary < last_boundary_) {
      throw Error(ErrorKind::RestrictionViolated,
                  "i - b(i) decreases at i=" + std::to_string(i) + "; forgotten days cannot be recalled");
    }
    last_boundary_ = boundary;
    while (!window_.empty() && window_.front().day <= boundary) {
      pool_ += window_.front().count;
      window_.pop_front();
    }
  }

  // Size of the cell holding bags of `arrival` before night i and the number
  // of bags the night removes from it.
  struct CellTake {
    BigInt size;
    BigInt taken;
  };

  CellTake night(std::int64_t i, std::int64_t arrival) {
    BigInt remaining = instance_.r(i);
    CellTake tracked;
    const bool in_pool = arrival <= last_boundary_;
    auto take = [&](BigInt& cell, bool is_tracked) {
      BigInt k = remaining < cell ? remaining : cell;
      if (is_tracked) tracked = {cell, k};
      cell -= k;
      remaining -= k;
    };
    take(pool_, in_pool);
    for (auto& cell : window_) {
      if (remaining == 0 && (in_pool || cell.day != arrival)) continue;
      take(cell.count, !in_pool && cell.day == arrival);
    }
    return tracked;
  }

 private:
  struct Cell {
    std::int64_t day;
    BigInt count;
  };

  const GameInstance& instance_;
  BigInt pool_ = 0;
  std::deque<Cell> window_;
  std::int64_t last_boundary_ = 0;
};

class SurvivalAccumulator {
 public:
  SurvivalAccumulator(std::int64_t day, SurvivalMode mode, NumberSpace space)
      : day_(day), mode_(mode), space_(space) {}

  void multiply(const BigInt& kept, const BigInt& total) {
    if (space_ == NumberSpace::Rational) {
      if (product_ != 0) {
        Rational factor(kept, total);
        factor.canonicalize();
        product_ *= factor;
      }
    } else {
      if (kept == 0) {
        zero_ = true;
      } else {
        log_sum_.add(std::log1p(-ratio_to_double(total - kept, total)));
      }
    }
  }

  SurvivalResult result(std::int64_t horizon) const {
    SurvivalResult out;
    out.day = day_;
    out.horizon = horizon;
    out.mode = mode_;
    out.space = space_;
    if (space_ == NumberSpace::Rational) {
      out.exact = product_;
      out.log_value = product_ == 0 ? -std::numeric_limits<double>::infinity()
                                    : log_of(product_.get_num()) - log_of(product_.get_den());
    } else {
      out.log_value = zero_ ? -std::numeric_limits<double>::infinity() : log_sum_.value();
    }
    return out;
  }

 private:
  std::int64_t day_;
  SurvivalMode mode_;
  NumberSpace space_;
  Rational product_ = 1;
  CompensatedSum log_sum_;
  bool zero_ = false;
};

}  // namespace

void CompensatedSum::add(double x) {
  double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x)) {
    compensation_ += (sum_ - t) + x;
  } else {
    compensation_ += (x - t) + sum_;
  }
  sum_ = t;
}

std::string_view to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::RobinSurely: return "RobinSurely";
    case VerdictKind::RobinAlmostSurely: return "RobinAlmostSurely";
    case VerdictKind::SheriffAlmostSurely: return "SheriffAlmostSurely";
    case VerdictKind::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

std::string_view to_string(VerdictRule rule) {
  switch (rule) {
    case VerdictRule::BoundedForgetting: return "Prop1.1";
    case VerdictRule::VeryOldPoolCleared: return "Prop1.2";
    case VerdictRule::SeriesDiverges: return "Thm2.1";
    case VerdictRule::SeriesConverges: return "Thm2.2";
    case VerdictRule::None: return "none";
  }
  return "none";
}

double SurvivalResult::value() const {
  if (exact) return exact->get_d();
  return std::exp(log_value);
}

Rational series_term(const GameInstance& instance, std::int64_t i) {
  BigInt level = instance.very_old_level(i);
  if (level == 0) {
    throw Error(ErrorKind::TermUndefined, "L~(" + std::to_string(i) + ") = 0");
  }
  Rational term(instance.r(i), level);
  term.canonicalize();
  return term;
}

std::vector<SurvivalResult> survival_curve(const GameInstance& instance, std::int64_t day,
                                           std::int64_t horizon, SurvivalMode mode,
                                           NumberSpace space) {
  if (!instance.valid()) {
    throw Error(ErrorKind::SpecInvalid, instance.violation()->reason + " at i=" +
                                            std::to_string(instance.violation()->index));
  }
  if (day < 1) throw Error(ErrorKind::SpecInvalid, "day must be >= 1");
  if (horizon < day - 1) throw Error(ErrorKind::SpecInvalid, "horizon must be >= day - 1");
  if (horizon > instance.horizon_cap()) {
    throw Error(ErrorKind::IndexBeyondHorizon, "survival horizon " + std::to_string(horizon) +
                                                   " exceeds cap " + std::to_string(instance.horizon_cap()));
  }

  std::vector<SurvivalResult> curve;
  curve.reserve(static_cast<std::size_t>(horizon - day + 2));
  SurvivalAccumulator acc(day, mode, space);
  curve.push_back(acc.result(day - 1));

  if (mode == SurvivalMode::PaperProduct) {
    for (std::int64_t i = day; i <= horizon; ++i) {
      BigInt level = instance.very_old_level(i);
      const BigInt& r = instance.r(i);
      if (level <= r) {
        throw Error(ErrorKind::RestrictionViolated,
                    "L~(" + std::to_string(i) + ") <= r(" + std::to_string(i) + ")");
      }
      acc.multiply(level - r, level);
      curve.push_back(acc.result(i));
    }
    return curve;
  }

  CellCountReplay replay(instance);
  for (std::int64_t i = 1; i <= horizon; ++i) {
    replay.day(i);
    auto cell = replay.night(i, day);
    if (i < day) continue;
    if (cell.size > 0) acc.multiply(cell.size - cell.taken, cell.size);
    curve.push_back(acc.result(i));
  }
  return curve;
}

SurvivalResult survival_probability(const GameInstance& instance, std::int64_t day,
                                    std::int64_t horizon, SurvivalMode mode, NumberSpace space) {
  return survival_curve(instance, day, horizon, mode, space).back();
}

SeriesDiagnostics series_diagnostics(const GameInstance& instance, std::int64_t horizon) {
  SeriesDiagnostics out;
  out.horizon = horizon;
  CompensatedSum sum;
  auto log_term = [&](std::int64_t i) -> std::optional<double> {
    if (!instance.very_old_defined(i) || i > instance.r_cap()) return std::nullopt;
    BigInt level = instance.very_old_level(i);
    if (level == 0) return std::nullopt;
    return log_of(instance.r(i)) - log_of(level);
  };
  for (std::int64_t i = 1; i <= horizon; ++i) {
    if (!instance.very_old_defined(i) || i > instance.r_cap()) break;
    BigInt level = instance.very_old_level(i);
    if (level == 0) continue;
    sum.add(ratio_to_double(instance.r(i), level));
    ++out.terms_counted;
    if (i == horizon) out.last_term = series_term(instance, i);
  }
  out.partial_sum = sum.value();
  if (horizon >= 10) {
    const std::int64_t lo = horizon / 10;
    auto a = log_term(lo);
    auto b = log_term(horizon);
    if (a && b) {
      out.decay_exponent = (*b - *a) / (std::log(static_cast<double>(horizon)) - std::log(static_cast<double>(lo)));
    }
  }
  return out;
}

std::optional<std::int64_t> bounded_forgetting(const FunctionSpec& memory) {
  auto tail = memory.eventual_affine();
  if (!tail || tail->a < 1) return std::nullopt;
  // Past `last`, a*i + c >= i + c >= 0 and i - b(i) = max(0, (1 - a) i - c) is nonincreasing.
  constexpr std::int64_t kScanLimit = 10'000'000;
  const std::int64_t negative_offset = tail->c < 0 ? -tail->c : 0;
  if (negative_offset > kScanLimit || memory.prefix_length() > kScanLimit) return std::nullopt;
  const std::int64_t last = memory.prefix_length() + negative_offset + 1;
  std::int64_t bound = 0;
  for (std::int64_t i = 1; i <= last; ++i) bound = std::max(bound, i - clamped_memory(memory, i));
  return bound;
}

namespace {

BigInt sum_through(const FunctionSpec& f, std::int64_t n) {
  BigInt total = 0;
  for (std::int64_t j = 1; j <= n; ++j) total += f.at(j);
  return total;
}

std::optional<Verdict> try_bounded_forgetting(const GameInstance& instance) {
  auto bound = bounded_forgetting(instance.spec().b);
  if (!bound) return std::nullopt;
  Verdict v{VerdictKind::RobinSurely, VerdictRule::BoundedForgetting,
            {{"sup_i_minus_b", *bound}}, std::nullopt};
  return v;
}

std::optional<Verdict> try_construction_under_c(const GameInstance& instance, std::int64_t horizon) {
  const auto& spec = instance.spec();
  if (!spec.construction || !(spec.b == spec.construction->memory_c)) return std::nullopt;
  Json witnesses = Json::array();
  for (std::int64_t i = 1; i <= horizon; ++i) {
    if (instance.very_old_level(i) > instance.r(i)) return std::nullopt;
    if (witnesses.size() < 20) witnesses.push_back(i);
  }
  Verdict v{VerdictKind::RobinSurely, VerdictRule::VeryOldPoolCleared,
            {{"construction", "separation"},
             {"checked_through", horizon},
             {"witness_every_index", true},
             {"first_witnesses", witnesses}},
            std::nullopt};
  return v;
}

std::optional<Verdict> try_eventually_constant(const GameInstance& instance) {
  const auto& spec = instance.spec();
  auto r = spec.r.eventual_constant();
  auto s = spec.s.eventual_constant();
  auto n = spec.b.eventual_constant();
  if (!r || !s || !n || *r < 1 || *s <= *r) return std::nullopt;
  const std::int64_t memory = std::max<std::int64_t>(*n, 0);
  const std::int64_t pr = spec.r.prefix_length();
  const std::int64_t ps = spec.s.prefix_length();
  const std::int64_t pb = spec.b.prefix_length();
  if (first_restriction1_violation(spec.b, std::max(pb, memory) + 2)) return std::nullopt;
  // The prefix tables must themselves be valid before the tail takes over.
  for (std::int64_t i = 1; i <= std::max(pr, ps); ++i) {
    BigInt ri = spec.r.at(i);
    if (ri < 1 || ri >= spec.s.at(i)) return std::nullopt;
  }

  // For i >= from, b(i) = memory, i - memory > ps and i - 1 >= pr, so
  // L~(i) = (S - R) i + intercept exactly.
  const std::int64_t from = std::max({pr, ps + memory, pb, memory}) + 1;
  const BigInt big_r = make_bigint(*r);
  const BigInt big_s = make_bigint(*s);
  BigInt intercept = sum_through(spec.s, ps) - big_s * (make_bigint(memory) + ps) -
                     sum_through(spec.r, pr) + big_r * (1 + make_bigint(pr));
  // term(i) >= R / (S i) once (S - R) i + intercept <= S i, i.e. intercept <= R i.
  BigInt compare_from = make_bigint(from);
  if (intercept > 0) {
    BigInt needed = intercept / big_r + 1;
    if (needed > compare_from) compare_from = needed;
  }
  Verdict v{VerdictKind::RobinAlmostSurely, VerdictRule::SeriesDiverges,
            {{"comparison", "harmonic"},
             {"slope", to_decimal(big_s - big_r)},
             {"intercept", to_decimal(intercept)},
             {"affine_from_index", from},
             {"r_eventual", *r},
             {"memory_eventual", memory},
             {"lower_bound", "term(i) >= " + std::to_string(*r) + "/(" + std::to_string(*s) + "*i)"},
             {"lower_bound_from_index", to_decimal(compare_from)}},
            std::nullopt};
  return v;
}

std::optional<Verdict> try_construction_under_b(const GameInstance& instance, std::int64_t horizon) {
  const auto& spec = instance.spec();
  if (!spec.construction || !(spec.b == spec.construction->memory_b)) return std::nullopt;
  const auto& c = spec.construction->memory_c;
  std::int64_t start = 1;
  while (start - clamped_memory(c, start) < 1) ++start;
  start = std::max<std::int64_t>(start, 2);
  for (std::int64_t i = start; i <= horizon; ++i) {
    BigInt level = instance.very_old_level(i);
    if (level == 0 || instance.r(i) * make_bigint(i) * make_bigint(i) > level) return std::nullopt;
  }
  Verdict v{VerdictKind::SheriffAlmostSurely, VerdictRule::SeriesConverges,
            {{"construction", "separation"},
             {"majorant", "1/i^2"},
             {"from_index", start},
             {"checked_through", horizon},
             {"tail_bound", "1/" + std::to_string(std::max<std::int64_t>(horizon, 1))}},
            std::nullopt};
  return v;
}

}  // namespace

Verdict classify(const GameInstance& instance, std::int64_t horizon) {
  if (!instance.valid()) {
    throw Error(ErrorKind::SpecInvalid, instance.violation()->reason + " at i=" +
                                            std::to_string(instance.violation()->index));
  }
  if (horizon < 1 || horizon > instance.horizon_cap()) {
    throw Error(ErrorKind::IndexBeyondHorizon, "classify horizon " + std::to_string(horizon) +
                                                   " exceeds cap " + std::to_string(instance.horizon_cap()));
  }
  if (auto v = try_bounded_forgetting(instance)) return *v;
  if (auto v = try_construction_under_c(instance, horizon)) return *v;
  if (auto v = try_eventually_constant(instance)) return *v;
  if (auto v = try_construction_under_b(instance, horizon)) return *v;
  Verdict undetermined;
  undetermined.diagnostics = series_diagnostics(instance, horizon);
  return undetermined;
}

Json to_json(const SeriesDiagnostics& d) {
  Json out{{"horizon", d.horizon},
           {"partial_sum", decimal_string(d.partial_sum)},
           {"terms_counted", d.terms_counted}};
  out["last_term"] = d.last_term ? Json(to_fraction(*d.last_term)) : Json(nullptr);
  out["decay_exponent"] = d.decay_exponent ? Json(decimal_string(*d.decay_exponent)) : Json(nullptr);
  return out;
}

Json to_json(const Verdict& verdict) {
  Json out{{"kind", to_string(verdict.kind)},
           {"rule", to_string(verdict.rule)},
           {"certificate", verdict.certificate}};
  if (verdict.diagnostics) out["diagnostics"] = to_json(*verdict.diagnostics);
  return out;
}

Json to_json(const SurvivalResult& result) {
  Json out{{"day", result.day},
           {"horizon", result.horizon},
           {"mode", result.mode == SurvivalMode::PaperProduct ? "paper" : "exact"},
           {"space", result.space == NumberSpace::Rational ? "rational" : "log"}};
  out["value"] = result.exact ? to_fraction(*result.exact) : decimal_string(result.value());
  out["log_value"] = std::isfinite(result.log_value) ? Json(decimal_string(result.log_value)) : Json("-inf");
  return out;
}

}  // namespace robinhood
