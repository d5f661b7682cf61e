#include "robinhood/schedule.hpp"

#include <algorithm>

#include "robinhood/errors.hpp"

namespace robinhood {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string at_index(std::int64_t i) { return " at i=" + std::to_string(i); }

}  // namespace

FunctionSpec FunctionSpec::constant(std::int64_t value) { return {fn::Constant{value}}; }

FunctionSpec FunctionSpec::affine(std::int64_t a, std::int64_t c) { return {fn::Affine{a, c}}; }

FunctionSpec FunctionSpec::table(std::vector<std::int64_t> values, FunctionSpec tail) {
  return {fn::Table{std::move(values), std::make_shared<const FunctionSpec>(std::move(tail))}};
}

FunctionSpec FunctionSpec::generated(std::vector<BigInt> values) {
  return {fn::Generated{std::move(values)}};
}

BigInt FunctionSpec::at(std::int64_t i) const {
  if (i < 1) throw Error(ErrorKind::SpecInvalid, "functions are defined for i >= 1" + at_index(i));
  return std::visit(
      overloaded{
          [](const fn::Constant& f) -> BigInt { return make_bigint(f.value); },
          [i](const fn::Affine& f) -> BigInt { return make_bigint(f.a) * make_bigint(i) + make_bigint(f.c); },
          [i](const fn::Table& f) -> BigInt {
            if (i <= static_cast<std::int64_t>(f.values.size())) {
              return make_bigint(f.values[static_cast<std::size_t>(i - 1)]);
            }
            return f.tail->at(i);
          },
          [i](const fn::Generated& f) -> BigInt {
            if (i > static_cast<std::int64_t>(f.values.size())) {
              throw Error(ErrorKind::IndexBeyondHorizon,
                          "generated table has " + std::to_string(f.values.size()) +
                              " entries" + at_index(i));
            }
            return f.values[static_cast<std::size_t>(i - 1)];
          },
      },
      form);
}

std::optional<std::int64_t> FunctionSpec::hard_horizon() const {
  return std::visit(overloaded{
                        [](const fn::Constant&) -> std::optional<std::int64_t> { return std::nullopt; },
                        [](const fn::Affine&) -> std::optional<std::int64_t> { return std::nullopt; },
                        [](const fn::Table& f) -> std::optional<std::int64_t> {
                          auto tail = f.tail->hard_horizon();
                          if (!tail) return std::nullopt;
                          return std::max<std::int64_t>(*tail, static_cast<std::int64_t>(f.values.size()));
                        },
                        [](const fn::Generated& f) -> std::optional<std::int64_t> {
                          return static_cast<std::int64_t>(f.values.size());
                        },
                    },
                    form);
}

std::int64_t FunctionSpec::prefix_length() const {
  if (const auto* t = std::get_if<fn::Table>(&form)) {
    return std::max<std::int64_t>(static_cast<std::int64_t>(t->values.size()), t->tail->prefix_length());
  }
  if (const auto* g = std::get_if<fn::Generated>(&form)) return static_cast<std::int64_t>(g->values.size());
  return 0;
}

std::optional<fn::Affine> FunctionSpec::eventual_affine() const {
  return std::visit(overloaded{
                        [](const fn::Constant& f) -> std::optional<fn::Affine> { return fn::Affine{0, f.value}; },
                        [](const fn::Affine& f) -> std::optional<fn::Affine> { return f; },
                        [](const fn::Table& f) -> std::optional<fn::Affine> { return f.tail->eventual_affine(); },
                        [](const fn::Generated&) -> std::optional<fn::Affine> { return std::nullopt; },
                    },
                    form);
}

std::optional<std::int64_t> FunctionSpec::eventual_constant() const {
  auto tail = eventual_affine();
  if (!tail || tail->a != 0) return std::nullopt;
  return tail->c;
}

bool operator==(const FunctionSpec& lhs, const FunctionSpec& rhs) {
  if (lhs.form.index() != rhs.form.index()) return false;
  return std::visit(
      overloaded{
          [&](const fn::Constant& f) { return f.value == std::get<fn::Constant>(rhs.form).value; },
          [&](const fn::Affine& f) {
            const auto& g = std::get<fn::Affine>(rhs.form);
            return f.a == g.a && f.c == g.c;
          },
          [&](const fn::Table& f) {
            const auto& g = std::get<fn::Table>(rhs.form);
            return f.values == g.values && *f.tail == *g.tail;
          },
          [&](const fn::Generated& f) { return f.values == std::get<fn::Generated>(rhs.form).values; },
      },
      lhs.form);
}

std::int64_t clamped_memory(const FunctionSpec& memory, std::int64_t i) {
  BigInt raw = memory.at(i);
  if (raw < 0) return 0;
  if (raw >= i) return i;
  return raw.get_si();
}

std::optional<std::int64_t> first_restriction1_violation(const FunctionSpec& memory,
                                                         std::int64_t through) {
  if (through < 2) return std::nullopt;
  std::int64_t prev = clamped_memory(memory, 1);
  for (std::int64_t i = 1; i < through; ++i) {
    std::int64_t next = clamped_memory(memory, i + 1);
    if (next > prev + 1) return i;
    prev = next;
  }
  return std::nullopt;
}

GameInstance::GameInstance(ScheduleSpec spec, std::int64_t horizon, std::size_t digit_budget)
    : spec_(std::move(spec)), digit_budget_(digit_budget) {
  if (horizon < 0) throw Error(ErrorKind::SpecInvalid, "horizon must be nonnegative");
  auto cap_of = [horizon](const FunctionSpec& f) {
    auto hard = f.hard_horizon();
    return hard ? std::min(*hard, horizon) : horizon;
  };
  const std::int64_t r_cap = cap_of(spec_.r);
  const std::int64_t s_cap = cap_of(spec_.s);
  const std::int64_t b_cap = cap_of(spec_.b);
  horizon_cap_ = std::min({r_cap, s_cap, b_cap});

  auto note = [this](std::int64_t i, std::string reason) {
    if (!violation_ || i < violation_->index) violation_ = ValidityViolation{i, std::move(reason)};
  };

  r_.reserve(static_cast<std::size_t>(r_cap));
  removed_.reserve(static_cast<std::size_t>(r_cap) + 1);
  removed_.emplace_back(0);
  for (std::int64_t i = 1; i <= r_cap; ++i) {
    BigInt v = spec_.r.at(i);
    check_digit_budget(v, digit_budget_, "r(" + std::to_string(i) + ")");
    if (v < 1) note(i, "r(i) < 1");
    removed_.push_back(removed_.back() + v);
    r_.push_back(std::move(v));
  }

  s_.reserve(static_cast<std::size_t>(s_cap));
  arrived_.reserve(static_cast<std::size_t>(s_cap) + 1);
  arrived_.emplace_back(0);
  for (std::int64_t i = 1; i <= s_cap; ++i) {
    BigInt v = spec_.s.at(i);
    check_digit_budget(v, digit_budget_, "s(" + std::to_string(i) + ")");
    if (v < 0) note(i, "s(i) < 0");
    arrived_.push_back(arrived_.back() + v);
    s_.push_back(std::move(v));
  }
  check_digit_budget(arrived_.back(), digit_budget_, "cumulative arrivals");

  b_.reserve(static_cast<std::size_t>(b_cap));
  for (std::int64_t i = 1; i <= b_cap; ++i) {
    if (spec_.b.at(i) < 0) note(i, "b(i) < 0");
    b_.push_back(clamped_memory(spec_.b, i));
  }

  for (std::int64_t i = 1; i <= horizon_cap_; ++i) {
    if (r_[static_cast<std::size_t>(i - 1)] >= s_[static_cast<std::size_t>(i - 1)]) {
      note(i, "r(i) >= s(i)");
      break;
    }
  }
}

void GameInstance::require_valid() const {
  if (violation_) {
    throw Error(ErrorKind::SpecInvalid, violation_->reason + at_index(violation_->index));
  }
}

const BigInt& GameInstance::r(std::int64_t i) const {
  if (i < 1 || i > r_cap()) throw Error(ErrorKind::IndexBeyondHorizon, "r" + at_index(i));
  return r_[static_cast<std::size_t>(i - 1)];
}

const BigInt& GameInstance::s(std::int64_t i) const {
  if (i < 1 || i > s_cap()) throw Error(ErrorKind::IndexBeyondHorizon, "s" + at_index(i));
  return s_[static_cast<std::size_t>(i - 1)];
}

std::int64_t GameInstance::b(std::int64_t i) const {
  if (i < 1 || i > b_cap()) throw Error(ErrorKind::IndexBeyondHorizon, "b" + at_index(i));
  return b_[static_cast<std::size_t>(i - 1)];
}

const BigInt& GameInstance::arrived_through(std::int64_t day) const {
  if (day < 0 || day > s_cap()) throw Error(ErrorKind::IndexBeyondHorizon, "arrivals" + at_index(day));
  return arrived_[static_cast<std::size_t>(day)];
}

const BigInt& GameInstance::removed_through(std::int64_t night) const {
  if (night < 0 || night > r_cap()) throw Error(ErrorKind::IndexBeyondHorizon, "removals" + at_index(night));
  return removed_[static_cast<std::size_t>(night)];
}

NightValues GameInstance::evaluate(std::int64_t i) const {
  require_valid();
  if (i < 1 || i > horizon_cap_) throw Error(ErrorKind::IndexBeyondHorizon, "evaluate" + at_index(i));
  return {r(i), s(i), b(i)};
}

BigInt GameInstance::cave_level(std::int64_t i) const {
  require_valid();
  if (i < 0 || i > horizon_cap_) throw Error(ErrorKind::IndexBeyondHorizon, "cave level" + at_index(i));
  return arrived_through(i) - removed_through(i);
}

bool GameInstance::very_old_defined(std::int64_t i) const {
  return i >= 1 && i <= b_cap() && i - 1 <= r_cap() && forgotten_through(i) <= s_cap();
}

BigInt GameInstance::very_old_raw(std::int64_t i) const {
  if (!very_old_defined(i)) throw Error(ErrorKind::IndexBeyondHorizon, "very old level" + at_index(i));
  return arrived_through(forgotten_through(i)) - removed_through(i - 1);
}

BigInt GameInstance::very_old_level(std::int64_t i) const {
  require_valid();
  BigInt raw = very_old_raw(i);
  if (raw < 0) return 0;
  return raw;
}

RestrictionReport check_restrictions(const GameInstance& instance, std::int64_t horizon) {
  if (horizon < 1 || horizon > instance.horizon_cap()) {
    throw Error(ErrorKind::IndexBeyondHorizon,
                "restriction horizon " + std::to_string(horizon) + " exceeds cap " +
                    std::to_string(instance.horizon_cap()));
  }
  RestrictionReport report;
  report.horizon = horizon;
  if (const auto& v = instance.violation(); v && v->index <= horizon) {
    report.validity_ok = false;
    report.first_invalid = v;
  }

  for (std::int64_t i = 1; i < horizon; ++i) {
    if (instance.b(i + 1) > instance.b(i) + 1) {
      report.restriction1_ok = false;
      report.restriction1_first_violation = i;
      break;
    }
  }

  for (std::int64_t i = horizon; i >= 1; --i) {
    BigInt level = instance.very_old_raw(i);
    if (level < 0) level = 0;
    if (level <= instance.r(i)) {
      report.restriction2_last_violation = i;
      break;
    }
  }

  std::int64_t mid = (horizon + 1) / 2;
  for (std::int64_t i = 1; i <= horizon; ++i) {
    report.max_forgotten_through = std::max(report.max_forgotten_through, instance.forgotten_through(i));
  }
  std::int64_t early = 0;
  for (std::int64_t i = 1; i <= mid; ++i) early = std::max(early, instance.forgotten_through(i));
  report.forgotten_through_grew = report.max_forgotten_through > early;
  return report;
}

}  // namespace robinhood
