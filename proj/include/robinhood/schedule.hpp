#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "robinhood/bigint.hpp"

namespace robinhood {

struct FunctionSpec;

namespace fn {

struct Constant {
  std::int64_t value = 0;
};

// value(i) = a * i + c
struct Affine {
  std::int64_t a = 0;
  std::int64_t c = 0;
};

// values[0] is f(1); `tail` is evaluated at the original index past the table.
struct Table {
  std::vector<std::int64_t> values;
  std::shared_ptr<const FunctionSpec> tail;
};

// Finite table with a hard horizon; never extrapolated.
struct Generated {
  std::vector<BigInt> values;
};

}  // namespace fn

// Declarative description of one of the schedule functions r, s, b on days 1, 2, ...
struct FunctionSpec {
  std::variant<fn::Constant, fn::Affine, fn::Table, fn::Generated> form;

  static FunctionSpec constant(std::int64_t value);
  static FunctionSpec affine(std::int64_t a, std::int64_t c);
  static FunctionSpec table(std::vector<std::int64_t> values, FunctionSpec tail);
  static FunctionSpec generated(std::vector<BigInt> values);

  // Throws IndexBeyondHorizon past a generated table, SpecInvalid for i < 1.
  BigInt at(std::int64_t i) const;

  // Last index with a defined value, or nullopt when defined everywhere.
  std::optional<std::int64_t> hard_horizon() const;

  // Number of leading explicitly tabulated values before the eventual form.
  std::int64_t prefix_length() const;

  // The form the function takes for all large i, when it is constant or affine.
  std::optional<fn::Affine> eventual_affine() const;
  std::optional<std::int64_t> eventual_constant() const;

  friend bool operator==(const FunctionSpec& lhs, const FunctionSpec& rhs);
};

// Metadata attached to schedules produced by the memory-separation constructor.
struct SeparationProvenance {
  FunctionSpec memory_b;
  FunctionSpec memory_c;
  std::int64_t steps = 0;
  std::string deviation;

  friend bool operator==(const SeparationProvenance&, const SeparationProvenance&) = default;
};

struct ScheduleSpec {
  FunctionSpec r;  // bags removed on night i
  FunctionSpec s;  // bags added on day i
  FunctionSpec b;  // memory bound on night i, clamped to [0, i]
  std::optional<SeparationProvenance> construction;

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

struct NightValues {
  BigInt r;
  BigInt s;
  std::int64_t b = 0;
};

struct ValidityViolation {
  std::int64_t index = 0;
  std::string reason;
};

// Validated schedule with eagerly cached prefix sums. Immutable after
// construction, so it can be shared read-only between threads.
//
// Values are cached on [1, horizon] intersected with each function's hard
// horizon. horizon_cap() is the largest index where all of r, s and b are
// defined; very_old_level() may reach further when the tables allow it.
class GameInstance {
 public:
  GameInstance(ScheduleSpec spec, std::int64_t horizon,
               std::size_t digit_budget = kDefaultDigitBudget);

  const ScheduleSpec& spec() const noexcept { return spec_; }
  std::int64_t horizon_cap() const noexcept { return horizon_cap_; }
  std::int64_t r_cap() const noexcept { return static_cast<std::int64_t>(r_.size()); }
  std::int64_t s_cap() const noexcept { return static_cast<std::int64_t>(s_.size()); }
  std::int64_t b_cap() const noexcept { return static_cast<std::int64_t>(b_.size()); }
  std::size_t digit_budget() const noexcept { return digit_budget_; }

  bool valid() const noexcept { return !violation_; }
  const std::optional<ValidityViolation>& violation() const noexcept { return violation_; }

  NightValues evaluate(std::int64_t i) const;

  // L(i), bags in the cave after night i; L(0) = 0.
  BigInt cave_level(std::int64_t i) const;
  // L~(i), bags from days 1..i-b(i) not yet removed before night i, clamped at 0.
  BigInt very_old_level(std::int64_t i) const;
  // Same sum without the clamp.
  BigInt very_old_raw(std::int64_t i) const;

  // Unchecked-validity accessors; still bounds checked.
  const BigInt& r(std::int64_t i) const;
  const BigInt& s(std::int64_t i) const;
  std::int64_t b(std::int64_t i) const;
  // i - b(i): the last day whose bags are very old on night i.
  std::int64_t forgotten_through(std::int64_t i) const { return i - b(i); }

  const BigInt& arrived_through(std::int64_t day) const;  // sum of s(1..day)
  const BigInt& removed_through(std::int64_t night) const;  // sum of r(1..night)

  // True when very_old_level(i) can be evaluated.
  bool very_old_defined(std::int64_t i) const;

 private:
  void require_valid() const;

  ScheduleSpec spec_;
  std::size_t digit_budget_;
  std::vector<BigInt> r_;
  std::vector<BigInt> s_;
  std::vector<std::int64_t> b_;
  std::vector<BigInt> arrived_;  // arrived_[k] = s(1) + ... + s(k)
  std::vector<BigInt> removed_;
  std::int64_t horizon_cap_ = 0;
  std::optional<ValidityViolation> violation_;
};

struct RestrictionReport {
  std::int64_t horizon = 0;
  bool validity_ok = true;
  std::optional<ValidityViolation> first_invalid;
  bool restriction1_ok = true;
  // First i with b(i+1) > b(i) + 1.
  std::optional<std::int64_t> restriction1_first_violation;
  // Largest i <= horizon with L~(i) <= r(i).
  std::optional<std::int64_t> restriction2_last_violation;
  std::int64_t max_forgotten_through = 0;
  bool forgotten_through_grew = false;
};

RestrictionReport check_restrictions(const GameInstance& instance, std::int64_t horizon);

// First i in [1, through) with b(i+1) > b(i) + 1 for the clamped memory function.
std::optional<std::int64_t> first_restriction1_violation(const FunctionSpec& memory,
                                                         std::int64_t through);

// Clamped memory value min(max(spec(i), 0), i); negative spec values are
// reported by validation, not here.
std::int64_t clamped_memory(const FunctionSpec& memory, std::int64_t i);

}  // namespace robinhood
