#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robinhood/analysis.hpp"
#include "robinhood/bigint.hpp"
#include "robinhood/schedule.hpp"
#include "robinhood/schedule_json.hpp"

namespace robinhood {

inline constexpr std::int64_t kDefaultConstructionSteps = 12;
inline constexpr const char* kSeparationDeviation = "r=max(i+1,Ltilde_c)";

struct SeparationRecord {
  std::int64_t i = 0;
  BigInt r;
  BigInt very_old_c;                  // L~ under memory c
  std::optional<BigInt> very_old_b;   // L~ under memory b, when s reaches far enough
};

// Schedules (r, s) on which Oldest_RND surely wins with memory c = b + 1 and
// almost surely loses with memory b.
struct SeparationInstance {
  FunctionSpec memory_b;
  FunctionSpec memory_c;
  std::int64_t steps = 0;
  std::vector<BigInt> r_table;  // r(1..steps)
  std::vector<BigInt> s_table;  // s(1..(steps+1) - c(steps+1))
  std::vector<SeparationRecord> certificates;

  ScheduleSpec schedule_under_b() const;
  ScheduleSpec schedule_under_c() const;
};

// c(i) = min(b(i) + 1, i), expressed in the same spec family as b.
FunctionSpec successor_memory(const FunctionSpec& memory_b);

// Step i defines r(i) = max(i + 1, L~_c(i)) from the values so far, then sets
// s(j) = r(i)^3 for j = i - c(i) + 1 .. (i + 1) - c(i + 1).
SeparationInstance separating_instance(const FunctionSpec& memory_b, std::int64_t steps,
                                       std::size_t digit_budget = kDefaultDigitBudget);

struct SeparationReport {
  // First index where c forgets something; the inequalities below hold from here on.
  std::int64_t bound_region_start = 1;
  std::int64_t indices_checked = 0;
  Verdict under_c;
  Verdict under_b;
};

// Re-derives every certificate from the raw tables through GameInstance and
// checks the construction's inequalities. Throws ValidityViolated when some
// r(i) >= s(i), VerificationFailed for any other broken inequality.
SeparationReport verify_separation(const SeparationInstance& instance,
                                   std::size_t digit_budget = kDefaultDigitBudget);

// {"deviation": ..., "per_index": [{"i", "r", "Ltilde_c", "Ltilde_b", "term_b"}, ...]}
Json certificate_json(const SeparationInstance& instance);
Json to_json(const SeparationReport& report);

}  // namespace robinhood
