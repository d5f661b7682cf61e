#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "robinhood/bigint.hpp"
#include "robinhood/schedule.hpp"
#include "robinhood/schedule_json.hpp"

namespace robinhood {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct SeriesDiagnostics {
  std::int64_t horizon = 0;
  double partial_sum = 0.0;
  std::int64_t terms_counted = 0;
  std::optional<Rational> last_term;
  // log-log slope of term(i) between horizon/10 and horizon
  std::optional<double> decay_exponent;
};

enum class VerdictKind { RobinSurely, RobinAlmostSurely, SheriffAlmostSurely, Undetermined };

enum class VerdictRule { BoundedForgetting, VeryOldPoolCleared, SeriesDiverges, SeriesConverges, None };

std::string_view to_string(VerdictKind kind);
// "Prop1.1", "Prop1.2", "Thm2.1", "Thm2.2", "none"
std::string_view to_string(VerdictRule rule);

struct Verdict {
  VerdictKind kind = VerdictKind::Undetermined;
  VerdictRule rule = VerdictRule::None;
  Json certificate = Json::object();
  std::optional<SeriesDiagnostics> diagnostics;
};

enum class SurvivalMode { PaperProduct, ExactStrategy };
enum class NumberSpace { Rational, Log };

struct SurvivalResult {
  std::int64_t day = 1;
  std::int64_t horizon = 0;
  SurvivalMode mode = SurvivalMode::PaperProduct;
  NumberSpace space = NumberSpace::Rational;
  std::optional<Rational> exact;  // set in the rational space
  double log_value = 0.0;         // natural log of the probability, both spaces

  double value() const;
};

// r(i) / L~(i), reduced. Throws TermUndefined when L~(i) = 0.
Rational series_term(const GameInstance& instance, std::int64_t i);

// Probability that a bag put in the cave on `day` is still there after night
// `horizon`.
//
// PaperProduct multiplies (1 - r(i)/L~(i)) over i = day..horizon and requires
// L~(i) > r(i) on that range. ExactStrategy is the true probability under
// Oldest_RND: cell sizes of the oldest-first partition are deterministic, so the
// bag's survival factor on each night is (v - k)/v for its cell size v and the
// k bags taken from that cell.
SurvivalResult survival_probability(const GameInstance& instance, std::int64_t day,
                                    std::int64_t horizon, SurvivalMode mode, NumberSpace space);

// Entry k is survival_probability(instance, day, day - 1 + k, ...), computed in one pass.
std::vector<SurvivalResult> survival_curve(const GameInstance& instance, std::int64_t day,
                                           std::int64_t horizon, SurvivalMode mode,
                                           NumberSpace space);

SeriesDiagnostics series_diagnostics(const GameInstance& instance, std::int64_t horizon);

// Certificate-based classification; never inferred from partial sums.
Verdict classify(const GameInstance& instance, std::int64_t horizon);

// Largest value of i - b(i) when the memory function provably keeps it
// bounded (eventually affine with slope >= 1).
std::optional<std::int64_t> bounded_forgetting(const FunctionSpec& memory);

Json to_json(const SeriesDiagnostics& diagnostics);
Json to_json(const Verdict& verdict);
Json to_json(const SurvivalResult& result);

}  // namespace robinhood
