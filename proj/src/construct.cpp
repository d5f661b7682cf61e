#include "robinhood/construct.hpp"

#include <algorithm>

#include "robinhood/errors.hpp"

namespace robinhood {

namespace {

[[noreturn]] void fail_check(std::int64_t i, const std::string& what) {
  throw Error(ErrorKind::VerificationFailed, what + " at i=" + std::to_string(i));
}

}  // namespace

FunctionSpec successor_memory(const FunctionSpec& memory_b) {
  if (const auto* f = std::get_if<fn::Constant>(&memory_b.form)) return FunctionSpec::constant(f->value + 1);
  if (const auto* f = std::get_if<fn::Affine>(&memory_b.form)) return FunctionSpec::affine(f->a, f->c + 1);
  if (const auto* f = std::get_if<fn::Table>(&memory_b.form)) {
    std::vector<std::int64_t> values = f->values;
    for (auto& v : values) ++v;
    return FunctionSpec::table(std::move(values), successor_memory(*f->tail));
  }
  std::vector<BigInt> values = std::get<fn::Generated>(memory_b.form).values;
  for (auto& v : values) ++v;
  return FunctionSpec::generated(std::move(values));
}

ScheduleSpec SeparationInstance::schedule_under_b() const {
  ScheduleSpec spec{FunctionSpec::generated(r_table), FunctionSpec::generated(s_table), memory_b,
                    SeparationProvenance{memory_b, memory_c, steps, kSeparationDeviation}};
  return spec;
}

ScheduleSpec SeparationInstance::schedule_under_c() const {
  ScheduleSpec spec = schedule_under_b();
  spec.b = memory_c;
  return spec;
}

SeparationInstance separating_instance(const FunctionSpec& memory_b, std::int64_t steps,
                                       std::size_t digit_budget) {
  if (steps < 1) throw Error(ErrorKind::SpecInvalid, "steps must be >= 1");
  if (auto bad = first_restriction1_violation(memory_b, steps + 1)) {
    throw Error(ErrorKind::RestrictionViolated,
                "b(i+1) > b(i)+1 at i=" + std::to_string(*bad));
  }
  for (std::int64_t i = 1; i <= steps + 1; ++i) {
    if (memory_b.at(i) < 0) throw Error(ErrorKind::SpecInvalid, "b(i) < 0 at i=" + std::to_string(i));
  }

  SeparationInstance out;
  out.memory_b = memory_b;
  out.memory_c = successor_memory(memory_b);
  out.steps = steps;
  const auto& c = out.memory_c;

  std::vector<BigInt> arrived{0};  // arrived[k] = s(1) + ... + s(k)
  std::vector<BigInt> removed{0};
  for (std::int64_t i = 1; i <= steps; ++i) {
    const std::int64_t known = i - clamped_memory(c, i);
    BigInt level = arrived[static_cast<std::size_t>(known)] - removed.back();
    if (level < 0) level = 0;
    BigInt r = level > i + 1 ? level : BigInt(make_bigint(i + 1));
    check_digit_budget(r, digit_budget, "r(" + std::to_string(i) + ")");
    if (3 * decimal_digits(r) > digit_budget + 3) {
      throw Error(ErrorKind::LimitExceeded, "r(" + std::to_string(i) + ")^3 needs about " +
                                                std::to_string(3 * decimal_digits(r)) + " digits, budget is " +
                                                std::to_string(digit_budget));
    }
    const std::int64_t first = i - clamped_memory(c, i) + 1;
    const std::int64_t last = (i + 1) - clamped_memory(c, i + 1);
    if (first <= last) {
      BigInt cube = r * r * r;
      check_digit_budget(cube, digit_budget, "s = r(" + std::to_string(i) + ")^3");
      for (std::int64_t j = first; j <= last; ++j) {
        if (j != static_cast<std::int64_t>(out.s_table.size()) + 1) {
          throw Error(ErrorKind::RestrictionViolated, "s ranges are not consecutive at step " + std::to_string(i));
        }
        out.s_table.push_back(cube);
        arrived.push_back(arrived.back() + cube);
      }
    }
    out.certificates.push_back({i, r, level, std::nullopt});
    removed.push_back(removed.back() + r);
    out.r_table.push_back(std::move(r));
  }
  if (out.s_table.empty()) {
    throw Error(ErrorKind::RestrictionViolated,
                "i - c(i) never reaches 1 within " + std::to_string(steps) + " steps");
  }

  for (auto& record : out.certificates) {
    const std::int64_t i = record.i;
    const std::int64_t known = i - clamped_memory(memory_b, i);
    if (known > static_cast<std::int64_t>(out.s_table.size())) continue;
    BigInt level = arrived[static_cast<std::size_t>(known)] - removed[static_cast<std::size_t>(i - 1)];
    record.very_old_b = level < 0 ? BigInt(0) : level;
  }

  const std::size_t common = std::min(out.r_table.size(), out.s_table.size());
  for (std::size_t k = 0; k < common; ++k) {
    if (out.r_table[k] >= out.s_table[k]) {
      throw Error(ErrorKind::ValidityViolated, "r(i) >= s(i) at i=" + std::to_string(k + 1));
    }
  }
  return out;
}

SeparationReport verify_separation(const SeparationInstance& instance, std::size_t digit_budget) {
  const std::int64_t steps = instance.steps;
  if (static_cast<std::int64_t>(instance.r_table.size()) != steps ||
      instance.certificates.size() != instance.r_table.size()) {
    throw Error(ErrorKind::VerificationFailed, "tables do not match the step count");
  }
  const auto& b = instance.memory_b;
  const auto& c = instance.memory_c;
  if (!(c == successor_memory(b))) throw Error(ErrorKind::VerificationFailed, "memory c is not b + 1");

  // Each step writes s on a consecutive range; together they cover 1..(steps+1)-c(steps+1).
  const std::int64_t expected_s = (steps + 1) - clamped_memory(c, steps + 1);
  if (static_cast<std::int64_t>(instance.s_table.size()) != expected_s) {
    throw Error(ErrorKind::VerificationFailed, "s has " + std::to_string(instance.s_table.size()) +
                                                   " entries, construction assigns " + std::to_string(expected_s));
  }

  GameInstance under_c(instance.schedule_under_c(), steps, digit_budget);
  GameInstance under_b(instance.schedule_under_b(), steps, digit_budget);
  if (const auto& v = under_b.violation()) {
    throw Error(ErrorKind::ValidityViolated, v->reason + " at i=" + std::to_string(v->index));
  }

  SeparationReport report;
  while (report.bound_region_start - clamped_memory(c, report.bound_region_start) < 1) {
    ++report.bound_region_start;
  }
  const std::int64_t start = report.bound_region_start;

  for (std::int64_t i = 1; i <= steps; ++i) {
    const auto& stored = instance.certificates[static_cast<std::size_t>(i - 1)];
    const BigInt& r = under_c.r(i);
    if (stored.i != i || stored.r != r) fail_check(i, "stored r differs from the table");

    BigInt level_c = under_c.very_old_level(i);
    if (level_c != stored.very_old_c) fail_check(i, "stored L~_c differs from recomputation");
    if (level_c > r) fail_check(i, "L~_c(i) > r(i)");
    if (r < i + 1 || (r != i + 1 && r != level_c)) fail_check(i, "r(i) != max(i+1, L~_c(i))");

    if (!under_b.very_old_defined(i)) {
      if (stored.very_old_b) fail_check(i, "stored L~_b beyond the s table");
      continue;
    }
    BigInt level_b = under_b.very_old_level(i);
    if (!stored.very_old_b || *stored.very_old_b != level_b) {
      fail_check(i, "stored L~_b differs from recomputation");
    }
    if (level_c > level_b) fail_check(i, "L~_c(i) > L~_b(i)");
    ++report.indices_checked;
    if (i < start) continue;

    const std::int64_t oldest_b = under_b.forgotten_through(i);
    if (level_b != level_c + under_b.s(oldest_b)) fail_check(i, "L~_b(i) != L~_c(i) + s(i-b(i))");
    if (level_b <= r) fail_check(i, "L~_b(i) <= r(i)");
    if (r * r * r > level_b) fail_check(i, "r(i)/L~_b(i) > 1/r(i)^2");
    if (i >= 2 && r * make_bigint(i) * make_bigint(i) > level_b) fail_check(i, "r(i)/L~_b(i) > 1/i^2");
  }

  report.under_c = classify(under_c, under_c.horizon_cap());
  report.under_b = classify(under_b, under_b.horizon_cap());
  if (report.under_c.kind != VerdictKind::RobinSurely) {
    throw Error(ErrorKind::VerificationFailed, "memory c is not classified RobinSurely");
  }
  if (report.under_b.kind != VerdictKind::SheriffAlmostSurely) {
    throw Error(ErrorKind::VerificationFailed, "memory b is not classified SheriffAlmostSurely");
  }
  return report;
}

Json certificate_json(const SeparationInstance& instance) {
  Json rows = Json::array();
  for (const auto& record : instance.certificates) {
    Json row{{"i", record.i}, {"r", to_decimal(record.r)}, {"Ltilde_c", to_decimal(record.very_old_c)}};
    if (record.very_old_b) {
      row["Ltilde_b"] = to_decimal(*record.very_old_b);
      row["term_b"] = *record.very_old_b == 0 ? Json(nullptr)
                                              : Json(to_decimal(record.r) + "/" + to_decimal(*record.very_old_b));
    } else {
      row["Ltilde_b"] = nullptr;
      row["term_b"] = nullptr;
    }
    rows.push_back(std::move(row));
  }
  return {{"deviation", kSeparationDeviation},
          {"memory_b", to_json(instance.memory_b)},
          {"memory_c", to_json(instance.memory_c)},
          {"steps", instance.steps},
          {"per_index", rows}};
}

Json to_json(const SeparationReport& report) {
  return {{"bound_region_start", report.bound_region_start},
          {"indices_checked", report.indices_checked},
          {"under_c", to_json(report.under_c)},
          {"under_b", to_json(report.under_b)}};
}

}  // namespace robinhood
