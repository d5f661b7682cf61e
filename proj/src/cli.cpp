#include "robinhood/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include "robinhood/analysis.hpp"
#include "robinhood/construct.hpp"
#include "robinhood/engine.hpp"
#include "robinhood/errors.hpp"
#include "robinhood/schedule.hpp"
#include "robinhood/schedule_json.hpp"

namespace robinhood::cli {

namespace {

constexpr std::int64_t kDefaultHorizon = 1000;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::LimitExceeded:
    case ErrorKind::VerificationFailed:
      return 2;
    default:
      return 1;
  }
}

std::size_t digit_budget_from_env() {
  if (const char* env = std::getenv("RH_DIGIT_BUDGET")) {
    auto parsed = parse_decimal(env);
    if (!parsed || *parsed < 1 || !parsed->fits_ulong_p()) {
      throw Error(ErrorKind::ParseError, "RH_DIGIT_BUDGET must be a positive integer");
    }
    return parsed->get_ui();
  }
  return kDefaultDigitBudget;
}

std::uint64_t seed_from_env() {
  if (const char* env = std::getenv("RH_SEED")) {
    auto parsed = parse_decimal(env);
    if (!parsed || *parsed < 0 || !parsed->fits_ulong_p()) {
      throw Error(ErrorKind::ParseError, "RH_SEED must be a nonnegative 64-bit integer");
    }
    return parsed->get_ui();
  }
  return kDefaultSeed;
}

std::string real_string(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

// Cap needed to evaluate up to `horizon`; generated tables bring their own cap.
GameInstance load_instance(const std::string& path, std::int64_t horizon, std::size_t budget) {
  return GameInstance(load_schedule(path), horizon, budget);
}

std::int64_t resolve_horizon(const GameInstance& instance, std::optional<std::int64_t> requested) {
  if (requested) return *requested;
  return std::min(kDefaultHorizon, instance.horizon_cap());
}

void write_csv(std::ostream& out, const GameInstance& instance, std::int64_t horizon) {
  out << "i,r,s,b,L,Ltilde,term,partial_sum\n";
  CompensatedSum sum;
  for (std::int64_t i = 1; i <= horizon; ++i) {
    BigInt level = instance.very_old_level(i);
    std::string term;
    if (level > 0) {
      term = to_fraction(series_term(instance, i));
      sum.add(ratio_to_double(instance.r(i), level));
    }
    out << i << ',' << to_decimal(instance.r(i)) << ',' << to_decimal(instance.s(i)) << ',' << instance.b(i) << ','
        << to_decimal(instance.cave_level(i)) << ',' << to_decimal(level) << ',' << term << ','
        << real_string(sum.value()) << '\n';
  }
}

std::filesystem::path sibling(const std::filesystem::path& base, const std::string& suffix) {
  auto stem = base.stem().string();
  return base.parent_path() / (stem + suffix);
}

struct Options {
  std::string schedule;
  std::optional<std::int64_t> horizon;
  std::int64_t day = 1;
  std::int64_t nights = 0;
  std::int64_t trials = 0;
  std::optional<std::uint64_t> seed;
  std::string mode = "exact";
  std::string space = "rational";
  std::string strategy = "oldest-rnd";
  std::string labels = "sequential";
  std::vector<std::int64_t> tag_days;
  std::string memory_b;
  std::int64_t steps = kDefaultConstructionSteps;
  std::string output;
  bool csv = false;
  unsigned workers = 0;
};

int run_validate(const Options& o, std::ostream& out, std::size_t budget) {
  const std::int64_t cap_request = o.horizon.value_or(kDefaultHorizon);
  auto instance = load_instance(o.schedule, cap_request, budget);
  const std::int64_t horizon = resolve_horizon(instance, o.horizon);
  auto report = check_restrictions(instance, horizon);
  if (o.csv && report.validity_ok) {
    write_csv(out, instance, horizon);
  } else {
    out << canonical_dump(to_json(report)) << '\n';
  }
  return report.validity_ok ? 0 : 1;
}

int run_classify(const Options& o, std::ostream& out, std::size_t budget) {
  auto instance = load_instance(o.schedule, o.horizon.value_or(kDefaultHorizon), budget);
  const std::int64_t horizon = resolve_horizon(instance, o.horizon);
  if (o.csv) {
    write_csv(out, instance, horizon);
    return 0;
  }
  out << canonical_dump(to_json(classify(instance, horizon))) << '\n';
  return 0;
}

int run_survival(const Options& o, std::ostream& out, std::size_t budget) {
  if (!o.horizon) throw Error(ErrorKind::ParseError, "--horizon is required");
  auto instance = load_instance(o.schedule, *o.horizon, budget);
  const auto mode = o.mode == "paper" ? SurvivalMode::PaperProduct : SurvivalMode::ExactStrategy;
  const auto space = o.space == "log" ? NumberSpace::Log : NumberSpace::Rational;
  out << canonical_dump(to_json(survival_probability(instance, o.day, *o.horizon, mode, space))) << '\n';
  return 0;
}

int run_simulate(const Options& o, std::ostream& out, std::size_t budget) {
  auto instance = load_instance(o.schedule, o.nights, budget);
  const auto strategy = *parse_strategy(o.strategy);
  const std::uint64_t seed = o.seed.value_or(seed_from_env());
  if (o.trials > 0) {
    if (o.tag_days.size() != 1) throw Error(ErrorKind::ParseError, "--trials needs exactly one --tag-day");
    auto estimate = empirical_survival(instance, o.tag_days.front(), o.nights, o.trials, seed, strategy, o.workers);
    out << canonical_dump(Json{{"day", o.tag_days.front()},
                               {"nights", o.nights},
                               {"trials", estimate.trials},
                               {"survivors", estimate.survivors},
                               {"estimate", real_string(estimate.estimate)},
                               {"stderr", real_string(estimate.standard_error)},
                               {"seed", std::to_string(seed)},
                               {"strategy", to_string(strategy)}})
        << '\n';
    return 0;
  }
  TraceOptions options;
  options.labels = o.labels == "random" ? LabelMode::RandomUnit : LabelMode::Sequential;
  auto trace = run_trace(instance, strategy, o.nights, seed, o.tag_days, options);
  if (o.output.empty()) {
    out << trace.jsonl();
    return 0;
  }
  std::ofstream file(o.output);
  if (!file) throw Error(ErrorKind::ParseError, "cannot write " + o.output);
  file << trace.jsonl();
  Json tagged = Json::array();
  for (const auto& bag : trace.tagged) {
    tagged.push_back({{"id", bag.id},
                      {"day", bag.day},
                      {"removed_night", bag.removed_night ? Json(*bag.removed_night) : Json(nullptr)}});
  }
  out << canonical_dump(Json{{"digest", trace.digest}, {"nights", trace.nights}, {"tagged", tagged},
                             {"trace", o.output}})
      << '\n';
  return 0;
}

int run_construct(const Options& o, std::ostream& out, std::size_t budget) {
  auto memory = parse_memory_argument(o.memory_b);
  auto instance = separating_instance(memory, o.steps, budget);
  auto report = verify_separation(instance, budget);
  Json summary{{"steps", instance.steps}, {"verification", to_json(report)}};
  if (!o.output.empty()) {
    const std::filesystem::path base(o.output);
    const auto under_c = sibling(base, ".c.json");
    const auto certificate = sibling(base, ".cert.json");
    save_json(base, to_json(instance.schedule_under_b()));
    save_json(under_c, to_json(instance.schedule_under_c()));
    save_json(certificate, certificate_json(instance));
    summary["files"] = {{"schedule_b", base.string()},
                        {"schedule_c", under_c.string()},
                        {"certificate", certificate.string()}};
  } else {
    summary["schedule_b"] = to_json(instance.schedule_under_b());
  }
  out << canonical_dump(summary) << '\n';
  return 0;
}

int run_compare(const Options& o, std::ostream& out, std::size_t budget) {
  auto instance = load_instance(o.schedule, o.nights, budget);
  const std::uint64_t seed = o.seed.value_or(seed_from_env());
  const auto space = o.space == "log" ? NumberSpace::Log : NumberSpace::Rational;
  auto analytic = survival_probability(instance, o.day, o.nights, SurvivalMode::ExactStrategy, space);
  auto estimate = empirical_survival(instance, o.day, o.nights, o.trials, seed, Strategy::OldestRnd, o.workers);
  const double p = analytic.value();
  const double null_sd = std::sqrt(p * (1.0 - p) / static_cast<double>(o.trials));
  double z = 0.0;
  if (null_sd > 0) {
    z = (estimate.estimate - p) / null_sd;
  } else if (estimate.estimate != p) {
    z = std::numeric_limits<double>::infinity();
  }
  out << canonical_dump(Json{{"analytic", to_json(analytic)},
                             {"analytic_value", real_string(p)},
                             {"estimate", real_string(estimate.estimate)},
                             {"stderr", real_string(estimate.standard_error)},
                             {"trials", estimate.trials},
                             {"seed", std::to_string(seed)},
                             {"z", real_string(z)}})
      << '\n';
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robin Hood cave game: schedules, survival odds and simulation"};
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "Report validity and the memory restrictions");
  validate->add_option("schedule", o.schedule, "Schedule JSON")->required();
  validate->add_option("--horizon", o.horizon, "Indices to check")->check(CLI::PositiveNumber);
  validate->add_flag("--csv", o.csv, "Per-index table instead of JSON");

  auto* classify_cmd = app.add_subcommand("classify", "Classify who wins");
  classify_cmd->add_option("schedule", o.schedule, "Schedule JSON")->required();
  classify_cmd->add_option("--horizon", o.horizon, "Indices to check")->check(CLI::PositiveNumber);
  classify_cmd->add_flag("--csv", o.csv, "Per-index table instead of JSON");

  auto* survival = app.add_subcommand("survival", "Survival probability of a bag");
  survival->add_option("schedule", o.schedule, "Schedule JSON")->required();
  survival->add_option("--day", o.day, "Arrival day")->check(CLI::PositiveNumber);
  survival->add_option("--horizon", o.horizon, "Last night")->required();
  survival->add_option("--mode", o.mode, "paper or exact")->check(CLI::IsMember({"paper", "exact"}));
  survival->add_option("--space", o.space, "rational or log")->check(CLI::IsMember({"rational", "log"}));

  auto* simulate = app.add_subcommand("simulate", "Play the game");
  simulate->add_option("schedule", o.schedule, "Schedule JSON")->required();
  simulate->add_option("--nights", o.nights, "Nights to play")->required();
  simulate->add_option("--strategy", o.strategy, "oldest-det or oldest-rnd")
      ->check(CLI::IsMember({"oldest-det", "oldest-rnd"}));
  simulate->add_option("--seed", o.seed, "Master seed");
  simulate->add_option("--tag-day", o.tag_days, "Tag one bag of this day (repeatable)");
  simulate->add_option("--trials", o.trials, "Monte Carlo trials");
  simulate->add_option("--labels", o.labels, "sequential or random")->check(CLI::IsMember({"sequential", "random"}));
  simulate->add_option("--workers", o.workers, "Worker threads for --trials");
  simulate->add_option("-o,--output", o.output, "Write the trace here");

  auto* construct = app.add_subcommand("construct", "Build a memory-separating instance");
  construct->add_option("--memory-b", o.memory_b, "Function spec file or constant:n")->required();
  construct->add_option("--steps", o.steps, "Construction steps")->check(CLI::PositiveNumber);
  construct->add_option("-o,--output", o.output, "Schedule file; .c.json and .cert.json are written beside it");

  auto* compare = app.add_subcommand("compare", "Analytic vs Monte Carlo survival");
  compare->add_option("schedule", o.schedule, "Schedule JSON")->required();
  compare->add_option("--day", o.day, "Arrival day")->check(CLI::PositiveNumber);
  compare->add_option("--nights", o.nights, "Nights to play")->required();
  compare->add_option("--trials", o.trials, "Monte Carlo trials")->required()->check(CLI::PositiveNumber);
  compare->add_option("--seed", o.seed, "Master seed");
  compare->add_option("--space", o.space, "rational or log")->check(CLI::IsMember({"rational", "log"}));
  compare->add_option("--workers", o.workers, "Worker threads");

  std::vector<const char*> argv{"robinhood"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << '\n';
    return 1;
  }

  try {
    const std::size_t budget = digit_budget_from_env();
    if (validate->parsed()) return run_validate(o, out, budget);
    if (classify_cmd->parsed()) return run_classify(o, out, budget);
    if (survival->parsed()) return run_survival(o, out, budget);
    if (simulate->parsed()) return run_simulate(o, out, budget);
    if (construct->parsed()) return run_construct(o, out, budget);
    if (compare->parsed()) return run_compare(o, out, budget);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code(e.kind());
  }
  return 1;
}

}  // namespace robinhood::cli
