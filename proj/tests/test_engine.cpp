#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "robinhood/engine.hpp"
#include "robinhood/errors.hpp"

using namespace robinhood;

namespace {

ScheduleSpec constant_schedule(std::int64_t r, std::int64_t s, std::int64_t b) {
  return {FunctionSpec::constant(r), FunctionSpec::constant(s), FunctionSpec::constant(b), std::nullopt};
}

ScheduleSpec full_memory(std::int64_t r, std::int64_t s) {
  return {FunctionSpec::constant(r), FunctionSpec::constant(s), FunctionSpec::affine(1, 0), std::nullopt};
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::ParseError;
}

Rational frac(std::int64_t num, std::int64_t den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

// law[m] = (# k-subsets of {0..v-1} containing exactly m of the first t) / C(v, k)
std::vector<Rational> enumerate_law(int v, int t, int k) {
  std::vector<std::int64_t> hits(static_cast<std::size_t>(t) + 1, 0);
  std::int64_t total = 0;
  for (unsigned mask = 0; mask < (1u << v); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    ++total;
    ++hits[static_cast<std::size_t>(__builtin_popcount(mask & ((1u << t) - 1)))];
  }
  std::vector<Rational> law;
  for (auto h : hits) law.push_back(frac(h, total));
  return law;
}

// Cave with |S_0| = pool bags from day 1 and a window of later days, before night `night`.
CaveState make_state(Strategy strategy, std::int64_t pool, const std::vector<std::int64_t>& window,
                     std::int64_t night) {
  CaveState state(strategy);
  state.day = night;
  state.night = night - 1;
  state.forgotten_through = 1;
  state.very_old_count = pool;
  if (state.ordered && pool > 0) state.very_old_segments.push_back({1, pool, 0});
  std::int64_t day = 2;
  for (auto count : window) state.window.push_back({day++, count, 0});
  return state;
}

void tag(CaveState& state, std::int64_t day, std::int64_t index) {
  TaggedBag bag;
  bag.id = static_cast<std::int64_t>(state.tagged.size()) + 1;
  bag.day = day;
  bag.index_in_day = index;
  state.tagged.push_back(bag);
}

}  // namespace

TEST_CASE("step_day examples") {
  GameInstance memoryless(constant_schedule(1, 2, 0), 10);
  CaveState a(Strategy::OldestRnd);
  step_day(a, memoryless, 1);
  CHECK(a.very_old_count == 2);
  CHECK(a.window.empty());

  GameInstance two(constant_schedule(1, 2, 2), 10);
  CaveState b(Strategy::OldestDet);
  CounterRng rng(1);
  for (std::int64_t i = 1; i <= 3; ++i) {
    step_day(b, two, i);
    if (i < 3) apply_removals(b, select_removals(b, two, i, Strategy::OldestDet, rng), i);
  }
  REQUIRE(b.window.size() == 2);
  CHECK(b.window[0].day == 2);
  CHECK(b.window[1].day == 3);
  CHECK(b.window[1].count == 2);
  CHECK(b.forgotten_through == 1);
  // Nights 1 and 2 took both day-1 bags, so the pool covering day 1 is empty.
  CHECK(b.very_old_count == 0);
  CHECK(b.window[0].count == 2);

  GameInstance one(constant_schedule(1, 3, 1), 10);
  CaveState c(Strategy::OldestRnd);
  step_day(c, one, 1);
  CHECK(c.very_old_count == 0);
  REQUIRE(c.window.size() == 1);
  CHECK(c.window[0].day == 1);
  CHECK(c.window[0].count == 3);
}

TEST_CASE("step_day errors") {
  GameInstance g(constant_schedule(1, 2, 0), 2);
  CaveState state(Strategy::OldestRnd);
  CHECK(kind_of([&] { step_day(state, g, 2); }) == ErrorKind::ScheduleExhausted);
  CounterRng rng(3);
  for (std::int64_t i = 1; i <= 2; ++i) {
    step_day(state, g, i);
    apply_removals(state, select_removals(state, g, i, Strategy::OldestRnd, rng), i);
  }
  CHECK(kind_of([&] { step_day(state, g, 3); }) == ErrorKind::ScheduleExhausted);
  CHECK(kind_of([&] { run_trace(g, Strategy::OldestRnd, 3, 1, {}); }) == ErrorKind::ScheduleExhausted);
}

TEST_CASE("select_removals: one marked bag in a pool of five") {
  GameInstance g(constant_schedule(2, 3, 0), 10);
  CHECK(tagged_removal_law(5, 1, 2)[1] == frac(2, 5));
  CHECK(enumerate_law(5, 1, 2)[1] == frac(2, 5));

  CaveState state = make_state(Strategy::OldestRnd, 5, {}, 2);
  tag(state, 1, 0);
  const int samples = 100000;
  int hits = 0;
  for (int k = 0; k < samples; ++k) {
    CounterRng rng(derive_stream(99, static_cast<std::uint64_t>(k)));
    auto plan = select_removals(state, g, 2, Strategy::OldestRnd, rng);
    REQUIRE(plan.cells.size() == 1);
    REQUIRE(plan.cells[0].cell_day == 0);
    REQUIRE(plan.cells[0].count == 2);
    hits += plan.removed_tagged.empty() ? 0 : 1;
  }
  const double p = 0.4;
  CHECK(std::fabs(hits / double(samples) - p) < 5 * std::sqrt(p * (1 - p) / samples));
}

TEST_CASE("select_removals: pool of one spills into the oldest remembered day") {
  GameInstance g(constant_schedule(2, 3, 1), 10);
  for (auto strategy : {Strategy::OldestDet, Strategy::OldestRnd}) {
    CaveState state = make_state(strategy, 1, {3}, 2);
    tag(state, 1, 0);
    for (int k = 0; k < 3; ++k) tag(state, 2, k);
    std::map<std::int64_t, int> picked;
    for (int k = 0; k < 30000; ++k) {
      CounterRng rng(derive_stream(5, static_cast<std::uint64_t>(k)));
      auto plan = select_removals(state, g, 2, strategy, rng);
      REQUIRE(plan.cells.size() == 2);
      REQUIRE(plan.cells[0].cell_day == 0);
      REQUIRE(plan.cells[0].count == 1);
      REQUIRE(plan.cells[1].cell_day == 2);
      REQUIRE(plan.cells[1].count == 1);
      REQUIRE(plan.removed_tagged.size() == 2);
      REQUIRE(plan.removed_tagged[0] == 1);
      ++picked[plan.removed_tagged[1]];
    }
    if (strategy == Strategy::OldestDet) {
      CHECK(picked.size() == 1);
      CHECK(picked.begin()->first == 2);
    } else {
      REQUIRE(picked.size() == 3);
      for (const auto& [id, count] : picked) CHECK(std::fabs(count / 30000.0 - 1.0 / 3) < 0.015);
    }
  }
}

TEST_CASE("select_removals: both of two marked bags in a pool of four") {
  CHECK(tagged_removal_law(4, 2, 2)[2] == frac(1, 6));
  CHECK(enumerate_law(4, 2, 2)[2] == frac(1, 6));

  GameInstance g(constant_schedule(2, 3, 0), 10);
  CaveState state = make_state(Strategy::OldestRnd, 4, {}, 2);
  tag(state, 1, 0);
  tag(state, 1, 1);
  const int samples = 60000;
  int both = 0;
  for (int k = 0; k < samples; ++k) {
    CounterRng rng(derive_stream(7, static_cast<std::uint64_t>(k)));
    both += select_removals(state, g, 2, Strategy::OldestRnd, rng).removed_tagged.size() == 2 ? 1 : 0;
  }
  const double p = 1.0 / 6;
  CHECK(std::fabs(both / double(samples) - p) < 5 * std::sqrt(p * (1 - p) / samples));
}

TEST_CASE("tagged removal law equals subset enumeration for small cells") {
  for (int v = 1; v <= 6; ++v) {
    for (int t = 0; t <= v; ++t) {
      for (int k = 0; k <= v; ++k) {
        auto law = tagged_removal_law(v, t, k);
        auto oracle = enumerate_law(v, t, k);
        REQUIRE(law.size() == oracle.size());
        for (std::size_t m = 0; m < law.size(); ++m) REQUIRE(law[m] == oracle[m]);
      }
    }
  }
}

TEST_CASE("resolve_tagged respects the removal count") {
  CounterRng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const BigInt size = 1 + static_cast<long>(rng.below(std::uint64_t{10}));
    const std::int64_t t = static_cast<std::int64_t>(rng.below(size.get_ui() + 1));
    const BigInt taken = static_cast<long>(rng.below(size.get_ui() + 1));
    auto removed = resolve_tagged(rng, size, t, taken);
    REQUIRE(static_cast<std::int64_t>(removed.size()) == t);
    const auto count = std::count(removed.begin(), removed.end(), true);
    REQUIRE(count <= taken);
    // the untagged part of the cell must absorb the other removals
    REQUIRE(taken - count <= size - t);
  }
  BigInt huge("1" + std::string(40, '0'));
  auto all = resolve_tagged(rng, huge, 3, huge);
  CHECK(std::count(all.begin(), all.end(), true) == 3);
  auto none = resolve_tagged(rng, huge, 3, 0);
  CHECK(std::count(none.begin(), none.end(), true) == 0);
}

TEST_CASE("traces are deterministic in the seed") {
  GameInstance g(constant_schedule(1, 2, 0), 200);
  auto a = run_trace(g, Strategy::OldestRnd, 200, 42, {1, 5, 5});
  auto b = run_trace(g, Strategy::OldestRnd, 200, 42, {1, 5, 5});
  CHECK(a.digest == b.digest);
  CHECK(a.jsonl() == b.jsonl());
  CHECK(a.digest.size() == 64);
  CHECK(run_trace(g, Strategy::OldestRnd, 200, 43, {1, 5, 5}).digest != a.digest);
  CHECK(run_trace(g, Strategy::OldestDet, 200, 42, {1, 5, 5}).digest != a.digest);
}

TEST_CASE("cave size and counts are conserved") {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<std::int64_t> small(1, 5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::int64_t r = small(gen);
    GameInstance g(constant_schedule(r, r + small(gen), small(gen) - 1), 150);
    const auto strategy = trial % 2 ? Strategy::OldestDet : Strategy::OldestRnd;
    auto trace = run_trace(g, strategy, 150, static_cast<std::uint64_t>(trial), {1, 2, 3, 10});
    for (const auto& rec : trace.records) {
      REQUIRE(rec.cave_after == g.cave_level(rec.i));
      REQUIRE(rec.cave_before == g.cave_level(rec.i - 1) + g.s(rec.i));
      BigInt taken = 0;
      for (const auto& cell : rec.removed_cells) taken += cell.count;
      REQUIRE(taken == g.r(rec.i));
      REQUIRE(rec.cave_before - taken == rec.cave_after);
    }
  }
}

TEST_CASE("very-old count tracks the schedule and the window stays untouched while the pool suffices") {
  std::mt19937_64 gen(9);
  std::uniform_int_distribution<std::int64_t> small(1, 5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::int64_t r = small(gen);
    ScheduleSpec spec = trial % 3 == 0 ? full_memory(r, r + small(gen))
                                       : constant_schedule(r, r + small(gen), small(gen) - 1);
    GameInstance g(spec, 120);
    const auto strategy = trial % 2 ? Strategy::OldestDet : Strategy::OldestRnd;
    CaveState state(strategy);
    CounterRng rng(static_cast<std::uint64_t>(trial));
    for (std::int64_t i = 1; i <= 120; ++i) {
      step_day(state, g, i);
      REQUIRE(state.very_old_count == g.very_old_level(i));
      REQUIRE(static_cast<std::int64_t>(state.window.size()) == g.b(i));
      REQUIRE(state.cave_size() == g.cave_level(i - 1) + g.s(i));
      auto plan = select_removals(state, g, i, strategy, rng);
      if (state.very_old_count >= g.r(i)) {
        REQUIRE(plan.cells.size() == 1);
        REQUIRE(plan.cells[0].cell_day == 0);
      }
      apply_removals(state, plan, i);
    }
  }
}

TEST_CASE("Oldest_DET removes bags in arrival order") {
  std::mt19937_64 gen(13);
  std::uniform_int_distribution<std::int64_t> small(1, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::int64_t r = small(gen);
    const std::int64_t s = r + small(gen);
    ScheduleSpec spec = trial % 2 ? full_memory(r, s) : constant_schedule(r, s, small(gen));
    GameInstance g(spec, 60);
    // Tag every bag of every day.
    std::vector<std::int64_t> days;
    for (std::int64_t d = 1; d <= 60; ++d) {
      for (std::int64_t k = 0; k < s; ++k) days.push_back(d);
    }
    auto trace = run_trace(g, Strategy::OldestDet, 60, 1, days);
    std::int64_t previous = 0;
    std::int64_t removed = 0;
    bool seen_survivor = false;
    for (const auto& bag : trace.tagged) {
      if (!bag.removed_night) {
        seen_survivor = true;
        continue;
      }
      REQUIRE_FALSE(seen_survivor);
      REQUIRE(*bag.removed_night >= previous);
      REQUIRE(*bag.removed_night >= bag.day);
      previous = *bag.removed_night;
      ++removed;
    }
    CHECK(removed == g.removed_through(60));
  }
}

TEST_CASE("single-night removal frequency is r/L~ for a very old bag") {
  GameInstance g(constant_schedule(2, 5, 1), 40);
  const std::int64_t night = 6;
  REQUIRE(1 <= g.forgotten_through(night));
  CaveState state(Strategy::OldestRnd);
  // Deterministic prefix in which the tagged day-1 bag is still present.
  for (std::uint64_t key = 0; key < 1000; ++key) {
    state = CaveState(Strategy::OldestRnd);
    CounterRng rng(key);
    for (std::int64_t i = 1; i < night; ++i) {
      step_day(state, g, i, i == 1 ? 1 : 0);
      apply_removals(state, select_removals(state, g, i, Strategy::OldestRnd, rng), i);
    }
    if (state.tagged.front().in_cave()) break;
  }
  REQUIRE(state.tagged.front().in_cave());
  step_day(state, g, night);
  const BigInt level = g.very_old_level(night);
  REQUIRE(level >= g.r(night));
  const double p = ratio_to_double(g.r(night), level);

  const int samples = 100000;
  int hits = 0;
  for (int k = 0; k < samples; ++k) {
    CounterRng rng(derive_stream(123, static_cast<std::uint64_t>(k)));
    hits += select_removals(state, g, night, Strategy::OldestRnd, rng).removed_tagged.empty() ? 0 : 1;
  }
  const double observed = hits / double(samples);
  const double expected_hits = p * samples;
  const double chi2 = (hits - expected_hits) * (hits - expected_hits) / expected_hits +
                      (hits - expected_hits) * (hits - expected_hits) / (samples - expected_hits);
  // one degree of freedom; 24 corresponds to p ~ 1e-6
  CHECK(chi2 < 24.0);
  CHECK(std::fabs(observed - p) < 0.01);
}

TEST_CASE("empirical survival examples") {
  GameInstance fifo(full_memory(1, 2), 20);
  auto gone = empirical_survival(fifo, 1, 10, 500, 42, Strategy::OldestRnd, 2);
  CHECK(gone.estimate == 0.0);
  CHECK(gone.survivors == 0);

  GameInstance g(constant_schedule(1, 2, 0), 200);
  auto untouched = empirical_survival(g, 7, 6, 100, 42);
  CHECK(untouched.estimate == 1.0);
  CHECK(untouched.standard_error == 0.0);

  auto half = empirical_survival(g, 1, 1, 40000, 42, Strategy::OldestRnd, 4);
  CHECK(std::fabs(half.estimate - 0.5) < 4 * half.standard_error);

  auto hundredth = empirical_survival(g, 1, 99, 40000, 42, Strategy::OldestRnd, 4);
  CHECK(std::fabs(hundredth.estimate - 0.01) < 4 * hundredth.standard_error);

  // Worker count only changes how trials are split.
  auto serial = empirical_survival(g, 3, 30, 3000, 8, Strategy::OldestRnd, 1);
  auto parallel = empirical_survival(g, 3, 30, 3000, 8, Strategy::OldestRnd, 5);
  CHECK(serial.survivors == parallel.survivors);
}

TEST_CASE("empirical trial 0 replays run_trace") {
  GameInstance g(constant_schedule(1, 3, 1), 50);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto trace = run_trace(g, Strategy::OldestRnd, 40, seed, {4});
    auto single = empirical_survival(g, 4, 40, 1, seed, Strategy::OldestRnd, 1);
    REQUIRE((single.survivors == 1) == trace.tagged.front().in_cave());
  }
}

TEST_CASE("labels never change the dynamics") {
  GameInstance g(constant_schedule(2, 4, 3), 80);
  auto plain = run_trace(g, Strategy::OldestRnd, 80, 17, {1, 2, 2, 9});
  auto labelled = run_trace(g, Strategy::OldestRnd, 80, 17, {1, 2, 2, 9}, {LabelMode::RandomUnit});
  REQUIRE(plain.tagged.size() == labelled.tagged.size());
  for (std::size_t k = 0; k < plain.tagged.size(); ++k) {
    CHECK(plain.tagged[k].removed_night == labelled.tagged[k].removed_night);
    const double label = std::stod(labelled.tagged[k].label);
    CHECK(label >= 0.0);
    CHECK(label < 1.0);
  }
  for (std::size_t k = 0; k < plain.records.size(); ++k) {
    REQUIRE(to_json(plain.records[k])["removed_cells"] == to_json(labelled.records[k])["removed_cells"]);
  }
  CHECK(plain.tagged[0].label == "0");
  CHECK(plain.tagged[1].label == "4");
  CHECK(plain.digest != labelled.digest);
}

TEST_CASE("trace JSON lines") {
  GameInstance g(constant_schedule(1, 2, 0), 5);
  auto trace = run_trace(g, Strategy::OldestDet, 3, 42, {1});
  const std::string text = trace.jsonl();
  std::vector<Json> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    lines.push_back(Json::parse(text.substr(start, end - start)));
    start = end + 1;
  }
  REQUIRE(lines.size() == 4);
  CHECK(lines[0]["prng"] == std::string(kPrngName));
  CHECK(lines[0]["seed"] == "42");
  CHECK(lines[1]["i"] == 1);
  CHECK(lines[1]["cave_before"] == "2");
  CHECK(lines[1]["cave_after"] == "1");
  CHECK(lines[1]["removed_cells"] == Json::array({Json::array({0, "1"})}));
  // The tagged bag is the lowest id of day 1, so Oldest_DET takes it first.
  CHECK(lines[1]["tagged_events"][1]["event"] == "removed");
  CHECK(sha256_hex(text) == trace.digest);
}

TEST_CASE("strategy names and hashing") {
  CHECK(parse_strategy("oldest-det") == Strategy::OldestDet);
  CHECK(parse_strategy("oldest-rnd") == Strategy::OldestRnd);
  CHECK_FALSE(parse_strategy("newest").has_value());
  CHECK(to_string(Strategy::OldestRnd) == "oldest-rnd");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("counter generator") {
  CounterRng a(42);
  CounterRng b(42);
  for (int k = 0; k < 10; ++k) REQUIRE(a.next() == b.next());
  CHECK(a.counter() == 10);
  CHECK(derive_stream(1, 2) != derive_stream(2, 1));
  CHECK(derive_stream(1, 2) != derive_stream(1, 3));

  CounterRng rng(7);
  std::vector<int> bins(6, 0);
  for (int k = 0; k < 60000; ++k) ++bins[rng.below(std::uint64_t{6})];
  for (int count : bins) CHECK(std::abs(count - 10000) < 500);

  BigInt bound("123456789012345678901234567890");
  for (int k = 0; k < 200; ++k) {
    BigInt x = rng.below(bound);
    REQUIRE(x >= 0);
    REQUIRE(x < bound);
  }
  CHECK_FALSE(rng.bernoulli(0, 5));
  CHECK(rng.bernoulli(5, 5));
  for (int k = 0; k < 1000; ++k) {
    double u = rng.unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}
