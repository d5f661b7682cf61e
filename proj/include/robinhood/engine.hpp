#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "robinhood/bigint.hpp"
#include "robinhood/rng.hpp"
#include "robinhood/schedule.hpp"
#include "robinhood/schedule_json.hpp"

namespace robinhood {

enum class Strategy { OldestDet, OldestRnd };

std::string_view to_string(Strategy strategy);  // "oldest-det" / "oldest-rnd"
std::optional<Strategy> parse_strategy(std::string_view name);

// How tagged bags are labelled. Labels are carried in traces only; they never
// influence which bags are removed.
enum class LabelMode {
  Sequential,  // position of the bag in the global arrival order
  RandomUnit,  // uniform draw from [0, 1) on a stream separate from the dynamics
};

// A bag followed individually through the game. Tagged bags occupy the first
// positions (lowest ids) of their arrival day.
struct TaggedBag {
  std::int64_t id = 0;
  std::int64_t day = 0;
  std::int64_t index_in_day = 0;
  std::string label;
  std::optional<std::int64_t> removed_night;

  bool in_cave() const noexcept { return !removed_night; }
};

// Bags of one arrival day. Under Oldest_DET the day's remaining bags are always
// a suffix of its arrival order, and `removed_front` counts the taken prefix.
struct DayCell {
  std::int64_t day = 0;
  BigInt count;
  BigInt removed_front;
};

// Count-based cave: untagged bags are never materialized.
struct CaveState {
  explicit CaveState(Strategy strategy) : ordered(strategy == Strategy::OldestDet) {}

  bool ordered;                       // keep the very-old pool in arrival order
  std::int64_t day = 0;               // last day processed
  std::int64_t night = 0;             // last night processed
  std::int64_t forgotten_through = 0;  // i - b(i) of the current night
  BigInt very_old_count = 0;          // |S_0|
  std::deque<DayCell> very_old_segments;  // S_0 by arrival day; only when ordered
  std::deque<DayCell> window;             // S_1, S_2, ...: remembered days, oldest first
  std::vector<TaggedBag> tagged;

  BigInt cave_size() const;
};

// Partition cell 0 is the very-old pool S_0; other cells are arrival days.
struct CellRemoval {
  std::int64_t cell_day = 0;
  BigInt count;
};

struct RemovalPlan {
  std::vector<CellRemoval> cells;             // nonzero takes, S_0 first then oldest day first
  std::vector<std::int64_t> removed_tagged;   // tagged bag ids
};

// Day i: the Sheriff adds s(i) bags, `new_tags` of them tagged; days the
// memory no longer covers move into the very-old pool.
void step_day(CaveState& state, const GameInstance& instance, std::int64_t i,
              std::int64_t new_tags = 0);

// Night i under the Oldest family: take everything from S_0, S_1, ... up to
// the first cell that covers the rest of r(i), and take the remainder from it.
RemovalPlan select_removals(const CaveState& state, const GameInstance& instance, std::int64_t i,
                            Strategy strategy, CounterRng& rng);

void apply_removals(CaveState& state, const RemovalPlan& plan, std::int64_t i);

// For `tagged` marked bags in a cell of `size` bags of which `taken` are
// removed uniformly at random: which marked bags go, decided one at a time with
// probability (takes left)/(bags left). The joint law is hypergeometric.
std::vector<bool> resolve_tagged(CounterRng& rng, const BigInt& size, std::int64_t tagged,
                                 const BigInt& taken);

// Law of the number of marked bags removed, computed from the same sequential
// probabilities resolve_tagged uses. Entry m is P(m marked bags removed).
std::vector<Rational> tagged_removal_law(const BigInt& size, std::int64_t tagged,
                                         const BigInt& taken);

struct NightRecord {
  std::int64_t i = 0;
  BigInt cave_before;
  BigInt cave_after;
  std::vector<CellRemoval> removed_cells;
  Json tagged_events = Json::array();
};

struct Trace {
  Strategy strategy = Strategy::OldestRnd;
  std::uint64_t seed = 0;
  std::int64_t nights = 0;
  std::vector<std::int64_t> tagged_days;
  LabelMode labels = LabelMode::Sequential;
  std::vector<NightRecord> records;
  std::vector<TaggedBag> tagged;
  std::string digest;  // hex SHA-256 of jsonl()

  // Canonical JSON lines: a header, then one record per night, '\n'-terminated.
  std::string jsonl() const;
};

Json to_json(const NightRecord& record);

struct TraceOptions {
  LabelMode labels = LabelMode::Sequential;
};

// Plays nights 1..nights. Deterministic in (instance, strategy, seed, tagged_days).
Trace run_trace(const GameInstance& instance, Strategy strategy, std::int64_t nights,
                std::uint64_t seed, const std::vector<std::int64_t>& tagged_days,
                const TraceOptions& options = {});

struct EmpiricalSurvival {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::int64_t trials = 0;
  std::int64_t survivors = 0;
};

// Fraction of independent games in which a bag tagged on `day` is still in the
// cave after `nights`. Trial t uses stream derive_stream(seed, t), so trial 0
// replays run_trace(seed). `workers` = 0 picks the hardware concurrency.
EmpiricalSurvival empirical_survival(const GameInstance& instance, std::int64_t day,
                                     std::int64_t nights, std::int64_t trials, std::uint64_t seed,
                                     Strategy strategy = Strategy::OldestRnd, unsigned workers = 0);

std::string sha256_hex(std::string_view data);

}  // namespace robinhood
