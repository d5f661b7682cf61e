#include "robinhood/engine.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <sstream>
#include <thread>

#include "robinhood/errors.hpp"

namespace robinhood {

std::string_view to_string(Strategy strategy) {
  return strategy == Strategy::OldestDet ? "oldest-det" : "oldest-rnd";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "oldest-det") return Strategy::OldestDet;
  if (name == "oldest-rnd") return Strategy::OldestRnd;
  return std::nullopt;
}

BigInt CaveState::cave_size() const {
  BigInt total = very_old_count;
  for (const auto& cell : window) total += cell.count;
  return total;
}

void step_day(CaveState& state, const GameInstance& instance, std::int64_t i, std::int64_t new_tags) {
  if (state.day != i - 1 || state.night != i - 1) {
    throw Error(ErrorKind::ScheduleExhausted, "step_day(" + std::to_string(i) + ") out of order");
  }
  if (i > instance.horizon_cap()) {
    throw Error(ErrorKind::ScheduleExhausted,
                "day " + std::to_string(i) + " is past the schedule cap " + std::to_string(instance.horizon_cap()));
  }
  const std::int64_t boundary = instance.forgotten_through(i);
  if (boundary < state.forgotten_through) {
    throw Error(ErrorKind::RestrictionViolated,
                "i - b(i) decreases at i=" + std::to_string(i) + "; forgotten days cannot be recalled");
  }

  const BigInt& arrivals = instance.s(i);
  if (new_tags > 0 && arrivals < new_tags) {
    throw Error(ErrorKind::SpecInvalid, "cannot tag " + std::to_string(new_tags) + " bags on day " +
                                            std::to_string(i) + " with s(i)=" + to_decimal(arrivals));
  }
  for (std::int64_t k = 0; k < new_tags; ++k) {
    TaggedBag bag;
    bag.id = static_cast<std::int64_t>(state.tagged.size()) + 1;
    bag.day = i;
    bag.index_in_day = k;
    bag.label = to_decimal(instance.arrived_through(i - 1) + k);
    state.tagged.push_back(std::move(bag));
  }

  state.window.push_back({i, arrivals, 0});
  while (!state.window.empty() && state.window.front().day <= boundary) {
    state.very_old_count += state.window.front().count;
    if (state.ordered) state.very_old_segments.push_back(std::move(state.window.front()));
    state.window.pop_front();
  }
  state.forgotten_through = boundary;
  state.day = i;
}

std::vector<bool> resolve_tagged(CounterRng& rng, const BigInt& size, std::int64_t tagged,
                                 const BigInt& taken) {
  std::vector<bool> removed(static_cast<std::size_t>(tagged), false);
  if (taken >= size) {
    std::fill(removed.begin(), removed.end(), true);
    return removed;
  }
  BigInt takes_left = taken;
  BigInt bags_left = size;
  for (std::int64_t k = 0; k < tagged && takes_left > 0; ++k) {
    if (rng.bernoulli(takes_left, bags_left)) {
      removed[static_cast<std::size_t>(k)] = true;
      --takes_left;
    }
    --bags_left;
  }
  return removed;
}

std::vector<Rational> tagged_removal_law(const BigInt& size, std::int64_t tagged, const BigInt& taken) {
  // law[m] = P(m of the marked bags decided so far were removed)
  std::vector<Rational> law(static_cast<std::size_t>(tagged) + 1, Rational(0));
  law[0] = 1;
  if (taken >= size) {
    std::fill(law.begin(), law.end(), Rational(0));
    law.back() = 1;
    return law;
  }
  for (std::int64_t k = 0; k < tagged; ++k) {
    std::vector<Rational> next(law.size(), Rational(0));
    const BigInt bags_left = size - k;
    for (std::int64_t m = 0; m <= k; ++m) {
      const Rational& mass = law[static_cast<std::size_t>(m)];
      if (mass == 0) continue;
      BigInt takes_left = taken - m;
      if (takes_left <= 0) {
        next[static_cast<std::size_t>(m)] += mass;
        continue;
      }
      Rational p(takes_left, bags_left);
      p.canonicalize();
      next[static_cast<std::size_t>(m) + 1] += mass * p;
      next[static_cast<std::size_t>(m)] += mass * (1 - p);
    }
    law = std::move(next);
  }
  return law;
}

namespace {

struct CellTake {
  std::int64_t cell_day;  // 0 for S_0
  BigInt size;
  BigInt taken;
};

// Counts taken from each partition cell: full cells S_0..S_{m-1}, then the remainder from S_m.
std::vector<CellTake> partition_takes(const CaveState& state, const BigInt& quota) {
  std::vector<CellTake> takes;
  BigInt remaining = quota;
  auto take_from = [&](std::int64_t cell_day, const BigInt& size) {
    if (remaining == 0) return;
    BigInt k = remaining < size ? remaining : size;
    takes.push_back({cell_day, size, k});
    remaining -= k;
  };
  take_from(0, state.very_old_count);
  for (const auto& cell : state.window) take_from(cell.day, cell.count);
  if (remaining > 0) {
    throw Error(ErrorKind::SpecInvalid, "cave holds fewer bags than the night's quota");
  }
  return takes;
}

bool tagged_in_cell(const TaggedBag& bag, std::int64_t cell_day, std::int64_t forgotten_through) {
  if (!bag.in_cave()) return false;
  if (cell_day == 0) return bag.day <= forgotten_through;
  return bag.day == cell_day;
}

}  // namespace

RemovalPlan select_removals(const CaveState& state, const GameInstance& instance, std::int64_t i,
                            Strategy strategy, CounterRng& rng) {
  if (state.day != i || state.night != i - 1) {
    throw Error(ErrorKind::ScheduleExhausted, "select_removals(" + std::to_string(i) + ") out of order");
  }
  RemovalPlan plan;
  const auto takes = partition_takes(state, instance.r(i));
  for (const auto& take : takes) {
    if (take.taken > 0) plan.cells.push_back({take.cell_day, take.taken});

    std::vector<const TaggedBag*> marked;
    for (const auto& bag : state.tagged) {
      if (tagged_in_cell(bag, take.cell_day, state.forgotten_through)) marked.push_back(&bag);
    }
    if (marked.empty() || take.taken == 0) continue;

    if (strategy == Strategy::OldestRnd) {
      auto removed = resolve_tagged(rng, take.size, static_cast<std::int64_t>(marked.size()), take.taken);
      for (std::size_t k = 0; k < marked.size(); ++k) {
        if (removed[k]) plan.removed_tagged.push_back(marked[k]->id);
      }
      continue;
    }

    // Oldest_DET takes the lowest ids first: position of a bag within its cell.
    for (const auto* bag : marked) {
      BigInt position = 0;
      if (take.cell_day == 0) {
        for (const auto& segment : state.very_old_segments) {
          if (segment.day == bag->day) {
            position += bag->index_in_day - segment.removed_front;
            break;
          }
          position += segment.count;
        }
      } else {
        for (const auto& cell : state.window) {
          if (cell.day == bag->day) position = bag->index_in_day - cell.removed_front;
        }
      }
      if (position < take.taken) plan.removed_tagged.push_back(bag->id);
    }
  }
  std::sort(plan.removed_tagged.begin(), plan.removed_tagged.end());
  return plan;
}

void apply_removals(CaveState& state, const RemovalPlan& plan, std::int64_t i) {
  for (const auto& removal : plan.cells) {
    if (removal.cell_day == 0) {
      state.very_old_count -= removal.count;
      if (state.ordered) {
        BigInt left = removal.count;
        while (left > 0) {
          auto& front = state.very_old_segments.front();
          BigInt k = left < front.count ? left : front.count;
          front.count -= k;
          front.removed_front += k;
          left -= k;
          if (front.count == 0) state.very_old_segments.pop_front();
        }
      }
      continue;
    }
    for (auto& cell : state.window) {
      if (cell.day == removal.cell_day) {
        cell.count -= removal.count;
        cell.removed_front += removal.count;
      }
    }
  }
  for (auto id : plan.removed_tagged) state.tagged[static_cast<std::size_t>(id - 1)].removed_night = i;
  state.night = i;
}

namespace {

std::string unit_label(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

// One game: alternates days and nights on a private stream.
class Game {
 public:
  Game(const GameInstance& instance, Strategy strategy, std::uint64_t trial_key, LabelMode labels)
      : instance_(instance), strategy_(strategy), trial_key_(trial_key), labels_(labels), state_(strategy) {}

  const CaveState& state() const { return state_; }

  // Plays day and night i; returns the record when `record` is set.
  void play(std::int64_t i, std::int64_t new_tags, NightRecord* record) {
    const std::size_t first_new = state_.tagged.size();
    step_day(state_, instance_, i, new_tags);
    if (labels_ == LabelMode::RandomUnit) {
      for (std::size_t k = first_new; k < state_.tagged.size(); ++k) {
        CounterRng label_rng(derive_stream(derive_stream(trial_key_, 0),
                                           static_cast<std::uint64_t>(state_.tagged[k].id)));
        state_.tagged[k].label = unit_label(label_rng.unit());
      }
    }
    if (record) {
      record->i = i;
      record->cave_before = state_.cave_size();
      for (std::size_t k = first_new; k < state_.tagged.size(); ++k) {
        const auto& bag = state_.tagged[k];
        record->tagged_events.push_back(
            {{"event", "arrived"}, {"id", bag.id}, {"day", bag.day}, {"label", bag.label}});
      }
    }
    CounterRng rng(derive_stream(trial_key_, static_cast<std::uint64_t>(i)));
    RemovalPlan plan = select_removals(state_, instance_, i, strategy_, rng);
    apply_removals(state_, plan, i);
    if (record) {
      record->cave_after = state_.cave_size();
      for (auto id : plan.removed_tagged) {
        const auto& bag = state_.tagged[static_cast<std::size_t>(id - 1)];
        record->tagged_events.push_back({{"event", "removed"}, {"id", bag.id}, {"day", bag.day}});
      }
      record->removed_cells = std::move(plan.cells);
    }
  }

 private:
  const GameInstance& instance_;
  Strategy strategy_;
  std::uint64_t trial_key_;
  LabelMode labels_;
  CaveState state_;
};

std::vector<std::int64_t> tags_per_day(const std::vector<std::int64_t>& tagged_days, std::int64_t nights) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(std::max<std::int64_t>(nights, 0)) + 1, 0);
  for (auto d : tagged_days) {
    if (d < 1) throw Error(ErrorKind::SpecInvalid, "tagged day must be >= 1");
    if (d <= nights) ++counts[static_cast<std::size_t>(d)];
  }
  return counts;
}

void check_nights(const GameInstance& instance, std::int64_t nights) {
  if (!instance.valid()) {
    throw Error(ErrorKind::SpecInvalid, instance.violation()->reason + " at i=" +
                                            std::to_string(instance.violation()->index));
  }
  if (nights < 0) throw Error(ErrorKind::SpecInvalid, "nights must be nonnegative");
  if (nights > instance.horizon_cap()) {
    throw Error(ErrorKind::ScheduleExhausted,
                std::to_string(nights) + " nights requested, schedule cap is " + std::to_string(instance.horizon_cap()));
  }
}

}  // namespace

Json to_json(const NightRecord& record) {
  Json cells = Json::array();
  for (const auto& cell : record.removed_cells) cells.push_back({cell.cell_day, to_decimal(cell.count)});
  return {{"i", record.i},
          {"cave_before", to_decimal(record.cave_before)},
          {"cave_after", to_decimal(record.cave_after)},
          {"removed_cells", cells},
          {"tagged_events", record.tagged_events}};
}

std::string Trace::jsonl() const {
  Json header{{"format", "robinhood-trace/1"},
              {"prng", kPrngName},
              {"strategy", to_string(strategy)},
              {"seed", std::to_string(seed)},
              {"nights", nights},
              {"tagged_days", tagged_days},
              {"labels", labels == LabelMode::Sequential ? "sequential" : "random-unit"}};
  std::string out = canonical_dump(header) + "\n";
  for (const auto& record : records) out += canonical_dump(to_json(record)) + "\n";
  return out;
}

Trace run_trace(const GameInstance& instance, Strategy strategy, std::int64_t nights, std::uint64_t seed,
                const std::vector<std::int64_t>& tagged_days, const TraceOptions& options) {
  check_nights(instance, nights);
  Trace trace;
  trace.strategy = strategy;
  trace.seed = seed;
  trace.nights = nights;
  trace.tagged_days = tagged_days;
  trace.labels = options.labels;
  const auto tags = tags_per_day(tagged_days, nights);

  Game game(instance, strategy, derive_stream(seed, 0), options.labels);
  trace.records.reserve(static_cast<std::size_t>(nights));
  for (std::int64_t i = 1; i <= nights; ++i) {
    NightRecord record;
    game.play(i, tags[static_cast<std::size_t>(i)], &record);
    check_digit_budget(record.cave_after, instance.digit_budget(), "cave size");
    trace.records.push_back(std::move(record));
  }
  trace.tagged = game.state().tagged;
  trace.digest = sha256_hex(trace.jsonl());
  return trace;
}

EmpiricalSurvival empirical_survival(const GameInstance& instance, std::int64_t day, std::int64_t nights,
                                     std::int64_t trials, std::uint64_t seed, Strategy strategy,
                                     unsigned workers) {
  check_nights(instance, nights);
  if (trials < 1) throw Error(ErrorKind::SpecInvalid, "trials must be >= 1");
  if (day < 1) throw Error(ErrorKind::SpecInvalid, "day must be >= 1");

  EmpiricalSurvival out;
  out.trials = trials;
  if (nights < day) {
    out.survivors = trials;
    out.estimate = 1.0;
    return out;
  }

  auto run_block = [&](std::int64_t first, std::int64_t last) {
    std::int64_t survivors = 0;
    for (std::int64_t t = first; t < last; ++t) {
      Game game(instance, strategy, derive_stream(seed, static_cast<std::uint64_t>(t)), LabelMode::Sequential);
      bool alive = true;
      for (std::int64_t i = 1; i <= nights && alive; ++i) {
        game.play(i, i == day ? 1 : 0, nullptr);
        if (i >= day) alive = game.state().tagged.front().in_cave();
      }
      if (alive) ++survivors;
    }
    return survivors;
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, trials));
  if (workers <= 1) {
    out.survivors = run_block(0, trials);
  } else {
    std::vector<std::int64_t> counts(workers, 0);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::int64_t first = trials * w / workers;
      const std::int64_t last = trials * (w + 1) / workers;
      pool.emplace_back([&, w, first, last] {
        try {
          counts[w] = run_block(first, last);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& thread : pool) thread.join();
    for (auto& error : errors) {
      if (error) std::rethrow_exception(error);
    }
    for (auto c : counts) out.survivors += c;
  }
  const double n = static_cast<double>(trials);
  out.estimate = static_cast<double>(out.survivors) / n;
  out.standard_error = std::sqrt(out.estimate * (1.0 - out.estimate) / n);
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::ostringstream hex;
  for (unsigned int k = 0; k < length; ++k) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
  }
  return hex.str();
}

}  // namespace robinhood
