#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "robinhood/schedule.hpp"

namespace robinhood {

using Json = nlohmann::json;

// Sorted keys, no whitespace. Emitted files round-trip byte for byte.
std::string canonical_dump(const Json& value);

Json to_json(const FunctionSpec& spec);
Json to_json(const ScheduleSpec& spec);

// Parse errors carry a JSON pointer to the offending field, e.g. "/r/tail/kind".
FunctionSpec function_from_json(const Json& value, const std::string& pointer = "");
ScheduleSpec schedule_from_json(const Json& value);

ScheduleSpec parse_schedule(std::string_view text);
ScheduleSpec load_schedule(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& value);

// Accepts a schedule-style function spec file or the shorthand "constant:<n>".
FunctionSpec parse_memory_argument(std::string_view argument);

Json to_json(const RestrictionReport& report);

}  // namespace robinhood

