#include "robinhood/schedule_json.hpp"

#include <fstream>
#include <sstream>

#include "robinhood/errors.hpp"

namespace robinhood {

namespace {

[[noreturn]] void fail(const std::string& pointer, const std::string& message) {
  throw Error(ErrorKind::ParseError, (pointer.empty() ? "/" : pointer) + ": " + message);
}

std::int64_t require_int(const Json& object, const std::string& key, const std::string& pointer) {
  if (!object.contains(key)) fail(pointer + "/" + key, "missing field");
  const Json& v = object.at(key);
  if (!v.is_number_integer()) fail(pointer + "/" + key, "expected an integer");
  return v.get<std::int64_t>();
}

void reject_unknown_keys(const Json& object, std::initializer_list<std::string_view> allowed,
                         const std::string& pointer) {
  for (const auto& [key, _] : object.items()) {
    bool known = false;
    for (auto name : allowed) known = known || key == name;
    if (!known) fail(pointer + "/" + key, "unknown field");
  }
}

SeparationProvenance provenance_from_json(const Json& value, const std::string& pointer) {
  if (!value.is_object()) fail(pointer, "expected an object");
  reject_unknown_keys(value, {"kind", "memory_b", "memory_c", "steps", "deviation"}, pointer);
  if (!value.contains("kind") || value.at("kind") != "separation") {
    fail(pointer + "/kind", "expected \"separation\"");
  }
  if (!value.contains("memory_b")) fail(pointer + "/memory_b", "missing field");
  if (!value.contains("memory_c")) fail(pointer + "/memory_c", "missing field");
  if (!value.contains("deviation") || !value.at("deviation").is_string()) {
    fail(pointer + "/deviation", "expected a string");
  }
  return {function_from_json(value.at("memory_b"), pointer + "/memory_b"),
          function_from_json(value.at("memory_c"), pointer + "/memory_c"),
          require_int(value, "steps", pointer), value.at("deviation").get<std::string>()};
}

}  // namespace

std::string canonical_dump(const Json& value) { return value.dump(); }

Json to_json(const FunctionSpec& spec) {
  Json out;
  if (const auto* f = std::get_if<fn::Constant>(&spec.form)) {
    out["kind"] = "constant";
    out["value"] = f->value;
  } else if (const auto* f = std::get_if<fn::Affine>(&spec.form)) {
    out["kind"] = "affine";
    out["a"] = f->a;
    out["c"] = f->c;
  } else if (const auto* f = std::get_if<fn::Table>(&spec.form)) {
    out["kind"] = "table";
    out["values"] = f->values;
    out["tail"] = to_json(*f->tail);
  } else {
    const auto& g = std::get<fn::Generated>(spec.form);
    out["kind"] = "generated";
    Json values = Json::array();
    for (const auto& v : g.values) values.push_back(to_decimal(v));
    out["values"] = std::move(values);
  }
  return out;
}

Json to_json(const ScheduleSpec& spec) {
  Json out;
  out["r"] = to_json(spec.r);
  out["s"] = to_json(spec.s);
  out["b"] = to_json(spec.b);
  if (spec.construction) {
    out["construction"] = {
        {"kind", "separation"},
        {"memory_b", to_json(spec.construction->memory_b)},
        {"memory_c", to_json(spec.construction->memory_c)},
        {"steps", spec.construction->steps},
        {"deviation", spec.construction->deviation},
    };
  }
  return out;
}

FunctionSpec function_from_json(const Json& value, const std::string& pointer) {
  if (!value.is_object()) fail(pointer, "expected an object");
  if (!value.contains("kind") || !value.at("kind").is_string()) fail(pointer + "/kind", "expected a string");
  const auto kind = value.at("kind").get<std::string>();
  if (kind == "constant") {
    reject_unknown_keys(value, {"kind", "value"}, pointer);
    return FunctionSpec::constant(require_int(value, "value", pointer));
  }
  if (kind == "affine") {
    reject_unknown_keys(value, {"kind", "a", "c"}, pointer);
    return FunctionSpec::affine(require_int(value, "a", pointer), require_int(value, "c", pointer));
  }
  if (kind == "table") {
    reject_unknown_keys(value, {"kind", "values", "tail"}, pointer);
    if (!value.contains("values") || !value.at("values").is_array()) {
      fail(pointer + "/values", "expected an array");
    }
    std::vector<std::int64_t> values;
    const auto& items = value.at("values");
    for (std::size_t k = 0; k < items.size(); ++k) {
      if (!items[k].is_number_integer()) fail(pointer + "/values/" + std::to_string(k), "expected an integer");
      values.push_back(items[k].get<std::int64_t>());
    }
    if (!value.contains("tail")) fail(pointer + "/tail", "missing field");
    return FunctionSpec::table(std::move(values), function_from_json(value.at("tail"), pointer + "/tail"));
  }
  if (kind == "generated") {
    reject_unknown_keys(value, {"kind", "values"}, pointer);
    if (!value.contains("values") || !value.at("values").is_array()) {
      fail(pointer + "/values", "expected an array");
    }
    std::vector<BigInt> values;
    const auto& items = value.at("values");
    for (std::size_t k = 0; k < items.size(); ++k) {
      const std::string at = pointer + "/values/" + std::to_string(k);
      if (!items[k].is_string()) fail(at, "expected a decimal string");
      auto parsed = parse_decimal(items[k].get<std::string>());
      if (!parsed) fail(at, "not a decimal integer");
      values.push_back(std::move(*parsed));
    }
    return FunctionSpec::generated(std::move(values));
  }
  fail(pointer + "/kind", "unknown kind \"" + kind + "\"");
}

ScheduleSpec schedule_from_json(const Json& value) {
  if (!value.is_object()) fail("", "expected an object");
  reject_unknown_keys(value, {"r", "s", "b", "construction"}, "");
  for (const char* key : {"r", "s", "b"}) {
    if (!value.contains(key)) fail(std::string("/") + key, "missing field");
  }
  ScheduleSpec spec{function_from_json(value.at("r"), "/r"), function_from_json(value.at("s"), "/s"),
                    function_from_json(value.at("b"), "/b"), std::nullopt};
  if (value.contains("construction")) {
    spec.construction = provenance_from_json(value.at("construction"), "/construction");
  }
  return spec;
}

ScheduleSpec parse_schedule(std::string_view text) {
  Json parsed;
  try {
    parsed = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail("", std::string("malformed JSON: ") + e.what());
  }
  return schedule_from_json(parsed);
}

ScheduleSpec load_schedule(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_schedule(buffer.str());
}

void save_json(const std::filesystem::path& path, const Json& value) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ParseError, "cannot write " + path.string());
  out << canonical_dump(value) << '\n';
}

FunctionSpec parse_memory_argument(std::string_view argument) {
  constexpr std::string_view prefix = "constant:";
  if (argument.substr(0, prefix.size()) == prefix) {
    auto value = parse_decimal(argument.substr(prefix.size()));
    if (!value || *value < 0 || !value->fits_slong_p()) {
      throw Error(ErrorKind::ParseError, "bad memory shorthand \"" + std::string(argument) + "\"");
    }
    return FunctionSpec::constant(value->get_si());
  }
  std::ifstream in{std::string(argument)};
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + std::string(argument));
  std::stringstream buffer;
  buffer << in.rdbuf();
  Json parsed;
  try {
    parsed = Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    fail("", std::string("malformed JSON: ") + e.what());
  }
  return function_from_json(parsed);
}

Json to_json(const RestrictionReport& report) {
  Json out{{"horizon", report.horizon},
           {"validity_ok", report.validity_ok},
           {"restriction1_ok", report.restriction1_ok},
           {"max_forgotten_through", report.max_forgotten_through},
           {"forgotten_through_grew", report.forgotten_through_grew}};
  out["first_invalid"] = report.first_invalid
                             ? Json{{"index", report.first_invalid->index}, {"reason", report.first_invalid->reason}}
                             : Json(nullptr);
  out["restriction1_first_violation"] =
      report.restriction1_first_violation ? Json(*report.restriction1_first_violation) : Json(nullptr);
  out["restriction2_last_violation"] =
      report.restriction2_last_violation ? Json(*report.restriction2_last_violation) : Json(nullptr);
  return out;
}

}  // namespace robinhood
