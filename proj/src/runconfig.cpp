#include "sparsedoa/runconfig.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string_view>

namespace sparsedoa {
namespace {

[[noreturn]] void fail_at(int line, const std::string& message) {
  throw std::invalid_argument("line " + std::to_string(line) + ": " + message);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// quote-aware comment stripper; the subset has no string escapes
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool bare_key(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  return true;
}

struct ValueParser {
  std::string_view text;
  std::size_t pos = 0;
  int line = 0;

  void skip_space() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }

  nlohmann::json parse_value() {
    skip_space();
    if (pos >= text.size()) fail_at(line, "missing value");
    if (text[pos] == '"') return parse_string();
    if (text[pos] == '[') return parse_array();
    return parse_scalar();
  }

  nlohmann::json parse_string() {
    ++pos;
    const auto close = text.find('"', pos);
    if (close == std::string_view::npos) fail_at(line, "unterminated string");
    auto value = std::string(text.substr(pos, close - pos));
    pos = close + 1;
    return value;
  }

  nlohmann::json parse_array() {
    ++pos;
    auto array = nlohmann::json::array();
    for (;;) {
      skip_space();
      if (pos >= text.size()) fail_at(line, "unterminated array");
      if (text[pos] == ']') {
        ++pos;
        return array;
      }
      array.push_back(parse_value());
      skip_space();
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        continue;
      }
      if (pos < text.size() && text[pos] == ']') {
        ++pos;
        return array;
      }
      fail_at(line, "expected ',' or ']' in array");
    }
  }

  nlohmann::json parse_scalar() {
    const auto start = pos;
    while (pos < text.size() && text[pos] != ',' && text[pos] != ']' &&
           text[pos] != ' ' && text[pos] != '\t')
      ++pos;
    const auto token = text.substr(start, pos - start);
    if (token == "true") return true;
    if (token == "false") return false;

    bool integral = !token.empty();
    for (std::size_t i = (token[0] == '+' || token[0] == '-') ? 1 : 0;
         i < token.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(token[i]))) integral = false;
    if (integral && token != "+" && token != "-") {
      if (token[0] == '-') {
        std::int64_t value = 0;
        auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || end != token.data() + token.size())
          fail_at(line, "integer out of range: '" + std::string(token) + "'");
        return value;
      }
      std::uint64_t value = 0;
      const char* begin = token.data() + (token[0] == '+' ? 1 : 0);
      auto [end, ec] = std::from_chars(begin, token.data() + token.size(), value);
      if (ec != std::errc{} || end != token.data() + token.size())
        fail_at(line, "integer out of range: '" + std::string(token) + "'");
      return value;
    }

    const std::string copy(token);
    char* end = nullptr;
    const double value = std::strtod(copy.c_str(), &end);
    if (!copy.empty() && end == copy.c_str() + copy.size()) return value;
    fail_at(line, "cannot parse value '" + copy + "'");
  }
};

}  // namespace

nlohmann::json toml_subset_parse(const std::string& text) {
  auto root = nlohmann::json::object();
  nlohmann::json* current = &root;

  int line_no = 0;
  std::size_t cursor = 0;
  while (cursor <= text.size()) {
    const auto newline = text.find('\n', cursor);
    const auto raw = std::string_view(text).substr(
        cursor, newline == std::string::npos ? text.size() - cursor : newline - cursor);
    cursor = newline == std::string::npos ? text.size() + 1 : newline + 1;
    ++line_no;

    const auto body = trim(strip_comment(raw));
    if (body.empty()) continue;

    if (body.front() == '[') {
      if (body.back() != ']') fail_at(line_no, "malformed table header");
      const auto name = trim(body.substr(1, body.size() - 2));
      if (name.find('.') != std::string_view::npos)
        fail_at(line_no, "dotted table headers are not supported");
      if (!bare_key(name)) fail_at(line_no, "malformed table header");
      const std::string key(name);
      if (root.contains(key)) fail_at(line_no, "duplicate table '" + key + "'");
      root[key] = nlohmann::json::object();
      current = &root[key];
      continue;
    }

    const auto equals = body.find('=');
    if (equals == std::string_view::npos)
      fail_at(line_no, "expected 'key = value'");
    const auto key_text = trim(body.substr(0, equals));
    if (!bare_key(key_text)) fail_at(line_no, "malformed key");
    const std::string key(key_text);
    if (current->contains(key)) fail_at(line_no, "duplicate key '" + key + "'");

    ValueParser parser{body.substr(equals + 1), 0, line_no};
    auto value = parser.parse_value();
    parser.skip_space();
    if (parser.pos != parser.text.size())
      fail_at(line_no, "unexpected trailing characters after value");
    (*current)[key] = std::move(value);
  }
  return root;
}

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw std::invalid_argument("cannot read " + path);
  const std::string text(std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>{});
  if (std::filesystem::path(path).extension() == ".json") {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(path + ": " + e.what());
    }
  }
  try {
    return toml_subset_parse(text);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

GeometryChoice parse_geometry_spec(const std::string& spec, std::string* warning) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("geometry spec '" + spec +
                                "' must look like kind:param[,param...]");
  const auto kind = spec.substr(0, colon);

  std::vector<int> params;
  std::string_view rest = std::string_view(spec).substr(colon + 1);
  while (true) {
    const auto comma = rest.find(',');
    const auto token = trim(rest.substr(0, comma));
    int value = 0;
    auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || end != token.data() + token.size())
      throw std::invalid_argument("geometry spec '" + spec +
                                  "' has a non-integer parameter");
    params.push_back(value);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }

  auto arity = [&](std::size_t n) {
    if (params.size() != n)
      throw std::invalid_argument("geometry spec '" + spec + "' needs " +
                                  std::to_string(n) + " parameters");
  };
  if (kind == "coprime") {
    arity(4);
    return build_coprime_linear(params[0], params[1], params[2], params[3], warning);
  }
  if (kind == "nested") {
    arity(2);
    return build_nested_linear(params[0], params[1]);
  }
  if (kind == "ula") {
    arity(1);
    return build_full_ula(params[0]);
  }
  if (kind == "sirna") {
    arity(2);
    return build_sirna(params[0], params[1]);
  }
  if (kind == "sirca") {
    arity(1);
    return build_sirca(params[0]);
  }
  throw std::invalid_argument("unknown geometry kind in '" + spec + "'");
}

namespace {

bool integral_number(const nlohmann::json& j) {
  return j.is_number_integer() || j.is_number_unsigned();
}

}  // namespace

nlohmann::json ExperimentSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["geometry"] = geometry;
  j["methods"] = methods;
  j["sweep"] = sweep;
  j["sweep-values"] = sweep_values;
  j["snr-db"] = snr_db;
  j["snapshots"] = snapshots;
  j["trials"] = trials;
  j["seed"] = seed;
  j["lag-count"] = lag_count;
  j["grid-step"] = grid_step;
  j["sources"] = sources;
  j["output-dir"] = output_dir;
  return j;
}

ExperimentSpec parse_experiment_config(const nlohmann::json& config,
                                       std::vector<std::string>& errors) {
  ExperimentSpec spec;
  if (!config.is_object()) {
    errors.push_back("config root must be a table of keys");
    return spec;
  }

  static const std::set<std::string> known = {
      "kind",    "geometry", "methods",   "sweep",     "sweep-values",
      "snr-db",  "snapshots", "trials",   "seed",      "lag-count",
      "grid-step", "sources", "output-dir"};
  for (const auto& item : config.items())
    if (!known.count(item.key())) errors.push_back("unknown key '" + item.key() + "'");

  bool kind_valid = false;
  if (!config.contains("kind")) {
    errors.push_back("kind is required ('linear-sweep' or 'planar-rmse')");
  } else if (!config["kind"].is_string()) {
    errors.push_back("kind must be a string");
  } else {
    spec.kind = config["kind"].get<std::string>();
    kind_valid = spec.kind == "linear-sweep" || spec.kind == "planar-rmse";
    if (!kind_valid)
      errors.push_back("kind must be 'linear-sweep' or 'planar-rmse' (got '" +
                       spec.kind + "')");
  }

  bool geometry_is_planar = false, geometry_valid = false;
  if (!config.contains("geometry")) {
    errors.push_back("geometry is required");
  } else if (!config["geometry"].is_string()) {
    errors.push_back("geometry must be a string spec");
  } else {
    spec.geometry = config["geometry"].get<std::string>();
    try {
      auto choice = parse_geometry_spec(spec.geometry);
      geometry_is_planar = std::holds_alternative<PlanarArrayGeometry>(choice);
      geometry_valid = true;
    } catch (const std::invalid_argument& e) {
      errors.push_back(e.what());
    }
  }

  if (config.contains("methods")) {
    bool shape_ok = config["methods"].is_array() && !config["methods"].empty();
    if (shape_ok)
      for (const auto& m : config["methods"])
        if (!m.is_string()) shape_ok = false;
    if (!shape_ok) {
      errors.push_back("methods must be a non-empty array of strings");
    } else {
      spec.methods.clear();
      for (const auto& m : config["methods"]) {
        auto name = m.get<std::string>();
        if (name != "mnm" && name != "music")
          errors.push_back("unknown method '" + name + "'");
        else
          spec.methods.push_back(name);
      }
    }
  }

  bool sweep_valid = true;
  if (config.contains("sweep")) {
    if (!config["sweep"].is_string()) {
      errors.push_back("sweep must be a string");
      sweep_valid = false;
    } else {
      spec.sweep = config["sweep"].get<std::string>();
      sweep_valid = spec.sweep == "snr-db" || spec.sweep == "snapshots";
      if (!sweep_valid)
        errors.push_back("sweep must be 'snr-db' or 'snapshots' (got '" + spec.sweep +
                         "')");
    }
  }

  bool values_shape_ok = config.contains("sweep-values") &&
                         config["sweep-values"].is_array() &&
                         !config["sweep-values"].empty();
  if (values_shape_ok)
    for (const auto& v : config["sweep-values"])
      if (!v.is_number()) values_shape_ok = false;
  if (!values_shape_ok) {
    errors.push_back("sweep-values must be a non-empty array of numbers");
  } else {
    for (const auto& v : config["sweep-values"])
      spec.sweep_values.push_back(v.get<double>());
    if (sweep_valid && spec.sweep == "snapshots") {
      for (double v : spec.sweep_values)
        if (v < 1.0 || v != std::floor(v)) {
          errors.push_back("sweep-values must be positive whole snapshot counts");
          break;
        }
    }
  }

  if (config.contains("snr-db")) {
    if (!config["snr-db"].is_number())
      errors.push_back("snr-db must be a number");
    else
      spec.snr_db = config["snr-db"].get<double>();
  }

  auto positive_int = [&](const char* key, int& out, int minimum) {
    if (!config.contains(key)) return;
    if (!integral_number(config[key]) || config[key].get<long long>() < minimum) {
      errors.push_back(std::string(key) + " must be " +
                       (minimum > 0 ? "a positive integer" : "a non-negative integer"));
      return;
    }
    out = config[key].get<int>();
  };
  positive_int("snapshots", spec.snapshots, 1);
  positive_int("trials", spec.trials, 1);
  positive_int("lag-count", spec.lag_count, 0);

  if (config.contains("seed")) {
    const auto& s = config["seed"];
    if (s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0))
      spec.seed = s.get<std::uint64_t>();
    else
      errors.push_back("seed must be a non-negative integer");
  }

  if (config.contains("grid-step")) {
    if (!config["grid-step"].is_number() || config["grid-step"].get<double>() <= 0.0)
      errors.push_back("grid-step must be positive");
    else
      spec.grid_step = config["grid-step"].get<double>();
  }

  if (config.contains("output-dir")) {
    if (!config["output-dir"].is_string())
      errors.push_back("output-dir must be a string");
    else
      spec.output_dir = config["output-dir"].get<std::string>();
  }

  if (config.contains("sources")) {
    if (!config["sources"].is_array()) {
      errors.push_back("sources must be an array of [ux, uy] or [ux, uy, power]");
    } else {
      int index = 0;
      for (const auto& entry : config["sources"]) {
        const std::string label = "sources[" + std::to_string(index++) + "]";
        bool shape_ok = entry.is_array() && (entry.size() == 2 || entry.size() == 3);
        if (shape_ok)
          for (const auto& c : entry)
            if (!c.is_number()) shape_ok = false;
        if (!shape_ok) {
          errors.push_back(label + " must be [ux, uy] or [ux, uy, power]");
          continue;
        }
        std::array<double, 3> source{entry[0].get<double>(), entry[1].get<double>(),
                                     entry.size() == 3 ? entry[2].get<double>() : 1.0};
        if (std::abs(source[0]) > 1.0 || std::abs(source[1]) > 1.0)
          errors.push_back(label + " direction cosines must lie in [-1, 1]");
        else if (source[2] <= 0.0)
          errors.push_back(label + " power must be positive");
        else
          spec.sources.push_back(source);
      }
    }
  }

  if (kind_valid && geometry_valid) {
    if (spec.kind == "planar-rmse" && !geometry_is_planar)
      errors.push_back("planar-rmse requires a planar geometry (sirna/sirca)");
    if (spec.kind == "linear-sweep" && geometry_is_planar)
      errors.push_back("linear-sweep requires a linear geometry (coprime/nested/ula)");
  }
  if (kind_valid && spec.kind == "planar-rmse" && spec.sources.empty() &&
      !config.contains("sources"))
    errors.push_back("planar-rmse requires sources");
  if (kind_valid && spec.kind == "linear-sweep" && config.contains("sources"))
    errors.push_back(
        "sources are fixed by the resolution criterion for linear-sweep; remove them");

  return spec;
}

}  // namespace sparsedoa
