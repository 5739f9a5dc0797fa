#include "protoattn/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "protoattn/errors.hpp"

namespace protoattn {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("invalid value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(v) + "' for " + std::string(key));
}

std::string fmt_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Field {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field int_field(const char* key, T RunConfig::*member) {
  return {[=](RunConfig& c, std::string_view v) { c.*member = parse_number<T>(key, v); },
          [=](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field model_int(const char* key, int ModelConfig::*member) {
  return {[=](RunConfig& c, std::string_view v) { c.model.*member = parse_number<int>(key, v); },
          [=](const RunConfig& c) { return std::to_string(c.model.*member); }};
}

Field model_bool(const char* key, bool ModelConfig::*member) {
  return {[=](RunConfig& c, std::string_view v) { c.model.*member = parse_bool(key, v); },
          [=](const RunConfig& c) { return std::string(c.model.*member ? "true" : "false"); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"env", {[](RunConfig& c, std::string_view v) { c.env = parse_env_id(v); },
               [](const RunConfig& c) { return std::string(env_name(c.env)); }}},
      {"population", int_field("population", &RunConfig::population)},
      {"generations", int_field("generations", &RunConfig::generations)},
      {"seeds_per_gen", int_field("seeds_per_gen", &RunConfig::seeds_per_gen)},
      {"test_every", int_field("test_every", &RunConfig::test_every)},
      {"test_seeds", int_field("test_seeds", &RunConfig::test_seeds)},
      {"sigma0", {[](RunConfig& c, std::string_view v) { c.sigma0 = parse_number<double>("sigma0", v); },
                  [](const RunConfig& c) { return fmt_double(c.sigma0); }}},
      {"workers", int_field("workers", &RunConfig::workers)},
      {"out_dir", {[](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); },
                   [](const RunConfig& c) { return c.out_dir; }}},
      {"master_seed", int_field("master_seed", &RunConfig::master_seed)},
      {"max_steps", int_field("max_steps", &RunConfig::max_steps)},
      {"record_wall_time",
       {[](RunConfig& c, std::string_view v) { c.record_wall_time = parse_bool("record_wall_time", v); },
        [](const RunConfig& c) { return std::string(c.record_wall_time ? "true" : "false"); }}},
      {"image_size", model_int("image_size", &ModelConfig::image_size)},
      {"bits", model_int("bits", &ModelConfig::bits)},
      {"d_in", model_int("d_in", &ModelConfig::d_in)},
      {"d_q", model_int("d_q", &ModelConfig::d_q)},
      {"k", model_int("k", &ModelConfig::k)},
      {"n_h", model_int("n_h", &ModelConfig::n_h)},
      {"n_out", model_int("n_out", &ModelConfig::n_out)},
      {"conv_layers", model_int("conv_layers", &ModelConfig::conv_layers)},
      {"conv_kernel", model_int("conv_kernel", &ModelConfig::conv_kernel)},
      {"use_prelu", model_bool("use_prelu", &ModelConfig::use_prelu)},
      {"use_conv", model_bool("use_conv", &ModelConfig::use_conv)},
      {"connectivity",
       {[](RunConfig& c, std::string_view v) {
          const int n = parse_number<int>("connectivity", v);
          if (n != 4 && n != 8) throw ConfigError("connectivity must be 4 or 8");
          c.model.connectivity = n == 4 ? Connectivity::Four : Connectivity::Eight;
        },
        [](const RunConfig& c) { return std::to_string(static_cast<int>(c.model.connectivity)); }}},
      {"action_mode",
       {[](RunConfig& c, std::string_view v) {
          if (v == "continuous")
            c.model.action_mode = ActionMode::Continuous;
          else if (v == "discrete")
            c.model.action_mode = ActionMode::Discrete;
          else
            throw ConfigError("action_mode must be continuous or discrete");
        },
        [](const RunConfig& c) {
          return std::string(c.model.action_mode == ActionMode::Discrete ? "discrete" : "continuous");
        }}},
  };
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& [name, field] : fields())
    if (name == key) return &field;
  return nullptr;
}

void assign(RunConfig& c, std::string_view key, std::string_view value) {
  const Field* f = find_field(key);
  if (f == nullptr) throw ConfigError("unknown key '" + std::string(key) + "'");
  f->set(c, value);
  // The action head follows the environment unless set explicitly later.
  if (key == "env")
    c.model.action_mode = make_env(c.env)->discrete_actions() ? ActionMode::Discrete : ActionMode::Continuous;
}

}  // namespace

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : fields()) k.push_back(name);
    return k;
  }();
  return keys;
}

void RunConfig::validate() const {
  model.validate();
  if (model.image_size != kFrameSize)
    throw ConfigError("image_size must be " + std::to_string(kFrameSize) + " (environment frame size)");
  const bool discrete = make_env(env)->discrete_actions();
  if (discrete != (model.action_mode == ActionMode::Discrete))
    throw ConfigError("action_mode does not match the environment's action space");
  if (population < 4) throw ConfigError("population must be at least 4");
  if (generations < 1) throw ConfigError("generations must be at least 1");
  if (seeds_per_gen < 1 || seeds_per_gen >= 10000) throw ConfigError("seeds_per_gen must be in [1, 9999]");
  if (generations > 100000) throw ConfigError("generations must be at most 100000 (keeps training seeds below test seeds)");
  if (test_every < 0) throw ConfigError("test_every must be non-negative");
  if (test_seeds < 0) throw ConfigError("test_seeds must be non-negative");
  if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
  if (workers < 0) throw ConfigError("workers must be non-negative");
  if (max_steps < 0) throw ConfigError("max_steps must be non-negative");
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
  RunConfig c;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'", line_no);
    try {
      assign(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what(), line_no);
    }
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path);
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
  assign(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(config) + "\n";
  return out;
}

}  // namespace protoattn
