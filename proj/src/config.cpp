#include "cfc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "cfc/error.hpp"

namespace cfc {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& type, const std::string& value) {
  throw ConfigError("key '" + key + "' expects " + type + ", got '" + value + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& type, const std::string& value) {
  T out{};
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end || value.empty()) bad_value(key, type, value);
  return out;
}

int to_int(const std::string& key, const std::string& v) { return parse_number<int>(key, "an integer", v); }
double to_double(const std::string& key, const std::string& v) { return parse_number<double>(key, "a number", v); }

template <typename F>
auto to_enum(const std::string& key, const std::string& type, const std::string& v, F parse) {
  try {
    return parse(v);
  } catch (const InvalidArgument&) {
    bad_value(key, type, v);
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

struct Setter {
  std::string type;
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> apply;
};

Setter int_field(int RunConfig::*field) {
  return {"integer", [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = to_int(k, v); }};
}

template <typename Get>
Setter double_at(Get get) {
  return {"number", [get](RunConfig& c, const std::string& k, const std::string& v) { get(c) = to_double(k, v); }};
}

template <typename Get>
Setter int_at(Get get) {
  return {"integer", [get](RunConfig& c, const std::string& k, const std::string& v) { get(c) = to_int(k, v); }};
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["command"] = {"command (simulate, mpc, bench, validate)", [](RunConfig& c, const std::string& k, const std::string& v) {
                      c.command = to_enum(k, "a command (simulate, mpc, bench, validate)", v, parse_command);
                    }};
    t["scene"] = {"scene name", [](RunConfig& c, const std::string&, const std::string& v) { c.scene = v; }};
    t["stepper"] = {"stepper (cf, cf_extended, qp)", [](RunConfig& c, const std::string& k, const std::string& v) {
                      c.stepper = to_enum(k, "a stepper (cf, cf_extended, qp)", v, parse_stepper);
                    }};
    t["steps"] = int_field(&RunConfig::steps);
    t["seeds"] = {"seed list", [](RunConfig& c, const std::string& k, const std::string& v) {
                    try {
                      c.seeds = parse_seed_list(v);
                    } catch (const InvalidArgument&) {
                      bad_value(k, "a seed list such as 0,1,2 or 0-9", v);
                    }
                  }};
    t["out"] = {"path", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }};
    t["task"] = {"task kind", [](RunConfig& c, const std::string& k, const std::string& v) {
                   c.task = to_enum(k, "a task kind (rotation, flipping, in_air, trifinger_like)", v, parse_task_kind);
                 }};

    t["scene.n_cube"] = int_at([](RunConfig& c) -> int& { return c.scene_params.n_cube; });
    t["scene.drive_force"] = double_at([](RunConfig& c) -> double& { return c.scene_params.drive_force; });
    for (const char* name : {"k", "d", "mu"}) {
      const std::string n = name;
      t["scene." + n] = {"number", [n](RunConfig& c, const std::string& k, const std::string& v) {
                           const double x = to_double(k, v);
                           if (n == "k") c.scene_params.k = x;
                           if (n == "d") c.scene_params.d = x;
                           if (n == "mu") c.scene_params.mu = x;
                         }};
    }

    t["mpc.horizon"] = int_at([](RunConfig& c) -> int& { return c.mpc.horizon; });
    t["mpc.u_min"] = double_at([](RunConfig& c) -> double& { return c.mpc.u_min; });
    t["mpc.u_max"] = double_at([](RunConfig& c) -> double& { return c.mpc.u_max; });
    t["mpc.max_iterations"] = int_at([](RunConfig& c) -> int& { return c.mpc.max_iterations; });
    t["mpc.tolerance"] = double_at([](RunConfig& c) -> double& { return c.mpc.tolerance; });
    t["mpc.rollout_cap"] = int_at([](RunConfig& c) -> int& { return c.mpc.rollout_cap; });
    t["mpc.success_window"] = int_at([](RunConfig& c) -> int& { return c.mpc.success_window; });
    t["mpc.k"] = double_at([](RunConfig& c) -> double& { return c.mpc.k; });
    t["mpc.gamma"] = double_at([](RunConfig& c) -> double& { return c.mpc.gamma; });
    t["mpc.mode"] = {"mode (softplus, hard_max)", [](RunConfig& c, const std::string& k, const std::string& v) {
                       if (v == "softplus") {
                         c.mpc.mode = CfMode::kSoftplus;
                       } else if (v == "hard_max") {
                         c.mpc.mode = CfMode::kHardMax;
                       } else {
                         bad_value(k, "a mode (softplus, hard_max)", v);
                       }
                     }};
    t["mpc.n_d"] = int_at([](RunConfig& c) -> int& { return c.mpc.geometry.n_d; });
    t["mpc.contact_margin"] = double_at([](RunConfig& c) -> double& { return c.mpc.geometry.contact_margin; });
    t["mpc.w_contact"] = double_at([](RunConfig& c) -> double& { return c.mpc.cost.w_contact; });
    t["mpc.w_grasp"] = double_at([](RunConfig& c) -> double& { return c.mpc.cost.w_grasp; });
    t["mpc.w_control"] = double_at([](RunConfig& c) -> double& { return c.mpc.cost.w_control; });
    t["mpc.w_position"] = double_at([](RunConfig& c) -> double& { return c.mpc.cost.w_position; });
    t["mpc.w_quat"] = double_at([](RunConfig& c) -> double& { return c.mpc.cost.w_quat; });

    t["bench.steppers"] = {"stepper list", [](RunConfig& c, const std::string& k, const std::string& v) {
                             std::vector<StepperKind> list;
                             for (const std::string& s : split(v, ',')) {
                               list.push_back(to_enum(k, "a comma-separated stepper list", s, parse_stepper));
                             }
                             c.bench_steppers = list;
                           }};
    t["bench.repetitions"] = int_field(&RunConfig::bench_repetitions);
    return t;
  }();
  return table;
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "simulate") return Command::kSimulate;
  if (name == "mpc") return Command::kMpc;
  if (name == "bench") return Command::kBench;
  if (name == "validate") return Command::kValidate;
  throw InvalidArgument("unknown command '" + name + "' (available: simulate, mpc, bench, validate)");
}

const char* command_name(Command command) {
  switch (command) {
    case Command::kSimulate: return "simulate";
    case Command::kMpc: return "mpc";
    case Command::kBench: return "bench";
    case Command::kValidate: return "validate";
  }
  return "unknown";
}

void RunConfig::validate() const {
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (steps < 0) throw ConfigError("steps must be nonnegative");
  if (out_dir.empty()) throw ConfigError("out must not be empty");
  if (bench_steppers.empty()) throw ConfigError("bench.steppers must not be empty");
  if (bench_repetitions < 2) throw ConfigError("bench.repetitions must be at least 2");
  if (scene_params.n_cube < 0) throw ConfigError("scene.n_cube must be nonnegative");
  try {
    mpc.cost.validate();
    mpc.geometry.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (mpc.horizon < 1) throw ConfigError("mpc.horizon must be at least 1");
  if (!(mpc.u_min < mpc.u_max)) throw ConfigError("mpc.u_min must be below mpc.u_max");
}

Overrides parse_config_text(const std::string& text, const std::string& origin) {
  Overrides out;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(number) + ": empty key");
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

Overrides read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

Overrides parse_flag_overrides(const std::vector<std::string>& args) {
  Overrides out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0 || a.size() == 2) throw ConfigError("unexpected argument '" + a + "'");
    const std::string body = a.substr(2);
    const auto eq = body.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
    } else if (i + 1 < args.size()) {
      out.emplace_back(body, args[++i]);
    } else {
      throw ConfigError("flag '" + a + "' needs a value");
    }
  }
  return out;
}

RunConfig apply_overrides(RunConfig base, const Overrides& overrides) {
  const auto& table = setters();
  for (const auto& [key, value] : overrides) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
    it->second.apply(base, key, value);
  }
  return base;
}

std::map<std::string, std::string> config_keys() {
  std::map<std::string, std::string> out;
  for (const auto& [key, setter] : setters()) out[key] = setter.type;
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const std::string& item : split(text, ',')) {
    if (item.empty()) throw InvalidArgument("empty seed entry");
    const auto dash = item.find('-');
    auto number = [](const std::string& s) {
      std::uint64_t v = 0;
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw InvalidArgument("bad seed '" + s + "'");
      }
      return v;
    };
    if (dash == std::string::npos) {
      out.push_back(number(item));
    } else {
      const std::uint64_t lo = number(trim(item.substr(0, dash)));
      const std::uint64_t hi = number(trim(item.substr(dash + 1)));
      if (hi < lo) throw InvalidArgument("seed range '" + item + "' is decreasing");
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    }
  }
  if (out.empty()) throw InvalidArgument("empty seed list");
  return out;
}

}  // namespace cfc
