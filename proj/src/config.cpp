#include "nlheat/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "nlheat/errors.hpp"

namespace nlheat {

using nlohmann::json;

namespace {

void only_keys(const json& obj, std::string_view section, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) {
    throw ConfigError("config section '" + std::string(section) + "' must be an object");
  }
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (std::string_view k : keys) known = known || key == k;
    if (!known) {
      throw ConfigError("unknown config key '" + std::string(section) + "." + key + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

SourceMode parse_source_mode(std::string_view name) {
  if (name == "discrete") return SourceMode::discrete;
  if (name == "refined") return SourceMode::refined;
  throw ConfigError("source mode must be 'discrete' or 'refined', got '" + std::string(name) + "'");
}

std::string_view to_string(SourceMode mode) {
  return mode == SourceMode::discrete ? "discrete" : "refined";
}

BenchMode parse_bench_mode(std::string_view name) {
  if (name == "strong") return BenchMode::strong;
  if (name == "weak") return BenchMode::weak;
  throw ConfigError("bench mode must be 'strong' or 'weak', got '" + std::string(name) + "'");
}

BusyModel parse_busy_model(std::string_view name) {
  if (name == "measured") return BusyModel::measured;
  if (name == "synthetic") return BusyModel::synthetic;
  throw ConfigError("busy model must be 'measured' or 'synthetic', got '" + std::string(name) + "'");
}

AppConfig parse_config(std::string_view text) {
  AppConfig cfg;
  try {
    const json j = json::parse(text);
    only_keys(j, "", {"mesh", "model", "time", "cluster", "validate", "bench", "balance_demo", "seed",
                      "output"});
    RunConfig& run = cfg.run;
    if (j.contains("mesh")) {
      const json& s = j["mesh"];
      only_keys(s, "mesh", {"n", "p", "m"});
      read(s, "n", run.n);
      read(s, "p", run.p);
      read(s, "m", run.m);
    }
    if (j.contains("model")) {
      const json& s = j["model"];
      only_keys(s, "model", {"conductivity", "source_mode"});
      read(s, "conductivity", run.conductivity);
      if (s.contains("source_mode")) run.source_mode = parse_source_mode(s["source_mode"].get<std::string>());
    }
    if (j.contains("time")) {
      const json& s = j["time"];
      only_keys(s, "time", {"dt", "steps", "allow_unstable"});
      if (s.contains("dt")) {
        if (s["dt"].is_string()) {
          if (s["dt"].get<std::string>() != "auto") throw ConfigError("time.dt must be a number or \"auto\"");
          run.dt.reset();
        } else {
          run.dt = s["dt"].get<double>();
        }
      }
      read(s, "steps", run.steps);
      read(s, "allow_unstable", run.allow_unstable);
    }
    if (j.contains("cluster")) {
      const json& s = j["cluster"];
      only_keys(s, "cluster", {"nodes", "capacity", "balance_interval", "busy_model"});
      read(s, "nodes", run.nodes);
      read(s, "capacity", run.capacity);
      read(s, "balance_interval", run.balance_interval);
      if (s.contains("busy_model")) run.busy_model = parse_busy_model(s["busy_model"].get<std::string>());
    }
    if (j.contains("validate")) {
      const json& s = j["validate"];
      only_keys(s, "validate", {"n", "m", "epsilon", "conductivity", "final_time", "dt_fraction", "source_mode"});
      read(s, "n", cfg.validate.n);
      read(s, "m", cfg.validate.m);
      read(s, "epsilon", cfg.validate.epsilon);
      read(s, "conductivity", cfg.validate.conductivity);
      read(s, "final_time", cfg.validate.final_time);
      read(s, "dt_fraction", cfg.validate.dt_fraction);
      if (s.contains("source_mode")) {
        cfg.validate.source_mode = parse_source_mode(s["source_mode"].get<std::string>());
      }
    }
    if (j.contains("bench")) {
      const json& s = j["bench"];
      only_keys(s, "bench", {"mode", "n", "m", "steps", "sd_counts", "workers", "weak_p", "weak_max_tiles"});
      if (s.contains("mode")) cfg.bench.mode = parse_bench_mode(s["mode"].get<std::string>());
      read(s, "n", cfg.bench.n);
      read(s, "m", cfg.bench.m);
      read(s, "steps", cfg.bench.steps);
      read(s, "sd_counts", cfg.bench.sd_counts);
      read(s, "workers", cfg.bench.workers);
      read(s, "weak_p", cfg.bench.weak_p);
      read(s, "weak_max_tiles", cfg.bench.weak_max_tiles);
    }
    if (j.contains("balance_demo")) {
      const json& s = j["balance_demo"];
      only_keys(s, "balance_demo", {"n", "p", "m", "start_counts", "max_iterations", "required_iterations"});
      read(s, "n", cfg.demo.n);
      read(s, "p", cfg.demo.p);
      read(s, "m", cfg.demo.m);
      read(s, "start_counts", cfg.demo.start_counts);
      read(s, "max_iterations", cfg.demo.max_iterations);
      read(s, "required_iterations", cfg.demo.required_iterations);
    }
    read(j, "seed", cfg.seed);
    read(j, "output", cfg.output);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace nlheat
