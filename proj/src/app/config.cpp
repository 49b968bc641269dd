#include <algorithm>
#include <string_view>

#include <fmt/format.h>

#include "nqst/app.hpp"

namespace nqst::app {

std::string ErrorReport::to_json() const {
  return Json{{"error", {{"category", category}, {"message", message}, {"exit_code", exit_code}}}}.dump();
}

ErrorReport classify(const std::exception& e) {
  if (dynamic_cast<const DimensionError*>(&e)) return {kExitDimension, "dimension", e.what()};
  if (dynamic_cast<const ValidationError*>(&e)) return {kExitValidation, "validation", e.what()};
  if (dynamic_cast<const EnumerationBoundError*>(&e)) return {kExitEnumeration, "enumeration_bound", e.what()};
  if (dynamic_cast<const IoError*>(&e)) return {kExitIo, "io", e.what()};
  if (dynamic_cast<const Json::exception*>(&e)) return {kExitValidation, "validation", e.what()};
  return {kExitInternal, "internal", e.what()};
}

std::vector<std::string> task_names() {
  return {"generate",  "train",     "observe",      "evaluate", "demo-ising",
          "demo-tfim", "demo-complex", "demo-ndo", "demo-rydberg"};
}

bool is_task(const std::string& name) {
  const auto names = task_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Json train_config_to_json(const TrainConfig& c) {
  return Json{{"n_hidden", c.n_hidden},
              {"learning_rate", c.learning_rate},
              {"final_learning_rate", c.final_learning_rate},
              {"batch_size", c.batch_size},
              {"cd_steps", c.cd_steps},
              {"epochs", c.epochs},
              {"weight_decay", c.weight_decay},
              {"init_scale", c.init_scale}};
}

TrainConfig train_config_from_json(const Json& j) {
  TrainConfig c;
  c.n_hidden = j.value("n_hidden", c.n_hidden);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.final_learning_rate = j.value("final_learning_rate", c.final_learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.cd_steps = j.value("cd_steps", c.cd_steps);
  c.epochs = j.value("epochs", c.epochs);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.init_scale = j.value("init_scale", c.init_scale);
  c.validate();
  return c;
}

namespace {

Json sampling_to_json(const SamplingOptions& s) {
  return Json{{"n_samples", s.n_samples}, {"burn_in", s.burn_in}, {"n_chains", s.n_chains}};
}

// Reads `key` into `field`, keeping the current value when absent.
template <class T>
void read(const Json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void read_train(const Json& j, TrainConfig& c) {
  if (!j.contains("train")) return;
  // Start from the demo's own defaults rather than TrainConfig's.
  Json merged = train_config_to_json(c);
  merged.update(j.at("train"));
  const auto seed = c.seed;
  c = train_config_from_json(merged);
  c.seed = seed;
}

void read_sampling(const Json& j, SamplingOptions& s) {
  if (!j.contains("sampling")) return;
  const auto& k = j.at("sampling");
  read(k, "n_samples", s.n_samples);
  read(k, "burn_in", s.burn_in);
  read(k, "n_chains", s.n_chains);
}

Json oracle_defaults() {
  return Json{{"kind", "tfim"},
              {"n_sites", 10},
              {"geometry", "chain-open"},
              {"tfim_field", 1.0},
              {"rydberg_rabi", 1.0},
              {"rydberg_detuning", 0.0},
              {"rydberg_vnn", 10.0},
              {"rydberg_range", 3.0},
              {"temperature", 2.0},
              {"linear_size", 4},
              {"dimension", 2},
              {"periodic", true},
              {"thinning", 2},
              {"burn_in", 1000},
              {"depolarization", 0.0}};
}

Json demo_json(const IsingDemoConfig& c) {
  return Json{{"linear_size", c.linear_size}, {"dimension", c.dimension},   {"periodic", c.periodic},
              {"temperatures", c.temperatures}, {"hidden_sizes", c.hidden_sizes}, {"n_samples", c.n_samples},
              {"thinning", c.thinning},       {"burn_in", c.burn_in},       {"train", train_config_to_json(c.train)},
              {"seed", c.seed}};
}

Json demo_json(const TfimDemoConfig& c) {
  return Json{{"n_sites", c.n_sites},
              {"geometry", c.geometry},
              {"fields", c.fields},
              {"shots", c.shots},
              {"train", train_config_to_json(c.train)},
              {"sampling", sampling_to_json(c.sampling)},
              {"seed", c.seed}};
}

Json demo_json(const ComplexDemoConfig& c) {
  return Json{{"shots_per_basis", c.shots_per_basis},
              {"train", train_config_to_json(c.train)},
              {"phase_hidden", c.phase_hidden},
              {"seed", c.seed}};
}

Json demo_json(const NdoDemoConfig& c) {
  return Json{{"depolarization", c.depolarization},
              {"shots_per_basis", c.shots_per_basis},
              {"train", train_config_to_json(c.train)},
              {"n_aux", c.n_aux},
              {"phase_hidden", c.phase_hidden},
              {"seed", c.seed}};
}

Json demo_json(const RydbergDemoConfig& c) {
  return Json{{"n_sites", c.n_sites},
              {"rabi", c.rabi},
              {"vnn", c.vnn},
              {"range", c.range},
              {"detunings", c.detunings},
              {"shots", c.shots},
              {"flip_probability", c.flip_probability},
              {"bond", c.bond},
              {"posterior_sweeps", c.posterior_sweeps},
              {"posterior_samples", c.posterior_samples},
              {"train", train_config_to_json(c.train)},
              {"sampling", sampling_to_json(c.sampling)},
              {"seed", c.seed}};
}

Json task_defaults(const std::string& task) {
  if (task == "generate") {
    return Json{{"seed", 1},
                {"oracle", oracle_defaults()},
                {"bases", Json::array()},
                {"shots", 10000},
                {"flip_probability", 0.0},
                {"dataset", "dataset.txt"}};
  }
  if (task == "train") {
    return Json{{"seed", 1},
                {"dataset", "dataset.txt"},
                {"model", "positive"},
                {"train", train_config_to_json(TrainConfig{})},
                {"n_aux", -1},
                {"phase_hidden", -1},
                {"max_rotated", 2},
                {"noise_model", ""},
                {"posterior_sweeps", 10},
                {"posterior_samples", 1},
                {"checkpoint", "model.json"}};
  }
  if (task == "observe") {
    return Json{{"seed", 1},
                {"checkpoint", "model.json"},
                {"regions", Json::array()},
                {"sampling", sampling_to_json(SamplingOptions{})}};
  }
  if (task == "evaluate") {
    return Json{{"seed", 1}, {"checkpoint", "model.json"}, {"oracle", oracle_defaults()}, {"regions", Json::array()}};
  }
  if (task == "demo-ising") return demo_json(IsingDemoConfig{});
  if (task == "demo-tfim") return demo_json(TfimDemoConfig{});
  if (task == "demo-complex") return demo_json(ComplexDemoConfig{});
  if (task == "demo-ndo") return demo_json(NdoDemoConfig{});
  if (task == "demo-rydberg") return demo_json(RydbergDemoConfig{});
  throw ValidationError(fmt::format("unknown task '{}'", task));
}

}  // namespace

SamplingOptions sampling_from_json(const Json& j) {
  SamplingOptions s;
  read(j, "n_samples", s.n_samples);
  read(j, "burn_in", s.burn_in);
  read(j, "n_chains", s.n_chains);
  if (s.n_samples < 1 || s.n_chains < 1 || s.burn_in < 0) {
    throw ValidationError("sampling needs n_samples >= 1, n_chains >= 1 and burn_in >= 0");
  }
  return s;
}

IsingDemoConfig::IsingDemoConfig() {
  train.n_hidden = 16;
  train.learning_rate = 0.3;
  train.final_learning_rate = 0.01;
  train.epochs = 80;
  train.cd_steps = 1;
  train.batch_size = 100;
}

TfimDemoConfig::TfimDemoConfig() {
  train.n_hidden = 10;
  train.learning_rate = 0.05;
  train.final_learning_rate = 0.0005;
  train.epochs = 600;
  train.cd_steps = 100;
  train.batch_size = 10;
  sampling.n_samples = 20000;
  sampling.n_chains = 1000;
  sampling.burn_in = 200;
}

ComplexDemoConfig::ComplexDemoConfig() {
  train.n_hidden = 8;
  train.learning_rate = 0.1;
  train.final_learning_rate = 0.002;
  train.epochs = 300;
  train.cd_steps = 10;
  train.batch_size = 50;
}

NdoDemoConfig::NdoDemoConfig() {
  train.n_hidden = 4;
  train.learning_rate = 0.1;
  train.final_learning_rate = 0.002;
  train.epochs = 200;
  train.cd_steps = 10;
  train.batch_size = 50;
}

RydbergDemoConfig::RydbergDemoConfig() {
  train.n_hidden = 16;
  train.learning_rate = 0.1;
  train.final_learning_rate = 0.0005;
  train.epochs = 1200;
  train.cd_steps = 20;
  train.batch_size = 10;
  sampling.n_samples = 20000;
  sampling.n_chains = 500;
  sampling.burn_in = 200;
}

IsingDemoConfig ising_demo_from_json(const Json& j) {
  IsingDemoConfig c;
  read(j, "linear_size", c.linear_size);
  read(j, "dimension", c.dimension);
  read(j, "periodic", c.periodic);
  read(j, "temperatures", c.temperatures);
  read(j, "hidden_sizes", c.hidden_sizes);
  read(j, "n_samples", c.n_samples);
  read(j, "thinning", c.thinning);
  read(j, "burn_in", c.burn_in);
  read(j, "seed", c.seed);
  read_train(j, c.train);
  return c;
}

TfimDemoConfig tfim_demo_from_json(const Json& j) {
  TfimDemoConfig c;
  read(j, "n_sites", c.n_sites);
  read(j, "geometry", c.geometry);
  read(j, "fields", c.fields);
  read(j, "shots", c.shots);
  read(j, "seed", c.seed);
  read_train(j, c.train);
  read_sampling(j, c.sampling);
  return c;
}

ComplexDemoConfig complex_demo_from_json(const Json& j) {
  ComplexDemoConfig c;
  read(j, "shots_per_basis", c.shots_per_basis);
  read(j, "phase_hidden", c.phase_hidden);
  read(j, "seed", c.seed);
  read_train(j, c.train);
  return c;
}

NdoDemoConfig ndo_demo_from_json(const Json& j) {
  NdoDemoConfig c;
  read(j, "depolarization", c.depolarization);
  read(j, "shots_per_basis", c.shots_per_basis);
  read(j, "n_aux", c.n_aux);
  read(j, "phase_hidden", c.phase_hidden);
  read(j, "seed", c.seed);
  read_train(j, c.train);
  return c;
}

RydbergDemoConfig rydberg_demo_from_json(const Json& j) {
  RydbergDemoConfig c;
  read(j, "n_sites", c.n_sites);
  read(j, "rabi", c.rabi);
  read(j, "vnn", c.vnn);
  read(j, "range", c.range);
  read(j, "detunings", c.detunings);
  read(j, "shots", c.shots);
  read(j, "flip_probability", c.flip_probability);
  read(j, "bond", c.bond);
  read(j, "posterior_sweeps", c.posterior_sweeps);
  read(j, "posterior_samples", c.posterior_samples);
  read(j, "seed", c.seed);
  read_train(j, c.train);
  read_sampling(j, c.sampling);
  return c;
}

Json default_config(const std::string& task) {
  Json config = task_defaults(task);
  config["task"] = task;
  config["threads"] = 1;
  config["out_dir"] = "out";
  return config;
}

void merge_config(Json& base, const Json& patch, const std::string& where) {
  if (!patch.is_object()) throw ValidationError(fmt::format("config{} must be a JSON object", where));
  for (const auto& [key, value] : patch.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw ValidationError(fmt::format("unknown config key '{}'", path));
    auto& slot = base[key];
    if (slot.is_object() && value.is_object()) {
      merge_config(slot, value, path);
      continue;
    }
    const bool number_ok = slot.is_number() && value.is_number();
    if (!slot.is_null() && slot.type() != value.type() && !number_ok) {
      throw ValidationError(fmt::format("config key '{}' expects {}, got {}", path, slot.type_name(),
                                        value.type_name()));
    }
    slot = value;
  }
}

void apply_override(Json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError(fmt::format("override '{}' is not of the form key=value", assignment));
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  // Build a nested patch so merge_config does the checking.
  Json patch = value;
  std::string_view rest(path);
  std::vector<std::string> keys;
  while (true) {
    const auto dot = rest.find('.');
    keys.emplace_back(rest.substr(0, dot));
    if (dot == std::string_view::npos) break;
    rest.remove_prefix(dot + 1);
  }
  for (auto it = keys.rbegin(); it != keys.rend(); ++it) {
    if (it->empty()) throw ValidationError(fmt::format("override key '{}' has an empty component", path));
    patch = Json{{*it, std::move(patch)}};
  }
  merge_config(config, patch);
}

Json resolve_config(const CommandLine& cli) {
  std::string task = cli.task;
  Json file = Json::object();
  if (!cli.config_file.empty()) {
    try {
      file = Json::parse(read_text(cli.config_file));
    } catch (const Json::parse_error& e) {
      throw ValidationError(fmt::format("{} is not valid JSON: {}", cli.config_file.string(), e.what()));
    }
    if (!file.is_object()) throw ValidationError("config file must hold a JSON object");
    if (file.contains("task")) {
      const auto named = file.at("task").get<std::string>();
      if (!task.empty() && named != task) {
        throw ValidationError(fmt::format("config file is for task '{}', command line asks for '{}'", named, task));
      }
      task = named;
    }
  }
  if (task.empty()) throw ValidationError("no task given");
  if (!is_task(task)) throw ValidationError(fmt::format("unknown task '{}'", task));

  Json config = default_config(task);
  merge_config(config, file);
  for (const auto& o : cli.overrides) apply_override(config, o);
  if (cli.seed) config["seed"] = *cli.seed;
  if (cli.threads) config["threads"] = *cli.threads;
  if (cli.out_dir) config["out_dir"] = cli.out_dir->string();
  if (config.at("threads").get<int>() < 1) throw ValidationError("threads must be at least 1");
  return config;
}

}  // namespace nqst::app
