#ifndef NQST_APP_HPP
#define NQST_APP_HPP

#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nqst/io.hpp"
#include "nqst/observables.hpp"
#include "nqst/rbm.hpp"

namespace nqst::app {

using Json = nlohmann::json;

// Process exit codes, one per error category.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitValidation = 2,
  kExitIo = 3,
  kExitEnumeration = 4,
  kExitDimension = 5,
};

struct ErrorReport {
  int exit_code = kExitInternal;
  std::string category;
  std::string message;

  // {"error": {"category": ..., "message": ..., "exit_code": ...}}
  std::string to_json() const;
};

ErrorReport classify(const std::exception& e);

// ---------------------------------------------------------------------------
// Configuration

std::vector<std::string> task_names();
bool is_task(const std::string& name);

// Every field a task understands, with its default value.
Json default_config(const std::string& task);

// Layers `patch` over `base`. Objects merge key by key; anything else
// replaces. Keys absent from `base` are rejected so typos surface.
void merge_config(Json& base, const Json& patch, const std::string& where = "");

// "a.b.c=value". The value is parsed as JSON when it can be, otherwise it
// is taken as a string.
void apply_override(Json& config, const std::string& assignment);

struct CommandLine {
  std::string task;
  std::filesystem::path config_file;  // empty when absent
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::filesystem::path> out_dir;
};

// defaults < config file < --set overrides < --seed/--threads/--out-dir.
Json resolve_config(const CommandLine& cli);

// Helpers shared by the tasks and the tests.
TrainConfig train_config_from_json(const Json& j);
Json train_config_to_json(const TrainConfig& c);
SamplingOptions sampling_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Demos. Each returns a table with model estimates next to the exact
// truth, plus a summary object. Progress lines go to `log` when set.

using Logger = std::function<void(const std::string&)>;

struct DemoResult {
  Table table;
  Json summary = Json::object();
};

struct IsingDemoConfig {
  int linear_size = 4;
  int dimension = 2;
  bool periodic = true;
  std::vector<double> temperatures = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
  std::vector<int> hidden_sizes = {4, 16, 64};
  std::size_t n_samples = 100000;
  int thinning = 2;
  int burn_in = 1000;
  TrainConfig train;
  std::uint64_t seed = 7;

  // Datasets and checkpoints are written here when set.
  std::filesystem::path artifact_dir;

  IsingDemoConfig();
};

// Columns: n_hidden, temperature, abs_m_data, abs_m_model, abs_m_exact,
// c_data, c_model, c_exact. Model values enumerate the trained RBM.
DemoResult run_ising_demo(const IsingDemoConfig& config, const Logger& log = {});

struct TfimDemoConfig {
  int n_sites = 10;
  std::string geometry = "chain-open";
  std::vector<double> fields = {0.5, 1.0, 2.0};
  std::size_t shots = 10000;
  TrainConfig train;
  SamplingOptions sampling;
  std::uint64_t seed = 5;

  // Datasets and checkpoints are written here when set.
  std::filesystem::path artifact_dir;

  TfimDemoConfig();
};

// Columns: field, gap, fidelity, sz, sz_err, sz_ed, sx, sx_err, sx_ed,
// s2, s2_err, s2_ed. S2 is for the leading half of the chain.
DemoResult run_tfim_demo(const TfimDemoConfig& config, const Logger& log = {});

struct ComplexDemoConfig {
  std::size_t shots_per_basis = 2000;
  TrainConfig train;
  int phase_hidden = -1;
  std::uint64_t seed = 11;

  // Datasets and checkpoints are written here when set.
  std::filesystem::path artifact_dir;

  ComplexDemoConfig();
};

// Learns (|01> - |10>) / sqrt(2) twice: from all nine two-site Pauli bases,
// and from Z-basis records alone with the same total shot count.
// Columns: rotated_bases, n_records, fidelity, cost.
DemoResult run_complex_demo(const ComplexDemoConfig& config, const Logger& log = {});

struct NdoDemoConfig {
  double depolarization = 0.2;
  std::size_t shots_per_basis = 2000;
  TrainConfig train;
  int n_aux = 4;
  int phase_hidden = -1;
  std::uint64_t seed = 11;

  // Datasets and checkpoints are written here when set.
  std::filesystem::path artifact_dir;

  NdoDemoConfig();
};

// Target (1 - p)|Phi+><Phi+| + p I / 4 measured in the nine Pauli bases.
// Columns: depolarization, trace_distance, fidelity, purity, purity_target,
// min_eigenvalue, hermiticity_error.
DemoResult run_ndo_demo(const NdoDemoConfig& config, const Logger& log = {});

struct RydbergDemoConfig {
  int n_sites = 8;
  double rabi = 1.0;
  double vnn = 10.0;
  double range = 3.0;
  std::vector<double> detunings = {-2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  std::size_t shots = 3000;
  double flip_probability = 0.05;
  // Region A holds the first `bond` sites, region B the rest.
  int bond = 3;
  int posterior_sweeps = 10;
  int posterior_samples = 1;
  TrainConfig train;
  SamplingOptions sampling;
  std::uint64_t seed = 100;

  // Datasets and checkpoints are written here when set.
  std::filesystem::path artifact_dir;

  RydbergDemoConfig();
};

// Per detuning, a de-noised model (noise layer) and a naive one trained on
// the same noisy records. Columns: detuning, pop, pop_err, pop_naive,
// pop_naive_err, pop_ed, sx, sx_err, sx_naive, sx_naive_err, sx_ed, i2,
// i2_err, i2_naive, i2_naive_err, i2_ed, fidelity, fidelity_naive.
DemoResult run_rydberg_demo(const RydbergDemoConfig& config, const Logger& log = {});

IsingDemoConfig ising_demo_from_json(const Json& j);
TfimDemoConfig tfim_demo_from_json(const Json& j);
ComplexDemoConfig complex_demo_from_json(const Json& j);
NdoDemoConfig ndo_demo_from_json(const Json& j);
RydbergDemoConfig rydberg_demo_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Entry point

// Writes metrics.json and metrics.csv under `out_dir`.
void write_metrics(const std::filesystem::path& out_dir, const DemoResult& result);

// Runs one task with a fully resolved config. Errors propagate as
// exceptions; see main() for the mapping to exit codes.
void run_task(const Json& config, const Logger& log = {});

// Parses argv, runs the task, prints errors as JSON on stderr and returns
// the exit code.
int run_cli(int argc, char** argv);

}  // namespace nqst::app

#endif  // NQST_APP_HPP
