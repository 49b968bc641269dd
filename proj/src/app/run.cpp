#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "nqst/app.hpp"
#include "nqst/complex_wavefunction.hpp"
#include "nqst/density_operator.hpp"
#include "nqst/exact.hpp"
#include "nqst/hamiltonian.hpp"
#include "nqst/ising.hpp"
#include "nqst/noise_mitigation.hpp"
#include "nqst/parallel.hpp"
#include "nqst/positive.hpp"

namespace nqst::app {

namespace fs = std::filesystem;

void write_metrics(const fs::path& out_dir, const DemoResult& result) {
  Json rows = Json::array();
  for (const auto& row : result.table.rows) rows.push_back(row);
  const Json doc{{"summary", result.summary}, {"columns", result.table.columns}, {"rows", rows}};
  write_text(out_dir / "metrics.json", doc.dump(1) + "\n");
  write_csv(out_dir / "metrics.csv", result.table);
}

namespace {

// Truth for generate/evaluate. Exactly one of the three members is set.
struct Oracle {
  int n_sites = 0;
  std::optional<DenseState> pure;
  std::optional<DenseDensityMatrix> mixed;
  std::optional<IsingLattice> ising;
};

Oracle make_oracle(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  Oracle oracle;
  if (kind == "tfim" || kind == "rydberg") {
    HamiltonianSpec spec;
    spec.kind = hamiltonian_kind_from_string(kind);
    spec.n_sites = j.at("n_sites").get<int>();
    spec.geometry = geometry_from_string(j.at("geometry").get<std::string>());
    spec.tfim_field = j.at("tfim_field").get<double>();
    spec.rydberg_rabi = j.at("rydberg_rabi").get<double>();
    spec.rydberg_detuning = j.at("rydberg_detuning").get<double>();
    spec.rydberg_vnn = j.at("rydberg_vnn").get<double>();
    spec.rydberg_range = j.at("rydberg_range").get<double>();
    oracle.pure = ed_ground_state(spec).state;
    oracle.n_sites = spec.n_sites;
  } else if (kind == "singlet") {
    CVector amps = CVector::Zero(4);
    amps(1) = 1.0 / std::sqrt(2.0);
    amps(2) = -1.0 / std::sqrt(2.0);
    oracle.pure = DenseState(std::move(amps));
    oracle.n_sites = 2;
  } else if (kind == "bell") {
    const double p = j.at("depolarization").get<double>();
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("depolarization must lie in [0, 1]");
    CVector phi = CVector::Zero(4);
    phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
    oracle.mixed = DenseDensityMatrix(CMatrix((1.0 - p) * phi * phi.adjoint() + p * CMatrix::Identity(4, 4) / 4.0));
    oracle.n_sites = 2;
  } else if (kind == "ising") {
    const double temperature = j.at("temperature").get<double>();
    if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
    IsingLattice lattice{j.at("linear_size").get<int>(), j.at("dimension").get<int>(), j.at("periodic").get<bool>(),
                         1.0 / temperature};
    lattice.validate();
    oracle.ising = lattice;
    oracle.n_sites = lattice.n_sites();
  } else {
    throw ValidationError(fmt::format("unknown oracle kind '{}' (tfim, rydberg, singlet, bell, ising)", kind));
  }
  return oracle;
}

std::vector<Region> regions_from_json(const Json& j, int n_sites) {
  std::vector<Region> regions;
  for (const auto& r : j) regions.push_back(r.get<Region>());
  if (regions.empty() && n_sites >= 2) regions.push_back(leading_sites(n_sites / 2));
  for (const auto& r : regions) validate_region(r, n_sites);
  return regions;
}

Json report_to_json(const ObservableReport& r) {
  Json entropies = Json::array();
  for (const auto& e : r.entropies) entropies.push_back({{"region", e.region}, {"renyi2", e.renyi2}});
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return Json{{"sigma_z", vec(r.sigma_z)},
              {"sigma_x", vec(r.sigma_x)},
              {"occupation", vec(r.occupation)},
              {"purity", r.purity},
              {"renyi2", entropies}};
}

Json thermo_to_json(const ThermoAverages& t) {
  return Json{{"abs_magnetization", t.abs_magnetization},
              {"energy", t.energy},
              {"energy_sq", t.energy_sq},
              {"specific_heat", t.specific_heat}};
}

fs::path out_path(const Json& config, const std::string& name) {
  return fs::path(config.at("out_dir").get<std::string>()) / name;
}

void run_generate(const Json& config, const Logger& log) {
  const auto seed = config.at("seed").get<std::uint64_t>();
  const Oracle oracle = make_oracle(config.at("oracle"));
  const auto shots = config.at("shots").get<std::size_t>();
  std::vector<BasisAssignment> bases;
  for (const auto& b : config.at("bases")) bases.push_back(basis_from_string(b.get<std::string>()));
  for (const auto& b : bases) {
    if (static_cast<int>(b.size()) != oracle.n_sites) {
      throw DimensionError(fmt::format("basis {} does not cover {} sites", basis_to_string(b), oracle.n_sites));
    }
  }
  if (bases.empty()) bases.push_back(all_z(oracle.n_sites));

  MeasurementDataset data;
  Json truth;
  if (oracle.ising) {
    if (bases.size() != 1 || rotated_site_count(bases[0]) != 0) {
      throw ValidationError("classical Ising data has no rotated bases");
    }
    const auto& osc = config.at("oracle");
    data = ising_mc_sample(*oracle.ising, shots, osc.at("thinning").get<int>(), osc.at("burn_in").get<int>(),
                           detail::split_seed(seed, 0));
    truth["data"] = thermo_to_json(ising_sample_averages(*oracle.ising, data.outcomes()));
    if (oracle.n_sites <= 20) {
      truth["exact"] = thermo_to_json(
          ising_distribution_averages(*oracle.ising, ising_boltzmann_distribution(*oracle.ising)));
    }
  } else if (oracle.pure) {
    data = sample_measurements(*oracle.pure, bases, shots, detail::split_seed(seed, 0));
    truth = report_to_json(exact_observables(*oracle.pure, regions_from_json(Json::array(), oracle.n_sites)));
  } else {
    data = sample_measurements(*oracle.mixed, bases, shots, detail::split_seed(seed, 0));
    truth = report_to_json(exact_observables(*oracle.mixed, regions_from_json(Json::array(), oracle.n_sites)));
  }

  const double flip = config.at("flip_probability").get<double>();
  if (flip > 0.0) {
    const auto noise = NoiseModel::symmetric_flip(oracle.n_sites, flip);
    data = apply_noise(data, noise, detail::split_seed(seed, 1));
    write_noise_model(out_path(config, "noise_model.json"), noise);
  }
  write_dataset(out_path(config, config.at("dataset").get<std::string>()), data);
  write_text(out_path(config, "truth.json"), truth.dump(1) + "\n");
  if (log) log(fmt::format("wrote {} records over {} sites", data.size(), data.n_sites));
}

RotationPlan plan_from_data(const MeasurementDataset& data, int max_rotated) {
  std::map<std::string, std::size_t> counts;
  for (const auto& r : data.records) ++counts[basis_to_string(r.basis)];
  RotationPlan plan;
  plan.max_rotated = max_rotated;
  for (const auto& [basis, count] : counts) plan.entries.push_back({basis_from_string(basis), count});
  return plan;
}

void run_train(const Json& config, const Logger& log) {
  const auto data = read_dataset(config.at("dataset").get<std::string>());
  TrainConfig base = train_config_from_json(config.at("train"));
  base.seed = detail::split_seed(config.at("seed").get<std::uint64_t>(), 0);
  const auto kind = config.at("model").get<std::string>();
  const auto noise_path = config.at("noise_model").get<std::string>();

  Table progress;
  progress.columns = {"epoch", "learning_rate", "weight_norm"};
  auto note = [&](int epoch, double norm) {
    progress.add_row({static_cast<double>(epoch), base.learning_rate_at(epoch), norm});
    if (log && epoch % std::max(1, base.epochs / 10) == 0) {
      log(fmt::format("epoch {}/{}", epoch, base.epochs));
    }
  };

  Checkpoint model;
  if (kind == "positive") {
    const auto on_epoch = [&](int e, const RbmParams& p) { note(e, p.weights.norm()); };
    if (noise_path.empty()) {
      model = train_positive(data, base, on_epoch);
    } else {
      NoiseTrainConfig nc;
      nc.base = base;
      nc.posterior_sweeps = config.at("posterior_sweeps").get<int>();
      nc.posterior_samples = config.at("posterior_samples").get<int>();
      model = train_with_noise(data, read_noise_model(noise_path), nc, on_epoch);
    }
  } else if (kind == "complex" || kind == "ndo") {
    if (!noise_path.empty()) throw ValidationError("noise layers are only available for positive models");
    const auto plan = plan_from_data(data, config.at("max_rotated").get<int>());
    if (kind == "complex") {
      ComplexTrainConfig cc;
      cc.base = base;
      cc.phase_hidden = config.at("phase_hidden").get<int>();
      model = train_complex(data, plan, cc, [&](int e, const ComplexWavefunction& m) {
        note(e, std::hypot(m.amplitude_params.weights.norm(), m.phase_params.weights.norm()));
      });
    } else {
      NdoTrainConfig nc;
      nc.base = base;
      nc.n_aux = config.at("n_aux").get<int>();
      nc.phase_hidden = config.at("phase_hidden").get<int>();
      model = train_ndo(data, plan, nc, [&](int e, const NeuralDensityOperator& m) { note(e, m.flatten().norm()); });
    }
  } else {
    throw ValidationError(fmt::format("unknown model kind '{}' (positive, complex, ndo)", kind));
  }
  write_checkpoint(out_path(config, config.at("checkpoint").get<std::string>()), model);
  write_csv(out_path(config, "training.csv"), progress);
}

std::string region_label(const Region& r) { return fmt::format("{}", fmt::join(r, " ")); }

void run_observe(const Json& config, const Logger& log) {
  const auto model = read_checkpoint(config.at("checkpoint").get<std::string>());
  const int n = checkpoint_sites(model);
  const auto regions = regions_from_json(config.at("regions"), n);
  SamplingOptions sampling = sampling_from_json(config.at("sampling"));
  sampling.seed = detail::split_seed(config.at("seed").get<std::uint64_t>(), 0);

  Json entries = Json::array();
  std::string csv = "observable,region,mean,std_error,n_samples,autocorrelation_time\n";
  auto add = [&](const std::string& name, const Region& region, const EstimateReport& e) {
    entries.push_back({{"observable", name},
                       {"region", region},
                       {"mean", e.mean},
                       {"std_error", e.std_error},
                       {"n_samples", e.n_samples},
                       {"autocorrelation_time", e.autocorrelation_time}});
    csv += fmt::format("{},{},{:.17g},{:.17g},{},{:.17g}\n", name, region_label(region), e.mean, e.std_error,
                       e.n_samples, e.autocorrelation_time);
    if (log) log(fmt::format("{} {} = {:.6f} +- {:.6f}", name, region_label(region), e.mean, e.std_error));
  };

  auto sampled = [&](const auto& m) {
    add("mean_sigma_z", {}, diagonal_expectation(m, SparseOperator::mean_sigma_z(n), sampling));
    add("mean_occupation", {}, diagonal_expectation(m, SparseOperator::mean_occupation(n), sampling));
    add("mean_sigma_x", {}, local_estimator_expectation(m, SparseOperator::mean_sigma_x(n), sampling));
    for (const auto& r : regions) add("renyi2", r, renyi2_swap(m, r, sampling));
  };
  if (const auto* p = std::get_if<PositiveWavefunction>(&model)) {
    sampled(*p);
  } else if (const auto* c = std::get_if<ComplexWavefunction>(&model)) {
    sampled(*c);
  } else {
    // Mixed states are small enough to enumerate; no sampling error.
    const auto rho = ndo_dense(std::get<NeuralDensityOperator>(model));
    const auto report = exact_observables(rho, regions);
    auto exact = [](double v) { return EstimateReport{v, 0.0, 0, 0.0}; };
    add("mean_sigma_z", {}, exact(report.sigma_z.mean()));
    add("mean_occupation", {}, exact(report.occupation.mean()));
    add("mean_sigma_x", {}, exact(report.sigma_x.mean()));
    for (const auto& e : report.entropies) add("renyi2", e.region, exact(e.renyi2));
    add("purity", {}, exact(report.purity));
  }
  const Json doc{{"model_kind", model_kind(model)}, {"n_sites", n}, {"estimates", entries}};
  write_text(out_path(config, "metrics.json"), doc.dump(1) + "\n");
  write_text(out_path(config, "metrics.csv"), csv);
}

void run_evaluate(const Json& config, const Logger& log) {
  const auto model = read_checkpoint(config.at("checkpoint").get<std::string>());
  const Oracle oracle = make_oracle(config.at("oracle"));
  const int n = checkpoint_sites(model);
  if (n != oracle.n_sites) {
    throw DimensionError(fmt::format("model has {} sites, oracle has {}", n, oracle.n_sites));
  }
  const auto regions = regions_from_json(config.at("regions"), n);

  Json rows = Json::array();
  std::string csv = "quantity,model,truth,abs_error\n";
  auto add = [&](const std::string& name, double model_value, double truth) {
    rows.push_back({{"quantity", name}, {"model", model_value}, {"truth", truth}});
    csv += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", name, model_value, truth, std::abs(model_value - truth));
    if (log) log(fmt::format("{}: model {:.6f} truth {:.6f}", name, model_value, truth));
  };

  if (oracle.ising) {
    const auto* p = std::get_if<PositiveWavefunction>(&model);
    if (!p) throw ValidationError("Ising evaluation needs a positive model");
    const auto m = ising_distribution_averages(*oracle.ising, exact_distribution(p->params).probs);
    const auto t = ising_distribution_averages(*oracle.ising, ising_boltzmann_distribution(*oracle.ising));
    add("abs_magnetization", m.abs_magnetization, t.abs_magnetization);
    add("energy", m.energy, t.energy);
    add("specific_heat", m.specific_heat, t.specific_heat);
  } else {
    const DenseDensityMatrix truth = oracle.pure ? DenseDensityMatrix::pure(*oracle.pure) : *oracle.mixed;
    DenseDensityMatrix rho;
    if (const auto* p = std::get_if<PositiveWavefunction>(&model)) {
      rho = DenseDensityMatrix::pure(to_dense_state(*p));
    } else if (const auto* c = std::get_if<ComplexWavefunction>(&model)) {
      rho = DenseDensityMatrix::pure(to_dense_state(*c));
    } else {
      rho = ndo_dense(std::get<NeuralDensityOperator>(model));
    }
    const auto mr = exact_observables(rho, regions);
    const auto tr = exact_observables(truth, regions);
    add("fidelity", fidelity(rho, truth), 1.0);
    add("trace_distance", trace_distance(rho, truth), 0.0);
    add("mean_sigma_z", mr.sigma_z.mean(), tr.sigma_z.mean());
    add("mean_sigma_x", mr.sigma_x.mean(), tr.sigma_x.mean());
    add("mean_occupation", mr.occupation.mean(), tr.occupation.mean());
    add("purity", mr.purity, tr.purity);
    for (std::size_t r = 0; r < regions.size(); ++r) {
      add(fmt::format("renyi2[{}]", region_label(regions[r])), mr.entropies[r].renyi2, tr.entropies[r].renyi2);
    }
  }
  const Json doc{{"model_kind", model_kind(model)}, {"n_sites", n}, {"comparisons", rows}};
  write_text(out_path(config, "metrics.json"), doc.dump(1) + "\n");
  write_text(out_path(config, "metrics.csv"), csv);
}

void run_demo(const Json& config, const Logger& log) {
  const auto task = config.at("task").get<std::string>();
  const fs::path out_dir = config.at("out_dir").get<std::string>();
  DemoResult result;
  if (task == "demo-ising") {
    auto c = ising_demo_from_json(config);
    c.artifact_dir = out_dir / "artifacts";
    result = run_ising_demo(c, log);
  } else if (task == "demo-tfim") {
    auto c = tfim_demo_from_json(config);
    c.artifact_dir = out_dir / "artifacts";
    result = run_tfim_demo(c, log);
  } else if (task == "demo-complex") {
    auto c = complex_demo_from_json(config);
    c.artifact_dir = out_dir / "artifacts";
    result = run_complex_demo(c, log);
  } else if (task == "demo-ndo") {
    auto c = ndo_demo_from_json(config);
    c.artifact_dir = out_dir / "artifacts";
    result = run_ndo_demo(c, log);
  } else {
    auto c = rydberg_demo_from_json(config);
    c.artifact_dir = out_dir / "artifacts";
    result = run_rydberg_demo(c, log);
  }
  write_metrics(out_dir, result);
}

}  // namespace

void run_task(const Json& config, const Logger& log) {
  const auto task = config.at("task").get<std::string>();
  set_thread_count(config.at("threads").get<int>());
  write_text(out_path(config, "config.json"), config.dump(1) + "\n");
  if (task == "generate") {
    run_generate(config, log);
  } else if (task == "train") {
    run_train(config, log);
  } else if (task == "observe") {
    run_observe(config, log);
  } else if (task == "evaluate") {
    run_evaluate(config, log);
  } else {
    run_demo(config, log);
  }
}

int run_cli(int argc, char** argv) {
  CLI::App cli{"Neural-network quantum state tomography with restricted Boltzmann machines"};
  cli.set_help_flag("-h,--help", "Print this help and exit");
  CommandLine args;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir;
  std::string config_file;
  bool print_config = false;
  bool quiet = false;
  cli.add_option("task", args.task, fmt::format("One of: {}", fmt::join(task_names(), ", ")));
  cli.add_option("-c,--config", config_file, "JSON config file")->check(CLI::ExistingFile);
  cli.add_option("--set", args.overrides, "Override one config field, e.g. --set train.epochs=50")
      ->type_name("KEY=VALUE");
  auto* seed_opt = cli.add_option("--seed", seed, "Master seed");
  auto* threads_opt = cli.add_option("--threads", threads, "Worker threads");
  auto* out_opt = cli.add_option("--out-dir", out_dir, "Directory for every output file");
  cli.add_flag("--print-config", print_config, "Print the resolved config and exit");
  cli.add_flag("-q,--quiet", quiet, "No progress lines on stderr");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << ErrorReport{kExitValidation, "validation", e.what()}.to_json() << '\n';
    return kExitValidation;
  }

  try {
    args.config_file = config_file;
    if (*seed_opt) args.seed = seed;
    if (*threads_opt) args.threads = threads;
    if (*out_opt) args.out_dir = out_dir;
    const Json config = resolve_config(args);
    if (print_config) {
      std::cout << config.dump(2) << '\n';
      return kExitOk;
    }
    Logger log;
    if (!quiet) log = [](const std::string& line) { std::cerr << line << '\n'; };
    run_task(config, log);
    return kExitOk;
  } catch (const std::exception& e) {
    const auto report = classify(e);
    std::cerr << report.to_json() << '\n';
    return report.exit_code;
  }
}

}  // namespace nqst::app
