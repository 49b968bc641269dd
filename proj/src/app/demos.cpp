#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "nqst/app.hpp"
#include "nqst/complex_wavefunction.hpp"
#include "nqst/density_operator.hpp"
#include "nqst/exact.hpp"
#include "nqst/hamiltonian.hpp"
#include "nqst/ising.hpp"
#include "nqst/noise_mitigation.hpp"
#include "nqst/positive.hpp"

namespace nqst::app {

namespace {

using detail::split_seed;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void say(const Logger& log, const std::string& line) {
  if (log) log(line);
}

void save_dataset(const std::filesystem::path& dir, const std::string& name, const MeasurementDataset& data) {
  if (!dir.empty()) write_dataset(dir / name, data);
}

void save_checkpoint(const std::filesystem::path& dir, const std::string& name, const Checkpoint& model) {
  if (!dir.empty()) write_checkpoint(dir / name, model);
}

std::vector<BasisAssignment> pauli_pairs() {
  std::vector<BasisAssignment> bases;
  for (Pauli a : {Pauli::Z, Pauli::X, Pauli::Y}) {
    for (Pauli b : {Pauli::Z, Pauli::X, Pauli::Y}) bases.push_back({a, b});
  }
  return bases;
}

RotationPlan plan_for(const std::vector<BasisAssignment>& bases, std::size_t shots) {
  RotationPlan plan;
  for (const auto& b : bases) plan.entries.push_back({b, shots});
  return plan;
}

Region first_sites(int count) { return leading_sites(count); }

Region last_sites(int from, int n) {
  Region r;
  for (int i = from; i < n; ++i) r.push_back(i);
  return r;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

DemoResult run_ising_demo(const IsingDemoConfig& config, const Logger& log) {
  if (config.temperatures.empty() || config.hidden_sizes.empty()) {
    throw ValidationError("demo-ising needs temperatures and hidden_sizes");
  }
  config.train.validate();
  DemoResult result;
  result.table.columns = {"n_hidden", "temperature", "abs_m_data", "abs_m_model", "abs_m_exact",
                          "c_data",   "c_model",     "c_exact"};
  Stopwatch clock;
  for (std::size_t t = 0; t < config.temperatures.size(); ++t) {
    const double temperature = config.temperatures[t];
    if (!(temperature > 0.0)) throw ValidationError("temperatures must be positive");
    IsingLattice lattice{config.linear_size, config.dimension, config.periodic, 1.0 / temperature};
    lattice.validate();
    const auto data = ising_mc_sample(lattice, config.n_samples, config.thinning, config.burn_in,
                                      split_seed(config.seed, t));
    save_dataset(config.artifact_dir, fmt::format("ising_T{}.txt", temperature), data);
    const auto configs = data.outcomes();
    const auto from_data = ising_sample_averages(lattice, configs);
    const auto exact = ising_distribution_averages(lattice, ising_boltzmann_distribution(lattice));

    for (std::size_t h = 0; h < config.hidden_sizes.size(); ++h) {
      TrainConfig train = config.train;
      train.n_hidden = config.hidden_sizes[h];
      train.seed = split_seed(config.seed, 1000 + 100 * h + t);
      const RbmParams params = nqst::train(configs, train);
      const auto model = ising_distribution_averages(lattice, exact_distribution(params).probs);
      save_checkpoint(config.artifact_dir, fmt::format("ising_T{}_nh{}.json", temperature, train.n_hidden),
                      PositiveWavefunction{params});
      result.table.add_row({static_cast<double>(train.n_hidden), temperature, from_data.abs_magnetization,
                            model.abs_magnetization, exact.abs_magnetization, from_data.specific_heat,
                            model.specific_heat, exact.specific_heat});
      say(log, fmt::format("T={} n_hidden={} |m| {:.4f}/{:.4f} C {:.4f}/{:.4f} [{:.0f}s]", temperature,
                           train.n_hidden, model.abs_magnetization, from_data.abs_magnetization,
                           model.specific_heat, from_data.specific_heat, clock.seconds()));
    }
  }
  double worst_m = 0.0;
  double worst_c = 0.0;
  for (std::size_t r = 0; r < result.table.rows.size(); ++r) {
    worst_m = std::max(worst_m, std::abs(result.table.at(r, "abs_m_model") / result.table.at(r, "abs_m_data") - 1.0));
    worst_c = std::max(worst_c, std::abs(result.table.at(r, "c_model") / result.table.at(r, "c_data") - 1.0));
  }
  result.summary = Json{{"demo", "ising"}, {"max_rel_error_abs_m", worst_m}, {"max_rel_error_c", worst_c}};
  return result;
}

DemoResult run_tfim_demo(const TfimDemoConfig& config, const Logger& log) {
  if (config.fields.empty()) throw ValidationError("demo-tfim needs at least one field");
  config.train.validate();
  DemoResult result;
  result.table.columns = {"field", "gap", "fidelity", "sz", "sz_err", "sz_ed",
                          "sx",    "sx_err", "sx_ed", "s2", "s2_err", "s2_ed"};
  const int n = config.n_sites;
  const Region half = first_sites(n / 2);
  Stopwatch clock;
  for (std::size_t f = 0; f < config.fields.size(); ++f) {
    HamiltonianSpec spec;
    spec.kind = HamiltonianKind::Tfim;
    spec.n_sites = n;
    spec.tfim_field = config.fields[f];
    spec.geometry = geometry_from_string(config.geometry);
    const auto ground = ed_ground_state(spec);
    const auto data = sample_measurements(ground.state, {all_z(n)}, config.shots, split_seed(config.seed, f));
    save_dataset(config.artifact_dir, fmt::format("tfim_h{}.txt", spec.tfim_field), data);

    TrainConfig train = config.train;
    train.seed = split_seed(config.seed, 100 + f);
    const auto model = train_positive(data, train);
    save_checkpoint(config.artifact_dir, fmt::format("tfim_h{}.json", spec.tfim_field), model);

    SamplingOptions sampling = config.sampling;
    sampling.seed = split_seed(config.seed, 200 + f);
    const auto sz = diagonal_expectation(model, SparseOperator::mean_sigma_z(n), sampling);
    const auto sx = local_estimator_expectation(model, SparseOperator::mean_sigma_x(n), sampling);
    const auto s2 = renyi2_swap(model, half, sampling);
    const auto exact = exact_observables(ground.state, {half});
    const double fid = fidelity_exact(model, ground.state);

    result.table.add_row({spec.tfim_field, ground.gap, fid, sz.mean, sz.std_error, exact.sigma_z.mean(), sx.mean,
                          sx.std_error, exact.sigma_x.mean(), s2.mean, s2.std_error, exact.entropies[0].renyi2});
    say(log, fmt::format("h={} F={:.5f} sx {:.4f}+-{:.4f} (ED {:.4f}) S2 {:.4f}+-{:.4f} (ED {:.4f}) [{:.0f}s]",
                         spec.tfim_field, fid, sx.mean, sx.std_error, exact.sigma_x.mean(), s2.mean, s2.std_error,
                         exact.entropies[0].renyi2, clock.seconds()));
  }
  result.summary = Json{{"demo", "tfim"}, {"n_sites", n}, {"half_chain", half}};
  return result;
}

namespace {

DenseState singlet() {
  CVector amps = CVector::Zero(4);
  amps(1) = 1.0 / std::sqrt(2.0);
  amps(2) = -1.0 / std::sqrt(2.0);
  return DenseState(std::move(amps));
}

}  // namespace

DemoResult run_complex_demo(const ComplexDemoConfig& config, const Logger& log) {
  config.train.validate();
  const DenseState target = singlet();
  DemoResult result;
  result.table.columns = {"rotated_bases", "n_records", "fidelity", "cost"};

  const auto all_bases = pauli_pairs();
  struct Variant {
    bool rotated;
    std::vector<BasisAssignment> bases;
    std::size_t shots;
  };
  const Variant variants[] = {{true, all_bases, config.shots_per_basis},
                              {false, {all_z(2)}, config.shots_per_basis * all_bases.size()}};
  Stopwatch clock;
  for (std::size_t v = 0; v < 2; ++v) {
    const auto& variant = variants[v];
    const auto data = sample_measurements(target, variant.bases, variant.shots, split_seed(config.seed, v));
    const auto plan = plan_for(variant.bases, variant.shots);
    ComplexTrainConfig train;
    train.base = config.train;
    train.base.seed = split_seed(config.seed, 10 + v);
    train.phase_hidden = config.phase_hidden;
    const auto model = train_complex(data, plan, train);
    const std::string tag = variant.rotated ? "rotated" : "z_only";
    save_dataset(config.artifact_dir, fmt::format("singlet_{}.txt", tag), data);
    save_checkpoint(config.artifact_dir, fmt::format("singlet_{}.json", tag), model);
    const double fid = fidelity_exact_complex(model, target);
    const double cost = complex_cost_exact(model, data.records);
    result.table.add_row({variant.rotated ? 1.0 : 0.0, static_cast<double>(data.size()), fid, cost});
    say(log, fmt::format("{}: F={:.5f} cost {:.4f} [{:.0f}s]", tag, fid, cost, clock.seconds()));
  }
  result.summary = Json{{"demo", "complex"},
                        {"fidelity_rotated", result.table.at(0, "fidelity")},
                        {"fidelity_z_only", result.table.at(1, "fidelity")}};
  return result;
}

DemoResult run_ndo_demo(const NdoDemoConfig& config, const Logger& log) {
  config.train.validate();
  const double p = config.depolarization;
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("depolarization must lie in [0, 1]");
  CVector phi = CVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  const DenseDensityMatrix target(CMatrix((1.0 - p) * phi * phi.adjoint() + p * CMatrix::Identity(4, 4) / 4.0));

  const auto bases = pauli_pairs();
  const auto data = sample_measurements(target, bases, config.shots_per_basis, split_seed(config.seed, 0));
  NdoTrainConfig train;
  train.base = config.train;
  train.base.seed = split_seed(config.seed, 1);
  train.n_aux = config.n_aux;
  train.phase_hidden = config.phase_hidden;
  Stopwatch clock;
  const auto model = train_ndo(data, plan_for(bases, config.shots_per_basis), train);
  save_dataset(config.artifact_dir, "bell.txt", data);
  save_checkpoint(config.artifact_dir, "bell_ndo.json", model);

  const auto rho = ndo_dense(model);
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(rho.entries, Eigen::EigenvaluesOnly);
  // Hermiticity straight from the element formula, not from ndo_dense.
  double herm = 0.0;
  double scale = 0.0;
  for (std::uint64_t a = 0; a < 4; ++a) {
    for (std::uint64_t b = 0; b < 4; ++b) {
      const Complex ab = ndo_element(model, bits_from_index(a, 2), bits_from_index(b, 2));
      const Complex ba = ndo_element(model, bits_from_index(b, 2), bits_from_index(a, 2));
      herm = std::max(herm, std::abs(ab - std::conj(ba)));
      scale = std::max(scale, std::abs(ab));
    }
  }
  const double td = trace_distance(rho, target);
  const double fid = fidelity(rho, target);
  DemoResult result;
  result.table.columns = {"depolarization", "trace_distance", "fidelity", "purity", "purity_target",
                          "min_eigenvalue", "hermiticity_error"};
  result.table.add_row({p, td, fid, rho.purity(), target.purity(), eig.eigenvalues().minCoeff(), herm / scale});
  result.summary = Json{{"demo", "ndo"}, {"trace_distance", td}, {"fidelity", fid}, {"n_aux", model.n_aux()}};
  say(log, fmt::format("p={} trace distance {:.5f} F={:.5f} purity {:.4f}/{:.4f} [{:.0f}s]", p, td, fid, rho.purity(),
                       target.purity(), clock.seconds()));
  return result;
}

DemoResult run_rydberg_demo(const RydbergDemoConfig& config, const Logger& log) {
  if (config.detunings.empty()) throw ValidationError("demo-rydberg needs at least one detuning");
  if (config.bond < 1 || config.bond >= config.n_sites) {
    throw ValidationError(fmt::format("bond must split the chain, got {}", config.bond));
  }
  const int n = config.n_sites;
  const Region a = first_sites(config.bond);
  const Region b = last_sites(config.bond, n);
  const NoiseModel noise = NoiseModel::symmetric_flip(n, config.flip_probability);

  DemoResult result;
  result.table.columns = {"detuning", "pop",   "pop_err", "pop_naive",  "pop_naive_err", "pop_ed",
                          "sx",       "sx_err", "sx_naive", "sx_naive_err", "sx_ed",       "i2",
                          "i2_err",   "i2_naive", "i2_naive_err", "i2_ed", "fidelity", "fidelity_naive"};
  Stopwatch clock;
  for (std::size_t d = 0; d < config.detunings.size(); ++d) {
    HamiltonianSpec spec;
    spec.kind = HamiltonianKind::Rydberg;
    spec.n_sites = n;
    spec.rydberg_rabi = config.rabi;
    spec.rydberg_detuning = config.detunings[d];
    spec.rydberg_vnn = config.vnn;
    spec.rydberg_range = config.range;
    const auto ground = ed_ground_state(spec);
    const auto clean = sample_measurements(ground.state, {all_z(n)}, config.shots, split_seed(config.seed, d));
    const auto noisy = apply_noise(clean, noise, split_seed(config.seed, 100 + d));
    save_dataset(config.artifact_dir, fmt::format("rydberg_D{}.txt", spec.rydberg_detuning), noisy);

    NoiseTrainConfig train;
    train.base = config.train;
    train.base.seed = split_seed(config.seed, 200 + d);
    train.posterior_sweeps = config.posterior_sweeps;
    train.posterior_samples = config.posterior_samples;
    const auto denoised = train_with_noise(noisy, noise, train);
    const auto naive = train_positive(noisy, train.base);
    save_checkpoint(config.artifact_dir, fmt::format("rydberg_D{}.json", spec.rydberg_detuning), denoised);
    save_checkpoint(config.artifact_dir, fmt::format("rydberg_D{}_naive.json", spec.rydberg_detuning), naive);

    SamplingOptions sampling = config.sampling;
    sampling.seed = split_seed(config.seed, 300 + d);
    const auto occupation = SparseOperator::mean_occupation(n);
    const auto drive = SparseOperator::mean_sigma_x(n);
    const auto pop = diagonal_expectation(denoised, occupation, sampling);
    const auto pop_naive = diagonal_expectation(naive, occupation, sampling);
    const auto sx = local_estimator_expectation(denoised, drive, sampling);
    const auto sx_naive = local_estimator_expectation(naive, drive, sampling);
    const auto i2 = renyi2_mutual_information(denoised, a, b, sampling);
    const auto i2_naive = renyi2_mutual_information(naive, a, b, sampling);

    const double pop_ed = occupation_expectations(ground.state).mean();
    const double sx_ed = sigma_x_expectations(ground.state).mean();
    const double i2_ed = renyi2_mutual_information(ground.state, a, b);
    result.table.add_row({spec.rydberg_detuning, pop.mean, pop.std_error, pop_naive.mean, pop_naive.std_error, pop_ed,
                          sx.mean, sx.std_error, sx_naive.mean, sx_naive.std_error, sx_ed, i2.mean, i2.std_error,
                          i2_naive.mean, i2_naive.std_error, i2_ed, fidelity_exact(denoised, ground.state),
                          fidelity_exact(naive, ground.state)});
    say(log, fmt::format("Delta={} pop {:.4f} (naive {:.4f}, ED {:.4f}) sx {:.4f} (ED {:.4f}) I2 {:.3f} (ED {:.3f}) "
                         "[{:.0f}s]",
                         spec.rydberg_detuning, pop.mean, pop_naive.mean, pop_ed, sx.mean, sx_ed, i2.mean, i2_ed,
                         clock.seconds()));
  }

  const auto& rows = result.table.rows;
  double mae = 0.0;
  double mae_naive = 0.0;
  std::vector<double> i2_model;
  std::vector<double> i2_exact;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    mae += std::abs(result.table.at(r, "pop") - result.table.at(r, "pop_ed"));
    mae_naive += std::abs(result.table.at(r, "pop_naive") - result.table.at(r, "pop_ed"));
    i2_model.push_back(result.table.at(r, "i2"));
    i2_exact.push_back(result.table.at(r, "i2_ed"));
  }
  mae /= static_cast<double>(rows.size());
  mae_naive /= static_cast<double>(rows.size());
  result.summary = Json{{"demo", "rydberg"},
                        {"region_a", a},
                        {"region_b", b},
                        {"pop_mae", mae},
                        {"pop_mae_naive", mae_naive},
                        {"i2_argmax", argmax(i2_model)},
                        {"i2_ed_argmax", argmax(i2_exact)}};
  return result;
}

}  // namespace nqst::app
