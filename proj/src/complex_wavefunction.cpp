#include "nqst/complex_wavefunction.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace nqst {

Complex ComplexWavefunction::log_psi(const BinaryVector& s) const {
  return {-0.5 * effective_energy(amplitude_params, s), -0.5 * effective_energy(phase_params, s)};
}

void ComplexWavefunction::validate() const {
  amplitude_params.validate();
  phase_params.validate();
  if (amplitude_params.n_visible() != phase_params.n_visible()) {
    throw DimensionError(fmt::format("amplitude machine has {} visible units, phase machine has {}",
                                     amplitude_params.n_visible(), phase_params.n_visible()));
  }
}

std::vector<BasisAssignment> RotationPlan::bases() const {
  std::vector<BasisAssignment> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.basis);
  return out;
}

void RotationPlan::check(const BasisAssignment& basis) const {
  const int r = rotated_site_count(basis);
  if (r > max_rotated) {
    throw ValidationError(fmt::format("basis {} rotates {} sites, at most {} allowed",
                                      basis_to_string(basis), r, max_rotated));
  }
}

void RotationPlan::validate(int n_sites) const {
  if (max_rotated < 0 || max_rotated > 16) throw ValidationError("max_rotated must be in [0, 16]");
  for (const auto& e : entries) {
    if (static_cast<int>(e.basis.size()) != n_sites) {
      throw DimensionError(fmt::format("basis {} does not cover {} sites", basis_to_string(e.basis), n_sites));
    }
    check(e.basis);
  }
}

namespace {

// Terms log(U(s^b, s) psi(s)) of a rotated amplitude, plus their
// log-sum. `relative` is |psi_b| over the largest term magnitude.
struct RotatedTerms {
  RotatedExpansion expansion;
  std::vector<Complex> logs;
  Complex log_total;
  double relative = 0.0;
};

RotatedTerms rotated_terms(const ComplexWavefunction& model, const Measurement& m, int max_rotated) {
  if (rotated_site_count(m.basis) > max_rotated) {
    throw ValidationError(fmt::format("basis {} rotates more than {} sites", basis_to_string(m.basis),
                                      max_rotated));
  }
  RotatedTerms t;
  t.expansion = expand_rotation(m.basis, m.outcome);
  const auto& ex = t.expansion;
  t.logs.resize(ex.configs.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ex.configs.size(); ++k) {
    t.logs[k] = model.log_psi(ex.configs[k]) + std::log(ex.coefficients[k]);
    peak = std::max(peak, t.logs[k].real());
  }
  Complex sum = 0.0;
  for (const auto& l : t.logs) sum += std::exp(l - peak);
  t.relative = std::abs(sum);
  t.log_total = std::log(sum) + peak;
  return t;
}

constexpr double kVanishingAmplitude = 1e-14;

// Adds the data term for one record with weight w. Returns false when the
// rotated amplitude vanishes and the record is skipped.
bool accumulate_data_term(const ComplexWavefunction& model, const Measurement& m, double w,
                          int max_rotated, ComplexGradient& g) {
  const auto t = rotated_terms(model, m, max_rotated);
  if (!(t.relative > kVanishingAmplitude)) return false;
  for (std::size_t k = 0; k < t.logs.size(); ++k) {
    // An unrotated record has a single term with Q = 1; the round trip
    // through log and exp would leave a stray imaginary part.
    const Complex q = t.logs.size() == 1 ? Complex(1.0) : std::exp(t.logs[k] - t.log_total);
    accumulate_energy_gradient(model.amplitude_params, t.expansion.configs[k], w * q.real(), g.amplitude);
    accumulate_energy_gradient(model.phase_params, t.expansion.configs[k], -w * q.imag(), g.phase);
  }
  return true;
}

ComplexGradient zero_gradient(const ComplexWavefunction& model) {
  return {RbmGradient(model.n_sites(), model.amplitude_params.n_hidden()),
          RbmGradient(model.n_sites(), model.phase_params.n_hidden()), 0};
}

void check_batch(const ComplexWavefunction& model, std::span<const Measurement> batch) {
  model.validate();
  if (batch.empty()) throw ValidationError("measurement batch is empty");
  for (const auto& m : batch) {
    if (static_cast<int>(m.basis.size()) != model.n_sites() || m.outcome.size() != model.n_sites()) {
      throw DimensionError("record width does not match the model");
    }
  }
}

void data_terms(const ComplexWavefunction& model, std::span<const Measurement> batch, int max_rotated,
                ComplexGradient& g) {
  ComplexGradient acc = zero_gradient(model);
  std::size_t used = 0;
  for (const auto& m : batch) {
    if (accumulate_data_term(model, m, 1.0, max_rotated, acc)) {
      ++used;
    } else {
      ++g.skipped;
    }
  }
  if (used == 0) return;
  const double w = 1.0 / static_cast<double>(used);
  acc.amplitude *= w;
  acc.phase *= w;
  g.amplitude += acc.amplitude;
  g.phase += acc.phase;
}

// Reference configuration with the largest |U psi| term, used to seed the
// record's chain.
BinaryVector dominant_config(const ComplexWavefunction& model, const Measurement& m, int max_rotated) {
  const auto t = rotated_terms(model, m, max_rotated);
  std::size_t best = 0;
  for (std::size_t k = 1; k < t.logs.size(); ++k) {
    if (t.logs[k].real() > t.logs[best].real()) best = k;
  }
  return t.expansion.configs[best];
}

}  // namespace

Complex rotated_amplitude(const ComplexWavefunction& model, const BasisAssignment& basis,
                          const BinaryVector& outcome, int max_rotated) {
  const auto t = rotated_terms(model, Measurement{basis, outcome}, max_rotated);
  return std::exp(t.log_total);
}

ComplexGradient complex_gradients(const ComplexWavefunction& model, std::span<const Measurement> batch,
                                  std::span<const BinaryVector> chain_starts, int cd_steps, Rng& rng,
                                  int max_rotated) {
  check_batch(model, batch);
  if (chain_starts.empty()) throw ValidationError("no chain starts supplied");
  if (cd_steps < 1) throw ValidationError("cd_steps must be at least 1");
  ComplexGradient g = zero_gradient(model);
  data_terms(model, batch, max_rotated, g);
  const auto chains = detail::run_gibbs_chains(model.amplitude_params, chain_starts, cd_steps, rng);
  const double w = 1.0 / static_cast<double>(chains.size());
  for (const auto& v : chains) accumulate_energy_gradient(model.amplitude_params, v, -w, g.amplitude);
  return g;
}

ComplexGradient complex_gradients_exact(const ComplexWavefunction& model, std::span<const Measurement> batch,
                                        int max_rotated) {
  check_batch(model, batch);
  require_enumerable(model.n_sites());
  ComplexGradient g = zero_gradient(model);
  data_terms(model, batch, max_rotated, g);
  const auto dist = exact_distribution(model.amplitude_params);
  for (Eigen::Index i = 0; i < dist.probs.size(); ++i) {
    if (dist.probs(i) == 0.0) continue;
    accumulate_energy_gradient(model.amplitude_params,
                               bits_from_index(static_cast<std::uint64_t>(i), model.n_sites()),
                               -dist.probs(i), g.amplitude);
  }
  return g;
}

double complex_cost_exact(const ComplexWavefunction& model, std::span<const Measurement> data,
                          int max_rotated) {
  check_batch(model, data);
  require_enumerable(model.n_sites());
  const double log_z = log_partition_exact(model.amplitude_params);
  double total = 0.0;
  for (const auto& m : data) {
    const auto t = rotated_terms(model, m, max_rotated);
    if (!(t.relative > 0.0)) return std::numeric_limits<double>::infinity();
    total -= 2.0 * t.log_total.real() - log_z;
  }
  return total / static_cast<double>(data.size());
}

ComplexWavefunction train_complex(const MeasurementDataset& data, const RotationPlan& plan,
                                  const ComplexTrainConfig& config,
                                  const std::function<void(int, const ComplexWavefunction&)>& on_epoch) {
  const auto& base = config.base;
  base.validate();
  data.validate();
  if (data.empty()) throw ValidationError("dataset is empty");
  plan.validate(data.n_sites);
  for (const auto& r : data.records) plan.check(r.basis);
  const int phase_hidden = config.phase_hidden < 0 ? base.n_hidden : config.phase_hidden;

  Rng rng(base.seed);
  ComplexWavefunction model{RbmParams(data.n_sites, base.n_hidden), RbmParams(data.n_sites, phase_hidden)};
  if (base.init_scale > 0.0) {
    std::normal_distribution<double> normal(0.0, base.init_scale);
    for (auto* p : {&model.amplitude_params, &model.phase_params}) {
      for (Eigen::Index i = 0; i < p->weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < p->weights.cols(); ++j) p->weights(i, j) = normal(rng);
      }
    }
  }

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch_size = static_cast<std::size_t>(base.batch_size);
  std::vector<Measurement> batch;
  std::vector<BinaryVector> starts;

  for (int epoch = 1; epoch <= base.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0; begin < n; begin += batch_size) {
      const std::size_t m = std::min(batch_size, n - begin);
      batch.clear();
      starts.clear();
      for (std::size_t i = 0; i < m; ++i) {
        batch.push_back(data.records[order[begin + i]]);
        starts.push_back(dominant_config(model, batch.back(), plan.max_rotated));
      }
      auto g = complex_gradients(model, batch, starts, base.cd_steps, rng, plan.max_rotated);
      if (base.weight_decay > 0.0) {
        g.amplitude.weights += base.weight_decay * model.amplitude_params.weights;
        g.phase.weights += base.weight_decay * model.phase_params.weights;
      }
      const double lr = base.learning_rate_at(epoch);
      g.amplitude *= lr;
      g.phase *= lr;
      model.amplitude_params -= g.amplitude;
      model.phase_params -= g.phase;
    }
    if (!model.amplitude_params.all_finite() || !model.phase_params.all_finite()) {
      throw ValidationError(fmt::format("training diverged at epoch {}", epoch));
    }
    if (on_epoch) on_epoch(epoch, model);
  }
  return model;
}

DenseState to_dense_state(const ComplexWavefunction& model) {
  model.validate();
  const int n = model.n_sites();
  require_enumerable(n, 20);
  const Vector e_amp = effective_energies(model.amplitude_params);
  const Vector e_phase = effective_energies(model.phase_params);
  const double log_z = log_sum_exp(-e_amp);
  CVector amps(e_amp.size());
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    amps(i) = std::exp(Complex(-0.5 * (e_amp(i) + log_z), -0.5 * e_phase(i)));
  }
  amps /= amps.norm();
  return DenseState(std::move(amps));
}

double fidelity_exact_complex(const ComplexWavefunction& model, const DenseState& target) {
  require_enumerable(model.n_sites(), 16);
  if (target.n_sites != model.n_sites()) {
    throw DimensionError(fmt::format("target has {} sites, model has {}", target.n_sites, model.n_sites()));
  }
  return std::norm(target.amplitudes.dot(to_dense_state(model).amplitudes));
}

}  // namespace nqst
