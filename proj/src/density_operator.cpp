#include "nqst/density_operator.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace nqst {

void NeuralDensityOperator::validate() const {
  amplitude_params.validate();
  phase_params.validate();
  const int n = n_sites();
  if (phase_params.n_visible() != n || aux_amplitude_weights.cols() != n || aux_phase_weights.cols() != n) {
    throw DimensionError("density operator blocks disagree on the visible width");
  }
  if (aux_amplitude_weights.rows() != aux_phase_weights.rows()) {
    throw DimensionError("V_lambda and V_mu have different auxiliary counts");
  }
  if (!aux_amplitude_weights.allFinite() || !aux_phase_weights.allFinite()) {
    throw ValidationError("auxiliary weights must be finite");
  }
}

RbmParams NeuralDensityOperator::diagonal_params() const {
  const int nh = amplitude_params.n_hidden();
  RbmParams d(n_sites(), nh + n_aux());
  d.weights.topRows(nh) = amplitude_params.weights;
  d.weights.bottomRows(n_aux()) = aux_amplitude_weights;
  d.visible_bias = amplitude_params.visible_bias;
  d.hidden_bias.head(nh) = amplitude_params.hidden_bias;
  return d;
}

namespace {

Vector flatten_matrix(const Matrix& m) {
  Vector out(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(k++) = m(i, j);
  }
  return out;
}

Vector concat(std::initializer_list<Vector> parts) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  Vector out(total);
  Eigen::Index k = 0;
  for (const auto& p : parts) {
    out.segment(k, p.size()) = p;
    k += p.size();
  }
  return out;
}

}  // namespace

Vector NeuralDensityOperator::flatten() const {
  return concat({amplitude_params.flatten(), phase_params.flatten(), flatten_matrix(aux_amplitude_weights),
                 flatten_matrix(aux_phase_weights)});
}

void NeuralDensityOperator::unflatten(const Vector& flat) {
  const Eigen::Index na = amplitude_params.size();
  const Eigen::Index np = phase_params.size();
  const Eigen::Index nv = aux_amplitude_weights.size();
  if (flat.size() != na + np + 2 * nv) throw DimensionError("flat parameter vector has the wrong length");
  amplitude_params = RbmParams::unflatten(flat.segment(0, na), n_sites(), amplitude_params.n_hidden());
  phase_params = RbmParams::unflatten(flat.segment(na, np), phase_params.n_visible(), phase_params.n_hidden());
  Eigen::Index k = na + np;
  for (Matrix* m : {&aux_amplitude_weights, &aux_phase_weights}) {
    for (Eigen::Index i = 0; i < m->rows(); ++i) {
      for (Eigen::Index j = 0; j < m->cols(); ++j) (*m)(i, j) = flat(k++);
    }
  }
}

Vector NdoGradient::flatten() const {
  return concat({amplitude.flatten(), phase.flatten(), flatten_matrix(aux_amplitude), flatten_matrix(aux_phase)});
}

namespace {

// Per-configuration pieces of log rho.
struct ConfigTerms {
  double e_amp = 0.0;
  double e_phase = 0.0;
  Vector v_amp;  // V_lambda s
  Vector v_phase;
};

ConfigTerms config_terms(const NeuralDensityOperator& model, const BinaryVector& s) {
  return {effective_energy(model.amplitude_params, s), effective_energy(model.phase_params, s),
          model.aux_amplitude_weights * s, model.aux_phase_weights * s};
}

CVector aux_arguments(const ConfigTerms& a, const ConfigTerms& b) {
  CVector z(a.v_amp.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    z(k) = Complex(0.5 * (a.v_amp(k) + b.v_amp(k)), 0.5 * (a.v_phase(k) - b.v_phase(k)));
  }
  return z;
}

Complex log_element(const ConfigTerms& a, const ConfigTerms& b) {
  Complex out(-0.5 * (a.e_amp + b.e_amp), -0.5 * (a.e_phase - b.e_phase));
  const CVector z = aux_arguments(a, b);
  for (Eigen::Index k = 0; k < z.size(); ++k) out += softplus(z(k));
  return out;
}

void check_width(const NeuralDensityOperator& model, const BinaryVector& s) {
  if (s.size() != model.n_sites()) {
    throw DimensionError(fmt::format("configuration has {} entries, model has {} sites", s.size(),
                                     model.n_sites()));
  }
}

NdoGradient zero_gradient(const NeuralDensityOperator& model) {
  const int n = model.n_sites();
  return {RbmGradient(n, model.amplitude_params.n_hidden()), RbmGradient(n, model.phase_params.n_hidden()),
          Matrix::Zero(model.n_aux(), n), Matrix::Zero(model.n_aux(), n), 0};
}

// g += Re(w * d log rho(s, t) / d theta).
void accumulate_pair(const NeuralDensityOperator& model, const BinaryVector& s, const BinaryVector& t,
                     const ConfigTerms& a, const ConfigTerms& b, Complex w, NdoGradient& g) {
  accumulate_energy_gradient(model.amplitude_params, s, -0.5 * w.real(), g.amplitude);
  accumulate_energy_gradient(model.amplitude_params, t, -0.5 * w.real(), g.amplitude);
  if (w.imag() != 0.0) {
    accumulate_energy_gradient(model.phase_params, s, 0.5 * w.imag(), g.phase);
    accumulate_energy_gradient(model.phase_params, t, -0.5 * w.imag(), g.phase);
  }
  const CVector z = aux_arguments(a, b);
  Vector re(z.size());
  Vector im(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const Complex ws = w * sigmoid(z(k));
    re(k) = ws.real();
    im(k) = -ws.imag();
  }
  g.aux_amplitude.noalias() += re * (0.5 * (s + t)).transpose();
  g.aux_phase.noalias() += im * (0.5 * (s - t)).transpose();
}

struct RotatedPairs {
  RotatedExpansion expansion;
  std::vector<ConfigTerms> terms;
  CMatrix logs;
  Complex log_total;
  double relative = 0.0;
};

RotatedPairs rotated_pairs(const NeuralDensityOperator& model, const Measurement& m, int max_rotated) {
  if (rotated_site_count(m.basis) > max_rotated) {
    throw ValidationError(fmt::format("basis {} rotates more than {} sites", basis_to_string(m.basis),
                                      max_rotated));
  }
  RotatedPairs r;
  r.expansion = expand_rotation(m.basis, m.outcome);
  const auto& ex = r.expansion;
  const auto n = static_cast<Eigen::Index>(ex.configs.size());
  r.terms.reserve(ex.configs.size());
  for (const auto& c : ex.configs) r.terms.push_back(config_terms(model, c));
  r.logs.resize(n, n);
  double peak = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) {
      r.logs(k, l) = std::log(ex.coefficients[static_cast<std::size_t>(k)]) +
                     log_element(r.terms[static_cast<std::size_t>(k)], r.terms[static_cast<std::size_t>(l)]) +
                     std::conj(std::log(ex.coefficients[static_cast<std::size_t>(l)]));
      peak = std::max(peak, r.logs(k, l).real());
    }
  }
  Complex sum = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index l = 0; l < n; ++l) sum += std::exp(r.logs(k, l) - peak);
  }
  r.relative = std::abs(sum);
  r.log_total = std::log(sum) + peak;
  return r;
}

constexpr double kVanishingElement = 1e-14;

void check_batch(const NeuralDensityOperator& model, std::span<const Measurement> batch) {
  model.validate();
  if (batch.empty()) throw ValidationError("measurement batch is empty");
  for (const auto& m : batch) {
    if (static_cast<int>(m.basis.size()) != model.n_sites() || m.outcome.size() != model.n_sites()) {
      throw DimensionError("record width does not match the model");
    }
  }
}

// g -= mean over records of Re sum Q d log rho.
void data_terms(const NeuralDensityOperator& model, std::span<const Measurement> batch, int max_rotated,
                NdoGradient& g) {
  NdoGradient acc = zero_gradient(model);
  std::size_t used = 0;
  for (const auto& m : batch) {
    const auto r = rotated_pairs(model, m, max_rotated);
    if (!(r.relative > kVanishingElement)) {
      ++g.skipped;
      continue;
    }
    ++used;
    const auto& configs = r.expansion.configs;
    for (std::size_t k = 0; k < configs.size(); ++k) {
      for (std::size_t l = 0; l < configs.size(); ++l) {
        const Complex q = std::exp(r.logs(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) - r.log_total);
        accumulate_pair(model, configs[k], configs[l], r.terms[k], r.terms[l], q, acc);
      }
    }
  }
  if (used == 0) return;
  const double w = -1.0 / static_cast<double>(used);
  g.amplitude += (acc.amplitude *= w);
  g.phase += (acc.phase *= w);
  g.aux_amplitude += w * acc.aux_amplitude;
  g.aux_phase += w * acc.aux_phase;
}

void diagonal_term(const NeuralDensityOperator& model, const BinaryVector& s, double w, NdoGradient& g) {
  const auto t = config_terms(model, s);
  accumulate_pair(model, s, s, t, t, Complex(w, 0.0), g);
}

BinaryVector dominant_config(const NeuralDensityOperator& model, const Measurement& m, int max_rotated) {
  const auto r = rotated_pairs(model, m, max_rotated);
  std::size_t best = 0;
  for (std::size_t k = 1; k < r.expansion.configs.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const auto bb = static_cast<Eigen::Index>(best);
    if (r.logs(kk, kk).real() > r.logs(bb, bb).real()) best = k;
  }
  return r.expansion.configs[best];
}

}  // namespace

Complex ndo_log_element(const NeuralDensityOperator& model, const BinaryVector& s, const BinaryVector& t) {
  check_width(model, s);
  check_width(model, t);
  return log_element(config_terms(model, s), config_terms(model, t));
}

Complex ndo_element(const NeuralDensityOperator& model, const BinaryVector& s, const BinaryVector& t) {
  return std::exp(ndo_log_element(model, s, t));
}

DenseDensityMatrix ndo_dense(const NeuralDensityOperator& model) {
  model.validate();
  const int n = model.n_sites();
  require_enumerable(n, 12);
  const Eigen::Index dim = Eigen::Index{1} << n;
  std::vector<ConfigTerms> terms;
  terms.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    terms.push_back(config_terms(model, bits_from_index(static_cast<std::uint64_t>(i), n)));
  }
  CMatrix logs(dim, dim);
  double peak = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      logs(i, j) = log_element(terms[static_cast<std::size_t>(i)], terms[static_cast<std::size_t>(j)]);
      logs(j, i) = std::conj(logs(i, j));
    }
    peak = std::max(peak, logs(i, i).real());
  }
  CMatrix rho(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      rho(i, j) = std::exp(logs(i, j) - peak);
      rho(j, i) = std::conj(rho(i, j));
    }
  }
  for (Eigen::Index i = 0; i < dim; ++i) rho(i, i) = rho(i, i).real();
  rho /= rho.trace().real();
  return DenseDensityMatrix(std::move(rho));
}

double ndo_rotated_diagonal(const NeuralDensityOperator& model, const Measurement& m, int max_rotated) {
  check_batch(model, std::span<const Measurement>(&m, 1));
  return std::exp(rotated_pairs(model, m, max_rotated).log_total).real();
}

NdoGradient ndo_gradients(const NeuralDensityOperator& model, std::span<const Measurement> batch,
                          std::span<const BinaryVector> chain_starts, int cd_steps, Rng& rng, int max_rotated) {
  check_batch(model, batch);
  if (chain_starts.empty()) throw ValidationError("no chain starts supplied");
  if (cd_steps < 1) throw ValidationError("cd_steps must be at least 1");
  NdoGradient g = zero_gradient(model);
  data_terms(model, batch, max_rotated, g);
  const auto chains = detail::run_gibbs_chains(model.diagonal_params(), chain_starts, cd_steps, rng);
  const double w = 1.0 / static_cast<double>(chains.size());
  for (const auto& v : chains) diagonal_term(model, v, w, g);
  return g;
}

NdoGradient ndo_gradients_exact(const NeuralDensityOperator& model, std::span<const Measurement> batch,
                                int max_rotated) {
  check_batch(model, batch);
  require_enumerable(model.n_sites());
  NdoGradient g = zero_gradient(model);
  data_terms(model, batch, max_rotated, g);
  const auto dist = exact_distribution(model.diagonal_params());
  for (Eigen::Index i = 0; i < dist.probs.size(); ++i) {
    if (dist.probs(i) == 0.0) continue;
    diagonal_term(model, bits_from_index(static_cast<std::uint64_t>(i), model.n_sites()), dist.probs(i), g);
  }
  return g;
}

double ndo_cost_exact(const NeuralDensityOperator& model, std::span<const Measurement> data, int max_rotated) {
  check_batch(model, data);
  require_enumerable(model.n_sites());
  const double log_z = log_partition_exact(model.diagonal_params());
  double total = 0.0;
  for (const auto& m : data) {
    const auto r = rotated_pairs(model, m, max_rotated);
    if (!(r.relative > 0.0)) return std::numeric_limits<double>::infinity();
    total -= r.log_total.real() - log_z;
  }
  return total / static_cast<double>(data.size());
}

NeuralDensityOperator train_ndo(const MeasurementDataset& data, const RotationPlan& plan,
                                const NdoTrainConfig& config,
                                const std::function<void(int, const NeuralDensityOperator&)>& on_epoch) {
  const auto& base = config.base;
  base.validate();
  data.validate();
  if (data.empty()) throw ValidationError("dataset is empty");
  plan.validate(data.n_sites);
  for (const auto& r : data.records) plan.check(r.basis);
  const int n = data.n_sites;
  const int n_aux = config.n_aux < 0 ? base.n_hidden : config.n_aux;
  const int phase_hidden = config.phase_hidden < 0 ? base.n_hidden : config.phase_hidden;

  Rng rng(base.seed);
  NeuralDensityOperator model{RbmParams(n, base.n_hidden), RbmParams(n, phase_hidden), Matrix::Zero(n_aux, n),
                              Matrix::Zero(n_aux, n)};
  if (base.init_scale > 0.0) {
    std::normal_distribution<double> normal(0.0, base.init_scale);
    for (Matrix* m : {&model.amplitude_params.weights, &model.phase_params.weights, &model.aux_amplitude_weights,
                      &model.aux_phase_weights}) {
      for (Eigen::Index i = 0; i < m->rows(); ++i) {
        for (Eigen::Index j = 0; j < m->cols(); ++j) (*m)(i, j) = normal(rng);
      }
    }
  }

  const std::size_t count = data.size();
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch_size = static_cast<std::size_t>(base.batch_size);
  std::vector<Measurement> batch;
  std::vector<BinaryVector> starts;

  for (int epoch = 1; epoch <= base.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0; begin < count; begin += batch_size) {
      const std::size_t m = std::min(batch_size, count - begin);
      batch.clear();
      starts.clear();
      for (std::size_t i = 0; i < m; ++i) {
        batch.push_back(data.records[order[begin + i]]);
        starts.push_back(dominant_config(model, batch.back(), plan.max_rotated));
      }
      auto g = ndo_gradients(model, batch, starts, base.cd_steps, rng, plan.max_rotated);
      if (base.weight_decay > 0.0) {
        g.amplitude.weights += base.weight_decay * model.amplitude_params.weights;
        g.phase.weights += base.weight_decay * model.phase_params.weights;
        g.aux_amplitude += base.weight_decay * model.aux_amplitude_weights;
        g.aux_phase += base.weight_decay * model.aux_phase_weights;
      }
      const double lr = base.learning_rate_at(epoch);
      model.amplitude_params -= (g.amplitude *= lr);
      model.phase_params -= (g.phase *= lr);
      model.aux_amplitude_weights -= lr * g.aux_amplitude;
      model.aux_phase_weights -= lr * g.aux_phase;
    }
    if (!model.amplitude_params.all_finite() || !model.phase_params.all_finite() ||
        !model.aux_amplitude_weights.allFinite() || !model.aux_phase_weights.allFinite()) {
      throw ValidationError(fmt::format("training diverged at epoch {}", epoch));
    }
    if (on_epoch) on_epoch(epoch, model);
  }
  return model;
}

}  // namespace nqst
