#include "nqst/rbm.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include <fmt/format.h>

#include "nqst/parallel.hpp"

namespace nqst {

RbmParams::RbmParams(int n_visible, int n_hidden)
    : weights(Matrix::Zero(n_hidden, n_visible)),
      visible_bias(Vector::Zero(n_visible)),
      hidden_bias(Vector::Zero(n_hidden)) {
  if (n_visible < 1 || n_hidden < 0) {
    throw ValidationError(
        fmt::format("invalid RBM shape: n_visible={} n_hidden={}", n_visible, n_hidden));
  }
}

RbmParams RbmParams::random(int n_visible, int n_hidden, double scale, Rng& rng,
                            bool with_biases) {
  RbmParams p(n_visible, n_hidden);
  std::normal_distribution<double> normal(0.0, scale);
  for (Eigen::Index i = 0; i < p.weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.weights.cols(); ++j) p.weights(i, j) = normal(rng);
  }
  if (with_biases) {
    for (auto& b : p.visible_bias) b = normal(rng);
    for (auto& c : p.hidden_bias) c = normal(rng);
  }
  return p;
}

Eigen::Index RbmParams::size() const {
  return weights.size() + visible_bias.size() + hidden_bias.size();
}

Vector RbmParams::flatten() const {
  Vector flat(size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < weights.cols(); ++j) flat(k++) = weights(i, j);
  }
  flat.segment(k, visible_bias.size()) = visible_bias;
  k += visible_bias.size();
  flat.segment(k, hidden_bias.size()) = hidden_bias;
  return flat;
}

RbmParams RbmParams::unflatten(const Vector& flat, int n_visible, int n_hidden) {
  RbmParams p(n_visible, n_hidden);
  if (flat.size() != p.size()) {
    throw DimensionError(fmt::format("flat parameter vector has {} entries, expected {}",
                                     flat.size(), p.size()));
  }
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < p.weights.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.weights.cols(); ++j) p.weights(i, j) = flat(k++);
  }
  p.visible_bias = flat.segment(k, n_visible);
  k += n_visible;
  p.hidden_bias = flat.segment(k, n_hidden);
  return p;
}

bool RbmParams::all_finite() const {
  return weights.allFinite() && visible_bias.allFinite() && hidden_bias.allFinite();
}

void RbmParams::validate() const {
  if (visible_bias.size() < 1) throw ValidationError("RBM needs at least one visible unit");
  if (weights.rows() != hidden_bias.size() || weights.cols() != visible_bias.size()) {
    throw ValidationError(fmt::format("RBM weight matrix is {}x{} but biases are {} / {}",
                                      weights.rows(), weights.cols(), hidden_bias.size(),
                                      visible_bias.size()));
  }
  if (!all_finite()) throw ValidationError("RBM parameters contain non-finite entries");
}

RbmParams& RbmParams::operator+=(const RbmParams& other) {
  weights += other.weights;
  visible_bias += other.visible_bias;
  hidden_bias += other.hidden_bias;
  return *this;
}

RbmParams& RbmParams::operator-=(const RbmParams& other) {
  weights -= other.weights;
  visible_bias -= other.visible_bias;
  hidden_bias -= other.hidden_bias;
  return *this;
}

RbmParams& RbmParams::operator*=(double factor) {
  weights *= factor;
  visible_bias *= factor;
  hidden_bias *= factor;
  return *this;
}

bool operator==(const RbmParams& a, const RbmParams& b) {
  return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() &&
         a.weights == b.weights && a.visible_bias == b.visible_bias &&
         a.hidden_bias == b.hidden_bias;
}

ExactDistribution ExactDistribution::from_probabilities(Vector probs) {
  const auto n = std::countr_zero(static_cast<std::uint64_t>(probs.size()));
  if (probs.size() < 2 || (Eigen::Index{1} << n) != probs.size()) {
    throw DimensionError("distribution length must be a power of two");
  }
  if ((probs.array() < 0.0).any()) throw ValidationError("negative probability");
  if (std::abs(probs.sum() - 1.0) > 1e-12) {
    throw ValidationError(fmt::format("probabilities sum to {:.17g}", probs.sum()));
  }
  return ExactDistribution{std::move(probs), n};
}

ExactDistribution ExactDistribution::uniform(int n_visible) {
  const auto dim = Eigen::Index{1} << n_visible;
  return ExactDistribution{Vector::Constant(dim, 1.0 / static_cast<double>(dim)), n_visible};
}

namespace {

void check_visible(const RbmParams& params, const BinaryVector& v) {
  if (v.size() != params.n_visible()) {
    throw DimensionError(fmt::format("visible vector has {} entries, RBM has {} visible units",
                                     v.size(), params.n_visible()));
  }
}

double energy_from_activation(const RbmParams& params, const BinaryVector& v,
                              const Vector& activation) {
  double e = -params.visible_bias.dot(v);
  for (Eigen::Index i = 0; i < activation.size(); ++i) e -= softplus(activation(i));
  return e;
}

}  // namespace

double effective_energy(const RbmParams& params, const BinaryVector& v) {
  check_visible(params, v);
  const Vector activation = params.weights * v + params.hidden_bias;
  return energy_from_activation(params, v, activation);
}

Vector effective_energies(const RbmParams& params) {
  const int n = params.n_visible();
  require_enumerable(n);
  const std::uint64_t dim = std::uint64_t{1} << n;
  Vector energies(static_cast<Eigen::Index>(dim));
  // Gray-code walk: one visible bit changes per step, so the hidden
  // activations are updated by a single weight column. A full recompute
  // every 1024 steps bounds round-off drift.
  BinaryVector v = BinaryVector::Zero(n);
  Vector activation = params.hidden_bias;
  for (std::uint64_t step = 0; step < dim; ++step) {
    if (step > 0) {
      const int bit = std::countr_zero(step);
      const int site = n - 1 - bit;
      v(site) = 1.0 - v(site);
      if ((step & 1023U) == 0) {
        activation = params.weights * v + params.hidden_bias;
      } else if (v(site) > 0.5) {
        activation += params.weights.col(site);
      } else {
        activation -= params.weights.col(site);
      }
    }
    const std::uint64_t gray = step ^ (step >> 1U);
    energies(static_cast<Eigen::Index>(gray)) = energy_from_activation(params, v, activation);
  }
  return energies;
}

double log_partition_exact(const RbmParams& params) {
  return log_sum_exp(-effective_energies(params));
}

ExactDistribution exact_distribution(const RbmParams& params) {
  const Vector minus_e = -effective_energies(params);
  const double log_z = log_sum_exp(minus_e);
  Vector probs = (minus_e.array() - log_z).exp();
  probs /= probs.sum();
  return ExactDistribution{std::move(probs), params.n_visible()};
}

Vector conditional_hidden(const RbmParams& params, const BinaryVector& v) {
  check_visible(params, v);
  Vector activation = params.weights * v + params.hidden_bias;
  return activation.unaryExpr([](double x) { return sigmoid(x); });
}

Vector conditional_visible(const RbmParams& params, const BinaryVector& h) {
  if (h.size() != params.n_hidden()) {
    throw DimensionError(fmt::format("hidden vector has {} entries, RBM has {} hidden units",
                                     h.size(), params.n_hidden()));
  }
  Vector activation = params.weights.transpose() * h + params.visible_bias;
  return activation.unaryExpr([](double x) { return sigmoid(x); });
}

BinaryVector sample_bernoulli(const Vector& probs, Rng& rng) {
  BinaryVector out(probs.size());
  for (Eigen::Index i = 0; i < probs.size(); ++i) out(i) = uniform01(rng) < probs(i) ? 1.0 : 0.0;
  return out;
}

BinaryVector block_gibbs_step(const RbmParams& params, const BinaryVector& v, Rng& rng) {
  const BinaryVector h = sample_bernoulli(conditional_hidden(params, v), rng);
  return sample_bernoulli(conditional_visible(params, h), rng);
}

void block_gibbs_steps(const RbmParams& params, BinaryVector& v, int k, Rng& rng) {
  check_visible(params, v);
  Vector field_h(params.n_hidden());
  Vector h(params.n_hidden());
  Vector field_v(params.n_visible());
  for (int step = 0; step < k; ++step) {
    field_h.noalias() = params.weights * v;
    field_h = 1.0 / (1.0 + (-(field_h + params.hidden_bias)).array().exp());
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = uniform01(rng) < field_h(i) ? 1.0 : 0.0;
    field_v.noalias() = params.weights.transpose() * h;
    field_v = 1.0 / (1.0 + (-(field_v + params.visible_bias)).array().exp());
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = uniform01(rng) < field_v(j) ? 1.0 : 0.0;
  }
}

RbmGradient energy_gradient(const RbmParams& params, const BinaryVector& v) {
  RbmGradient g(params.n_visible(), params.n_hidden());
  accumulate_energy_gradient(params, v, 1.0, g);
  return g;
}

void accumulate_energy_gradient(const RbmParams& params, const BinaryVector& v, double weight,
                                RbmGradient& out) {
  const Vector h_mean = conditional_hidden(params, v);
  out.weights.noalias() -= (weight * h_mean) * v.transpose();
  out.visible_bias -= weight * v;
  out.hidden_bias -= weight * h_mean;
}

namespace {

void require_data(const RbmParams& params, std::span<const BinaryVector> data) {
  if (data.empty()) throw ValidationError("dataset is empty");
  for (const auto& v : data) check_visible(params, v);
}

// sum_v p(v) grad E(v) by enumeration.
RbmGradient model_average_gradient(const RbmParams& params) {
  const auto dist = exact_distribution(params);
  RbmGradient g(params.n_visible(), params.n_hidden());
  for (Eigen::Index idx = 0; idx < dist.probs.size(); ++idx) {
    if (dist.probs(idx) == 0.0) continue;
    accumulate_energy_gradient(params, bits_from_index(static_cast<std::uint64_t>(idx),
                                                       params.n_visible()),
                               dist.probs(idx), g);
  }
  return g;
}

}  // namespace

double nll_exact(const RbmParams& params, std::span<const BinaryVector> data) {
  require_data(params, data);
  const double log_z = log_partition_exact(params);
  double total = 0.0;
  for (const auto& v : data) total += effective_energy(params, v);
  return total / static_cast<double>(data.size()) + log_z;
}

RbmGradient nll_gradient_exact(const RbmParams& params, std::span<const BinaryVector> data) {
  require_data(params, data);
  require_enumerable(params.n_visible());
  RbmGradient g(params.n_visible(), params.n_hidden());
  const double w = 1.0 / static_cast<double>(data.size());
  for (const auto& v : data) accumulate_energy_gradient(params, v, w, g);
  g -= model_average_gradient(params);
  return g;
}

RbmGradient cd_k_gradient(const RbmParams& params, std::span<const BinaryVector> batch, int k,
                          Rng& rng) {
  if (k < 1) throw ValidationError("cd_steps must be at least 1");
  require_data(params, batch);
  const auto chains = detail::run_gibbs_chains(params, batch, k, rng);
  RbmGradient g(params.n_visible(), params.n_hidden());
  const double w = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    accumulate_energy_gradient(params, batch[i], w, g);
    accumulate_energy_gradient(params, chains[i], -w, g);
  }
  return g;
}

double kl_divergence_exact(const RbmParams& params, const ExactDistribution& target) {
  if (target.n_visible != params.n_visible()) {
    throw DimensionError(fmt::format("target covers {} sites, model has {}", target.n_visible,
                                     params.n_visible()));
  }
  const Vector minus_e = -effective_energies(params);
  const double log_z = log_sum_exp(minus_e);
  double kl = 0.0;
  for (Eigen::Index i = 0; i < target.probs.size(); ++i) {
    const double p = target.probs(i);
    if (p > 0.0) kl += p * (std::log(p) - (minus_e(i) - log_z));
  }
  return std::max(kl, 0.0);
}

void TrainConfig::validate() const {
  if (n_hidden < 0) throw ValidationError("n_hidden must be non-negative");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (batch_size < 1) throw ValidationError("batch_size must be positive");
  if (cd_steps < 1) throw ValidationError("cd_steps must be at least 1");
  if (epochs < 1) throw ValidationError("epochs must be positive");
  if (weight_decay < 0.0) throw ValidationError("weight_decay must be non-negative");
  if (init_scale < 0.0) throw ValidationError("init_scale must be non-negative");
  if (final_learning_rate < 0.0) throw ValidationError("final_learning_rate must be non-negative");
}

double TrainConfig::learning_rate_at(int epoch) const {
  if (final_learning_rate <= 0.0 || epochs < 2) return learning_rate;
  const double t = static_cast<double>(epoch - 1) / static_cast<double>(epochs - 1);
  return learning_rate * std::pow(final_learning_rate / learning_rate, t);
}

RbmParams train(std::span<const BinaryVector> data, const TrainConfig& config,
                const EpochCallback& on_epoch) {
  if (data.empty()) throw ValidationError("dataset is empty");
  const auto n_visible = static_cast<int>(data.front().size());
  for (const auto& v : data) {
    if (v.size() != n_visible) throw DimensionError("dataset rows have inconsistent widths");
    if (!is_binary(v)) throw ValidationError("dataset rows must be binary");
  }
  return detail::run_cd_training(
      data.size(), n_visible, config,
      [data](const RbmParams&, std::size_t datum, Rng&, std::vector<BinaryVector>& out) {
        out.assign(1, data[datum]);
      },
      on_epoch);
}

namespace detail {

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31U);
}

std::vector<BinaryVector> run_gibbs_chains(const RbmParams& params,
                                           std::span<const BinaryVector> starts, int k,
                                           Rng& rng) {
  std::vector<std::uint64_t> seeds(starts.size());
  for (auto& s : seeds) s = rng();
  std::vector<BinaryVector> finals(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    Rng chain(seeds[i]);
    finals[i] = starts[i];
    block_gibbs_steps(params, finals[i], k, chain);
  });
  return finals;
}

RbmParams run_cd_training(std::size_t n_data, int n_visible, const TrainConfig& config,
                          const PositivePhaseSource& positive, const EpochCallback& on_epoch) {
  config.validate();
  if (n_data == 0) throw ValidationError("dataset is empty");

  Rng rng(config.seed);
  RbmParams params(n_visible, config.n_hidden);
  if (config.init_scale > 0.0) {
    std::normal_distribution<double> normal(0.0, config.init_scale);
    for (Eigen::Index i = 0; i < params.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < params.weights.cols(); ++j) params.weights(i, j) = normal(rng);
    }
  }

  std::vector<std::size_t> order(n_data);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  std::vector<std::vector<BinaryVector>> positives;
  std::vector<BinaryVector> starts;
  std::vector<std::uint64_t> aux_seeds;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t begin = 0; begin < n_data; begin += batch_size) {
      const std::size_t m = std::min(batch_size, n_data - begin);
      positives.resize(m);
      starts.resize(m);
      aux_seeds.resize(m);
      const std::uint64_t batch_key = rng();
      for (std::size_t i = 0; i < m; ++i) aux_seeds[i] = split_seed(batch_key, i);

      parallel_for(m, [&](std::size_t i) {
        Rng aux(aux_seeds[i]);
        positive(params, order[begin + i], aux, positives[i]);
        starts[i] = positives[i].front();
      });
      const auto chains = run_gibbs_chains(params, starts, config.cd_steps, rng);

      RbmGradient grad(n_visible, config.n_hidden);
      const double w = 1.0 / static_cast<double>(m);
      for (std::size_t i = 0; i < m; ++i) {
        const double wp = w / static_cast<double>(positives[i].size());
        for (const auto& v : positives[i]) accumulate_energy_gradient(params, v, wp, grad);
        accumulate_energy_gradient(params, chains[i], -w, grad);
      }
      if (config.weight_decay > 0.0) grad.weights += config.weight_decay * params.weights;
      grad *= config.learning_rate_at(epoch);
      params -= grad;
    }
    if (!params.all_finite()) {
      throw ValidationError(fmt::format("training diverged at epoch {}", epoch));
    }
    if (on_epoch) on_epoch(epoch, params);
  }
  return params;
}

}  // namespace detail

}  // namespace nqst
