#ifndef NQST_RBM_HPP
#define NQST_RBM_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nqst/bits.hpp"

namespace nqst {

// Parameters of a binary restricted Boltzmann machine with energy
//   E(v, h) = -h^T W v - b^T v - c^T h
// over visible units v and hidden units h, both valued in {0, 1}.
// The same type doubles as a gradient container.
struct RbmParams {
  Matrix weights;       // n_hidden x n_visible
  Vector visible_bias;  // b
  Vector hidden_bias;   // c

  RbmParams() = default;
  RbmParams(int n_visible, int n_hidden);

  // Gaussian entries with standard deviation `scale`. Biases are drawn too
  // unless `with_biases` is false.
  static RbmParams random(int n_visible, int n_hidden, double scale, Rng& rng,
                          bool with_biases = true);

  int n_visible() const { return static_cast<int>(visible_bias.size()); }
  int n_hidden() const { return static_cast<int>(hidden_bias.size()); }
  Eigen::Index size() const;

  // Flat layout: weights row-major, then visible bias, then hidden bias.
  Vector flatten() const;
  static RbmParams unflatten(const Vector& flat, int n_visible, int n_hidden);

  bool all_finite() const;
  // Throws ValidationError on inconsistent shapes or non-finite entries.
  void validate() const;

  RbmParams& operator+=(const RbmParams& other);
  RbmParams& operator-=(const RbmParams& other);
  RbmParams& operator*=(double factor);
  friend bool operator==(const RbmParams& a, const RbmParams& b);
};

using RbmGradient = RbmParams;

// Distribution over all 2^n visible strings in lexicographic order.
struct ExactDistribution {
  Vector probs;
  int n_visible = 0;

  // Checks non-negativity and normalization to 1e-12.
  static ExactDistribution from_probabilities(Vector probs);
  static ExactDistribution uniform(int n_visible);
};

// Free energy of the visible layer with the hidden units traced out:
//   -b.v - sum_i softplus(W_i.v + c_i)
double effective_energy(const RbmParams& params, const BinaryVector& v);

// Effective energies of every visible string, lexicographic order.
Vector effective_energies(const RbmParams& params);

double log_partition_exact(const RbmParams& params);
ExactDistribution exact_distribution(const RbmParams& params);

Vector conditional_hidden(const RbmParams& params, const BinaryVector& v);
Vector conditional_visible(const RbmParams& params, const BinaryVector& h);

// A unit switches on when its uniform draw is strictly below its probability.
BinaryVector sample_bernoulli(const Vector& probs, Rng& rng);
BinaryVector block_gibbs_step(const RbmParams& params, const BinaryVector& v, Rng& rng);
// k steps in place; draws the same random numbers as repeated block_gibbs_step.
void block_gibbs_steps(const RbmParams& params, BinaryVector& v, int k, Rng& rng);

// Gradient of the effective energy with respect to every parameter.
RbmGradient energy_gradient(const RbmParams& params, const BinaryVector& v);
// out += weight * energy_gradient(params, v), without temporaries.
void accumulate_energy_gradient(const RbmParams& params, const BinaryVector& v,
                                double weight, RbmGradient& out);

// Mean negative log-likelihood of the data, with Z by enumeration.
double nll_exact(const RbmParams& params, std::span<const BinaryVector> data);

// <grad E>_data - <grad E>_model, model average by enumeration.
RbmGradient nll_gradient_exact(const RbmParams& params, std::span<const BinaryVector> data);

// Contrastive-divergence estimate of the same gradient: one chain per batch
// sample, started at that sample and advanced k block Gibbs steps.
RbmGradient cd_k_gradient(const RbmParams& params, std::span<const BinaryVector> batch, int k,
                          Rng& rng);

// KL(target || p_params), with 0 log 0 = 0.
double kl_divergence_exact(const RbmParams& params, const ExactDistribution& target);

struct TrainConfig {
  int n_hidden = 8;
  double learning_rate = 0.05;
  int batch_size = 100;
  int cd_steps = 10;
  int epochs = 100;
  double weight_decay = 0.0;
  std::uint64_t seed = 1234;
  double init_scale = 0.01;
  // When positive, the step size decays geometrically from learning_rate
  // at the first epoch to final_learning_rate at the last one. Epochs
  // count from 1.
  double final_learning_rate = 0.0;

  double learning_rate_at(int epoch) const;
  void validate() const;
};

using EpochCallback = std::function<void(int epoch, const RbmParams& params)>;

// Shuffled minibatch CD-k with plain SGD:
//   params -= learning_rate_at(epoch) * (gradient + weight_decay * weights)
// Weights start Gaussian with std init_scale; biases start at zero.
RbmParams train(std::span<const BinaryVector> data, const TrainConfig& config,
                const EpochCallback& on_epoch = {});

namespace detail {

// Supplies the positive-phase configurations for one datum. The first entry
// also seeds that datum's contrastive-divergence chain. `rng` is a private
// stream that does not feed the chains.
using PositivePhaseSource = std::function<void(const RbmParams& params, std::size_t datum,
                                               Rng& rng, std::vector<BinaryVector>& out)>;

// Advances one independent chain per start for k block Gibbs steps. Chain
// seeds are drawn from `rng` in order.
std::vector<BinaryVector> run_gibbs_chains(const RbmParams& params,
                                           std::span<const BinaryVector> starts, int k, Rng& rng);

// Shared minibatch loop behind train() and the noise-regularized trainer.
RbmParams run_cd_training(std::size_t n_data, int n_visible, const TrainConfig& config,
                          const PositivePhaseSource& positive, const EpochCallback& on_epoch);

// Derives an independent seed for sub-streams (chains, posterior samplers).
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace detail

}  // namespace nqst

#endif  // NQST_RBM_HPP
