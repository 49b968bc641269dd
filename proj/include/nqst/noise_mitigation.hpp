#ifndef NQST_NOISE_MITIGATION_HPP
#define NQST_NOISE_MITIGATION_HPP

#include "nqst/noise.hpp"
#include "nqst/positive.hpp"
#include "nqst/rbm.hpp"

namespace nqst {

// De-noised RBM p_lambda(s) behind a fixed readout layer p(tau | s).
struct NoisyTrainer {
  RbmParams base_params;
  NoiseModel noise;

  int n_sites() const { return base_params.n_visible(); }
  void validate() const;
};

// p~(tau) = sum_s p(tau | s) p_lambda(s), enumerated (n <= 20).
double noisy_marginal_exact(const NoisyTrainer& trainer, const BinaryVector& recorded);
// p~ over every recorded string, lexicographic order.
Vector noisy_distribution_exact(const NoisyTrainer& trainer);

// s ~ p(tau | s) p_lambda(s) / p~(tau) by Gibbs sweeps that start at s = tau.
// Each sweep samples h | s, then every s_i from
//   sigmoid((W^T h + b)_i + log p(tau_i | 1) / p(tau_i | 0)).
// Throws ValidationError when tau is impossible under the noise model.
BinaryVector posterior_sample(const NoisyTrainer& trainer, const BinaryVector& recorded, Rng& rng,
                              int sweeps = 10);

struct NoiseTrainConfig {
  TrainConfig base;
  int posterior_sweeps = 10;
  int posterior_samples = 1;  // per datum per epoch

  void validate() const;
};

// CD training whose positive phase averages posterior samples given each
// noisy record. With identity noise this is train_positive, bit for bit.
PositiveWavefunction train_with_noise(const MeasurementDataset& noisy, const NoiseModel& noise,
                                      const NoiseTrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace nqst

#endif  // NQST_NOISE_MITIGATION_HPP
