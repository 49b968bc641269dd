#include "nqst/noise_mitigation.hpp"

#include <cmath>

#include <fmt/format.h>

namespace nqst {

void NoisyTrainer::validate() const {
  base_params.validate();
  noise.validate();
  if (noise.n_sites() != n_sites()) {
    throw DimensionError(fmt::format("noise model covers {} sites, model has {}", noise.n_sites(), n_sites()));
  }
}

namespace {

void check_recorded(const NoisyTrainer& trainer, const BinaryVector& recorded) {
  if (recorded.size() != trainer.n_sites()) {
    throw DimensionError(fmt::format("record has {} entries, model has {} sites", recorded.size(),
                                     trainer.n_sites()));
  }
  if (!is_binary(recorded)) throw ValidationError("record must be binary");
}

}  // namespace

double noisy_marginal_exact(const NoisyTrainer& trainer, const BinaryVector& recorded) {
  trainer.validate();
  check_recorded(trainer, recorded);
  const int n = trainer.n_sites();
  require_enumerable(n, 20);
  const auto dist = exact_distribution(trainer.base_params);
  double total = 0.0;
  for (Eigen::Index i = 0; i < dist.probs.size(); ++i) {
    total += dist.probs(i) *
             trainer.noise.likelihood(recorded, bits_from_index(static_cast<std::uint64_t>(i), n));
  }
  return total;
}

Vector noisy_distribution_exact(const NoisyTrainer& trainer) {
  trainer.validate();
  const int n = trainer.n_sites();
  require_enumerable(n, 20);
  Vector p = exact_distribution(trainer.base_params).probs;
  // Push the distribution through one site's channel at a time.
  for (int site = 0; site < n; ++site) {
    const auto& m = trainer.noise.confusion[static_cast<std::size_t>(site)];
    const Eigen::Index stride = Eigen::Index{1} << (n - 1 - site);
    for (Eigen::Index base = 0; base < p.size(); base += 2 * stride) {
      for (Eigen::Index k = base; k < base + stride; ++k) {
        const double p0 = p(k);
        const double p1 = p(k + stride);
        p(k) = m(0, 0) * p0 + m(1, 0) * p1;
        p(k + stride) = m(0, 1) * p0 + m(1, 1) * p1;
      }
    }
  }
  return p;
}

BinaryVector posterior_sample(const NoisyTrainer& trainer, const BinaryVector& recorded, Rng& rng,
                              int sweeps) {
  check_recorded(trainer, recorded);
  if (sweeps < 1) throw ValidationError("posterior_sweeps must be at least 1");
  const int n = trainer.n_sites();
  Vector odds(n);
  for (int i = 0; i < n; ++i) {
    odds(i) = trainer.noise.log_odds(i, recorded(i));
    if (std::isnan(odds(i))) {
      throw ValidationError(fmt::format("recorded bit {} at site {} is impossible under the noise model",
                                        recorded(i), i));
    }
  }
  const auto& params = trainer.base_params;
  BinaryVector s = recorded;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    const BinaryVector h = sample_bernoulli(conditional_hidden(params, s), rng);
    const Vector field = params.weights.transpose() * h + params.visible_bias + odds;
    for (int i = 0; i < n; ++i) s(i) = uniform01(rng) < sigmoid(field(i)) ? 1.0 : 0.0;
  }
  return s;
}

void NoiseTrainConfig::validate() const {
  base.validate();
  if (posterior_sweeps < 1) throw ValidationError("posterior_sweeps must be at least 1");
  if (posterior_samples < 1) throw ValidationError("posterior_samples must be at least 1");
}

PositiveWavefunction train_with_noise(const MeasurementDataset& noisy, const NoiseModel& noise,
                                      const NoiseTrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  noisy.validate();
  noise.validate();
  if (!noisy.all_z()) throw ValidationError("noise-regularized training needs Z-basis records only");
  if (noise.n_sites() != noisy.n_sites) {
    throw DimensionError(fmt::format("noise model covers {} sites, dataset has {}", noise.n_sites(),
                                     noisy.n_sites));
  }
  const auto outcomes = noisy.outcomes();
  for (const auto& tau : outcomes) {
    for (int i = 0; i < noisy.n_sites; ++i) {
      if (std::isnan(noise.log_odds(i, tau(i)))) {
        throw ValidationError(fmt::format("a record has an impossible bit at site {}", i));
      }
    }
  }
  const bool identity = noise.is_identity();
  const auto positive = [&](const RbmParams& params, std::size_t datum, Rng& rng,
                            std::vector<BinaryVector>& out) {
    if (identity) {
      out.assign(1, outcomes[datum]);
      return;
    }
    const NoisyTrainer trainer{params, noise};
    out.clear();
    for (int k = 0; k < config.posterior_samples; ++k) {
      out.push_back(posterior_sample(trainer, outcomes[datum], rng, config.posterior_sweeps));
    }
  };
  return PositiveWavefunction{
      detail::run_cd_training(outcomes.size(), noisy.n_sites, config.base, positive, on_epoch)};
}

}  // namespace nqst
