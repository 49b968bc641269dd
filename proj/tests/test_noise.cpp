#include <cmath>

#include <gtest/gtest.h>

#include "nqst/hamiltonian.hpp"
#include "nqst/noise_mitigation.hpp"
#include "oracles.hpp"

using namespace nqst;

namespace {

NoisyTrainer random_trainer(int n, double flip, std::uint64_t seed) {
  Rng rng(seed);
  return {RbmParams::random(n, 3, 0.8, rng), NoiseModel::symmetric_flip(n, flip)};
}

// p(tau | s) written out per site.
double flip_likelihood(const Vector& tau, const Vector& s, double flip) {
  double p = 1.0;
  for (Eigen::Index i = 0; i < tau.size(); ++i) p *= tau(i) == s(i) ? 1.0 - flip : flip;
  return p;
}

Vector posterior_by_bayes(const RbmParams& params, const Vector& tau, double flip) {
  const Vector prior = oracle::marginal_by_joint_sum(params);
  const int n = params.n_visible();
  Vector post(prior.size());
  for (Eigen::Index i = 0; i < prior.size(); ++i) {
    post(i) = prior(i) * flip_likelihood(tau, oracle::unpack(static_cast<std::uint64_t>(i), n), flip);
  }
  return post / post.sum();
}

Vector empirical_posterior(const NoisyTrainer& t, const BinaryVector& tau, int samples, int sweeps, std::uint64_t seed) {
  Rng rng(seed);
  Vector counts = Vector::Zero(1 << t.n_sites());
  for (int k = 0; k < samples; ++k) {
    counts(static_cast<Eigen::Index>(index_from_bits(posterior_sample(t, tau, rng, sweeps)))) += 1.0;
  }
  return counts / samples;
}

double total_variation(const Vector& a, const Vector& b) { return 0.5 * (a - b).lpNorm<1>(); }

}  // namespace

TEST(NoisyMarginal, IdentityNoiseIsTheModel) {
  NoisyTrainer t = random_trainer(4, 0.0, 1);
  t.noise = NoiseModel::identity(4);
  EXPECT_LT((noisy_distribution_exact(t) - exact_distribution(t.base_params).probs).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(NoisyMarginal, HalfFlipsAreUniform) {
  const NoisyTrainer t = random_trainer(4, 0.5, 2);
  EXPECT_LT((noisy_distribution_exact(t).array() - 1.0 / 16.0).abs().maxCoeff(), 1e-14);
}

TEST(NoisyMarginal, MatchesDoubleSum) {
  const NoisyTrainer t = random_trainer(3, 0.05, 3);
  const Vector prior = oracle::marginal_by_joint_sum(t.base_params);
  double total = 0.0;
  for (std::uint64_t ti = 0; ti < 8; ++ti) {
    double want = 0.0;
    for (std::uint64_t si = 0; si < 8; ++si) {
      want += prior(static_cast<Eigen::Index>(si)) * flip_likelihood(oracle::unpack(ti, 3), oracle::unpack(si, 3), 0.05);
    }
    const double got = noisy_marginal_exact(t, bits_from_index(ti, 3));
    EXPECT_NEAR(got / want, 1.0, 1e-12);
    total += got;
  }
  EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(NoisyMarginal, AsymmetricNoiseSumsToOne) {
  NoisyTrainer t = random_trainer(5, 0.0, 4);
  t.noise = NoiseModel::identity(5);
  for (int i = 0; i < 5; ++i) t.noise.confusion[static_cast<std::size_t>(i)] << 0.9 - 0.02 * i, 0.1 + 0.02 * i, 0.07, 0.93;
  EXPECT_NEAR(noisy_distribution_exact(t).sum(), 1.0, 1e-10);
}

TEST(PosteriorSample, IdentityNoiseIsPointMass) {
  NoisyTrainer t = random_trainer(4, 0.0, 5);
  t.noise = NoiseModel::identity(4);
  Rng rng(6);
  const BinaryVector tau = bits_from_string("1011");
  for (int k = 0; k < 200; ++k) EXPECT_EQ(posterior_sample(t, tau, rng), tau);
}

TEST(PosteriorSample, HalfFlipsGivePrior) {
  const NoisyTrainer t = random_trainer(3, 0.5, 7);
  const Vector prior = oracle::marginal_by_joint_sum(t.base_params);
  EXPECT_LT(total_variation(empirical_posterior(t, bits_from_string("110"), 100000, 10, 8), prior), 0.02);
}

TEST(PosteriorSample, MatchesBayesRule) {
  const NoisyTrainer t = random_trainer(3, 0.05, 9);
  for (const std::string s : {"000", "101"}) {
    const BinaryVector tau = bits_from_string(s);
    const Vector want = posterior_by_bayes(t.base_params, tau, 0.05);
    EXPECT_LT(total_variation(empirical_posterior(t, tau, 100000, 10, 10), want), 0.02) << s;
  }
}

TEST(PosteriorSample, RejectsImpossibleRecords) {
  NoisyTrainer t = random_trainer(2, 0.0, 11);
  t.noise = NoiseModel::identity(2);
  t.noise.confusion[0] << 1.0, 0.0, 1.0, 0.0;  // site 0 always reads 0
  Rng rng(12);
  EXPECT_THROW(posterior_sample(t, bits_from_string("10"), rng), ValidationError);
}

TEST(TrainWithNoise, IdentityNoiseReproducesPlainTraining) {
  Rng rng(13);
  MeasurementDataset data{4, {}};
  for (int i = 0; i < 300; ++i) data.records.push_back({all_z(4), bits_from_index(rng() % 16, 4)});
  NoiseTrainConfig c;
  c.base.n_hidden = 3;
  c.base.epochs = 5;
  c.base.batch_size = 32;
  c.base.learning_rate = 0.1;
  EXPECT_EQ(train_with_noise(data, NoiseModel::identity(4), c).params, train_positive(data, c.base).params);
}

TEST(TrainWithNoise, PointMassUnderTenPercentFlips) {
  const DenseState zero = DenseState::basis_state(BinaryVector::Zero(4));
  const NoiseModel noise = NoiseModel::symmetric_flip(4, 0.1);
  const auto noisy = apply_noise(sample_measurements(zero, {all_z(4)}, 2000, 14), noise, 15);
  NoiseTrainConfig c;
  c.base.n_hidden = 4;
  c.base.learning_rate = 0.2;
  c.base.final_learning_rate = 0.01;
  c.base.epochs = 100;
  c.base.batch_size = 50;
  c.base.cd_steps = 5;
  c.base.seed = 16;
  const PositiveWavefunction m = train_with_noise(noisy, noise, c);
  EXPECT_GE(exact_distribution(m.params).probs(0), 0.95);
}

TEST(TrainWithNoise, TfimEightSites) {
  HamiltonianSpec spec;
  spec.n_sites = 8;
  spec.tfim_field = 0.4;
  const DenseState target = ed_ground_state(spec).state;
  const NoiseModel noise = NoiseModel::symmetric_flip(8, 0.05);
  const auto noisy = apply_noise(sample_measurements(target, {all_z(8)}, 10000, 17), noise, 18);

  // Even a perfect fit of the noisy data stays below the naive bound.
  const Vector p = target.probabilities();
  double overlap = 0.0;
  for (std::uint64_t t = 0; t < 256; ++t) {
    double noisy_p = 0.0;
    for (std::uint64_t s = 0; s < 256; ++s) {
      noisy_p += p(static_cast<Eigen::Index>(s)) * flip_likelihood(oracle::unpack(t, 8), oracle::unpack(s, 8), 0.05);
    }
    overlap += std::sqrt(noisy_p * p(static_cast<Eigen::Index>(t)));
  }
  EXPECT_LE(overlap * overlap, 0.90);

  NoiseTrainConfig c;
  c.base.n_hidden = 16;
  c.base.learning_rate = 0.1;
  c.base.final_learning_rate = 0.001;
  c.base.epochs = 200;
  c.base.batch_size = 50;
  c.base.cd_steps = 20;
  c.base.seed = 19;
  EXPECT_GE(fidelity_exact(train_with_noise(noisy, noise, c), target), 0.97);
  EXPECT_LE(fidelity_exact(train_positive(noisy, c.base), target), 0.90);
}
