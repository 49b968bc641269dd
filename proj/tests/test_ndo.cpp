#include <cmath>

#include <gtest/gtest.h>

#include "nqst/density_operator.hpp"
#include "nqst/exact.hpp"
#include "oracles.hpp"

using namespace nqst;

namespace {

NeuralDensityOperator random_ndo(int n, int nh, int n_aux, std::uint64_t seed, double scale = 0.5) {
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, scale);
  NeuralDensityOperator m;
  m.amplitude_params = RbmParams::random(n, nh, scale, rng);
  m.phase_params = RbmParams::random(n, nh, scale, rng);
  m.aux_amplitude_weights = Matrix(n_aux, n);
  m.aux_phase_weights = Matrix(n_aux, n);
  for (auto& x : m.aux_amplitude_weights.reshaped()) x = gauss(rng);
  for (auto& x : m.aux_phase_weights.reshaped()) x = gauss(rng);
  return m;
}

// psi(s, a) with the auxiliary units kept explicit.
Complex purified_amplitude(const NeuralDensityOperator& m, const Vector& s, const Vector& a) {
  const double e_lambda = oracle::free_energy_by_hidden_sum(m.amplitude_params, s);
  const double e_mu = oracle::free_energy_by_hidden_sum(m.phase_params, s);
  const Complex exponent = -0.5 * Complex(e_lambda, e_mu) +
                           0.5 * Complex(a.dot(m.aux_amplitude_weights * s), a.dot(m.aux_phase_weights * s));
  return std::exp(exponent);
}

// rho = sum_a psi(., a) psi(., a)^dagger, trace-normalized.
CMatrix purification_by_brute_force(const NeuralDensityOperator& m) {
  const int n = m.n_sites();
  const int n_aux = m.n_aux();
  CMatrix rho = CMatrix::Zero(1 << n, 1 << n);
  for (std::uint64_t ai = 0; ai < (1ULL << n_aux); ++ai) {
    const Vector a = oracle::unpack(ai, n_aux);
    CVector column(1 << n);
    for (std::uint64_t si = 0; si < (1ULL << n); ++si) {
      column(static_cast<Eigen::Index>(si)) = purified_amplitude(m, oracle::unpack(si, n), a);
    }
    rho += column * column.adjoint();
  }
  return rho / rho.trace();
}

double purity(const CMatrix& rho) { return (rho * rho).trace().real(); }

double min_eigenvalue(const CMatrix& rho) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(rho, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

std::vector<BasisAssignment> pauli_pairs() {
  std::vector<BasisAssignment> out;
  for (Pauli a : {Pauli::Z, Pauli::X, Pauli::Y}) {
    for (Pauli b : {Pauli::Z, Pauli::X, Pauli::Y}) out.push_back({a, b});
  }
  return out;
}

RotationPlan plan_of(const std::vector<BasisAssignment>& bases, std::size_t shots) {
  RotationPlan plan;
  for (const auto& b : bases) plan.entries.push_back({b, shots});
  return plan;
}

NdoTrainConfig ndo_config(std::uint64_t seed) {
  NdoTrainConfig c;
  c.base.n_hidden = 4;
  c.base.learning_rate = 0.1;
  c.base.final_learning_rate = 0.002;
  c.base.batch_size = 50;
  c.base.cd_steps = 10;
  c.base.epochs = 200;
  c.base.seed = seed;
  c.n_aux = 4;
  return c;
}

}  // namespace

TEST(NdoElement, MatchesBruteForcePurification) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const NeuralDensityOperator m = random_ndo(3, 2, 3, seed, 0.8);
    const CMatrix want = purification_by_brute_force(m);
    const CMatrix got = ndo_dense(m).entries;
    EXPECT_LT((got - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff(), 1e-10) << seed;
  }
}

TEST(NdoElement, LargePhaseWeightsStayOnTheRightBranch) {
  const NeuralDensityOperator m = random_ndo(3, 2, 2, 4, 4.0);
  const CMatrix want = purification_by_brute_force(m);
  EXPECT_LT((ndo_dense(m).entries - want).cwiseAbs().maxCoeff() / want.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(NdoElement, HermitianByConstruction) {
  const NeuralDensityOperator m = random_ndo(4, 3, 3, 5, 1.0);
  for (std::uint64_t i = 0; i < 16; ++i) {
    for (std::uint64_t j = 0; j < 16; ++j) {
      const BinaryVector s = bits_from_index(i, 4);
      const BinaryVector t = bits_from_index(j, 4);
      EXPECT_EQ(ndo_element(m, s, t), std::conj(ndo_element(m, t, s)));
    }
  }
}

TEST(NdoElement, PureWhenAuxiliaryWeightsVanish) {
  NeuralDensityOperator m = random_ndo(3, 3, 2, 6, 0.8);
  m.aux_amplitude_weights.setZero();
  m.aux_phase_weights.setZero();
  const CMatrix rho = ndo_dense(m).entries;
  double worst = 0.0;
  for (Eigen::Index a = 0; a < 8; ++a) {
    for (Eigen::Index b = 0; b < 8; ++b) {
      for (Eigen::Index c = 0; c < 8; ++c) {
        for (Eigen::Index d = 0; d < 8; ++d) worst = std::max(worst, std::abs(rho(a, c) * rho(b, d) - rho(a, d) * rho(b, c)));
      }
    }
  }
  EXPECT_LT(worst, 1e-10);
  EXPECT_NEAR(purity(rho), 1.0, 1e-10);
}

TEST(NdoElement, RejectsWidthMismatch) {
  const NeuralDensityOperator m = random_ndo(3, 2, 2, 7);
  EXPECT_THROW(ndo_element(m, bits_from_string("01"), bits_from_string("011")), DimensionError);
}

TEST(NdoDense, PhysicalForRandomModels) {
  for (int n = 2; n <= 6; ++n) {
    const NeuralDensityOperator m = random_ndo(n, 3, 3, 10 + static_cast<std::uint64_t>(n), 1.0);
    const DenseDensityMatrix rho = ndo_dense(m);
    EXPECT_NEAR(rho.entries.trace().real(), 1.0, 1e-12);
    EXPECT_GE(min_eigenvalue(rho.entries), -1e-8);
    EXPECT_NO_THROW(rho.check_physical());
  }
}

TEST(NdoDense, RejectsLargeSystems) {
  EXPECT_THROW(ndo_dense(random_ndo(13, 1, 1, 8)), EnumerationBoundError);
}

TEST(NdoDense, PurityApproachesOneAsMixingVanishes) {
  const NeuralDensityOperator base = random_ndo(3, 3, 3, 20, 0.8);
  NeuralDensityOperator pure = base;
  pure.aux_amplitude_weights.setZero();
  pure.aux_phase_weights.setZero();
  const DenseDensityMatrix target = ndo_dense(pure);
  double previous = std::numeric_limits<double>::infinity();
  for (double scale : {1.0, 0.5, 0.25, 0.1, 0.01, 0.001}) {
    NeuralDensityOperator m = base;
    m.aux_amplitude_weights *= scale;
    m.aux_phase_weights *= scale;
    const double d = trace_distance(ndo_dense(m), target);
    EXPECT_LT(d, previous) << scale;
    previous = d;
  }
  EXPECT_LT(previous, 1e-2);
}

TEST(NdoDiagonal, IsAnRbmMarginal) {
  const NeuralDensityOperator m = random_ndo(4, 3, 2, 21, 0.8);
  const Vector diag = ndo_dense(m).entries.diagonal().real();
  EXPECT_LT((exact_distribution(m.diagonal_params()).probs - diag).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(NdoDiagonal, GibbsSamplerMatchesEnumeration) {
  const NeuralDensityOperator m = random_ndo(3, 2, 2, 22, 0.8);
  const Vector diag = ndo_dense(m).entries.diagonal().real();
  const RbmParams p = m.diagonal_params();
  Rng rng(23);
  BinaryVector v = bits_from_string("000");
  block_gibbs_steps(p, v, 100, rng);
  Vector counts = Vector::Zero(8);
  const int steps = 1000000;
  for (int t = 0; t < steps; ++t) {
    block_gibbs_steps(p, v, 1, rng);
    counts(static_cast<Eigen::Index>(index_from_bits(v))) += 1.0;
  }
  EXPECT_LT(0.5 * (counts / steps - diag).lpNorm<1>(), 0.02);
}

TEST(NdoGradients, MatchFiniteDifferences) {
  for (std::uint64_t draw = 0; draw < 5; ++draw) {
    NeuralDensityOperator m = random_ndo(2, 2, 2, 30 + draw, 0.6);
    const auto data = sample_measurements(ndo_dense(random_ndo(2, 2, 2, 40 + draw, 1.0)), pauli_pairs(), 5, 50 + draw);
    const auto cost = [&](const Vector& x) {
      NeuralDensityOperator probe = m;
      probe.unflatten(x);
      return ndo_cost_exact(probe, data.records);
    };
    const Vector numeric = oracle::finite_difference(cost, m.flatten(), 1e-5);
    const Vector analytic = ndo_gradients_exact(m, data.records).flatten();
    EXPECT_LT(oracle::relative_error(analytic, numeric), 1e-6) << draw;
  }
}

TEST(NdoGradients, SampledModelTermAgreesWithExact) {
  const NeuralDensityOperator m = random_ndo(3, 2, 2, 60, 0.6);
  const auto data = sample_measurements(ndo_dense(m), {all_z(3), basis_from_string("XZY")}, 100, 61);
  std::vector<BinaryVector> starts;
  Rng pick(62);
  for (int i = 0; i < 20000; ++i) starts.push_back(bits_from_index(pick() % 8, 3));
  Rng rng(63);
  const Vector cd = ndo_gradients(m, data.records, starts, 200, rng).flatten();
  const Vector exact = ndo_gradients_exact(m, data.records).flatten();
  EXPECT_LT((cd - exact).lpNorm<Eigen::Infinity>(), 0.03);
}

TEST(NdoFlatten, RoundTrip) {
  const NeuralDensityOperator m = random_ndo(3, 2, 4, 64);
  NeuralDensityOperator copy = random_ndo(3, 2, 4, 65);
  copy.unflatten(m.flatten());
  EXPECT_EQ(copy.flatten(), m.flatten());
  EXPECT_THROW(copy.unflatten(Vector::Zero(3)), DimensionError);
}

TEST(TrainNdo, PureBellState) {
  CVector bell = CVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const DenseDensityMatrix target = DenseDensityMatrix::pure(DenseState(bell));
  const auto data = sample_measurements(target, pauli_pairs(), 2000, 70);
  const DenseDensityMatrix rho = ndo_dense(train_ndo(data, plan_of(pauli_pairs(), 2000), ndo_config(71)));
  EXPECT_LE(trace_distance(rho, target), 0.05);
  EXPECT_GE(rho.purity(), 0.95);
}

TEST(TrainNdo, MaximallyMixedQubit) {
  const std::vector<BasisAssignment> bases{{Pauli::Z}, {Pauli::X}, {Pauli::Y}};
  const DenseDensityMatrix target(CMatrix::Identity(2, 2) / 2.0);
  const auto data = sample_measurements(target, bases, 2000, 72);
  const DenseDensityMatrix rho = ndo_dense(train_ndo(data, plan_of(bases, 2000), ndo_config(73)));
  EXPECT_LE(rho.purity(), 0.55);
}
