#include <cmath>

#include <gtest/gtest.h>

#include "nqst/complex_wavefunction.hpp"
#include "nqst/exact.hpp"
#include "nqst/observables.hpp"
#include "oracles.hpp"

using namespace nqst;

namespace {

ComplexWavefunction random_model(int n, int nh, std::uint64_t seed, double scale = 0.5) {
  Rng rng(seed);
  ComplexWavefunction m;
  m.amplitude_params = RbmParams::random(n, nh, scale, rng);
  m.phase_params = RbmParams::random(n, nh, scale, rng);
  return m;
}

Vector flat(const ComplexWavefunction& m) {
  const Vector a = m.amplitude_params.flatten();
  const Vector b = m.phase_params.flatten();
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

ComplexWavefunction unflat(const Vector& x, int n, int nh) {
  const auto na = static_cast<Eigen::Index>(n * nh + n + nh);
  return {RbmParams::unflatten(x.head(na), n, nh), RbmParams::unflatten(x.tail(na), n, nh)};
}

Vector flat(const ComplexGradient& g) {
  Vector out(g.amplitude.size() + g.phase.size());
  out << g.amplitude.flatten(), g.phase.flatten();
  return out;
}

RotationPlan plan_of(const std::vector<std::string>& bases, std::size_t shots) {
  RotationPlan plan;
  for (const auto& b : bases) plan.entries.push_back({basis_from_string(b), shots});
  return plan;
}

std::vector<BasisAssignment> assignments(const std::vector<std::string>& bases) {
  std::vector<BasisAssignment> out;
  for (const auto& b : bases) out.push_back(basis_from_string(b));
  return out;
}

ComplexTrainConfig two_qubit_config(std::uint64_t seed) {
  ComplexTrainConfig c;
  c.base.n_hidden = 8;
  c.base.learning_rate = 0.1;
  c.base.final_learning_rate = 0.002;
  c.base.batch_size = 50;
  c.base.cd_steps = 10;
  c.base.epochs = 300;
  c.base.seed = seed;
  return c;
}

DenseState two_qubit(double a00, double a01, double a10, double a11) {
  CVector v(4);
  v << a00, a01, a10, a11;
  return DenseState(v / v.norm());
}

}  // namespace

TEST(RotatedAmplitude, AllZIsPlainAmplitude) {
  const ComplexWavefunction m = random_model(3, 2, 1);
  const BinaryVector s = bits_from_string("101");
  EXPECT_LT(std::abs(rotated_amplitude(m, all_z(3), s) - std::exp(m.log_psi(s))), 1e-15);
}

TEST(RotatedAmplitude, UniformStateIsPlusEigenstate) {
  const ComplexWavefunction m{RbmParams(3, 2), RbmParams(3, 2)};
  const BasisAssignment b = basis_from_string("ZXZ");
  EXPECT_GT(std::abs(rotated_amplitude(m, b, bits_from_string("000"))), 0.1);
  EXPECT_LT(std::abs(rotated_amplitude(m, b, bits_from_string("010"))), 1e-12);
}

TEST(RotatedAmplitude, MatchesDenseRotation) {
  const ComplexWavefunction m = random_model(4, 3, 2);
  const double norm = std::exp(0.5 * log_partition_exact(m.amplitude_params));
  const DenseState psi = to_dense_state(m);
  for (const std::string text : {"XZZY", "ZYZZ", "ZZXX"}) {
    const DenseState rotated = rotate_state(psi, basis_from_string(text));
    for (std::uint64_t i = 0; i < 16; ++i) {
      const Complex want = rotated.amplitudes(static_cast<Eigen::Index>(i));
      const Complex got = rotated_amplitude(m, basis_from_string(text), bits_from_index(i, 4)) / norm;
      EXPECT_LT(std::abs(got - want), 1e-10 * std::max(std::abs(want), 1e-3)) << text << " " << i;
    }
  }
}

TEST(RotatedAmplitude, RejectsTooManyRotations) {
  const ComplexWavefunction m = random_model(4, 2, 3);
  EXPECT_THROW(rotated_amplitude(m, basis_from_string("XXXZ"), bits_from_string("0000"), 2), ValidationError);
  EXPECT_NO_THROW(rotated_amplitude(m, basis_from_string("XXXZ"), bits_from_string("0000"), 3));
}

TEST(ComplexGradients, PhaseGradientVanishesOnZData) {
  const ComplexWavefunction m = random_model(3, 2, 4);
  std::vector<Measurement> batch;
  for (std::uint64_t i = 0; i < 8; ++i) batch.push_back({all_z(3), bits_from_index(i, 3)});
  const ComplexGradient g = complex_gradients_exact(m, batch);
  EXPECT_EQ(g.phase.flatten().lpNorm<Eigen::Infinity>(), 0.0);
  Rng rng(5);
  const std::vector<BinaryVector> starts{batch.front().outcome};
  const ComplexGradient cd = complex_gradients(m, batch, starts, 2, rng);
  EXPECT_EQ(cd.phase.flatten().lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(ComplexGradients, MatchFiniteDifferences) {
  for (std::uint64_t draw = 0; draw < 5; ++draw) {
    const ComplexWavefunction m = random_model(2, 2, 100 + draw, 0.8);
    const auto data = sample_measurements(to_dense_state(random_model(2, 2, 200 + draw, 1.0)),
                                          assignments({"ZZ", "XZ", "ZY"}), 20, 300 + draw);
    const auto cost = [&](const Vector& x) { return complex_cost_exact(unflat(x, 2, 2), data.records, 1); };
    const Vector numeric = oracle::finite_difference(cost, flat(m), 1e-5);
    const Vector analytic = flat(complex_gradients_exact(m, data.records, 1));
    EXPECT_LT(oracle::relative_error(analytic, numeric), 1e-6) << draw;
  }
}

TEST(ComplexGradients, SampledModelTermAgreesWithExact) {
  const ComplexWavefunction m = random_model(3, 3, 6, 0.6);
  const auto data = sample_measurements(to_dense_state(m), assignments({"ZZZ", "XZZ", "ZYZ"}), 100, 7);
  std::vector<BinaryVector> starts;
  Rng pick(8);
  for (int i = 0; i < 20000; ++i) starts.push_back(bits_from_index(pick() % 8, 3));
  Rng rng(9);
  const Vector cd = flat(complex_gradients(m, data.records, starts, 200, rng));
  const Vector exact = flat(complex_gradients_exact(m, data.records));
  EXPECT_LT((cd - exact).lpNorm<Eigen::Infinity>(), 0.03);
}

TEST(ComplexGradients, VanishInExpectationAtTheTarget) {
  const ComplexWavefunction m = random_model(3, 2, 10, 0.6);
  const auto data = sample_measurements(to_dense_state(m), assignments({"ZZZ", "XZZ", "ZXY"}), 3000, 11);
  const Vector mean = flat(complex_gradients_exact(m, data.records));
  // Per-record spread of the data term, from single-record gradients.
  Vector sq = Vector::Zero(mean.size());
  for (const auto& r : data.records) {
    const Vector g = flat(complex_gradients_exact(m, std::span<const Measurement>(&r, 1)));
    sq += (g - mean).cwiseAbs2();
  }
  const auto n = static_cast<double>(data.size());
  const Vector sigma = (sq / (n - 1.0) / n).cwiseSqrt();
  for (Eigen::Index k = 0; k < mean.size(); ++k) EXPECT_LE(std::abs(mean(k)), 3.0 * sigma(k) + 1e-12) << k;
}

TEST(ComplexModel, ModulusComesFromAmplitudeMachine) {
  const ComplexWavefunction m = random_model(5, 3, 12, 1.0);
  const Vector p = exact_distribution(m.amplitude_params).probs;
  EXPECT_LT((to_dense_state(m).probabilities() - p).lpNorm<Eigen::Infinity>(), 1e-15);
}

TEST(ComplexModel, SamplingIgnoresPhaseMachine) {
  ComplexWavefunction a = random_model(5, 3, 13);
  ComplexWavefunction b = a;
  b.phase_params = random_model(5, 3, 14).phase_params;
  SamplingOptions o;
  o.n_samples = 2000;
  o.seed = 15;
  const auto ra = diagonal_expectation(a, SparseOperator::mean_sigma_z(5), o);
  const auto rb = diagonal_expectation(b, SparseOperator::mean_sigma_z(5), o);
  EXPECT_EQ(ra.mean, rb.mean);
  EXPECT_EQ(ra.std_error, rb.std_error);
}

TEST(ComplexModel, MismatchedMachinesRejected) {
  const ComplexWavefunction m{RbmParams(3, 2), RbmParams(4, 2)};
  EXPECT_THROW(m.validate(), DimensionError);
}

TEST(RotationPlan, Validation) {
  RotationPlan plan = plan_of({"ZZZ", "XYZ"}, 10);
  EXPECT_NO_THROW(plan.validate(3));
  plan.entries.push_back({basis_from_string("XXX"), 10});
  EXPECT_THROW(plan.validate(3), ValidationError);
  EXPECT_THROW(plan_of({"ZZ"}, 1).validate(3), DimensionError);
}

TEST(TrainComplex, BellState) {
  const DenseState target = two_qubit(1, 0, 0, 1);
  const std::vector<std::string> bases{"ZZ", "XZ", "ZX", "XX"};
  const auto data = sample_measurements(target, assignments(bases), 2000, 16);
  const ComplexWavefunction m = train_complex(data, plan_of(bases, 2000), two_qubit_config(17));
  EXPECT_GE(fidelity_exact_complex(m, target), 0.99);
}

TEST(TrainComplex, SingletNeedsRotatedBases) {
  const DenseState target = two_qubit(0, 1, -1, 0);
  const std::vector<std::string> bases{"ZZ", "XX", "XY"};
  const auto data = sample_measurements(target, assignments(bases), 2000, 18);
  ComplexTrainConfig c = two_qubit_config(19);
  c.base.learning_rate = 0.2;
  c.base.epochs = 600;
  const ComplexWavefunction m = train_complex(data, plan_of(bases, 2000), c);
  EXPECT_GE(fidelity_exact_complex(m, target), 0.99);

  const auto z_only = sample_measurements(target, {all_z(2)}, 6000, 20);
  const ComplexWavefunction blind = train_complex(z_only, plan_of({"ZZ"}, 6000), two_qubit_config(21));
  // The moduli are learned but the relative sign is not.
  const Vector p = exact_distribution(blind.amplitude_params).probs;
  EXPECT_NEAR(p(1) + p(2), 1.0, 0.02);
  EXPECT_LT(fidelity_exact_complex(blind, target), 0.6);
}

TEST(TrainComplex, RandomPhasesFourQubits) {
  Rng rng(22);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  CVector amps(16);
  for (auto& a : amps) a = std::abs(gauss(rng)) * std::polar(1.0, angle(rng));
  const DenseState target(amps / amps.norm());
  std::vector<std::string> bases{"ZZZZ"};
  for (int site = 0; site < 4; ++site) {
    for (char p : {'X', 'Y'}) {
      std::string b = "ZZZZ";
      b[static_cast<std::size_t>(site)] = p;
      bases.push_back(b);
    }
  }
  const std::size_t shots = 100000;
  const auto data = sample_measurements(target, assignments(bases), shots, 23);
  ComplexTrainConfig c;
  c.base.n_hidden = 16;
  c.base.learning_rate = 0.3;
  c.base.final_learning_rate = 0.005;
  c.base.batch_size = 100;
  c.base.cd_steps = 10;
  c.base.epochs = 8;
  c.base.seed = 24;
  const ComplexWavefunction m = train_complex(data, plan_of(bases, shots), c);
  EXPECT_GE(fidelity_exact_complex(m, target), 0.95);
}

TEST(FidelityComplex, Identities) {
  const ComplexWavefunction m = random_model(4, 3, 25);
  const DenseState psi = to_dense_state(m);
  EXPECT_NEAR(fidelity_exact_complex(m, psi), 1.0, 1e-10);
  const DenseState rotated(psi.amplitudes * std::polar(1.0, 0.77));
  EXPECT_NEAR(fidelity_exact_complex(m, rotated), 1.0, 1e-10);
  const DenseState other = to_dense_state(random_model(4, 3, 26));
  const CMatrix ra = psi.amplitudes * psi.amplitudes.adjoint();
  const CMatrix rb = other.amplitudes * other.amplitudes.adjoint();
  const double via_trace = (ra * rb).trace().real();
  EXPECT_LT(std::abs(fidelity_exact_complex(m, other) - via_trace) / via_trace, 1e-10);
}
