#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "nqst/basis.hpp"
#include "nqst/exact.hpp"
#include "nqst/hamiltonian.hpp"
#include "nqst/ising.hpp"
#include "nqst/noise.hpp"
#include "oracles.hpp"

using namespace nqst;

namespace {

DenseState random_state(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  CVector amps(1 << n);
  for (auto& a : amps) a = Complex(gauss(rng), gauss(rng));
  return DenseState(amps / amps.norm());
}

HamiltonianSpec tfim(int n, double h) {
  HamiltonianSpec s;
  s.kind = HamiltonianKind::Tfim;
  s.n_sites = n;
  s.tfim_field = h;
  return s;
}

// TFIM on an open chain built from Kronecker products.
CMatrix tfim_by_kron(int n, double h) {
  const int dim = 1 << n;
  CMatrix hm = CMatrix::Zero(dim, dim);
  for (int i = 0; i + 1 < n; ++i) hm -= oracle::on_site(oracle::pauli_z(), i, n) * oracle::on_site(oracle::pauli_z(), i + 1, n);
  for (int i = 0; i < n; ++i) hm -= h * oracle::on_site(oracle::pauli_x(), i, n);
  return hm;
}

// Nearest-neighbour energy with neighbours listed by hand.
double ising_energy_by_hand(int L, int dim, bool periodic, std::uint64_t index) {
  const int n = dim == 1 ? L : L * L;
  auto spin = [&](int site) { return 1.0 - 2.0 * oracle::bit(index, site, n); };
  double e = 0.0;
  if (dim == 1) {
    for (int x = 0; x < L; ++x) {
      if (x + 1 < L) e -= spin(x) * spin(x + 1);
      else if (periodic) e -= spin(x) * spin(0);
    }
    return e;
  }
  for (int y = 0; y < L; ++y) {
    for (int x = 0; x < L; ++x) {
      const int s = y * L + x;
      if (x + 1 < L) e -= spin(s) * spin(y * L + x + 1);
      else if (periodic) e -= spin(s) * spin(y * L);
      if (y + 1 < L) e -= spin(s) * spin((y + 1) * L + x);
      else if (periodic) e -= spin(s) * spin(x);
    }
  }
  return e;
}

}  // namespace

TEST(IsingMc, DeepFerromagnet) {
  const IsingLattice lattice{4, 2, true, 10.0};
  const auto data = ising_mc_sample(lattice, 2000, 2, 500, 1);
  EXPECT_GT(ising_sample_averages(lattice, data.outcomes()).abs_magnetization, 0.99);
  EXPECT_TRUE(data.all_z());
}

TEST(IsingMc, InfiniteTemperature) {
  const IsingLattice lattice{4, 2, true, 0.01};
  const auto data = ising_mc_sample(lattice, 20000, 1, 100, 2);
  double sum = 0.0;
  for (const auto& v : data.outcomes()) sum += ising_magnetization(lattice, v);
  const double n = static_cast<double>(data.size());
  // Per-site magnetization of 16 nearly independent spins has variance 1/16.
  EXPECT_NEAR(sum / n, 0.0, 3.0 * std::sqrt(1.0 / 16.0 / n));
}

TEST(IsingMc, TwoByTwoEnergyHistogram) {
  const IsingLattice lattice{2, 2, true, 0.4};
  std::map<double, double> exact;
  double z = 0.0;
  for (std::uint64_t i = 0; i < 16; ++i) {
    const double e = ising_energy_by_hand(2, 2, true, i);
    exact[e] += std::exp(-0.4 * e);
    z += std::exp(-0.4 * e);
  }
  const std::size_t n = 50000;
  const auto data = ising_mc_sample(lattice, n, 5, 200, 3);
  std::map<double, double> counts;
  for (const auto& v : data.outcomes()) counts[ising_energy(lattice, v)] += 1.0;
  for (const auto& [e, w] : exact) {
    const double p = w / z;
    EXPECT_NEAR(counts[e] / static_cast<double>(n), p, 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(n))) << e;
  }
}

TEST(IsingMc, AveragesMatchEnumeration) {
  for (const IsingLattice lattice : {IsingLattice{2, 2, true, 0.4}, IsingLattice{6, 1, true, 0.7}}) {
    const Vector probs = ising_boltzmann_distribution(lattice);
    const ThermoAverages exact = ising_distribution_averages(lattice, probs);
    const std::size_t n = 40000;
    const auto configs = ising_mc_sample(lattice, n, 5, 500, 4).outcomes();
    const ThermoAverages mc = ising_sample_averages(lattice, configs);
    const double e_var = exact.energy_sq - exact.energy * exact.energy;
    double m_sq = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
      const double m = std::abs(ising_magnetization(lattice, bits_from_index(static_cast<std::uint64_t>(i), lattice.n_sites())));
      m_sq += probs(i) * m * m;
    }
    const double m_var = m_sq - exact.abs_magnetization * exact.abs_magnetization;
    // Thinned samples still carry some correlation; allow twice the
    // independent-sample error on top of the 3 sigma band.
    EXPECT_NEAR(mc.energy, exact.energy, 6.0 * std::sqrt(e_var / static_cast<double>(n)));
    EXPECT_NEAR(mc.abs_magnetization, exact.abs_magnetization, 6.0 * std::sqrt(m_var / static_cast<double>(n)));
  }
}

TEST(IsingLattice, EnergyMatchesHandCount) {
  for (const IsingLattice lattice : {IsingLattice{3, 2, true, 1.0}, IsingLattice{3, 2, false, 1.0},
                                     IsingLattice{5, 1, false, 1.0}, IsingLattice{2, 2, true, 1.0}}) {
    const int n = lattice.n_sites();
    for (std::uint64_t i = 0; i < (1ULL << n); i += 7) {
      EXPECT_DOUBLE_EQ(ising_energy(lattice, bits_from_index(i, n)),
                       ising_energy_by_hand(lattice.linear_size, lattice.dimension, lattice.periodic, i));
    }
  }
}

TEST(IsingLattice, Validation) {
  EXPECT_THROW((IsingLattice{1, 2, true, 1.0}.validate()), ValidationError);
  EXPECT_THROW((IsingLattice{4, 3, true, 1.0}.validate()), ValidationError);
  EXPECT_THROW((IsingLattice{4, 2, true, 0.0}.validate()), ValidationError);
}

TEST(EdGroundState, FieldDominatedLimit) {
  for (int n : {3, 6}) {
    const GroundState g = ed_ground_state(tfim(n, 1000.0));
    const CVector plus = CVector::Constant(1 << n, 1.0 / std::sqrt(static_cast<double>(1 << n)));
    EXPECT_LT(1.0 - std::norm(plus.dot(g.state.amplitudes)), 1e-4);
    // First-order perturbation theory: each of the n - 1 bonds mixes in a
    // two-flip state with weight 1 / (4h).
    EXPECT_NEAR((g.state.amplitudes - plus).norm(), std::sqrt(n - 1.0) / 4000.0, 1e-6);
    EXPECT_GT(sigma_x_expectations(g.state).minCoeff(), 0.999);
  }
}

TEST(EdGroundState, TwoSiteTfim) {
  const CMatrix h = tfim_by_kron(2, 1.0);
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  const GroundState g = ed_ground_state(tfim(2, 1.0));
  EXPECT_NEAR(g.energy, eig.eigenvalues()(0), 1e-12);
  EXPECT_NEAR(g.energy, -std::sqrt(5.0), 1e-12);
}

TEST(EdGroundState, MatchesKroneckerHamiltonian) {
  const CMatrix h = tfim_by_kron(6, 0.7);
  EXPECT_LT((dense_hamiltonian(tfim(6, 0.7)).cast<Complex>() - h).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  const GroundState g = ed_ground_state(tfim(6, 0.7));
  EXPECT_NEAR(g.energy, eig.eigenvalues()(0), 1e-10);
  EXPECT_NEAR(std::abs(eig.eigenvectors().col(0).dot(g.state.amplitudes)), 1.0, 1e-10);
}

TEST(EdGroundState, RydbergZ2Order) {
  HamiltonianSpec s;
  s.kind = HamiltonianKind::Rydberg;
  s.n_sites = 8;
  s.rydberg_rabi = 1.0;
  s.rydberg_vnn = 10.0;
  s.rydberg_detuning = 4.0;
  const Vector n = occupation_expectations(ed_ground_state(s).state);
  // Open-chain edges pin the pattern from both ends; check the left half.
  for (int i = 0; i < 3; ++i) EXPECT_GT(std::abs(n(i) - n(i + 1)), 0.2) << i;
  for (int i = 0; i < 2; ++i) EXPECT_LT((n(i) - n(i + 1)) * (n(i + 1) - n(i + 2)), 0.0) << i;
  EXPECT_NEAR(n(0), n(7), 1e-8);
}

TEST(EdGroundState, RydbergMatchesKroneckerHamiltonian) {
  HamiltonianSpec s;
  s.kind = HamiltonianKind::Rydberg;
  s.n_sites = 5;
  s.rydberg_rabi = 1.3;
  s.rydberg_vnn = 7.0;
  s.rydberg_detuning = 1.1;
  s.rydberg_range = 0.0;
  const int n = 5;
  CMatrix h = CMatrix::Zero(32, 32);
  for (int i = 0; i < n; ++i) {
    h -= 1.1 * oracle::on_site(oracle::number_op(), i, n);
    h -= 0.65 * oracle::on_site(oracle::pauli_x(), i, n);
    for (int j = i + 1; j < n; ++j) {
      h += 7.0 / std::pow(j - i, 6) * oracle::on_site(oracle::number_op(), i, n) * oracle::on_site(oracle::number_op(), j, n);
    }
  }
  EXPECT_LT((dense_hamiltonian(s).cast<Complex>() - h).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EdGroundState, ResidualAndPhase) {
  for (EdMethod method : {EdMethod::Dense, EdMethod::Lanczos}) {
    const GroundState g = ed_ground_state(tfim(8, 0.9), method);
    EXPECT_LT(g.residual, 1e-8);
    g.state.check_normalized();
    Eigen::Index k = 0;
    g.state.amplitudes.cwiseAbs().maxCoeff(&k);
    EXPECT_NEAR(g.state.amplitudes(k).imag(), 0.0, 1e-14);
    EXPECT_GT(g.state.amplitudes(k).real(), 0.0);
  }
}

TEST(EdGroundState, LanczosAgreesWithDense) {
  const GroundState a = ed_ground_state(tfim(9, 1.0), EdMethod::Dense);
  const GroundState b = ed_ground_state(tfim(9, 1.0), EdMethod::Lanczos);
  EXPECT_NEAR(a.energy, b.energy, 1e-9);
  EXPECT_NEAR(fidelity(a.state, b.state), 1.0, 1e-8);
}

TEST(EdGroundState, DegenerateGroundSpaceIsFlagged) {
  const GroundState g = ed_ground_state(tfim(4, 0.0));
  EXPECT_TRUE(g.degenerate);
  g.state.check_normalized();
  EXPECT_LT(g.residual, 1e-6);
}

TEST(RotateState, AllZIsIdentity) {
  const DenseState s = random_state(3, 5);
  EXPECT_LT((rotate_state(s, all_z(3)).amplitudes - s.amplitudes).norm(), 1e-15);
}

TEST(RotateState, PlusInXBasis) {
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const DenseState r = rotate_state(DenseState(plus), basis_from_string("X"));
  EXPECT_NEAR(std::abs(r.amplitudes(0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r.amplitudes(1)), 0.0, 1e-15);
}

TEST(RotateState, PlusIInYBasis) {
  CVector plus_i(2);
  plus_i << 1.0 / std::sqrt(2.0), Complex(0.0, 1.0 / std::sqrt(2.0));
  const DenseState r = rotate_state(DenseState(plus_i), basis_from_string("Y"));
  EXPECT_NEAR(std::abs(r.amplitudes(0)), 1.0, 1e-15);
}

TEST(RotateState, UnitaryRoundTrip) {
  const DenseState s = random_state(3, 6);
  const BasisAssignment b = basis_from_string("XYZ");
  const DenseState r = rotate_state(s, b);
  EXPECT_NEAR(r.amplitudes.norm(), 1.0, 1e-12);
  EXPECT_LT((unrotate_state(r, b).amplitudes - s.amplitudes).norm(), 1e-12);
}

TEST(RotateState, MatchesKroneckerUnitary) {
  const DenseState s = random_state(4, 7);
  for (const std::string text : {"XYZX", "YYZZ", "ZXXY"}) {
    const CVector want = oracle::basis_unitary(text) * s.amplitudes;
    EXPECT_LT((rotate_state(s, basis_from_string(text)).amplitudes - want).norm(), 1e-12) << text;
  }
}

TEST(RotateState, ExpansionMatchesDenseRotation) {
  const DenseState s = random_state(4, 8);
  const BasisAssignment b = basis_from_string("ZXZY");
  const DenseState r = rotate_state(s, b);
  for (std::uint64_t i = 0; i < 16; ++i) {
    const RotatedExpansion e = expand_rotation(b, bits_from_index(i, 4));
    ASSERT_EQ(e.configs.size(), 4U);
    Complex sum = 0.0;
    for (std::size_t k = 0; k < e.configs.size(); ++k) {
      sum += e.coefficients[k] * s.amplitudes(static_cast<Eigen::Index>(index_from_bits(e.configs[k])));
    }
    EXPECT_LT(std::abs(sum - r.amplitudes(static_cast<Eigen::Index>(i))), 1e-12);
  }
}

TEST(Basis, StringRoundTripAndErrors) {
  EXPECT_EQ(basis_to_string(basis_from_string("XYZZ")), "XYZZ");
  EXPECT_EQ(rotated_site_count(basis_from_string("XZYZ")), 2);
  EXPECT_THROW(basis_from_string("XQ"), ValidationError);
}

TEST(SampleMeasurements, DeterministicOutcome) {
  const DenseState zero = DenseState::basis_state(bits_from_string("000"));
  const auto data = sample_measurements(zero, {all_z(3)}, 100, 9);
  ASSERT_EQ(data.size(), 100U);
  for (const auto& r : data.records) EXPECT_EQ(r.outcome.sum(), 0.0);
}

TEST(SampleMeasurements, BalancedSuperposition) {
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const std::size_t n = 100000;
  const auto data = sample_measurements(DenseState(plus), {all_z(1)}, n, 10);
  double zeros = 0.0;
  for (const auto& r : data.records) zeros += r.outcome(0) < 0.5 ? 1.0 : 0.0;
  EXPECT_NEAR(zeros / static_cast<double>(n), 0.5, 3.0 * std::sqrt(0.25 / static_cast<double>(n)));
}

TEST(SampleMeasurements, TfimFrequencies) {
  const CMatrix h = tfim_by_kron(4, 1.0);
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  const Vector exact = eig.eigenvectors().col(0).cwiseAbs2();
  const std::size_t n = 100000;
  const auto data = sample_measurements(ed_ground_state(tfim(4, 1.0)).state, {all_z(4)}, n, 11);
  Vector counts = Vector::Zero(16);
  for (const auto& r : data.records) counts(static_cast<Eigen::Index>(index_from_bits(r.outcome))) += 1.0;
  for (Eigen::Index i = 0; i < 16; ++i) {
    const double p = exact(i);
    EXPECT_NEAR(counts(i) / static_cast<double>(n), p, 3.0 * std::sqrt(p * (1 - p) / static_cast<double>(n)) + 1e-12) << i;
  }
}

TEST(SampleMeasurements, RecordsCarryTheirBasis) {
  const DenseState s = random_state(2, 12);
  const auto data = sample_measurements(s, {basis_from_string("XZ"), basis_from_string("ZY")}, 5, 13);
  ASSERT_EQ(data.size(), 10U);
  EXPECT_EQ(basis_to_string(data.records.front().basis), "XZ");
  EXPECT_EQ(basis_to_string(data.records.back().basis), "ZY");
  EXPECT_EQ(sample_measurements(s, {all_z(2)}, 50, 14).outcomes(), sample_measurements(s, {all_z(2)}, 50, 14).outcomes());
}

TEST(RotatedProbabilities, PureStateAgreesWithRotatedAmplitudes) {
  const DenseState s = random_state(3, 15);
  const DenseDensityMatrix rho = DenseDensityMatrix::pure(s);
  for (const std::string text : {"ZZZ", "XYZ", "YXX"}) {
    const BasisAssignment b = basis_from_string(text);
    const CVector psi_b = oracle::basis_unitary(text) * s.amplitudes;
    EXPECT_LT((rotated_probabilities(rho, b) - psi_b.cwiseAbs2()).lpNorm<Eigen::Infinity>(), 1e-12) << text;
  }
}

TEST(RotatedProbabilities, MixedStateMatchesConjugation) {
  const DenseState a = random_state(2, 16);
  const DenseState b = random_state(2, 17);
  const CMatrix m = 0.3 * a.amplitudes * a.amplitudes.adjoint() + 0.7 * b.amplitudes * b.amplitudes.adjoint();
  const CMatrix u = oracle::basis_unitary("YX");
  const Vector want = (u * m * u.adjoint()).diagonal().real();
  EXPECT_LT((rotated_probabilities(DenseDensityMatrix(m), basis_from_string("YX")) - want).lpNorm<Eigen::Infinity>(),
            1e-12);
}

TEST(ApplyNoise, IdentityIsBitExact) {
  const auto data = sample_measurements(random_state(4, 18), {all_z(4), basis_from_string("XZZY")}, 200, 19);
  const auto out = apply_noise(data, NoiseModel::identity(4), 20);
  ASSERT_EQ(out.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(out.records[i].outcome, data.records[i].outcome);
    EXPECT_EQ(out.records[i].basis, data.records[i].basis);
  }
}

TEST(ApplyNoise, CertainFlipComplementsSite) {
  const auto data = sample_measurements(random_state(3, 21), {all_z(3)}, 100, 22);
  NoiseModel noise = NoiseModel::identity(3);
  noise.confusion[1] << 0.0, 1.0, 1.0, 0.0;
  const auto out = apply_noise(data, noise, 23);
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(out.records[i].outcome(0), data.records[i].outcome(0));
    EXPECT_EQ(out.records[i].outcome(1), 1.0 - data.records[i].outcome(1));
    EXPECT_EQ(out.records[i].outcome(2), data.records[i].outcome(2));
  }
}

TEST(ApplyNoise, FlipFrequency) {
  const std::size_t n = 100000;
  const auto data = sample_measurements(DenseState::basis_state(bits_from_string("000")), {all_z(3)}, n, 24);
  const auto out = apply_noise(data, NoiseModel::symmetric_flip(3, 0.05), 25);
  Vector flips = Vector::Zero(3);
  for (const auto& r : out.records) flips += r.outcome;
  const double sigma = std::sqrt(0.05 * 0.95 / static_cast<double>(n));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(flips(i) / static_cast<double>(n), 0.05, 3.0 * sigma);
}

TEST(NoiseModel, Validation) {
  NoiseModel noise = NoiseModel::identity(2);
  noise.confusion[0] << 0.5, 0.6, 0.0, 1.0;
  EXPECT_THROW(noise.validate(), ValidationError);
  EXPECT_THROW(NoiseModel::symmetric_flip(2, 1.5), ValidationError);
  EXPECT_THROW(apply_noise(MeasurementDataset{3, {}}, NoiseModel::identity(2), 1), DimensionError);
}

TEST(ExactObservables, ProductStateHasNoEntropy) {
  CVector single(2);
  single << 0.6, 0.8;
  CVector amps = CVector::Ones(1);
  for (int i = 0; i < 4; ++i) {
    CVector next(amps.size() * 2);
    for (Eigen::Index k = 0; k < amps.size(); ++k) next.segment(2 * k, 2) = amps(k) * single;
    amps = next;
  }
  const DenseState s(amps);
  for (const Region& r : {Region{0}, Region{0, 1}, Region{1, 3}}) EXPECT_NEAR(renyi2_entropy(s, r), 0.0, 1e-10);
}

TEST(ExactObservables, BellStateSingleSite) {
  CVector bell = CVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(renyi2_entropy(DenseState(bell), {0}), std::log(2.0), 1e-10);
  EXPECT_NEAR(renyi2_mutual_information(DenseState(bell), {0}, {1}), 2.0 * std::log(2.0), 1e-10);
}

TEST(ExactObservables, TfimHalfChainEntropy) {
  const DenseState s = ed_ground_state(tfim(10, 1.0)).state;
  const CMatrix rho = s.amplitudes * s.amplitudes.adjoint();
  const CMatrix reduced = oracle::partial_trace_keep(rho, {0, 1, 2, 3, 4}, 10);
  const ObservableReport report = exact_observables(s, {leading_sites(5)});
  ASSERT_EQ(report.entropies.size(), 1U);
  EXPECT_NEAR(report.entropies[0].renyi2, oracle::renyi2_from_eigenvalues(reduced), 1e-10);
}

TEST(ExactObservables, ReducedDensityMatrixMatchesPartialTrace) {
  const DenseState s = random_state(4, 26);
  const CMatrix rho = s.amplitudes * s.amplitudes.adjoint();
  const CMatrix want = oracle::partial_trace_keep(rho, {1, 3}, 4);
  EXPECT_LT((reduced_density_matrix(s, {1, 3}) - want).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((reduced_density_matrix(DenseDensityMatrix(rho), {1, 3}) - want).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExactObservables, LocalExpectationsMatchKronecker) {
  const DenseState s = random_state(3, 27);
  const Vector sz = sigma_z_expectations(s);
  const Vector sx = sigma_x_expectations(s);
  const Vector n = occupation_expectations(s);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(sz(i), s.amplitudes.dot(oracle::on_site(oracle::pauli_z(), i, 3) * s.amplitudes).real(), 1e-12);
    EXPECT_NEAR(sx(i), s.amplitudes.dot(oracle::on_site(oracle::pauli_x(), i, 3) * s.amplitudes).real(), 1e-12);
    EXPECT_NEAR(n(i), s.amplitudes.dot(oracle::on_site(oracle::number_op(), i, 3) * s.amplitudes).real(), 1e-12);
  }
}

TEST(ExactObservables, FidelityAndTraceDistance) {
  const DenseState a = random_state(3, 28);
  const DenseState b = random_state(3, 29);
  EXPECT_NEAR(fidelity(a, a), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(a, b), fidelity(b, a), 1e-12);
  const DenseDensityMatrix ra = DenseDensityMatrix::pure(a);
  const DenseDensityMatrix rb = DenseDensityMatrix::pure(b);
  EXPECT_NEAR(trace_distance(ra, ra), 0.0, 1e-12);
  EXPECT_NEAR(trace_distance(ra, rb), trace_distance(rb, ra), 1e-12);
  // Pure states: D = sqrt(1 - F).
  EXPECT_NEAR(trace_distance(ra, rb), std::sqrt(1.0 - fidelity(a, b)), 1e-10);
  EXPECT_NEAR(fidelity(ra, rb), fidelity(a, b), 1e-8);
}

TEST(ExactObservables, RegionErrors) {
  const DenseState s = random_state(3, 30);
  EXPECT_THROW(renyi2_entropy(s, {3}), ValidationError);
  EXPECT_THROW(renyi2_entropy(s, {0, 0}), ValidationError);
  EXPECT_THROW(renyi2_mutual_information(s, {0, 1}, {1}), ValidationError);
}
