#include "nqst/state.hpp"

#include <bit>

#include <fmt/format.h>

namespace nqst {

namespace {

int sites_for_dimension(Eigen::Index dim) {
  if (dim < 2 || !std::has_single_bit(static_cast<std::uint64_t>(dim))) {
    throw DimensionError(fmt::format("dimension {} is not a power of two >= 2", dim));
  }
  return std::countr_zero(static_cast<std::uint64_t>(dim));
}

}  // namespace

DenseState::DenseState(CVector amps)
    : amplitudes(std::move(amps)), n_sites(sites_for_dimension(amplitudes.size())) {}

DenseState DenseState::basis_state(const BinaryVector& bits) {
  CVector amps = CVector::Zero(Eigen::Index{1} << bits.size());
  amps(static_cast<Eigen::Index>(index_from_bits(bits))) = 1.0;
  return DenseState(std::move(amps));
}

DenseState DenseState::from_probabilities(const Vector& probs) {
  return DenseState(probs.cwiseMax(0.0).cwiseSqrt().cast<Complex>());
}

void DenseState::check_normalized(double tol) const {
  const double norm = amplitudes.squaredNorm();
  if (std::abs(norm - 1.0) > tol) {
    throw ValidationError(fmt::format("state norm^2 is {:.17g}", norm));
  }
}

DenseDensityMatrix::DenseDensityMatrix(CMatrix m) : entries(std::move(m)) {
  if (entries.rows() != entries.cols()) throw DimensionError("density matrix must be square");
  n_sites = sites_for_dimension(entries.rows());
}

DenseDensityMatrix DenseDensityMatrix::pure(const DenseState& state) {
  return DenseDensityMatrix(state.amplitudes * state.amplitudes.adjoint());
}

void DenseDensityMatrix::check_physical(double tol) const {
  if ((entries - entries.adjoint()).cwiseAbs().maxCoeff() > tol) {
    throw ValidationError("density matrix is not Hermitian");
  }
  if (std::abs(entries.trace() - Complex(1.0)) > tol) {
    throw ValidationError(fmt::format("density matrix trace is {:.17g}", entries.trace().real()));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(entries, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-8) {
    throw ValidationError("density matrix has a negative eigenvalue");
  }
}

double DenseDensityMatrix::purity() const { return (entries * entries).trace().real(); }

}  // namespace nqst
