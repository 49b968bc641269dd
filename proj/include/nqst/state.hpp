#ifndef NQST_STATE_HPP
#define NQST_STATE_HPP

#include "nqst/bits.hpp"

namespace nqst {

// Pure state on n qubits, amplitudes in lexicographic basis order.
struct DenseState {
  CVector amplitudes;
  int n_sites = 0;

  DenseState() = default;
  DenseState(CVector amps);

  static DenseState basis_state(const BinaryVector& bits);
  // From real non-negative amplitudes sqrt(p).
  static DenseState from_probabilities(const Vector& probs);

  // Throws ValidationError unless normalized within `tol`.
  void check_normalized(double tol = 1e-10) const;
  Vector probabilities() const { return amplitudes.cwiseAbs2(); }
};

struct DenseDensityMatrix {
  CMatrix entries;
  int n_sites = 0;

  DenseDensityMatrix() = default;
  DenseDensityMatrix(CMatrix m);

  static DenseDensityMatrix pure(const DenseState& state);

  // Hermitian, unit trace and eigenvalues >= -1e-8.
  void check_physical(double tol = 1e-10) const;
  double purity() const;
};

}  // namespace nqst

#endif  // NQST_STATE_HPP
