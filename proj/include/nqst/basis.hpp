#ifndef NQST_BASIS_HPP
#define NQST_BASIS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nqst/bits.hpp"
#include "nqst/state.hpp"

namespace nqst {

enum class Pauli : std::uint8_t { Z, X, Y };

// Local measurement basis of every site.
using BasisAssignment = std::vector<Pauli>;

BasisAssignment basis_from_string(const std::string& text);
std::string basis_to_string(const BasisAssignment& basis);
BasisAssignment all_z(int n_sites);
int rotated_site_count(const BasisAssignment& basis);

// Single-site measurement unitaries. Row s holds the conjugated eigenvector
// of outcome s, so psi_b(s) = sum_t U(s, t) psi(t).
//   Z: identity
//   X: H = [[1, 1], [1, -1]] / sqrt(2)
//   Y: H * Sdg = [[1, -i], [1, i]] / sqrt(2)
// Outcome 0 is the +1 eigenvector of the measured Pauli.
const Eigen::Matrix2cd& local_unitary(Pauli p);

// Amplitudes of `state` in the measurement basis `basis`.
DenseState rotate_state(const DenseState& state, const BasisAssignment& basis);
// Undoes rotate_state.
DenseState unrotate_state(const DenseState& rotated, const BasisAssignment& basis);

struct Measurement {
  BasisAssignment basis;
  BinaryVector outcome;
};

struct MeasurementDataset {
  int n_sites = 0;
  std::vector<Measurement> records;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  // Throws unless every record has n_sites entries and binary outcomes.
  void validate() const;
  bool all_z() const;
  std::vector<BinaryVector> outcomes() const;
};

// Reference-basis configurations connected to a rotated outcome, with their
// unitary coefficients: psi_b(outcome) = sum_k coefficient[k] * psi(config[k]).
// Only the rotated sites vary, so there are 2^r terms.
struct RotatedExpansion {
  std::vector<BinaryVector> configs;
  std::vector<Complex> coefficients;
};

RotatedExpansion expand_rotation(const BasisAssignment& basis, const BinaryVector& outcome);

// Born-rule sampling of `shots_per_basis` outcomes in every basis.
MeasurementDataset sample_measurements(const DenseState& state,
                                       const std::vector<BasisAssignment>& bases,
                                       std::size_t shots_per_basis, std::uint64_t seed);

// Outcome distribution of a mixed state measured in `basis`.
Vector rotated_probabilities(const DenseDensityMatrix& rho, const BasisAssignment& basis);
MeasurementDataset sample_measurements(const DenseDensityMatrix& rho,
                                       const std::vector<BasisAssignment>& bases,
                                       std::size_t shots_per_basis, std::uint64_t seed);

// Inverse-CDF draws from a discrete distribution over 2^n strings.
std::vector<std::uint64_t> sample_indices(const Vector& probs, std::size_t count, Rng& rng);

}  // namespace nqst

#endif  // NQST_BASIS_HPP
