#ifndef NQST_POSITIVE_HPP
#define NQST_POSITIVE_HPP

#include "nqst/basis.hpp"
#include "nqst/rbm.hpp"
#include "nqst/state.hpp"

namespace nqst {

// psi(s) = sqrt(p_lambda(s)) = exp(-E_lambda(s) / 2) / sqrt(Z_lambda).
// Also the model for classical thermal distributions, where p is the
// object of interest and psi is never looked at.
struct PositiveWavefunction {
  RbmParams params;

  int n_sites() const { return params.n_visible(); }
  const RbmParams& sampling_params() const { return params; }
  // Unnormalized log-amplitude -E(s) / 2, valid at any size.
  Complex log_psi(const BinaryVector& s) const { return {-0.5 * effective_energy(params, s), 0.0}; }
};

// Normalized amplitude; enumerates Z (n <= 24).
double amplitude(const PositiveWavefunction& model, const BinaryVector& s);
double amplitude(const PositiveWavefunction& model, const BinaryVector& s, double log_z);

DenseState to_dense_state(const PositiveWavefunction& model);

// Standard RBM training on Z-basis records. Rejects rotated records.
PositiveWavefunction train_positive(const MeasurementDataset& data, const TrainConfig& config,
                                    const EpochCallback& on_epoch = {});

// |<target|psi>|^2 with psi normalized by enumeration (n <= 20).
double fidelity_exact(const PositiveWavefunction& model, const DenseState& target);

}  // namespace nqst

#endif  // NQST_POSITIVE_HPP
