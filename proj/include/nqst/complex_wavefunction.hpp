#ifndef NQST_COMPLEX_WAVEFUNCTION_HPP
#define NQST_COMPLEX_WAVEFUNCTION_HPP

#include <span>
#include <vector>

#include "nqst/basis.hpp"
#include "nqst/rbm.hpp"
#include "nqst/state.hpp"

namespace nqst {

// psi(s) = exp(-(E_lambda(s) + i E_mu(s)) / 2) / sqrt(Z_lambda).
// The moduli come from the amplitude machine alone; the phase machine only
// contributes theta(s) = -E_mu(s) / 2.
struct ComplexWavefunction {
  RbmParams amplitude_params;
  RbmParams phase_params;

  int n_sites() const { return amplitude_params.n_visible(); }
  const RbmParams& sampling_params() const { return amplitude_params; }
  Complex log_psi(const BinaryVector& s) const;
  void validate() const;
};

// Measurement bases allowed during training. Every basis may rotate at
// most `max_rotated` sites away from Z, so rotated amplitudes expand over
// at most 2^max_rotated reference configurations.
struct RotationPlan {
  struct Entry {
    BasisAssignment basis;
    std::size_t shots = 0;
  };
  std::vector<Entry> entries;
  int max_rotated = 2;

  std::vector<BasisAssignment> bases() const;
  // Throws ValidationError when a basis rotates more than max_rotated sites.
  void check(const BasisAssignment& basis) const;
  void validate(int n_sites) const;
};

// Unnormalized psi_b(outcome) = sum_s U(outcome, s) exp(log_psi(s)).
Complex rotated_amplitude(const ComplexWavefunction& model, const BasisAssignment& basis,
                          const BinaryVector& outcome, int max_rotated = 2);

struct ComplexGradient {
  RbmGradient amplitude;
  RbmGradient phase;
  std::size_t skipped = 0;  // records with vanishing rotated amplitude
};

// Gradient of the multi-basis cost
//   C = -<log |psi_b(s^b)|^2>_data
// split as
//   d/dlambda: <Re <grad E_lambda>_Q>_data - <grad E_lambda>_{p_lambda}
//   d/dmu:     -<Im <grad E_mu>_Q>_data
// with per-record quasi-probabilities Q(s) = U(s^b, s) psi(s) / psi_b(s^b).
// The model term uses CD-k chains seeded at `chain_starts`.
ComplexGradient complex_gradients(const ComplexWavefunction& model, std::span<const Measurement> batch,
                                  std::span<const BinaryVector> chain_starts, int cd_steps, Rng& rng,
                                  int max_rotated = 2);

// Same gradient with the model term by enumeration.
ComplexGradient complex_gradients_exact(const ComplexWavefunction& model,
                                        std::span<const Measurement> batch, int max_rotated = 2);

// C with the normalization by enumeration.
double complex_cost_exact(const ComplexWavefunction& model, std::span<const Measurement> data,
                          int max_rotated = 2);

struct ComplexTrainConfig {
  TrainConfig base;
  int phase_hidden = -1;  // defaults to base.n_hidden
};

ComplexWavefunction train_complex(const MeasurementDataset& data, const RotationPlan& plan,
                                  const ComplexTrainConfig& config,
                                  const std::function<void(int, const ComplexWavefunction&)>& on_epoch = {});

DenseState to_dense_state(const ComplexWavefunction& model);

// |<target|psi>|^2 with Z_lambda by enumeration (n <= 16).
double fidelity_exact_complex(const ComplexWavefunction& model, const DenseState& target);

}  // namespace nqst

#endif  // NQST_COMPLEX_WAVEFUNCTION_HPP
