#ifndef NQST_DENSITY_OPERATOR_HPP
#define NQST_DENSITY_OPERATOR_HPP

#include <functional>
#include <span>

#include "nqst/basis.hpp"
#include "nqst/complex_wavefunction.hpp"
#include "nqst/rbm.hpp"
#include "nqst/state.hpp"

namespace nqst {

// Mixed state from a purified RBM whose auxiliary units are traced out:
//   rho(s, s') = sum_a psi(s, a) psi*(s', a)
//   psi(s, a)  = exp(-(E_lambda(s) + i E_mu(s)) / 2 + a.(V_lambda s + i V_mu s) / 2)
// which gives
//   log rho(s, s') = -(E_lambda(s) + E_lambda(s')) / 2 - i (E_mu(s) - E_mu(s')) / 2
//                    + sum_k softplus(V_lambda (s + s') / 2 + i V_mu (s - s') / 2)_k
struct NeuralDensityOperator {
  RbmParams amplitude_params;
  RbmParams phase_params;
  Matrix aux_amplitude_weights;  // V_lambda, n_aux x n_visible
  Matrix aux_phase_weights;      // V_mu

  int n_sites() const { return amplitude_params.n_visible(); }
  int n_aux() const { return static_cast<int>(aux_amplitude_weights.rows()); }
  void validate() const;

  // rho(s, s) is itself an RBM marginal: hidden layer [W_lambda; V_lambda]
  // with biases [c_lambda; 0].
  RbmParams diagonal_params() const;

  // Flat layout: amplitude, phase, V_lambda (row-major), V_mu (row-major).
  Vector flatten() const;
  void unflatten(const Vector& flat);
};

// Unnormalized log rho(s, s').
Complex ndo_log_element(const NeuralDensityOperator& model, const BinaryVector& s, const BinaryVector& t);
Complex ndo_element(const NeuralDensityOperator& model, const BinaryVector& s, const BinaryVector& t);

// Enumerated and trace-normalized (n <= 12).
DenseDensityMatrix ndo_dense(const NeuralDensityOperator& model);

struct NdoGradient {
  RbmGradient amplitude;
  RbmGradient phase;
  Matrix aux_amplitude;
  Matrix aux_phase;
  std::size_t skipped = 0;

  Vector flatten() const;  // same layout as NeuralDensityOperator::flatten
};

// Gradient of C = -<log rho_b(s^b, s^b)>_data + log Z_lambda, with the model
// term from CD-k chains on the diagonal seeded at `chain_starts`.
NdoGradient ndo_gradients(const NeuralDensityOperator& model, std::span<const Measurement> batch,
                          std::span<const BinaryVector> chain_starts, int cd_steps, Rng& rng,
                          int max_rotated = 2);

// Same gradient with the model term by enumeration.
NdoGradient ndo_gradients_exact(const NeuralDensityOperator& model, std::span<const Measurement> batch,
                                int max_rotated = 2);

double ndo_cost_exact(const NeuralDensityOperator& model, std::span<const Measurement> data,
                      int max_rotated = 2);

// Unnormalized rho_b(outcome, outcome).
double ndo_rotated_diagonal(const NeuralDensityOperator& model, const Measurement& m, int max_rotated = 2);

struct NdoTrainConfig {
  TrainConfig base;
  int n_aux = -1;         // defaults to base.n_hidden
  int phase_hidden = -1;  // defaults to base.n_hidden
};

NeuralDensityOperator train_ndo(const MeasurementDataset& data, const RotationPlan& plan,
                                const NdoTrainConfig& config,
                                const std::function<void(int, const NeuralDensityOperator&)>& on_epoch = {});

}  // namespace nqst

#endif  // NQST_DENSITY_OPERATOR_HPP
