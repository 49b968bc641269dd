#include "nqst/positive.hpp"

#include <fmt/format.h>

namespace nqst {

double amplitude(const PositiveWavefunction& model, const BinaryVector& s) {
  return amplitude(model, s, log_partition_exact(model.params));
}

double amplitude(const PositiveWavefunction& model, const BinaryVector& s, double log_z) {
  return std::exp(-0.5 * (effective_energy(model.params, s) + log_z));
}

DenseState to_dense_state(const PositiveWavefunction& model) {
  return DenseState::from_probabilities(exact_distribution(model.params).probs);
}

PositiveWavefunction train_positive(const MeasurementDataset& data, const TrainConfig& config,
                                    const EpochCallback& on_epoch) {
  data.validate();
  if (!data.all_z()) {
    throw ValidationError(
        "positive reconstruction needs Z-basis records only; use the complex trainer for rotated bases");
  }
  const auto outcomes = data.outcomes();
  return PositiveWavefunction{train(outcomes, config, on_epoch)};
}

double fidelity_exact(const PositiveWavefunction& model, const DenseState& target) {
  require_enumerable(model.n_sites(), 20);
  if (target.n_sites != model.n_sites()) {
    throw DimensionError(fmt::format("target has {} sites, model has {}", target.n_sites, model.n_sites()));
  }
  const Vector psi = exact_distribution(model.params).probs.cwiseSqrt();
  return std::norm(target.amplitudes.dot(psi.cast<Complex>()));
}

}  // namespace nqst
