#ifndef NQST_NOISE_HPP
#define NQST_NOISE_HPP

#include <cstdint>
#include <vector>

#include "nqst/basis.hpp"

namespace nqst {

// Site-local readout confusion. confusion[i](s, t) = p(recorded t | true s),
// so every row is a probability distribution.
struct NoiseModel {
  std::vector<Eigen::Matrix2d> confusion;

  static NoiseModel identity(int n_sites);
  // Symmetric flips with probability `p` on every site.
  static NoiseModel symmetric_flip(int n_sites, double p);

  int n_sites() const { return static_cast<int>(confusion.size()); }
  // Rows stochastic within 1e-12, entries in [0, 1].
  void validate() const;
  bool is_identity() const;

  // log p(tau_i | sigma_i = 1) - log p(tau_i | sigma_i = 0); may be +-inf.
  double log_odds(int site, double recorded_bit) const;
  // p(tau | sigma), factorized over sites.
  double likelihood(const BinaryVector& recorded, const BinaryVector& actual) const;
};

// Resamples every bit through its site's confusion row.
MeasurementDataset apply_noise(const MeasurementDataset& data, const NoiseModel& noise,
                               std::uint64_t seed);

}  // namespace nqst

#endif  // NQST_NOISE_HPP
