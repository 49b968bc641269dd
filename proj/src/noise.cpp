#include "nqst/noise.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace nqst {

NoiseModel NoiseModel::identity(int n_sites) {
  return NoiseModel{std::vector<Eigen::Matrix2d>(static_cast<std::size_t>(n_sites),
                                                 Eigen::Matrix2d::Identity())};
}

NoiseModel NoiseModel::symmetric_flip(int n_sites, double p) {
  Eigen::Matrix2d m;
  m << 1.0 - p, p, p, 1.0 - p;
  NoiseModel noise{std::vector<Eigen::Matrix2d>(static_cast<std::size_t>(n_sites), m)};
  noise.validate();
  return noise;
}

void NoiseModel::validate() const {
  for (std::size_t i = 0; i < confusion.size(); ++i) {
    const auto& m = confusion[i];
    if ((m.array() < 0.0).any() || (m.array() > 1.0).any() || !m.allFinite()) {
      throw ValidationError(fmt::format("noise matrix of site {} has entries outside [0, 1]", i));
    }
    for (int r = 0; r < 2; ++r) {
      if (std::abs(m.row(r).sum() - 1.0) > 1e-12) {
        throw ValidationError(fmt::format("noise matrix of site {} row {} does not sum to 1", i, r));
      }
    }
  }
}

bool NoiseModel::is_identity() const {
  for (const auto& m : confusion) {
    if (m != Eigen::Matrix2d::Identity()) return false;
  }
  return true;
}

double NoiseModel::log_odds(int site, double recorded_bit) const {
  const auto& m = confusion[static_cast<std::size_t>(site)];
  const int t = recorded_bit > 0.5 ? 1 : 0;
  const double p1 = m(1, t);
  const double p0 = m(0, t);
  if (p1 == 0.0 && p0 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (p0 == 0.0) return std::numeric_limits<double>::infinity();
  if (p1 == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(p1) - std::log(p0);
}

double NoiseModel::likelihood(const BinaryVector& recorded, const BinaryVector& actual) const {
  double p = 1.0;
  for (int i = 0; i < n_sites(); ++i) {
    p *= confusion[static_cast<std::size_t>(i)](actual(i) > 0.5 ? 1 : 0, recorded(i) > 0.5 ? 1 : 0);
  }
  return p;
}

MeasurementDataset apply_noise(const MeasurementDataset& data, const NoiseModel& noise,
                               std::uint64_t seed) {
  noise.validate();
  if (noise.n_sites() != data.n_sites) {
    throw DimensionError(fmt::format("noise model covers {} sites, dataset has {}",
                                     noise.n_sites(), data.n_sites));
  }
  MeasurementDataset out = data;
  Rng rng(seed);
  for (auto& record : out.records) {
    for (int i = 0; i < data.n_sites; ++i) {
      const int actual = record.outcome(i) > 0.5 ? 1 : 0;
      // Recorded bit is 1 when the draw falls below p(1 | actual).
      const double p_one = noise.confusion[static_cast<std::size_t>(i)](actual, 1);
      record.outcome(i) = uniform01(rng) < p_one ? 1.0 : 0.0;
    }
  }
  return out;
}

}  // namespace nqst
