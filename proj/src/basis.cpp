#include "nqst/basis.hpp"

#include <algorithm>
#include <numbers>

#include <fmt/format.h>

namespace nqst {

BasisAssignment basis_from_string(const std::string& text) {
  BasisAssignment basis;
  basis.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case 'Z': basis.push_back(Pauli::Z); break;
      case 'X': basis.push_back(Pauli::X); break;
      case 'Y': basis.push_back(Pauli::Y); break;
      default: throw ValidationError(fmt::format("invalid basis label '{}' in \"{}\"", c, text));
    }
  }
  return basis;
}

std::string basis_to_string(const BasisAssignment& basis) {
  std::string text;
  text.reserve(basis.size());
  for (Pauli p : basis) text.push_back(p == Pauli::Z ? 'Z' : p == Pauli::X ? 'X' : 'Y');
  return text;
}

BasisAssignment all_z(int n_sites) { return BasisAssignment(static_cast<std::size_t>(n_sites), Pauli::Z); }

int rotated_site_count(const BasisAssignment& basis) {
  return static_cast<int>(std::count_if(basis.begin(), basis.end(), [](Pauli p) { return p != Pauli::Z; }));
}

const Eigen::Matrix2cd& local_unitary(Pauli p) {
  static const Eigen::Matrix2cd kIdentity = Eigen::Matrix2cd::Identity();
  static const Eigen::Matrix2cd kHadamard = [] {
    Eigen::Matrix2cd m;
    const double r = 1.0 / std::numbers::sqrt2;
    m << r, r, r, -r;
    return m;
  }();
  static const Eigen::Matrix2cd kY = [] {
    Eigen::Matrix2cd m;
    const double r = 1.0 / std::numbers::sqrt2;
    const Complex i(0.0, 1.0);
    m << r, -i * r, r, i * r;
    return m;
  }();
  switch (p) {
    case Pauli::X: return kHadamard;
    case Pauli::Y: return kY;
    case Pauli::Z: break;
  }
  return kIdentity;
}

namespace {

void apply_local(CVector& amps, int n_sites, int site, const Eigen::Matrix2cd& u) {
  const Eigen::Index stride = Eigen::Index{1} << (n_sites - 1 - site);
  for (Eigen::Index base = 0; base < amps.size(); ++base) {
    if (base & stride) continue;
    const Complex a0 = amps(base);
    const Complex a1 = amps(base + stride);
    amps(base) = u(0, 0) * a0 + u(0, 1) * a1;
    amps(base + stride) = u(1, 0) * a0 + u(1, 1) * a1;
  }
}

void check_width(const DenseState& state, const BasisAssignment& basis) {
  if (static_cast<int>(basis.size()) != state.n_sites) {
    throw DimensionError(fmt::format("basis covers {} sites, state has {}", basis.size(), state.n_sites));
  }
}

}  // namespace

DenseState rotate_state(const DenseState& state, const BasisAssignment& basis) {
  check_width(state, basis);
  CVector amps = state.amplitudes;
  for (int j = 0; j < state.n_sites; ++j) {
    if (basis[static_cast<std::size_t>(j)] != Pauli::Z) {
      apply_local(amps, state.n_sites, j, local_unitary(basis[static_cast<std::size_t>(j)]));
    }
  }
  DenseState out(std::move(amps));
  out.amplitudes /= out.amplitudes.norm();
  return out;
}

DenseState unrotate_state(const DenseState& rotated, const BasisAssignment& basis) {
  check_width(rotated, basis);
  CVector amps = rotated.amplitudes;
  for (int j = 0; j < rotated.n_sites; ++j) {
    if (basis[static_cast<std::size_t>(j)] != Pauli::Z) {
      apply_local(amps, rotated.n_sites, j, local_unitary(basis[static_cast<std::size_t>(j)]).adjoint());
    }
  }
  return DenseState(std::move(amps));
}

void MeasurementDataset::validate() const {
  if (n_sites < 1) throw ValidationError("dataset must cover at least one site");
  for (const auto& r : records) {
    if (static_cast<int>(r.basis.size()) != n_sites || r.outcome.size() != n_sites) {
      throw DimensionError(fmt::format("record width differs from dataset width {}", n_sites));
    }
    if (!is_binary(r.outcome)) throw ValidationError("dataset outcome is not binary");
  }
}

bool MeasurementDataset::all_z() const {
  return std::all_of(records.begin(), records.end(),
                     [](const Measurement& r) { return rotated_site_count(r.basis) == 0; });
}

std::vector<BinaryVector> MeasurementDataset::outcomes() const {
  std::vector<BinaryVector> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.outcome);
  return out;
}

RotatedExpansion expand_rotation(const BasisAssignment& basis, const BinaryVector& outcome) {
  if (static_cast<Eigen::Index>(basis.size()) != outcome.size()) {
    throw DimensionError("basis and outcome widths differ");
  }
  std::vector<int> rotated;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis[j] != Pauli::Z) rotated.push_back(static_cast<int>(j));
  }
  const std::size_t terms = std::size_t{1} << rotated.size();
  RotatedExpansion expansion;
  expansion.configs.reserve(terms);
  expansion.coefficients.reserve(terms);
  for (std::size_t t = 0; t < terms; ++t) {
    BinaryVector config = outcome;
    Complex coefficient = 1.0;
    for (std::size_t k = 0; k < rotated.size(); ++k) {
      const int site = rotated[k];
      const int bit = static_cast<int>((t >> (rotated.size() - 1 - k)) & 1U);
      config(site) = bit;
      const int measured = outcome(site) > 0.5 ? 1 : 0;
      coefficient *= local_unitary(basis[static_cast<std::size_t>(site)])(measured, bit);
    }
    expansion.configs.push_back(std::move(config));
    expansion.coefficients.push_back(coefficient);
  }
  return expansion;
}

std::vector<std::uint64_t> sample_indices(const Vector& probs, std::size_t count, Rng& rng) {
  Vector cdf(probs.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    cdf(i) = acc;
  }
  std::vector<std::uint64_t> out(count);
  for (auto& idx : out) {
    const double u = uniform01(rng) * acc;
    const auto* it = std::upper_bound(cdf.data(), cdf.data() + cdf.size(), u);
    auto pos = static_cast<std::uint64_t>(it - cdf.data());
    // Skip zero-probability tails left by round-off.
    pos = std::min<std::uint64_t>(pos, static_cast<std::uint64_t>(probs.size() - 1));
    while (probs(static_cast<Eigen::Index>(pos)) == 0.0 && pos > 0) --pos;
    idx = pos;
  }
  return out;
}

MeasurementDataset sample_measurements(const DenseState& state,
                                       const std::vector<BasisAssignment>& bases,
                                       std::size_t shots_per_basis, std::uint64_t seed) {
  MeasurementDataset data;
  data.n_sites = state.n_sites;
  data.records.reserve(bases.size() * shots_per_basis);
  Rng rng(seed);
  for (const auto& basis : bases) {
    const DenseState rotated = rotate_state(state, basis);
    for (std::uint64_t idx : sample_indices(rotated.probabilities(), shots_per_basis, rng)) {
      data.records.push_back(Measurement{basis, bits_from_index(idx, state.n_sites)});
    }
  }
  return data;
}

Vector rotated_probabilities(const DenseDensityMatrix& rho, const BasisAssignment& basis) {
  if (static_cast<int>(basis.size()) != rho.n_sites) {
    throw DimensionError(fmt::format("basis has {} sites, state has {}", basis.size(), rho.n_sites));
  }
  // U rho U^dagger: rotate the columns, then the columns of the adjoint.
  CMatrix m = rho.entries;
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      CVector col = m.col(c);
      for (int j = 0; j < rho.n_sites; ++j) {
        if (basis[static_cast<std::size_t>(j)] != Pauli::Z) {
          apply_local(col, rho.n_sites, j, local_unitary(basis[static_cast<std::size_t>(j)]));
        }
      }
      m.col(c) = col;
    }
    m.adjointInPlace();
  }
  Vector p = m.diagonal().real().cwiseMax(0.0);
  return p / p.sum();
}

MeasurementDataset sample_measurements(const DenseDensityMatrix& rho,
                                       const std::vector<BasisAssignment>& bases,
                                       std::size_t shots_per_basis, std::uint64_t seed) {
  MeasurementDataset data;
  data.n_sites = rho.n_sites;
  data.records.reserve(bases.size() * shots_per_basis);
  Rng rng(seed);
  for (const auto& basis : bases) {
    for (std::uint64_t idx : sample_indices(rotated_probabilities(rho, basis), shots_per_basis, rng)) {
      data.records.push_back(Measurement{basis, bits_from_index(idx, rho.n_sites)});
    }
  }
  return data;
}

}  // namespace nqst
