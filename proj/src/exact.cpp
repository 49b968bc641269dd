#include "nqst/exact.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

namespace nqst {

void validate_region(const Region& region, int n_sites) {
  std::vector<bool> seen(static_cast<std::size_t>(n_sites), false);
  for (int s : region) {
    if (s < 0 || s >= n_sites) {
      throw ValidationError(fmt::format("region site {} out of range for {} sites", s, n_sites));
    }
    if (seen[static_cast<std::size_t>(s)]) throw ValidationError(fmt::format("region repeats site {}", s));
    seen[static_cast<std::size_t>(s)] = true;
  }
}

Region complement(const Region& region, int n_sites) {
  validate_region(region, n_sites);
  Region out;
  for (int s = 0; s < n_sites; ++s) {
    if (std::find(region.begin(), region.end(), s) == region.end()) out.push_back(s);
  }
  return out;
}

Region region_union(const Region& a, const Region& b) {
  Region out = a;
  for (int s : b) {
    if (std::find(a.begin(), a.end(), s) != a.end()) {
      throw ValidationError(fmt::format("regions overlap on site {}", s));
    }
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Region leading_sites(int k) {
  Region r(static_cast<std::size_t>(k));
  std::iota(r.begin(), r.end(), 0);
  return r;
}

namespace {

// Sub-index of `full` made from the bits of `sites`, first site most significant.
Eigen::Index gather_bits(Eigen::Index full, const Region& sites, int n_sites) {
  Eigen::Index out = 0;
  for (int s : sites) out = (out << 1) | ((full >> (n_sites - 1 - s)) & 1);
  return out;
}

// Matrix M with psi(a, b) laid out as M(a, b), a over `region`, b over its complement.
CMatrix split_amplitudes(const DenseState& state, const Region& region) {
  const Region rest = complement(region, state.n_sites);
  CMatrix m = CMatrix::Zero(Eigen::Index{1} << region.size(), Eigen::Index{1} << rest.size());
  for (Eigen::Index idx = 0; idx < state.amplitudes.size(); ++idx) {
    m(gather_bits(idx, region, state.n_sites), gather_bits(idx, rest, state.n_sites)) =
        state.amplitudes(idx);
  }
  return m;
}

Vector site_diagonal(const Vector& probs, int n_sites, bool spin) {
  Vector out = Vector::Zero(n_sites);
  for (Eigen::Index idx = 0; idx < probs.size(); ++idx) {
    for (int s = 0; s < n_sites; ++s) {
      const double bit = static_cast<double>((idx >> (n_sites - 1 - s)) & 1);
      out(s) += probs(idx) * (spin ? spin_of_bit(bit) : bit);
    }
  }
  return out;
}

Vector real_eigenvalues(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

CMatrix psd_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
  const Vector roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint();
}

double purity_of(const CMatrix& reduced) { return reduced.cwiseAbs2().sum(); }

}  // namespace

Vector sigma_z_expectations(const DenseState& state) {
  return site_diagonal(state.probabilities(), state.n_sites, true);
}

Vector sigma_x_expectations(const DenseState& state) {
  Vector out(state.n_sites);
  for (int s = 0; s < state.n_sites; ++s) {
    const Eigen::Index mask = Eigen::Index{1} << (state.n_sites - 1 - s);
    Complex acc = 0.0;
    for (Eigen::Index idx = 0; idx < state.amplitudes.size(); ++idx) {
      acc += std::conj(state.amplitudes(idx)) * state.amplitudes(idx ^ mask);
    }
    out(s) = acc.real();
  }
  return out;
}

Vector occupation_expectations(const DenseState& state) {
  return site_diagonal(state.probabilities(), state.n_sites, false);
}

Vector sigma_z_expectations(const DenseDensityMatrix& rho) {
  return site_diagonal(rho.entries.diagonal().real(), rho.n_sites, true);
}

Vector sigma_x_expectations(const DenseDensityMatrix& rho) {
  Vector out(rho.n_sites);
  for (int s = 0; s < rho.n_sites; ++s) {
    const Eigen::Index mask = Eigen::Index{1} << (rho.n_sites - 1 - s);
    double acc = 0.0;
    for (Eigen::Index idx = 0; idx < rho.entries.rows(); ++idx) acc += rho.entries(idx, idx ^ mask).real();
    out(s) = acc;
  }
  return out;
}

Vector occupation_expectations(const DenseDensityMatrix& rho) {
  return site_diagonal(rho.entries.diagonal().real(), rho.n_sites, false);
}

CMatrix reduced_density_matrix(const DenseState& state, const Region& region) {
  validate_region(region, state.n_sites);
  const CMatrix m = split_amplitudes(state, region);
  return m * m.adjoint();
}

CMatrix reduced_density_matrix(const DenseDensityMatrix& rho, const Region& region) {
  validate_region(region, rho.n_sites);
  const int n = rho.n_sites;
  const Region rest = complement(region, n);
  const Eigen::Index dim_a = Eigen::Index{1} << region.size();
  CMatrix out = CMatrix::Zero(dim_a, dim_a);
  const Eigen::Index dim = rho.entries.rows();
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Eigen::Index bi = gather_bits(i, rest, n);
    const Eigen::Index ai = gather_bits(i, region, n);
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (gather_bits(j, rest, n) != bi) continue;
      out(ai, gather_bits(j, region, n)) += rho.entries(i, j);
    }
  }
  return out;
}

double renyi_entropy(const CMatrix& reduced, double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("Renyi index must be positive");
  const Vector eig = real_eigenvalues(reduced);
  if (std::abs(alpha - 1.0) < 1e-12) {
    double s = 0.0;
    for (double l : eig) {
      if (l > 1e-300) s -= l * std::log(l);
    }
    return s;
  }
  double sum = 0.0;
  for (double l : eig) {
    if (l > 0.0) sum += std::pow(l, alpha);
  }
  return std::log(sum) / (1.0 - alpha);
}

double renyi2_entropy(const DenseState& state, const Region& region) {
  validate_region(region, state.n_sites);
  if (region.empty() || static_cast<int>(region.size()) == state.n_sites) return 0.0;
  // The smaller side gives the same spectrum with a smaller matrix.
  const Region rest = complement(region, state.n_sites);
  const Region& side = region.size() <= rest.size() ? region : rest;
  return -std::log(purity_of(reduced_density_matrix(state, side)));
}

double renyi2_entropy(const DenseDensityMatrix& rho, const Region& region) {
  validate_region(region, rho.n_sites);
  if (region.empty()) return 0.0;
  return -std::log(purity_of(reduced_density_matrix(rho, region)));
}

double renyi2_mutual_information(const DenseState& state, const Region& a, const Region& b) {
  const Region ab = region_union(a, b);
  return renyi2_entropy(state, a) + renyi2_entropy(state, b) - renyi2_entropy(state, ab);
}

double renyi2_mutual_information(const DenseDensityMatrix& rho, const Region& a, const Region& b) {
  const Region ab = region_union(a, b);
  return renyi2_entropy(rho, a) + renyi2_entropy(rho, b) - renyi2_entropy(rho, ab);
}

double fidelity(const DenseState& a, const DenseState& b) {
  if (a.n_sites != b.n_sites) throw DimensionError("states differ in size");
  return std::norm(a.amplitudes.dot(b.amplitudes));
}

double fidelity(const DenseDensityMatrix& a, const DenseDensityMatrix& b) {
  if (a.n_sites != b.n_sites) throw DimensionError("density matrices differ in size");
  const CMatrix root = psd_sqrt(a.entries);
  CMatrix inner = root * b.entries * root;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  const Vector eig = real_eigenvalues(inner);
  double tr = 0.0;
  for (double l : eig) tr += std::sqrt(std::max(l, 0.0));
  return std::min(1.0, tr * tr);
}

double trace_distance(const DenseState& a, const DenseState& b) {
  return std::sqrt(std::max(0.0, 1.0 - fidelity(a, b)));
}

double trace_distance(const DenseDensityMatrix& a, const DenseDensityMatrix& b) {
  if (a.n_sites != b.n_sites) throw DimensionError("density matrices differ in size");
  CMatrix diff = a.entries - b.entries;
  diff = 0.5 * (diff + diff.adjoint()).eval();
  return 0.5 * real_eigenvalues(diff).cwiseAbs().sum();
}

ObservableReport exact_observables(const DenseState& state, const std::vector<Region>& regions) {
  ObservableReport report;
  report.n_sites = state.n_sites;
  report.sigma_z = sigma_z_expectations(state);
  report.sigma_x = sigma_x_expectations(state);
  report.occupation = occupation_expectations(state);
  report.purity = 1.0;
  for (const auto& r : regions) report.entropies.push_back({r, renyi2_entropy(state, r)});
  return report;
}

ObservableReport exact_observables(const DenseDensityMatrix& rho, const std::vector<Region>& regions) {
  require_enumerable(rho.n_sites, 12);
  ObservableReport report;
  report.n_sites = rho.n_sites;
  report.sigma_z = sigma_z_expectations(rho);
  report.sigma_x = sigma_x_expectations(rho);
  report.occupation = occupation_expectations(rho);
  report.purity = rho.purity();
  for (const auto& r : regions) report.entropies.push_back({r, renyi2_entropy(rho, r)});
  return report;
}

}  // namespace nqst
