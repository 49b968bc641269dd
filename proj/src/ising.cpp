#include "nqst/ising.hpp"

#include <bit>

#include <fmt/format.h>

namespace nqst {

int IsingLattice::n_sites() const {
  return dimension == 1 ? linear_size : linear_size * linear_size;
}

void IsingLattice::validate() const {
  if (linear_size < 2) throw ValidationError("Ising lattice needs linear_size >= 2");
  if (dimension != 1 && dimension != 2) throw ValidationError("Ising dimension must be 1 or 2");
  if (!(beta > 0.0)) throw ValidationError("Ising beta must be positive");
}

std::vector<std::pair<int, int>> IsingLattice::bonds() const {
  std::vector<std::pair<int, int>> out;
  const int L = linear_size;
  if (dimension == 1) {
    for (int i = 0; i < L; ++i) {
      if (i + 1 < L) out.emplace_back(i, i + 1);
      else if (periodic) out.emplace_back(i, 0);
    }
    return out;
  }
  for (int y = 0; y < L; ++y) {
    for (int x = 0; x < L; ++x) {
      const int s = y * L + x;
      if (x + 1 < L) out.emplace_back(s, s + 1);
      else if (periodic) out.emplace_back(s, y * L);
      if (y + 1 < L) out.emplace_back(s, s + L);
      else if (periodic) out.emplace_back(s, x);
    }
  }
  return out;
}

double ising_energy(const IsingLattice& lattice, const BinaryVector& bits) {
  double e = 0.0;
  for (const auto& [i, j] : lattice.bonds()) e -= spin_of_bit(bits(i)) * spin_of_bit(bits(j));
  return e;
}

double ising_magnetization(const IsingLattice& lattice, const BinaryVector& bits) {
  return bits.unaryExpr([](double b) { return spin_of_bit(b); }).sum() / lattice.n_sites();
}

MeasurementDataset ising_mc_sample(const IsingLattice& lattice, std::size_t n_samples,
                                   int thinning, int burn_in, std::uint64_t seed) {
  lattice.validate();
  if (n_samples < 1) throw ValidationError("n_samples must be at least 1");
  if (thinning < 1 || burn_in < 0) throw ValidationError("invalid thinning / burn_in");
  const int n = lattice.n_sites();

  std::vector<std::vector<int>> neighbours(static_cast<std::size_t>(n));
  for (const auto& [i, j] : lattice.bonds()) {
    neighbours[static_cast<std::size_t>(i)].push_back(j);
    neighbours[static_cast<std::size_t>(j)].push_back(i);
  }
  // Acceptance for the possible energy changes 2 * s_i * h_i.
  Rng rng(seed);
  std::vector<int> spins(static_cast<std::size_t>(n));
  for (auto& s : spins) s = uniform01(rng) < 0.5 ? 1 : -1;
  std::uniform_int_distribution<int> pick(0, n - 1);

  auto sweep = [&] {
    for (int step = 0; step < n; ++step) {
      const int i = pick(rng);
      int field = 0;
      for (int j : neighbours[static_cast<std::size_t>(i)]) field += spins[static_cast<std::size_t>(j)];
      const double delta = 2.0 * spins[static_cast<std::size_t>(i)] * field;
      if (delta <= 0.0 || uniform01(rng) < std::exp(-lattice.beta * delta)) {
        spins[static_cast<std::size_t>(i)] = -spins[static_cast<std::size_t>(i)];
      }
    }
  };

  for (int s = 0; s < burn_in; ++s) sweep();
  MeasurementDataset data;
  data.n_sites = n;
  data.records.reserve(n_samples);
  const BasisAssignment z = all_z(n);
  for (std::size_t k = 0; k < n_samples; ++k) {
    for (int s = 0; s < thinning; ++s) sweep();
    BinaryVector bits(n);
    for (int i = 0; i < n; ++i) bits(i) = spins[static_cast<std::size_t>(i)] > 0 ? 0.0 : 1.0;
    data.records.push_back(Measurement{z, std::move(bits)});
  }
  return data;
}

ThermoAverages ising_sample_averages(const IsingLattice& lattice,
                                     const std::vector<BinaryVector>& configs) {
  if (configs.empty()) throw ValidationError("no configurations to average");
  ThermoAverages avg;
  for (const auto& c : configs) {
    const double e = ising_energy(lattice, c);
    avg.abs_magnetization += std::abs(ising_magnetization(lattice, c));
    avg.energy += e;
    avg.energy_sq += e * e;
  }
  const auto m = static_cast<double>(configs.size());
  avg.abs_magnetization /= m;
  avg.energy /= m;
  avg.energy_sq /= m;
  avg.specific_heat = lattice.beta * lattice.beta * (avg.energy_sq - avg.energy * avg.energy) /
                      lattice.n_sites();
  return avg;
}

namespace {

double index_energy(const std::vector<std::pair<int, int>>& bonds, int n, std::uint64_t u) {
  double e = 0.0;
  for (const auto& [i, j] : bonds) {
    const bool same = (((u >> (n - 1 - i)) ^ (u >> (n - 1 - j))) & 1U) == 0;
    e += same ? -1.0 : 1.0;
  }
  return e;
}

}  // namespace

ThermoAverages ising_distribution_averages(const IsingLattice& lattice, const Vector& probs) {
  const int n = lattice.n_sites();
  if (probs.size() != (Eigen::Index{1} << n)) throw DimensionError("distribution size mismatch");
  const auto bonds = lattice.bonds();
  ThermoAverages avg;
  for (Eigen::Index idx = 0; idx < probs.size(); ++idx) {
    const double p = probs(idx);
    if (p == 0.0) continue;
    const auto u = static_cast<std::uint64_t>(idx);
    const double e = index_energy(bonds, n, u);
    const int ones = std::popcount(u);
    const double m = static_cast<double>(n - 2 * ones) / n;
    avg.abs_magnetization += p * std::abs(m);
    avg.energy += p * e;
    avg.energy_sq += p * e * e;
  }
  avg.specific_heat = lattice.beta * lattice.beta * (avg.energy_sq - avg.energy * avg.energy) / n;
  return avg;
}

Vector ising_boltzmann_distribution(const IsingLattice& lattice) {
  lattice.validate();
  const int n = lattice.n_sites();
  require_enumerable(n);
  const auto bonds = lattice.bonds();
  Vector log_w(Eigen::Index{1} << n);
  for (Eigen::Index idx = 0; idx < log_w.size(); ++idx) {
    log_w(idx) = -lattice.beta * index_energy(bonds, n, static_cast<std::uint64_t>(idx));
  }
  const double log_z = log_sum_exp(log_w);
  return (log_w.array() - log_z).exp();
}

}  // namespace nqst
