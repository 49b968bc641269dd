#ifndef NQST_ISING_HPP
#define NQST_ISING_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "nqst/basis.hpp"

namespace nqst {

// Classical nearest-neighbour ferromagnet H(s) = -sum_<ij> s_i s_j on an
// L-site chain (dimension 1) or L x L square lattice (dimension 2).
struct IsingLattice {
  int linear_size = 4;
  int dimension = 2;
  bool periodic = true;
  double beta = 1.0;

  int n_sites() const;
  // Each site links to its +x (and +y) neighbour. With periodic wrap on
  // L = 2 this counts each pair twice, matching the usual convention.
  std::vector<std::pair<int, int>> bonds() const;
  void validate() const;
};

// Energy and per-site magnetization of a {0,1} configuration, bits mapped
// to spins via 1 - 2b.
double ising_energy(const IsingLattice& lattice, const BinaryVector& bits);
double ising_magnetization(const IsingLattice& lattice, const BinaryVector& bits);

struct ThermoAverages {
  double abs_magnetization = 0.0;  // <|m|>, per site
  double energy = 0.0;             // <E>
  double energy_sq = 0.0;          // <E^2>
  double specific_heat = 0.0;      // beta^2 (<E^2> - <E>^2) / N
};

// Single-site Metropolis; records one configuration every `thinning`
// sweeps after `burn_in` sweeps. All records carry the Z basis.
MeasurementDataset ising_mc_sample(const IsingLattice& lattice, std::size_t n_samples,
                                   int thinning, int burn_in, std::uint64_t seed);

// Thermodynamic averages over a sample of configurations.
ThermoAverages ising_sample_averages(const IsingLattice& lattice,
                                     const std::vector<BinaryVector>& configs);

// Averages under any distribution over all 2^N configurations.
ThermoAverages ising_distribution_averages(const IsingLattice& lattice, const Vector& probs);

// Exact Boltzmann distribution by enumeration (N <= 24).
Vector ising_boltzmann_distribution(const IsingLattice& lattice);

}  // namespace nqst

#endif  // NQST_ISING_HPP
