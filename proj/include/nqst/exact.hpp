#ifndef NQST_EXACT_HPP
#define NQST_EXACT_HPP

#include <vector>

#include "nqst/state.hpp"

namespace nqst {

using Region = std::vector<int>;

// Throws ValidationError for out-of-range or repeated sites.
void validate_region(const Region& region, int n_sites);
Region complement(const Region& region, int n_sites);
Region region_union(const Region& a, const Region& b);
// Sites 0..k-1.
Region leading_sites(int k);

// Per-site expectations. sigma^z = 1 - 2b, n = b.
Vector sigma_z_expectations(const DenseState& state);
Vector sigma_x_expectations(const DenseState& state);
Vector occupation_expectations(const DenseState& state);
Vector sigma_z_expectations(const DenseDensityMatrix& rho);
Vector sigma_x_expectations(const DenseDensityMatrix& rho);
Vector occupation_expectations(const DenseDensityMatrix& rho);

// Reduced density matrix of the region, region sites ordered as given.
CMatrix reduced_density_matrix(const DenseState& state, const Region& region);
CMatrix reduced_density_matrix(const DenseDensityMatrix& rho, const Region& region);

// S_alpha = log(Tr rho^alpha) / (1 - alpha), von Neumann at alpha = 1.
double renyi_entropy(const CMatrix& reduced, double alpha);
// -log Tr rho_A^2. The empty region gives 0.
double renyi2_entropy(const DenseState& state, const Region& region);
double renyi2_entropy(const DenseDensityMatrix& rho, const Region& region);
// S2(A) + S2(B) - S2(A u B); A and B must be disjoint.
double renyi2_mutual_information(const DenseState& state, const Region& a, const Region& b);
double renyi2_mutual_information(const DenseDensityMatrix& rho, const Region& a, const Region& b);

double fidelity(const DenseState& a, const DenseState& b);
// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
double fidelity(const DenseDensityMatrix& a, const DenseDensityMatrix& b);
double trace_distance(const DenseState& a, const DenseState& b);
double trace_distance(const DenseDensityMatrix& a, const DenseDensityMatrix& b);

struct RegionEntropy {
  Region region;
  double renyi2 = 0.0;
};

struct ObservableReport {
  int n_sites = 0;
  Vector sigma_z;
  Vector sigma_x;
  Vector occupation;
  double purity = 1.0;
  std::vector<RegionEntropy> entropies;
};

ObservableReport exact_observables(const DenseState& state, const std::vector<Region>& regions);
ObservableReport exact_observables(const DenseDensityMatrix& rho, const std::vector<Region>& regions);

}  // namespace nqst

#endif  // NQST_EXACT_HPP
