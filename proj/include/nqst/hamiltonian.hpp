#ifndef NQST_HAMILTONIAN_HPP
#define NQST_HAMILTONIAN_HPP

#include <string>

#include "nqst/state.hpp"

namespace nqst {

enum class HamiltonianKind { Tfim, Rydberg };
enum class Geometry { ChainOpen, ChainPeriodic, SquareOpen };

// Spin-1/2 Hamiltonians with a sigma^x drive, diagonal in the bit basis
// otherwise. sigma^z acts as 1 - 2b and n = b on each bit b.
//   TFIM:     H = -sum_<ij> sz_i sz_j - h sum_i sx_i
//   Rydberg:  H = -Delta sum_i n_i - (Omega / 2) sum_i sx_i
//                 + sum_{i<j} V_nn / r_ij^6 n_i n_j
struct HamiltonianSpec {
  HamiltonianKind kind = HamiltonianKind::Tfim;
  int n_sites = 4;
  double tfim_field = 1.0;
  double rydberg_rabi = 1.0;
  double rydberg_detuning = 0.0;
  double rydberg_vnn = 1.0;
  Geometry geometry = Geometry::ChainOpen;
  // Interaction cutoff in lattice units; 0 keeps the full 1/r^6 tail.
  double rydberg_range = 3.0;
  // Extra -hz sum_i sz_i term, used to split degenerate ground spaces.
  double longitudinal_field = 0.0;

  void validate() const;
};

HamiltonianKind hamiltonian_kind_from_string(const std::string& text);
Geometry geometry_from_string(const std::string& text);

// Diagonal element for every basis index.
Vector hamiltonian_diagonal(const HamiltonianSpec& spec);
// Coefficient multiplying sum_i sx_i.
double hamiltonian_flip_coefficient(const HamiltonianSpec& spec);

// y = H x without forming the matrix.
void apply_hamiltonian(const HamiltonianSpec& spec, const Vector& diagonal, const Vector& x, Vector& y);

Matrix dense_hamiltonian(const HamiltonianSpec& spec);

enum class EdMethod { Automatic, Dense, Lanczos };

struct GroundState {
  DenseState state;
  double energy = 0.0;
  double gap = 0.0;
  // Set when the first gap fell below 1e-10; a 1e-8 longitudinal field was
  // then added before the returned state was computed.
  bool degenerate = false;
  double residual = 0.0;  // ||H psi - E psi||
};

// Lowest eigenvector with its largest-magnitude amplitude real and positive.
// Automatic uses dense diagonalization up to 10 sites, Lanczos above.
GroundState ed_ground_state(const HamiltonianSpec& spec, EdMethod method = EdMethod::Automatic);

}  // namespace nqst

#endif  // NQST_HAMILTONIAN_HPP
