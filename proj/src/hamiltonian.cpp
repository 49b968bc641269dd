#include "nqst/hamiltonian.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>

namespace nqst {

namespace {

constexpr int kMaxEdSites = 20;
constexpr int kMaxDenseSites = 10;
constexpr double kDegenerateGap = 1e-10;
constexpr double kSymmetryBreakingField = 1e-8;

int square_side(int n_sites) {
  const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_sites))));
  if (side * side != n_sites) {
    throw ValidationError(fmt::format("square geometry needs a square site count, got {}", n_sites));
  }
  return side;
}

double distance(const HamiltonianSpec& spec, int i, int j) {
  switch (spec.geometry) {
    case Geometry::ChainOpen: return std::abs(i - j);
    case Geometry::ChainPeriodic: {
      const int d = std::abs(i - j);
      return std::min(d, spec.n_sites - d);
    }
    case Geometry::SquareOpen: {
      const int side = square_side(spec.n_sites);
      const double dx = (i % side) - (j % side);
      const double dy = (i / side) - (j / side);
      return std::sqrt(dx * dx + dy * dy);
    }
  }
  return 0.0;
}

std::vector<std::pair<int, int>> nearest_neighbour_bonds(const HamiltonianSpec& spec) {
  std::vector<std::pair<int, int>> bonds;
  const int n = spec.n_sites;
  switch (spec.geometry) {
    case Geometry::ChainOpen:
      for (int i = 0; i + 1 < n; ++i) bonds.emplace_back(i, i + 1);
      break;
    case Geometry::ChainPeriodic:
      for (int i = 0; i + 1 < n; ++i) bonds.emplace_back(i, i + 1);
      if (n > 2) bonds.emplace_back(n - 1, 0);
      break;
    case Geometry::SquareOpen: {
      const int side = square_side(n);
      for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
          const int s = y * side + x;
          if (x + 1 < side) bonds.emplace_back(s, s + 1);
          if (y + 1 < side) bonds.emplace_back(s, s + side);
        }
      }
      break;
    }
  }
  return bonds;
}

struct Pair {
  int i;
  int j;
  double coupling;
};

std::vector<Pair> diagonal_pairs(const HamiltonianSpec& spec) {
  std::vector<Pair> pairs;
  if (spec.kind == HamiltonianKind::Tfim) {
    for (const auto& [i, j] : nearest_neighbour_bonds(spec)) pairs.push_back({i, j, 1.0});
    return pairs;
  }
  for (int i = 0; i < spec.n_sites; ++i) {
    for (int j = i + 1; j < spec.n_sites; ++j) {
      const double r = distance(spec, i, j);
      if (spec.rydberg_range > 0.0 && r > spec.rydberg_range + 1e-12) continue;
      pairs.push_back({i, j, spec.rydberg_vnn / std::pow(r, 6)});
    }
  }
  return pairs;
}

Vector lowest_ritz_vector(const HamiltonianSpec& spec, const Vector& diagonal,
                          const std::vector<Vector>& deflate, Rng& rng, double& eigenvalue) {
  const Eigen::Index dim = diagonal.size();
  constexpr int kKrylov = 40;
  constexpr int kMaxRestarts = 400;
  constexpr double kTol = 1e-10;

  auto project_out = [&](Vector& v) {
    for (const auto& d : deflate) v -= d.dot(v) * d;
  };

  Vector start(dim);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < dim; ++i) start(i) = normal(rng);
  project_out(start);
  start.normalize();

  std::vector<Vector> basis;
  Vector w(dim);
  for (int restart = 0; restart < kMaxRestarts; ++restart) {
    basis.clear();
    basis.push_back(start);
    Vector alpha(kKrylov);
    Vector beta(kKrylov);
    int m = 0;
    for (; m < kKrylov; ++m) {
      apply_hamiltonian(spec, diagonal, basis[static_cast<std::size_t>(m)], w);
      alpha(m) = basis[static_cast<std::size_t>(m)].dot(w);
      // Full reorthogonalization, twice for stability.
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) w -= b.dot(w) * b;
        project_out(w);
      }
      beta(m) = w.norm();
      if (m + 1 == kKrylov || beta(m) < 1e-13) {
        ++m;
        break;
      }
      basis.push_back(w / beta(m));
    }
    Matrix t = Matrix::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      t(k, k) = alpha(k);
      if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = beta(k);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(t);
    const Vector y = solver.eigenvectors().col(0);
    Vector x = Vector::Zero(dim);
    for (int k = 0; k < m; ++k) x += y(k) * basis[static_cast<std::size_t>(k)];
    project_out(x);
    x.normalize();
    eigenvalue = solver.eigenvalues()(0);
    apply_hamiltonian(spec, diagonal, x, w);
    const double residual = (w - eigenvalue * x).norm();
    if (residual < kTol) return x;
    start = x;
  }
  return start;
}

GroundState solve(const HamiltonianSpec& spec, bool dense) {
  const Vector diagonal = hamiltonian_diagonal(spec);
  Vector psi;
  double e0 = 0.0;
  double e1 = 0.0;
  if (dense) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(dense_hamiltonian(spec));
    psi = solver.eigenvectors().col(0);
    e0 = solver.eigenvalues()(0);
    e1 = solver.eigenvalues().size() > 1 ? solver.eigenvalues()(1) : e0;
  } else {
    Rng rng(0x5eedULL);
    psi = lowest_ritz_vector(spec, diagonal, {}, rng, e0);
    lowest_ritz_vector(spec, diagonal, {psi}, rng, e1);
  }
  Eigen::Index peak = 0;
  psi.cwiseAbs().maxCoeff(&peak);
  if (psi(peak) < 0.0) psi = -psi;
  psi.normalize();

  Vector hpsi(psi.size());
  apply_hamiltonian(spec, diagonal, psi, hpsi);

  GroundState gs;
  gs.state = DenseState(psi.cast<Complex>());
  gs.energy = psi.dot(hpsi);
  gs.gap = e1 - e0;
  gs.residual = (hpsi - gs.energy * psi).norm();
  return gs;
}

}  // namespace

void HamiltonianSpec::validate() const {
  if (n_sites < 1) throw ValidationError("Hamiltonian needs at least one site");
  require_enumerable(n_sites, kMaxEdSites);
  if (geometry == Geometry::SquareOpen) square_side(n_sites);
  if (tfim_field < 0.0) throw ValidationError("tfim_field must be non-negative");
  if (rydberg_range < 0.0) throw ValidationError("rydberg_range must be non-negative");
}

HamiltonianKind hamiltonian_kind_from_string(const std::string& text) {
  if (text == "tfim" || text == "TFIM") return HamiltonianKind::Tfim;
  if (text == "rydberg" || text == "Rydberg") return HamiltonianKind::Rydberg;
  throw ValidationError(fmt::format("unknown Hamiltonian kind \"{}\"", text));
}

Geometry geometry_from_string(const std::string& text) {
  if (text == "chain-open") return Geometry::ChainOpen;
  if (text == "chain-periodic") return Geometry::ChainPeriodic;
  if (text == "square-open") return Geometry::SquareOpen;
  throw ValidationError(fmt::format("unknown geometry \"{}\"", text));
}

Vector hamiltonian_diagonal(const HamiltonianSpec& spec) {
  spec.validate();
  const int n = spec.n_sites;
  const auto pairs = diagonal_pairs(spec);
  Vector diag(Eigen::Index{1} << n);
  for (Eigen::Index idx = 0; idx < diag.size(); ++idx) {
    const auto u = static_cast<std::uint64_t>(idx);
    auto bit = [&](int site) { return static_cast<int>((u >> (n - 1 - site)) & 1U); };
    double e = 0.0;
    for (const auto& p : pairs) {
      if (spec.kind == HamiltonianKind::Tfim) {
        e -= p.coupling * (1 - 2 * bit(p.i)) * (1 - 2 * bit(p.j));
      } else if (bit(p.i) && bit(p.j)) {
        e += p.coupling;
      }
    }
    for (int i = 0; i < n; ++i) {
      if (spec.kind == HamiltonianKind::Rydberg) e -= spec.rydberg_detuning * bit(i);
      e -= spec.longitudinal_field * (1 - 2 * bit(i));
    }
    diag(idx) = e;
  }
  return diag;
}

double hamiltonian_flip_coefficient(const HamiltonianSpec& spec) {
  return spec.kind == HamiltonianKind::Tfim ? -spec.tfim_field : -0.5 * spec.rydberg_rabi;
}

void apply_hamiltonian(const HamiltonianSpec& spec, const Vector& diagonal, const Vector& x,
                       Vector& y) {
  const double flip = hamiltonian_flip_coefficient(spec);
  y = diagonal.cwiseProduct(x);
  if (flip == 0.0) return;
  const Eigen::Index dim = x.size();
  for (int site = 0; site < spec.n_sites; ++site) {
    const Eigen::Index mask = Eigen::Index{1} << (spec.n_sites - 1 - site);
    for (Eigen::Index idx = 0; idx < dim; ++idx) y(idx) += flip * x(idx ^ mask);
  }
}

Matrix dense_hamiltonian(const HamiltonianSpec& spec) {
  const Vector diagonal = hamiltonian_diagonal(spec);
  const Eigen::Index dim = diagonal.size();
  Matrix h = diagonal.asDiagonal();
  const double flip = hamiltonian_flip_coefficient(spec);
  for (int site = 0; site < spec.n_sites; ++site) {
    const Eigen::Index mask = Eigen::Index{1} << (spec.n_sites - 1 - site);
    for (Eigen::Index idx = 0; idx < dim; ++idx) h(idx ^ mask, idx) += flip;
  }
  return h;
}

GroundState ed_ground_state(const HamiltonianSpec& spec, EdMethod method) {
  spec.validate();
  const bool dense = method == EdMethod::Dense ||
                     (method == EdMethod::Automatic && spec.n_sites <= kMaxDenseSites);
  GroundState gs = solve(spec, dense);
  if (gs.gap < kDegenerateGap) {
    HamiltonianSpec broken = spec;
    broken.longitudinal_field += kSymmetryBreakingField;
    gs = solve(broken, dense);
    gs.degenerate = true;
  }
  return gs;
}

}  // namespace nqst
