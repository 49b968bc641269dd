#ifndef NQST_OBSERVABLES_HPP
#define NQST_OBSERVABLES_HPP

#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include "nqst/exact.hpp"
#include "nqst/rbm.hpp"

namespace nqst {

// A pure-state model that can be sampled through an RBM and evaluated as an
// unnormalized complex log-amplitude.
template <class M>
concept PureStateModel = requires(const M& m, const BinaryVector& s) {
  { m.log_psi(s) } -> std::convertible_to<Complex>;
  { m.sampling_params() } -> std::convertible_to<const RbmParams&>;
  { m.n_sites() } -> std::convertible_to<int>;
};

// Sum of local terms. Each term acts on `sites` with matrix(r, c) =
// <r|O|c> over the local bit strings of those sites (first site most
// significant).
class SparseOperator {
 public:
  struct Term {
    std::vector<int> sites;
    CMatrix matrix;
  };

  // Local terms may touch at most this many sites, which keeps the
  // number of connected configurations polynomial.
  static constexpr int kMaxLocalSites = 8;

  explicit SparseOperator(int n_sites) : n_sites_(n_sites) {}

  SparseOperator& add(std::vector<int> sites, CMatrix matrix);
  SparseOperator& add(const SparseOperator& other);

  static SparseOperator identity(int n_sites);
  static SparseOperator sigma_z(int n_sites, int site);
  static SparseOperator sigma_x(int n_sites, int site);
  static SparseOperator occupation(int n_sites, int site);
  static SparseOperator zz(int n_sites, int i, int j);
  // Site-averaged (1/N) sum_i O_i forms.
  static SparseOperator mean_sigma_z(int n_sites);
  static SparseOperator mean_sigma_x(int n_sites);
  static SparseOperator mean_occupation(int n_sites);

  int n_sites() const { return n_sites_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_diagonal() const;
  // O(s, s).
  double diagonal_value(const BinaryVector& s) const;
  // Calls fn(s', <s|O|s'>) for every non-zero element in row s.
  template <class Fn>
  void for_each_connected(const BinaryVector& s, Fn&& fn) const;

  // Dense matrix, for checks on small systems.
  CMatrix to_dense() const;

 private:
  int n_sites_;
  std::vector<Term> terms_;
};

struct EstimateReport {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  double autocorrelation_time = 0.0;
};

struct SamplingOptions {
  std::size_t n_samples = 10000;
  int burn_in = 500;
  int n_chains = 50;
  std::uint64_t seed = 1;
};

// Block-Gibbs average of a diagonal operator.
template <PureStateModel M>
EstimateReport diagonal_expectation(const M& model, const SparseOperator& op, const SamplingOptions& opts);

// Average of the local estimator O_L(s) = sum_s' <s|O|s'> psi(s') / psi(s)
// over s ~ |psi|^2. Only amplitude ratios are needed.
template <PureStateModel M>
EstimateReport local_estimator_expectation(const M& model, const SparseOperator& op,
                                           const SamplingOptions& opts);

// S2 of `region` from the swap operator between two independent replicas.
// The mean is -log of the averaged swap ratio; the error is a jackknife
// over bins.
template <PureStateModel M>
EstimateReport renyi2_swap(const M& model, const Region& region, const SamplingOptions& opts);

// S2(A) + S2(B) - S2(A u B) from one replica run. For A u B covering every
// site the last term is zero.
template <PureStateModel M>
EstimateReport renyi2_mutual_information(const M& model, const Region& a, const Region& b,
                                         const SamplingOptions& opts);

// Exact expectation <psi|O|psi> for dense states.
double exact_expectation(const DenseState& state, const SparseOperator& op);

// One row of estimator output.
struct EstimateRow {
  std::string observable;
  Region region;
  EstimateReport estimate;
};

// ---------------------------------------------------------------------------

template <class Fn>
void SparseOperator::for_each_connected(const BinaryVector& s, Fn&& fn) const {
  BinaryVector connected = s;
  for (const auto& term : terms_) {
    Eigen::Index row = 0;
    for (int site : term.sites) row = (row << 1) | (s(site) > 0.5 ? 1 : 0);
    const auto k = term.sites.size();
    for (Eigen::Index col = 0; col < term.matrix.cols(); ++col) {
      const Complex value = term.matrix(row, col);
      if (value == Complex(0.0)) continue;
      for (std::size_t q = 0; q < k; ++q) {
        connected(term.sites[q]) = static_cast<double>((col >> (k - 1 - q)) & 1);
      }
      fn(static_cast<const BinaryVector&>(connected), value);
      for (int site : term.sites) connected(site) = s(site);
    }
  }
}

}  // namespace nqst

#endif  // NQST_OBSERVABLES_HPP
