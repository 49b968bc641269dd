#include "nqst/observables.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>

#include <fmt/format.h>

#include "nqst/complex_wavefunction.hpp"
#include "nqst/parallel.hpp"
#include "nqst/positive.hpp"

namespace nqst {

SparseOperator& SparseOperator::add(std::vector<int> sites, CMatrix matrix) {
  if (static_cast<int>(sites.size()) > kMaxLocalSites) {
    throw ValidationError(fmt::format("local term acts on {} sites, limit is {}", sites.size(),
                                      kMaxLocalSites));
  }
  validate_region(sites, n_sites_);
  const Eigen::Index dim = Eigen::Index{1} << sites.size();
  if (matrix.rows() != dim || matrix.cols() != dim) {
    throw DimensionError(fmt::format("local matrix must be {0}x{0}", dim));
  }
  terms_.push_back(Term{std::move(sites), std::move(matrix)});
  return *this;
}

SparseOperator& SparseOperator::add(const SparseOperator& other) {
  if (other.n_sites_ != n_sites_) throw DimensionError("operators act on different site counts");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

SparseOperator SparseOperator::identity(int n_sites) {
  SparseOperator op(n_sites);
  op.add({}, CMatrix::Identity(1, 1));
  return op;
}

SparseOperator SparseOperator::sigma_z(int n_sites, int site) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return SparseOperator(n_sites).add({site}, m);
}

SparseOperator SparseOperator::sigma_x(int n_sites, int site) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return SparseOperator(n_sites).add({site}, m);
}

SparseOperator SparseOperator::occupation(int n_sites, int site) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(1, 1) = 1.0;
  return SparseOperator(n_sites).add({site}, m);
}

SparseOperator SparseOperator::zz(int n_sites, int i, int j) {
  CMatrix m = CMatrix::Zero(4, 4);
  m(0, 0) = m(3, 3) = 1.0;
  m(1, 1) = m(2, 2) = -1.0;
  return SparseOperator(n_sites).add({i, j}, m);
}

namespace {

SparseOperator site_mean(int n_sites, SparseOperator (*make)(int, int)) {
  SparseOperator op(n_sites);
  for (int i = 0; i < n_sites; ++i) {
    const SparseOperator single = make(n_sites, i);
    for (const auto& t : single.terms()) op.add(t.sites, t.matrix / static_cast<double>(n_sites));
  }
  return op;
}

}  // namespace

SparseOperator SparseOperator::mean_sigma_z(int n_sites) { return site_mean(n_sites, &sigma_z); }
SparseOperator SparseOperator::mean_sigma_x(int n_sites) { return site_mean(n_sites, &sigma_x); }
SparseOperator SparseOperator::mean_occupation(int n_sites) { return site_mean(n_sites, &occupation); }

bool SparseOperator::is_diagonal() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) {
    CMatrix off = t.matrix;
    off.diagonal().setZero();
    return off.cwiseAbs().maxCoeff() == 0.0;
  });
}

double SparseOperator::diagonal_value(const BinaryVector& s) const {
  double value = 0.0;
  for (const auto& term : terms_) {
    Eigen::Index row = 0;
    for (int site : term.sites) row = (row << 1) | (s(site) > 0.5 ? 1 : 0);
    value += term.matrix(row, row).real();
  }
  return value;
}

CMatrix SparseOperator::to_dense() const {
  require_enumerable(n_sites_, 14);
  const Eigen::Index dim = Eigen::Index{1} << n_sites_;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for_each_connected(bits_from_index(static_cast<std::uint64_t>(r), n_sites_),
                       [&](const BinaryVector& c, Complex v) {
                         out(r, static_cast<Eigen::Index>(index_from_bits(c))) += v;
                       });
  }
  return out;
}

double exact_expectation(const DenseState& state, const SparseOperator& op) {
  if (state.n_sites != op.n_sites()) throw DimensionError("operator and state sizes differ");
  Complex acc = 0.0;
  for (Eigen::Index r = 0; r < state.amplitudes.size(); ++r) {
    const Complex left = std::conj(state.amplitudes(r));
    if (left == Complex(0.0)) continue;
    op.for_each_connected(bits_from_index(static_cast<std::uint64_t>(r), state.n_sites),
                          [&](const BinaryVector& c, Complex v) {
                            acc += left * v * state.amplitudes(static_cast<Eigen::Index>(index_from_bits(c)));
                          });
  }
  return acc.real();
}

namespace {

using Measure = std::function<void(std::span<const BinaryVector> replicas, double* out)>;

// Samples from every chain, stored per bin as running sums.
struct BinnedSamples {
  int n_values = 0;
  std::size_t bin_size = 0;
  std::vector<Vector> bin_sums;  // one entry per bin
  Vector total_sum;
  Vector total_sq_sum;
  std::size_t n_samples = 0;

  Vector mean() const { return total_sum / static_cast<double>(n_samples); }
  Vector bin_mean(std::size_t b) const { return bin_sums[b] / static_cast<double>(bin_size); }
};

BinnedSamples run_replica_chains(const RbmParams& params, const SamplingOptions& opts, int replicas,
                                 int n_values, const Measure& measure) {
  if (opts.n_samples < 2) throw ValidationError("need at least two samples");
  if (opts.burn_in < 0 || opts.n_chains < 1) throw ValidationError("invalid sampling options");
  const auto chains = std::min<std::size_t>(static_cast<std::size_t>(opts.n_chains), opts.n_samples);
  // At least 20 bins overall; with many chains each chain is one bin.
  const std::size_t bins_per_chain = std::max<std::size_t>(1, (20 + chains - 1) / chains);
  const std::size_t per_chain_raw = (opts.n_samples + chains - 1) / chains;
  const std::size_t bin_size = std::max<std::size_t>(1, (per_chain_raw + bins_per_chain - 1) / bins_per_chain);
  const std::size_t per_chain = bin_size * bins_per_chain;

  Rng master(opts.seed);
  std::vector<std::uint64_t> seeds(chains);
  for (auto& s : seeds) s = master();

  const int n = params.n_visible();
  std::vector<std::vector<double>> values(chains);
  parallel_for(chains, [&](std::size_t c) {
    Rng rng(seeds[c]);
    std::vector<BinaryVector> state(static_cast<std::size_t>(replicas));
    for (auto& v : state) {
      v.resize(n);
      for (int j = 0; j < n; ++j) v(j) = uniform01(rng) < 0.5 ? 1.0 : 0.0;
    }
    for (auto& v : state) block_gibbs_steps(params, v, opts.burn_in, rng);
    auto& out = values[c];
    out.resize(per_chain * static_cast<std::size_t>(n_values));
    for (std::size_t k = 0; k < per_chain; ++k) {
      for (auto& v : state) block_gibbs_steps(params, v, 1, rng);
      measure(state, out.data() + k * static_cast<std::size_t>(n_values));
    }
  });

  BinnedSamples binned;
  binned.n_values = n_values;
  binned.bin_size = bin_size;
  binned.total_sum = Vector::Zero(n_values);
  binned.total_sq_sum = Vector::Zero(n_values);
  for (std::size_t c = 0; c < chains; ++c) {
    for (std::size_t b = 0; b < bins_per_chain; ++b) {
      Vector sum = Vector::Zero(n_values);
      for (std::size_t k = b * bin_size; k < (b + 1) * bin_size; ++k) {
        for (int q = 0; q < n_values; ++q) {
          const double x = values[c][k * static_cast<std::size_t>(n_values) + static_cast<std::size_t>(q)];
          sum(q) += x;
          binned.total_sq_sum(q) += x * x;
        }
      }
      binned.total_sum += sum;
      binned.bin_sums.push_back(std::move(sum));
    }
  }
  binned.n_samples = chains * per_chain;
  return binned;
}

// Binned mean and error of value q.
EstimateReport binned_estimate(const BinnedSamples& s, int q) {
  EstimateReport r;
  r.n_samples = s.n_samples;
  r.mean = s.mean()(q);
  const auto nb = static_cast<double>(s.bin_sums.size());
  double var_bins = 0.0;
  for (std::size_t b = 0; b < s.bin_sums.size(); ++b) {
    const double d = s.bin_mean(b)(q) - r.mean;
    var_bins += d * d;
  }
  var_bins /= std::max(1.0, nb - 1.0);
  r.std_error = std::sqrt(var_bins / nb);
  const double var_samples =
      std::max(0.0, s.total_sq_sum(q) / static_cast<double>(s.n_samples) - r.mean * r.mean);
  r.autocorrelation_time =
      var_samples > 1e-300 ? 0.5 * static_cast<double>(s.bin_size) * var_bins / var_samples : 0.0;
  return r;
}

// Delete-one-bin jackknife for a nonlinear function of the means.
EstimateReport jackknife(const BinnedSamples& s, const std::function<double(const Vector&)>& f) {
  EstimateReport r;
  r.n_samples = s.n_samples;
  r.mean = f(s.mean());
  const std::size_t nb = s.bin_sums.size();
  std::vector<double> leave_one(nb);
  const auto remaining = static_cast<double>(s.n_samples - s.bin_size);
  for (std::size_t b = 0; b < nb; ++b) leave_one[b] = f((s.total_sum - s.bin_sums[b]) / remaining);
  const double avg = std::accumulate(leave_one.begin(), leave_one.end(), 0.0) / static_cast<double>(nb);
  double acc = 0.0;
  for (double x : leave_one) acc += (x - avg) * (x - avg);
  r.std_error = std::sqrt(acc * static_cast<double>(nb - 1) / static_cast<double>(nb));
  const EstimateReport first = binned_estimate(s, 0);
  r.autocorrelation_time = first.autocorrelation_time;
  return r;
}

// Real part of the swap-operator ratio for one region.
template <PureStateModel M>
double swap_ratio(const M& model, const BinaryVector& s1, const BinaryVector& s2,
                  const Complex& log1, const Complex& log2, const Region& region) {
  if (region.empty()) return 1.0;
  BinaryVector t1 = s1;
  BinaryVector t2 = s2;
  for (int site : region) std::swap(t1(site), t2(site));
  const Complex log_ratio = model.log_psi(t1) + model.log_psi(t2) - log1 - log2;
  // Conjugate of psi(t1) psi(t2) / (psi(s1) psi(s2)); its real part is what
  // averages to Tr rho_A^2.
  return std::exp(log_ratio.real()) * std::cos(log_ratio.imag());
}

double minus_log(double x) {
  return x > 0.0 ? -std::log(x) : std::numeric_limits<double>::infinity();
}

}  // namespace

template <PureStateModel M>
EstimateReport diagonal_expectation(const M& model, const SparseOperator& op, const SamplingOptions& opts) {
  if (!op.is_diagonal()) throw ValidationError("diagonal_expectation needs a diagonal operator");
  if (op.n_sites() != model.n_sites()) throw DimensionError("operator and model sizes differ");
  const auto samples = run_replica_chains(model.sampling_params(), opts, 1, 1,
                                          [&](std::span<const BinaryVector> r, double* out) {
                                            out[0] = op.diagonal_value(r[0]);
                                          });
  return binned_estimate(samples, 0);
}

template <PureStateModel M>
EstimateReport local_estimator_expectation(const M& model, const SparseOperator& op,
                                           const SamplingOptions& opts) {
  if (op.n_sites() != model.n_sites()) throw DimensionError("operator and model sizes differ");
  const auto samples = run_replica_chains(
      model.sampling_params(), opts, 1, 1, [&](std::span<const BinaryVector> r, double* out) {
        const Complex log_s = model.log_psi(r[0]);
        Complex local = 0.0;
        op.for_each_connected(r[0], [&](const BinaryVector& c, Complex v) {
          if (c == r[0]) {
            local += v;
          } else {
            local += v * std::exp(model.log_psi(c) - log_s);
          }
        });
        out[0] = local.real();
      });
  return binned_estimate(samples, 0);
}

template <PureStateModel M>
EstimateReport renyi2_swap(const M& model, const Region& region, const SamplingOptions& opts) {
  validate_region(region, model.n_sites());
  const auto samples = run_replica_chains(
      model.sampling_params(), opts, 2, 1, [&](std::span<const BinaryVector> r, double* out) {
        out[0] = swap_ratio(model, r[0], r[1], model.log_psi(r[0]), model.log_psi(r[1]), region);
      });
  return jackknife(samples, [](const Vector& m) { return minus_log(m(0)); });
}

template <PureStateModel M>
EstimateReport renyi2_mutual_information(const M& model, const Region& a, const Region& b,
                                         const SamplingOptions& opts) {
  validate_region(a, model.n_sites());
  validate_region(b, model.n_sites());
  const Region ab = region_union(a, b);
  const bool whole = static_cast<int>(ab.size()) == model.n_sites();
  const auto samples = run_replica_chains(
      model.sampling_params(), opts, 2, 3, [&](std::span<const BinaryVector> r, double* out) {
        const Complex l0 = model.log_psi(r[0]);
        const Complex l1 = model.log_psi(r[1]);
        out[0] = swap_ratio(model, r[0], r[1], l0, l1, a);
        out[1] = swap_ratio(model, r[0], r[1], l0, l1, b);
        out[2] = whole ? 1.0 : swap_ratio(model, r[0], r[1], l0, l1, ab);
      });
  return jackknife(samples, [](const Vector& m) {
    return minus_log(m(0)) + minus_log(m(1)) - minus_log(m(2));
  });
}

#define NQST_INSTANTIATE_ESTIMATORS(Model)                                                         \
  template EstimateReport diagonal_expectation<Model>(const Model&, const SparseOperator&,         \
                                                      const SamplingOptions&);                     \
  template EstimateReport local_estimator_expectation<Model>(const Model&, const SparseOperator&,  \
                                                             const SamplingOptions&);              \
  template EstimateReport renyi2_swap<Model>(const Model&, const Region&, const SamplingOptions&); \
  template EstimateReport renyi2_mutual_information<Model>(const Model&, const Region&,            \
                                                           const Region&, const SamplingOptions&);

NQST_INSTANTIATE_ESTIMATORS(PositiveWavefunction)
NQST_INSTANTIATE_ESTIMATORS(ComplexWavefunction)

#undef NQST_INSTANTIATE_ESTIMATORS

}  // namespace nqst
