#ifndef NQST_BITS_HPP
#define NQST_BITS_HPP

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nqst {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Entries are 0.0 or 1.0. Stored as doubles so they feed straight into
// matrix-vector products with the weights.
using BinaryVector = Eigen::VectorXd;

using Rng = std::mt19937_64;

// Error categories. The CLI maps each one to its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* category() const noexcept { return "error"; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "dimension"; }
};

class ValidationError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "validation"; }
};

class EnumerationBoundError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "enumeration_bound"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "io"; }
};

// Largest visible layer for which exact enumeration is allowed.
inline constexpr int kMaxEnumeratedSites = 24;

void require_enumerable(int n_sites, int limit = kMaxEnumeratedSites);

// Lexicographic basis order: site 0 is the most significant bit, so index
// 0b0101 on four sites is the string "0101".
BinaryVector bits_from_index(std::uint64_t index, int n_sites);
std::uint64_t index_from_bits(const BinaryVector& bits);

BinaryVector bits_from_string(const std::string& text);
std::string bits_to_string(const BinaryVector& bits);

bool is_binary(const BinaryVector& bits);

// Spin convention used for every diagonal observable: bit b maps to 1 - 2b.
inline double spin_of_bit(double bit) { return 1.0 - 2.0 * bit; }

// Uniform on [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11U) * 0x1.0p-53; }

// Numerically stable log(1 + e^x).
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Principal-branch log(1 + e^z) for complex z.
Complex softplus(Complex z);
Complex sigmoid(Complex z);

double log_sum_exp(const Vector& values);

}  // namespace nqst

#endif  // NQST_BITS_HPP
