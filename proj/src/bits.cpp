#include "nqst/bits.hpp"

#include <fmt/format.h>

namespace nqst {

void require_enumerable(int n_sites, int limit) {
  if (n_sites > limit) {
    throw EnumerationBoundError(fmt::format(
        "{} sites exceeds the exact enumeration bound of {}", n_sites, limit));
  }
}

BinaryVector bits_from_index(std::uint64_t index, int n_sites) {
  BinaryVector bits(n_sites);
  for (int j = 0; j < n_sites; ++j) {
    bits(j) = static_cast<double>((index >> (n_sites - 1 - j)) & 1U);
  }
  return bits;
}

std::uint64_t index_from_bits(const BinaryVector& bits) {
  std::uint64_t index = 0;
  for (Eigen::Index j = 0; j < bits.size(); ++j) {
    index = (index << 1U) | (bits(j) > 0.5 ? 1U : 0U);
  }
  return index;
}

BinaryVector bits_from_string(const std::string& text) {
  BinaryVector bits(static_cast<Eigen::Index>(text.size()));
  for (std::size_t j = 0; j < text.size(); ++j) {
    if (text[j] == '0') {
      bits(static_cast<Eigen::Index>(j)) = 0.0;
    } else if (text[j] == '1') {
      bits(static_cast<Eigen::Index>(j)) = 1.0;
    } else {
      throw ValidationError(fmt::format("invalid bit character '{}' in \"{}\"", text[j], text));
    }
  }
  return bits;
}

std::string bits_to_string(const BinaryVector& bits) {
  std::string text(static_cast<std::size_t>(bits.size()), '0');
  for (Eigen::Index j = 0; j < bits.size(); ++j) {
    if (bits(j) > 0.5) text[static_cast<std::size_t>(j)] = '1';
  }
  return text;
}

bool is_binary(const BinaryVector& bits) {
  for (Eigen::Index j = 0; j < bits.size(); ++j) {
    if (bits(j) != 0.0 && bits(j) != 1.0) return false;
  }
  return true;
}

Complex softplus(Complex z) {
  if (z.real() > 0.0) return z + std::log(1.0 + std::exp(-z));
  return std::log(1.0 + std::exp(z));
}

Complex sigmoid(Complex z) {
  if (z.real() > 0.0) return 1.0 / (1.0 + std::exp(-z));
  const Complex e = std::exp(z);
  return e / (1.0 + e);
}

double log_sum_exp(const Vector& values) {
  if (values.size() == 0) return -std::numeric_limits<double>::infinity();
  const double peak = values.maxCoeff();
  if (!std::isfinite(peak)) return peak;
  return peak + std::log((values.array() - peak).exp().sum());
}

}  // namespace nqst
