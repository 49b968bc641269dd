#ifndef NQST_IO_HPP
#define NQST_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "nqst/basis.hpp"
#include "nqst/complex_wavefunction.hpp"
#include "nqst/density_operator.hpp"
#include "nqst/noise.hpp"
#include "nqst/positive.hpp"

namespace nqst {

// Dataset text format:
//   # sites=4
//   ZZXZ 0101
//   ZZZZ 1100
// One record per line: basis letters, then outcome bits. Other lines that
// start with '#' and blank lines are ignored.
MeasurementDataset parse_dataset(std::istream& in);
void format_dataset(std::ostream& out, const MeasurementDataset& data);
MeasurementDataset read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const MeasurementDataset& data);

using Checkpoint = std::variant<PositiveWavefunction, ComplexWavefunction, NeuralDensityOperator>;

// "positive", "complex" or "ndo".
std::string model_kind(const Checkpoint& model);
int checkpoint_sites(const Checkpoint& model);

// JSON with a `model_kind` tag; doubles round-trip exactly.
std::string checkpoint_to_json(const Checkpoint& model);
Checkpoint checkpoint_from_json(const std::string& text);
Checkpoint read_checkpoint(const std::filesystem::path& path);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& model);

// A JSON list of per-site 2x2 matrices, rows indexed by the true bit.
std::string noise_model_to_json(const NoiseModel& noise);
NoiseModel noise_model_from_json(const std::string& text);
NoiseModel read_noise_model(const std::filesystem::path& path);
void write_noise_model(const std::filesystem::path& path, const NoiseModel& noise);

// Column-oriented numeric table for metrics files.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  double at(std::size_t row, const std::string& column) const;
};

void write_csv(const std::filesystem::path& path, const Table& table);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace nqst

#endif  // NQST_IO_HPP
