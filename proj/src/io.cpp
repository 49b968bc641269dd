#include "nqst/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace nqst {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

MeasurementDataset parse_dataset(std::istream& in) {
  MeasurementDataset data;
  bool have_header = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find("sites=");
      if (pos != std::string::npos) {
        try {
          data.n_sites = std::stoi(line.substr(pos + 6));
        } catch (const std::exception&) {
          throw ValidationError(fmt::format("line {}: malformed sites header", line_no));
        }
        if (data.n_sites < 1) throw ValidationError(fmt::format("line {}: sites must be positive", line_no));
        have_header = true;
      }
      continue;
    }
    if (!have_header) throw ValidationError("dataset is missing its '# sites=N' header");
    std::istringstream fields(line);
    std::string basis_text;
    std::string bits_text;
    std::string extra;
    if (!(fields >> basis_text >> bits_text) || (fields >> extra)) {
      throw ValidationError(fmt::format("line {}: expected '<basis> <bits>'", line_no));
    }
    if (static_cast<int>(basis_text.size()) != data.n_sites || static_cast<int>(bits_text.size()) != data.n_sites) {
      throw DimensionError(fmt::format("line {}: record width differs from sites={}", line_no, data.n_sites));
    }
    try {
      data.records.push_back(Measurement{basis_from_string(basis_text), bits_from_string(bits_text)});
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  if (!have_header) throw ValidationError("dataset is missing its '# sites=N' header");
  return data;
}

void format_dataset(std::ostream& out, const MeasurementDataset& data) {
  data.validate();
  out << "# sites=" << data.n_sites << '\n';
  for (const auto& r : data.records) out << basis_to_string(r.basis) << ' ' << bits_to_string(r.outcome) << '\n';
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {} for reading", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(fmt::format("cannot create directory {}: {}", path.parent_path().string(), ec.message()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

MeasurementDataset read_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  return parse_dataset(in);
}

void write_dataset(const std::filesystem::path& path, const MeasurementDataset& data) {
  std::ostringstream out;
  format_dataset(out, data);
  write_text(path, out.str());
}

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

Matrix matrix_from_json(const json& j, Eigen::Index cols, const char* what) {
  if (!j.is_array()) throw ValidationError(fmt::format("{} must be a list of rows", what));
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DimensionError(fmt::format("{} row {} must have {} entries", what, i, cols));
    }
    for (std::size_t k = 0; k < row.size(); ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(fmt::format("{} must be a list", what));
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json rbm_to_json(const RbmParams& p) {
  return json{{"n_visible", p.n_visible()},
              {"n_hidden", p.n_hidden()},
              {"weights", matrix_to_json(p.weights)},
              {"visible_bias", vector_to_json(p.visible_bias)},
              {"hidden_bias", vector_to_json(p.hidden_bias)}};
}

RbmParams rbm_from_json(const json& j) {
  const int nv = j.at("n_visible").get<int>();
  const int nh = j.at("n_hidden").get<int>();
  RbmParams p(nv, nh);
  p.weights = matrix_from_json(j.at("weights"), nv, "weights");
  p.visible_bias = vector_from_json(j.at("visible_bias"), "visible_bias");
  p.hidden_bias = vector_from_json(j.at("hidden_bias"), "hidden_bias");
  p.validate();
  return p;
}

}  // namespace

std::string model_kind(const Checkpoint& model) {
  switch (model.index()) {
    case 0: return "positive";
    case 1: return "complex";
    default: return "ndo";
  }
}

int checkpoint_sites(const Checkpoint& model) {
  return std::visit([](const auto& m) { return m.n_sites(); }, model);
}

std::string checkpoint_to_json(const Checkpoint& model) {
  json j;
  j["model_kind"] = model_kind(model);
  if (const auto* p = std::get_if<PositiveWavefunction>(&model)) {
    p->params.validate();
    j["amplitude"] = rbm_to_json(p->params);
  } else if (const auto* c = std::get_if<ComplexWavefunction>(&model)) {
    c->validate();
    j["amplitude"] = rbm_to_json(c->amplitude_params);
    j["phase"] = rbm_to_json(c->phase_params);
  } else {
    const auto& d = std::get<NeuralDensityOperator>(model);
    d.validate();
    j["amplitude"] = rbm_to_json(d.amplitude_params);
    j["phase"] = rbm_to_json(d.phase_params);
    j["aux_amplitude_weights"] = matrix_to_json(d.aux_amplitude_weights);
    j["aux_phase_weights"] = matrix_to_json(d.aux_phase_weights);
  }
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("checkpoint is not valid JSON: {}", e.what()));
  }
  try {
    const auto kind = j.at("model_kind").get<std::string>();
    if (kind == "positive") return PositiveWavefunction{rbm_from_json(j.at("amplitude"))};
    if (kind == "complex") {
      ComplexWavefunction m{rbm_from_json(j.at("amplitude")), rbm_from_json(j.at("phase"))};
      m.validate();
      return m;
    }
    if (kind == "ndo") {
      NeuralDensityOperator m;
      m.amplitude_params = rbm_from_json(j.at("amplitude"));
      m.phase_params = rbm_from_json(j.at("phase"));
      m.aux_amplitude_weights = matrix_from_json(j.at("aux_amplitude_weights"), m.n_sites(), "aux_amplitude_weights");
      m.aux_phase_weights = matrix_from_json(j.at("aux_phase_weights"), m.n_sites(), "aux_phase_weights");
      m.validate();
      return m;
    }
    throw ValidationError(fmt::format("unknown model_kind '{}'", kind));
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed checkpoint: {}", e.what()));
  }
}

Checkpoint read_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(read_text(path)); }

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& model) {
  write_text(path, checkpoint_to_json(model));
}

std::string noise_model_to_json(const NoiseModel& noise) {
  noise.validate();
  json j = json::array();
  for (const auto& m : noise.confusion) j.push_back(matrix_to_json(m));
  return j.dump(1) + "\n";
}

NoiseModel noise_model_from_json(const std::string& text) {
  NoiseModel noise;
  try {
    const json j = json::parse(text);
    if (!j.is_array()) throw ValidationError("noise model must be a JSON list of 2x2 matrices");
    for (const auto& entry : j) {
      const Matrix m = matrix_from_json(entry, 2, "confusion matrix");
      if (m.rows() != 2) throw DimensionError("confusion matrices must be 2x2");
      noise.confusion.emplace_back(m);
    }
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("malformed noise model: {}", e.what()));
  }
  noise.validate();
  return noise;
}

NoiseModel read_noise_model(const std::filesystem::path& path) { return noise_model_from_json(read_text(path)); }

void write_noise_model(const std::filesystem::path& path, const NoiseModel& noise) {
  write_text(path, noise_model_to_json(noise));
}

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw DimensionError(fmt::format("row has {} values, table has {} columns", row.size(), columns.size()));
  }
  rows.push_back(std::move(row));
}

double Table::at(std::size_t row, const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw ValidationError(fmt::format("no column named '{}'", column));
  return rows.at(row)[static_cast<std::size_t>(it - columns.begin())];
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::string text = fmt::format("{}\n", fmt::join(table.columns, ","));
  for (const auto& row : table.rows) text += fmt::format("{:.17g}\n", fmt::join(row, ","));
  write_text(path, text);
}

}  // namespace nqst
