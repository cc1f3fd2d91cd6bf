#include "biphoton/serialize.hpp"

#include <charconv>
#include <sstream>

#include "biphoton/errors.hpp"

namespace biphoton {

const json& basis_tag() {
  static const json tag = json::array({"|2,0>", "|1,1>", "|0,2>"});
  return tag;
}

json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json to_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const PureState& psi) {
  json amps = json::array();
  for (int i = 0; i < 3; ++i) amps.push_back(to_json(psi[i]));
  return {{"type", "pure_state"}, {"basis", basis_tag()}, {"amplitudes", amps}};
}

json to_json(const DensityMatrix& rho) {
  return {{"type", "density_matrix"}, {"basis", basis_tag()}, {"matrix", to_json(Eigen::MatrixXcd(rho.matrix()))}};
}

json to_json(const Su2Element& u) {
  const auto e = u.euler();
  return {{"type", "su2"},
          {"convention", "zyz"},
          {"euler", {e.alpha, e.beta, e.gamma}},
          {"spin1", to_json(Eigen::MatrixXcd(u.spin1()))}};
}

json to_json(const Superoperator& s) {
  return {{"type", "superoperator"},
          {"basis", basis_tag()},
          {"vectorization", "column-stacking"},
          {"matrix", to_json(Eigen::MatrixXcd(s.matrix()))}};
}

json to_json(const ChoiMatrix& c) {
  return {{"type", "choi"},
          {"basis", basis_tag()},
          {"ordering", "input (x) output"},
          {"normalization", ChoiMatrix::normalization()},
          {"matrix", to_json(Eigen::MatrixXcd(c.matrix()))}};
}

json to_json(const GramMatrix& g) {
  json rows = json::array();
  for (int r = 0; r < 9; ++r) {
    json row = json::array();
    for (int c = 0; c < 9; ++c) row.push_back(g.matrix()(r, c));
    rows.push_back(std::move(row));
  }
  json ev = json::array();
  for (double v : g.eigenvalues()) ev.push_back(v);
  return {{"type", "gram"},
          {"operator_basis", "identity/sqrt3, then Gell-Mann/sqrt2"},
          {"matrix", rows},
          {"eigenvalues", ev}};
}

json to_json(const MeasurementSet& ms) {
  json effects = json::array();
  for (const auto& e : ms.effects()) effects.push_back(to_json(Eigen::MatrixXcd(e)));
  return {{"type", "measurement_set"}, {"basis", basis_tag()}, {"effects", effects}};
}

json to_json(const ExperimentData& d) {
  json probes = json::array();
  for (std::size_t i = 0; i < d.probes.states.size(); ++i) {
    json p = {{"state", to_json(Eigen::MatrixXcd(d.probes.states[i].matrix()))}};
    if (i < d.probes.rotations.size()) {
      const auto& e = d.probes.rotations[i];
      p["euler"] = {e.alpha, e.beta, e.gamma};
    }
    probes.push_back(std::move(p));
  }
  json effects = json::array();
  for (const auto& e : d.effects) effects.push_back(to_json(Eigen::MatrixXcd(e)));
  return {{"type", "experiment_data"},
          {"basis", basis_tag()},
          {"probe_x", d.probes.x},
          {"probe_epsilon", d.probes.epsilon},
          {"probes", probes},
          {"effects", effects},
          {"counts", d.counts},
          {"shots", d.shots},
          {"seed", d.seed}};
}

cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("expected a complex number as [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Eigen::MatrixXcd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw ValidationError("matrix: expected " + std::to_string(rows) + " rows");
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ValidationError("matrix: expected " + std::to_string(cols) + " columns");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

DensityMatrix density_from_json(const json& j) {
  const json& m = j.is_object() ? j.at("matrix") : j;
  return DensityMatrix::renormalized(Mat3(matrix_from_json(m, 3, 3)), 1e-9, 1e-9);
}

Superoperator superoperator_from_json(const json& j) {
  if (j.value("vectorization", "column-stacking") != "column-stacking")
    throw ValidationError("superoperator: only column-stacking vectorization is supported");
  return Superoperator(Mat9(matrix_from_json(j.at("matrix"), 9, 9)));
}

ChoiMatrix choi_from_json(const json& j) {
  if (j.value("normalization", std::string(ChoiMatrix::normalization())) != ChoiMatrix::normalization())
    throw ValidationError("choi: unsupported normalization");
  return ChoiMatrix(Mat9(matrix_from_json(j.at("matrix"), 9, 9)));
}

ExperimentData experiment_data_from_json(const json& j) {
  try {
    ExperimentData d;
    d.probes.x = j.value("probe_x", 0.0);
    d.probes.epsilon = j.value("probe_epsilon", 0.0);
    for (const auto& p : j.at("probes")) {
      d.probes.states.push_back(density_from_json(p.at("state")));
      if (p.contains("euler")) {
        const auto& e = p.at("euler");
        d.probes.rotations.push_back({e.at(0).get<double>(), e.at(1).get<double>(), e.at(2).get<double>()});
      }
    }
    for (const auto& e : j.at("effects")) d.effects.push_back(Mat3(matrix_from_json(e, 3, 3)));
    MeasurementSet check(d.effects);
    d.counts = j.at("counts").get<std::vector<std::vector<std::uint64_t>>>();
    d.shots = j.at("shots").get<std::uint64_t>();
    d.seed = j.value("seed", std::uint64_t{0});
    if (d.counts.size() != d.probes.states.size()) throw ValidationError("experiment data: one count row per probe");
    for (const auto& row : d.counts) {
      if (row.size() != d.effects.size()) throw ValidationError("experiment data: one count per effect");
      std::uint64_t total = 0;
      for (auto n : row) total += n;
      if (total != d.shots) throw ValidationError("experiment data: row sum differs from shots");
    }
    return d;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("experiment data: ") + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> columns, std::string comment)
    : columns_(std::move(columns)), comment_(std::move(comment)) {}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) throw ValidationError("csv: row width differs from header");
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  lines_.push_back(std::move(line));
}

void CsvWriter::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  add_row(cells);
}

std::string CsvWriter::str() const {
  std::string out = "# " + comment_ + "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i];
  }
  out += '\n';
  for (const auto& l : lines_) out += l + '\n';
  return out;
}

}  // namespace biphoton
