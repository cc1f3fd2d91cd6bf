#pragma once

// JSON and CSV emission.
//
// Complex numbers are [re, im] pairs; matrices are row-major arrays of rows.
// Every object carries the basis order so files are self-describing.

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "biphoton/channels.hpp"
#include "biphoton/ensembles.hpp"
#include "biphoton/qpt.hpp"
#include "biphoton/spinspace.hpp"

namespace biphoton {

using json = nlohmann::json;

/// ["|2,0>", "|1,1>", "|0,2>"]
const json& basis_tag();

json to_json(cplx z);
json to_json(const Eigen::MatrixXcd& m);
json to_json(const PureState& psi);
json to_json(const DensityMatrix& rho);
json to_json(const Su2Element& u);
json to_json(const Superoperator& s);
json to_json(const ChoiMatrix& c);
json to_json(const GramMatrix& g);
json to_json(const MeasurementSet& ms);
json to_json(const ExperimentData& d);

cplx complex_from_json(const json& j);
Eigen::MatrixXcd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols);
DensityMatrix density_from_json(const json& j);
Superoperator superoperator_from_json(const json& j);
ChoiMatrix choi_from_json(const json& j);
ExperimentData experiment_data_from_json(const json& j);

/// Throws IoError with the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// Shortest round-trip decimal form.
std::string format_number(double v);

/// CSV with one comment line ("# ...") and a header row.
class CsvWriter {
 public:
  CsvWriter(std::vector<std::string> columns, std::string comment);
  void add_row(const std::vector<std::string>& cells);
  void add_row(const std::vector<double>& values);
  std::string str() const;
  void save(const std::filesystem::path& path) const { write_text_file(path, str()); }

 private:
  std::vector<std::string> columns_;
  std::string comment_;
  std::vector<std::string> lines_;
};

}  // namespace biphoton
