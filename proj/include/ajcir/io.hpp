#pragma once

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include "ajcir/density.hpp"
#include "ajcir/model.hpp"

namespace ajcir {

// Model specs and experiment knobs travel as JSON documents (nested tables
// with a `variant` tag for the Levy measure).
ModelParams model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelParams& params);
ModelParams load_model_file(const std::filesystem::path& path);

// RFC-4180 CSV writer: CRLF line endings, quoting only where required,
// doubles rendered with round-trip precision. Output is byte-deterministic
// for equal inputs.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);

  static std::string field(double v);
  static std::string field(std::size_t v);
  static std::string field(int v);

 private:
  std::ofstream out_;
};

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::filesystem::path& path);

// DensityGrid artifact: axis columns + value CSV next to a JSON header with
// axes, weight and inversion diagnostics.
void write_density_grid(const std::filesystem::path& csv_path,
                        const DensityGrid& grid, const nlohmann::json& extra);
DensityGrid read_density_grid(const std::filesystem::path& csv_path);

// Raw terminal-state dump: ASCII header line "ajcir-terminal <n> <m>\n"
// followed by n*m little-endian doubles, row-major by path.
void write_terminal_binary(const std::filesystem::path& path,
                           const Eigen::MatrixXd& states);

}  // namespace ajcir
