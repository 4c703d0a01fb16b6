#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "hpcfe/cascade.hpp"
#include "hpcfe/hpcfe.hpp"
#include "hpcfe/twin.hpp"

namespace hpcfe::io {

// Shortest decimal that parses back to the same double.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string sha256_hex(const std::string& content);

struct CsvRow {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

struct CsvDocument {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

// Comma separated, no quoting. Blank lines are skipped; every row must have
// as many fields as the header.
CsvDocument parse_csv(const std::string& text, const std::string& source);
double parse_number(const std::string& field, const std::string& source, std::size_t line,
                    const std::string& column);

std::string render_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

// Header x1..xd,y,level.
FidelityDataset fidelity_from_csv(const std::string& text, const std::string& source = "<csv>");
std::string fidelity_to_csv(const FidelityDataset& data);
FidelityDataset load_fidelity_csv(const std::filesystem::path& path);
void save_fidelity_csv(const std::filesystem::path& path, const FidelityDataset& data);

// Header x1..xd (no outputs).
Eigen::MatrixXd inputs_from_csv(const std::string& text, const std::string& source = "<csv>");

// Header t_s,fidelity,domain,payload_a,payload_b,n. Returns one series per
// fidelity present, low first.
std::vector<twin::MeasurementSeries> measurements_from_csv(const std::string& text,
                                                           const std::string& source = "<csv>");
std::string measurements_to_csv(const std::vector<twin::MeasurementSeries>& series);

nlohmann::json to_json(const HpcfeConfig& config);
HpcfeConfig config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const HpcfeModel& model);
HpcfeModel model_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DeepHpcfeModel& model);
DeepHpcfeModel cascade_from_json(const nlohmann::json& j);

// Accepts either document type; a single model loads as a one-level cascade.
DeepHpcfeModel any_model_from_json(const nlohmann::json& j);

}  // namespace hpcfe::io
