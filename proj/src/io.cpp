#include "hpcfe/io.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include <openssl/evp.h>

#include "hpcfe/error.hpp"

namespace hpcfe::io {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp, ec);
      throw ValidationError("write to '" + tmp.string() + "' failed");
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ValidationError("cannot move output into place at '" + path.string() + "'");
  }
}

std::string sha256_hex(const std::string& content) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(content.data(), content.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw ValidationError(source + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

CsvDocument parse_csv(const std::string& text, const std::string& source) {
  CsvDocument doc;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split(line);
    if (!have_header) {
      doc.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != doc.header.size())
      fail(source, number,
           "expected " + std::to_string(doc.header.size()) + " fields, found " + std::to_string(fields.size()));
    doc.rows.push_back({number, std::move(fields)});
  }
  if (!have_header) throw ValidationError(source + ": empty file (no header)");
  return doc;
}

double parse_number(const std::string& field, const std::string& source, std::size_t line,
                    const std::string& column) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (field.empty() || res.ec != std::errc() || res.ptr != end)
    fail(source, line, "column '" + column + "': '" + field + "' is not a number");
  if (!std::isfinite(v)) fail(source, line, "column '" + column + "': non-finite value");
  return v;
}

std::string render_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
    out += "\n";
  }
  return out;
}

namespace {

// Number of leading x1..xd columns; throws unless they are consecutive.
Eigen::Index input_columns(const std::vector<std::string>& header, const std::string& source) {
  Eigen::Index d = 0;
  while (static_cast<std::size_t>(d) < header.size() && header[static_cast<std::size_t>(d)] == "x" + std::to_string(d + 1))
    ++d;
  if (d == 0) throw ValidationError(source + ":1: schema error: expected input columns x1..xd first");
  return d;
}

}  // namespace

FidelityDataset fidelity_from_csv(const std::string& text, const std::string& source) {
  const CsvDocument doc = parse_csv(text, source);
  const Eigen::Index d = input_columns(doc.header, source);
  const auto ud = static_cast<std::size_t>(d);
  if (doc.header.size() != ud + 2 || doc.header[ud] != "y" || doc.header[ud + 1] != "level")
    throw ValidationError(source + ":1: schema error: expected header x1..x" + std::to_string(d) + ",y,level");
  if (doc.rows.empty()) throw ValidationError(source + ": no data rows");

  std::map<int, std::vector<std::pair<Eigen::VectorXd, double>>> by_level;
  for (const CsvRow& row : doc.rows) {
    Eigen::VectorXd x(d);
    for (std::size_t j = 0; j < ud; ++j) x[static_cast<Eigen::Index>(j)] = parse_number(row.fields[j], source, row.line, doc.header[j]);
    const double y = parse_number(row.fields[ud], source, row.line, "y");
    const double lv = parse_number(row.fields[ud + 1], source, row.line, "level");
    if (lv != std::floor(lv) || lv < 1) fail(source, row.line, "column 'level' must be a positive integer");
    by_level[static_cast<int>(lv)].emplace_back(std::move(x), y);
  }

  FidelityDataset data;
  data.bounds.lower = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::infinity());
  data.bounds.upper = Eigen::VectorXd::Constant(d, -std::numeric_limits<double>::infinity());
  int expected = 1;
  for (auto& [level, samples] : by_level) {
    if (level != expected)
      throw ValidationError(source + ": levels must be numbered 1..M without gaps (missing level " +
                            std::to_string(expected) + ")");
    ++expected;
    FidelityLevel fl;
    fl.level = level;
    fl.label = "level" + std::to_string(level);
    fl.x.resize(static_cast<Eigen::Index>(samples.size()), d);
    fl.y.resize(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      fl.x.row(static_cast<Eigen::Index>(i)) = samples[i].first.transpose();
      fl.y[static_cast<Eigen::Index>(i)] = samples[i].second;
      data.bounds.lower = data.bounds.lower.cwiseMin(samples[i].first);
      data.bounds.upper = data.bounds.upper.cwiseMax(samples[i].first);
    }
    data.levels.push_back(std::move(fl));
  }
  return data;
}

std::string fidelity_to_csv(const FidelityDataset& data) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < data.dim(); ++j) header.push_back("x" + std::to_string(j + 1));
  header.emplace_back("y");
  header.emplace_back("level");
  std::vector<std::vector<double>> rows;
  for (const FidelityLevel& lv : data.levels) {
    for (Eigen::Index i = 0; i < lv.x.rows(); ++i) {
      std::vector<double> r;
      for (Eigen::Index j = 0; j < lv.x.cols(); ++j) r.push_back(lv.x(i, j));
      r.push_back(lv.y[i]);
      r.push_back(lv.level);
      rows.push_back(std::move(r));
    }
  }
  return render_csv(header, rows);
}

FidelityDataset load_fidelity_csv(const std::filesystem::path& path) {
  return fidelity_from_csv(read_file(path), path.string());
}

void save_fidelity_csv(const std::filesystem::path& path, const FidelityDataset& data) {
  write_file_atomic(path, fidelity_to_csv(data));
}

Eigen::MatrixXd inputs_from_csv(const std::string& text, const std::string& source) {
  const CsvDocument doc = parse_csv(text, source);
  const Eigen::Index d = input_columns(doc.header, source);
  if (doc.header.size() != static_cast<std::size_t>(d))
    throw ValidationError(source + ":1: schema error: expected header x1..x" + std::to_string(d) + " only");
  if (doc.rows.empty()) throw ValidationError(source + ": no data rows");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(doc.rows.size()), d);
  for (std::size_t i = 0; i < doc.rows.size(); ++i)
    for (std::size_t j = 0; j < static_cast<std::size_t>(d); ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_number(doc.rows[i].fields[j], source, doc.rows[i].line, doc.header[j]);
  return x;
}

namespace {
const std::vector<std::string> kMeasurementHeader = {"t_s", "fidelity", "domain", "payload_a", "payload_b", "n"};
}

std::vector<twin::MeasurementSeries> measurements_from_csv(const std::string& text, const std::string& source) {
  const CsvDocument doc = parse_csv(text, source);
  if (doc.header != kMeasurementHeader)
    throw ValidationError(source + ":1: schema error: expected header t_s,fidelity,domain,payload_a,payload_b,n");
  if (doc.rows.empty()) throw ValidationError(source + ": no data rows");
  std::map<twin::Fidelity, twin::MeasurementSeries> series;
  std::optional<twin::Domain> domain;
  for (const CsvRow& row : doc.rows) {
    twin::Fidelity fid{};
    twin::Domain dom{};
    try {
      fid = twin::fidelity_from_string(row.fields[1]);
      dom = twin::domain_from_string(row.fields[2]);
    } catch (const ValidationError& e) {
      fail(source, row.line, e.what());
    }
    if (domain && *domain != dom) fail(source, row.line, "all rows must share one domain");
    domain = dom;
    twin::Measurement m;
    m.t_s = parse_number(row.fields[0], source, row.line, "t_s");
    m.payload_a = parse_number(row.fields[3], source, row.line, "payload_a");
    m.payload_b = parse_number(row.fields[4], source, row.line, "payload_b");
    const double n = parse_number(row.fields[5], source, row.line, "n");
    if (n != std::floor(n) || n < 0) fail(source, row.line, "column 'n' must be a non-negative integer");
    m.n = static_cast<int>(n);
    auto& s = series[fid];
    s.fidelity = fid;
    s.domain = dom;
    if (!s.records.empty() && !(m.t_s > s.records.back().t_s))
      fail(source, row.line, "slow times must be strictly increasing within a fidelity");
    s.records.push_back(m);
  }
  std::vector<twin::MeasurementSeries> out;
  for (auto& [fid, s] : series) {
    try {
      s.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(source + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string measurements_to_csv(const std::vector<twin::MeasurementSeries>& series) {
  std::string out = "t_s,fidelity,domain,payload_a,payload_b,n\n";
  for (const auto& s : series) {
    for (const auto& m : s.records) {
      out += format_double(m.t_s) + "," + twin::to_string(s.fidelity) + "," + twin::to_string(s.domain) + "," +
             format_double(m.payload_a) + "," + format_double(m.payload_b) + "," + std::to_string(m.n) + "\n";
    }
  }
  return out;
}

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(r);
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Eigen::MatrixXd mat_from(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw ValidationError("model document: matrix row count mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto r = data[static_cast<std::size_t>(i)].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(r.size()) != cols) throw ValidationError("model document: matrix column count mismatch");
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r[static_cast<std::size_t>(j)];
  }
  return m;
}

json bounds_json(const InputBounds& b) { return json{{"lower", vec(b.lower)}, {"upper", vec(b.upper)}}; }
InputBounds bounds_from(const json& j) { return {vec_from(j.at("lower")), vec_from(j.at("upper"))}; }

constexpr int kVersion = 1;

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw ValidationError(where + ": unknown key '" + item.key() + "'");
  }
}

}  // namespace

json to_json(const HpcfeConfig& c) {
  json j{{"basis", {{"family", "legendre"}, {"degree", c.basis.degree}, {"interaction_order", c.basis.interaction_order}}},
         {"kernel",
          {{"family", "squared_exponential"},
           {"nugget", c.kernel.nugget},
           {"lengthscale_lower", c.kernel.bounds.lower},
           {"lengthscale_upper", c.kernel.bounds.upper},
           {"starts", c.kernel.starts},
           {"refined_starts", c.kernel.refined_starts},
           {"max_sweeps", c.kernel.max_sweeps}}},
         {"zero_mean_trend", c.zero_mean_trend},
         {"pinv_tolerance", c.pinv_tolerance},
         {"dedup_tolerance", c.dedup_tolerance},
         {"max_iterations", c.max_iterations},
         {"coefficient_tolerance", c.coefficient_tolerance}};
  if (c.weight_matrix) j["weight_matrix"] = mat(*c.weight_matrix);
  return j;
}

HpcfeConfig config_from_json(const json& j) {
  return guarded("model config", [&] {
    HpcfeConfig c;
    reject_unknown_keys(j, {"basis", "kernel", "zero_mean_trend", "pinv_tolerance", "dedup_tolerance", "max_iterations",
                            "coefficient_tolerance", "weight_matrix"},
                        "model config");
    if (j.contains("basis")) {
      const json& b = j["basis"];
      reject_unknown_keys(b, {"family", "degree", "interaction_order"}, "model config basis");
      if (b.value("family", std::string("legendre")) != "legendre")
        throw ValidationError("model config: only the legendre basis family is supported");
      c.basis.degree = b.value("degree", c.basis.degree);
      c.basis.interaction_order = b.value("interaction_order", c.basis.interaction_order);
    }
    if (j.contains("kernel")) {
      const json& k = j["kernel"];
      reject_unknown_keys(k, {"family", "nugget", "lengthscale_lower", "lengthscale_upper", "starts", "refined_starts",
                              "max_sweeps"},
                          "model config kernel");
      if (k.value("family", std::string("squared_exponential")) != "squared_exponential")
        throw ValidationError("model config: only the squared_exponential kernel is supported");
      c.kernel.nugget = k.value("nugget", c.kernel.nugget);
      c.kernel.bounds.lower = k.value("lengthscale_lower", c.kernel.bounds.lower);
      c.kernel.bounds.upper = k.value("lengthscale_upper", c.kernel.bounds.upper);
      c.kernel.starts = k.value("starts", c.kernel.starts);
      c.kernel.refined_starts = k.value("refined_starts", c.kernel.refined_starts);
      c.kernel.max_sweeps = k.value("max_sweeps", c.kernel.max_sweeps);
    }
    c.zero_mean_trend = j.value("zero_mean_trend", c.zero_mean_trend);
    c.pinv_tolerance = j.value("pinv_tolerance", c.pinv_tolerance);
    c.dedup_tolerance = j.value("dedup_tolerance", c.dedup_tolerance);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.coefficient_tolerance = j.value("coefficient_tolerance", c.coefficient_tolerance);
    if (j.contains("weight_matrix")) c.weight_matrix = mat_from(j["weight_matrix"]);
    return c;
  });
}

json to_json(const HpcfeModel& model) {
  const HpcfeState& s = model.state();
  return json{{"format", "hpcfe-model"},
              {"version", kVersion},
              {"config", to_json(s.config)},
              {"bounds", bounds_json(s.bounds)},
              {"f0", s.f0},
              {"alpha", vec(s.alpha)},
              {"kernel", {{"family", "squared_exponential"}, {"lengthscales", vec(s.kernel.lengthscales)}, {"nugget", s.kernel.nugget}}},
              {"sigma2", s.sigma2},
              {"gp_active", s.gp_active},
              {"iterations", s.iterations},
              {"z_train", mat(s.z_train)},
              {"y_train", vec(s.y_train)},
              {"residual", vec(s.residual)}};
}

HpcfeModel model_from_json(const json& j) {
  HpcfeState s = guarded("model document", [&] {
    if (j.value("format", std::string()) != "hpcfe-model")
      throw ValidationError("model document: missing or wrong \"format\" (expected hpcfe-model)");
    if (j.value("version", 0) != kVersion)
      throw ValidationError("model document: unsupported version " + std::to_string(j.value("version", 0)));
    HpcfeState st;
    st.config = config_from_json(j.at("config"));
    st.bounds = bounds_from(j.at("bounds"));
    st.f0 = j.at("f0").get<double>();
    st.alpha = vec_from(j.at("alpha"));
    st.kernel.lengthscales = vec_from(j.at("kernel").at("lengthscales"));
    st.kernel.nugget = j.at("kernel").at("nugget").get<double>();
    st.sigma2 = j.at("sigma2").get<double>();
    st.gp_active = j.at("gp_active").get<bool>();
    st.iterations = j.at("iterations").get<int>();
    st.z_train = mat_from(j.at("z_train"));
    st.y_train = vec_from(j.at("y_train"));
    st.residual = vec_from(j.at("residual"));
    return st;
  });
  return HpcfeModel(std::move(s));
}

json to_json(const DeepHpcfeModel& model) {
  json stages = json::array();
  for (std::size_t i = 0; i < model.level_count(); ++i) {
    stages.push_back({{"level", static_cast<int>(i) + 1}, {"label", model.labels()[i]}, {"model", to_json(model.stages()[i])}});
  }
  return json{{"format", "hpcfe-cascade"},
              {"version", kVersion},
              {"bounds", bounds_json(model.bounds())},
              {"modified", model.modified()},
              {"stages", stages}};
}

DeepHpcfeModel cascade_from_json(const json& j) {
  return guarded("cascade document", [&] {
    if (j.value("format", std::string()) != "hpcfe-cascade")
      throw ValidationError("cascade document: missing or wrong \"format\" (expected hpcfe-cascade)");
    if (j.value("version", 0) != kVersion)
      throw ValidationError("cascade document: unsupported version " + std::to_string(j.value("version", 0)));
    std::vector<HpcfeModel> stages;
    std::vector<std::string> labels;
    int expected = 1;
    for (const json& s : j.at("stages")) {
      if (s.at("level").get<int>() != expected++) throw ValidationError("cascade document: stages out of order");
      labels.push_back(s.at("label").get<std::string>());
      stages.push_back(model_from_json(s.at("model")));
    }
    return DeepHpcfeModel(bounds_from(j.at("bounds")), std::move(stages), j.at("modified").get<bool>(), labels);
  });
}

DeepHpcfeModel any_model_from_json(const json& j) {
  const std::string format = j.is_object() ? j.value("format", std::string()) : std::string();
  if (format == "hpcfe-cascade") return cascade_from_json(j);
  if (format == "hpcfe-model") {
    HpcfeModel m = model_from_json(j);
    InputBounds b = m.state().bounds;
    return DeepHpcfeModel(std::move(b), {std::move(m)}, false, {"level1"});
  }
  throw ValidationError("model document: unknown format '" + format + "'");
}

}  // namespace hpcfe::io
