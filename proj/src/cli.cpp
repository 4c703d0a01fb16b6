#include "hpcfe/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hpcfe/bench.hpp"
#include "hpcfe/cascade.hpp"
#include "hpcfe/error.hpp"
#include "hpcfe/io.hpp"
#include "hpcfe/twin.hpp"
#include "hpcfe/uq.hpp"

namespace hpcfe::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "hpcfe 0.1.0";

// Collects artifacts and writes the manifest last, so a manifest on disk
// always describes a complete run.
class RunRecorder {
public:
  RunRecorder(std::string command, std::vector<std::string> argv) : command_(std::move(command)), argv_(std::move(argv)) {}

  void set_config(json config) { config_ = std::move(config); }
  void add_seed(const std::string& name, std::uint64_t seed) { seeds_[name] = seed; }
  void add_input(const fs::path& path, const std::string& content) { inputs_[path.string()] = io::sha256_hex(content); }

  void write(const fs::path& path, const std::string& content) {
    io::write_file_atomic(path, content);
    artifacts_[path.filename().string()] = io::sha256_hex(content);
  }

  void finish(const fs::path& manifest_path) {
    json m{{"tool", kToolVersion},
           {"command", command_},
           {"argv", argv_},
           {"config", config_},
           {"seeds", seeds_},
           {"inputs", inputs_},
           {"artifacts", artifacts_}};
    io::write_file_atomic(manifest_path, m.dump(2) + "\n");
  }

private:
  std::string command_;
  std::vector<std::string> argv_;
  json config_ = json::object();
  json seeds_ = json::object();
  json inputs_ = json::object();
  json artifacts_ = json::object();
};

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  const std::string text = io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("config '" + path + "': " + e.what());
  }
}

std::vector<HpcfeConfig> level_configs_from(const json& j, std::vector<HpcfeConfig> fallback) {
  if (!j.contains("levels")) return fallback;
  std::vector<HpcfeConfig> out;
  for (const json& c : j.at("levels")) out.push_back(io::config_from_json(c));
  if (out.empty()) throw ValidationError("config: 'levels' must not be empty");
  return out;
}

json configs_json(const std::vector<HpcfeConfig>& configs) {
  json a = json::array();
  for (const auto& c : configs) a.push_back(io::to_json(c));
  return a;
}

json curve(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return json{{"x", std::vector<double>(x.data(), x.data() + x.size())},
              {"y", std::vector<double>(y.data(), y.data() + y.size())}};
}

json curve(const std::vector<double>& x, const std::vector<double>& y) { return json{{"x", x}, {"y", y}}; }

json metrics_json(const uq::Metrics& m) {
  return json{{"rmse", m.rmse}, {"ks_distance", m.ks_distance}, {"mean_abs_error", m.mean_abs_error}};
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string data, out, config;
  bool modified = false;
  std::optional<int> degree, order;
};

int cmd_fit(const FitArgs& a, const std::vector<std::string>& argv) {
  RunRecorder rec("fit", argv);
  const std::string text = io::read_file(a.data);
  rec.add_input(a.data, text);
  FidelityDataset data = io::fidelity_from_csv(text, a.data);

  const json cfg = load_config(a.config);
  require_keys(cfg, {"levels", "modified", "lower", "upper"}, "fit config");
  std::vector<HpcfeConfig> configs = level_configs_from(cfg, {HpcfeConfig{}});
  for (auto& c : configs) {
    if (a.degree) c.basis.degree = *a.degree;
    if (a.order) c.basis.interaction_order = *a.order;
  }
  const bool modified = a.modified || cfg.value("modified", false);
  if (cfg.contains("lower") || cfg.contains("upper")) {
    const auto lo = cfg.at("lower").get<std::vector<double>>();
    const auto hi = cfg.at("upper").get<std::vector<double>>();
    data.bounds = {Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                   Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()))};
  }
  rec.set_config({{"levels", configs_json(configs)}, {"modified", modified}, {"data", a.data},
                  {"bounds", {{"lower", std::vector<double>(data.bounds.lower.data(), data.bounds.lower.data() + data.dim())},
                              {"upper", std::vector<double>(data.bounds.upper.data(), data.bounds.upper.data() + data.dim())}}}});

  json doc;
  if (data.levels.size() == 1) {
    const FidelityLevel& lv = data.levels.front();
    doc = io::to_json(train(configs.front(), data.bounds, lv.x, lv.y));
  } else {
    CascadeOptions opts;
    opts.configs = configs;
    opts.modified = modified;
    CascadeTrainResult r = train_cascade(opts, data);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    doc = io::to_json(r.model);
  }
  rec.write(a.out, doc.dump(2) + "\n");
  rec.finish(fs::path(a.out).string() + ".manifest.json");
  std::cerr << "fit: wrote " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string model, query, out;
};

int cmd_predict(const PredictArgs& a, const std::vector<std::string>& argv) {
  RunRecorder rec("predict", argv);
  const std::string model_text = io::read_file(a.model);
  const std::string query_text = io::read_file(a.query);
  rec.add_input(a.model, model_text);
  rec.add_input(a.query, query_text);
  json doc;
  try {
    doc = json::parse(model_text);
  } catch (const json::exception& e) {
    throw ValidationError("model '" + a.model + "': " + e.what());
  }
  const DeepHpcfeModel model = io::any_model_from_json(doc);
  const Eigen::MatrixXd x = io::inputs_from_csv(query_text, a.query);
  if (x.cols() != model.input_dim())
    throw ValidationError("query has " + std::to_string(x.cols()) + " columns, model expects " +
                          std::to_string(model.input_dim()));
  const CascadePrediction pred = model.predict(x);
  if (pred.top().extrapolated) std::cerr << "warning: some query points lie outside the training bounds\n";

  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < x.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
  header.insert(header.end(), {"mean", "variance"});
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<double> r;
    for (Eigen::Index j = 0; j < x.cols(); ++j) r.push_back(x(i, j));
    r.push_back(pred.top().mean[i]);
    r.push_back(pred.top().variance[i]);
    rows.push_back(std::move(r));
  }
  rec.set_config({{"model", a.model}, {"query", a.query}});
  rec.write(a.out, io::render_csv(header, rows));
  rec.finish(fs::path(a.out).string() + ".manifest.json");
  std::cerr << "predict: wrote " << x.rows() << " rows to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- uq run

struct UqArgs {
  std::string bench, out_dir, config, data;
  std::optional<std::uint64_t> seed;
  std::vector<long> counts;
  std::optional<long> mcs;
};

int cmd_uq_run(const UqArgs& a, const std::vector<std::string>& argv) {
  RunRecorder rec("uq run", argv);
  const json cfg = load_config(a.config);
  require_keys(cfg,
               {"counts", "design", "nested", "seed", "modified", "levels", "single_fidelity", "test_points",
                "mcs_samples", "kde_points"},
               "uq config");
  const std::uint64_t seed = a.seed ? *a.seed : cfg.value("seed", std::uint64_t{0});
  bench::StudyConfig study = bench::default_study(a.bench, seed);
  if (cfg.contains("counts")) study.design.counts = cfg.at("counts").get<std::vector<Eigen::Index>>();
  if (!a.counts.empty()) study.design.counts.assign(a.counts.begin(), a.counts.end());
  if (cfg.contains("design")) {
    const std::string kind = cfg.at("design").get<std::string>();
    if (kind == "uniform_grid") study.design.kind = DesignKind::UniformGrid;
    else if (kind == "uniform_random") study.design.kind = DesignKind::UniformRandom;
    else throw ValidationError("uq config: design must be uniform_grid or uniform_random");
  }
  study.design.nested = cfg.value("nested", study.design.nested);
  study.modified = cfg.value("modified", study.modified);
  study.level_configs = level_configs_from(cfg, study.level_configs);
  if (cfg.contains("single_fidelity")) study.single_fidelity = io::config_from_json(cfg.at("single_fidelity"));
  study.test_points = cfg.value("test_points", study.test_points);
  study.mcs_samples = cfg.value("mcs_samples", study.mcs_samples);
  if (a.mcs) study.mcs_samples = *a.mcs;
  study.kde_points = cfg.value("kde_points", study.kde_points);
  if (!a.data.empty()) {
    const std::string text = io::read_file(a.data);
    rec.add_input(a.data, text);
    study.data_override = io::fidelity_from_csv(text, a.data);
  }

  const bench::StudyResult r = bench::run_study(study);
  rec.add_seed("design", study.design.seed);
  if (r.monte_carlo) rec.add_seed("monte_carlo", r.mcs_seed);
  rec.set_config({{"bench", study.bench},
                  {"counts", study.design.counts},
                  {"design", study.design.kind == DesignKind::UniformGrid ? "uniform_grid" : "uniform_random"},
                  {"nested", study.design.nested},
                  {"modified", study.modified},
                  {"levels", configs_json(study.level_configs)},
                  {"single_fidelity", io::to_json(study.single_fidelity)},
                  {"test_points", study.test_points},
                  {"mcs_samples", study.mcs_samples},
                  {"kde_points", study.kde_points},
                  {"data_override", a.data}});

  const fs::path dir(a.out_dir);
  rec.write(dir / "training.csv", io::fidelity_to_csv(r.data));
  rec.write(dir / "model.json", io::to_json(r.model).dump(2) + "\n");
  rec.write(dir / "metrics.csv",
            "model,rmse,ks_distance,mean_abs_error\n" +
                std::string("multi_fidelity,") + io::format_double(r.mf.rmse) + "," + io::format_double(r.mf.ks_distance) + "," + io::format_double(r.mf.mean_abs_error) + "\n" +
                "hf_only," + io::format_double(r.hf.rmse) + "," + io::format_double(r.hf.ks_distance) + "," + io::format_double(r.hf.mean_abs_error) + "\n" +
                "lf_only," + io::format_double(r.lf.rmse) + "," + io::format_double(r.lf.ks_distance) + "," + io::format_double(r.lf.mean_abs_error) + "\n");

  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < r.eval_x.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
  header.insert(header.end(), {"truth", "mf_mean", "mf_variance", "hf_only", "lf_only"});
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < r.eval_x.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < r.eval_x.cols(); ++j) row.push_back(r.eval_x(i, j));
    row.insert(row.end(), {r.truth[i], r.mf_mean[i], r.mf_variance[i], r.hf_only[i], r.lf_only[i]});
    rows.push_back(std::move(row));
  }
  rec.write(dir / "evaluation.csv", io::render_csv(header, rows));

  const Eigen::VectorXd grid = uq::kde_grid(r.truth, study.kde_points);
  const Eigen::VectorXd k_truth = uq::kde_pdf(r.truth, grid);
  const Eigen::VectorXd k_mf = uq::kde_pdf(r.mf_mean, grid);
  const Eigen::VectorXd k_hf = uq::kde_pdf(r.hf_only, grid);
  const Eigen::VectorXd k_lf = uq::kde_pdf(r.lf_only, grid);
  std::vector<std::vector<double>> kde_rows;
  for (Eigen::Index i = 0; i < grid.size(); ++i) kde_rows.push_back({grid[i], k_truth[i], k_mf[i], k_hf[i], k_lf[i]});
  rec.write(dir / "kde.csv", io::render_csv({"y", "truth", "multi_fidelity", "hf_only", "lf_only"}, kde_rows));

  json report{{"report", "uq"},
              {"bench", study.bench},
              {"seed", study.design.seed},
              {"evaluation", r.monte_carlo ? "monte_carlo" : "test_grid"},
              {"samples", r.eval_x.rows()},
              {"metrics", {{"multi_fidelity", metrics_json(r.mf)}, {"hf_only", metrics_json(r.hf)}, {"lf_only", metrics_json(r.lf)}}},
              {"curves", {{"kde_truth", curve(grid, k_truth)},
                          {"kde_multi_fidelity", curve(grid, k_mf)},
                          {"kde_hf_only", curve(grid, k_hf)},
                          {"kde_lf_only", curve(grid, k_lf)}}}};
  if (!r.monte_carlo) {
    const Eigen::VectorXd x = r.eval_x.col(0);
    report["curves"]["truth"] = curve(x, r.truth);
    report["curves"]["multi_fidelity"] = curve(x, r.mf_mean);
    report["curves"]["hf_only"] = curve(x, r.hf_only);
    report["curves"]["lf_only"] = curve(x, r.lf_only);
  }
  rec.write(dir / "report.json", report.dump(2) + "\n");
  rec.finish(dir / "manifest.json");

  std::cerr << "uq run (" << study.bench << ", seed " << study.design.seed << "): MF rmse " << r.mf.rmse << " ks "
            << r.mf.ks_distance << "; HF-only rmse " << r.hf.rmse << " ks " << r.hf.ks_distance << "; LF-only rmse "
            << r.lf.rmse << " ks " << r.lf.ks_distance << "\n";
  return 0;
}

// ---------------------------------------------------------------- twin

struct TwinArgs {
  std::string config, out_dir, measurements;
  std::optional<std::string> quantity, domain, mass_low;
  std::optional<long> hf_points, lf_points, query_points;
  std::optional<double> t_max, noise, alert_limit;
  std::optional<std::uint64_t> seed;
};

const std::set<std::string> kTwinKeys = {"quantity", "domain", "t_max", "lf_points", "hf_points", "nominal",
                                         "schedule", "noise_sigma", "seed", "periods_apart", "points_per_period",
                                         "time_mode", "freq_mode", "query_points", "alert_limit", "modified",
                                         "levels", "single_fidelity"};

twin::ScenarioConfig scenario_from(const json& cfg, const TwinArgs& a) {
  require_keys(cfg, kTwinKeys, "twin config");
  const twin::Quantity q = twin::quantity_from_string(a.quantity.value_or(cfg.value("quantity", std::string("mass"))));
  const twin::Domain d = twin::domain_from_string(a.domain.value_or(cfg.value("domain", std::string("time"))));
  twin::ScenarioConfig s = twin::default_scenario(q, d, 12);
  s.t_max = a.t_max.value_or(cfg.value("t_max", s.t_max));
  s.lf_points = a.lf_points.value_or(cfg.value("lf_points", s.lf_points));
  s.hf_points = a.hf_points.value_or(cfg.value("hf_points", s.hf_points));
  if (cfg.contains("nominal")) {
    const json& n = cfg.at("nominal");
    require_keys(n, {"m0", "k0", "zeta0"}, "twin config nominal");
    s.nominal = twin::NominalModel::from_damping_ratio(n.value("m0", 1.0), n.value("k0", 4.0), n.value("zeta0", 0.02));
  }
  if (cfg.contains("schedule")) {
    const json& sc = cfg.at("schedule");
    require_keys(sc, {"alpha_k", "eps_k", "beta_k", "beta_m", "eps_m", "mass_low"}, "twin config schedule");
    s.schedule.alpha_k = sc.value("alpha_k", s.schedule.alpha_k);
    s.schedule.eps_k = sc.value("eps_k", s.schedule.eps_k);
    s.schedule.beta_k = sc.value("beta_k", s.schedule.beta_k);
    s.schedule.beta_m = sc.value("beta_m", s.schedule.beta_m);
    s.schedule.eps_m = sc.value("eps_m", s.schedule.eps_m);
    if (sc.contains("mass_low")) s.schedule.mass_low = twin::mass_low_variant_from_string(sc.at("mass_low").get<std::string>());
  }
  if (a.mass_low) s.schedule.mass_low = twin::mass_low_variant_from_string(*a.mass_low);
  s.synthesis.noise_sigma = a.noise.value_or(cfg.value("noise_sigma", 0.0));
  s.synthesis.seed = a.seed.value_or(cfg.value("seed", std::uint64_t{0}));
  s.synthesis.periods_apart = cfg.value("periods_apart", s.synthesis.periods_apart);
  s.synthesis.points_per_period = cfg.value("points_per_period", s.synthesis.points_per_period);
  s.track.points_per_period = s.synthesis.points_per_period;
  const std::string tm = cfg.value("time_mode", std::string("exact"));
  if (tm != "exact" && tm != "approximate") throw ValidationError("twin config: time_mode must be exact or approximate");
  s.track.time_mode = tm == "exact" ? twin::TimeMode::Exact : twin::TimeMode::Approximate;
  const std::string fm = cfg.value("freq_mode", std::string("exact"));
  if (fm != "exact" && fm != "high_q") throw ValidationError("twin config: freq_mode must be exact or high_q");
  s.track.freq_mode = fm == "exact" ? twin::FreqMode::Exact : twin::FreqMode::HighQ;
  s.track.query_points = a.query_points.value_or(cfg.value("query_points", s.track.query_points));
  s.track.alert_limit = a.alert_limit.value_or(cfg.value("alert_limit", s.track.alert_limit));
  s.track.cascade.modified = cfg.value("modified", false);
  s.track.cascade.configs = level_configs_from(cfg, s.track.cascade.configs);
  if (cfg.contains("single_fidelity")) s.single_fidelity = io::config_from_json(cfg.at("single_fidelity"));
  return s;
}

json scenario_json(const twin::ScenarioConfig& s) {
  return json{{"quantity", twin::to_string(s.quantity)},
              {"domain", twin::to_string(s.domain)},
              {"t_max", s.t_max},
              {"lf_points", s.lf_points},
              {"hf_points", s.hf_points},
              {"nominal", {{"m0", s.nominal.m0}, {"k0", s.nominal.k0}, {"zeta0", s.nominal.zeta0()}}},
              {"schedule", {{"alpha_k", s.schedule.alpha_k}, {"eps_k", s.schedule.eps_k}, {"beta_k", s.schedule.beta_k},
                            {"beta_m", s.schedule.beta_m}, {"eps_m", s.schedule.eps_m},
                            {"mass_low", twin::to_string(s.schedule.mass_low)}}},
              {"noise_sigma", s.synthesis.noise_sigma},
              {"seed", s.synthesis.seed},
              {"periods_apart", s.synthesis.periods_apart},
              {"points_per_period", s.synthesis.points_per_period},
              {"time_mode", s.track.time_mode == twin::TimeMode::Exact ? "exact" : "approximate"},
              {"freq_mode", s.track.freq_mode == twin::FreqMode::Exact ? "exact" : "high_q"},
              {"query_points", s.track.query_points},
              {"alert_limit", s.track.alert_limit},
              {"modified", s.track.cascade.modified},
              {"levels", configs_json(s.track.cascade.configs)},
              {"single_fidelity", io::to_json(s.single_fidelity)}};
}

int cmd_twin_simulate(const TwinArgs& a, const std::vector<std::string>& argv) {
  RunRecorder rec("twin simulate", argv);
  const twin::ScenarioConfig s = scenario_from(load_config(a.config), a);
  const twin::SimulatedMeasurements m = twin::simulate(s);
  rec.set_config(scenario_json(s));
  rec.add_seed("noise", s.synthesis.seed);

  const fs::path dir(a.out_dir);
  rec.write(dir / "measurements.csv", io::measurements_to_csv({m.lf, m.hf}));
  std::vector<std::vector<double>> rows;
  for (const auto& rcd : m.lf.records) {
    rows.push_back({rcd.t_s, twin::degradation_truth(s.schedule, rcd.t_s, s.quantity, twin::Fidelity::High),
                    twin::degradation_truth(s.schedule, rcd.t_s, s.quantity, twin::Fidelity::Low)});
  }
  rec.write(dir / "truth.csv", io::render_csv({"t_s", "delta_high", "delta_low"}, rows));
  rec.finish(dir / "manifest.json");
  std::cerr << "twin simulate: " << m.lf.records.size() << " LF and " << m.hf.records.size() << " HF records ("
            << twin::to_string(s.quantity) << ", " << twin::to_string(s.domain) << ")\n";
  return 0;
}

int cmd_twin_track(const TwinArgs& a, const std::vector<std::string>& argv) {
  RunRecorder rec("twin track", argv);
  const json cfg = load_config(a.config);
  // The measurement file does not say which property drifted.
  if (!a.quantity && !(cfg.is_object() && cfg.contains("quantity")))
    throw ValidationError("twin track: --quantity (mass or stiffness) is required");
  twin::ScenarioConfig s = scenario_from(cfg, a);
  const std::string text = io::read_file(a.measurements);
  rec.add_input(a.measurements, text);
  const std::vector<twin::MeasurementSeries> series = io::measurements_from_csv(text, a.measurements);
  const twin::MeasurementSeries* lf = nullptr;
  const twin::MeasurementSeries* hf = nullptr;
  for (const auto& ser : series) (ser.fidelity == twin::Fidelity::Low ? lf : hf) = &ser;
  if (!lf || !hf) throw ValidationError(a.measurements + ": need both low- and high-fidelity records");
  if (!a.domain && lf->domain != s.domain) s.domain = lf->domain;
  rec.set_config(scenario_json(s));

  const twin::TwinState st = twin::track(s.nominal, *lf, *hf, s.track);
  const twin::TruthComparison cmp = twin::compare_with_truth(st, s.schedule, s.single_fidelity);

  json alerts = json::array();
  for (const auto& al : st.alerts) alerts.push_back({{"t_start", al.t_start}, {"t_end", al.t_end}, {"peak_delta", al.peak_delta}});
  json dropped = json::array();
  for (const auto& d : st.dropped) dropped.push_back({{"fidelity", twin::to_string(d.fidelity)}, {"t_s", d.t_s}, {"reason", d.reason}});
  const std::vector<double> qt(st.query_times.data(), st.query_times.data() + st.query_times.size());
  json report{{"report", "twin_track"},
              {"quantity", twin::to_string(st.quantity)},
              {"domain", twin::to_string(st.domain)},
              {"estimate_grid", qt},
              {"mean", std::vector<double>(st.tracked_mean.data(), st.tracked_mean.data() + st.tracked_mean.size())},
              {"variance", std::vector<double>(st.tracked_variance.data(), st.tracked_variance.data() + st.tracked_variance.size())},
              {"updated", {{"t_s", st.latest_t_s}, {"delta", st.latest_delta}, {"mass", st.updated_mass}, {"stiffness", st.updated_stiffness}}},
              {"alerts", alerts},
              {"dropped_count", st.dropped.size()},
              {"dropped", dropped},
              {"rmse_vs_schedule", {{"multi_fidelity", cmp.mf_rmse}, {"single_fidelity", cmp.sf_rmse}}},
              {"curves", {{"tracked_mean", curve(st.query_times, st.tracked_mean)},
                          {"tracked_variance", curve(st.query_times, st.tracked_variance)},
                          {"single_fidelity", curve(st.query_times, cmp.single_fidelity)},
                          {"truth", curve(st.query_times, cmp.truth)},
                          {"lf_estimates", curve(st.lf_times, st.lf_estimates)},
                          {"hf_estimates", curve(st.hf_times, st.hf_estimates)}}}};

  const fs::path dir(a.out_dir);
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < st.query_times.size(); ++i)
    rows.push_back({st.query_times[i], st.tracked_mean[i], st.tracked_variance[i], cmp.single_fidelity[i], cmp.truth[i]});
  rec.write(dir / "evolution.csv", io::render_csv({"t_s", "mean", "variance", "single_fidelity", "truth"}, rows));
  std::string est = "t_s,fidelity,delta\n";
  for (std::size_t i = 0; i < st.lf_times.size(); ++i)
    est += io::format_double(st.lf_times[i]) + ",low," + io::format_double(st.lf_estimates[i]) + "\n";
  for (std::size_t i = 0; i < st.hf_times.size(); ++i)
    est += io::format_double(st.hf_times[i]) + ",high," + io::format_double(st.hf_estimates[i]) + "\n";
  rec.write(dir / "estimates.csv", est);
  rec.write(dir / "model.json", io::to_json(*st.model).dump(2) + "\n");
  rec.write(dir / "report.json", report.dump(2) + "\n");
  rec.finish(dir / "manifest.json");

  for (const auto& d : st.dropped)
    std::cerr << "warning: dropped " << twin::to_string(d.fidelity) << " sample at t_s=" << d.t_s << ": " << d.reason << "\n";
  for (const auto& al : st.alerts)
    std::cerr << "alert: |delta| above " << s.track.alert_limit << " for t_s in [" << al.t_start << ", " << al.t_end << "]\n";
  std::cerr << "twin track: MF rmse " << cmp.mf_rmse << ", single-fidelity rmse " << cmp.sf_rmse << "; updated m="
            << st.updated_mass << " k=" << st.updated_stiffness << "\n";
  return 0;
}

// ---------------------------------------------------------------- plot-data

struct PlotArgs {
  std::string report, out;
};

int cmd_plot_data(const PlotArgs& a, const std::vector<std::string>& argv) {
  RunRecorder rec("plot-data", argv);
  const std::string text = io::read_file(a.report);
  rec.add_input(a.report, text);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("report '" + a.report + "': " + e.what());
  }
  if (!doc.is_object() || !doc.contains("curves") || !doc["curves"].is_object())
    throw ValidationError("report '" + a.report + "': no 'curves' object to export");
  std::string out = "curve,x,y\n";
  for (const auto& [name, c] : doc["curves"].items()) {
    const auto x = c.at("x").get<std::vector<double>>();
    const auto y = c.at("y").get<std::vector<double>>();
    if (x.size() != y.size()) throw ValidationError("report curve '" + name + "': x and y lengths differ");
    for (std::size_t i = 0; i < x.size(); ++i) out += name + "," + io::format_double(x[i]) + "," + io::format_double(y[i]) + "\n";
  }
  rec.set_config({{"report", a.report}});
  rec.write(a.out, out);
  rec.finish(fs::path(a.out).string() + ".manifest.json");
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);

  CLI::App app{"Deep H-PCFE multi-fidelity surrogates, UQ benchmarks and SDOF digital-twin tracking"};
  app.name("hpcfe");
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Train an H-PCFE model (one level) or a cascade (several) from a CSV");
  fit_cmd->add_option("--data", fit.data, "fidelity CSV with header x1..xd,y,level")->required();
  fit_cmd->add_option("--out", fit.out, "model JSON to write")->required();
  fit_cmd->add_option("--config", fit.config, "JSON with keys: levels (list of model configs), modified, lower, upper");
  fit_cmd->add_flag("--modified", fit.modified, "GP-only (zero-mean) models above level 1");
  fit_cmd->add_option("--degree", fit.degree, "polynomial degree for every level");
  fit_cmd->add_option("--order", fit.order, "interaction order for every level");

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Evaluate a saved model at query points");
  pred_cmd->add_option("--model", pred.model, "model JSON from fit")->required();
  pred_cmd->add_option("--query", pred.query, "CSV with header x1..xd")->required();
  pred_cmd->add_option("--out", pred.out, "prediction CSV (x1..xd,mean,variance)")->required();

  UqArgs uqa;
  auto* uq_cmd = app.add_subcommand("uq", "Uncertainty-quantification studies");
  uq_cmd->require_subcommand(1);
  auto* uq_run = uq_cmd->add_subcommand("run", "Train LF-only, HF-only and multi-fidelity surrogates on a benchmark");
  uq_run->add_option("--bench", uqa.bench, "pedagogical or buckling")->required()->check(CLI::IsMember({"pedagogical", "buckling"}));
  uq_run->add_option("--seed", uqa.seed, "design and Monte Carlo seed");
  uq_run->add_option("--out-dir", uqa.out_dir, "output directory")->default_val("uq_out");
  uq_run->add_option("--config", uqa.config,
                     "JSON with keys: counts, design, nested, seed, modified, levels, single_fidelity, test_points, "
                     "mcs_samples, kde_points");
  uq_run->add_option("--counts", uqa.counts, "samples per fidelity level, lowest first");
  uq_run->add_option("--mcs", uqa.mcs, "Monte Carlo sample count");
  uq_run->add_option("--data", uqa.data, "fidelity CSV replacing the synthetic training data");

  TwinArgs tw;
  auto* twin_cmd = app.add_subcommand("twin", "SDOF digital twin");
  twin_cmd->require_subcommand(1);
  auto add_twin_common = [&tw](CLI::App* c) {
    c->add_option("--config", tw.config,
                  "JSON with keys: quantity, domain, t_max, lf_points, hf_points, nominal{m0,k0,zeta0}, "
                  "schedule{alpha_k,eps_k,beta_k,beta_m,eps_m,mass_low}, noise_sigma, seed, periods_apart, "
                  "points_per_period, time_mode, freq_mode, query_points, alert_limit, modified, levels, "
                  "single_fidelity");
    c->add_option("--out-dir", tw.out_dir, "output directory")->default_val("twin_out");
    c->add_option("--quantity", tw.quantity, "mass or stiffness");
    c->add_option("--domain", tw.domain, "time or frequency");
    c->add_option("--mass-low", tw.mass_low, "low-fidelity mass curve: scaled or sawtooth");
    c->add_option("--seed", tw.seed, "noise seed");
  };
  auto* sim = twin_cmd->add_subcommand("simulate", "Write synthetic LF and HF measurements");
  add_twin_common(sim);
  sim->add_option("--hf-points", tw.hf_points, "high-fidelity measurement count");
  sim->add_option("--lf-points", tw.lf_points, "low-fidelity measurement count");
  sim->add_option("--t-max", tw.t_max, "end of the slow-time window (units of T0)");
  sim->add_option("--noise", tw.noise, "relative amplitude noise");
  auto* trk = twin_cmd->add_subcommand("track", "Track the parameter evolution from a measurement CSV");
  add_twin_common(trk);
  trk->add_option("--measurements", tw.measurements, "CSV with header t_s,fidelity,domain,payload_a,payload_b,n")->required();
  trk->add_option("--query-points", tw.query_points, "size of the reported slow-time grid");
  trk->add_option("--alert-limit", tw.alert_limit, "alert when |delta| exceeds this");

  PlotArgs plot;
  auto* plot_cmd = app.add_subcommand("plot-data", "Flatten the curves of a report JSON into tidy CSV");
  plot_cmd->add_option("--report", plot.report, "report.json from uq run or twin track")->required();
  plot_cmd->add_option("--out", plot.out, "CSV with columns curve,x,y")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, std::cerr, std::cerr);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, args);
    if (*pred_cmd) return cmd_predict(pred, args);
    if (*uq_run) return cmd_uq_run(uqa, args);
    if (*sim) return cmd_twin_simulate(tw, args);
    if (*trk) return cmd_twin_track(tw, args);
    if (*plot_cmd) return cmd_plot_data(plot, args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace hpcfe::cli
