// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpcfe/bench.hpp"
#include "hpcfe/cli.hpp"
#include "hpcfe/design.hpp"
#include "hpcfe/hpcfe.hpp"
#include "hpcfe/io.hpp"
#include "hpcfe/rng.hpp"
#include "hpcfe/twin.hpp"

namespace fs = std::filesystem;
using namespace hpcfe;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome pedagogical_dominance() {
  std::vector<double> mf, hf, lf;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const bench::StudyResult r = bench::run_study(bench::default_study("pedagogical", seed));
    mf.push_back(r.mf.rmse);
    hf.push_back(r.hf.rmse);
    lf.push_back(r.lf.rmse);
  }
  const double m = median(mf), h = median(hf), l = median(lf);
  return {m < std::min(h, l) && m <= 0.05,
          "median rmse mf " + fmt("%.4g", m) + " hf " + fmt("%.4g", h) + " lf " + fmt("%.4g", l)};
}

Outcome error_decay() {
  std::vector<double> medians;
  for (Eigen::Index n2 : {4, 8, 12, 16}) {
    std::vector<double> rmse;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      bench::StudyConfig cfg = bench::default_study("pedagogical", seed);
      cfg.design.counts = {50, n2};
      rmse.push_back(bench::run_study(cfg).mf.rmse);
    }
    medians.push_back(median(rmse));
  }
  bool ok = true;
  std::string detail = "median rmse";
  for (std::size_t i = 0; i < medians.size(); ++i) {
    detail += " " + fmt("%.4g", medians[i]);
    if (i > 0 && medians[i] > 1.1 * medians[i - 1]) ok = false;
  }
  return {ok, detail};
}

Outcome buckling_uq() {
  const bench::StudyResult r = bench::run_study(bench::default_study("buckling", 0));
  const double mf = r.mf.ks_distance, hf = r.hf.ks_distance, lf = r.lf.ks_distance;
  return {mf <= 0.05 && mf < hf && mf < lf,
          "ks mf " + fmt("%.4g", mf) + " hf " + fmt("%.4g", hf) + " lf " + fmt("%.4g", lf)};
}

Outcome interpolation_and_variance() {
  const auto g_low = [](double x) { return bench::pedagogical(x).low; };
  const auto g_high = [](double x) { return bench::pedagogical(x).high; };
  HpcfeConfig cfg;
  cfg.kernel.nugget = 0.0;

  double worst = 0.0, min_raw = 0.0, min_clamped = 0.0;
  const auto check = [&](const InputBounds& b, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const HpcfeConfig& c) {
    const HpcfeModel m = train(c, b, x, y);
    const double range = y.maxCoeff() - y.minCoeff();
    worst = std::max(worst, (m.predict(x).mean - y).cwiseAbs().maxCoeff() / range);
    const Prediction p = m.predict(uniform_random(b, 1000, 99));
    min_raw = std::min(min_raw, p.raw_variance.minCoeff());
    min_clamped = std::min(min_clamped, p.variance.minCoeff());
  };

  for (Eigen::Index n : {20, 50}) {
    const Eigen::MatrixXd x = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
    Eigen::VectorXd lo(n), hi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      lo[i] = g_low(x(i, 0));
      hi[i] = g_high(x(i, 0));
    }
    check(InputBounds::unit_box(1), x, lo, cfg);
    check(InputBounds::unit_box(1), x, hi, cfg);
  }
  HpcfeConfig cfg2 = cfg;
  cfg2.basis.degree = 3;
  const Eigen::MatrixXd x2 = uniform_random(InputBounds::unit_box(2), 40, 5);
  Eigen::VectorXd y2(40);
  for (Eigen::Index i = 0; i < 40; ++i) y2[i] = std::sin(3 * x2(i, 0)) * std::exp(x2(i, 1));
  check(InputBounds::unit_box(2), x2, y2, cfg2);

  return {worst <= 1e-6 && min_raw >= -1e-12 && min_clamped >= 0.0,
          "max rel err " + fmt("%.3g", worst) + ", min raw variance " + fmt("%.3g", min_raw)};
}

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  Eigen::MatrixXd m(r, c);
  const CounterRng rng(seed, 7);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(static_cast<std::uint64_t>(i));
  return m;
}

Eigen::VectorXd svd_least_norm(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > 1e-12 * s[0]) inv[i] = 1.0 / s[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose() * b;
}

Outcome coefficient_solve() {
  double full = 0.0, under = 0.0, excess = -1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd a = random_matrix(7, 7, seed);
    const Eigen::MatrixXd c = a.transpose() * a + Eigen::MatrixXd::Identity(7, 7);
    const Eigen::VectorXd d = random_matrix(7, 1, seed + 100);
    const Eigen::VectorXd direct = c.partialPivLu().solve(d);
    full = std::max(full, (solve_coefficients(c, d, Eigen::MatrixXd::Identity(7, 7)) - direct).cwiseAbs().maxCoeff());

    const Eigen::MatrixXd cu = random_matrix(4, 10, seed + 200);
    const Eigen::VectorXd du = random_matrix(4, 1, seed + 300);
    under = std::max(under, (solve_coefficients(cu, du, Eigen::MatrixXd::Identity(10, 10)) - svd_least_norm(cu, du))
                                .cwiseAbs()
                                .maxCoeff());
  }
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Eigen::Index rows = 2 + static_cast<Eigen::Index>(seed % 8);
    const Eigen::Index cols = 2 + static_cast<Eigen::Index>((seed * 3) % 10);
    const Eigen::MatrixXd c = random_matrix(rows, cols, seed + 1000);
    const Eigen::VectorXd d = random_matrix(rows, 1, seed + 2000);
    Eigen::MatrixXd w = random_matrix(cols, cols, seed + 3000);
    w = w * w.transpose() + Eigen::MatrixXd::Identity(cols, cols);
    const Eigen::VectorXd alpha0 = svd_least_norm(c, d);
    const double gap = (c * solve_coefficients(c, d, w) - d).norm() - (c * alpha0 - d).norm();
    excess = std::max(excess, gap);
  }
  return {full <= 1e-10 && under <= 1e-8 && excess <= 1e-10,
          "full-rank " + fmt("%.3g", full) + ", least-norm " + fmt("%.3g", under) + ", worst residual excess " +
              fmt("%.3g", excess)};
}

Outcome identification() {
  using namespace twin;
  const NominalModel n;
  const double dm =
      estimate_delta_time_domain(measure_peak_pair(n, 0.0, 0.0), measure_peak_pair(n, 0.35, 0.0), n.zeta0(),
                                 Quantity::Mass);
  double freq_err = 0.0, grid_err = 0.0;
  for (Quantity q : {Quantity::Mass, Quantity::Stiffness}) {
    const double est = estimate_delta_freq_domain(frf_peak(0.0, n.zeta0(), q), frf_peak(0.5, n.zeta0(), q),
                                                  n.zeta0(), q, FreqMode::Exact);
    freq_err = std::max(freq_err, std::abs(est - 0.5));
    for (double delta : {-0.3, 0.0, 0.5}) {
      const FrfPeak p = frf_peak(delta, n.zeta0(), q);
      const int pts = 1000000;
      const double lo = 0.9 * p.omega_max, hi = 1.1 * p.omega_max;
      double best = 0.0;
      for (int i = 0; i < pts; ++i) best = std::max(best, frf_amplitude(lo + (hi - lo) * i / (pts - 1), delta, n.zeta0(), q));
      grid_err = std::max(grid_err, std::abs(best / p.h_max - 1.0));
    }
  }
  return {std::abs(dm - 0.35) <= 1e-3 && freq_err <= 1e-10 && grid_err <= 1e-6,
          "time-domain dm " + fmt("%.6f", dm) + ", frequency err " + fmt("%.3g", freq_err) + ", peak vs grid " +
              fmt("%.3g", grid_err)};
}

Outcome twin_tracking() {
  using namespace twin;
  struct Case {
    Quantity q;
    Domain d;
    Eigen::Index hf;
  };
  const Case cases[] = {{Quantity::Mass, Domain::Time, 19},
                        {Quantity::Stiffness, Domain::Time, 11},
                        {Quantity::Mass, Domain::Frequency, 12},
                        {Quantity::Stiffness, Domain::Frequency, 10}};
  bool ok = true;
  std::string detail;
  for (const Case& c : cases) {
    const ScenarioConfig sc = default_scenario(c.q, c.d, c.hf);
    const SimulatedMeasurements m = simulate(sc);
    const TwinState st = track(sc.nominal, m.lf, m.hf, sc.track);
    const TruthComparison cmp = compare_with_truth(st, sc.schedule, sc.single_fidelity);
    ok = ok && cmp.mf_rmse < cmp.sf_rmse && cmp.mf_rmse <= 0.02;
    if (!detail.empty()) detail += "; ";
    detail += to_string(c.q) + "/" + to_string(c.d) + " mf " + fmt("%.4g", cmp.mf_rmse) + " sf " +
              fmt("%.4g", cmp.sf_rmse);
  }
  return {ok, detail};
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"hpcfe"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

// Runs the full command set into `dir`.
bool run_all_commands(const fs::path& dir) {
  fs::create_directories(dir);
  const auto p = [&](const std::string& f) { return (dir / f).string(); };
  std::string csv = "x1,y,level\n";
  for (int i = 0; i < 30; ++i) {
    const double x = i / 29.0;
    csv += io::format_double(x) + "," + io::format_double(bench::pedagogical(x).low) + ",1\n";
  }
  for (int i = 0; i < 30; i += 3) {
    const double x = i / 29.0;
    csv += io::format_double(x) + "," + io::format_double(bench::pedagogical(x).high) + ",2\n";
  }
  io::write_file_atomic(p("data.csv"), csv);
  io::write_file_atomic(p("query.csv"), "x1\n0.1\n0.33\n0.77\n");
  const std::vector<std::vector<std::string>> commands = {
      {"fit", "--data", p("data.csv"), "--out", p("model.json")},
      {"predict", "--model", p("model.json"), "--query", p("query.csv"), "--out", p("pred.csv")},
      {"uq", "run", "--bench", "pedagogical", "--seed", "3", "--out-dir", p("uq_ped")},
      {"uq", "run", "--bench", "buckling", "--seed", "3", "--mcs", "2000", "--out-dir", p("uq_buck")},
      {"twin", "simulate", "--quantity", "mass", "--domain", "time", "--hf-points", "12", "--lf-points", "101",
       "--noise", "0.005", "--seed", "11", "--out-dir", p("sim")},
      {"twin", "track", "--measurements", p("sim/measurements.csv"), "--quantity", "mass", "--out-dir", p("track")},
      {"plot-data", "--report", p("track/report.json"), "--out", p("curves.csv")},
  };
  for (const auto& c : commands)
    if (cli(c) != 0) return false;
  return true;
}

Outcome cli_determinism(const fs::path& work) {
  const fs::path a = work / "run_a", b = work / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
  if (!run_all_commands(a) || !run_all_commands(b)) return {false, "a command exited non-zero"};
  int compared = 0, differing = 0;
  std::string first_diff;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    // Manifests echo the output paths, which differ between the two runs.
    if (rel.filename().string().find("manifest") != std::string::npos) continue;
    ++compared;
    if (!fs::exists(b / rel) || io::read_file(entry.path()) != io::read_file(b / rel)) {
      ++differing;
      if (first_diff.empty()) first_diff = rel.string();
    }
  }
  return {compared > 0 && differing == 0,
          std::to_string(compared) + " artifacts compared, " + std::to_string(differing) + " differ" +
              (first_diff.empty() ? "" : " (first: " + first_diff + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "hpcfe_acceptance";
  fs::create_directories(work);

  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 pedagogical multi-fidelity dominance", 60, pedagogical_dominance},
      {"2 monotone error decay", 300, error_decay},
      {"3 buckling propagation KS", 300, buckling_uq},
      {"4 interpolation and variance", 0, interpolation_and_variance},
      {"5 coefficient solve", 0, coefficient_solve},
      {"6 identification round trips", 0, identification},
      {"7 twin tracking", 600, twin_tracking},
      {"8 CLI determinism", 0, [&] { return cli_determinism(work); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += " (over the " + fmt("%.0f", c.budget_s) + " s budget)";
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
