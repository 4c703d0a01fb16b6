#include "hpcfe/twin.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>

#include "hpcfe/error.hpp"
#include "hpcfe/design.hpp"
#include "hpcfe/rng.hpp"

namespace hpcfe::twin {

namespace {

constexpr double kPi = std::numbers::pi;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

std::string to_string(Quantity q) { return q == Quantity::Mass ? "mass" : "stiffness"; }
std::string to_string(Fidelity f) { return f == Fidelity::Low ? "low" : "high"; }
std::string to_string(Domain d) { return d == Domain::Time ? "time" : "frequency"; }
std::string to_string(MassLowVariant v) { return v == MassLowVariant::Scaled ? "scaled" : "sawtooth"; }

Quantity quantity_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "mass") return Quantity::Mass;
  if (v == "stiffness") return Quantity::Stiffness;
  throw ValidationError("unknown tracked quantity '" + s + "' (expected mass or stiffness)");
}

Fidelity fidelity_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "low" || v == "lf") return Fidelity::Low;
  if (v == "high" || v == "hf") return Fidelity::High;
  throw ValidationError("unknown fidelity '" + s + "' (expected low or high)");
}

Domain domain_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "time") return Domain::Time;
  if (v == "frequency" || v == "freq") return Domain::Frequency;
  throw ValidationError("unknown domain '" + s + "' (expected time or frequency)");
}

MassLowVariant mass_low_variant_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "scaled") return MassLowVariant::Scaled;
  if (v == "sawtooth") return MassLowVariant::Sawtooth;
  throw ValidationError("unknown low-fidelity mass variant '" + s + "' (expected scaled or sawtooth)");
}

NominalModel NominalModel::from_damping_ratio(double m0, double k0, double zeta0) {
  NominalModel n{m0, 2.0 * zeta0 * std::sqrt(k0 * m0), k0};
  n.validate();
  return n;
}

void NominalModel::validate() const {
  if (!(m0 > 0.0) || !(k0 > 0.0)) throw ValidationError("nominal model: m0 and k0 must be positive");
  if (!(c0 >= 0.0)) throw ValidationError("nominal model: c0 must be non-negative");
  if (!(zeta0() < 1.0)) throw ValidationError("nominal model: system must be underdamped (zeta0 < 1)");
}

double NominalModel::omega0() const { return std::sqrt(k0 / m0); }
double NominalModel::zeta0() const { return c0 / (2.0 * std::sqrt(k0 * m0)); }
double NominalModel::period() const { return 2.0 * kPi / omega0(); }
double NominalModel::omega_d0() const { return omega0() * std::sqrt(1.0 - zeta0() * zeta0()); }

double sawtooth(double x) {
  const double u = x / (2.0 * kPi);
  return 2.0 * (u - std::floor(u + 0.5));
}

double degradation_truth(const DegradationSchedule& s, double t, Quantity which, Fidelity fidelity) {
  if (!(t >= 0.0)) throw ValidationError("degradation: slow time must be non-negative");
  if (which == Quantity::Stiffness) {
    const double dk = std::exp(-s.alpha_k * t) * (1.0 + s.eps_k * std::cos(s.beta_k * t)) / (1.0 + s.eps_k) - 1.0;
    if (fidelity == Fidelity::High) return dk;
    return 0.75 * dk + 0.01 * std::sin(1000.0 + (kPi / 10.0) * t * dk);
  }
  const double sin2 = std::sin(2.0 * s.beta_m * t);
  const double dm = s.eps_m * sawtooth(s.beta_m * (t - kPi / s.beta_m)) * sin2 * sin2;
  if (fidelity == Fidelity::High) return dm;
  if (s.mass_low == MassLowVariant::Scaled) return 0.75 * dm + 0.01 * std::cos(t * kPi / 10.0) + 0.025;
  return 0.25 * sawtooth(0.15 * (t - 20.0 * kPi / 3.0));
}

FrozenDynamics frozen_dynamics(const NominalModel& nominal, double delta_m, double delta_k) {
  nominal.validate();
  const double m = nominal.m0 * (1.0 + delta_m);
  const double k = nominal.k0 * (1.0 + delta_k);
  if (!(m > 0.0) || !(k > 0.0)) throw ValidationError("degraded system has non-positive mass or stiffness");
  const double omega = std::sqrt(k / m);
  const double zeta = nominal.c0 / (2.0 * std::sqrt(k * m));
  if (!(zeta < 1.0)) throw ValidationError("degraded system is not underdamped (zeta >= 1)");
  return {omega, zeta, omega * std::sqrt(1.0 - zeta * zeta)};
}

Eigen::VectorXd free_response(const NominalModel& nominal, double delta_m, double delta_k, double u0, double v0,
                              const Eigen::VectorXd& t_grid) {
  const FrozenDynamics f = frozen_dynamics(nominal, delta_m, delta_k);
  for (Eigen::Index i = 1; i < t_grid.size(); ++i)
    if (t_grid[i] < t_grid[i - 1]) throw ValidationError("free response: time grid must be sorted");
  const double b = (v0 + f.zeta * f.omega * u0) / f.omega_d;
  Eigen::VectorXd u(t_grid.size());
  for (Eigen::Index i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    u[i] = std::exp(-f.zeta * f.omega * t) * (u0 * std::cos(f.omega_d * t) + b * std::sin(f.omega_d * t));
  }
  return u;
}

std::vector<Peak> extract_peaks(const Eigen::VectorXd& t, const Eigen::VectorXd& u) {
  if (t.size() != u.size()) throw ValidationError("peak extraction: length mismatch");
  std::vector<Peak> peaks;
  for (Eigen::Index i = 1; i + 1 < u.size(); ++i) {
    if (!(u[i] > u[i - 1] && u[i] >= u[i + 1])) continue;
    const double h1 = t[i] - t[i - 1];
    const double h2 = t[i + 1] - t[i];
    const double a = (h1 * (u[i + 1] - u[i]) + h2 * (u[i - 1] - u[i])) / (h1 * h2 * (h1 + h2));
    const double b = ((u[i + 1] - u[i]) - a * h2 * h2) / h2;
    if (a < 0.0) {
      peaks.push_back({t[i] - b / (2.0 * a), u[i] - b * b / (4.0 * a)});
    } else {
      peaks.push_back({t[i], u[i]});
    }
  }
  return peaks;
}

double log_decrement(const PeakPair& p) {
  if (p.n < 1) throw ValidationError("log decrement: n must be >= 1");
  if (!(p.u_t > 0.0) || !(p.u_tn > 0.0)) throw ValidationError("log decrement: non-positive peak ratio");
  return std::log(p.u_t / p.u_tn) / static_cast<double>(p.n);
}

PeakPair measure_peak_pair(const NominalModel& nominal, double delta_m, double delta_k, int n,
                           int points_per_period) {
  if (n < 1) throw ValidationError("peak pair: n must be >= 1");
  if (points_per_period < 8) throw ValidationError("peak pair: need at least 8 points per period");
  const FrozenDynamics f = frozen_dynamics(nominal, delta_m, delta_k);
  const double td = 2.0 * kPi / f.omega_d;
  const double periods = n + 1.5;
  const auto count = static_cast<Eigen::Index>(std::ceil(periods * points_per_period)) + 1;
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(count, 0.0, periods * td);
  const std::vector<Peak> peaks = extract_peaks(t, free_response(nominal, delta_m, delta_k, 1.0, 0.0, t));
  if (peaks.size() < static_cast<std::size_t>(n) + 1) throw NumericalError("peak pair: not enough response peaks");
  return {peaks[0].value, peaks[static_cast<std::size_t>(n)].value, n};
}

double estimate_delta_time_domain(const PeakPair& nominal, const PeakPair& degraded, double zeta0, Quantity which,
                                  TimeMode mode) {
  if (!(zeta0 >= 0.0 && zeta0 < 1.0)) throw ValidationError("time-domain estimate: zeta0 must lie in [0, 1)");
  const double d0 = log_decrement(nominal);
  const double dm = log_decrement(degraded);
  if (!(dm > 0.0) || !(d0 > 0.0)) throw ValidationError("time-domain estimate: zero decrement");
  const double ratio2 = (d0 / dm) * (d0 / dm);
  if (mode == TimeMode::Approximate) return ratio2 - 1.0;
  if (which == Quantity::Mass) return (1.0 - zeta0 * zeta0) * (ratio2 - 1.0);
  // Both damping ratios come from measured decrements so that peak-extraction
  // bias cancels and an unchanged system maps to exactly zero.
  const double four_pi2 = 4.0 * kPi * kPi;
  const double z0_sq = d0 * d0 / (four_pi2 + d0 * d0);
  const double zm_sq = dm * dm / (four_pi2 + dm * dm);
  return z0_sq / zm_sq - 1.0;
}

double frf_amplitude(double omega, double delta, double zeta0, Quantity which) {
  const std::complex<double> denom = which == Quantity::Mass
                                         ? std::complex<double>(1.0 - omega * omega * (1.0 + delta), 2.0 * zeta0 * omega)
                                         : std::complex<double>(1.0 + delta - omega * omega, 2.0 * zeta0 * omega);
  return 1.0 / std::abs(denom);
}

FrfPeak frf_peak(double delta, double zeta0, Quantity which) {
  if (!(zeta0 > 0.0 && zeta0 < 1.0)) throw ValidationError("frf peak: zeta0 must lie in (0, 1)");
  const double x = 1.0 + delta;
  if (!(x - 2.0 * zeta0 * zeta0 > 0.0)) throw ValidationError("frf peak: no resonance peak (zeta^2 >= 1/2)");
  const double root = std::sqrt(x - 2.0 * zeta0 * zeta0);
  const double h = 1.0 / (2.0 * zeta0 * std::sqrt(x - zeta0 * zeta0));
  if (which == Quantity::Mass) return {root / x, x * h};
  return {root, h};
}

double estimate_delta_freq_domain(const FrfPeak& nominal, const FrfPeak& degraded, double zeta0, Quantity which,
                                  FreqMode mode) {
  if (!(zeta0 >= 0.0 && zeta0 < 1.0)) throw ValidationError("frequency-domain estimate: zeta0 must lie in [0, 1)");
  if (which == Quantity::Stiffness) {
    if (!(degraded.omega_max > 0.0)) throw ValidationError("frequency-domain estimate: peak frequency must be positive");
    return degraded.omega_max * degraded.omega_max + 2.0 * zeta0 * zeta0 - 1.0;
  }
  if (!(nominal.h_max > 0.0) || !(degraded.h_max > 0.0))
    throw ValidationError("frequency-domain estimate: peak amplitudes must be positive");
  const double r = degraded.h_max / nominal.h_max;
  if (mode == FreqMode::HighQ) return r * r - 1.0;
  const double z2 = zeta0 * zeta0;
  const double disc = r * r - 4.0 * z2 + 4.0 * z2 * z2;
  if (disc < 0.0) throw ValidationError("frequency-domain estimate: negative discriminant");
  return r * (r + std::sqrt(disc)) / (2.0 * (1.0 - z2)) - 1.0;
}

void MeasurementSeries::validate() const {
  if (records.empty()) throw ValidationError("measurement series is empty");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Measurement& m = records[i];
    if (!std::isfinite(m.t_s) || m.t_s < 0.0) throw ValidationError("measurement series: invalid slow time");
    if (i > 0 && !(m.t_s > records[i - 1].t_s))
      throw ValidationError("measurement series: slow times must be strictly increasing");
    if (domain == Domain::Time && m.n < 1) throw ValidationError("measurement series: peak records need n >= 1");
    if (domain == Domain::Frequency && m.n != 0) throw ValidationError("measurement series: FRF records need n = 0");
  }
}

MeasurementSeries synthesize_measurements(const NominalModel& nominal, const DegradationSchedule& schedule,
                                          const std::vector<double>& slow_times, Fidelity fidelity, Domain domain,
                                          const SynthesisOptions& options) {
  nominal.validate();
  if (!(options.noise_sigma >= 0.0)) throw ValidationError("synthesis: noise sigma must be non-negative");
  if (slow_times.empty()) throw ValidationError("synthesis: no slow times");
  MeasurementSeries series;
  series.fidelity = fidelity;
  series.domain = domain;
  series.noise_sigma = options.noise_sigma;
  series.seed = options.seed;
  const CounterRng rng(options.seed, fidelity == Fidelity::Low ? 0 : 1);
  const double zeta0 = nominal.zeta0();
  for (std::size_t i = 0; i < slow_times.size(); ++i) {
    const double t = slow_times[i];
    const double delta = degradation_truth(schedule, t, options.quantity, fidelity);
    const double dm = options.quantity == Quantity::Mass ? delta : 0.0;
    const double dk = options.quantity == Quantity::Stiffness ? delta : 0.0;
    Measurement m;
    m.t_s = t;
    if (domain == Domain::Time) {
      const PeakPair p = measure_peak_pair(nominal, dm, dk, options.periods_apart, options.points_per_period);
      m.payload_a = p.u_t;
      m.payload_b = p.u_tn;
      m.n = p.n;
    } else {
      const FrfPeak p = frf_peak(delta, zeta0, options.quantity);
      m.payload_a = p.h_max;
      m.payload_b = p.omega_max;
      m.n = 0;
    }
    if (options.noise_sigma > 0.0) {
      m.payload_a *= 1.0 + options.noise_sigma * rng.normal(2 * i);
      if (domain == Domain::Time) m.payload_b *= 1.0 + options.noise_sigma * rng.normal(2 * i + 1);
    }
    series.records.push_back(m);
  }
  series.validate();
  return series;
}

namespace {

struct Estimates {
  std::vector<double> times;
  std::vector<double> values;
};

Estimates invert_series(const NominalModel& nominal, const MeasurementSeries& series, const TrackConfig& config,
                        std::vector<DroppedSample>& dropped) {
  const double zeta0 = nominal.zeta0();
  std::map<int, PeakPair> references;
  const FrfPeak frf_reference = frf_peak(0.0, zeta0, config.quantity);
  Estimates out;
  for (const Measurement& m : series.records) {
    try {
      double delta = 0.0;
      if (series.domain == Domain::Time) {
        auto it = references.find(m.n);
        if (it == references.end())
          it = references.emplace(m.n, measure_peak_pair(nominal, 0.0, 0.0, m.n, config.points_per_period)).first;
        delta = estimate_delta_time_domain(it->second, PeakPair{m.payload_a, m.payload_b, m.n}, zeta0,
                                           config.quantity, config.time_mode);
      } else {
        delta = estimate_delta_freq_domain(frf_reference, FrfPeak{m.payload_b, m.payload_a}, zeta0, config.quantity,
                                           config.freq_mode);
      }
      if (!std::isfinite(delta)) throw NumericalError("non-finite estimate");
      out.times.push_back(m.t_s);
      out.values.push_back(delta);
    } catch (const std::exception& e) {
      dropped.push_back({series.fidelity, m.t_s, e.what()});
    }
  }
  return out;
}

Eigen::MatrixXd column(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TwinState track(const NominalModel& nominal, const MeasurementSeries& lf, const MeasurementSeries& hf,
                const TrackConfig& config) {
  nominal.validate();
  lf.validate();
  hf.validate();
  if (lf.domain != hf.domain) throw ValidationError("track: low- and high-fidelity series use different domains");
  if (config.query_points < 2) throw ValidationError("track: need at least 2 query points");

  TwinState state;
  state.nominal = nominal;
  state.quantity = config.quantity;
  state.domain = hf.domain;

  const Estimates lo = invert_series(nominal, lf, config, state.dropped);
  const Estimates hi = invert_series(nominal, hf, config, state.dropped);
  state.lf_times = lo.times;
  state.lf_estimates = lo.values;
  state.hf_times = hi.times;
  state.hf_estimates = hi.values;
  if (lo.times.empty() || hi.times.empty()) throw NumericalError("track: every sample of a series was dropped");

  const double t_min = std::min(lo.times.front(), hi.times.front());
  const double t_max = std::max(lo.times.back(), hi.times.back());
  if (!(t_max > t_min)) throw ValidationError("track: slow times span an empty interval");

  FidelityDataset data;
  data.bounds = InputBounds{Eigen::VectorXd::Constant(1, t_min), Eigen::VectorXd::Constant(1, t_max)};
  data.levels.push_back({1, "low", column(lo.times), Eigen::Map<const Eigen::VectorXd>(lo.values.data(), static_cast<Eigen::Index>(lo.values.size()))});
  data.levels.push_back({2, "high", column(hi.times), Eigen::Map<const Eigen::VectorXd>(hi.values.data(), static_cast<Eigen::Index>(hi.values.size()))});

  CascadeTrainResult trained = train_cascade(config.cascade, data);
  state.query_times = Eigen::VectorXd::LinSpaced(config.query_points, t_min, t_max);
  const CascadePrediction pred = trained.model.predict(state.query_times);
  state.tracked_mean = pred.top().mean;
  state.tracked_variance = pred.top().variance;

  state.latest_t_s = t_max;
  state.latest_delta = trained.model.predict(Eigen::MatrixXd::Constant(1, 1, t_max)).top().mean[0];
  state.updated_mass = nominal.m0 * (config.quantity == Quantity::Mass ? 1.0 + state.latest_delta : 1.0);
  state.updated_stiffness = nominal.k0 * (config.quantity == Quantity::Stiffness ? 1.0 + state.latest_delta : 1.0);
  if (!(state.updated_mass > 0.0) || !(state.updated_stiffness > 0.0))
    throw NumericalError("track: updated model has non-positive mass or stiffness");
  state.model.emplace(std::move(trained.model));

  for (Eigen::Index i = 0; i < state.query_times.size(); ++i) {
    const double v = state.tracked_mean[i];
    if (std::abs(v) <= config.alert_limit) continue;
    const double t = state.query_times[i];
    const bool extends = !state.alerts.empty() && i > 0 && state.alerts.back().t_end == state.query_times[i - 1];
    if (extends) {
      Alert& a = state.alerts.back();
      a.t_end = t;
      if (std::abs(v) > std::abs(a.peak_delta)) a.peak_delta = v;
    } else {
      state.alerts.push_back({t, t, v});
    }
  }
  return state;
}

Eigen::VectorXd track_single_fidelity(const TwinState& state, const HpcfeConfig& config) {
  if (!state.model) throw ValidationError("single-fidelity track: state has no fitted model");
  const HpcfeModel m = train(config, state.model->bounds(), column(state.hf_times),
                             Eigen::Map<const Eigen::VectorXd>(state.hf_estimates.data(),
                                                               static_cast<Eigen::Index>(state.hf_estimates.size())));
  return m.predict(state.query_times).mean;
}

}  // namespace hpcfe::twin

namespace hpcfe::twin {

void ScenarioConfig::validate() const {
  nominal.validate();
  if (!(t_max > 0.0)) throw ValidationError("scenario: t_max must be positive");
  if (lf_points < 2 || hf_points < 2) throw ValidationError("scenario: need at least 2 points per fidelity");
  if (hf_points > lf_points) throw ValidationError("scenario: HF points must not exceed LF points (nested design)");
}

ScenarioConfig default_scenario(Quantity quantity, Domain domain, Eigen::Index hf_points) {
  ScenarioConfig c;
  c.quantity = quantity;
  c.domain = domain;
  c.hf_points = hf_points;
  c.synthesis.quantity = quantity;
  c.track.quantity = quantity;
  HpcfeConfig lf;
  HpcfeConfig hf;
  hf.basis.degree = 1;
  c.track.cascade.configs = {lf, hf};
  c.single_fidelity = lf;
  return c;
}

SimulatedMeasurements simulate(const ScenarioConfig& config) {
  config.validate();
  const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(config.lf_points, 0.0, config.t_max);
  const InputBounds box{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, config.t_max)};
  std::vector<Eigen::Index> idx = maximin_subset(grid, box, config.hf_points);
  std::vector<double> lf_times(grid.data(), grid.data() + grid.size());
  std::vector<double> hf_times;
  for (Eigen::Index i : idx) hf_times.push_back(grid[i]);
  SynthesisOptions opts = config.synthesis;
  opts.quantity = config.quantity;
  return {synthesize_measurements(config.nominal, config.schedule, lf_times, Fidelity::Low, config.domain, opts),
          synthesize_measurements(config.nominal, config.schedule, hf_times, Fidelity::High, config.domain, opts)};
}

TruthComparison compare_with_truth(const TwinState& state, const DegradationSchedule& schedule,
                                   const HpcfeConfig& single_fidelity) {
  TruthComparison c;
  const Eigen::Index n = state.query_times.size();
  c.truth.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    c.truth[i] = degradation_truth(schedule, state.query_times[i], state.quantity, Fidelity::High);
  c.single_fidelity = track_single_fidelity(state, single_fidelity);
  c.mf_rmse = std::sqrt((state.tracked_mean - c.truth).squaredNorm() / static_cast<double>(n));
  c.sf_rmse = std::sqrt((c.single_fidelity - c.truth).squaredNorm() / static_cast<double>(n));
  return c;
}

}  // namespace hpcfe::twin
