#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hpcfe/cascade.hpp"

namespace hpcfe::twin {

enum class Quantity { Mass, Stiffness };
enum class Fidelity { Low, High };
enum class Domain { Time, Frequency };

std::string to_string(Quantity q);
std::string to_string(Fidelity f);
std::string to_string(Domain d);
Quantity quantity_from_string(const std::string& s);
Fidelity fidelity_from_string(const std::string& s);
Domain domain_from_string(const std::string& s);

struct NominalModel {
  double m0 = 1.0;
  double c0 = 0.08;  // zeta0 = 0.02 with m0 = 1, k0 = 4
  double k0 = 4.0;

  static NominalModel from_damping_ratio(double m0, double k0, double zeta0);

  void validate() const;
  double omega0() const;
  double zeta0() const;
  double period() const;  // T0 = 2 pi / omega0
  double omega_d0() const;
};

// Which low-fidelity mass curve to use.
//   Scaled:   0.75 dm + 0.01 cos(pi t / 10) + 0.025
//   Sawtooth: 0.25 SawTooth(0.15 (t - 20 pi / 3))
enum class MassLowVariant { Scaled, Sawtooth };

std::string to_string(MassLowVariant v);
MassLowVariant mass_low_variant_from_string(const std::string& s);

struct DegradationSchedule {
  double alpha_k = 4e-4;
  double eps_k = 0.05;
  double beta_k = 0.2;
  double beta_m = 0.15;
  double eps_m = 0.35;
  MassLowVariant mass_low = MassLowVariant::Scaled;
};

// Period 2 pi, rising linearly from -1 to 1.
double sawtooth(double x);

// Slow time is in units of the nominal period T0.
//   high stiffness: exp(-alpha_k t) (1 + eps_k cos(beta_k t)) / (1 + eps_k) - 1
//   high mass:      eps_m SawTooth(beta_m (t - pi / beta_m)) sin^2(2 beta_m t)
//   low stiffness:  0.75 dk + 0.01 sin(1000 + (pi / 10) t dk)
double degradation_truth(const DegradationSchedule& schedule, double t_s, Quantity which, Fidelity fidelity);

struct FrozenDynamics {
  double omega;
  double zeta;
  double omega_d;
};

// Natural frequency and damping with m = m0 (1 + dm), k = k0 (1 + dk), c = c0.
FrozenDynamics frozen_dynamics(const NominalModel& nominal, double delta_m, double delta_k);

// Underdamped free vibration from (u0, v0), evaluated at t_grid (vibration
// time, same units as 1 / omega0).
Eigen::VectorXd free_response(const NominalModel& nominal, double delta_m, double delta_k, double u0, double v0,
                              const Eigen::VectorXd& t_grid);

struct Peak {
  double time;
  double value;
};

// Interior local maxima refined by a 3-point parabola.
std::vector<Peak> extract_peaks(const Eigen::VectorXd& t, const Eigen::VectorXd& u);

struct PeakPair {
  double u_t;   // peak amplitude at t
  double u_tn;  // peak amplitude n periods later
  int n = 1;
};

double log_decrement(const PeakPair& p);

// Peaks 1 and 1 + n of the response to u0 = 1, v0 = 0, sampled at
// `points_per_period` points per damped period.
PeakPair measure_peak_pair(const NominalModel& nominal, double delta_m, double delta_k, int n = 1,
                           int points_per_period = 1000);

enum class TimeMode { Exact, Approximate };

// Mass:      dm = (1 - z0^2) ((d0 / dm)^2 - 1), approximate mode drops z0^2.
// Stiffness: zm^2 = dm^2 / (4 pi^2 + dm^2), dk = z0^2 / zm^2 - 1.
double estimate_delta_time_domain(const PeakPair& nominal, const PeakPair& degraded, double zeta0, Quantity which,
                                  TimeMode mode = TimeMode::Exact);

struct FrfPeak {
  double omega_max;  // normalized by omega0
  double h_max;      // normalized by the nominal static response F / k0
};

// |U| / U_st at normalized frequency omega.
double frf_amplitude(double omega, double delta, double zeta0, Quantity which);

FrfPeak frf_peak(double delta, double zeta0, Quantity which);

enum class FreqMode { Exact, HighQ };

// Mass: closed-form root of the squared peak-ratio equation, or R^2 - 1 in
// high-Q mode. Stiffness: dk = Omega_max^2 + 2 z0^2 - 1 from the degraded peak
// frequency (mode ignored).
double estimate_delta_freq_domain(const FrfPeak& nominal, const FrfPeak& degraded, double zeta0, Quantity which,
                                  FreqMode mode = FreqMode::Exact);

struct Measurement {
  double t_s = 0.0;
  double payload_a = 0.0;  // u(t) or H_max
  double payload_b = 0.0;  // u(t + nT) or Omega_max
  int n = 0;               // periods between peaks; 0 for FRF records
};

struct MeasurementSeries {
  Fidelity fidelity = Fidelity::High;
  Domain domain = Domain::Time;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::vector<Measurement> records;

  void validate() const;
};

struct SynthesisOptions {
  Quantity quantity = Quantity::Mass;
  double noise_sigma = 0.0;  // relative, on amplitudes
  std::uint64_t seed = 0;
  int periods_apart = 1;
  int points_per_period = 1000;
};

MeasurementSeries synthesize_measurements(const NominalModel& nominal, const DegradationSchedule& schedule,
                                          const std::vector<double>& slow_times, Fidelity fidelity, Domain domain,
                                          const SynthesisOptions& options);

struct TrackConfig {
  Quantity quantity = Quantity::Mass;
  TimeMode time_mode = TimeMode::Exact;
  FreqMode freq_mode = FreqMode::Exact;
  int points_per_period = 1000;  // for the nominal reference peaks
  CascadeOptions cascade;
  Eigen::Index query_points = 501;
  double alert_limit = 0.3;  // |delta| above this raises an alert
};

struct Alert {
  double t_start;
  double t_end;
  double peak_delta;
};

struct DroppedSample {
  Fidelity fidelity;
  double t_s;
  std::string reason;
};

struct TwinState {
  NominalModel nominal;
  Quantity quantity = Quantity::Mass;
  Domain domain = Domain::Time;
  std::vector<double> lf_times, lf_estimates, hf_times, hf_estimates;
  Eigen::VectorXd query_times;
  Eigen::VectorXd tracked_mean;
  Eigen::VectorXd tracked_variance;
  std::optional<DeepHpcfeModel> model;
  double latest_t_s = 0.0;
  double latest_delta = 0.0;
  double updated_mass = 0.0;
  double updated_stiffness = 0.0;
  std::vector<Alert> alerts;
  std::vector<DroppedSample> dropped;
};

TwinState track(const NominalModel& nominal, const MeasurementSeries& lf, const MeasurementSeries& hf,
                const TrackConfig& config);

// Single-fidelity reference: an H-PCFE fit to the HF estimates alone,
// evaluated at the state's query grid.
Eigen::VectorXd track_single_fidelity(const TwinState& state, const HpcfeConfig& config);

// End-to-end synthetic scenario: LF measurements on an even slow-time grid,
// HF measurements on a maximin subset of that grid.
struct ScenarioConfig {
  Quantity quantity = Quantity::Mass;
  Domain domain = Domain::Time;
  double t_max = 100.0;  // slow time in units of T0
  Eigen::Index lf_points = 501;
  Eigen::Index hf_points = 12;
  NominalModel nominal;
  DegradationSchedule schedule;
  SynthesisOptions synthesis;
  TrackConfig track;
  HpcfeConfig single_fidelity;

  void validate() const;
};

// Stage configs (s=5, M=2) then (s=1, M=2); single-fidelity (s=5, M=2).
ScenarioConfig default_scenario(Quantity quantity, Domain domain, Eigen::Index hf_points);

struct SimulatedMeasurements {
  MeasurementSeries lf;
  MeasurementSeries hf;
};

SimulatedMeasurements simulate(const ScenarioConfig& config);

struct TruthComparison {
  Eigen::VectorXd truth;            // high-fidelity schedule on the query grid
  Eigen::VectorXd single_fidelity;  // HF-only reconstruction
  double mf_rmse = 0.0;
  double sf_rmse = 0.0;
};

TruthComparison compare_with_truth(const TwinState& state, const DegradationSchedule& schedule,
                                   const HpcfeConfig& single_fidelity);

}  // namespace hpcfe::twin
