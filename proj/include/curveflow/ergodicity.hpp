#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curveflow/integrator.hpp"
#include "curveflow/noise.hpp"
#include "curveflow/spectral_space.hpp"

namespace curveflow {

/// A constant with where its value comes from: "stated" when quoted from
/// the analysis, "computed" when evaluated here.
struct Constant {
  double value = std::numeric_limits<double>::quiet_NaN();
  std::string source;
  std::string note;
};

struct TheoreticalConstants {
  Constant lambda_sq;  // sum_i Lip(phi_i)^2, 0 for additive noise
  Constant c1;         // weak monotonicity constant
  Constant c2;         // Lyapunov constant
  Constant c3;         // stated dual-norm bound sqrt(pi/2)
  Constant c3_tight;   // sup ||arctan(u')||_{L^2} = pi/2
  Constant alpha;      // max xi (1 - arctan xi)
  Constant alpha_argmax;
  Constant c;          // W^{1,1} coercivity constant
  Constant trace_H;    // ||Q||^2_{HS(U,H)}, full series
  Constant D;          // alpha + trace_H
  Constant beta;       // noise exponent (additive only)
  Constant M;          // gradient sup of the reference initial condition
  Constant k_min;      // arctan(M) / M
};

nlohmann::json to_json(const TheoreticalConstants& k);

/// alpha = max_{xi >= 0} xi (1 - arctan xi), bracketed Brent maximization.
/// The maximizer is written to `argmax` if given.
double recurrence_constant(double* argmax = nullptr);

/// Constant ledger for a noise model. `reference` supplies M and k_min;
/// c2 is measured on probe fields unless given.
TheoreticalConstants derive_constants(const NoiseModel& noise, const SpectralBasis& basis,
                                      const SpectralField* reference = nullptr,
                                      std::optional<double> c2 = std::nullopt);

/// Largest (2 <Au,u>_V + ||sigma(u)||^2_{HS(U,V)}) / (1 + ||u||_V^2) over
/// u = 0 and `samples` random probe fields.
double measure_lyapunov_constant(const NoiseModel& noise, const SpectralBasis& basis,
                                 std::size_t samples = 200, std::uint64_t seed = 7);

/// Bounded functional with its Lipschitz constant in H. Library
/// constructors certify `lip`; user observables declare it unchecked.
struct Observable {
  std::string id;
  std::function<double(const SpectralField&)> eval;
  double lip = 0.0;
  bool certified = true;
};

/// u -> min(1, |<u, e_k>|), Lip 1.
Observable clipped_coordinate(std::size_t k);
/// u -> min(1, ||u||_H), Lip 1.
Observable clipped_norm();
/// 1 inside B_r, 0 outside B_{r+w}, linear in ||u||_H between; Lip 1/w.
Observable smoothed_ball(double radius, double width);
Observable constant_observable(double value);
Observable user_observable(std::string id, std::function<double(const SpectralField&)> f,
                           double declared_lip);

struct OccupationEstimate {
  double T = 0.0;
  std::string initial_id;
  std::string observable_id;
  double radius = 0.0;
  double estimate = 0.0;
  double half_width = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t ensemble = 0;
  std::size_t samples_per_member = 0;
};

nlohmann::json to_json(const OccupationEstimate& e);

/// One row of a plot-ready companion table.
struct CsvRow {
  double T = 0.0;
  double estimate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double bound = 0.0;
};

/// "T,estimate,ci_lo,ci_hi,bound" with a header line.
std::string to_csv(std::span<const CsvRow> rows);

/// Per-member samples along a common time grid.
struct EnsembleSeries {
  std::vector<double> times;
  std::vector<std::vector<double>> members;  // members[m][r]
};

/// Runs the ensemble from x and records f(u) at every recorded time.
EnsembleSeries collect_series(const GalerkinIntegrator& integrator, const SpectralField& x,
                              std::size_t ensemble,
                              const std::function<double(const SpectralField&)>& f,
                              int workers = 0);

struct CertificateRow {
  double t = 0.0;
  double estimate = 0.0;
  double half_width = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - estimate
};

struct LyapunovCertificate {
  std::vector<CertificateRow> rows;
  double x_norm_sq = 0.0;
  double D = 0.0;
  double c = 0.5;
  std::size_t ensemble = 0;
  bool pass = false;            // margin + half_width >= 0 at every t >= 1
  bool pass_confident = false;  // margin - half_width >= 0 at every t >= 1
};

nlohmann::json to_json(const LyapunovCertificate& r);
std::vector<CsvRow> csv_rows(const LyapunovCertificate& r);

/// Checks E[(1/t) int_0^t ||u||_{W^{1,1}} ds] <= (||x||^2 + D t) / (c t)
/// for recorded t >= 1. `w11` holds W^{1,1} norms; the time integral is
/// trapezoidal over the recorded grid.
LyapunovCertificate lyapunov_certificate(const EnsembleSeries& w11, double x_norm_sq, double D,
                                         double c);

struct VBoundRow {
  double t = 0.0;
  double mean = 0.0;
  double half_width = 0.0;
  double bound_at_t = 0.0;
};

struct VBoundReport {
  std::vector<VBoundRow> rows;
  double c2 = 0.0;
  double x_norm_V_sq = 0.0;
  double bound = 0.0;  // (c2 T + ||x||_V^2) e^{c2 T}
  double sup_upper = 0.0;  // max_t mean + half_width
  std::size_t ensemble = 0;
  bool pass = false;
};

nlohmann::json to_json(const VBoundReport& r);
std::vector<CsvRow> csv_rows(const VBoundReport& r);

VBoundReport galerkin_v_bound(const GalerkinIntegrator& integrator, const SpectralField& x,
                              double c2, std::size_t ensemble, int workers = 0);

/// Record stride giving at least `samples` snapshots up to `horizon`.
std::size_t record_stride(double horizon, double dt, std::size_t samples = 1000);

/// Fraction of recorded times t in (0, T] with ||u(t)||_H < delta, for each
/// T in `horizons` (all from one run to the largest T).
std::vector<OccupationEstimate> ball_occupation(const SpectralField& x, double delta,
                                                std::span<const double> horizons,
                                                const NoiseModel& noise, SolverConfig cfg,
                                                std::size_t ensemble, int workers = 0,
                                                const std::string& initial_id = "x");

struct GapEstimate {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double hw_x = 0.0;
  double hw_y = 0.0;
  double gap = 0.0;
  double pathwise_max = 0.0;  // max_m |phi(u^x_T) - phi(u^y_T)|
};

struct EPropertyReport {
  std::string observable_id;
  bool observable_certified = true;
  double lip = 0.0;
  double distance = 0.0;
  double slack_factor = 1.0;
  double bound = 0.0;  // lip * distance * slack_factor
  double T = 0.0;
  std::size_t ensemble = 0;
  GapEstimate common;
  GapEstimate independent;
  bool pathwise_checked = false;  // additive or no noise
  double pathwise_slack = 0.0;    // 10 dt^2 per step
  bool pass = false;
};

nlohmann::json to_json(const EPropertyReport& r);

/// |E phi(u^x_T) - E phi(u^y_T)| <= Lip ||x - y|| slack + half-widths, under
/// common and independent noise. The slack is 1 for additive noise and
/// e^{Lambda^2 T / 2} for multiplicative noise.
EPropertyReport e_property_gap(const SpectralField& x, const SpectralField& y,
                               const Observable& phi, const NoiseModel& noise,
                               const SolverConfig& cfg, std::size_t ensemble, int workers = 0);

struct AgreementRow {
  double T = 0.0;
  double qx = 0.0;
  double hw_x = 0.0;
  double qy = 0.0;
  double hw_y = 0.0;
  double delta = 0.0;
};

struct AgreementReport {
  std::string observable_id;
  std::vector<AgreementRow> rows;
  std::size_t ensemble = 0;
  bool common_noise = true;
  bool pass_monotone = false;
  bool pass_final = false;
  bool pass = false;
};

nlohmann::json to_json(const AgreementReport& r);
std::vector<CsvRow> csv_rows(const AgreementReport& r);

/// Delta(T) = |Q^T phi(x) - Q^T phi(y)| from right-endpoint time averages.
/// Passes when Delta(T_{i+1}) - Delta(T_i) <= 2 (hw_x + hw_y)(T_{i+1}) and
/// Delta(T_max) <= 3 (hw_x + hw_y)(T_max).
AgreementReport ergodic_agreement(const SpectralField& x, const SpectralField& y,
                                  const Observable& phi, std::span<const double> horizons,
                                  const NoiseModel& noise, SolverConfig cfg,
                                  std::size_t ensemble, int workers = 0,
                                  bool common_noise = true);

struct DominanceMember {
  double sup_z = 0.0;   // sup_t ||u(t) - v(t)||_H
  double sup_qw = 0.0;  // sup_t ||Q W_t||_V
  double bound = 0.0;
};

struct DominanceReport {
  double c_hat = 0.0;
  double T = 0.0;
  double slack = 0.0;
  std::vector<DominanceMember> members;
  double delta_ref = 0.0;  // sqrt(mean sup_qw^2)
  std::vector<std::pair<double, double>> small_ball;  // (delta, fraction)
  bool small_ball_positive = false;  // fraction at 3 delta_ref > 0
  std::size_t violations = 0;
  bool pass = false;  // every member within bound + slack
};

nlohmann::json to_json(const DominanceReport& r);

/// Tracks z = u - v between the noisy and noise-free runs from x against
/// (c_hat T + 1/2) sup_t ||Q W_t||_V, with c_hat = 2 sqrt(pi/2).
DominanceReport noise_dominance_check(const SpectralField& x, const AdditiveNoise& noise,
                                      SolverConfig cfg, std::size_t ensemble, int workers = 0);

struct DecayCertificate {
  double gradient_sup = 0.0;
  double k_min = 0.0;
  double slope = 0.0;  // least-squares slope of log ||v(t)||^2
  double worst_ratio = 0.0;  // max_t ||v(t)||^2 / (e^{-2 k_min t} ||v0||^2)
  double tolerance = 1e-3;
  bool trivial = false;  // v0 = 0
  bool pass = false;
};

nlohmann::json to_json(const DecayCertificate& c);

DecayCertificate decay_certificate(const DecayRecord& rec, double tolerance = 1e-3);

}  // namespace curveflow
