#include "curveflow/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "curveflow/drift.hpp"
#include "curveflow/ensemble.hpp"
#include "curveflow/sampling.hpp"
#include "curveflow/statistics.hpp"

namespace curveflow {

namespace {

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json to_json(const Constant& c) {
  return {{"value", number_or_null(c.value)}, {"source", c.source}, {"note", c.note}};
}

Constant stated(double v, std::string note) { return {v, "stated", std::move(note)}; }
Constant computed(double v, std::string note) { return {v, "computed", std::move(note)}; }

// Recorded times of an integrator run: 0, every record_every steps, last step.
std::vector<double> record_times(const SolverConfig& cfg) {
  std::vector<double> t{0.0};
  const std::size_t steps = cfg.steps();
  for (std::size_t done = 1; done <= steps; ++done) {
    if (done % cfg.record_every == 0 || done == steps) {
      t.push_back(static_cast<double>(done) * cfg.dt);
    }
  }
  return t;
}

double max_horizon(std::span<const double> horizons) {
  if (horizons.empty()) throw std::invalid_argument("horizon list is empty");
  double h = 0.0;
  for (double t : horizons) {
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("horizons must be > 0");
    h = std::max(h, t);
  }
  return h;
}

double min_horizon(std::span<const double> horizons) {
  return *std::min_element(horizons.begin(), horizons.end());
}

// Index of the last recorded time <= T (with a little rounding room).
std::size_t last_index_within(const std::vector<double>& times, double T) {
  const double limit = T * (1.0 + 1e-12) + 1e-12;
  std::size_t r = 0;
  while (r + 1 < times.size() && times[r + 1] <= limit) ++r;
  return r;
}

double slack_factor(const NoiseModel& noise, double T) {
  if (const auto* m = std::get_if<MultiplicativeNoise>(&noise)) {
    return std::exp(0.5 * m->lambda_sq() * T);
  }
  return 1.0;
}

NoiseStream member_stream(const SolverConfig& cfg, std::size_t m, bool independent) {
  return NoiseStream(cfg.seed, m, independent ? StreamTag::independent_noise : StreamTag::noise);
}

// Interval for a mean of [0,1]-valued member samples: the union of the
// normal and Wilson intervals, clipped to [0,1].
void occupation_interval(std::span<const double> samples, OccupationEstimate& e) {
  const auto s = summarize(samples);
  const auto w = wilson_interval(s.mean, s.count);
  e.estimate = s.mean;
  e.half_width = std::max(s.half_width, 0.5 * (w.hi - w.lo));
  e.ci_lo = std::max(0.0, std::min(s.mean - s.half_width, w.lo));
  e.ci_hi = std::min(1.0, std::max(s.mean + s.half_width, w.hi));
}

}  // namespace

nlohmann::json to_json(const TheoreticalConstants& k) {
  return {{"Lambda_sq", to_json(k.lambda_sq)}, {"c1", to_json(k.c1)},
          {"c2", to_json(k.c2)},               {"c3", to_json(k.c3)},
          {"c3_tight", to_json(k.c3_tight)},   {"alpha", to_json(k.alpha)},
          {"alpha_argmax", to_json(k.alpha_argmax)},
          {"c", to_json(k.c)},                 {"trace_H", to_json(k.trace_H)},
          {"D", to_json(k.D)},                 {"beta", to_json(k.beta)},
          {"M", to_json(k.M)},                 {"k_min", to_json(k.k_min)}};
}

double recurrence_constant(double* argmax) {
  const auto neg = [](double xi) { return -xi * (1.0 - std::atan(xi)); };
  // f(0) = 0 and f < 0 for xi > tan(1), so the maximizer lies in [0, tan 1].
  const auto [x, fx] = boost::math::tools::brent_find_minima(neg, 0.0, std::tan(1.0), 52);
  if (argmax) *argmax = x;
  return -fx;
}

double measure_lyapunov_constant(const NoiseModel& noise, const SpectralBasis& basis,
                                 std::size_t samples, std::uint64_t seed) {
  const std::size_t n = basis.dim();
  const auto ratio = [&](const SpectralField& u) {
    double hs = 0.0;
    if (const auto* a = std::get_if<AdditiveNoise>(&noise)) {
      for (std::size_t k = 1; k <= std::min(n, a->dim()); ++k) {
        hs += eigenvalue(k) * a->amplitude(k) * a->amplitude(k);
      }
    } else if (const auto* m = std::get_if<MultiplicativeNoise>(&noise)) {
      hs = hs_norm_V(u, *m, basis);
    }
    const double vv = norm_V(u);
    return (2.0 * lyapunov_pairing_V(u, basis) + hs) / (1.0 + vv * vv);
  };
  double best = ratio(SpectralField(n));
  for (std::size_t i = 0; i < samples; ++i) {
    const double amp = std::pow(10.0, static_cast<double>(i % 5) - 2.0);
    best = std::max(best, ratio(random_field(n, amp, seed, i)));
  }
  return best;
}

TheoreticalConstants derive_constants(const NoiseModel& noise, const SpectralBasis& basis,
                                      const SpectralField* reference, std::optional<double> c2) {
  TheoreticalConstants k;
  double xi = 0.0;
  const double alpha = recurrence_constant(&xi);
  k.alpha = computed(alpha, "max over xi >= 0 of xi (1 - arctan xi)");
  k.alpha_argmax = computed(xi, "maximizer of xi (1 - arctan xi)");
  k.c = stated(0.5, "||v||_{L^1} <= ||v'||_{L^1} under Dirichlet conditions");
  k.c3 = stated(std::sqrt(pi / 2.0), "stated dual-norm bound ||Au||_{V*} <= sqrt(pi/2)");
  k.c3_tight = computed(pi / 2.0, "||arctan(u')||_{L^2} <= pi/2 is the sharp dual-norm bound");
  k.c2 = c2 ? computed(*c2, "supplied Lyapunov constant")
            : computed(measure_lyapunov_constant(noise, basis),
                       "max of (2<Au,u>_V + ||sigma(u)||^2_HS(U,V)) / (1 + ||u||_V^2) on probes");

  if (const auto* a = std::get_if<AdditiveNoise>(&noise)) {
    k.lambda_sq = computed(0.0, "additive noise has no state dependence");
    k.c1 = stated(0.0, "additive noise: monotone drift gives c1 = 0");
    k.beta = stated(a->beta(), "Q = scale (-Delta)^{-beta}, admissible for beta > 3/4");
    k.trace_H = computed(a->trace_H_full(), "scale^2 pi^{-4 beta} zeta(4 beta)");
    k.D = computed(alpha + a->trace_H_full(), "alpha + ||Q||^2_HS(U,H)");
  } else if (const auto* m = std::get_if<MultiplicativeNoise>(&noise)) {
    k.lambda_sq = computed(m->lambda_sq(), "sum_i Lip(phi_i)^2");
    k.c1 = computed(m->lambda_sq(), "monotone drift plus Lipschitz noise gives c1 = Lambda^2");
    k.trace_H = computed(std::numeric_limits<double>::quiet_NaN(),
                         "defined for additive noise only");
    k.D = computed(std::numeric_limits<double>::quiet_NaN(), "defined for additive noise only");
  } else {
    k.lambda_sq = computed(0.0, "no noise");
    k.c1 = stated(0.0, "deterministic monotone flow");
    k.trace_H = computed(0.0, "no noise");
    k.D = computed(alpha, "alpha + 0");
  }

  if (reference) {
    const double M = deriv_sup_sampled(*reference, 64 * reference->dim());
    k.M = computed(M, "max |u0'| sampled at 64n points");
    k.k_min = computed(decay_rate_floor(M), "arctan(M) / M");
  }
  return k;
}

Observable clipped_coordinate(std::size_t k) {
  if (k == 0) throw std::invalid_argument("coordinate index is 1-based");
  return {"clipped_coordinate_" + std::to_string(k),
          [k](const SpectralField& u) { return std::min(1.0, std::abs(u.coeff(k))); }, 1.0, true};
}

Observable clipped_norm() {
  return {"clipped_norm_H", [](const SpectralField& u) { return std::min(1.0, norm_H(u)); }, 1.0,
          true};
}

Observable smoothed_ball(double radius, double width) {
  if (!(radius >= 0.0) || !(width > 0.0)) {
    throw std::invalid_argument("smoothed ball needs radius >= 0 and width > 0");
  }
  std::ostringstream id;
  id << "smoothed_ball_" << radius << "_" << width;
  return {id.str(),
          [radius, width](const SpectralField& u) {
            return std::clamp((radius + width - norm_H(u)) / width, 0.0, 1.0);
          },
          1.0 / width, true};
}

Observable constant_observable(double value) {
  std::ostringstream id;
  id << "constant_" << value;
  return {id.str(), [value](const SpectralField&) { return value; }, 0.0, true};
}

Observable user_observable(std::string id, std::function<double(const SpectralField&)> f,
                           double declared_lip) {
  return {std::move(id), std::move(f), declared_lip, false};
}

nlohmann::json to_json(const OccupationEstimate& e) {
  return {{"T", e.T},
          {"initial", e.initial_id},
          {"observable", e.observable_id},
          {"radius", e.radius},
          {"estimate", e.estimate},
          {"half_width", e.half_width},
          {"ci_lo", e.ci_lo},
          {"ci_hi", e.ci_hi},
          {"ensemble", e.ensemble},
          {"samples_per_member", e.samples_per_member}};
}

std::string to_csv(std::span<const CsvRow> rows) {
  std::ostringstream out;
  out.precision(17);
  out << "T,estimate,ci_lo,ci_hi,bound\n";
  for (const auto& r : rows) {
    out << r.T << ',' << r.estimate << ',' << r.ci_lo << ',' << r.ci_hi << ',' << r.bound << '\n';
  }
  return out.str();
}

EnsembleSeries collect_series(const GalerkinIntegrator& integrator, const SpectralField& x,
                              std::size_t ensemble,
                              const std::function<double(const SpectralField&)>& f,
                              int workers) {
  EnsembleSeries series;
  series.times = record_times(integrator.config());
  series.members = ensemble::map_members<std::vector<double>>(
      ensemble, workers, [&](std::size_t m) {
        std::vector<double> values;
        values.reserve(series.times.size());
        integrator.integrate(x, integrator.stream(m),
                             [&](std::size_t, double, const SpectralField& u) {
                               values.push_back(f(u));
                             });
        return values;
      });
  return series;
}

nlohmann::json to_json(const LyapunovCertificate& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"t", row.t},
                    {"estimate", row.estimate},
                    {"half_width", row.half_width},
                    {"bound", row.bound},
                    {"margin", row.margin}});
  }
  return {{"x_norm_sq", r.x_norm_sq}, {"D", r.D},       {"c", r.c},
          {"ensemble", r.ensemble},   {"pass", r.pass}, {"pass_confident", r.pass_confident},
          {"rows", rows}};
}

std::vector<CsvRow> csv_rows(const LyapunovCertificate& r) {
  std::vector<CsvRow> out;
  for (const auto& row : r.rows) {
    out.push_back({row.t, row.estimate, row.estimate - row.half_width,
                   row.estimate + row.half_width, row.bound});
  }
  return out;
}

LyapunovCertificate lyapunov_certificate(const EnsembleSeries& w11, double x_norm_sq, double D,
                                         double c) {
  if (!(c > 0.0)) throw std::invalid_argument("coercivity constant must be > 0");
  LyapunovCertificate cert;
  cert.x_norm_sq = x_norm_sq;
  cert.D = D;
  cert.c = c;
  cert.ensemble = w11.members.size();
  const auto& t = w11.times;

  // Running trapezoid integrals per member.
  std::vector<double> integral(cert.ensemble, 0.0);
  std::vector<double> averages(cert.ensemble);
  cert.pass = cert.pass_confident = cert.ensemble > 0;
  bool any = false;
  for (std::size_t r = 1; r < t.size(); ++r) {
    const double h = t[r] - t[r - 1];
    for (std::size_t m = 0; m < cert.ensemble; ++m) {
      integral[m] += 0.5 * h * (w11.members[m][r - 1] + w11.members[m][r]);
    }
    if (t[r] < 1.0 - 1e-12) continue;
    for (std::size_t m = 0; m < cert.ensemble; ++m) averages[m] = integral[m] / t[r];
    const auto s = summarize(averages);
    CertificateRow row;
    row.t = t[r];
    row.estimate = s.mean;
    row.half_width = s.half_width;
    row.bound = (x_norm_sq + D * t[r]) / (c * t[r]);
    row.margin = row.bound - row.estimate;
    cert.pass = cert.pass && row.margin + row.half_width >= 0.0;
    cert.pass_confident = cert.pass_confident && row.margin - row.half_width >= 0.0;
    cert.rows.push_back(row);
    any = true;
  }
  if (!any) cert.pass = cert.pass_confident = false;
  return cert;
}

nlohmann::json to_json(const VBoundReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"t", row.t},
                    {"mean", row.mean},
                    {"half_width", row.half_width},
                    {"bound_at_t", row.bound_at_t}});
  }
  return {{"c2", r.c2},           {"x_norm_V_sq", r.x_norm_V_sq}, {"bound", r.bound},
          {"sup_upper", r.sup_upper}, {"margin", r.bound - r.sup_upper},
          {"ensemble", r.ensemble}, {"pass", r.pass},             {"rows", rows}};
}

std::vector<CsvRow> csv_rows(const VBoundReport& r) {
  std::vector<CsvRow> out;
  for (const auto& row : r.rows) {
    out.push_back({row.t, row.mean, row.mean - row.half_width, row.mean + row.half_width,
                   r.bound});
  }
  return out;
}

VBoundReport galerkin_v_bound(const GalerkinIntegrator& integrator, const SpectralField& x,
                              double c2, std::size_t ensemble, int workers) {
  const auto series = collect_series(
      integrator, x, ensemble,
      [](const SpectralField& u) {
        const double v = norm_V(u);
        return v * v;
      },
      workers);
  VBoundReport rep;
  rep.c2 = c2;
  const double xv = norm_V(x.resized(integrator.config().n));
  rep.x_norm_V_sq = xv * xv;
  const double T = integrator.config().T;
  rep.bound = (c2 * T + rep.x_norm_V_sq) * std::exp(c2 * T);
  rep.ensemble = ensemble;
  std::vector<double> samples(ensemble);
  for (std::size_t r = 0; r < series.times.size(); ++r) {
    for (std::size_t m = 0; m < ensemble; ++m) samples[m] = series.members[m][r];
    const auto s = summarize(samples);
    const double t = series.times[r];
    rep.rows.push_back({t, s.mean, s.half_width, (c2 * t + rep.x_norm_V_sq) * std::exp(c2 * t)});
    rep.sup_upper = std::max(rep.sup_upper, s.mean + s.half_width);
  }
  rep.pass = ensemble > 0 && rep.sup_upper < rep.bound;
  return rep;
}

std::size_t record_stride(double horizon, double dt, std::size_t samples) {
  const auto steps = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
  return std::max<std::size_t>(1, steps / std::max<std::size_t>(samples, 1));
}

std::vector<OccupationEstimate> ball_occupation(const SpectralField& x, double delta,
                                                std::span<const double> horizons,
                                                const NoiseModel& noise, SolverConfig cfg,
                                                std::size_t ensemble, int workers,
                                                const std::string& initial_id) {
  if (!(delta > 0.0)) throw std::invalid_argument("ball radius must be > 0");
  if (ensemble < 2) throw std::invalid_argument("ball occupation needs at least two members");
  cfg.T = max_horizon(horizons);
  cfg.record_every = record_stride(min_horizon(horizons), cfg.dt);
  const GalerkinIntegrator integrator(cfg, noise);
  const auto series = collect_series(
      integrator, x, ensemble,
      [delta](const SpectralField& u) { return norm_H(u) < delta ? 1.0 : 0.0; }, workers);

  std::vector<OccupationEstimate> out;
  std::vector<double> fractions(ensemble);
  for (double T : horizons) {
    const std::size_t last = last_index_within(series.times, T);
    for (std::size_t m = 0; m < ensemble; ++m) {
      CompensatedSum s;
      for (std::size_t r = 1; r <= last; ++r) s.add(series.members[m][r]);
      fractions[m] = last > 0 ? s.value() / static_cast<double>(last) : 0.0;
    }
    OccupationEstimate e;
    e.T = T;
    e.initial_id = initial_id;
    std::ostringstream id;
    id << "ball_H_" << delta;
    e.observable_id = id.str();
    e.radius = delta;
    e.ensemble = ensemble;
    e.samples_per_member = last;
    occupation_interval(fractions, e);
    out.push_back(e);
  }
  return out;
}

namespace {

nlohmann::json to_json(const GapEstimate& g) {
  return {{"mean_x", g.mean_x}, {"mean_y", g.mean_y},   {"hw_x", g.hw_x},
          {"hw_y", g.hw_y},     {"gap", g.gap},         {"pathwise_max", g.pathwise_max}};
}

}  // namespace

nlohmann::json to_json(const EPropertyReport& r) {
  return {{"observable", r.observable_id},
          {"observable_certified", r.observable_certified},
          {"lip", r.lip},
          {"distance", r.distance},
          {"slack_factor", r.slack_factor},
          {"bound", r.bound},
          {"T", r.T},
          {"ensemble", r.ensemble},
          {"common", to_json(r.common)},
          {"independent", to_json(r.independent)},
          {"pathwise_checked", r.pathwise_checked},
          {"pathwise_slack", r.pathwise_slack},
          {"pass", r.pass}};
}

EPropertyReport e_property_gap(const SpectralField& x, const SpectralField& y,
                               const Observable& phi, const NoiseModel& noise,
                               const SolverConfig& cfg, std::size_t ensemble, int workers) {
  if (ensemble < 2) throw std::invalid_argument("e-property check needs at least two members");
  const GalerkinIntegrator integrator(cfg, noise);
  const SpectralField xs = x.resized(cfg.n);
  const SpectralField ys = y.resized(cfg.n);

  struct Member {
    double fx = 0.0, fy_common = 0.0, fy_indep = 0.0;
  };
  const auto members = ensemble::map_members<Member>(ensemble, workers, [&](std::size_t m) {
    const auto common = member_stream(cfg, m, false);
    const auto indep = member_stream(cfg, m, true);
    Member r;
    r.fx = phi.eval(integrator.integrate(xs, common, {}));
    r.fy_common = phi.eval(integrator.integrate(ys, common, {}));
    r.fy_indep = phi.eval(integrator.integrate(ys, indep, {}));
    return r;
  });

  std::vector<double> fx(ensemble), fyc(ensemble), fyi(ensemble);
  double path_c = 0.0, path_i = 0.0;
  for (std::size_t m = 0; m < ensemble; ++m) {
    fx[m] = members[m].fx;
    fyc[m] = members[m].fy_common;
    fyi[m] = members[m].fy_indep;
    path_c = std::max(path_c, std::abs(fx[m] - fyc[m]));
    path_i = std::max(path_i, std::abs(fx[m] - fyi[m]));
  }
  const auto sx = summarize(fx);
  const auto syc = summarize(fyc);
  const auto syi = summarize(fyi);

  EPropertyReport rep;
  rep.observable_id = phi.id;
  rep.observable_certified = phi.certified;
  rep.lip = phi.lip;
  rep.distance = norm_H(xs - ys);
  rep.T = static_cast<double>(cfg.steps()) * cfg.dt;
  rep.slack_factor = slack_factor(noise, rep.T);
  rep.bound = rep.lip * rep.distance * rep.slack_factor;
  rep.ensemble = ensemble;
  rep.common = {sx.mean, syc.mean, sx.half_width, syc.half_width, std::abs(sx.mean - syc.mean),
                path_c};
  rep.independent = {sx.mean,        syi.mean, sx.half_width, syi.half_width,
                     std::abs(sx.mean - syi.mean), path_i};
  rep.pathwise_checked = !std::holds_alternative<MultiplicativeNoise>(noise);
  rep.pathwise_slack = 10.0 * cfg.dt * cfg.dt * static_cast<double>(cfg.steps());
  rep.pass = rep.common.gap <= rep.bound + rep.common.hw_x + rep.common.hw_y &&
             rep.independent.gap <= rep.bound + rep.independent.hw_x + rep.independent.hw_y;
  if (rep.pathwise_checked) {
    rep.pass = rep.pass && path_c <= rep.lip * rep.distance + rep.pathwise_slack;
  }
  return rep;
}

nlohmann::json to_json(const AgreementReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"T", row.T},
                    {"qx", row.qx},
                    {"hw_x", row.hw_x},
                    {"qy", row.qy},
                    {"hw_y", row.hw_y},
                    {"delta", row.delta}});
  }
  return {{"observable", r.observable_id},
          {"ensemble", r.ensemble},
          {"common_noise", r.common_noise},
          {"pass_monotone", r.pass_monotone},
          {"pass_final", r.pass_final},
          {"pass", r.pass},
          {"rows", rows}};
}

std::vector<CsvRow> csv_rows(const AgreementReport& r) {
  std::vector<CsvRow> out;
  for (const auto& row : r.rows) {
    const double hw = row.hw_x + row.hw_y;
    out.push_back({row.T, row.delta, std::max(0.0, row.delta - hw), row.delta + hw, 3.0 * hw});
  }
  return out;
}

AgreementReport ergodic_agreement(const SpectralField& x, const SpectralField& y,
                                  const Observable& phi, std::span<const double> horizons,
                                  const NoiseModel& noise, SolverConfig cfg,
                                  std::size_t ensemble, int workers, bool common_noise) {
  if (ensemble < 2) throw std::invalid_argument("ergodic agreement needs at least two members");
  std::vector<double> hs(horizons.begin(), horizons.end());
  std::sort(hs.begin(), hs.end());
  cfg.T = max_horizon(hs);
  cfg.record_every = record_stride(min_horizon(hs), cfg.dt);
  const GalerkinIntegrator integrator(cfg, noise);
  const auto times = record_times(cfg);
  std::vector<std::size_t> cut(hs.size());
  for (std::size_t i = 0; i < hs.size(); ++i) cut[i] = last_index_within(times, hs[i]);

  // Per member: time averages at each horizon for x and y.
  using Averages = std::pair<std::vector<double>, std::vector<double>>;
  const auto run = [&](const SpectralField& u0, const NoiseStream& stream) {
    std::vector<double> avg(hs.size(), 0.0);
    CompensatedSum sum;
    std::size_t r = 0, next = 0;
    integrator.integrate(u0, stream, [&](std::size_t, double, const SpectralField& u) {
      if (r > 0) sum.add(phi.eval(u));
      while (next < cut.size() && cut[next] == r) {
        avg[next] = r > 0 ? sum.value() / static_cast<double>(r) : phi.eval(u);
        ++next;
      }
      ++r;
    });
    return avg;
  };
  const auto members = ensemble::map_members<Averages>(ensemble, workers, [&](std::size_t m) {
    return Averages{run(x, member_stream(cfg, m, false)),
                    run(y, member_stream(cfg, m, !common_noise))};
  });

  AgreementReport rep;
  rep.observable_id = phi.id;
  rep.ensemble = ensemble;
  rep.common_noise = common_noise;
  std::vector<double> ax(ensemble), ay(ensemble);
  for (std::size_t i = 0; i < hs.size(); ++i) {
    for (std::size_t m = 0; m < ensemble; ++m) {
      ax[m] = members[m].first[i];
      ay[m] = members[m].second[i];
    }
    const auto sx = summarize(ax);
    const auto sy = summarize(ay);
    rep.rows.push_back({hs[i], sx.mean, sx.half_width, sy.mean, sy.half_width,
                        std::abs(sx.mean - sy.mean)});
  }
  rep.pass_monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const auto& cur = rep.rows[i];
    if (cur.delta - rep.rows[i - 1].delta > 2.0 * (cur.hw_x + cur.hw_y)) rep.pass_monotone = false;
  }
  const auto& last = rep.rows.back();
  rep.pass_final = last.delta <= 3.0 * (last.hw_x + last.hw_y);
  rep.pass = rep.pass_monotone && rep.pass_final;
  return rep;
}

nlohmann::json to_json(const DominanceReport& r) {
  nlohmann::json members = nlohmann::json::array();
  double worst = 0.0;
  for (const auto& m : r.members) {
    members.push_back({{"sup_z", m.sup_z}, {"sup_qw_V", m.sup_qw}, {"bound", m.bound}});
    if (m.bound > 0.0) worst = std::max(worst, m.sup_z / m.bound);
  }
  nlohmann::json balls = nlohmann::json::array();
  for (const auto& [d, f] : r.small_ball) balls.push_back({{"delta", d}, {"fraction", f}});
  return {{"c_hat", r.c_hat},
          {"T", r.T},
          {"slack", r.slack},
          {"delta_ref", r.delta_ref},
          {"small_ball", balls},
          {"small_ball_positive", r.small_ball_positive},
          {"worst_ratio", worst},
          {"violations", r.violations},
          {"pass", r.pass},
          {"members", members}};
}

DominanceReport noise_dominance_check(const SpectralField& x, const AdditiveNoise& noise,
                                      SolverConfig cfg, std::size_t ensemble, int workers) {
  cfg.record_every = 1;
  const AdditiveNoise q(noise.beta(), cfg.n, noise.scale());
  const GalerkinIntegrator noisy(cfg, q);
  const GalerkinIntegrator quiet(cfg, NoNoise{});
  const SpectralField xs = x.resized(cfg.n);

  std::vector<SpectralField> v;
  quiet.integrate(xs, quiet.stream(0),
                  [&](std::size_t, double, const SpectralField& u) { v.push_back(u); });

  DominanceReport rep;
  rep.c_hat = 2.0 * std::sqrt(pi / 2.0);
  rep.T = static_cast<double>(cfg.steps()) * cfg.dt;
  rep.slack = 10.0 * cfg.dt;
  rep.members = ensemble::map_members<DominanceMember>(ensemble, workers, [&](std::size_t m) {
    const auto stream = noisy.stream(m);
    SpectralField qw(cfg.n);
    DominanceMember out;
    noisy.integrate(xs, stream, [&](std::size_t step, double, const SpectralField& u) {
      if (step > 0) qw += sample_additive_increment(q, cfg.dt, stream, step - 1);
      out.sup_z = std::max(out.sup_z, norm_H(u - v[step]));
      out.sup_qw = std::max(out.sup_qw, norm_V(qw));
    });
    out.bound = (rep.c_hat * rep.T + 0.5) * out.sup_qw;
    return out;
  });

  CompensatedSum sq;
  for (const auto& m : rep.members) {
    if (m.sup_z > m.bound + rep.slack) ++rep.violations;
    sq.add(m.sup_qw * m.sup_qw);
  }
  rep.delta_ref = ensemble > 0 ? std::sqrt(sq.value() / static_cast<double>(ensemble)) : 0.0;
  for (double f : {0.5, 1.0, 3.0}) {
    const double d = f * rep.delta_ref;
    std::size_t inside = 0;
    for (const auto& m : rep.members) inside += m.sup_qw < d ? 1 : 0;
    rep.small_ball.emplace_back(d, ensemble > 0 ? static_cast<double>(inside) /
                                                      static_cast<double>(ensemble)
                                                : 0.0);
  }
  rep.small_ball_positive = rep.small_ball.back().second > 0.0;
  rep.pass = ensemble > 0 && rep.violations == 0;
  return rep;
}

nlohmann::json to_json(const DecayCertificate& c) {
  return {{"M", c.gradient_sup},
          {"k_min", c.k_min},
          {"slope", c.trivial ? nlohmann::json(nullptr) : nlohmann::json(c.slope)},
          {"required_slope", -2.0 * c.k_min},
          {"worst_ratio", c.worst_ratio},
          {"tolerance", c.tolerance},
          {"trivial", c.trivial},
          {"pass", c.pass}};
}

DecayCertificate decay_certificate(const DecayRecord& rec, double tolerance) {
  DecayCertificate cert;
  cert.gradient_sup = rec.gradient_sup;
  cert.k_min = rec.k_min;
  cert.tolerance = tolerance;
  const auto& traj = rec.trajectory;
  if (traj.states.empty()) throw std::invalid_argument("decay record has no states");
  const double v0 = norm_H(traj.states.front());
  if (v0 == 0.0) {
    cert.trivial = true;
    bool zero = true;
    for (const auto& s : traj.states) zero = zero && norm_H(s) == 0.0;
    cert.pass = zero;
    return cert;
  }
  // Least-squares slope of log ||v||^2 against t.
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    const double t = traj.times[r];
    const double v = norm_H(traj.states[r]);
    const double ratio = (v * v) / (std::exp(-2.0 * rec.k_min * t) * v0 * v0);
    cert.worst_ratio = std::max(cert.worst_ratio, ratio);
    if (v > 0.0 && std::isnormal(v * v)) {
      const double y = std::log(v * v);
      st += t;
      sy += y;
      stt += t * t;
      sty += t * y;
      ++count;
    }
  }
  const double c = static_cast<double>(count);
  const double denom = c * stt - st * st;
  cert.slope = (count >= 2 && denom > 0.0) ? (c * sty - st * sy) / denom : 0.0;
  cert.pass = cert.worst_ratio <= 1.0 + tolerance && cert.slope <= -2.0 * rec.k_min;
  return cert;
}

}  // namespace curveflow
