#include "curveflow/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "curveflow/errors.hpp"

namespace curveflow {

namespace {

constexpr std::size_t all_members = static_cast<std::size_t>(-1);

void require_known_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                        const std::string& path) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.contains(it.key())) throw ConfigError(path + "/" + it.key(), "unknown field");
  }
}

double number_field(const nlohmann::json& j, const std::string& key, double fallback,
                    const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(path + "/" + key, "expected a number");
  return j.at(key).get<double>();
}

}  // namespace

MultiplicativeNoise::MultiplicativeNoise(std::vector<NoiseMember> members, double decay,
                                         double scale)
    : members_(std::move(members)), decay_(decay), scale_(scale) {
  for (std::size_t i = 0; i < members_.size(); ++i) {
    const auto& m = members_[i];
    if (!m.value || !m.d_dx || !m.d_dy) {
      throw std::invalid_argument("noise member needs value and both partial derivatives");
    }
    if (!(m.lip >= 0.0) || !std::isfinite(m.lip)) {
      throw std::invalid_argument("noise member Lipschitz constant must be finite and >= 0");
    }
    for (double y : {-10.0, -1.0, 0.0, 0.5, 3.0, 100.0}) {
      if (std::abs(m.value(0.0, y)) > 1e-12 || std::abs(m.value(1.0, y)) > 1e-12) {
        throw std::invalid_argument("noise member " + std::to_string(i + 1) +
                                    " does not vanish at x in {0,1}");
      }
    }
    lambda_sq_ += m.lip * m.lip;
  }
}

MultiplicativeNoise MultiplicativeNoise::default_family(std::size_t members, double decay,
                                                        double scale) {
  if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("decay must lie in (0,1)");
  if (!(scale >= 0.0)) throw std::invalid_argument("scale must be >= 0");
  std::vector<NoiseMember> family;
  family.reserve(members);
  for (std::size_t i = 1; i <= members; ++i) {
    const double a = scale * std::pow(decay, static_cast<double>(i));
    const double w = static_cast<double>(i) * pi;
    NoiseMember m;
    m.value = [a, w](double x, double y) { return a * std::sin(w * x) / std::sqrt(1.0 + y * y); };
    m.d_dx = [a, w](double x, double y) {
      return a * w * std::cos(w * x) / std::sqrt(1.0 + y * y);
    };
    m.d_dy = [a, w](double x, double y) {
      const double s = 1.0 + y * y;
      return -a * std::sin(w * x) * y / (s * std::sqrt(s));
    };
    m.lip = a * (w + 1.0);
    family.push_back(std::move(m));
  }
  return MultiplicativeNoise(std::move(family), decay, scale);
}

double MultiplicativeNoise::lambda_sq_tail(std::size_t k) const {
  double s = 0.0;
  for (std::size_t i = k; i < members_.size(); ++i) s += members_[i].lip * members_[i].lip;
  return s;
}

MultiplicativeNoise MultiplicativeNoise::truncated(std::size_t k) const {
  std::vector<NoiseMember> m(members_.begin(),
                             members_.begin() + static_cast<long>(std::min(k, members_.size())));
  return MultiplicativeNoise(std::move(m), decay_, scale_);
}

AdditiveNoise::AdditiveNoise(double beta, std::size_t n, double scale)
    : beta_(beta), scale_(scale) {
  if (!(beta > 0.75)) {
    std::ostringstream msg;
    msg << "additive noise exponent must satisfy beta > 3/4 so that Q = (-Delta)^-beta is "
           "Hilbert-Schmidt into H^1_0 (got beta = "
        << beta << ")";
    throw std::invalid_argument(msg.str());
  }
  if (n == 0) throw std::invalid_argument("additive noise dimension must be >= 1");
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("additive noise scale must be finite and >= 0");
  }
  q_.resize(n);
  for (std::size_t k = 1; k <= n; ++k) q_[k - 1] = scale * std::pow(eigenvalue(k), -beta);
}

double AdditiveNoise::trace_H() const {
  double s = 0.0;
  for (double q : q_) s += q * q;
  return s;
}

double AdditiveNoise::trace_H_full() const {
  return scale_ * scale_ * std::pow(pi, -4.0 * beta_) * std::riemann_zeta(4.0 * beta_);
}

double AdditiveNoise::trace_V() const {
  double s = 0.0;
  for (std::size_t k = 1; k <= q_.size(); ++k) s += eigenvalue(k) * q_[k - 1] * q_[k - 1];
  return s;
}

double AdditiveNoise::trace_V_full() const {
  return scale_ * scale_ * std::pow(pi, 2.0 - 4.0 * beta_) * std::riemann_zeta(4.0 * beta_ - 2.0);
}

double hs_norm_H(const SpectralField& u, const MultiplicativeNoise& noise,
                 const SpectralBasis& basis, std::size_t k) {
  const std::size_t members = std::min(k, noise.size());
  const auto& rule = basis.rule();
  std::vector<double> val(basis.nodes());
  basis.values_at_nodes(u.values(), val);
  double s = 0.0;
  for (std::size_t i = 0; i < members; ++i) {
    const auto& phi = noise.members()[i].value;
    for (std::size_t j = 0; j < val.size(); ++j) {
      const double p = phi(rule.nodes[j], val[j]);
      s += rule.weights[j] * p * p;
    }
  }
  return s;
}

double hs_norm_H_projected(const SpectralField& u, const MultiplicativeNoise& noise,
                           const SpectralBasis& basis, std::size_t k) {
  const std::size_t members = std::min(k, noise.size());
  const auto& rule = basis.rule();
  std::vector<double> val(basis.nodes()), g(basis.nodes()), c(basis.dim());
  basis.values_at_nodes(u.values(), val);
  double s = 0.0;
  for (std::size_t i = 0; i < members; ++i) {
    const auto& phi = noise.members()[i].value;
    for (std::size_t j = 0; j < val.size(); ++j) g[j] = phi(rule.nodes[j], val[j]);
    basis.integrate_against_values(g, c);
    for (double ck : c) s += ck * ck;
  }
  return s;
}

double hs_gap(const SpectralField& u, const SpectralField& v, const MultiplicativeNoise& noise,
              const SpectralBasis& basis) {
  const auto& rule = basis.rule();
  std::vector<double> vu(basis.nodes()), vv(basis.nodes());
  basis.values_at_nodes(u.values(), vu);
  basis.values_at_nodes(v.values(), vv);
  double s = 0.0;
  for (const auto& m : noise.members()) {
    for (std::size_t j = 0; j < vu.size(); ++j) {
      const double d = m.value(rule.nodes[j], vu[j]) - m.value(rule.nodes[j], vv[j]);
      s += rule.weights[j] * d * d;
    }
  }
  return s;
}

double hs_norm_V(const SpectralField& u, const MultiplicativeNoise& noise,
                 const SpectralBasis& basis) {
  const auto& rule = basis.rule();
  std::vector<double> val(basis.nodes()), der(basis.nodes());
  basis.values_at_nodes(u.values(), val);
  basis.derivs_at_nodes(u.values(), der);
  double s = 0.0;
  for (const auto& m : noise.members()) {
    for (std::size_t j = 0; j < val.size(); ++j) {
      const double x = rule.nodes[j];
      const double d = m.d_dx(x, val[j]) + m.d_dy(x, val[j]) * der[j];
      s += rule.weights[j] * d * d;
    }
  }
  return s;
}

SpectralField sample_multiplicative_increment(const SpectralField& u,
                                              const MultiplicativeNoise& noise, std::size_t k,
                                              double dt, const SpectralBasis& basis,
                                              const NoiseStream& stream, std::uint64_t step) {
  if (k > noise.size()) throw std::invalid_argument("truncation exceeds noise family size");
  if (!(dt >= 0.0)) throw std::invalid_argument("dt must be >= 0");
  SpectralField inc(basis.dim());
  if (k == 0 || dt == 0.0) return inc;
  std::vector<double> xi(k);
  stream.normals(step, xi);
  const double sdt = std::sqrt(dt);
  const auto& rule = basis.rule();
  std::vector<double> val(basis.nodes()), g(basis.nodes(), 0.0);
  basis.values_at_nodes(u.values(), val);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& phi = noise.members()[i].value;
    const double a = xi[i] * sdt;
    for (std::size_t j = 0; j < val.size(); ++j) g[j] += a * phi(rule.nodes[j], val[j]);
  }
  basis.integrate_against_values(g, inc.values());
  return inc;
}

SpectralField sample_additive_increment(const AdditiveNoise& noise, double dt,
                                        const NoiseStream& stream, std::uint64_t step) {
  if (!(dt >= 0.0)) throw std::invalid_argument("dt must be >= 0");
  SpectralField inc(noise.dim());
  if (dt == 0.0) return inc;
  stream.normals(step, inc.values());
  const double sdt = std::sqrt(dt);
  for (std::size_t k = 1; k <= noise.dim(); ++k) inc[k - 1] *= noise.amplitude(k) * sdt;
  return inc;
}

SpectralField sample_increment(const NoiseModel& noise, const SpectralField& u, double dt,
                               const SpectralBasis& basis, const NoiseStream& stream,
                               std::uint64_t step) {
  if (const auto* a = std::get_if<AdditiveNoise>(&noise)) {
    return sample_additive_increment(*a, dt, stream, step).resized(basis.dim());
  }
  if (const auto* m = std::get_if<MultiplicativeNoise>(&noise)) {
    return sample_multiplicative_increment(u, *m, m->size(), dt, basis, stream, step);
  }
  return SpectralField(basis.dim());
}

bool is_noise_free(const NoiseModel& noise) {
  if (std::holds_alternative<NoNoise>(noise)) return true;
  if (const auto* a = std::get_if<AdditiveNoise>(&noise)) return a->scale() == 0.0;
  if (const auto* m = std::get_if<MultiplicativeNoise>(&noise)) {
    return m->size() == 0 || m->scale() == 0.0;
  }
  return false;
}

nlohmann::json to_json(const NoiseModel& noise) {
  if (const auto* a = std::get_if<AdditiveNoise>(&noise)) {
    return {{"type", "additive"}, {"beta", a->beta()}, {"scale", a->scale()}};
  }
  if (const auto* m = std::get_if<MultiplicativeNoise>(&noise)) {
    return {{"type", "multiplicative"},
            {"members", m->size()},
            {"decay", m->decay()},
            {"scale", m->scale()}};
  }
  return {{"type", "none"}};
}

NoiseModel noise_from_json(const nlohmann::json& j, std::size_t n) {
  const std::string path = "/noise";
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  if (!j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError(path + "/type", "expected one of \"additive\", \"multiplicative\", \"none\"");
  }
  const auto type = j.at("type").get<std::string>();
  try {
    if (type == "none") {
      require_known_keys(j, {"type"}, path);
      return NoNoise{};
    }
    if (type == "additive") {
      require_known_keys(j, {"type", "beta", "scale"}, path);
      const double beta = number_field(j, "beta", 1.0, path);
      if (!(beta > 0.75)) {
        std::ostringstream msg;
        msg << "beta = " << beta
            << " is not admissible; the additive noise requires beta > 3/4 so that Q is "
               "Hilbert-Schmidt into H^1_0";
        throw ConfigError(path + "/beta", msg.str());
      }
      return AdditiveNoise(beta, n, number_field(j, "scale", 1.0, path));
    }
    if (type == "multiplicative") {
      require_known_keys(j, {"type", "members", "decay", "scale"}, path);
      std::size_t members = 8;
      if (j.contains("members")) {
        if (!j.at("members").is_number_unsigned()) {
          throw ConfigError(path + "/members", "expected a non-negative integer");
        }
        members = j.at("members").get<std::size_t>();
      }
      return MultiplicativeNoise::default_family(members, number_field(j, "decay", 0.5, path),
                                                 number_field(j, "scale", 1.0, path));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + "/type", "unknown noise type \"" + type + "\"");
}

std::string content_hash(const nlohmann::json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace curveflow
