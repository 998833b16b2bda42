#include "deglab/multiplier.hpp"

#include <cmath>
#include <stdexcept>

#include "deglab/common.hpp"

namespace deglab {

namespace {

using cplx = std::complex<double>;

double require_param(const nlohmann::json& params, const std::string& key) {
  if (!params.contains(key)) throw ConfigError(key, "missing multiplier parameter '" + key + "'");
  return params.at(key).get<double>();
}

// Presets must be bounded on [0, inf); probe a wide log grid.
void audit_bounded(const MultiplierFunction& f) {
  double sup = 0;
  for (int k = -60; k <= 60; ++k) {
    double l = std::pow(10.0, k / 5.0);
    sup = std::max(sup, std::abs(f.fn(l)));
  }
  sup = std::max(sup, std::abs(f.fn(0.0)));
  if (!(sup < 1e12) || !std::isfinite(sup))
    throw ConfigError("preset", "multiplier '" + f.preset + "' is unbounded on [0,inf)");
}

}  // namespace

DyadicPartition dyadic_partition(double step_sharpness) {
  return DyadicPartition(step_sharpness);
}

HolderOrder holder_order(double s) {
  if (!(s > 0)) throw std::invalid_argument("holder_order: s must be positive");
  double nearest = std::round(s);
  if (std::abs(s - nearest) < 1e-9)
    throw std::invalid_argument("holder_order: s must not be an integer");
  HolderOrder o;
  o.s = s;
  o.integer_part = static_cast<int>(std::floor(s));
  o.fraction = s - o.integer_part;
  return o;
}

MultiplierFunction make_multiplier(const std::string& preset, const nlohmann::json& params) {
  MultiplierFunction f;
  f.preset = preset;
  f.params = params;
  if (preset == "constant") {
    double value = params.value("value", 1.0);
    f.real_valued = true;
    f.fn = [value](double) { return cplx(value, 0); };
  } else if (preset == "heat") {
    double t = require_param(params, "t");
    if (!(t >= 0)) throw ConfigError("t", "heat multiplier needs t >= 0");
    f.real_valued = true;
    f.fn = [t](double l) { return cplx(std::exp(-t * l), 0); };
  } else if (preset == "imaginary_power") {
    double s = require_param(params, "s");
    f.fn = [s](double l) {
      if (l <= 0) return cplx(1, 0);
      double phase = s * std::log(l);
      return cplx(std::cos(phase), std::sin(phase));
    };
  } else if (preset == "schrodinger") {
    double alpha = require_param(params, "alpha");
    double t = require_param(params, "t");
    if (!(alpha > 0)) throw ConfigError("alpha", "schrodinger multiplier needs alpha > 0");
    f.fn = [alpha, t](double l) {
      double mod = std::pow(1.0 + l, -alpha);
      return cplx(mod * std::cos(t * l), mod * std::sin(t * l));
    };
  } else if (preset == "wave") {
    double alpha = require_param(params, "alpha");
    double t = require_param(params, "t");
    if (!(alpha > 0)) throw ConfigError("alpha", "wave multiplier needs alpha > 0");
    f.fn = [alpha, t](double l) {
      double root = std::sqrt(std::max(l, 0.0));
      double mod = std::pow(1.0 + l, -alpha / 2.0);
      return cplx(mod * std::cos(t * root), mod * std::sin(t * root));
    };
  } else if (preset == "bochner_riesz") {
    double alpha = require_param(params, "alpha");
    double r = require_param(params, "R");
    if (!(alpha > 0)) throw ConfigError("alpha", "bochner_riesz multiplier needs alpha > 0");
    if (!(r > 0)) throw ConfigError("R", "bochner_riesz multiplier needs R > 0");
    f.real_valued = true;
    f.support_upper = r;
    f.fn = [alpha, r](double l) {
      double u = 1.0 - l / r;
      return cplx(u > 0 ? std::pow(u, alpha) : 0.0, 0);
    };
  } else {
    throw ConfigError("preset", "unknown multiplier preset '" + preset + "'");
  }
  audit_bounded(f);
  return f;
}

std::vector<std::string> multiplier_presets() {
  return {"bochner_riesz", "constant", "heat", "imaginary_power", "schrodinger", "wave"};
}

MultiplierFunction scale_multiplier(const MultiplierFunction& f, double r) {
  if (!(r > 0)) throw std::invalid_argument("scale_multiplier: r must be positive");
  MultiplierFunction g = f;
  g.support_upper = f.support_upper / r;
  auto base = f.fn;
  g.fn = [base, r](double l) { return base(r * l); };
  return g;
}

double holder_norm(const std::vector<std::complex<double>>& samples, double a, double b,
                   double s) {
  HolderOrder order = holder_order(s);
  const int n = static_cast<int>(samples.size());
  if (!(b > a)) throw std::invalid_argument("holder_norm: need b > a");
  if (n < 8 * (order.integer_part + 2))
    throw std::invalid_argument("holder_norm: sample grid too coarse for the requested order");
  const double dx = (b - a) / (n - 1);

  // sup norms of the central divided differences up to order [s]
  std::vector<cplx> level(samples.begin(), samples.end());
  double total = 0;
  double sup0 = 0;
  for (const cplx& v : level) sup0 = std::max(sup0, std::abs(v));
  total += sup0;
  for (int k = 1; k <= order.integer_part; ++k) {
    std::vector<cplx> next(level.size() - 2);
    for (size_t i = 1; i + 1 < level.size(); ++i)
      next[i - 1] = (level[i + 1] - level[i - 1]) / (2.0 * dx);
    level = std::move(next);
    double sup = 0;
    for (const cplx& v : level) sup = std::max(sup, std::abs(v));
    total += sup;
  }

  // Hoelder seminorm of the top difference, pairs separated by >= 2 steps so
  // finite-difference noise does not masquerade as roughness
  const double expnt = order.fraction;
  const int m = static_cast<int>(level.size());
  double semi = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 2; j < m; ++j) {
      double gap = (j - i) * dx;
      semi = std::max(semi, std::abs(level[j] - level[i]) / std::pow(gap, expnt));
    }
  }
  return total + semi;
}

double holder_norm(const std::function<std::complex<double>(double)>& f, double a, double b,
                   double s, int base_points) {
  if (base_points < 9) throw std::invalid_argument("holder_norm: base_points too small");
  const int fine = 8 * (base_points - 1) + 1;
  std::vector<cplx> samples(fine);
  for (int i = 0; i < fine; ++i) {
    double x = a + (b - a) * i / (fine - 1);
    samples[i] = f(x);
  }
  return holder_norm(samples, a, b, s);
}

MihlinResult mihlin_sup(const MultiplierFunction& f, const DyadicPartition& partition, double s,
                        const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("mihlin_sup: empty t_grid");
  holder_order(s);  // validates s
  MihlinResult res;
  res.per_t.reserve(t_grid.size());
  for (double t : t_grid) {
    auto g = [&](double l) { return partition.phi(l) * f.fn(t * l); };
    double v = holder_norm(g, 0.125, 2.0, s);
    res.per_t.emplace_back(t, v);
    res.sup = std::max(res.sup, v);
  }
  return res;
}

}  // namespace deglab
