#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "deglab/smoothstep.hpp"

namespace deglab {

// Smooth Littlewood-Paley pair: eta is 1 on (-inf, 1/2], 0 on [1, inf) and
// C^infinity in between; phi(l) = eta(l) - eta(2l) has support in [1/4, 1]
// and the shifts phi(2^-n l) telescope to 1.
struct DyadicPartition {
  double sharpness = 1.0;
  SmoothStep step;

  explicit DyadicPartition(double sharpness_ = 1.0) : sharpness(sharpness_), step(sharpness_) {}

  double eta(double l) const { return 1.0 - step(2.0 * l - 1.0); }
  double phi(double l) const { return eta(l) - eta(2.0 * l); }
};

DyadicPartition dyadic_partition(double step_sharpness = 1.0);

// Validated non-integer smoothness order.
struct HolderOrder {
  double s = 0;
  int integer_part = 0;
  double fraction = 0;
};

// Throws when s <= 0 or s is within 1e-9 of an integer.
HolderOrder holder_order(double s);

// Bounded multiplier function on [0, inf), possibly complex-valued.
struct MultiplierFunction {
  std::string preset;
  nlohmann::json params;
  bool real_valued = false;
  // F vanishes beyond this point (finite only for compactly supported presets)
  double support_upper = std::numeric_limits<double>::infinity();
  std::function<std::complex<double>(double)> fn;

  std::complex<double> operator()(double l) const { return fn(l); }
};

// Presets: constant(value), heat(t), imaginary_power(s), schrodinger(alpha, t),
// wave(alpha, t), bochner_riesz(alpha, R).
MultiplierFunction make_multiplier(const std::string& preset, const nlohmann::json& params);

std::vector<std::string> multiplier_presets();

// delta_r F (lambda) = F(r lambda)
MultiplierFunction scale_multiplier(const MultiplierFunction& f, double r);

// Hoelder C^s norm over [a,b] from uniform samples: sup norms of the divided
// differences up to order [s] plus the Hoelder seminorm of the top one with
// exponent s - [s], taken over sample pairs separated by at least two grid
// steps. The samples must already be on the fine grid (callers evaluating a
// function should refine by 8x; the convenience overload below does).
double holder_norm(const std::vector<std::complex<double>>& samples, double a, double b, double s);

double holder_norm(const std::function<std::complex<double>(double)>& f, double a, double b,
                   double s, int base_points = 129);

// sup over the t-grid of || phi(.) F(t .) ||_{C^s} on [1/8, 2].
struct MihlinResult {
  double sup = 0;
  std::vector<std::pair<double, double>> per_t;  // (t, norm)
};

MihlinResult mihlin_sup(const MultiplierFunction& f, const DyadicPartition& partition, double s,
                        const std::vector<double>& t_grid);

}  // namespace deglab
