#include "deglab/media.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "deglab/common.hpp"
#include "deglab/smoothstep.hpp"

namespace deglab {

namespace {

const SmoothStep& step() {
  static const SmoothStep s(1.0);
  return s;
}

// 1 for r <= r_in, 0 for r >= r_out, smooth monotone transition between.
double plateau_profile(double r, double r_in, double r_out) {
  return step()((r_out - r) / (r_out - r_in));
}

double bump_profile(double rho) {  // 1 at rho = 0, support [0, 1)
  if (rho >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - rho * rho));
}

Point read_point(const nlohmann::json& params, const std::string& key, int dim) {
  if (!params.contains(key)) throw ConfigError(key, "missing parameter '" + key + "'");
  const auto& v = params.at(key);
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    throw ConfigError(key, "parameter '" + key + "' must be an array of length " +
                               std::to_string(dim));
  Point p{0, 0};
  for (int k = 0; k < dim; ++k) p[k] = v.at(k).get<double>();
  return p;
}

double read_positive(const nlohmann::json& params, const std::string& key) {
  if (!params.contains(key)) throw ConfigError(key, "missing parameter '" + key + "'");
  double v = params.at(key).get<double>();
  if (!(v > 0)) throw ConfigError(key, "parameter '" + key + "' must be positive");
  return v;
}

// Largest |d profile/d rho| over a fine grid; used to record grad_sup.
double radial_gradient_sup(const std::function<double(double)>& profile, double r_max) {
  const int m = 16384;
  const double dr = r_max / m;
  double sup = 0;
  for (int i = 1; i < m; ++i) {
    double d = std::abs(profile((i + 1) * dr) - profile((i - 1) * dr)) / (2 * dr);
    sup = std::max(sup, d);
  }
  return sup;
}

void check_margin(const GridSpace& g, const Point& center, double support_radius, double margin) {
  for (int k = 0; k < g.dim; ++k) {
    if (center[k] - support_radius < margin || center[k] + support_radius > g.extent - margin)
      throw ConfigError("params", "cutoff support reaches within the boundary margin (" +
                                      std::to_string(margin) + ") of the box");
  }
}

void audit_field(const GridSpace& g, CoefficientField& f) {
  double lambda = 0;
  auto visit = [&](const Point& p) {
    Eigen::Matrix2d a = f.eval(p);
    if (g.dim == 1) {
      if (a(0, 0) < -1e-12) throw std::invalid_argument("coefficient field is not PSD");
      lambda = std::max(lambda, std::abs(a(0, 0)));
      return;
    }
    if (std::abs(a(0, 1) - a(1, 0)) > 1e-12 * (1 + a.cwiseAbs().maxCoeff()))
      throw std::invalid_argument("coefficient field is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a);
    if (es.eigenvalues().minCoeff() < -1e-12)
      throw std::invalid_argument("coefficient field is not PSD");
    lambda = std::max(lambda, es.eigenvalues().cwiseAbs().maxCoeff());
  };
  for (int c = 0; c < g.cell_count(); ++c) visit(g.cell_coord(c));
  for (int i = 0; i < g.node_count(); ++i) visit(g.node_coord(i));
  f.lambda_bound = lambda;
}

}  // namespace

CoefficientField make_field(const GridSpace& g, const std::string& preset,
                            const nlohmann::json& params) {
  CoefficientField f;
  f.preset = preset;
  f.dim = g.dim;
  const int dim = g.dim;
  if (preset == "identity") {
    f.eval = [](const Point&) { return Eigen::Matrix2d::Identity(); };
  } else if (preset == "indicator_region") {
    Point lo = read_point(params, "lo", dim);
    Point hi = read_point(params, "hi", dim);
    for (int k = 0; k < dim; ++k)
      if (!(lo[k] < hi[k])) throw ConfigError("lo", "indicator_region needs lo < hi per axis");
    f.eval = [lo, hi, dim](const Point& p) -> Eigen::Matrix2d {
      bool inside = true;
      for (int k = 0; k < dim; ++k) inside = inside && (p[k] >= lo[k] && p[k] <= hi[k]);
      if (inside) return Eigen::Matrix2d::Identity();
      return Eigen::Matrix2d::Zero();
    };
  } else if (preset == "plateau_bump" || preset == "anisotropic_plateau") {
    Point c = read_point(params, "center", dim);
    double r_in = read_positive(params, "r_plateau");
    double r_out = read_positive(params, "r_outer");
    if (!(r_out > r_in)) throw ConfigError("r_outer", "r_outer must exceed r_plateau");
    Eigen::Vector2d eigs(1.0, 1.0);
    if (preset == "anisotropic_plateau") {
      auto e = read_point(params, "eigs", dim);
      eigs << e[0], e[1];
      for (int k = 0; k < dim; ++k)
        if (eigs[k] < 0) throw ConfigError("eigs", "eigs must be nonnegative");
    }
    // Distance to the bump centre is Euclidean: the field is a function on
    // the box, not on the torus, and its support stays interior.
    f.eval = [c, r_in, r_out, eigs, dim](const Point& p) {
      double dx = p[0] - c[0];
      double dy = dim == 2 ? p[1] - c[1] : 0.0;
      double psi = plateau_profile(std::hypot(dx, dy), r_in, r_out);
      Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
      a(0, 0) = psi * eigs[0];
      a(1, 1) = psi * eigs[1];
      return a;
    };
  } else {
    throw ConfigError("preset", "unknown coefficient preset '" + preset + "'");
  }
  audit_field(g, f);
  return f;
}

std::vector<std::string> field_presets() {
  return {"anisotropic_plateau", "identity", "indicator_region", "plateau_bump"};
}

Eigen::VectorXd Cutoff::node_samples(const GridSpace& g) const {
  Eigen::VectorXd v(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) v[i] = eval(g.node_coord(i));
  return v;
}

Eigen::VectorXd Cutoff::cell_samples(const GridSpace& g) const {
  Eigen::VectorXd v(g.cell_count());
  for (int c = 0; c < g.cell_count(); ++c) v[c] = eval(g.cell_coord(c));
  return v;
}

Cutoff make_cutoff(const GridSpace& g, const std::string& preset, const nlohmann::json& params) {
  Cutoff chi;
  chi.preset = preset;
  const int dim = g.dim;
  const double margin = params.value("margin", 2.0 * g.spacing);
  if (preset == "constant") {
    double value = params.value("value", 1.0);
    chi.sup_norm = std::abs(value);
    chi.grad_sup = 0.0;
    chi.compactly_supported = false;
    chi.support_radius = std::numeric_limits<double>::infinity();
    chi.eval = [value](const Point&) { return value; };
    return chi;
  }
  if (preset == "plateau") {
    Point c = read_point(params, "center", dim);
    double r_in = read_positive(params, "r_inner");
    double r_out = read_positive(params, "r_outer");
    if (!(r_out > r_in)) throw ConfigError("r_outer", "r_outer must exceed r_inner");
    check_margin(g, c, r_out, margin);
    chi.center = c;
    chi.support_radius = r_out;
    chi.sup_norm = 1.0;
    chi.grad_sup = radial_gradient_sup(
        [r_in, r_out](double r) { return plateau_profile(r, r_in, r_out); }, r_out * 1.25);
    chi.eval = [c, r_in, r_out, dim](const Point& p) {
      double dx = p[0] - c[0];
      double dy = dim == 2 ? p[1] - c[1] : 0.0;
      return plateau_profile(std::hypot(dx, dy), r_in, r_out);
    };
    return chi;
  }
  if (preset == "smooth_bump") {
    Point c = read_point(params, "center", dim);
    double radius = read_positive(params, "radius");
    check_margin(g, c, radius, margin);
    chi.center = c;
    chi.support_radius = radius;
    chi.sup_norm = 1.0;
    chi.grad_sup =
        radial_gradient_sup([radius](double r) { return bump_profile(r / radius); }, radius * 1.25);
    chi.eval = [c, radius, dim](const Point& p) {
      double dx = p[0] - c[0];
      double dy = dim == 2 ? p[1] - c[1] : 0.0;
      return bump_profile(std::hypot(dx, dy) / radius);
    };
    return chi;
  }
  throw ConfigError("preset", "unknown cutoff preset '" + preset + "'");
}

std::vector<std::string> cutoff_presets() { return {"constant", "plateau", "smooth_bump"}; }

Eigen::VectorXd Region::node_indicator(const GridSpace& g) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(g.node_count());
  for (int i : nodes) v[i] = 1.0;
  return v;
}

std::vector<int> Region::cells(const GridSpace& g) const {
  std::vector<int> out;
  for (int c = 0; c < g.cell_count(); ++c)
    if (contains(g.cell_coord(c))) out.push_back(c);
  return out;
}

Region make_region(const GridSpace& g, const std::string& preset, const nlohmann::json& params) {
  Region r;
  r.preset = preset;
  const int dim = g.dim;
  if (preset == "all") {
    r.contains = [](const Point&) { return true; };
  } else if (preset == "box") {
    Point lo = read_point(params, "lo", dim);
    Point hi = read_point(params, "hi", dim);
    for (int k = 0; k < dim; ++k)
      if (!(lo[k] < hi[k])) throw ConfigError("lo", "box region needs lo < hi per axis");
    r.contains = [lo, hi, dim](const Point& p) {
      for (int k = 0; k < dim; ++k)
        if (p[k] < lo[k] || p[k] > hi[k]) return false;
      return true;
    };
  } else if (preset == "ball") {
    Point c = read_point(params, "center", dim);
    double radius = read_positive(params, "radius");
    GridSpace metric = g;  // region metric matches the space metric
    r.contains = [c, radius, metric](const Point& p) { return metric.distance(p, c) < radius; };
  } else {
    throw ConfigError("preset", "unknown region preset '" + preset + "'");
  }
  for (int i = 0; i < g.node_count(); ++i)
    if (r.contains(g.node_coord(i))) r.nodes.push_back(i);
  return r;
}

std::vector<std::string> region_presets() { return {"all", "ball", "box"}; }

EllipticityReport ellipticity_check(const GridSpace& g, const CoefficientField& field,
                                    std::span<const int> cells, double mu) {
  EllipticityReport rep;
  rep.mu = mu;
  rep.cells_checked = static_cast<int>(cells.size());
  double min_eig = std::numeric_limits<double>::infinity();
  for (int c : cells) {
    Eigen::Matrix2d a = field.eval(g.cell_coord(c));
    if (g.dim == 1) {
      min_eig = std::min(min_eig, a(0, 0));
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
  }
  if (cells.empty()) min_eig = 0;
  rep.min_eig = min_eig;
  rep.pass = min_eig >= mu - 1e-12;
  return rep;
}

std::vector<int> support_cells(const GridSpace& g, const Cutoff& chi) {
  std::vector<int> out;
  for (int c = 0; c < g.cell_count(); ++c)
    if (std::abs(chi.eval(g.cell_coord(c))) > 0) out.push_back(c);
  return out;
}

}  // namespace deglab
