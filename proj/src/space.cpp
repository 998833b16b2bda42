#include "deglab/space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "deglab/common.hpp"

namespace deglab {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

double axis_distance(double a, double b, double extent, Boundary boundary) {
  double d = std::abs(a - b);
  if (boundary == Boundary::periodic) d = std::min(d, extent - d);
  return d;
}

}  // namespace

int GridSpace::node_count() const {
  int n = nodes_per_axis;
  return dim == 1 ? n : n * n;
}

int GridSpace::cells_per_axis() const {
  return boundary == Boundary::periodic ? nodes_per_axis : nodes_per_axis - 1;
}

int GridSpace::cell_count() const {
  int c = cells_per_axis();
  return dim == 1 ? c : c * c;
}

std::array<int, 2> GridSpace::node_split(int node) const {
  return {node % nodes_per_axis, node / nodes_per_axis};
}

std::array<int, 2> GridSpace::cell_split(int cell) const {
  return {cell % cells_per_axis(), cell / cells_per_axis()};
}

Point GridSpace::node_coord(int node) const {
  auto [ix, iy] = node_split(node);
  return {(ix + 0.5) * spacing, dim == 2 ? (iy + 0.5) * spacing : 0.0};
}

Point GridSpace::cell_coord(int cell) const {
  auto [jx, jy] = cell_split(cell);
  auto centre = [&](int j) {
    double c = (j + 1) * spacing;
    if (boundary == Boundary::periodic && c >= extent) c -= extent;
    return c;
  };
  return {centre(jx), dim == 2 ? centre(jy) : 0.0};
}

double GridSpace::node_measure() const { return std::pow(spacing, dim); }

double GridSpace::cell_volume() const { return std::pow(spacing, dim); }

Eigen::VectorXd GridSpace::node_measures() const {
  return Eigen::VectorXd::Constant(node_count(), node_measure());
}

double GridSpace::total_measure() const { return node_measure() * node_count(); }

double GridSpace::distance(const Point& a, const Point& b) const {
  double dx = axis_distance(a[0], b[0], extent, boundary);
  if (dim == 1) return dx;
  double dy = axis_distance(a[1], b[1], extent, boundary);
  return std::hypot(dx, dy);
}

double GridSpace::node_distance(int a, int b) const {
  return distance(node_coord(a), node_coord(b));
}

std::vector<int> GridSpace::ball(int center_node, double radius) const {
  std::vector<int> out;
  const Point c = node_coord(center_node);
  const int n = node_count();
  for (int i = 0; i < n; ++i) {
    if (distance(node_coord(i), c) < radius) out.push_back(i);
  }
  return out;
}

std::vector<int> GridSpace::annulus(int center_node, int j, double radius) const {
  if (j < 1) throw std::invalid_argument("annulus: j must be >= 1");
  const Point c = node_coord(center_node);
  const int n = node_count();
  std::vector<int> out;
  if (j == 1) {
    for (int i = 0; i < n; ++i) {
      if (distance(node_coord(i), c) < 4.0 * radius) out.push_back(i);
    }
    return out;
  }
  const double lo = std::ldexp(radius, j);       // 2^j r
  const double hi = std::ldexp(radius, j + 1);   // 2^{j+1} r
  for (int i = 0; i < n; ++i) {
    double d = distance(node_coord(i), c);
    if (d >= lo && d < hi) out.push_back(i);
  }
  return out;
}

double GridSpace::volume(std::span<const int> nodes) const {
  return static_cast<double>(nodes.size()) * node_measure();
}

std::array<int, 4> GridSpace::cell_corners(int cell) const {
  auto [jx, jy] = cell_split(cell);
  const int n = nodes_per_axis;
  auto next = [&](int j) { return boundary == Boundary::periodic ? (j + 1) % n : j + 1; };
  if (dim == 1) return {jx, next(jx), -1, -1};
  int x0 = jx, x1 = next(jx), y0 = jy, y1 = next(jy);
  return {node_index(x0, y0), node_index(x1, y0), node_index(x0, y1), node_index(x1, y1)};
}

GridSpace build_grid(int dim, double extent, int nodes_per_axis, Boundary boundary) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("build_grid: dim must be 1 or 2");
  if (!(extent > 0)) throw std::invalid_argument("build_grid: extent must be positive");
  if (!is_power_of_two(nodes_per_axis) || nodes_per_axis < 2)
    throw std::invalid_argument("build_grid: nodes_per_axis must be a power of two >= 2");
  long total = dim == 1 ? nodes_per_axis : static_cast<long>(nodes_per_axis) * nodes_per_axis;
  if (total > 4096)
    throw std::invalid_argument("build_grid: node count exceeds the dense budget of 4096");
  GridSpace g;
  g.dim = dim;
  g.extent = extent;
  g.nodes_per_axis = nodes_per_axis;
  g.boundary = boundary;
  g.spacing = extent / nodes_per_axis;
  return g;
}

DoublingReport doubling_report(const GridSpace& g, int sample_count, std::uint64_t seed) {
  if (sample_count < 8) throw std::invalid_argument("doubling_report: need at least 8 samples");
  Rng rng(seed);
  DoublingReport rep;
  rep.r_min = 2.0 * g.spacing;
  rep.r_max = g.extent / 4.0;
  rep.samples = sample_count;

  // Ratios are collected for lambda = 2 (the doubling constant proper) and a
  // random lambda per sample; the exponent comes from a log-log fit.
  std::vector<double> log_lambda, log_ratio;
  struct Triple {
    double lambda, ratio;
  };
  std::vector<Triple> triples;
  const double r_fit_max = g.extent / 8.0;  // keep lambda*r within the scaling window
  for (int s = 0; s < sample_count; ++s) {
    int x = rng.uniform_int(g.node_count());
    double r = std::exp(rng.uniform(std::log(rep.r_min), std::log(r_fit_max)));
    double v_r = g.volume(g.ball(x, r));
    if (v_r <= 0) continue;
    double lambda_cap = std::min(4.0, (g.extent / 2.0) / r);
    std::vector<double> lambdas = {2.0};
    if (lambda_cap > 1.25) lambdas.push_back(rng.uniform(1.25, lambda_cap));
    for (double lam : lambdas) {
      if (lam * r > g.extent / 2.0) continue;
      double v_lr = g.volume(g.ball(x, lam * r));
      double ratio = v_lr / v_r;
      triples.push_back({lam, ratio});
      log_lambda.push_back(std::log(lam));
      log_ratio.push_back(std::log(ratio));
      if (std::abs(lam - 2.0) < 1e-12) rep.c0 = std::max(rep.c0, ratio);
    }
  }
  // least squares slope of log ratio against log lambda (with intercept)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(log_lambda.size());
  for (size_t i = 0; i < log_lambda.size(); ++i) {
    sx += log_lambda[i];
    sy += log_ratio[i];
    sxx += log_lambda[i] * log_lambda[i];
    sxy += log_lambda[i] * log_ratio[i];
  }
  double denom = m * sxx - sx * sx;
  rep.d_eff = denom > 0 ? (m * sxy - sx * sy) / denom : 0.0;
  rep.c1 = 0;
  for (const auto& t : triples) {
    rep.c1 = std::max(rep.c1, t.ratio / std::pow(t.lambda, rep.d_eff));
  }
  return rep;
}

std::vector<int> cube_nodes(const GridSpace& g, const DyadicCube& c) {
  if (c.side < 1 || !((c.side & (c.side - 1)) == 0))
    throw std::invalid_argument("cube_nodes: side must be a power of two");
  std::vector<int> out;
  if (g.dim == 1) {
    out.reserve(c.side);
    for (int i = 0; i < c.side; ++i) out.push_back(c.origin[0] + i);
    return out;
  }
  out.reserve(static_cast<size_t>(c.side) * c.side);
  for (int iy = 0; iy < c.side; ++iy)
    for (int ix = 0; ix < c.side; ++ix)
      out.push_back(g.node_index(c.origin[0] + ix, c.origin[1] + iy));
  return out;
}

}  // namespace deglab
