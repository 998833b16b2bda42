#include "deglab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "deglab/common.hpp"

namespace deglab {

namespace {

using cplx = std::complex<double>;

constexpr double kExpGuard = 700.0;  // largest exponent fed to std::exp

std::vector<Point> node_coords(const GridSpace& g) {
  std::vector<Point> pts(g.node_count());
  for (int i = 0; i < g.node_count(); ++i) pts[i] = g.node_coord(i);
  return pts;
}

std::vector<Point> cell_coords(const GridSpace& g) {
  std::vector<Point> pts(g.cell_count());
  for (int c = 0; c < g.cell_count(); ++c) pts[c] = g.cell_coord(c);
  return pts;
}

}  // namespace

std::pair<double, double> time_validity_window(const GridSpace& g) {
  double h = g.spacing;
  double quarter = g.extent / 4.0;
  return {4.0 * h * h, quarter * quarter};
}

KernelMatrix kernel_of(const DiscreteOperator& t) {
  if (t.space == nullptr) throw std::invalid_argument("kernel_of: operator has no space");
  KernelMatrix k;
  k.space = t.space;
  k.output = t.codomain;
  k.tag = t.tag;
  double in_measure =
      t.domain == Stagger::node ? t.space->node_measure() : t.space->cell_volume();
  k.k = t.mat / in_measure;
  return k;
}

Eigen::MatrixXd abs_kernel(const SpectralDecomposition& h, const Eigen::VectorXd* left,
                           const std::function<std::complex<double>(double)>& f, bool real_valued,
                           const Eigen::VectorXd* right) {
  const int n = h.size();
  if (real_valued) {
    Eigen::VectorXd fvals(n);
    for (int i = 0; i < n; ++i) fvals[i] = f(h.lambda[i]).real();
    Eigen::MatrixXd v_left = h.vectors;
    if (left) v_left.array().colwise() *= left->array();
    Eigen::MatrixXd v_right = h.vectors;
    if (right) v_right.array().colwise() *= right->array();
    return (v_left * fvals.asDiagonal() * v_right.transpose()).cwiseAbs();
  }
  Eigen::VectorXcd fvals(n);
  for (int i = 0; i < n; ++i) fvals[i] = f(h.lambda[i]);
  Eigen::MatrixXcd v_left = h.vectors.cast<cplx>();
  if (left) v_left.array().colwise() *= left->array().cast<cplx>();
  Eigen::MatrixXcd v_right = h.vectors.cast<cplx>();
  if (right) v_right.array().colwise() *= right->array().cast<cplx>();
  return (v_left * fvals.asDiagonal() * v_right.transpose()).cwiseAbs();
}

GaussianFit gaussian_fit(const GridSpace& g,
                         const std::function<Eigen::MatrixXd(double)>& abs_kernel_at,
                         const std::vector<double>& t_grid, std::span<const double> c_grid,
                         bool with_growth_factor, double pair_window, double c_ref) {
  if (t_grid.empty()) throw std::invalid_argument("gaussian_fit: empty t_grid");
  if (c_grid.empty()) throw std::invalid_argument("gaussian_fit: empty c_grid");
  GaussianFit fit;
  fit.c_grid.assign(c_grid.begin(), c_grid.end());
  fit.t_grid = t_grid;
  fit.c_ref = c_ref;
  fit.with_growth_factor = with_growth_factor;
  fit.pair_window = pair_window;
  auto [w0, w1] = time_validity_window(g);
  fit.t_window_min = w0;
  fit.t_window_max = w1;

  const auto pts = node_coords(g);
  const double mu = g.node_measure();
  (void)mu;
  const double d_half = g.dim / 2.0;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> best(c_grid.size(), neg_inf);
  fit.c_ref_per_t.assign(t_grid.size(), 0.0);
  fit.t_in_window.assign(t_grid.size(), true);

  for (size_t ti = 0; ti < t_grid.size(); ++ti) {
    const double t = t_grid[ti];
    if (!(t > 0)) throw std::invalid_argument("gaussian_fit: t must be positive");
    fit.t_in_window[ti] = (t >= w0 && t <= w1);
    Eigen::MatrixXd k = abs_kernel_at(t);
    const int n = static_cast<int>(k.rows());
    if (k.cols() != n || n != g.node_count())
      throw std::invalid_argument("gaussian_fit: kernel must be node x node");
    const double rho_max = pair_window * std::sqrt(t);
    const double base_t = d_half * std::log(t) - (with_growth_factor ? d_half * std::log1p(t) : 0.0);
    double best_ref = neg_inf;
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        const double v = k(x, y);
        if (!(v > 0)) continue;
        const double rho = g.distance(pts[x], pts[y]);
        if (rho > rho_max) continue;
        const double q = rho * rho / t;
        const double base = std::log(v) + base_t;
        for (size_t ci = 0; ci < c_grid.size(); ++ci) {
          double cand = base + c_grid[ci] * q;
          if (cand > best[ci]) best[ci] = cand;
        }
        double cand_ref = base + c_ref * q;
        if (cand_ref > best_ref) best_ref = cand_ref;
      }
    }
    fit.c_ref_per_t[ti] = best_ref == neg_inf ? 0.0 : std::exp(best_ref);
  }
  fit.c_values.resize(c_grid.size());
  for (size_t ci = 0; ci < c_grid.size(); ++ci)
    fit.c_values[ci] = best[ci] == neg_inf ? 0.0 : std::exp(best[ci]);
  return fit;
}

std::vector<SupBoundsRow> sup_bounds(const GridSpace& g, const SpectralDecomposition& h,
                                     const Eigen::VectorXd& chi_nodes,
                                     const std::vector<double>& t_grid) {
  std::vector<SupBoundsRow> rows;
  rows.reserve(t_grid.size());
  auto [w0, w1] = time_validity_window(g);
  const double mu = g.node_measure();
  const double d4 = g.dim / 4.0;
  const double d2 = g.dim / 2.0;
  for (double t : t_grid) {
    if (!(t > 0)) throw std::invalid_argument("sup_bounds: t must be positive");
    auto heat = [t](double l) { return cplx(std::exp(-t * l), 0); };
    Eigen::MatrixXd k1 = abs_kernel(h, &chi_nodes, heat, true, nullptr);
    Eigen::MatrixXd k2 = abs_kernel(h, &chi_nodes, heat, true, &chi_nodes);
    SupBoundsRow row;
    row.t = t;
    row.two_inf = std::sqrt((k1.array().square().rowwise().sum() * mu).maxCoeff());
    row.one_inf = k2.maxCoeff();
    row.two_inf_normalized = row.two_inf * std::pow(t, d4) * std::pow(1.0 + t, -d4);
    row.one_inf_normalized = row.one_inf * std::pow(t, d2) * std::pow(1.0 + t, -d2);
    row.in_window = (t >= w0 && t <= w1);
    rows.push_back(row);
  }
  return rows;
}

ComplexTimeReport complex_time_check(const GridSpace& g, const SpectralDecomposition& h,
                                     const Eigen::VectorXd& chi_left,
                                     const Eigen::VectorXd& chi_right,
                                     const std::vector<std::complex<double>>& z_grid,
                                     double extra_damp, double c_rate, double pair_window) {
  ComplexTimeReport rep;
  rep.c_rate = c_rate;
  rep.pair_window = pair_window;
  const auto pts = node_coords(g);
  auto [w0, w1] = time_validity_window(g);
  const double d_half = g.dim / 2.0;
  for (cplx z : z_grid) {
    if (!(z.real() > 0)) throw std::invalid_argument("complex_time_check: need Re z > 0");
    const double mod = std::abs(z);
    const double cos_arg = z.real() / mod;
    Eigen::MatrixXd k =
        abs_kernel(h, &chi_left, [z](double l) { return std::exp(-z * l); }, false, &chi_right);
    k *= std::exp(-extra_damp * z.real());
    const double rho_max = pair_window * std::sqrt(mod / cos_arg);
    const int n = static_cast<int>(k.rows());
    double best = 0;
    for (int x = 0; x < n; ++x) {
      for (int y = 0; y < n; ++y) {
        const double v = k(x, y);
        if (!(v > 0)) continue;
        const double rho = g.distance(pts[x], pts[y]);
        if (rho > rho_max) continue;
        double expo = c_rate * rho * rho * cos_arg / mod;
        if (expo > kExpGuard) continue;
        best = std::max(best, v * std::pow(z.real(), d_half) * std::exp(expo));
      }
    }
    ComplexTimeRow row;
    row.z = z;
    row.constant = best;
    row.in_window = (mod >= w0 && mod <= w1);
    rep.rows.push_back(row);
    rep.sup = std::max(rep.sup, best);
  }
  return rep;
}

OffDiagonalProfile off_diagonal_profile(const GridSpace& g, const SpectralDecomposition& h,
                                        const Eigen::VectorXd& chi_nodes,
                                        const std::vector<double>& t_grid,
                                        std::span<const int> x_samples, int q0, int j_max,
                                        std::uint64_t seed) {
  if (q0 < 1) throw std::invalid_argument("off_diagonal_profile: q0 must be >= 1");
  if (j_max < 1) throw std::invalid_argument("off_diagonal_profile: j_max must be >= 1");
  OffDiagonalProfile prof;
  prof.q0 = q0;
  prof.g.assign(j_max, 0.0);
  const double mu = g.node_measure();
  bool noted_empty = false;

  for (size_t ti = 0; ti < t_grid.size(); ++ti) {
    const double t = t_grid[ti];
    if (!(t > 0)) throw std::invalid_argument("off_diagonal_profile: t must be positive");
    // A_t = e^{-t^2 H} diag(chi)
    Eigen::MatrixXd at =
        h.apply([t](double l) { return std::exp(-t * t * l); }) * chi_nodes.asDiagonal();
    for (int x : x_samples) {
      std::vector<int> ball = g.ball(x, t);
      if (ball.empty()) {
        if (!noted_empty) {
          prof.notes.push_back("ball empty at the smallest t; samples skipped");
          noted_empty = true;
        }
        continue;
      }
      const double v_ball = g.volume(ball);
      // test family: indicator of the ball, unit-mass delta, random nonneg
      std::vector<Eigen::VectorXd> tests;
      Eigen::VectorXd ind = Eigen::VectorXd::Zero(g.node_count());
      for (int i : ball) ind[i] = 1.0;
      tests.push_back(ind);
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(g.node_count());
      delta[x] = 1.0 / mu;
      tests.push_back(delta);
      Rng rng(seed + 1000003ull * ti + static_cast<std::uint64_t>(x));
      Eigen::VectorXd rnd = Eigen::VectorXd::Zero(g.node_count());
      for (int i : ball) rnd[i] = rng.uniform();
      tests.push_back(rnd);

      for (const Eigen::VectorXd& u : tests) {
        double denom = 0;
        for (int i : ball) denom += std::abs(u[i]) * mu;
        denom /= v_ball;
        if (!(denom > 0)) continue;
        Eigen::VectorXd au = at * u;
        for (int j = 1; j <= j_max; ++j) {
          std::vector<int> ring = g.annulus(x, j, t);
          if (ring.empty()) continue;  // beyond the box at this scale
          const double v_j = g.volume(g.ball(x, std::ldexp(t, j + 1)));
          double acc = 0;
          for (int i : ring) acc += std::pow(std::abs(au[i]), q0) * mu;
          double num = std::pow(acc / v_j, 1.0 / q0);
          prof.g[j - 1] = std::max(prof.g[j - 1], num / denom);
        }
      }
    }
  }

  prof.weighted_partial.resize(j_max);
  double acc = 0;
  for (int j = 1; j <= j_max; ++j) {
    acc += std::ldexp(1.0, j * g.dim) * prof.g[j - 1];
    prof.weighted_partial[j - 1] = acc;
  }
  const double total = prof.weighted_partial.back();
  const int j_sat = std::min(5, j_max);
  prof.saturation_ratio = total > 0 ? (total - prof.weighted_partial[j_sat - 1]) / total : 0.0;
  return prof;
}

DMReport dm_condition(const GridSpace& g,
                      const std::function<Eigen::MatrixXd(double)>& absdiff_kernel_at,
                      Stagger out_stagger, const std::vector<double>& t_grid, double delta,
                      std::span<const int> x_samples) {
  if (!(delta > 0)) throw std::invalid_argument("dm_condition: delta must be positive");
  DMReport rep;
  rep.delta = delta;
  rep.t_grid = t_grid;
  const auto col_pts = node_coords(g);
  const auto row_pts = out_stagger == Stagger::node ? col_pts : cell_coords(g);
  const double row_measure =
      out_stagger == Stagger::node ? g.node_measure() : g.cell_volume();
  const int n_rows = static_cast<int>(row_pts.size());
  const int n_cols = static_cast<int>(col_pts.size());

  for (double t : t_grid) {
    if (!(t > 0)) throw std::invalid_argument("dm_condition: t must be positive");
    Eigen::MatrixXd dk = absdiff_kernel_at(t);
    if (dk.rows() != n_rows || dk.cols() != n_cols)
      throw std::invalid_argument("dm_condition: kernel shape mismatch");

    // kernel form: sup_y of the far-mass of the column
    double w_kernel = 0;
    for (int y = 0; y < n_cols; ++y) {
      double acc = 0;
      for (int r = 0; r < n_rows; ++r) {
        if (g.distance(row_pts[r], col_pts[y]) >= delta * t) acc += dk(r, y) * row_measure;
      }
      w_kernel = std::max(w_kernel, acc);
    }
    rep.w_kernel_per_t.push_back(w_kernel);

    // operator form: inputs supported in B(x,t), mass outside B(x,(1+delta)t);
    // the sup over unit-L1 inputs is attained at normalized deltas
    double w_op = 0;
    for (int x : x_samples) {
      const Point cx = g.node_coord(x);
      std::vector<int> far;
      for (int r = 0; r < n_rows; ++r)
        if (g.distance(row_pts[r], cx) >= (1.0 + delta) * t) far.push_back(r);
      for (int y : g.ball(x, t)) {
        double acc = 0;
        for (int r : far) acc += dk(r, y) * row_measure;
        w_op = std::max(w_op, acc);
      }
    }
    rep.w_operator_per_t.push_back(w_op);
  }
  rep.w_kernel = *std::max_element(rep.w_kernel_per_t.begin(), rep.w_kernel_per_t.end());
  rep.w_operator = *std::max_element(rep.w_operator_per_t.begin(), rep.w_operator_per_t.end());
  return rep;
}

KernelMomentReport weighted_kernel_moment(const GridSpace& g, const SpectralDecomposition& h,
                                          const Eigen::VectorXd& chi, const MultiplierFunction& f,
                                          double r, double s, double eps_s,
                                          std::span<const int> y_samples) {
  if (!(r > 0)) throw std::invalid_argument("weighted_kernel_moment: r must be positive");
  if (s < 0) throw std::invalid_argument("weighted_kernel_moment: s must be nonnegative");
  // support precondition: F must vanish above r on the spectrum
  double fmax = 0;
  for (int i = 0; i < h.size(); ++i) fmax = std::max(fmax, std::abs(f.fn(h.lambda[i])));
  for (int i = 0; i < h.size(); ++i) {
    if (h.lambda[i] > r && std::abs(f.fn(h.lambda[i])) > 1e-12 * std::max(1.0, fmax))
      throw std::invalid_argument(
          "weighted_kernel_moment: multiplier not supported in [0, r] on the spectrum");
  }
  Eigen::MatrixXd k = abs_kernel(h, &chi, f.fn, f.real_valued, &chi);
  const auto pts = node_coords(g);
  const double mu = g.node_measure();
  const double sqrt_r = std::sqrt(r);
  const int n = g.node_count();

  std::vector<int> ys(y_samples.begin(), y_samples.end());
  if (ys.empty()) {
    ys.resize(n);
    for (int i = 0; i < n; ++i) ys[i] = i;
  }
  KernelMomentReport rep;
  for (int y : ys) {
    double acc = 0;
    for (int x = 0; x < n; ++x) {
      double v = k(x, y);
      if (v == 0) continue;
      double w = std::pow(1.0 + sqrt_r * g.distance(pts[x], pts[y]), s);
      acc += v * v * w * mu;
    }
    rep.per_y.emplace_back(y, acc);
    rep.lhs_sup = std::max(rep.lhs_sup, acc);
  }
  MultiplierFunction scaled = scale_multiplier(f, r);
  double norm = holder_norm(scaled.fn, 0.0, 1.25, s / 2.0 + eps_s);
  rep.rhs = std::pow(r, g.dim / 2.0) * norm * norm;
  rep.ratio = rep.rhs > 0 ? rep.lhs_sup / rep.rhs : 0.0;
  return rep;
}

OscillationTable dyadic_oscillation(const GridSpace& g, const SpectralDecomposition& h,
                                    const Eigen::VectorXd& chi, const MultiplierFunction& f,
                                    const DyadicPartition& partition, double s,
                                    const std::vector<double>& t_grid, int n_min, int n_max) {
  if (n_max < n_min) throw std::invalid_argument("dyadic_oscillation: bad n range");
  if (t_grid.empty()) throw std::invalid_argument("dyadic_oscillation: empty t_grid");
  holder_order(s);
  OscillationTable tab;
  for (int n = n_min; n <= n_max; ++n) tab.n_values.push_back(n);
  tab.t_grid = t_grid;
  tab.i_table.setZero(static_cast<int>(tab.n_values.size()), static_cast<int>(t_grid.size()));
  const auto pts = node_coords(g);
  const double mu = g.node_measure();
  const int nn = g.node_count();

  for (size_t ni = 0; ni < tab.n_values.size(); ++ni) {
    const int n = tab.n_values[ni];
    const double scale = std::ldexp(1.0, -n);  // 2^{-n}
    for (size_t ti = 0; ti < t_grid.size(); ++ti) {
      const double t = t_grid[ti];
      auto gfun = [&](double l) {
        return partition.phi(scale * l) * f.fn(l) * (1.0 - std::exp(-t * t * l));
      };
      Eigen::MatrixXd k = abs_kernel(h, &chi, gfun, false, &chi);
      double best = 0;
      for (int y = 0; y < nn; ++y) {
        double acc = 0;
        for (int x = 0; x < nn; ++x) {
          if (g.distance(pts[x], pts[y]) >= t) acc += k(x, y) * mu;
        }
        best = std::max(best, acc);
      }
      tab.i_table(static_cast<int>(ni), static_cast<int>(ti)) = best;
    }
  }

  tab.sums_per_t.assign(t_grid.size(), 0.0);
  for (size_t ti = 0; ti < t_grid.size(); ++ti)
    tab.sums_per_t[ti] = tab.i_table.col(static_cast<int>(ti)).sum();

  // the grand total by both summation orders (deterministic-reduction audit)
  double total_by_t = 0;
  for (double v : tab.sums_per_t) total_by_t += v;
  double total_by_n = 0;
  for (int ni = 0; ni < tab.i_table.rows(); ++ni) total_by_n += tab.i_table.row(ni).sum();
  tab.order_check = std::abs(total_by_t - total_by_n);

  // reference shape min(1, t^2 2^n) min(1, (t 2^{n/2})^{d/2 - s}) * mihlin
  std::vector<double> mgrid;
  {
    const int pts_m = 25;
    double lo = std::ldexp(1.0, n_min), hi = std::ldexp(1.0, n_max);
    for (int i = 0; i < pts_m; ++i)
      mgrid.push_back(lo * std::pow(hi / lo, i / double(pts_m - 1)));
  }
  tab.mihlin_value = mihlin_sup(f, partition, s, mgrid).sup;
  double c_star = 0;
  for (size_t ni = 0; ni < tab.n_values.size(); ++ni) {
    for (size_t ti = 0; ti < t_grid.size(); ++ti) {
      const double t = t_grid[ti];
      const double p2n = std::ldexp(1.0, tab.n_values[ni]);
      double env = std::min(1.0, t * t * p2n) *
                   std::min(1.0, std::pow(t * std::sqrt(p2n), g.dim / 2.0 - s)) *
                   tab.mihlin_value;
      if (env > 0)
        c_star = std::max(c_star, tab.i_table(static_cast<int>(ni), static_cast<int>(ti)) / env);
    }
  }
  tab.c_star = c_star;
  return tab;
}

SemigroupMomentResult weighted_semigroup_moment(const GridSpace& g,
                                                const SpectralDecomposition& h,
                                                const Eigen::VectorXd& chi_tilde,
                                                const Eigen::VectorXd& chi,
                                                const GradientMaps* maps,
                                                const Eigen::VectorXd& chi_cells, int x, double t,
                                                double s_time, double beta, bool gradient_flag) {
  if (!(s_time > 0)) throw std::invalid_argument("weighted_semigroup_moment: s must be positive");
  if (!(t > 0)) throw std::invalid_argument("weighted_semigroup_moment: t must be positive");
  if (beta < 0) throw std::invalid_argument("weighted_semigroup_moment: beta must be >= 0");
  if (gradient_flag && maps == nullptr)
    throw std::invalid_argument("weighted_semigroup_moment: gradient flag needs gradient maps");
  SemigroupMomentResult res;
  const double mu = g.node_measure();
  const Point cx = g.node_coord(x);

  Eigen::MatrixXd et = h.apply([s_time](double l) { return std::exp(-s_time * l); });

  std::vector<Eigen::VectorXd> tests;
  {
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(g.node_count());
    delta[x] = 1.0 / mu;
    tests.push_back(delta);
    std::vector<int> ball = g.ball(x, t);
    if (!ball.empty()) {
      Eigen::VectorXd ind = Eigen::VectorXd::Zero(g.node_count());
      double v = g.volume(ball);
      for (int i : ball) ind[i] = 1.0 / v;
      tests.push_back(ind);
    }
  }

  for (const Eigen::VectorXd& u : tests) {
    Eigen::VectorXd v = et * chi.cwiseProduct(u);
    double acc = 0;
    bool overflow = false;
    if (!gradient_flag) {
      for (int y = 0; y < g.node_count(); ++y) {
        double w = chi_tilde[y] * v[y];
        if (w == 0) continue;
        double rho = g.distance(g.node_coord(y), cx);
        double expo = beta * rho * rho / s_time;
        if (expo > kExpGuard) {
          overflow = true;
          break;
        }
        acc += w * w * std::exp(expo) * mu;
      }
    } else {
      const double vol = g.cell_volume();
      for (int axis = 0; axis < g.dim; ++axis) {
        Eigen::VectorXd gv = maps->g[axis] * v;
        for (int c = 0; c < g.cell_count(); ++c) {
          double w = chi_cells[c] * gv[c];
          if (w == 0) continue;
          double rho = g.distance(g.cell_coord(c), cx);
          double expo = beta * rho * rho / s_time;
          if (expo > kExpGuard) {
            overflow = true;
            break;
          }
          acc += w * w * std::exp(expo) * vol;
        }
        if (overflow) break;
      }
    }
    if (overflow) {
      res.overflow = true;
      continue;
    }
    res.value = std::max(res.value, acc);
  }

  const double d_half = g.dim / 2.0;
  if (!gradient_flag) {
    res.envelope =
        std::pow(s_time, -d_half) * std::exp(2.0 * beta * t * t / s_time) * std::exp(-s_time);
  } else {
    res.envelope = std::pow(s_time, -d_half - 1.0) * std::exp(6.0 * beta * t * t / s_time);
  }
  res.ratio = res.envelope > 0 ? res.value / res.envelope : 0.0;
  return res;
}

double davies_gaffney(const GridSpace& g, const SpectralDecomposition& h,
                      const Eigen::VectorXd& chi_nodes, std::span<const int> e_set,
                      std::span<const int> f_set, double t) {
  if (!(t > 0)) throw std::invalid_argument("davies_gaffney: t must be positive");
  Eigen::MatrixXd k = abs_kernel(
      h, &chi_nodes, [t](double l) { return cplx(std::exp(-t * l), 0); }, true, nullptr);
  const double mu = g.node_measure();
  double best = 0;
  for (int x : f_set) {
    double acc = 0;
    for (int y : e_set) acc += k(x, y) * k(x, y) * mu;
    best = std::max(best, std::sqrt(acc));
  }
  return best;
}

DaviesGaffneyFit davies_gaffney_fit(const GridSpace& g, const SpectralDecomposition& h,
                                    const Eigen::VectorXd& chi_nodes,
                                    const std::vector<SetPair>& pairs,
                                    const std::vector<double>& t_grid) {
  DaviesGaffneyFit fit;
  std::vector<double> us, vs;  // regress log(value t^{d/4}) on D^2/t
  for (const SetPair& pr : pairs) {
    double dist = std::numeric_limits<double>::infinity();
    for (int x : pr.f_set)
      for (int y : pr.e_set) dist = std::min(dist, g.node_distance(x, y));
    if (!(dist > 0)) {
      fit.notes.push_back("pair with touching sets skipped (no decay to fit)");
      continue;
    }
    for (double t : t_grid) {
      double v = davies_gaffney(g, h, chi_nodes, pr.e_set, pr.f_set, t);
      if (!(v > 0)) continue;
      us.push_back(dist * dist / t);
      vs.push_back(std::log(v) + (g.dim / 4.0) * std::log(t));
    }
  }
  fit.points = static_cast<int>(us.size());
  if (fit.points < 2) {
    fit.notes.push_back("not enough points for a regression");
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < fit.points; ++i) {
    sx += us[i];
    sy += vs[i];
    sxx += us[i] * us[i];
    sxy += us[i] * vs[i];
  }
  const double m = fit.points;
  double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  double intercept = (sy - slope * sx) / m;
  fit.c0 = std::exp(intercept);
  if (slope < 0) {
    fit.omega = -1.0 / (4.0 * slope);
  } else {
    fit.omega = std::numeric_limits<double>::infinity();
    fit.notes.push_back("no decay detected (nonnegative slope)");
  }
  return fit;
}

RieszL2Report riesz_l2_check(const GridSpace& g, const SpectralDecomposition& h,
                             const CoefficientField& field, const Cutoff& chi,
                             const GradientMaps& maps, double mu) {
  RieszL2Report rep;
  rep.mu = mu;
  std::vector<int> cells = support_cells(g, chi);
  rep.ellipticity = ellipticity_check(g, field, cells, mu);
  if (!rep.ellipticity.pass)
    throw std::invalid_argument(
        "riesz_l2_check: coefficient field is not elliptic with the given mu on supp(chi)");
  if (h.lambda.minCoeff() <= 0)
    throw std::invalid_argument("riesz_l2_check: operator must be strictly positive");

  Eigen::MatrixXd inv_sqrt = h.apply([](double l) { return 1.0 / std::sqrt(l); });
  Eigen::VectorXd chi_cells = chi.cell_samples(g);
  const double vol = g.cell_volume();
  const double node_mu = g.node_measure();
  rep.bound = chi.sup_norm / std::sqrt(mu);
  rep.pass = true;
  for (int axis = 0; axis < g.dim; ++axis) {
    Eigen::MatrixXd m = chi_cells.asDiagonal() * (maps.g[axis] * inv_sqrt);
    // weighted 2->2 norm: scale rows by sqrt(cell volume), columns by 1/sqrt(mu)
    m *= std::sqrt(vol) / std::sqrt(node_mu);
    Eigen::MatrixXd gram = m.transpose() * m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    double norm = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    rep.norms.push_back(norm);
    rep.margins.push_back(rep.bound * (1.0 + 1e-8) - norm);
    if (norm > rep.bound * (1.0 + 1e-8)) rep.pass = false;
  }
  return rep;
}

std::vector<int> sample_nodes_in_plateau(const GridSpace& g, const Eigen::VectorXd& chi_nodes,
                                         int count, std::uint64_t seed) {
  double top = chi_nodes.maxCoeff();
  if (!(top > 0)) throw std::invalid_argument("sample_nodes_in_plateau: cutoff is zero");
  std::vector<int> plateau;
  for (int i = 0; i < g.node_count(); ++i)
    if (chi_nodes[i] >= std::min(1.0, top) - 1e-9) plateau.push_back(i);
  if (plateau.empty()) throw std::invalid_argument("sample_nodes_in_plateau: cutoff is zero");
  std::vector<int> out;
  const int m = static_cast<int>(plateau.size());
  const int take = std::min(count, m);
  const int offset = static_cast<int>(seed % static_cast<std::uint64_t>(m));
  for (int i = 0; i < take; ++i) {
    int idx = (offset + (i * m) / take) % m;
    out.push_back(plateau[idx]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace deglab
