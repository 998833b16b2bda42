#include "deglab/czkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "deglab/common.hpp"

namespace deglab {

namespace {

using cplx = std::complex<double>;

struct CubeStats {
  double abs_avg;
  double signed_avg;
};

CubeStats cube_stats(const GridSpace& g, const Eigen::VectorXd& f, const std::vector<int>& nodes) {
  const double mu = g.node_measure();
  double abs_sum = 0, sum = 0;
  for (int i : nodes) {
    abs_sum += std::abs(f[i]) * mu;
    sum += f[i] * mu;
  }
  const double measure = mu * static_cast<double>(nodes.size());
  return {abs_sum / measure, sum / measure};
}

void select_cubes(const GridSpace& g, const Eigen::VectorXd& f, double alpha,
                  const DyadicCube& cube, std::vector<DyadicCube>& selected) {
  std::vector<int> nodes = cube_nodes(g, cube);
  if (cube_stats(g, f, nodes).abs_avg > alpha) {
    selected.push_back(cube);
    return;
  }
  if (cube.side == 1) return;
  const int half = cube.side / 2;
  if (g.dim == 1) {
    for (int ix = 0; ix < 2; ++ix) {
      DyadicCube child{{cube.origin[0] + ix * half, 0}, half};
      select_cubes(g, f, alpha, child, selected);
    }
    return;
  }
  for (int iy = 0; iy < 2; ++iy) {
    for (int ix = 0; ix < 2; ++ix) {
      DyadicCube child{{cube.origin[0] + ix * half, cube.origin[1] + iy * half}, half};
      select_cubes(g, f, alpha, child, selected);
    }
  }
}

}  // namespace

CZDecomposition cz_decompose(const GridSpace& g, const Eigen::VectorXd& f, double alpha) {
  if (f.size() != g.node_count()) throw std::invalid_argument("cz_decompose: wrong vector length");
  const double mu = g.node_measure();
  const double f_l1 = f.cwiseAbs().sum() * mu;
  if (!(alpha > f_l1 / g.total_measure()))
    throw std::invalid_argument("cz_decompose: alpha must exceed the global average of |f|");

  CZDecomposition dec;
  dec.alpha = alpha;
  DyadicCube root{{0, 0}, g.nodes_per_axis};
  std::vector<DyadicCube> selected;
  select_cubes(g, f, alpha, root, selected);

  dec.good = f;
  Eigen::VectorXd overlap_count = Eigen::VectorXd::Zero(g.node_count());
  double bad_ratio_max = 0;
  for (const DyadicCube& q : selected) {
    CZPiece piece;
    piece.cube = q;
    piece.nodes = cube_nodes(g, q);
    const double avg = cube_stats(g, f, piece.nodes).signed_avg;
    piece.values.resize(static_cast<int>(piece.nodes.size()));
    for (size_t i = 0; i < piece.nodes.size(); ++i) {
      piece.values[static_cast<int>(i)] = f[piece.nodes[i]] - avg;
      dec.good[piece.nodes[i]] = avg;
    }
    piece.center = {(q.origin[0] + q.side / 2.0) * g.spacing,
                    g.dim == 2 ? (q.origin[1] + q.side / 2.0) * g.spacing : 0.0};
    double max_dist = 0;
    for (int i : piece.nodes)
      max_dist = std::max(max_dist, g.distance(g.node_coord(i), piece.center));
    piece.radius = max_dist + g.spacing / 2.0;

    std::vector<int> ball;
    for (int i = 0; i < g.node_count(); ++i)
      if (g.distance(g.node_coord(i), piece.center) < piece.radius) ball.push_back(i);
    const double v_ball = g.volume(ball);
    for (int i : ball) overlap_count[i] += 1.0;
    dec.mass_sum += v_ball;

    double b_l1 = piece.values.cwiseAbs().sum() * mu;
    bad_ratio_max = std::max(bad_ratio_max, b_l1 / v_ball);
    dec.bad.push_back(std::move(piece));
  }

  dec.c_good = dec.good.cwiseAbs().maxCoeff() / alpha;
  dec.c_bad = bad_ratio_max / alpha;
  dec.c_mass = f_l1 > 0 ? dec.mass_sum * alpha / f_l1 : 0.0;
  dec.overlap = overlap_count.maxCoeff();

  Eigen::VectorXd rebuilt = dec.good;
  for (const CZPiece& piece : dec.bad)
    for (size_t i = 0; i < piece.nodes.size(); ++i)
      rebuilt[piece.nodes[i]] += piece.values[static_cast<int>(i)];
  dec.reconstruction_error = (rebuilt - f).cwiseAbs().maxCoeff();
  return dec;
}

double weak_l1_norm(const Eigen::VectorXd& values, const Eigen::VectorXd& measures) {
  if (values.size() != measures.size())
    throw std::invalid_argument("weak_l1_norm: length mismatch");
  const int n = static_cast<int>(values.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  // sup_a a mu{|f| > a}: the sup is attained just below one of the values;
  // cumulative measure through each sorted prefix handles ties.
  double cum = 0, best = 0;
  for (int i = 0; i < n; ++i) {
    cum += measures[order[i]];
    best = std::max(best, std::abs(values[order[i]]) * cum);
  }
  return best;
}

NormEstimate weak_operator_lower(const Eigen::MatrixXd& abs_kernel_columns,
                                 const Eigen::VectorXd& row_measures,
                                 std::span<const int> columns) {
  NormEstimate est;
  est.kind = "weak11_lower";
  est.method = "normalized delta inputs over kernel columns";
  std::vector<int> cols(columns.begin(), columns.end());
  if (cols.empty()) {
    cols.resize(abs_kernel_columns.cols());
    std::iota(cols.begin(), cols.end(), 0);
  }
  for (int y : cols) {
    double v = weak_l1_norm(abs_kernel_columns.col(y), row_measures);
    if (v > est.value) {
      est.value = v;
      est.witness_column = y;
    }
  }
  return est;
}

namespace {

double lp_norm(const Eigen::VectorXcd& v, double p) {
  if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
  return std::pow(v.cwiseAbs().array().pow(p).sum(), 1.0 / p);
}

// dual map: y -> |y|^{p-1} sign(y), normalised so ||.||_{p'} = 1
Eigen::VectorXcd dual_vector(const Eigen::VectorXcd& y, double p) {
  const int n = static_cast<int>(y.size());
  Eigen::VectorXcd out(n);
  for (int i = 0; i < n; ++i) {
    double a = std::abs(y[i]);
    out[i] = a > 0 ? std::pow(a, p - 1.0) * (y[i] / a) : cplx(0, 0);
  }
  double norm_y = lp_norm(y, p);
  if (norm_y > 0) out /= std::pow(norm_y, p - 1.0);
  return out;
}

}  // namespace

NormEstimate lp_norm_estimate(const Eigen::MatrixXcd& op, const Eigen::VectorXd& mu_in,
                              const Eigen::VectorXd& mu_out, double p, int restarts, int iters,
                              std::uint64_t seed) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm_estimate: need p >= 1");
  const int n_in = static_cast<int>(op.cols());
  const int n_out = static_cast<int>(op.rows());
  if (mu_in.size() != n_in || mu_out.size() != n_out)
    throw std::invalid_argument("lp_norm_estimate: measure length mismatch");

  // reduce the weighted norm to the flat one:
  // ||Tu||_{p, mu_out} / ||u||_{p, mu_in} = ||B x||_p / ||x||_p with
  // B = diag(mu_out^{1/p}) T diag(mu_in^{-1/p})
  Eigen::MatrixXcd b = op;
  if (!std::isinf(p)) {
    Eigen::VectorXd wo = mu_out.array().pow(1.0 / p);
    Eigen::VectorXd wi = mu_in.array().pow(-1.0 / p);
    b = wo.cast<cplx>().asDiagonal() * b * wi.cast<cplx>().asDiagonal();
  }

  NormEstimate est;
  auto finish_with_witness = [&](const Eigen::VectorXcd& x_flat) {
    // store the witness in original coordinates and certify by re-application
    Eigen::VectorXcd x = x_flat;
    if (!std::isinf(p)) x = mu_in.array().pow(-1.0 / p).cast<cplx>() * x_flat.array();
    est.witness = x;
    double num = lp_norm(b * x_flat, p);
    double den = lp_norm(x_flat, p);
    est.value = den > 0 ? num / den : 0.0;
  };

  if (p == 2.0) {
    Eigen::MatrixXcd gram = b.adjoint() * b;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("lp_norm_estimate: eigensolver failed");
    int top;
    es.eigenvalues().maxCoeff(&top);
    est.kind = "two_norm_exact";
    est.method = "gram spectrum";
    finish_with_witness(es.eigenvectors().col(top));
    return est;
  }
  if (p == 1.0) {
    int best_col = 0;
    double best = -1;
    for (int y = 0; y < n_in; ++y) {
      double v = b.col(y).cwiseAbs().sum();
      if (v > best) {
        best = v;
        best_col = y;
      }
    }
    est.kind = "one_norm_exact";
    est.method = "column sums";
    est.witness_column = best_col;
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n_in);
    e[best_col] = 1.0;
    finish_with_witness(e);
    return est;
  }
  if (std::isinf(p)) {
    int best_row = 0;
    double best = -1;
    for (int x = 0; x < n_out; ++x) {
      double v = b.row(x).cwiseAbs().sum();
      if (v > best) {
        best = v;
        best_row = x;
      }
    }
    est.kind = "inf_norm_exact";
    est.method = "row sums";
    Eigen::VectorXcd w(n_in);
    for (int y = 0; y < n_in; ++y) {
      cplx v = b(best_row, y);
      double a = std::abs(v);
      w[y] = a > 0 ? std::conj(v) / a : cplx(1, 0);
    }
    finish_with_witness(w);
    return est;
  }

  // Alternating dual-power iteration (Boyd/Higham): a certified lower bound.
  const double q = p / (p - 1.0);
  double best_value = -1;
  Eigen::VectorXcd best_x;
  for (int start = 0; start <= restarts; ++start) {
    Eigen::VectorXcd x(n_in);
    if (start == 0) {
      x.setOnes();
    } else {
      Rng rng(seed + static_cast<std::uint64_t>(start));
      for (int i = 0; i < n_in; ++i) x[i] = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    }
    x /= lp_norm(x, p);
    double prev = -1;
    for (int it = 0; it < iters; ++it) {
      Eigen::VectorXcd y = b * x;
      double val = lp_norm(y, p);
      if (val <= prev * (1.0 + 1e-12)) break;
      prev = val;
      Eigen::VectorXcd z = b.adjoint() * dual_vector(y, p);
      double zq = lp_norm(z, q);
      if (!(zq > 0)) break;
      x = dual_vector(z, q);
      double xn = lp_norm(x, p);
      if (!(xn > 0)) break;
      x /= xn;
    }
    double val = lp_norm(b * x, p) / lp_norm(x, p);
    if (val > best_value) {
      best_value = val;
      best_x = x;
    }
  }
  est.kind = "p_to_p_lower";
  est.method = "alternating dual-power iteration";
  finish_with_witness(best_x);
  return est;
}

double weak_criterion_rhs(double c_fit, double delta, int dim, double w, double t_norm,
                          double s_norm, double q0) {
  if (w < 0 || t_norm < 0 || s_norm < 0)
    throw std::invalid_argument("weak_criterion_rhs: norms must be nonnegative");
  if (!(q0 > 1.0)) throw std::invalid_argument("weak_criterion_rhs: need q0 > 1");
  double bracket = w + t_norm + std::pow(s_norm, q0) * std::pow(t_norm, 1.0 - q0);
  return c_fit * std::pow(1.0 + delta, dim) * bracket;
}

DiscreteOperator restrict_extend(const DiscreteOperator& t, const Region& omega) {
  if (t.domain != Stagger::node || t.codomain != Stagger::node)
    throw std::invalid_argument("restrict_extend: operator must be node -> node");
  if (t.space == nullptr) throw std::invalid_argument("restrict_extend: operator has no space");
  Eigen::VectorXd ind = omega.node_indicator(*t.space);
  DiscreteOperator out;
  out.space = t.space;
  out.tag = "P[" + omega.preset + "]" + t.tag + "P[" + omega.preset + "]";
  out.mat = ind.asDiagonal() * t.mat * ind.asDiagonal();
  return out;
}

}  // namespace deglab
