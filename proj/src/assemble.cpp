#include "deglab/assemble.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "deglab/spectral.hpp"

namespace deglab {

namespace {

// Gradient weights per corner for one cell. 1D: forward difference over the
// two corners. 2D: forward differences averaged over the two parallel edges,
// i.e. the cell-centre value of the bilinear interpolant's gradient.
void corner_weights(const GridSpace& g, int axis, double* w) {
  const double h = g.spacing;
  if (g.dim == 1) {
    w[0] = -1.0 / h;
    w[1] = 1.0 / h;
    return;
  }
  // corners ordered (x0,y0), (x1,y0), (x0,y1), (x1,y1)
  if (axis == 0) {
    w[0] = -0.5 / h; w[1] = 0.5 / h; w[2] = -0.5 / h; w[3] = 0.5 / h;
  } else {
    w[0] = -0.5 / h; w[1] = -0.5 / h; w[2] = 0.5 / h; w[3] = 0.5 / h;
  }
}

}  // namespace

GradientMaps discrete_gradient(const GridSpace& g) {
  GradientMaps maps;
  maps.dim = g.dim;
  const int nc = g.cell_count();
  const int nn = g.node_count();
  const int corners = g.corners_per_cell();
  double w[4];
  for (int axis = 0; axis < g.dim; ++axis) {
    corner_weights(g, axis, w);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(nc) * corners);
    for (int c = 0; c < nc; ++c) {
      auto corner = g.cell_corners(c);
      for (int q = 0; q < corners; ++q) trips.emplace_back(c, corner[q], w[q]);
    }
    Eigen::SparseMatrix<double> m(nc, nn);
    m.setFromTriplets(trips.begin(), trips.end());
    maps.g[axis] = std::move(m);
  }
  return maps;
}

DiscreteOperator assemble_form_operator(const GridSpace& g, const CoefficientField& field) {
  const int nn = g.node_count();
  const int corners = g.corners_per_cell();
  const double vol = g.cell_volume();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(nn, nn);
  double w[2][4];
  for (int axis = 0; axis < g.dim; ++axis) corner_weights(g, axis, w[axis]);
  for (int c = 0; c < g.cell_count(); ++c) {
    const Eigen::Matrix2d a = field.eval(g.cell_coord(c));
    const auto corner = g.cell_corners(c);
    // local stiffness: vol * sum_{k,j} a_kj g_k[p] g_j[q]
    for (int p = 0; p < corners; ++p) {
      for (int q = 0; q < corners; ++q) {
        double val = 0;
        for (int k = 0; k < g.dim; ++k)
          for (int j = 0; j < g.dim; ++j) val += a(k, j) * w[k][p] * w[j][q];
        s(corner[p], corner[q]) += vol * val;
      }
    }
  }
  DiscreteOperator op;
  op.space = &g;
  op.tag = "A[" + field.preset + "]";
  op.mat = s / g.node_measure();  // A = D^{-1} S with uniform node measure
  return op;
}

DiscreteOperator shift_identity(const DiscreteOperator& a, double eps) {
  if (a.domain != Stagger::node || a.codomain != Stagger::node || a.mat.rows() != a.mat.cols())
    throw std::invalid_argument("shift_identity: operator must be square node -> node");
  if (!(eps > 0)) throw std::invalid_argument("shift_identity: eps must be positive");
  DiscreteOperator h = a;
  h.mat.diagonal().array() += eps;
  h.tag = a.tag + "+" + std::to_string(eps) + "I";
  return h;
}

DiscreteOperator compose(const DiscreteOperator& lhs, const DiscreteOperator& rhs) {
  if (lhs.space != rhs.space)
    throw std::invalid_argument("compose: operators live on different spaces");
  if (lhs.domain != rhs.codomain)
    throw std::invalid_argument("compose: stagger mismatch (" + lhs.tag + " expects " +
                                (lhs.domain == Stagger::node ? "node" : "cell") +
                                " input, " + rhs.tag + " produces " +
                                (rhs.codomain == Stagger::node ? "node" : "cell") + " output)");
  DiscreteOperator out;
  out.mat = lhs.mat * rhs.mat;
  out.domain = rhs.domain;
  out.codomain = lhs.codomain;
  out.space = lhs.space;
  out.tag = lhs.tag + "*" + rhs.tag;
  return out;
}

DiscreteOperator node_multiplier(const GridSpace& g, const Eigen::VectorXd& values,
                                 const std::string& tag) {
  if (values.size() != g.node_count())
    throw std::invalid_argument("node_multiplier: wrong vector length");
  DiscreteOperator op;
  op.space = &g;
  op.tag = tag;
  op.mat = values.asDiagonal();
  return op;
}

DiscreteOperator cell_multiplier(const GridSpace& g, const Eigen::VectorXd& values,
                                 const std::string& tag) {
  if (values.size() != g.cell_count())
    throw std::invalid_argument("cell_multiplier: wrong vector length");
  DiscreteOperator op;
  op.space = &g;
  op.tag = tag;
  op.domain = Stagger::cell;
  op.codomain = Stagger::cell;
  op.mat = values.asDiagonal();
  return op;
}

DiscreteOperator gradient_component(const GridSpace& g, const GradientMaps& maps, int axis) {
  if (axis < 0 || axis >= g.dim) throw std::invalid_argument("gradient_component: bad axis");
  DiscreteOperator op;
  op.space = &g;
  op.tag = "G" + std::to_string(axis);
  op.domain = Stagger::node;
  op.codomain = Stagger::cell;
  op.mat = Eigen::MatrixXd(maps.g[axis]);
  return op;
}

DiscreteOperator riesz_matrix(const GridSpace& g, const SpectralDecomposition& h,
                              const GradientMaps& maps, const Cutoff& chi, int axis) {
  if (axis < 0 || axis >= g.dim) throw std::invalid_argument("riesz_matrix: bad axis");
  // a numerically-zero bottom eigenvalue (near-kernel mode) is as fatal as a
  // negative one, so the positivity gate is relative to the spectral top
  const double lmin = h.lambda.minCoeff();
  if (lmin <= 0 || lmin <= 1e-10 * h.lambda.maxCoeff())
    throw std::invalid_argument("riesz_matrix: operator must be strictly positive");
  Eigen::MatrixXd inv_sqrt = h.apply([](double l) { return 1.0 / std::sqrt(l); });
  DiscreteOperator op;
  op.space = &g;
  op.tag = "R" + std::to_string(axis) + "[" + chi.preset + "]";
  op.domain = Stagger::node;
  op.codomain = Stagger::cell;
  op.mat = chi.cell_samples(g).asDiagonal() * (maps.g[axis] * inv_sqrt);
  op.mat = op.mat * chi.node_samples(g).asDiagonal();
  return op;
}

}  // namespace deglab
