#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "deglab/assemble.hpp"
#include "deglab/media.hpp"
#include "deglab/space.hpp"

namespace deglab {

// One bad part: dyadic cube, circumscribed ball, and the mean-zero values on
// the cube's nodes.
struct CZPiece {
  DyadicCube cube;
  Point center{0, 0};     // geometric cube centre
  double radius = 0;      // circumscribed ball radius (metric-aware)
  std::vector<int> nodes;
  Eigen::VectorXd values;  // aligned with `nodes`
};

// Level-alpha splitting f = good + sum of bad parts. The constants are
// measured on the produced decomposition, not assumed: c_good (|good| <=
// c_good alpha, construction gives <= 2^d), c_bad (ball-averaged bad mass,
// construction gives <= 2^{d+1}), c_mass (sum of ball volumes against
// ||f||_1/alpha) and the maximal ball overlap.
struct CZDecomposition {
  double alpha = 0;
  Eigen::VectorXd good;
  std::vector<CZPiece> bad;
  double c_good = 0;
  double c_bad = 0;
  double c_mass = 0;
  double overlap = 0;
  double mass_sum = 0;               // sum of ball volumes
  double reconstruction_error = 0;   // max |f - good - sum bad|
};

// Selects maximal dyadic cubes with cube-average |f| > alpha top-down.
// Requires alpha > ||f||_1 / mu(X).
CZDecomposition cz_decompose(const GridSpace& g, const Eigen::VectorXd& f, double alpha);

// Exact weak-L1 quasi-norm sup_a a mu{|f| > a}, realized by a descending sort.
double weak_l1_norm(const Eigen::VectorXd& values, const Eigen::VectorXd& measures);

// Norm estimate with a reproducible witness. `witness_column` is set for
// delta-input estimates, `witness` for iterative ones; re-applying the
// witness reproduces `value`.
struct NormEstimate {
  std::string kind;  // weak11_lower | p_to_p_lower | one_norm_exact | two_norm_exact | inf_norm_exact
  double value = 0;
  int witness_column = -1;
  Eigen::VectorXcd witness;
  std::string method;
};

// sup over columns y of weak_l1_norm(K(.,y)): the L1 -> weak-L1 lower bound
// realized by normalized delta inputs. `columns` empty means all columns.
NormEstimate weak_operator_lower(const Eigen::MatrixXd& abs_kernel_columns,
                                 const Eigen::VectorXd& row_measures,
                                 std::span<const int> columns = {});

// Weighted p->p operator norm of `op` acting L^p(mu_in) -> L^p(mu_out).
// p = 2 exact via the Gram spectrum; p = 1, inf exact via column/row sums;
// other p: alternating dual-power iteration from `restarts` random starts
// (plus the all-ones start), returning a certified lower bound.
NormEstimate lp_norm_estimate(const Eigen::MatrixXcd& op, const Eigen::VectorXd& mu_in,
                              const Eigen::VectorXd& mu_out, double p, int restarts = 8,
                              int iters = 60, std::uint64_t seed = 1);

// Combined right-hand side of the weak-(1,1) criterion:
//   c_fit (1+delta)^d ( w + t_norm + s_norm^{q0} t_norm^{1-q0} ).
double weak_criterion_rhs(double c_fit, double delta, int dim, double w, double t_norm,
                          double s_norm, double q0);

// P_Omega T P_Omega: restriction of a node -> node operator to a region,
// extended by zero.
DiscreteOperator restrict_extend(const DiscreteOperator& t, const Region& omega);

}  // namespace deglab
