#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "deglab/assemble.hpp"
#include "deglab/media.hpp"
#include "deglab/multiplier.hpp"
#include "deglab/space.hpp"
#include "deglab/spectral.hpp"

namespace deglab {

// Kernel against the measure: Tu(x) = sum_y K(x,y) u(y) mu_y.
struct KernelMatrix {
  Eigen::MatrixXd k;
  Stagger output = Stagger::node;
  const GridSpace* space = nullptr;
  std::string tag;
  double param = 0;  // time or scale tag when applicable
};

KernelMatrix kernel_of(const DiscreteOperator& t);

// |kernel| of diag(left) f(H) diag(right) computed directly in the
// eigenbasis: the input measure cancels, K = diag(left) V f(L) V^T diag(right).
// Null weight pointers mean "no cutoff on that side".
Eigen::MatrixXd abs_kernel(const SpectralDecomposition& h, const Eigen::VectorXd* left,
                           const std::function<std::complex<double>(double)>& f, bool real_valued,
                           const Eigen::VectorXd* right);

// --- Gaussian-shape fit ----------------------------------------------------

// For each rate c, the smallest constant making
//   |K_t(x,y)| <= C t^{-d/2} (1+t)^{d/2 or 0} e^{-c rho^2 / t}
// hold over the t-grid and all pairs within rho <= pair_window sqrt(t).
// Computed in log space; zero kernel entries are skipped.
struct GaussianFit {
  std::vector<double> c_grid;
  std::vector<double> c_values;      // fitted C(c)
  std::vector<double> t_grid;
  std::vector<double> c_ref_per_t;   // per-t constant at c_ref
  double c_ref = 0.125;
  bool with_growth_factor = true;
  double pair_window = 11.0;
  double t_window_min = 0, t_window_max = 0;  // validity window [4h^2, (L/4)^2]
  std::vector<bool> t_in_window;
};

GaussianFit gaussian_fit(const GridSpace& g,
                         const std::function<Eigen::MatrixXd(double)>& abs_kernel_at,
                         const std::vector<double>& t_grid, std::span<const double> c_grid,
                         bool with_growth_factor, double pair_window = 11.0, double c_ref = 0.125);

// --- Semigroup size bounds -------------------------------------------------

struct SupBoundsRow {
  double t = 0;
  double two_inf = 0;             // || diag(chi) e^{-tH} ||_{2->inf}
  double one_inf = 0;             // || diag(chi) e^{-tH} diag(chi) ||_{1->inf}
  double two_inf_normalized = 0;  // x t^{d/4} (1+t)^{-d/4}
  double one_inf_normalized = 0;  // x t^{d/2} (1+t)^{-d/2}
  bool in_window = true;
};

std::vector<SupBoundsRow> sup_bounds(const GridSpace& g, const SpectralDecomposition& h,
                                     const Eigen::VectorXd& chi_nodes,
                                     const std::vector<double>& t_grid);

// --- Complex-time kernel bound ---------------------------------------------

struct ComplexTimeRow {
  std::complex<double> z;
  double constant = 0;  // fitted prefactor at rate c_rate
  bool in_window = true;
};

struct ComplexTimeReport {
  std::vector<ComplexTimeRow> rows;
  double sup = 0;
  double c_rate = 1.0 / 16;
  double pair_window = 11.0;
};

// Fits max |K_z(x,y)| e^{-extra_damp Re z} (Re z)^{d/2}
//          exp(c_rate rho^2 cos(arg z)/|z|)
// over pairs with rho <= pair_window sqrt(|z|/cos(arg z)). When the
// decomposition is of the shifted operator H = A + eps, the damping e^{-eps z}
// is already inside the propagator and extra_damp should stay 0.
ComplexTimeReport complex_time_check(const GridSpace& g, const SpectralDecomposition& h,
                                     const Eigen::VectorXd& chi_left,
                                     const Eigen::VectorXd& chi_right,
                                     const std::vector<std::complex<double>>& z_grid,
                                     double extra_damp = 0, double c_rate = 1.0 / 16,
                                     double pair_window = 11.0);

// --- Off-diagonal annulus profile ------------------------------------------

// g(j) = max over sampled (x, t) and test functions f supported in B(x,t) of
//   [ (1/v(x,2^{j+1}t)) sum_{C_j(x,t)} |A_t f|^{q0} mu ]^{1/q0}
//   / [ (1/v(x,t)) sum_{B(x,t)} |f| mu ],    A_t = e^{-t^2 H} diag(chi).
struct OffDiagonalProfile {
  std::vector<double> g;                 // index 0 holds j = 1
  std::vector<double> weighted_partial;  // partial sums of 2^{jd} g(j)
  double saturation_ratio = 0;           // share of the total contributed by j > 5
  int q0 = 2;
  std::vector<std::string> notes;
};

OffDiagonalProfile off_diagonal_profile(const GridSpace& g, const SpectralDecomposition& h,
                                        const Eigen::VectorXd& chi_nodes,
                                        const std::vector<double>& t_grid,
                                        std::span<const int> x_samples, int q0, int j_max,
                                        std::uint64_t seed);

// --- Difference-of-approximations condition --------------------------------

// Kernel form:    W = sup_{y,t} sum_{rho(x,y) >= delta t} |K - K_t|(x,y) mu_x
// Operator form:  sup over x-samples, t, and unit-L1 inputs supported in
//                 B(x,t) of the mass of (T - S A_t) u outside B(x,(1+delta)t).
// The provider returns |K - K_t| at each t; rows may live on nodes or cells.
struct DMReport {
  double delta = 4;
  std::vector<double> t_grid;
  std::vector<double> w_kernel_per_t;
  std::vector<double> w_operator_per_t;
  double w_kernel = 0;
  double w_operator = 0;
};

DMReport dm_condition(const GridSpace& g,
                      const std::function<Eigen::MatrixXd(double)>& absdiff_kernel_at,
                      Stagger out_stagger, const std::vector<double>& t_grid, double delta,
                      std::span<const int> x_samples);

// --- Weighted kernel moment -------------------------------------------------

// LHS(y) = sum_x |K(x,y)|^2 (1 + sqrt(r) rho(x,y))^s mu_x for the kernel of
// diag(chi) F(H) diag(chi); reference r^{d/2} ||delta_r F||_{C^{s/2+eps}}^2.
struct KernelMomentReport {
  double lhs_sup = 0;
  double rhs = 0;
  double ratio = 0;
  std::vector<std::pair<int, double>> per_y;
};

KernelMomentReport weighted_kernel_moment(const GridSpace& g, const SpectralDecomposition& h,
                                          const Eigen::VectorXd& chi, const MultiplierFunction& f,
                                          double r, double s, double eps_s = 0.01,
                                          std::span<const int> y_samples = {});

// --- Dyadic oscillation sums -------------------------------------------------

// I_{n,t} = max_y sum_{rho(x,y) >= t} |K(x,y)| mu_x for the kernel of
// diag(chi) G_{n,t}(H) diag(chi), G_{n,t} = phi(2^-n l) F(l) (1 - e^{-t^2 l}).
struct OscillationTable {
  std::vector<int> n_values;
  std::vector<double> t_grid;
  Eigen::MatrixXd i_table;       // rows n, cols t
  std::vector<double> sums_per_t;
  double c_star = 0;             // fitted constant against the reference shape
  double mihlin_value = 0;
  double order_check = 0;        // two summation orders of the grand total
};

OscillationTable dyadic_oscillation(const GridSpace& g, const SpectralDecomposition& h,
                                    const Eigen::VectorXd& chi, const MultiplierFunction& f,
                                    const DyadicPartition& partition, double s,
                                    const std::vector<double>& t_grid, int n_min, int n_max);

// --- Weighted semigroup moment -----------------------------------------------

// value = max over u in {normalized delta at x, normalized indicator of
// B(x,t)} of sum |(diag(chi_tilde) e^{-sH} diag(chi) u)|^2 e^{beta rho(x,.)^2/s} mu
// (gradient off), or the same with the cutoff gradient diag(chi_cells) G
// applied after the semigroup (gradient on). envelope carries the reference
// shape s^{-d/2} e^{2 beta t^2/s} e^{-s} resp. s^{-d/2-1} e^{6 beta t^2/s}.
struct SemigroupMomentResult {
  double value = 0;
  double envelope = 0;
  double ratio = 0;
  bool overflow = false;  // beta rho^2/s exceeded the exp guard; value not usable
};

SemigroupMomentResult weighted_semigroup_moment(const GridSpace& g,
                                                const SpectralDecomposition& h,
                                                const Eigen::VectorXd& chi_tilde,
                                                const Eigen::VectorXd& chi,
                                                const GradientMaps* maps,
                                                const Eigen::VectorXd& chi_cells, int x, double t,
                                                double s_time, double beta, bool gradient_flag);

// --- Two-set decay ------------------------------------------------------------

// || P_F diag(chi) e^{-tH} P_E ||_{2->inf}
double davies_gaffney(const GridSpace& g, const SpectralDecomposition& h,
                      const Eigen::VectorXd& chi_nodes, std::span<const int> e_set,
                      std::span<const int> f_set, double t);

struct DaviesGaffneyFit {
  double omega = 0;     // value t^{d/4} ~ c0 e^{-D^2/(4 omega t)}
  double c0 = 0;
  int points = 0;       // regression points used
  std::vector<std::string> notes;
};

struct SetPair {
  std::vector<int> e_set;
  std::vector<int> f_set;
};

DaviesGaffneyFit davies_gaffney_fit(const GridSpace& g, const SpectralDecomposition& h,
                                    const Eigen::VectorXd& chi_nodes,
                                    const std::vector<SetPair>& pairs,
                                    const std::vector<double>& t_grid);

// --- Riesz L^2 bound -----------------------------------------------------------

// Exact check of || diag(chi_cells) G_k H^{-1/2} ||_{2->2} <= sup|chi| / sqrt(mu)
// for every axis, provided the coefficient field is elliptic with constant mu
// on the cells where chi is nonzero (precondition; throws when violated).
struct RieszL2Report {
  std::vector<double> norms;
  double bound = 0;
  bool pass = false;
  double mu = 0;
  std::vector<double> margins;
  EllipticityReport ellipticity;
};

RieszL2Report riesz_l2_check(const GridSpace& g, const SpectralDecomposition& h,
                             const CoefficientField& field, const Cutoff& chi,
                             const GradientMaps& maps, double mu);

// Default measurement window: t in [4h^2, (L/4)^2]; results outside are
// flagged, never failed.
std::pair<double, double> time_validity_window(const GridSpace& g);

// 16 quasi-random nodes (or `count`) inside {chi == 1} (falls back to the top
// of chi when the plateau is empty).
std::vector<int> sample_nodes_in_plateau(const GridSpace& g, const Eigen::VectorXd& chi_nodes,
                                         int count, std::uint64_t seed);

}  // namespace deglab
