#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>

#include "deglab/common.hpp"
#include "deglab/czkit.hpp"

using namespace deglab;

namespace {

double wnorm(const Eigen::VectorXcd& v, const Eigen::VectorXd& mu, double p) {
  if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
  double acc = 0;
  for (int i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]), p) * mu[i];
  return std::pow(acc, 1.0 / p);
}

Eigen::VectorXd random_spiky(const GridSpace& g, Rng& rng) {
  Eigen::VectorXd f(g.node_count());
  for (int i = 0; i < f.size(); ++i) f[i] = rng.uniform(-1, 1);
  for (int k = 0; k < 3; ++k) {
    int i = rng.uniform_int(g.node_count());
    f[i] += (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(4, 16);
  }
  return f;
}

void check_decomposition(const GridSpace& g, const Eigen::VectorXd& f, double alpha) {
  auto dec = cz_decompose(g, f, alpha);
  const double mu = g.node_measure();
  const double scale = f.cwiseAbs().maxCoeff();

  CHECK(dec.reconstruction_error <= 1e-12 * std::max(1.0, scale));
  CHECK(dec.c_good <= std::ldexp(1.0, g.dim) * (1 + 1e-12));
  CHECK(dec.c_bad <= std::ldexp(1.0, g.dim + 1) * (1 + 1e-12));
  CHECK(dec.c_mass <= std::pow(3.0, g.dim) * (1 + 1e-12));

  std::set<int> seen;
  double bad_l1 = 0;
  for (const auto& piece : dec.bad) {
    // bad parts live on pairwise disjoint cubes and have zero mean
    for (int i : piece.nodes) CHECK(seen.insert(i).second);
    double mean = piece.values.sum() * mu;
    CHECK(std::abs(mean) <= 1e-10 * std::max(1.0, scale));
    CHECK(piece.radius > 0);
    bad_l1 += piece.values.cwiseAbs().sum() * mu;
  }
  double f_l1 = f.cwiseAbs().sum() * mu;
  CHECK(dec.good.cwiseAbs().sum() * mu <= f_l1 + bad_l1 + 1e-9);
}

}  // namespace

TEST_CASE("weak l1 quasi-norm") {
  // single atom: value times its measure
  Eigen::VectorXd v1(3), m1(3);
  v1 << 0, 2.5, 0;
  m1 << 0.5, 0.5, 0.5;
  CHECK(weak_l1_norm(v1, m1) == doctest::Approx(1.25));

  // two atoms: max(v1 mu1, v2 (mu1 + mu2)) for v1 > v2
  Eigen::VectorXd v2(2), m2(2);
  v2 << 4.0, 3.0;
  m2 << 0.25, 2.0;
  CHECK(weak_l1_norm(v2, m2) == doctest::Approx(std::max(4.0 * 0.25, 3.0 * 2.25)));

  // quasi-triangle inequality with constant 2
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd a(40), b(40), m(40);
    for (int i = 0; i < 40; ++i) {
      a[i] = rng.uniform(-3, 3);
      b[i] = rng.uniform(-3, 3);
      m[i] = rng.uniform(0.1, 2.0);
    }
    CHECK(weak_l1_norm(a + b, m) <= 2.0 * (weak_l1_norm(a, m) + weak_l1_norm(b, m)) + 1e-12);
  }

  CHECK_THROWS_AS(weak_l1_norm(v1, m2), std::invalid_argument);
}

TEST_CASE("level splitting basics") {
  auto g = build_grid(1, 8.0, 64, Boundary::periodic);

  Eigen::VectorXd constant = Eigen::VectorXd::Constant(g.node_count(), 0.5);
  // threshold at or below the global average is rejected
  CHECK_THROWS_AS(cz_decompose(g, constant, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(cz_decompose(g, constant, 0.1), std::invalid_argument);

  // nothing exceeds the threshold: the good part is all of f
  auto dec = cz_decompose(g, constant, 1.0);
  CHECK(dec.bad.empty());
  CHECK((dec.good - constant).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(dec.c_good == doctest::Approx(0.5));
  CHECK(dec.reconstruction_error == doctest::Approx(0.0));
}

TEST_CASE("level splitting invariants on random spiky data") {
  Rng rng(11);
  auto g1 = build_grid(1, 8.0, 64, Boundary::periodic);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd f = random_spiky(g1, rng);
    double avg = f.cwiseAbs().sum() * g1.node_measure() / g1.total_measure();
    check_decomposition(g1, f, avg * rng.uniform(1.5, 8.0));
  }
  auto g2 = build_grid(2, 8.0, 16, Boundary::neumann);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd f = random_spiky(g2, rng);
    double avg = f.cwiseAbs().sum() * g2.node_measure() / g2.total_measure();
    check_decomposition(g2, f, avg * rng.uniform(1.5, 8.0));
  }
}

TEST_CASE("weak operator lower bound") {
  auto g = build_grid(1, 8.0, 16, Boundary::periodic);
  const int n = g.node_count();
  const double mu = g.node_measure();
  Eigen::VectorXd mus = g.node_measures();

  // identity: kernel I/mu, each column is one atom of height 1/mu
  Eigen::MatrixXd ker = Eigen::MatrixXd::Identity(n, n) / mu;
  auto est = weak_operator_lower(ker, mus);
  CHECK(est.value == doctest::Approx(1.0));
  CHECK(est.kind == "weak11_lower");
  CHECK(est.witness_column >= 0);

  // constant kernel 1: value is the total measure
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, n);
  CHECK(weak_operator_lower(ones, mus).value == doctest::Approx(g.total_measure()));

  // column restriction picks the best among the given columns only
  Eigen::MatrixXd two = ker;
  two.col(3) *= 5.0;
  std::vector<int> cols = {0, 1, 2};
  CHECK(weak_operator_lower(two, mus, cols).value == doctest::Approx(1.0));
  CHECK(weak_operator_lower(two, mus).value == doctest::Approx(5.0));
}

TEST_CASE("lp norm estimates") {
  Eigen::VectorXd unit2 = Eigen::VectorXd::Ones(2);
  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(2, 2);
  diag(0, 0) = 3.0;
  diag(1, 1) = 1.0;
  for (double p : {1.0, 1.5, 2.0, std::numeric_limits<double>::infinity()})
    CHECK(lp_norm_estimate(diag, unit2, unit2, p).value == doctest::Approx(3.0));

  Rng rng(5);
  const int n = 30;
  Eigen::MatrixXcd op(n, n);
  Eigen::VectorXd mu_in(n), mu_out(n);
  for (int i = 0; i < n; ++i) {
    mu_in[i] = rng.uniform(0.2, 2.0);
    mu_out[i] = rng.uniform(0.2, 2.0);
    for (int j = 0; j < n; ++j) op(i, j) = std::complex<double>(rng.uniform(-1, 1), rng.uniform(-1, 1));
  }

  // p = 1: max over columns of the measure-weighted column mass
  auto e1 = lp_norm_estimate(op, mu_in, mu_out, 1.0);
  double ref1 = 0;
  for (int y = 0; y < n; ++y) {
    double acc = 0;
    for (int x = 0; x < n; ++x) acc += std::abs(op(x, y)) * mu_out[x];
    ref1 = std::max(ref1, acc / mu_in[y]);
  }
  CHECK(e1.value == doctest::Approx(ref1).epsilon(1e-12));
  CHECK(e1.kind == "one_norm_exact");

  // p = inf: max row sum, no measure weighting
  auto einf = lp_norm_estimate(op, mu_in, mu_out, std::numeric_limits<double>::infinity());
  double refinf = 0;
  for (int x = 0; x < n; ++x) refinf = std::max(refinf, op.row(x).cwiseAbs().sum());
  CHECK(einf.value == doctest::Approx(refinf).epsilon(1e-12));
  CHECK(einf.kind == "inf_norm_exact");

  // p = 2: largest singular value of the weighted matrix
  auto e2 = lp_norm_estimate(op, mu_in, mu_out, 2.0);
  Eigen::MatrixXcd weighted = mu_out.array().sqrt().matrix().cast<std::complex<double>>().asDiagonal() *
                              op *
                              mu_in.array().rsqrt().matrix().cast<std::complex<double>>().asDiagonal();
  double sigma = weighted.jacobiSvd().singularValues().maxCoeff();
  CHECK(e2.value == doctest::Approx(sigma).epsilon(1e-9));
  CHECK(e2.kind == "two_norm_exact");

  // interpolation: the 2-norm sits under the 1/inf geometric mean
  CHECK(e2.value <= std::sqrt(e1.value * einf.value) * (1 + 1e-9));

  // fractional p: beats a large random probe family and certifies its witness
  const double p = 1.5;
  auto ep = lp_norm_estimate(op, mu_in, mu_out, p);
  CHECK(ep.kind == "p_to_p_lower");
  double probe_best = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    Eigen::VectorXcd x(n);
    for (int i = 0; i < n; ++i) x[i] = std::complex<double>(rng.uniform(-1, 1), rng.uniform(-1, 1));
    probe_best = std::max(probe_best, wnorm(op * x, mu_out, p) / wnorm(x, mu_in, p));
  }
  CHECK(ep.value >= 0.95 * probe_best);
  double reapplied = wnorm(op * ep.witness, mu_out, p) / wnorm(ep.witness, mu_in, p);
  CHECK(reapplied == doctest::Approx(ep.value).epsilon(1e-9));

  CHECK_THROWS_AS(lp_norm_estimate(op, mu_in, mu_out, 0.5), std::invalid_argument);
}

TEST_CASE("weak criterion right-hand side") {
  CHECK(weak_criterion_rhs(1.0, 0.0, 1, 1.0, 1.0, 1.0, 2.0) == doctest::Approx(3.0));
  CHECK(weak_criterion_rhs(1.0, 4.0, 1, 1.0, 1.0, 1.0, 2.0) == doctest::Approx(15.0));
  CHECK(weak_criterion_rhs(1.0, 4.0, 2, 1.0, 1.0, 1.0, 2.0) == doctest::Approx(75.0));

  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    double c = rng.uniform(0.1, 3), d = rng.uniform(0, 5), w = rng.uniform(0, 2);
    double t = rng.uniform(0.1, 2), s = rng.uniform(0.1, 2), q0 = rng.uniform(1.1, 4);
    int dim = 1 + (trial % 2);
    double expected = c * std::pow(1 + d, dim) * (w + t + std::pow(s, q0) * std::pow(t, 1 - q0));
    CHECK(weak_criterion_rhs(c, d, dim, w, t, s, q0) == doctest::Approx(expected).epsilon(1e-12));
  }

  CHECK_THROWS_AS(weak_criterion_rhs(1, 1, 1, -0.5, 1, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(weak_criterion_rhs(1, 1, 1, 1, 1, 1, 1.0), std::invalid_argument);
}

TEST_CASE("region restriction") {
  auto g = build_grid(1, 8.0, 32, Boundary::periodic);
  Rng rng(3);
  Eigen::MatrixXd mat(g.node_count(), g.node_count());
  for (int i = 0; i < mat.rows(); ++i)
    for (int j = 0; j < mat.cols(); ++j) mat(i, j) = rng.uniform(-1, 1);
  DiscreteOperator t{mat, Stagger::node, Stagger::node, &g, "random"};

  auto all = make_region(g, "all", nlohmann::json::object());
  auto same = restrict_extend(t, all);
  CHECK((same.mat - t.mat).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  auto half = make_region(g, "box", nlohmann::json{{"lo", {2.0}}, {"hi", {6.0}}});
  auto cut = restrict_extend(t, half);
  Eigen::VectorXd ind = half.node_indicator(g);
  for (int i = 0; i < mat.rows(); ++i)
    for (int j = 0; j < mat.cols(); ++j) {
      double expected = ind[i] * ind[j] * mat(i, j);
      CHECK(cut.mat(i, j) == doctest::Approx(expected));
    }

  // weak lower bound of the restricted kernel equals the best over its columns
  Eigen::MatrixXd ker = cut.mat / g.node_measure();
  auto est_all = weak_operator_lower(ker, g.node_measures());
  double best = 0;
  for (int y : half.nodes)
    best = std::max(best, weak_l1_norm(ker.col(y), g.node_measures()));
  CHECK(est_all.value == doctest::Approx(best));
}
