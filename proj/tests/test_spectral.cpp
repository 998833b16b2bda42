#include <doctest.h>

#include <cmath>
#include <complex>

#include "deglab/common.hpp"
#include "deglab/multiplier.hpp"
#include "deglab/spectral.hpp"

using namespace deglab;
using nlohmann::json;

namespace {

const json kEmpty = json::object();

SpectralDecomposition decompose_free(int n, double shift) {
  auto g = build_grid(1, 8.0, n, Boundary::periodic);
  auto a = assemble_form_operator(g, make_field(g, "identity", kEmpty));
  auto h = shift_identity(a, shift);
  return eigendecompose(h);
}

Eigen::MatrixXd random_psd_plus_identity(int n, Rng& rng) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m * m.transpose() + Eigen::MatrixXd::Identity(n, n);
}

}  // namespace

TEST_CASE("eigendecomposition is mu-orthonormal and reconstructs H") {
  auto dec = decompose_free(64, 1.0);
  const int n = dec.size();
  Eigen::MatrixXd gram =
      dec.vectors.transpose() * dec.mu.asDiagonal() * dec.vectors;
  CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(dec.reconstruction_error <= 1e-10);
  for (int i = 1; i < n; ++i) CHECK(dec.lambda[i] >= dec.lambda[i - 1]);
  CHECK(dec.lambda.minCoeff() == doctest::Approx(1.0));
}

TEST_CASE("functional calculus basics") {
  auto dec = decompose_free(32, 1.0);
  const int n = dec.size();

  Eigen::MatrixXd id = dec.apply([](double) { return 1.0; });
  CHECK((id - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);

  Eigen::MatrixXcd p0 = dec.propagator(std::complex<double>(0, 0));
  CHECK((p0 - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK_THROWS_AS(dec.propagator(std::complex<double>(-1.0, 0)), std::invalid_argument);

  // imaginary powers act as mu-isometries on the coefficient space
  Eigen::MatrixXcd ip =
      dec.apply_complex([](double l) { return std::pow(std::complex<double>(l, 0),
                                                       std::complex<double>(0, 2.0)); });
  Rng rng(5);
  Eigen::VectorXcd u(n);
  for (int i = 0; i < n; ++i) u[i] = std::complex<double>(rng.uniform(-1, 1), rng.uniform(-1, 1));
  Eigen::VectorXcd v = ip * u;
  double nu = 0, nv = 0;
  for (int i = 0; i < n; ++i) {
    nu += std::norm(u[i]) * dec.mu[i];
    nv += std::norm(v[i]) * dec.mu[i];
  }
  CHECK(std::sqrt(nv) == doctest::Approx(std::sqrt(nu)).epsilon(1e-10));
}

TEST_CASE("non-self-adjoint input is rejected") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(eigendecompose_matrix(m, Eigen::VectorXd::Ones(2)), std::invalid_argument);
  CHECK_THROWS_AS(eigendecompose_matrix(Eigen::MatrixXd::Identity(2, 2),
                                        Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
}

TEST_CASE("subordination reproduces the inverse square root") {
  Rng rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    const int n = 16 + 16 * trial;
    Eigen::MatrixXd m = random_psd_plus_identity(n, rng);
    auto dec = eigendecompose_matrix(m, Eigen::VectorXd::Ones(n));
    Eigen::MatrixXd direct = dec.apply([](double l) { return 1.0 / std::sqrt(l); });
    auto sub = inv_sqrt_subordination(dec);
    double rel = (sub.mat - direct).cwiseAbs().maxCoeff() / direct.cwiseAbs().maxCoeff();
    CHECK(rel <= 1e-6);
  }
}

TEST_CASE("subordination requires a positive spectrum") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(4, 4);
  auto dec = eigendecompose_matrix(z, Eigen::VectorXd::Ones(4));
  CHECK_THROWS_AS(inv_sqrt_subordination(dec), std::invalid_argument);
}

TEST_CASE("fourier synthesis route agrees with direct evaluation") {
  auto dec = decompose_free(64, 1.0);
  const double r = dec.lambda.maxCoeff();
  DyadicPartition part;
  auto f = [&part, r](double l) { return part.phi(l / r); };  // supported in [r/4, r]
  auto cc = fourier_calculus_crosscheck(dec, f, r);
  CHECK(cc.max_deviation <= 1e-5);
  CHECK(cc.op.rows() == dec.size());

  // zero profile synthesizes the zero operator
  auto zero = fourier_calculus_crosscheck(dec, [](double) { return 0.0; }, r);
  CHECK(zero.op.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(zero.max_deviation <= 1e-12);

  // widening the frequency truncation improves the agreement
  FourierParams narrow{64.0, 1 << 13, 4096};
  FourierParams wide{256.0, 1 << 15, 4096};
  auto dev_narrow = fourier_calculus_crosscheck(dec, f, r, narrow).max_deviation;
  auto dev_wide = fourier_calculus_crosscheck(dec, f, r, wide).max_deviation;
  CHECK(dev_wide <= dev_narrow + 1e-15);
  CHECK(cc.max_deviation <= dev_wide + 1e-15);

  // support precondition: a function alive at the top of the spectrum fails
  auto bad = [](double) { return 1.0; };
  CHECK_THROWS_AS(fourier_calculus_crosscheck(dec, bad, dec.lambda.maxCoeff() / 4),
                  std::invalid_argument);
}

TEST_CASE("spectral calculus invariants") {
  auto dec = decompose_free(32, 1.0);
  const int n = dec.size();
  auto g = build_grid(1, 8.0, 32, Boundary::periodic);
  auto a = assemble_form_operator(g, make_field(g, "identity", kEmpty));
  auto h = shift_identity(a, 1.0);

  Eigen::MatrixXd fh = dec.apply([](double l) { return std::exp(-0.3 * l); });
  SUBCASE("commutes with H") {
    double scale = h.mat.cwiseAbs().maxCoeff() * fh.cwiseAbs().maxCoeff();
    CHECK((fh * h.mat - h.mat * fh).cwiseAbs().maxCoeff() <= 1e-9 * scale);
  }
  SUBCASE("2->2 contraction by sup|F|") {
    Eigen::VectorXd s = dec.mu.cwiseSqrt();
    Eigen::MatrixXd b = s.asDiagonal() * fh * s.cwiseInverse().asDiagonal();
    double norm = b.jacobiSvd().singularValues()(0);
    CHECK(norm <= std::exp(-0.3 * dec.lambda.minCoeff()) + 1e-9);
  }
  SUBCASE("real-time propagator positivity for the free field") {
    Eigen::MatrixXcd p = dec.propagator(std::complex<double>(0.05, 0));
    CHECK(p.imag().cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(p.real().minCoeff() >= -1e-12 * p.real().maxCoeff());
  }
  SUBCASE("semigroup law and unitary imaginary time") {
    Eigen::MatrixXcd p1 = dec.propagator({0.2, 0});
    Eigen::MatrixXcd p2 = dec.propagator({0.3, 0});
    Eigen::MatrixXcd p3 = dec.propagator({0.5, 0});
    CHECK((p1 * p2 - p3).cwiseAbs().maxCoeff() <= 1e-9);

    Eigen::MatrixXcd u = dec.propagator({0, 0.7});
    Eigen::VectorXd s = dec.mu.cwiseSqrt();
    Eigen::MatrixXcd b = s.asDiagonal() * u * s.cwiseInverse().asDiagonal();
    double norm = b.jacobiSvd().singularValues()(0);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("inverse square root squares to the inverse") {
    auto half = inv_sqrt_subordination(dec);
    Eigen::MatrixXd inv = dec.apply([](double l) { return 1.0 / l; });
    double rel = (half.mat * half.mat - inv).cwiseAbs().maxCoeff() / inv.cwiseAbs().maxCoeff();
    CHECK(rel <= 1e-5);
  }
  (void)n;
}
