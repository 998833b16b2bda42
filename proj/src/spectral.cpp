#include "deglab/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace deglab {

namespace {

Eigen::MatrixXd sandwich(const SpectralDecomposition& h, const Eigen::VectorXd& fvals) {
  // V f(Lambda) V^T D, with D = diag(mu) applied as a column scaling
  Eigen::MatrixXd m = h.vectors * fvals.asDiagonal() * h.vectors.transpose();
  m.array().rowwise() *= h.mu.transpose().array();
  return m;
}

Eigen::MatrixXcd sandwich_complex(const SpectralDecomposition& h, const Eigen::VectorXcd& fvals) {
  Eigen::MatrixXcd vc = h.vectors.cast<std::complex<double>>();
  Eigen::MatrixXcd m = vc * fvals.asDiagonal() * vc.transpose();
  m.array().rowwise() *= h.mu.transpose().array().cast<std::complex<double>>();
  return m;
}

}  // namespace

Eigen::MatrixXd SpectralDecomposition::apply(const std::function<double(double)>& f) const {
  Eigen::VectorXd fvals(lambda.size());
  for (int i = 0; i < lambda.size(); ++i) fvals[i] = f(lambda[i]);
  return sandwich(*this, fvals);
}

Eigen::MatrixXcd SpectralDecomposition::apply_complex(
    const std::function<std::complex<double>(double)>& f) const {
  Eigen::VectorXcd fvals(lambda.size());
  for (int i = 0; i < lambda.size(); ++i) fvals[i] = f(lambda[i]);
  return sandwich_complex(*this, fvals);
}

Eigen::MatrixXcd SpectralDecomposition::propagator(std::complex<double> z) const {
  if (z.real() < -1e-12)
    throw std::invalid_argument("propagator: Re z must be nonnegative");
  return apply_complex([z](double l) { return std::exp(-z * l); });
}

SpectralDecomposition eigendecompose_matrix(const Eigen::MatrixXd& h, const Eigen::VectorXd& mu) {
  const int n = static_cast<int>(h.rows());
  if (h.cols() != n || mu.size() != n)
    throw std::invalid_argument("eigendecompose: shape mismatch");
  if (mu.minCoeff() <= 0) throw std::invalid_argument("eigendecompose: measures must be positive");
  // Symmetrise through the measure: B = D^{1/2} H D^{-1/2} is symmetric when
  // H is mu-self-adjoint; solve B and pull the basis back.
  Eigen::VectorXd sqrt_mu = mu.cwiseSqrt();
  Eigen::MatrixXd b = h;
  b.array().colwise() *= sqrt_mu.array();
  b.array().rowwise() /= sqrt_mu.transpose().array();
  Eigen::MatrixXd b_sym = 0.5 * (b + b.transpose());
  double asym = (b - b.transpose()).cwiseAbs().maxCoeff();
  double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if (asym > 1e-8 * scale)
    throw std::invalid_argument("eigendecompose: operator is not mu-self-adjoint");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b_sym);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecompose: solver failed");
  SpectralDecomposition d;
  d.lambda = es.eigenvalues();
  d.vectors = es.eigenvectors();
  d.vectors.array().colwise() /= sqrt_mu.array();
  d.mu = mu;
  Eigen::MatrixXd rec = sandwich(d, d.lambda);
  double hnorm = h.norm();
  d.reconstruction_error = hnorm > 0 ? (rec - h).norm() / hnorm : (rec - h).norm();
  return d;
}

SpectralDecomposition eigendecompose(const DiscreteOperator& h) {
  if (h.domain != Stagger::node || h.codomain != Stagger::node)
    throw std::invalid_argument("eigendecompose: operator must be node -> node");
  if (h.space == nullptr) throw std::invalid_argument("eigendecompose: operator has no space");
  SpectralDecomposition d = eigendecompose_matrix(h.mat, h.space->node_measures());
  d.space = h.space;
  return d;
}

DiscreteOperator apply_function(const SpectralDecomposition& h,
                                const std::function<double(double)>& f, const std::string& tag) {
  DiscreteOperator op;
  op.space = h.space;
  op.tag = tag;
  op.mat = h.apply(f);
  return op;
}

DiscreteOperator inv_sqrt_subordination(const SpectralDecomposition& h,
                                        SubordinationParams params) {
  const double lambda_min = h.lambda.minCoeff();
  if (lambda_min <= 0)
    throw std::invalid_argument(
        "inv_sqrt_subordination: spectrum touches zero, the integral diverges");
  double sigma_max = params.sigma_max > 0 ? params.sigma_max : 12.0 / std::sqrt(lambda_min);
  const int m = params.panels;
  if (m < 2) throw std::invalid_argument("inv_sqrt_subordination: need at least 2 panels");
  const double ds = sigma_max / m;
  // Trapezoid rule on the even integrand e^{-s^2 l}: spectrally accurate
  // because all odd derivatives vanish at 0 and the tail is Gaussian.
  Eigen::VectorXd fvals = Eigen::VectorXd::Zero(h.lambda.size());
  for (int i = 0; i < h.lambda.size(); ++i) {
    const double l = h.lambda[i];
    double acc = 0.5 * (1.0 + std::exp(-sigma_max * sigma_max * l));
    for (int k = 1; k < m; ++k) {
      const double s = k * ds;
      acc += std::exp(-s * s * l);
    }
    fvals[i] = acc * ds * 2.0 / std::sqrt(std::numbers::pi);
  }
  DiscreteOperator op;
  op.space = h.space;
  op.tag = "H^{-1/2}(subordination)";
  Eigen::MatrixXd m2 = h.vectors * fvals.asDiagonal() * h.vectors.transpose();
  m2.array().rowwise() *= h.mu.transpose().array();
  op.mat = std::move(m2);
  return op;
}

FourierCrosscheck fourier_calculus_crosscheck(const SpectralDecomposition& h,
                                              const std::function<double(double)>& f, double r,
                                              FourierParams params) {
  if (!(r > 0)) throw std::invalid_argument("fourier_calculus_crosscheck: r must be positive");
  const double fmax_all = [&] {
    double v = 0;
    for (int i = 0; i < h.lambda.size(); ++i) v = std::max(v, std::abs(f(h.lambda[i])));
    return v;
  }();
  for (int i = 0; i < h.lambda.size(); ++i) {
    if (h.lambda[i] > r && std::abs(f(h.lambda[i])) > 1e-12 * std::max(1.0, fmax_all))
      throw std::invalid_argument(
          "fourier_calculus_crosscheck: f is not supported in [0, r] on the spectrum");
  }

  // ghat(xi) = (1/2pi) \int_0^1 f(ru) e^u e^{-i u xi} du  (g vanishes to all
  // orders at both ends, so the trapezoid sum is spectrally accurate)
  const int mp = params.profile_panels;
  const double du = 1.0 / mp;
  std::vector<double> gvals(mp + 1);
  for (int k = 0; k <= mp; ++k) {
    const double u = k * du;
    gvals[k] = f(r * u) * std::exp(u);
  }
  const int np = params.panels;
  const double dxi = 2.0 * params.xi_max / np;
  std::vector<std::complex<double>> ghat(np + 1);
  const std::complex<double> im(0.0, 1.0);
  for (int j = 0; j <= np; ++j) {
    const double xi = -params.xi_max + j * dxi;
    std::complex<double> acc = 0.5 * (gvals[0] + gvals[mp] * std::exp(-im * xi));
    // rotate e^{-i u xi} across the u-grid instead of calling exp per point
    const std::complex<double> rot = std::exp(-im * (du * xi));
    std::complex<double> phase = rot;
    for (int k = 1; k < mp; ++k) {
      acc += gvals[k] * phase;
      phase *= rot;
    }
    ghat[j] = acc * (du / (2.0 * std::numbers::pi));
  }

  // synthesise F(lambda) = \int ghat(xi) e^{-(1 - i xi) lambda / r} dxi per eigenvalue
  Eigen::VectorXcd fvals = Eigen::VectorXcd::Zero(h.lambda.size());
  for (int i = 0; i < h.lambda.size(); ++i) {
    const double u = h.lambda[i] / r;
    const double damp = std::exp(-u);
    const std::complex<double> rot = std::exp(im * (dxi * u));
    std::complex<double> phase = std::exp(im * (-params.xi_max * u));
    std::complex<double> acc = 0;
    for (int j = 0; j <= np; ++j) {
      double w = (j == 0 || j == np) ? 0.5 : 1.0;
      acc += w * ghat[j] * phase;
      phase *= rot;
    }
    fvals[i] = acc * dxi * damp;
  }

  FourierCrosscheck out;
  out.op = sandwich_complex(h, fvals);
  Eigen::MatrixXd direct = h.apply(f);
  out.max_deviation = (out.op - direct.cast<std::complex<double>>()).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace deglab
