#pragma once

#include <complex>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "deglab/assemble.hpp"
#include "deglab/space.hpp"

namespace deglab {

// Eigendecomposition of a mu-self-adjoint operator H: columns of `vectors`
// are mu-orthonormal (V^T D V = I with D = diag(mu)), so functions of H act
// as  F(H) = V F(Lambda) V^T D.
struct SpectralDecomposition {
  Eigen::VectorXd lambda;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd mu;
  const GridSpace* space = nullptr;
  double reconstruction_error = 0;  // relative Frobenius error, recorded at build

  int size() const { return static_cast<int>(lambda.size()); }

  // Matrix of F(H) acting on coefficient vectors.
  Eigen::MatrixXd apply(const std::function<double(double)>& f) const;
  Eigen::MatrixXcd apply_complex(const std::function<std::complex<double>(double)>& f) const;
  // e^{-zH}; requires Re z >= 0.
  Eigen::MatrixXcd propagator(std::complex<double> z) const;
};

// Decomposes a node -> node operator against the node measure of its space.
SpectralDecomposition eigendecompose(const DiscreteOperator& h);
// Same for a raw matrix with an explicit measure vector (no space attached).
SpectralDecomposition eigendecompose_matrix(const Eigen::MatrixXd& h, const Eigen::VectorXd& mu);

// F(H) wrapped as an operator.
DiscreteOperator apply_function(const SpectralDecomposition& h,
                                const std::function<double(double)>& f, const std::string& tag);

// H^{-1/2} via the subordination integral  (2/sqrt(pi)) \int_0^inf e^{-s^2 H} ds,
// discretised by the trapezoid rule on [0, sigma_max]. Requires min eigenvalue
// positive (otherwise the integral diverges); sigma_max = 0 selects the
// default 12/sqrt(lambda_min).
struct SubordinationParams {
  double sigma_max = 0;
  int panels = 2000;
};

DiscreteOperator inv_sqrt_subordination(const SpectralDecomposition& h,
                                        SubordinationParams params = {});

// Independent route to F(H) for compactly supported F: scale by r so the
// support lands in [0,1], take the Fourier transform of g(u) = F(ru) e^u and
// synthesise F(H) = \int ghat(xi) e^{-(1-i xi) H/r} dxi. Returns the
// synthesised operator and its maximum entrywise deviation from the direct
// spectral evaluation.
struct FourierParams {
  double xi_max = 512;
  int panels = 1 << 16;
  int profile_panels = 4096;
};

struct FourierCrosscheck {
  Eigen::MatrixXcd op;
  double max_deviation = 0;
};

FourierCrosscheck fourier_calculus_crosscheck(const SpectralDecomposition& h,
                                              const std::function<double(double)>& f, double r,
                                              FourierParams params = {});

}  // namespace deglab
