#pragma once

#include <vector>

namespace deglab {

// C^infinity monotone step: 0 for u <= 0, 1 for u >= 1, strictly increasing
// in between. Built as the normalised running integral of the standard bump
// exp(-kappa / (u (1-u))), evaluated from a cached panel table plus an exact
// Gauss-Legendre correction, so point values are accurate to ~1e-15. That
// head-room matters because high-order divided differences of spectral
// mollifiers are taken through this function.
class SmoothStep {
 public:
  explicit SmoothStep(double sharpness = 1.0);

  double operator()(double u) const;

 private:
  double integrand(double u) const;
  double panel_integral(double a, double b) const;

  double sharpness_;
  int knots_;
  std::vector<double> cum_;  // cumulative integral at k/knots_
  double total_;
};

}  // namespace deglab
