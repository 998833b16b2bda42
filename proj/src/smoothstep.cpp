#include "deglab/smoothstep.hpp"

#include <cmath>
#include <stdexcept>

namespace deglab {

namespace {

// 8-point Gauss-Legendre rule on [-1, 1]
constexpr double kGlNode[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeight[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

}  // namespace

SmoothStep::SmoothStep(double sharpness) : sharpness_(sharpness), knots_(1024) {
  if (!(sharpness > 0)) throw std::invalid_argument("SmoothStep: sharpness must be positive");
  cum_.assign(knots_ + 1, 0.0);
  const double dx = 1.0 / knots_;
  for (int k = 0; k < knots_; ++k) {
    cum_[k + 1] = cum_[k] + panel_integral(k * dx, (k + 1) * dx);
  }
  total_ = cum_[knots_];
}

double SmoothStep::integrand(double u) const {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return std::exp(-sharpness_ / (u * (1.0 - u)));
}

double SmoothStep::panel_integral(double a, double b) const {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 8; ++i) s += kGlWeight[i] * integrand(mid + half * kGlNode[i]);
  return s * half;
}

double SmoothStep::operator()(double u) const {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double dx = 1.0 / knots_;
  int k = static_cast<int>(u * knots_);
  if (k >= knots_) k = knots_ - 1;
  double part = cum_[k] + panel_integral(k * dx, u);
  return part / total_;
}

}  // namespace deglab
