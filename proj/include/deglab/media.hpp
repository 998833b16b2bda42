#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "deglab/space.hpp"

namespace deglab {

// Matrix-valued coefficient field a(x): symmetric, positive semidefinite,
// possibly vanishing on regions of the box. Only the leading dim x dim block
// of the returned matrix is meaningful.
struct CoefficientField {
  std::string preset;
  int dim = 1;
  double lambda_bound = 0;  // sup over sampled points of the spectral norm
  std::function<Eigen::Matrix2d(const Point&)> eval;

  Eigen::Matrix2d operator()(const Point& p) const { return eval(p); }
};

// Presets: "identity", "indicator_region" (params lo/hi box),
// "plateau_bump" (params center, r_plateau, r_outer),
// "anisotropic_plateau" (additionally params eigs).
CoefficientField make_field(const GridSpace& g, const std::string& preset,
                            const nlohmann::json& params);

std::vector<std::string> field_presets();

// Scalar cutoff on the box, smooth and compactly supported away from the
// boundary (except for the "constant" preset).
struct Cutoff {
  std::string preset;
  double sup_norm = 1.0;
  double grad_sup = 0.0;  // sup |grad chi|, measured on a fine radial grid
  bool compactly_supported = true;
  Point center{0, 0};
  double support_radius = 0;  // chi == 0 at distance >= support_radius from center
  std::function<double(const Point&)> eval;

  double operator()(const Point& p) const { return eval(p); }
  Eigen::VectorXd node_samples(const GridSpace& g) const;
  Eigen::VectorXd cell_samples(const GridSpace& g) const;
};

// Presets: "constant" (params value), "plateau" (center, r_inner, r_outer),
// "smooth_bump" (center, radius). Compact presets must keep their support at
// least `margin` (default 2h) away from the box boundary; violations throw.
Cutoff make_cutoff(const GridSpace& g, const std::string& preset, const nlohmann::json& params);

std::vector<std::string> cutoff_presets();

// A measurable sub-region of the box: node set plus membership predicate.
struct Region {
  std::string preset;
  std::vector<int> nodes;
  std::function<bool(const Point&)> contains;

  Eigen::VectorXd node_indicator(const GridSpace& g) const;  // 0/1 vector
  std::vector<int> cells(const GridSpace& g) const;          // cells whose centre lies inside
};

// Presets: "all", "box" (params lo/hi), "ball" (params center, radius).
Region make_region(const GridSpace& g, const std::string& preset, const nlohmann::json& params);

std::vector<std::string> region_presets();

// Pointwise ellipticity audit of a(x) over the given cells.
struct EllipticityReport {
  double mu = 0;        // requested lower bound
  double min_eig = 0;   // measured minimum eigenvalue over the cells
  bool pass = false;
  int cells_checked = 0;
};

EllipticityReport ellipticity_check(const GridSpace& g, const CoefficientField& field,
                                    std::span<const int> cells, double mu);

// Cells whose centre carries a nonzero cutoff value.
std::vector<int> support_cells(const GridSpace& g, const Cutoff& chi);

}  // namespace deglab
