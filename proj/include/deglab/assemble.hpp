#pragma once

#include <array>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "deglab/media.hpp"
#include "deglab/space.hpp"

namespace deglab {

struct SpectralDecomposition;  // spectral.hpp

// Per-axis discrete gradient: averages forward differences of node values to
// cell centres. g[k] maps node vectors to cell vectors.
struct GradientMaps {
  std::array<Eigen::SparseMatrix<double>, 2> g;
  int dim = 1;
};

GradientMaps discrete_gradient(const GridSpace& g);

// Dense matrix acting on sampled functions, tagged with its input/output
// stagger so ill-typed compositions are rejected instead of silently
// misreading cell data as node data.
struct DiscreteOperator {
  Eigen::MatrixXd mat;
  Stagger domain = Stagger::node;
  Stagger codomain = Stagger::node;
  const GridSpace* space = nullptr;
  std::string tag;

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const { return mat * u; }
};

// Galerkin matrix of the form  sum_cells a_kj(c) (G_j u)(c) (G_k v)(c) vol,
// returned as the operator A (the form matrix divided by the node measure).
DiscreteOperator assemble_form_operator(const GridSpace& g, const CoefficientField& field);

// H = A + eps * identity; eps must be positive.
DiscreteOperator shift_identity(const DiscreteOperator& a, double eps);

// Stagger-checked matrix product lhs * rhs; throws on domain/codomain
// mismatch or different underlying spaces.
DiscreteOperator compose(const DiscreteOperator& lhs, const DiscreteOperator& rhs);

// Diagonal multiplication operators.
DiscreteOperator node_multiplier(const GridSpace& g, const Eigen::VectorXd& values,
                                 const std::string& tag = "mult");
DiscreteOperator cell_multiplier(const GridSpace& g, const Eigen::VectorXd& values,
                                 const std::string& tag = "mult");

// Single gradient component as a node -> cell operator.
DiscreteOperator gradient_component(const GridSpace& g, const GradientMaps& maps, int axis);

// Localised Riesz-type operator  M_chi(cells) G_axis H^{-1/2} M_chi(nodes),
// assembled through the spectral decomposition of H.
DiscreteOperator riesz_matrix(const GridSpace& g, const SpectralDecomposition& h,
                              const GradientMaps& maps, const Cutoff& chi, int axis);

}  // namespace deglab
