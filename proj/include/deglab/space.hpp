#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace deglab {

// A point of the box [0,L]^dim. The second coordinate is ignored in 1D.
using Point = std::array<double, 2>;

enum class Boundary { periodic, neumann };

enum class Stagger { node, cell };

// Uniform lattice on [0,L]^dim. Nodes sit at cell centres (i+1/2)h and carry
// measure h^dim; gradient cells sit between adjacent nodes (N per axis when
// periodic, N-1 when the boundary is reflecting).
struct GridSpace {
  int dim = 1;
  double extent = 1.0;     // L, per axis
  int nodes_per_axis = 2;  // N, a power of two
  Boundary boundary = Boundary::periodic;
  double spacing = 0.5;  // h = L/N

  int node_count() const;
  int cells_per_axis() const;
  int cell_count() const;
  int corners_per_cell() const { return 1 << dim; }

  Point node_coord(int node) const;
  Point cell_coord(int cell) const;

  double node_measure() const;  // h^dim (uniform over nodes)
  double cell_volume() const;   // h^dim (uniform over cells)
  Eigen::VectorXd node_measures() const;
  double total_measure() const;

  // Distance of the metric measure space: torus metric when periodic,
  // Euclidean otherwise.
  double distance(const Point& a, const Point& b) const;
  double node_distance(int a, int b) const;

  // Open ball: nodes with distance(x, center) < r.
  std::vector<int> ball(int center_node, double radius) const;
  // Annulus decomposition around a ball of radius r: j = 1 is B(x, 4r),
  // j >= 2 is B(x, 2^{j+1} r) \ B(x, 2^j r).
  std::vector<int> annulus(int center_node, int j, double radius) const;
  double volume(std::span<const int> nodes) const;

  // flat index <-> per-axis index helpers
  int node_index(int ix, int iy = 0) const { return ix + nodes_per_axis * iy; }
  std::array<int, 2> node_split(int node) const;
  int cell_index(int jx, int jy = 0) const { return jx + cells_per_axis() * jy; }
  std::array<int, 2> cell_split(int cell) const;
  // Node indices of the cell's corners (2 in 1D, 4 in 2D, lexicographic).
  std::array<int, 4> cell_corners(int cell) const;
};

// Validates and builds a grid. Throws std::invalid_argument when dim is not
// 1 or 2, N is not a power of two, extent is not positive, or the total node
// count would exceed the dense-solver budget of 4096.
GridSpace build_grid(int dim, double extent, int nodes_per_axis, Boundary boundary);

// Empirical volume-doubling summary over sampled (x, r, lambda) triples with
// r in the validity window [2h, L/4].
struct DoublingReport {
  double c0 = 0;     // sup of v(x,2r)/v(x,r) over samples
  double c1 = 0;     // v(x,lr) <= c1 * l^d_eff * v(x,r) holds on all samples
  double d_eff = 0;  // least-squares volume growth exponent
  double r_min = 0;
  double r_max = 0;
  int samples = 0;
};

DoublingReport doubling_report(const GridSpace& g, int sample_count, std::uint64_t seed);

// Axis-aligned dyadic cube in node-index space (side a power of two, no
// wrap-around even on the torus).
struct DyadicCube {
  std::array<int, 2> origin{0, 0};  // node index per axis
  int side = 1;                     // nodes per axis
};

std::vector<int> cube_nodes(const GridSpace& g, const DyadicCube& c);

}  // namespace deglab
