#include <doctest.h>

#include <cmath>

#include "deglab/common.hpp"
#include "deglab/media.hpp"

using namespace deglab;
using nlohmann::json;

namespace {
const json kEmpty = json::object();
}

TEST_CASE("coefficient field presets") {
  auto g = build_grid(1, 8.0, 64, Boundary::periodic);

  auto id = make_field(g, "identity", kEmpty);
  CHECK(id.lambda_bound == doctest::Approx(1.0));
  CHECK(id({3.0, 0.0})(0, 0) == doctest::Approx(1.0));

  auto ind = make_field(g, "indicator_region", json{{"lo", {2.0}}, {"hi", {6.0}}});
  CHECK(ind({4.0, 0.0})(0, 0) == doctest::Approx(1.0));
  CHECK(ind({1.0, 0.0})(0, 0) == doctest::Approx(0.0));
  CHECK(ind({7.5, 0.0})(0, 0) == doctest::Approx(0.0));

  auto plateau = make_field(
      g, "plateau_bump", json{{"center", {4.0}}, {"r_plateau", 2.2}, {"r_outer", 3.2}});
  CHECK(plateau({4.0, 0.0})(0, 0) == doctest::Approx(1.0));
  CHECK(plateau({4.0 + 2.1, 0.0})(0, 0) == doctest::Approx(1.0));
  CHECK(plateau({7.5, 0.0})(0, 0) == doctest::Approx(0.0));
  double mid = plateau({4.0 + 2.7, 0.0})(0, 0);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);

  CHECK_THROWS_AS(make_field(g, "no_such_field", kEmpty), ConfigError);
}

TEST_CASE("anisotropic field keeps its eigenvalues on the plateau") {
  auto g = build_grid(2, 8.0, 16, Boundary::periodic);
  auto f = make_field(g, "anisotropic_plateau",
                      json{{"center", {4.0, 4.0}},
                           {"r_plateau", 2.0},
                           {"r_outer", 3.0},
                           {"eigs", {2.0, 0.5}}});
  Eigen::Matrix2d at_center = f({4.0, 4.0});
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(at_center);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.5));
  CHECK(es.eigenvalues()(1) == doctest::Approx(2.0));
  CHECK(f.lambda_bound == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("cutoff presets") {
  auto g = build_grid(1, 8.0, 64, Boundary::periodic);

  auto c = make_cutoff(g, "constant", json{{"value", 0.5}});
  CHECK(c.sup_norm == doctest::Approx(0.5));
  CHECK(c.grad_sup == doctest::Approx(0.0));
  CHECK_FALSE(c.compactly_supported);
  CHECK(c.node_samples(g).minCoeff() == doctest::Approx(0.5));

  auto p = make_cutoff(g, "plateau",
                       json{{"center", {4.0}}, {"r_inner", 1.6}, {"r_outer", 2.0}});
  CHECK(p.compactly_supported);
  CHECK(p.support_radius == doctest::Approx(2.0));
  CHECK(p({4.0, 0.0}) == doctest::Approx(1.0));
  CHECK(p({4.0 + 1.5, 0.0}) == doctest::Approx(1.0));
  CHECK(p({4.0 + 2.1, 0.0}) == doctest::Approx(0.0));
  CHECK(p.grad_sup > 0.0);
  CHECK(std::isfinite(p.grad_sup));

  auto b = make_cutoff(g, "smooth_bump", json{{"center", {4.0}}, {"radius", 1.0}});
  CHECK(b({4.0, 0.0}) == doctest::Approx(1.0));
  CHECK(b({5.5, 0.0}) == doctest::Approx(0.0));

  // support must stay clear of the box boundary
  CHECK_THROWS_AS(make_cutoff(g, "plateau",
                              json{{"center", {7.0}}, {"r_inner", 0.5}, {"r_outer", 1.5}}),
                  ConfigError);
}

TEST_CASE("regions") {
  auto g = build_grid(1, 8.0, 32, Boundary::periodic);
  auto all = make_region(g, "all", kEmpty);
  CHECK(static_cast<int>(all.nodes.size()) == g.node_count());
  CHECK(all.node_indicator(g).sum() == doctest::Approx(g.node_count()));

  auto box = make_region(g, "box", json{{"lo", {2.0}}, {"hi", {6.0}}});
  for (int n : box.nodes) {
    double x = g.node_coord(n)[0];
    CHECK(x >= 2.0);
    CHECK(x <= 6.0);
  }
  Eigen::VectorXd ind = box.node_indicator(g);
  for (int n = 0; n < g.node_count(); ++n) {
    bool inside = box.contains(g.node_coord(n));
    CHECK(ind[n] == doctest::Approx(inside ? 1.0 : 0.0));
  }

  auto ball = make_region(g, "ball", json{{"center", {4.0}}, {"radius", 1.0}});
  for (int n : ball.nodes) CHECK(g.distance(g.node_coord(n), {4.0, 0.0}) < 1.0);
  CHECK_FALSE(ball.cells(g).empty());
}

TEST_CASE("ellipticity audit") {
  auto g = build_grid(1, 8.0, 32, Boundary::periodic);
  auto id = make_field(g, "identity", kEmpty);
  std::vector<int> all_cells;
  for (int c = 0; c < g.cell_count(); ++c) all_cells.push_back(c);
  auto rep = ellipticity_check(g, id, all_cells, 1.0);
  CHECK(rep.pass);
  CHECK(rep.min_eig == doctest::Approx(1.0));

  auto ind = make_field(g, "indicator_region", json{{"lo", {2.0}}, {"hi", {6.0}}});
  auto rep2 = ellipticity_check(g, ind, all_cells, 0.5);
  CHECK_FALSE(rep2.pass);
  CHECK(rep2.min_eig == doctest::Approx(0.0));
}

TEST_CASE("support cells follow the cutoff") {
  auto g = build_grid(1, 8.0, 64, Boundary::periodic);
  auto c = make_cutoff(g, "constant", kEmpty);
  CHECK(static_cast<int>(support_cells(g, c).size()) == g.cell_count());
  auto p = make_cutoff(g, "plateau",
                       json{{"center", {4.0}}, {"r_inner", 1.6}, {"r_outer", 2.0}});
  auto cells = support_cells(g, p);
  CHECK_FALSE(cells.empty());
  CHECK(static_cast<int>(cells.size()) < g.cell_count());
  for (int cell : cells) CHECK(std::abs(p(g.cell_coord(cell))) > 0.0);
}
