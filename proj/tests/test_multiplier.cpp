#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "deglab/common.hpp"
#include "deglab/multiplier.hpp"

using namespace deglab;
using nlohmann::json;

TEST_CASE("dyadic partition telescopes to one") {
  DyadicPartition p;
  CHECK(p.eta(0.4) == doctest::Approx(1.0));
  CHECK(p.eta(1.05) == doctest::Approx(0.0));
  CHECK(p.phi(0.2) == doctest::Approx(0.0));
  CHECK(p.phi(1.1) == doctest::Approx(0.0));
  CHECK(p.phi(0.5) > 0.0);

  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    double l = std::exp(rng.uniform(std::log(1.0 / 256), std::log(256.0)));
    double sum = 0;
    for (int n = -12; n <= 12; ++n) sum += p.phi(std::ldexp(l, -n));
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("smoothness order validation") {
  CHECK_THROWS_AS(holder_order(1.0), std::invalid_argument);
  CHECK_THROWS_AS(holder_order(2.0 + 1e-12), std::invalid_argument);
  CHECK_THROWS_AS(holder_order(-0.5), std::invalid_argument);
  auto o = holder_order(1.51);
  CHECK(o.integer_part == 1);
  CHECK(o.fraction == doctest::Approx(0.51));
}

TEST_CASE("hoelder norms against closed forms") {
  auto sq = [](double x) { return std::complex<double>(x * x, 0); };
  // sup|f| = 1, sup|f'| = 2, C^{0.5} seminorm of f' = 2 on [0,1]
  CHECK(holder_norm(sq, 0.0, 1.0, 1.5) == doctest::Approx(5.0).epsilon(0.01));

  auto lin = [](double x) { return std::complex<double>(x, 0); };
  CHECK(holder_norm(lin, 0.0, 1.0, 0.5) == doctest::Approx(2.0).epsilon(0.01));

  auto one = [](double) { return std::complex<double>(1, 0); };
  CHECK(holder_norm(one, 0.0, 1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-9));

  // too few samples for the requested order
  std::vector<std::complex<double>> coarse(8, {1.0, 0.0});
  CHECK_THROWS_AS(holder_norm(coarse, 0.0, 1.0, 2.5), std::invalid_argument);
}

TEST_CASE("hoelder norm is a norm") {
  Rng rng(23);
  const int n = 257;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::complex<double>> f(n), g(n), fg(n), f2(n);
    for (int i = 0; i < n; ++i) {
      f[i] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      g[i] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      fg[i] = f[i] + g[i];
      f2[i] = 2.5 * f[i];
    }
    double nf = holder_norm(f, 0.0, 1.0, 0.51);
    double ng = holder_norm(g, 0.0, 1.0, 0.51);
    double nfg = holder_norm(fg, 0.0, 1.0, 0.51);
    double nf2 = holder_norm(f2, 0.0, 1.0, 0.51);
    CHECK(nfg <= nf + ng + 1e-9 * (nf + ng));
    CHECK(nf2 == doctest::Approx(2.5 * nf).epsilon(1e-9));
  }
}

TEST_CASE("multiplier presets") {
  auto presets = multiplier_presets();
  CHECK(std::is_sorted(presets.begin(), presets.end()));
  CHECK(presets.size() == 6);

  CHECK_THROWS_AS(make_multiplier("heat", json::object()), ConfigError);
  CHECK_THROWS_AS(make_multiplier("no_such", json::object()), ConfigError);

  auto heat = make_multiplier("heat", json{{"t", 2.0}});
  CHECK(heat.real_valued);
  CHECK(heat(1.0).real() == doctest::Approx(std::exp(-2.0)));
  CHECK(std::abs(heat(0.0)) == doctest::Approx(1.0));

  auto ip = make_multiplier("imaginary_power", json{{"s", 3.0}});
  CHECK(std::abs(ip(5.0)) == doctest::Approx(1.0));
  CHECK(std::abs(ip(0.0)) == doctest::Approx(1.0));  // guarded at the origin

  auto br = make_multiplier("bochner_riesz", json{{"alpha", 1.1}, {"R", 4.0}});
  CHECK(br.support_upper == doctest::Approx(4.0));
  CHECK(std::abs(br(4.5)) == doctest::Approx(0.0));
  CHECK(br(0.0).real() == doctest::Approx(1.0));

  auto wave = make_multiplier("wave", json{{"alpha", 1.1}, {"t", 1.0}});
  auto sch = make_multiplier("schrodinger", json{{"alpha", 1.1}, {"t", 1.0}});
  for (double l : {0.0, 0.5, 3.0, 100.0}) {
    CHECK(std::abs(wave(l)) <= 1.0 + 1e-12);
    CHECK(std::abs(sch(l)) <= 1.0 + 1e-12);
  }

  auto c = make_multiplier("constant", json::object());
  CHECK(c(7.0).real() == doctest::Approx(1.0));

  auto scaled = scale_multiplier(br, 2.0);
  CHECK(scaled(1.5).real() == doctest::Approx(br(3.0).real()));
  CHECK(scaled.support_upper == doctest::Approx(2.0));
}

TEST_CASE("localized multiplier norms") {
  DyadicPartition part;
  std::vector<double> t_grid = {0.1, 0.3, 1.0, 3.0, 10.0};

  SUBCASE("imaginary powers are scale-invariant") {
    auto ip = make_multiplier("imaginary_power", json{{"s", 2.0}});
    auto res = mihlin_sup(ip, part, 1.51, t_grid);
    CHECK(res.sup > 0);
    for (const auto& [t, v] : res.per_t) CHECK(v == doctest::Approx(res.sup).epsilon(1e-10));
  }

  SUBCASE("finite and stable under grid extension for decaying presets") {
    auto sch = make_multiplier("schrodinger", json{{"alpha", 1.1}, {"t", 1.0}});
    std::vector<double> base, wide;
    for (int i = 0; i < 13; ++i) base.push_back(std::pow(10.0, -1.0 + 2.0 * i / 12.0));
    for (int i = 0; i < 25; ++i) wide.push_back(std::pow(10.0, -2.0 + 4.0 * i / 24.0));
    double a = mihlin_sup(sch, part, 1.01, base).sup;
    double b = mihlin_sup(sch, part, 1.01, wide).sup;
    CHECK(std::isfinite(a));
    CHECK(std::abs(a - b) <= 0.05 * std::max(a, b));
  }
}
