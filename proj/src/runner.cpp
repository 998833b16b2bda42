#include "deglab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <thread>

#include "deglab/assemble.hpp"
#include "deglab/common.hpp"
#include "deglab/czkit.hpp"
#include "deglab/media.hpp"
#include "deglab/multiplier.hpp"
#include "deglab/report.hpp"
#include "deglab/space.hpp"
#include "deglab/spectral.hpp"
#include "deglab/verify.hpp"

namespace deglab {

namespace {

constexpr const char* kToolName = "deglab";
constexpr const char* kToolVersion = "0.1.0";

struct RunContext {
  RunContext() = default;
  RunContext(const RunContext&) = delete;
  RunContext& operator=(const RunContext&) = delete;

  const ExperimentConfig* cfg = nullptr;
  GridSpace grid;
  CoefficientField field;
  Cutoff chi;
  Cutoff chi_tilde;
  Region region;
  bool has_region = false;
  GradientMaps maps;
  DiscreteOperator a_op;
  DiscreteOperator h_op;
  SpectralDecomposition h;
  Eigen::VectorXd chi_nodes, chi_tilde_nodes, chi_cells;
  Eigen::VectorXd region_nodes;
  Eigen::VectorXd node_mu, cell_mu;
  std::vector<int> plateau_samples;
  double lambda_min = 0, lambda_max = 0;
};

struct Outcome {
  std::string status = "pass";
  std::vector<CsvRow> rows;
  nlohmann::json summary = nlohmann::json::object();
};

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out;
  if (n <= 1 || hi <= lo) {
    out.push_back(lo);
    return out;
  }
  const double la = std::log(lo), lb = std::log(hi);
  for (int i = 0; i < n; ++i) out.push_back(std::exp(la + (lb - la) * i / (n - 1)));
  // exp/log round-trip can overshoot by an ulp, which matters when the
  // endpoints are the validity-window edges
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> resolve_t_grid(const nlohmann::json& params, double lo, double hi, int n) {
  if (params.contains("t_grid")) {
    const auto& tg = params.at("t_grid");
    if (tg.is_array()) {
      std::vector<double> out;
      for (const auto& v : tg) out.push_back(v.get<double>());
      return out;
    }
    return log_grid(tg.value("min", lo), tg.value("max", hi), tg.value("count", n));
  }
  return log_grid(lo, hi, n);
}

std::string pjson(const nlohmann::json& j) { return j.dump(); }

// least-squares slope of log(v) against log(t), skipping nonpositive values
double loglog_slope(const std::vector<double>& t, const std::vector<double>& v) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t i = 0; i < t.size() && i < v.size(); ++i) {
    if (!(t[i] > 0) || !(v[i] > 0)) continue;
    const double x = std::log(t[i]), y = std::log(v[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return 0;
  const double denom = m * sxx - sx * sx;
  return denom == 0 ? 0 : (m * sxy - sx * sy) / denom;
}

double spread_ratio(const std::vector<double>& v) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (double x : v)
    if (x > 0) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  return (hi > 0 && std::isfinite(lo) && lo > 0) ? hi / lo : 0;
}

bool all_finite(const std::vector<CsvRow>& rows) {
  for (const auto& r : rows)
    if (!std::isfinite(r.value)) return false;
  return true;
}

// --- gaussian ----------------------------------------------------------------

Outcome run_gaussian(const RunContext& c, const ExperimentSpec& e) {
  Outcome out;
  auto [w0, w1] = time_validity_window(c.grid);
  const auto t_grid = resolve_t_grid(e.params, w0, w1, 25);
  std::vector<double> c_grid = {1.0 / 32, 1.0 / 16, 1.0 / 8, 3.0 / 16, 7.0 / 32, 15.0 / 64};
  if (e.params.contains("c_grid")) {
    c_grid.clear();
    for (const auto& v : e.params.at("c_grid")) c_grid.push_back(v.get<double>());
  }
  const double pair_window = e.params.value("pair_window", 11.0);
  const double c_ref = e.params.value("c_ref", 0.125);

  // P_Omega e^{-tH} P_Omega when a region is configured, M_chitilde ... M_chi
  // otherwise (constant cutoffs make this the bare propagator).
  const Eigen::VectorXd& left = c.has_region ? c.region_nodes : c.chi_tilde_nodes;
  const Eigen::VectorXd& right = c.has_region ? c.region_nodes : c.chi_nodes;
  auto provider = [&](double t) {
    return abs_kernel(
        c.h, &left, [t](double l) { return std::complex<double>(std::exp(-t * l), 0); }, true,
        &right);
  };

  const std::string tag = e.params.value("label", std::string());
  for (bool factor : {false, true}) {
    GaussianFit fit = gaussian_fit(c.grid, provider, t_grid, c_grid, factor, pair_window, c_ref);
    const std::string suffix = factor ? "_with_factor" : "_no_factor";
    for (size_t i = 0; i < fit.c_grid.size(); ++i)
      out.rows.push_back({"gaussian", pjson({{"c", fit.c_grid[i]}}),
                          "fitted_constant" + suffix, fit.c_values[i], std::nullopt,
                          std::nullopt});
    for (size_t i = 0; i < fit.t_grid.size(); ++i)
      out.rows.push_back({"gaussian", pjson({{"t", fit.t_grid[i]}, {"c", c_ref}}),
                          "constant_at_c_ref" + suffix, fit.c_ref_per_t[i], std::nullopt,
                          std::nullopt});
    const double slope = loglog_slope(fit.t_grid, fit.c_ref_per_t);
    out.rows.push_back({"gaussian", pjson({{"c", c_ref}}), "growth_slope" + suffix, slope,
                        std::nullopt, std::nullopt});
    out.rows.push_back({"gaussian", pjson({{"c", c_ref}}), "constant_spread" + suffix,
                        spread_ratio(fit.c_ref_per_t), std::nullopt, std::nullopt});
    out.summary["growth_slope" + suffix] = slope;
    out.summary["constant_at_c_ref" + suffix] =
        *std::max_element(fit.c_ref_per_t.begin(), fit.c_ref_per_t.end());
    if (!factor) {
      bool flagged = false;
      for (bool in : fit.t_in_window) flagged = flagged || !in;
      if (flagged) out.status = "flagged";
      out.summary["t_outside_window"] = flagged;
    }
  }
  (void)tag;
  if (!all_finite(out.rows)) out.status = "fail";
  return out;
}

// --- supbounds ---------------------------------------------------------------

Outcome run_supbounds(const RunContext& c, const ExperimentSpec& e) {
  Outcome out;
  auto [w0, w1] = time_validity_window(c.grid);
  const auto t_grid = resolve_t_grid(e.params, w0, w1, 25);
  const Eigen::VectorXd& chi = c.has_region ? c.region_nodes : c.chi_nodes;
  auto rows = sup_bounds(c.grid, c.h, chi, t_grid);
  double sup2 = 0, sup1 = 0;
  bool flagged = false;
  for (const auto& r : rows) {
    const std::string p = pjson({{"t", r.t}});
    out.rows.push_back({"supbounds", p, "two_to_inf", r.two_inf, std::nullopt, std::nullopt});
    out.rows.push_back({"supbounds", p, "one_to_inf", r.one_inf, std::nullopt, std::nullopt});
    out.rows.push_back(
        {"supbounds", p, "two_to_inf_normalized", r.two_inf_normalized, std::nullopt, std::nullopt});
    out.rows.push_back(
        {"supbounds", p, "one_to_inf_normalized", r.one_inf_normalized, std::nullopt, std::nullopt});
    sup2 = std::max(sup2, r.two_inf_normalized);
    sup1 = std::max(sup1, r.one_inf_normalized);
    flagged = flagged || !r.in_window;
  }
  out.rows.push_back({"supbounds", "{}", "sup_two_to_inf_normalized", sup2, std::nullopt,
                      std::nullopt});
  out.rows.push_back({"supbounds", "{}", "sup_one_to_inf_normalized", sup1, std::nullopt,
                      std::nullopt});
  out.summary["sup_two_to_inf_normalized"] = sup2;
  out.summary["sup_one_to_inf_normalized"] = sup1;
  if (flagged) out.status = "flagged";
  if (!all_finite(out.rows)) out.status = "fail";
  return out;
}

// --- complex_time ------------------------------------------------------------

Outcome run_complex_time(const RunContext& c, const ExperimentSpec& e) {
  Outcome out;
  auto [w0, w1] = time_validity_window(c.grid);
  const auto t_grid = resolve_t_grid(e.params, w0, w1, 13);
  std::vector<double> angles = {0.0, std::acos(-1.0) / 6, std::acos(-1.0) / 3};
  if (e.params.contains("angles")) {
    angles.clear();
    for (const auto& v : e.params.at("angles")) angles.push_back(v.get<double>());
  }
  const double c_rate = e.params.value("c_rate", 1.0 / 16);
  const Eigen::VectorXd& chi = c.has_region ? c.region_nodes : c.chi_nodes;

  double real_axis_sup = 0, overall_sup = 0;
  bool flagged = false;
  for (double theta : angles) {
    std::vector<std::complex<double>> z_grid;
    for (double t : t_grid) z_grid.push_back(std::polar(t, theta));
    auto rep = complex_time_check(c.grid, c.h, chi, chi, z_grid, 0.0, c_rate);
    double angle_sup = 0;
    for (const auto& row : rep.rows) {
      out.rows.push_back({"complex_time",
                          pjson({{"abs_z", std::abs(row.z)}, {"arg_z", theta}}),
                          "complex_constant", row.constant, std::nullopt, std::nullopt});
      angle_sup = std::max(angle_sup, row.constant);
      flagged = flagged || !row.in_window;
    }
    out.rows.push_back({"complex_time", pjson({{"arg_z", theta}}), "angle_sup", angle_sup,
                        std::nullopt, std::nullopt});
    if (theta == 0) real_axis_sup = angle_sup;
    overall_sup = std::max(overall_sup, angle_sup);
  }
  out.rows.push_back(
      {"complex_time", "{}", "overall_sup", overall_sup, std::nullopt, std::nullopt});
  if (real_axis_sup > 0)
    out.rows.push_back({"complex_time", "{}", "sup_over_real_axis_ratio",
                        overall_sup / real_axis_sup, std::nullopt, std::nullopt});
  out.summary["overall_sup"] = overall_sup;
  out.summary["real_axis_sup"] = real_axis_sup;
  if (flagged) out.status = "flagged";
  if (!all_finite(out.rows)) out.status = "fail";
  return out;
}

// --- offdiag -------------------------------------------------------------------

Outcome run_offdiag(const RunContext& c, const ExperimentSpec& e) {
  Outcome out;
  const double L = c.grid.extent, h = c.grid.spacing;
  const auto t_grid = resolve_t_grid(e.params, 2 * h, L / 16, 5);
  const int q0 = e.params.value("q0", 2);
  const int j_max = e.params.value("j_max", 6);
  const std::uint64_t seed = e.params.value("seed", c.cfg->seed);
  auto profile =
      off_diagonal_profile(c.grid, c.h, c.chi_nodes, t_grid, c.plateau_samples, q0, j_max, seed);

  const double gmax =
      profile.g.empty() ? 0 : *std::max_element(profile.g.begin(), profile.g.end());
  const double floor = std::max(1e-14, 1e-12 * gmax);
  for (size_t i = 0; i < profile.g.size(); ++i) {
    const int j = static_cast<int>(i) + 1;
    out.rows.push_back(
        {"offdiag", pjson({{"j", j}}), "g", profile.g[i], std::nullopt, std::nullopt});
    out.rows.push_back({"offdiag", pjson({{"j", j}}), "weighted_partial_sum",
                        profile.weighted_partial[i], std::nullopt, std::nullopt});
  }
  out.rows.push_back({"offdiag", "{}", "saturation_ratio", profile.saturation_ratio, std::nullopt,
                      std::nullopt});

  bool decreasing = true;
  for (size_t i = 1; i + 1 < profile.g.size(); ++i)
    if (profile.g[i + 1] > std::max(profile.g[i], floor)) decreasing = false;
  const bool saturated = profile.g.size() < 6 || profile.saturation_ratio <= 0.01;
  out.summary["decreasing_from_j2"] = decreasing;
  out.summary["saturation_ratio"] = profile.saturation_ratio;
  for (const auto& n : profile.notes) out.summary["notes"].push_back(n);
  if (!decreasing || !saturated) out.status = "fail";
  if (!all_finite(out.rows)) out.status = "fail";
  return out;
}

// --- weak-(1,1) instances shared by dm and weak11 ------------------------------

struct WeakInstance {
  std::string label;
  Stagger out_stagger = Stagger::node;
  Eigen::MatrixXcd t_mat;  // coefficient action of T
  Eigen::MatrixXcd s_mat;  // coefficient action of S (no input-side cutoff)
  std::function<Eigen::MatrixXd(double)> absdiff;  // |K_{T - S A_t}| at length scale t
};

MultiplierFunction instance_multiplier(const RunContext& c, const nlohmann::json& inst) {
  nlohmann::json params = inst.value("params", nlohmann::json::object());
  const std::string preset = inst.value("preset", std::string("bochner_riesz"));
  if (preset == "bochner_riesz") {
    if (!params.contains("alpha")) params["alpha"] = c.grid.dim / 2.0 + 0.6;
    if (!params.contains("R")) params["R"] = c.lambda_max;
  }
  return make_multiplier(preset, params);
}

WeakInstance build_weak_instance(const RunContext& c, const nlohmann::json& inst) {
  WeakInstance w;
  const std::string kind = inst.value("kind", std::string("multiplier"));
  const auto cchi = c.chi_nodes.cast<std::complex<double>>();
  if (kind == "riesz") {
    const int axis = inst.value("axis", 0);
    if (axis < 0 || axis >= c.grid.dim)
      throw std::invalid_argument("riesz instance: axis out of range");
    w.label = "riesz_axis" + std::to_string(axis);
    w.out_stagger = Stagger::cell;
    const Eigen::MatrixXd core =
        c.maps.g[axis] * c.h.apply([](double l) { return 1.0 / std::sqrt(l); });
    const Eigen::MatrixXd s_real = c.chi_cells.asDiagonal() * core;
    w.s_mat = s_real.cast<std::complex<double>>();
    w.t_mat = (s_real * c.chi_nodes.asDiagonal()).cast<std::complex<double>>();
    const SpectralDecomposition* h = &c.h;
    const GridSpace* g = &c.grid;
    const GradientMaps* maps = &c.maps;
    Eigen::VectorXd chi_cells = c.chi_cells, chi_nodes = c.chi_nodes;
    w.absdiff = [h, g, maps, axis, chi_cells, chi_nodes](double t) {
      const Eigen::MatrixXd m =
          maps->g[axis] * h->apply([t](double l) {
            return (1.0 - std::exp(-t * t * l)) / std::sqrt(l);
          });
      Eigen::MatrixXd k = (chi_cells.asDiagonal() * m * chi_nodes.asDiagonal()).cwiseAbs();
      // coefficient action -> kernel against the node measure
      k.array().rowwise() /= (g->node_measures().transpose().array());
      return k;
    };
    return w;
  }
  if (kind != "multiplier") throw std::invalid_argument("unknown weak instance kind: " + kind);
  MultiplierFunction f = instance_multiplier(c, inst);
  w.label = f.preset + f.params.dump();
  w.out_stagger = Stagger::node;
  const Eigen::MatrixXcd f_h = c.h.apply_complex(f.fn);
  w.s_mat = cchi.asDiagonal() * f_h;
  w.t_mat = w.s_mat * cchi.asDiagonal();
  const SpectralDecomposition* h = &c.h;
  Eigen::VectorXd chi = c.chi_nodes;
  auto fn = f.fn;
  bool real = f.real_valued;
  w.absdiff = [h, chi, fn, real](double t) {
    return abs_kernel(
        *h, &chi,
        [fn, t](double l) { return fn(l) * (1.0 - std::exp(-t * t * l)); }, real, &chi);
  };
  return w;
}

// --- dm -------------------------------------------------------------------------

Outcome run_dm(const RunContext& c, const ExperimentSpec& e) {
  Outcome out;
  const double unit = (c.grid.extent / 8) * (c.grid.extent / 8);
  const auto t_grid = resolve_t_grid(e.params, 0.08 * unit, 0.22 * unit, 6);
  const double delta = e.params.value("delta", 4.0);
  nlohmann::json inst = e.params.value("multiplier", nlohmann::json::object());
  inst["kind"] = inst.value("kind", std::string("multiplier"));
  WeakInstance w = build_weak_instance(c, inst);

  auto rep = dm_condition(c.grid, w.absdiff, w.out_stagger, t_grid, delta, c.plateau_samples);
  for (size_t i = 0; i < rep.t_grid.size(); ++i) {
    const std::string p = pjson({{"t", rep.t_grid[i]}});
    out.rows.push_back(
        {"dm", p, "w_kernel", rep.w_kernel_per_t[i], std::nullopt, std::nullopt});
    out.rows.push_back(
        {"dm", p, "w_operator", rep.w_operator_per_t[i], rep.w_kernel_per_t[i],
         rep.w_kernel_per_t[i] > 0 ? std::optional<double>(rep.w_operator_per_t[i] /
                                                           rep.w_kernel_per_t[i])
                                   : std::nullopt});
  }
  out.rows.push_back({"dm", "{}", "w_kernel_sup", rep.w_kernel, std::nullopt, std::nullopt});
  out.rows.push_back({"dm", "{}", "w_operator_sup", rep.w_operator, std::nullopt, std::nullopt});
  const double stability = spread_ratio(rep.w_kernel_per_t);
  out.rows.push_back({"dm", "{}", "w_stability_ratio", stability, std::nullopt, std::nullopt});
  out.summary["instance"] = w.label;
  out.summary["w_kernel_sup"] = rep.w_kernel;
  out.summary["w_stability_ratio"] = stability;

  bool op_le_kernel = true;
  for (size_t i = 0; i < rep.t_grid.size(); ++i)
    if (rep.w_operator_per_t[i] > rep.w_kernel_per_t[i] * (1 + 1e-9) + 1e-12)
      op_le_kernel = false;
  out.summary["operator_le_kernel"] = op_le_kernel;
  if (!op_le_kernel) out.status = "fail";
  if (!all_finite(out.rows)) out.status = "fail";
  return out;
}

// --- multiplier_osc -------------------------------------------------------------

Outcome run_multiplier_osc(const RunContext& c, const ExperimentSpec& e) {
  Outcome out;
  const double unit = (c.grid.extent / 8) * (c.grid.extent / 8);
  const auto t_grid = resolve_t_grid(e.params, 0.08 * unit, 0.22 * unit, 6);
  const double s = e.params.value("s", c.grid.dim / 2.0 + 0.51);
  nlohmann::json inst = e.params.value(
      "multiplier", nlohmann::json{{"preset", "imaginary_power"}, {"params", {{"s", 2.0}}}});
  MultiplierFunction f = instance_multiplier(c, inst);
  const int n_min = e.params.value(
      "n_min", static_cast<int>(std::floor(std::log2(std::max(c.lambda_min, 1e-12)))) - 1);
  const int n_max =
      e.params.value("n_max", static_cast<int>(std::ceil(std::log2(c.lambda_max))) + 1);
  DyadicPartition partition = dyadic_partition();

  auto table = dyadic_oscillation(c.grid, c.h, c.chi_nodes, f, partition, s, t_grid, n_min, n_max);
  for (size_t ni = 0; ni < table.n_values.size(); ++ni)
    for (size_t ti = 0; ti < table.t_grid.size(); ++ti)
      out.rows.push_back({"multiplier_osc",
                          pjson({{"n", table.n_values[ni]}, {"t", table.t_grid[ti]}}), "i_nt",
                          table.i_table(static_cast<int>(ni), static_cast<int>(ti)), std::nullopt,
                          std::nullopt});
  for (size_t ti = 0; ti < table.t_grid.size(); ++ti)
    out.rows.push_back({"multiplier_osc", pjson({{"t", table.t_grid[ti]}}), "sum_over_n",
                        table.sums_per_t[ti], std::nullopt, std::nullopt});
  out.rows.push_back(
      {"multiplier_osc", "{}", "c_star", table.c_star, std::nullopt, std::nullopt});
  out.rows.push_back({"multiplier_osc", "{}", "mihlin_value", table.mihlin_value, std::nullopt,
                      std::nullopt});
  const double stability = spread_ratio(table.sums_per_t);
  out.rows.push_back(
      {"multiplier_osc", "{}", "sum_stability_ratio", stability, std::nullopt, std::nullopt});
  out.summary["instance"] = f.preset + f.params.dump();
  out.summary["sum_stability_ratio"] = stability;
  out.summary["c_star"] = table.c_star;
  out.summary["order_check"] = table.order_check;

  double total = 0;
  for (double v : table.sums_per_t) total += v;
  bool nonneg = true;
  for (size_t ni = 0; ni < table.n_values.size(); ++ni)
    for (size_t ti = 0; ti < table.t_grid.size(); ++ti)
      if (table.i_table(static_cast<int>(ni), static_cast<int>(ti)) < -1e-12) nonneg = false;
  if (table.order_check > 1e-10 * std::max(1.0, total) || !nonneg) out.status = "fail";
  if (!all_finite(out.rows)) out.status = "fail";
  return out;
}

// --- mihlin ----------------------------------------------------------------------

Outcome run_mihlin(const RunContext& c, const ExperimentSpec& e) {
  Outcome out;
  const auto t_grid = resolve_t_grid(e.params, 0.03, 30.0, 25);
  const double s = e.params.value("s", c.grid.dim / 2.0 + 0.51);
  nlohmann::json inst = e.params.value(
      "multiplier", nlohmann::json{{"preset", "imaginary_power"}, {"params", {{"s", 2.0}}}});
  MultiplierFunction f = instance_multiplier(c, inst);
  auto res = mihlin_sup(f, dyadic_partition(), s, t_grid);
  for (const auto& [t, v] : res.per_t)
    out.rows.push_back(
        {"mihlin", pjson({{"t", t}}), "localized_norm", v, std::nullopt, std::nullopt});
  out.rows.push_back({"mihlin", "{}", "sup", res.sup, std::nullopt, std::nullopt});
  out.summary["instance"] = f.preset + f.params.dump();
  out.summary["sup"] = res.sup;
  if (!all_finite(out.rows)) out.status = "fail";
  return out;
}

// --- riesz -----------------------------------------------------------------------

Outcome run_riesz(const RunContext& c, const ExperimentSpec& e) {
  Outcome out;
  const double mu = e.params.value("mu", 1.0);
  auto rep = riesz_l2_check(c.grid, c.h, c.field, c.chi, c.maps, mu);
  for (size_t k = 0; k < rep.norms.size(); ++k) {
    const std::string p = pjson({{"axis", static_cast<int>(k)}});
    out.rows.push_back({"riesz", p, "operator_norm", rep.norms[k], rep.bound,
                        rep.bound > 0 ? std::optional<double>(rep.norms[k] / rep.bound)
                                      : std::nullopt});
    out.rows.push_back({"riesz", p, "margin", rep.margins[k], std::nullopt, std::nullopt});
  }
  out.rows.push_back({"riesz", "{}", "bound", rep.bound, std::nullopt, std::nullopt});
  out.rows.push_back({"riesz", "{}", "ellipticity_min_eig", rep.ellipticity.min_eig, mu,
                      std::nullopt});
  out.summary["bound"] = rep.bound;
  out.summary["pass"] = rep.pass;
  out.summary["ellipticity_min_eig"] = rep.ellipticity.min_eig;
  if (!rep.pass) out.status = "fail";
  return out;
}

// --- cz --------------------------------------------------------------------------

Outcome run_cz(const RunContext& c, const ExperimentSpec& e) {
  Outcome out;
  const int trials = e.params.value("trials", 20);
  const std::uint64_t seed = e.params.value("seed", c.cfg->seed);
  Rng rng(seed * 2654435761u + 17);
  const int n = c.grid.node_count();
  const double bound_good = std::ldexp(1.0, c.grid.dim);
  const double bound_bad = std::ldexp(1.0, c.grid.dim + 1);
  const double bound_mass = std::pow(3.0, c.grid.dim);

  double max_good = 0, max_bad = 0, max_mass = 0, max_overlap = 0, max_recon = 0, max_meanzero = 0;
  bool ok = true;
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i) f[i] = rng.uniform(-1.0, 1.0);
    // a few spiky entries so the bad set is nonempty at moderate alpha
    for (int k = 0; k < 3; ++k) f[rng.uniform_int(n)] += rng.uniform(4.0, 16.0);
    const double l1 = (f.cwiseAbs().array() * c.node_mu.array()).sum();
    const double base = l1 / c.grid.total_measure();
    const double alpha = base * rng.uniform(1.5, 8.0);
    auto dec = cz_decompose(c.grid, f, alpha);

    max_good = std::max(max_good, dec.c_good);
    max_bad = std::max(max_bad, dec.c_bad);
    max_mass = std::max(max_mass, dec.c_mass);
    max_overlap = std::max(max_overlap, dec.overlap);
    const double recon = dec.reconstruction_error / std::max(1.0, f.cwiseAbs().maxCoeff());
    max_recon = std::max(max_recon, recon);
    for (const auto& piece : dec.bad) {
      double m = 0;
      for (Eigen::Index i = 0; i < piece.values.size(); ++i)
        m += piece.values[i] * c.grid.node_measure();
      max_meanzero = std::max(max_meanzero, std::abs(m) / std::max(1.0, l1));
    }
    if (dec.c_good > bound_good * (1 + 1e-9) || dec.c_bad > bound_bad * (1 + 1e-9) ||
        dec.c_mass > bound_mass * (1 + 1e-9) || recon > 1e-12)
      ok = false;
  }
  out.rows.push_back({"cz", "{}", "max_c_good", max_good, bound_good,
                      std::optional<double>(max_good / bound_good)});
  out.rows.push_back(
      {"cz", "{}", "max_c_bad", max_bad, bound_bad, std::optional<double>(max_bad / bound_bad)});
  out.rows.push_back({"cz", "{}", "max_c_mass", max_mass, bound_mass,
                      std::optional<double>(max_mass / bound_mass)});
  out.rows.push_back({"cz", "{}", "max_overlap", max_overlap, std::nullopt, std::nullopt});
  out.rows.push_back({"cz", "{}", "max_reconstruction_error", max_recon, std::nullopt,
                      std::nullopt});
  out.rows.push_back({"cz", "{}", "max_mean_zero_defect", max_meanzero, std::nullopt,
                      std::nullopt});
  out.rows.push_back({"cz", "{}", "trials", static_cast<double>(trials), std::nullopt,
                      std::nullopt});
  out.summary["trials"] = trials;
  out.summary["invariants_hold"] = ok && max_meanzero <= 1e-10;
  if (!(ok && max_meanzero <= 1e-10)) out.status = "fail";
  return out;
}

// --- weak11 ------------------------------------------------------------------------

Outcome run_weak11(const RunContext& c, const ExperimentSpec& e) {
  Outcome out;
  const double unit = (c.grid.extent / 8) * (c.grid.extent / 8);
  const auto t_grid = resolve_t_grid(e.params, 0.08 * unit, 0.22 * unit, 6);
  const double delta = e.params.value("delta", 4.0);
  const double q0 = e.params.value("q0", 2.0);
  const double slack = e.params.value("slack", 1.2);

  nlohmann::json fit_list = e.params.value("fit", nlohmann::json::array());
  nlohmann::json held_list = e.params.value("held_out", nlohmann::json::array());
  if (fit_list.empty()) {
    fit_list = nlohmann::json::array(
        {{{"kind", "multiplier"}, {"preset", "bochner_riesz"}},
         {{"kind", "multiplier"}, {"preset", "imaginary_power"}, {"params", {{"s", 2.0}}}},
         {{"kind", "multiplier"}, {"preset", "heat"}, {"params", {{"t", 1.0}}}}});
  }
  if (held_list.empty()) {
    const double alpha = c.grid.dim / 2.0 + 0.6;
    held_list = nlohmann::json::array(
        {{{"kind", "multiplier"},
          {"preset", "schrodinger"},
          {"params", {{"alpha", alpha}, {"t", 1.0}}}},
         {{"kind", "multiplier"}, {"preset", "wave"}, {"params", {{"alpha", alpha}, {"t", 1.0}}}},
         {{"kind", "riesz"}, {"axis", 0}}});
  }

  struct Measured {
    std::string label;
    double lhs = 0, w = 0, t_norm = 0, s_norm = 0, rhs_unit = 0;
  };
  auto measure = [&](const nlohmann::json& inst) {
    WeakInstance w = build_weak_instance(c, inst);
    Measured m;
    m.label = w.label;
    const Eigen::VectorXd& mu_out =
        w.out_stagger == Stagger::node ? c.node_mu : c.cell_mu;
    Eigen::MatrixXd k = w.t_mat.cwiseAbs();
    k.array().rowwise() /= c.node_mu.transpose().array();
    m.lhs = weak_operator_lower(k, mu_out).value;
    m.t_norm = lp_norm_estimate(w.t_mat, c.node_mu, mu_out, 2).value;
    m.s_norm = lp_norm_estimate(w.s_mat, c.node_mu, mu_out, 2).value;
    auto rep = dm_condition(c.grid, w.absdiff, w.out_stagger, t_grid, delta, c.plateau_samples);
    m.w = rep.w_kernel;
    m.rhs_unit = weak_criterion_rhs(1.0, delta, c.grid.dim, m.w, m.t_norm, m.s_norm, q0);
    return m;
  };

  double c_fit = 0;
  std::vector<Measured> fitted, held;
  for (const auto& inst : fit_list) fitted.push_back(measure(inst));
  for (const auto& inst : held_list) held.push_back(measure(inst));
  for (const auto& m : fitted)
    if (m.rhs_unit > 0) c_fit = std::max(c_fit, m.lhs / m.rhs_unit);
  out.rows.push_back({"weak11", "{}", "c_fit", c_fit, std::nullopt, std::nullopt});

  auto emit = [&](const Measured& m, const std::string& role) {
    const std::string p = pjson({{"instance", m.label}, {"role", role}});
    out.rows.push_back({"weak11", p, "weak_lower", m.lhs, std::nullopt, std::nullopt});
    out.rows.push_back({"weak11", p, "w_kernel", m.w, std::nullopt, std::nullopt});
    out.rows.push_back({"weak11", p, "t_norm", m.t_norm, std::nullopt, std::nullopt});
    out.rows.push_back({"weak11", p, "s_norm", m.s_norm, std::nullopt, std::nullopt});
    const double rhs = c_fit * m.rhs_unit;
    out.rows.push_back({"weak11", p, "criterion_rhs", rhs, std::nullopt, std::nullopt});
    if (role == "held_out")
      out.rows.push_back({"weak11", p, "margin", rhs > 0 ? m.lhs / rhs : 0, slack,
                          rhs > 0 ? std::optional<double>(m.lhs / rhs / slack) : std::nullopt});
  };
  bool held_ok = true;
  for (const auto& m : fitted) emit(m, "fit");
  for (const auto& m : held) {
    emit(m, "held_out");
    const double rhs = c_fit * m.rhs_unit;
    if (!(rhs > 0) || m.lhs > slack * rhs) held_ok = false;
  }
  out.summary["c_fit"] = c_fit;
  out.summary["held_out_within_slack"] = held_ok;
  if (!held_ok) out.status = "fail";
  if (!all_finite(out.rows)) out.status = "fail";
  return out;
}

// --- dispatch ------------------------------------------------------------------------

Outcome run_kind(const RunContext& c, const ExperimentSpec& e) {
  if (e.kind == "gaussian") return run_gaussian(c, e);
  if (e.kind == "supbounds") return run_supbounds(c, e);
  if (e.kind == "complex_time") return run_complex_time(c, e);
  if (e.kind == "offdiag") return run_offdiag(c, e);
  if (e.kind == "dm") return run_dm(c, e);
  if (e.kind == "multiplier_osc") return run_multiplier_osc(c, e);
  if (e.kind == "mihlin") return run_mihlin(c, e);
  if (e.kind == "riesz") return run_riesz(c, e);
  if (e.kind == "cz") return run_cz(c, e);
  if (e.kind == "weak11") return run_weak11(c, e);
  throw std::invalid_argument("unknown experiment kind: " + e.kind);
}

std::vector<ExperimentSpec> expand_experiments(const ExperimentConfig& cfg) {
  static const std::vector<std::string> kFullSet = {
      "gaussian", "supbounds", "complex_time", "offdiag", "dm",
      "multiplier_osc", "mihlin", "riesz", "cz", "weak11"};
  std::vector<ExperimentSpec> out;
  for (const auto& e : cfg.experiments) {
    if (e.kind == "full") {
      for (const auto& k : kFullSet) {
        ExperimentSpec s = e;
        s.kind = k;
        out.push_back(std::move(s));
      }
    } else {
      out.push_back(e);
    }
  }
  for (size_t i = 0; i < out.size(); ++i) out[i].index = static_cast<int>(i);
  return out;
}

// Fills `c` in place: the spectral decomposition and the assembled operators
// keep pointers into c.grid, so the context must never be copied or moved.
void build_context(const ExperimentConfig& cfg, RunContext& c) {
  c.cfg = &cfg;
  c.grid = build_grid(cfg.space.dim, cfg.space.extent, cfg.space.nodes_per_axis,
                      cfg.space.boundary);
  c.field = make_field(c.grid, cfg.field.preset, cfg.field.params);
  c.chi = make_cutoff(c.grid, cfg.cutoff.preset, cfg.cutoff.params);
  c.chi_tilde = cfg.cutoff_tilde
                    ? make_cutoff(c.grid, cfg.cutoff_tilde->preset, cfg.cutoff_tilde->params)
                    : c.chi;
  if (cfg.region) {
    c.region = make_region(c.grid, cfg.region->preset, cfg.region->params);
    c.has_region = true;
  }
  c.maps = discrete_gradient(c.grid);
  c.a_op = assemble_form_operator(c.grid, c.field);
  c.h_op = shift_identity(c.a_op, cfg.shift);
  c.h = eigendecompose(c.h_op);
  c.chi_nodes = c.chi.node_samples(c.grid);
  c.chi_tilde_nodes = c.chi_tilde.node_samples(c.grid);
  c.chi_cells = c.chi.cell_samples(c.grid);
  if (c.has_region) c.region_nodes = c.region.node_indicator(c.grid);
  c.node_mu = c.grid.node_measures();
  c.cell_mu = Eigen::VectorXd::Constant(c.grid.cell_count(), c.grid.cell_volume());
  c.plateau_samples = sample_nodes_in_plateau(c.grid, c.chi_nodes, 16, cfg.seed);
  c.lambda_min = c.h.lambda.minCoeff();
  c.lambda_max = c.h.lambda.maxCoeff();
}

}  // namespace

RunReport run_experiments(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  RunContext ctx;
  build_context(cfg, ctx);
  const auto specs = expand_experiments(cfg);

  struct Slot {
    Outcome outcome;
    double wall_time_s = 0;
  };
  std::vector<Slot> slots(specs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= specs.size()) break;
      const auto start = std::chrono::steady_clock::now();
      try {
        slots[i].outcome = run_kind(ctx, specs[i]);
      } catch (const std::exception& ex) {
        slots[i].outcome = Outcome{};
        slots[i].outcome.status = "fail";
        slots[i].outcome.summary = {{"error", ex.what()}};
      }
      slots[i].wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const int n_workers = std::max(1, std::min<int>(cfg.workers, static_cast<int>(specs.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  RunReport report;
  nlohmann::json experiments = nlohmann::json::array();
  const fs::path out_dir(cfg.output_dir);
  for (size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    const auto& slot = slots[i];
    char name[64];
    std::snprintf(name, sizeof(name), "tables/exp%03d_%s.csv", spec.index, spec.kind.c_str());
    write_text_file((out_dir / name).string(), csv_text(slot.outcome.rows));
    experiments.push_back({{"index", spec.index},
                           {"kind", spec.kind},
                           {"status", slot.outcome.status},
                           {"csv", std::string(name)},
                           {"wall_time_s", slot.wall_time_s},
                           {"summary", slot.outcome.summary}});
    if (slot.outcome.status == "pass") ++report.pass_count;
    else if (slot.outcome.status == "fail") ++report.fail_count;
    else ++report.flag_count;
  }

  report.json = {{"schema_version", 1},
                 {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
                 {"config", cfg.echo},
                 {"counts",
                  {{"pass", report.pass_count},
                   {"fail", report.fail_count},
                   {"flagged", report.flag_count}}},
                 {"experiments", experiments}};
  validate_report(report.json);
  write_text_file((out_dir / "report.json").string(), report.json.dump(2) + "\n");
  write_text_file((out_dir / "plots.py").string(), plots_script_text());
  return report;
}

}  // namespace deglab
