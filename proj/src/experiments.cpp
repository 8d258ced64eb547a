#include "ergo/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ergo/base_map.hpp"
#include "ergo/common.hpp"
#include "ergo/measure.hpp"
#include "ergo/ruelle.hpp"
#include "ergo/stability.hpp"
#include "ergo/statistics.hpp"

namespace ergo {

using json = nlohmann::ordered_json;

IntervalMap build_base(const BaseSpec& b) {
  IntervalMap f;
  if (b.builder == "doubling")
    f = l_adic(2, b.circle, b.shift);
  else if (b.builder == "l_adic")
    f = l_adic(b.l, b.circle, b.shift);
  else if (b.builder == "manneville_pomeau")
    f = manneville_pomeau(b.alpha, b.neutral_width);
  else if (b.builder == "piecewise_affine")
    f = piecewise_affine(b.slopes, b.breakpoints);
  else
    throw invalid_input("unknown base builder '" + b.builder + "'");
  if (b.neutral_region) {
    auto [lo, hi] = *b.neutral_region;
    if (!(0.0 <= lo && lo < hi && hi <= 1.0)) throw invalid_input("base.neutral_region must satisfy 0 <= lo < hi <= 1");
    f.neutral = std::make_pair(lo, hi);
  }
  if (b.L_max) {
    if (*b.L_max < 1.0) throw invalid_input("base.L_max must be >= 1");
    f.L_max = *b.L_max;
  }
  return f;
}

FiberMap build_fiber(const FiberSpec& s, int degree) {
  if (s.builder == "solenoid") return solenoid_fiber(degree, s.alpha, s.a, s.b);
  if (s.builder == "affine") return affine_fiber(degree, s.alpha, s.c);
  if (s.builder == "fixed") return fixed_fiber(degree, s.y0, s.a, s.b);
  if (s.builder == "coefficient") {
    if (static_cast<int>(s.alphas.size()) != degree)
      throw invalid_input("fiber.alphas must have one entry per base branch");
    return coefficient_fiber(s.alphas, s.offsets);
  }
  throw invalid_input("unknown fiber builder '" + s.builder + "'");
}

HolderPotential build_potential(const PotentialSpec& p, const IntervalMap& f, double zeta) {
  if (p.kind == "constant") return constant_potential(p.value, zeta, p.epsilon_phi, f.circle);
  if (p.kind == "geometric") return geometric_potential(f, p.t, zeta, p.epsilon_phi);
  if (p.kind == "cosine") {
    double v = p.value, a = p.amplitude;
    return make_potential("cosine", [v, a](double x) { return v + a * std::cos(2.0 * pi * x); }, zeta,
                          p.epsilon_phi, f.circle);
  }
  if (p.kind == "table") {
    if (p.table.empty()) throw invalid_input("potential.table is empty");
    std::vector<double> t = p.table;
    return make_potential("table",
                          [t](double x) {
                            int k = std::min(static_cast<int>(t.size()) - 1, static_cast<int>(x * t.size()));
                            return t[std::max(0, k)];
                          },
                          zeta, p.epsilon_phi, f.circle);
  }
  throw invalid_input("unknown potential kind '" + p.kind + "'");
}

SkewSystem build_system(const SystemSpec& s, const ToleranceSpec& t) {
  IntervalMap f = build_base(s.base);
  FiberMap g = build_fiber(s.fiber, f.degree());
  HolderPotential phi = build_potential(s.potential, f, s.zeta);
  return make_system(f, g, phi, s.zeta, s.grid, s.fiber_bins, s.atom_cap, t.eigen_tol, t.eigen_max_iter);
}

std::vector<std::string> observable_names() {
  return {"zero", "one", "cos2pix", "cos4pix", "cos2pix_plus3", "quad_xy", "y", "coboundary_cos",
          "phibar_linear", "phibar_weighted"};
}

FiberFn named_observable(const std::string& name, const IntervalMap& f) {
  const double logdeg = std::log(static_cast<double>(f.degree()));
  if (name == "zero") return [](double, double) { return 0.0; };
  if (name == "one") return [](double, double) { return 1.0; };
  if (name == "cos2pix") return [](double x, double) { return std::cos(2.0 * pi * x); };
  if (name == "cos4pix") return [](double x, double) { return std::cos(4.0 * pi * x); };
  if (name == "cos2pix_plus3") return [](double x, double) { return std::cos(2.0 * pi * x) + 3.0; };
  if (name == "quad_xy") return [](double x, double y) { return (x - 0.5) * (x - 0.5) + y * y; };
  if (name == "y") return [](double, double y) { return y; };
  if (name == "coboundary_cos") {
    auto fp = std::make_shared<IntervalMap>(f);
    return [fp](double x, double) { return std::cos(2.0 * pi * eval(*fp, x)) - std::cos(2.0 * pi * x); };
  }
  if (name == "phibar_linear") return [logdeg](double, double y) { return -logdeg + y; };
  if (name == "phibar_weighted")
    return [logdeg](double x, double y) { return -logdeg + y * (1.0 + 0.5 * std::cos(2.0 * pi * x)); };
  std::string all;
  for (auto& n : observable_names()) all += (all.empty() ? "" : ", ") + n;
  throw invalid_input("unknown observable '" + name + "' (known: " + all + ")");
}

int ResultRecord::exit_code() const {
  if (!violations.empty()) return 2;
  for (auto& [k, v] : flags)
    if (!v) return 1;
  return 0;
}

json ResultRecord::to_json() const {
  json j;
  j["experiment"] = experiment;
  j["timestamp"] = timestamp;
  j["config_hash"] = config_hash;
  j["workers"] = workers;
  j["seed"] = seed;
  j["metrics"] = metrics;
  json f = json::object();
  for (auto& [k, v] : flags) f[k] = v;
  j["flags"] = f;
  j["violations"] = violations;
  j["files"] = files;
  j["exit_code"] = exit_code();
  return j;
}

namespace {

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t h) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

class Csv {
 public:
  Csv(const std::string& path, std::initializer_list<const char*> header) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path);
    out_ << std::setprecision(17);
    bool first = true;
    for (const char* h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << "\r\n";
  }
  template <class... T>
  void row(const T&... v) {
    bool first = true;
    ((out_ << (first ? "" : ",") << v, first = false), ...);
    out_ << "\r\n";
  }

 private:
  std::ofstream out_;
};

struct Context {
  const ExperimentConfig& cfg;
  std::filesystem::path dir;
  ResultRecord& rec;
  bool csv, json_files;

  std::string path(const std::string& name) {
    rec.files.push_back(name);
    return (dir / name).string();
  }
  void write_json(const std::string& name, const json& j) {
    if (!json_files) return;
    std::ofstream out(path(name), std::ios::binary);
    out << j.dump(2) << "\n";
  }
};

AtomicMeasure m2_measure(const ExperimentSpec& e) {
  std::vector<std::pair<double, double>> atoms;
  for (auto& a : e.m2) atoms.emplace_back(a[0], a[1]);
  auto m = AtomicMeasure::from_atoms(atoms);
  if (m.empty() || std::fabs(m.total_mass() - 1.0) > 1e-12) throw invalid_input("experiment.m2 must be a probability");
  for (double w : m.w)
    if (w < 0) throw invalid_input("experiment.m2 must be a probability");
  return m;
}

void require_contraction(const SkewSystem& sys) {
  if (sys.beta() >= 1.0)
    throw hypothesis_violation("(alpha L)^zeta < 1", "beta = " + std::to_string(sys.beta()));
}

EquilibriumResult solve_equilibrium(Context& c, const SkewSystem& sys) {
  require_contraction(sys);
  auto eq = equilibrium(sys, m2_measure(c.cfg.experiment), c.cfg.tolerances.equilibrium_tol,
                        c.cfg.tolerances.equilibrium_max_iter);
  c.rec.metrics["equilibrium_iterations"] = eq.iterations;
  c.rec.metrics["equilibrium_converged"] = eq.converged;
  c.rec.flags["equilibrium_converged"] = eq.converged;
  return eq;
}

void run_spectrum(Context& c) {
  const auto& s = c.cfg.system;
  const auto& t = c.cfg.tolerances;
  IntervalMap f = build_base(s.base);
  HolderPotential phi = build_potential(s.potential, f, s.zeta);
  TransferOperator op = c.cfg.experiment.discretization == "ulam" ? build_ulam_matrix(f, phi, s.grid)
                                                                   : build_operator_matrix(f, phi, s.grid);
  SpectralData sp = leading_eigendata(op.A, f.circle, t.eigen_tol, t.eigen_max_iter);
  Vec one = Vec::Ones(sp.N);
  double norm_err = (normalized_apply(sp, op.A, one) - one).cwiseAbs().maxCoeff();
  auto ly = lasota_yorke_probe(sp, op.A, c.cfg.experiment.ly_trials, c.cfg.experiment.ly_n_max, s.zeta,
                               c.cfg.output.seed);
  auto& m = c.rec.metrics;
  m["lambda"] = sp.lambda;
  m["lambda_adjoint"] = sp.lambda_adjoint;
  m["residual_h"] = sp.residual_h;
  m["residual_nu"] = sp.residual_nu;
  m["N"] = sp.N;
  m["iterations"] = sp.iterations;
  m["r_hat"] = ly.r_hat;
  m["ly_B"] = ly.B;
  m["ly_beta"] = ly.beta;
  m["ly_C"] = ly.C;
  m["ly_D"] = ly.D;
  m["max_sup_growth"] = ly.max_sup_growth;
  m["normalization_error"] = norm_err;
  m["h_min"] = sp.h.minCoeff();
  c.rec.flags["residual_h"] = sp.residual_h <= t.residual;
  c.rec.flags["residual_nu"] = sp.residual_nu <= t.residual;
  c.rec.flags["normalization"] = norm_err <= t.normalization;
  c.rec.flags["h_positive"] = sp.h.minCoeff() > 0.0;
  c.rec.flags["ly_holds_on_test"] = ly.ly_holds_on_test;
  c.rec.flags["r_hat_below_one"] = !ly.red_flag;
  if (c.cfg.experiment.expect_lambda) {
    m["expect_lambda"] = *c.cfg.experiment.expect_lambda;
    c.rec.flags["lambda_expected"] = std::fabs(sp.lambda - *c.cfg.experiment.expect_lambda) <= t.lambda;
  }
  if (c.csv) {
    Csv out(c.path("eigendata.csv"), {"i", "x", "h", "nu", "m"});
    for (int i = 0; i < sp.N; ++i) out.row(i, cell_center(i, sp.N), sp.h[i], sp.nu[i], sp.m[i]);
  }
}

void run_equilibrium(Context& c) {
  const auto& e = c.cfg.experiment;
  SkewSystem sys = build_system(c.cfg.system, c.cfg.tolerances);
  auto eq = solve_equilibrium(c, sys);
  auto reg = regularity_check(sys, eq.family);
  double resid = family_distance_linf(apply_transfer(sys, eq.family), eq.family, sys.zeta);
  auto& m = c.rec.metrics;
  m["trace_rate"] = eq.fit.rate;
  m["trace_r2"] = eq.fit.r2;
  m["trace_fit_used"] = eq.fit.used;
  m["holder_seminorm"] = reg.H;
  m["beta"] = reg.beta;
  m["D"] = reg.D;
  m["regularity_bound"] = reg.bound;
  m["regularity_slack"] = reg.slack;
  m["fixed_point_residual"] = resid;
  m["linf"] = linf_norm(eq.family, sys.zeta);
  m["sinf"] = sinf_norm(eq.family, sys.zeta);
  m["lambda"] = sys.spec.lambda;
  m["trace"] = eq.trace;
  c.rec.flags["regularity"] = reg.pass;
  c.rec.flags["fixed_point_residual"] = resid <= 2.0 * c.cfg.tolerances.equilibrium_tol;
  c.rec.flags["trace_geometric"] = eq.fit.used < 3 || eq.fit.rate < 1.0;
  if (e.expect_fixed_point) {
    double worst = 0.0;
    auto target = AtomicMeasure::dirac(*e.expect_fixed_point);
    for (auto& leaf : eq.family.leaves) worst = std::max(worst, wk_norm(leaf - target, sys.zeta));
    m["fixed_point_distance"] = worst;
    c.rec.flags["fixed_point"] = worst <= std::pow(1.0 / sys.bins, sys.zeta) + 1e-12;
  }
  if (e.orbit_steps > 0) {
    auto oc = orbit_leaf_comparison(sys, eq.family, e.orbit_steps, e.orbit_cells, c.cfg.output.seed);
    m["orbit_distance"] = oc.max_distance;
    m["orbit_samples"] = oc.samples;
    c.rec.flags["orbit_oracle"] = oc.max_distance <= 2.0 / sys.bins;
  }
  if (c.csv) {
    write_family_csv(eq.family, c.path("equilibrium_family.csv"));
    Csv tr(c.path("trace.csv"), {"iteration", "distance"});
    for (std::size_t k = 0; k < eq.trace.size(); ++k) tr.row(k + 1, eq.trace[k]);
  }
}

void run_decay(Context& c) {
  const auto& e = c.cfg.experiment;
  const auto& t = c.cfg.tolerances;
  SkewSystem sys = build_system(c.cfg.system, t);
  auto eq = solve_equilibrium(c, sys);
  FiberFn psi2 = named_observable(e.psi, sys.base);
  RealFn psi = [psi2](double x) { return psi2(x, 0.0); };
  FiberFn obs = named_observable(e.observable, sys.base);
  auto cs = correlation(sys, eq.family, psi, obs, e.n_max);
  auto& m = c.rec.metrics;
  m["fitted_rate"] = cs.fitted_rate;
  m["fit_r2"] = cs.fit_r2;
  m["fit_used"] = cs.fit_used;
  m["C"] = cs.C_values;
  bool trivial = cs.fit_used < 3;
  m["trivially_vanishing"] = trivial;
  c.rec.flags["decay_rate"] = trivial || (cs.fitted_rate < 1.0 && cs.fit_r2 > t.fit_r2);
  if (c.csv) {
    Csv out(c.path("correlation.csv"), {"n", "C"});
    for (std::size_t k = 0; k < cs.n_values.size(); ++k) out.row(cs.n_values[k], cs.C_values[k]);
  }
  if (e.mc_samples > 0) {
    int nm = std::min(e.mc_n_max, e.n_max);
    auto mc = correlation_monte_carlo(sys, eq.family, psi, obs, nm, e.mc_samples, c.cfg.output.seed);
    double worst = 0.0;
    for (int n = 0; n <= nm; ++n) {
      double dev = std::fabs(mc.C[n] - cs.C_values[n]);
      worst = std::max(worst, mc.se[n] > 0 ? dev / mc.se[n] : (dev > 1e-12 ? INFINITY : 0.0));
    }
    m["mc_samples"] = mc.samples;
    m["mc_max_sigmas"] = worst;
    c.rec.flags["duality_vs_monte_carlo"] = worst <= t.mc_sigmas;
    if (c.csv) {
      Csv out(c.path("correlation_mc.csv"), {"n", "C_duality", "C_mc", "se"});
      for (int n = 0; n <= nm; ++n) out.row(n, cs.C_values[n], mc.C[n], mc.se[n]);
    }
  }
}

void run_clt(Context& c) {
  const auto& e = c.cfg.experiment;
  const auto& t = c.cfg.tolerances;
  SkewSystem sys = build_system(c.cfg.system, t);
  auto eq = solve_equilibrium(c, sys);
  FiberFn obs = named_observable(e.observable, sys.base);
  CltReport r;
  if (e.chain_grid > 0 && e.chain_grid != sys.N) {
    SystemSpec fine = c.cfg.system;
    fine.grid = e.chain_grid;
    SkewSystem chain = build_system(fine, t);
    r = clt_sample(chain, eq.family, obs, e.length, e.samples, c.cfg.output.seed, t.degenerate_sigma_sq);
  } else {
    r = clt_sample(sys, eq.family, obs, e.length, e.samples, c.cfg.output.seed, t.degenerate_sigma_sq);
  }
  auto& m = c.rec.metrics;
  m["sample_count"] = r.sample_count;
  m["n"] = r.n;
  m["mean_obs"] = r.mean_obs;
  m["sigma_sq_estimate"] = r.sigma_sq_estimate;
  m["c0"] = r.c0;
  m["truncation_lag"] = r.truncation_lag;
  m["sigma_floored"] = r.sigma_floored;
  m["degenerate"] = r.degenerate;
  m["ks_statistic"] = r.ks_statistic;
  m["ks_critical"] = r.ks_critical;
  m["max_abs_normalized"] = r.max_abs_normalized;
  m["max_abs_normalized_short"] = r.max_abs_normalized_short;
  if (r.degenerate)
    c.rec.flags["degenerate_sums_vanish"] = r.sums_vanish;
  else
    c.rec.flags["ks_pass"] = r.ks_pass;
  if (c.csv) {
    Csv out(c.path("clt_sums.csv"), {"sample", "normalized_sum"});
    for (std::size_t k = 0; k < r.sums.size(); ++k) out.row(k, r.sums[k]);
  }
}

PerturbationFamily make_family(const ExperimentConfig& cfg) {
  const SystemSpec s = cfg.system;
  const ToleranceSpec t = cfg.tolerances;
  const auto& e = cfg.experiment;
  auto with_fiber = [s, t](const FiberMap& g) {
    IntervalMap f = build_base(s.base);
    return make_system(f, g, build_potential(s.potential, f, s.zeta), s.zeta, s.grid, s.fiber_bins, s.atom_cap,
                       t.eigen_tol, t.eigen_max_iter);
  };
  if (e.family == "fiber-shift")
    return fiber_shift_family(with_fiber, build_fiber(s.fiber, build_base(s.base).degree()), e.deltas);
  if (e.family == "base-shift") {
    if (s.base.builder != "l_adic" && s.base.builder != "doubling")
      throw invalid_input("base-shift family needs an l_adic or doubling base");
    if (!s.base.circle) throw invalid_input("base-shift family needs a circle-identified base");
    int l = s.base.builder == "doubling" ? 2 : s.base.l;
    auto with_base = [s, t](const IntervalMap& f) {
      return make_system(f, build_fiber(s.fiber, f.degree()), build_potential(s.potential, f, s.zeta), s.zeta, s.grid,
                         s.fiber_bins, s.atom_cap, t.eigen_tol, t.eigen_max_iter);
    };
    return base_shift_family(with_base, l, e.deltas);
  }
  if (e.family == "coefficient") {
    if (s.fiber.builder != "coefficient") throw invalid_input("coefficient family needs a coefficient fiber");
    return coefficient_family(with_fiber, s.fiber.alphas, s.fiber.offsets, e.slopes, e.deltas);
  }
  return constant_family([s, t] { return build_system(s, t); }, e.deltas);
}

void run_stability(Context& c) {
  const auto& e = c.cfg.experiment;
  const auto& t = c.cfg.tolerances;
  PerturbationFamily fam = make_family(c.cfg);
  CurveOptions opt;
  opt.m2 = m2_measure(e);
  opt.tol = t.equilibrium_tol;
  opt.n_max = t.equilibrium_max_iter;
  StabilityCurve curve = stability_curve(fam, opt);
  // the curve check uses the configured jitter
  bool monotone = true;
  for (std::size_t k = 1; k < curve.rows.size(); ++k)
    if (curve.rows[k].distance > (1.0 + t.jitter) * curve.rows[k - 1].distance + 1e-15) monotone = false;
  SkewSystem s0 = fam.generator(0.0);
  json adm = json::array();
  bool u_all = true;
  for (std::size_t k = 0; k < curve.rows.size(); ++k) {
    auto r = check_admissibility(s0, curve.systems[k], curve.rows[k].delta, curve.rows[k].R);
    u_all = u_all && r.pass();
    adm.push_back({{"delta", r.delta},
                   {"R", r.R},
                   {"U1", r.u1},
                   {"U2.1", r.u21},
                   {"U2.2", r.u22},
                   {"U2.3", r.u23},
                   {"jacobian_difference", r.jacobian_difference},
                   {"spectral_slack", r.spectral_slack},
                   {"preimage_displacement", r.preimage_displacement},
                   {"fiber_displacement", r.fiber_displacement},
                   {"density_ratio", r.density_ratio}});
  }
  auto uni = uniform_constants_probe(curve, c.cfg.output.seed);
  auto& m = c.rec.metrics;
  m["family"] = fam.kind;
  m["C_hat"] = curve.C_hat;
  m["last_ratio"] = curve.last_ratio;
  m["max_beta"] = uni.max_beta;
  m["sup_D2"] = uni.sup_D2;
  m["sup_holder"] = uni.sup_holder;
  m["B_u"] = uni.B_u;
  json dist = json::array();
  for (auto& r : curve.rows) dist.push_back(r.distance);
  m["distances"] = dist;
  c.rec.flags["monotone"] = monotone;
  c.rec.flags["C_hat_finite"] = curve.finite;
  c.rec.flags["C_hat_stable"] = curve.ratio_ok;
  c.rec.flags["admissible"] = u_all;
  c.rec.flags["uniform_constants"] = uni.pass;
  if (e.coupling_check) {
    bool ok = true;
    double alpha = s0.fiber.alpha;
    for (auto& r : curve.rows)
      if (r.distance > r.delta / (1.0 - alpha) + 2.0 / s0.bins) ok = false;
    c.rec.flags["coupling_bound"] = ok;
  }
  if (c.csv) {
    Csv out(c.path("stability_curve.csv"), {"delta", "distance", "R", "envelope", "C_hat"});
    for (auto& r : curve.rows) out.row(r.delta, r.distance, r.R, r.envelope, curve.C_hat);
  }
  c.write_json("admissibility.json", adm);
  json ur = json::array();
  for (auto& r : uni.rows)
    ur.push_back({{"delta", r.delta}, {"beta", r.beta}, {"D2", r.D2}, {"holder", r.holder}, {"r_hat", r.r_hat},
                  {"ly_C", r.ly_C}});
  c.write_json("uniform_constants.json",
               {{"rows", ur}, {"max_beta", uni.max_beta}, {"B_u", uni.B_u}, {"slack", uni.slack}, {"pass", uni.pass}});
}

void run_verify(Context& c) {
  const auto& s = c.cfg.system;
  const auto& e = c.cfg.experiment;
  IntervalMap f = build_base(s.base);
  HolderPotential phi = build_potential(s.potential, f, s.zeta);
  FiberMap g = build_fiber(s.fiber, f.degree());
  json d = json::object();
  auto add = [&](const std::string& name, bool pass, json detail) {
    detail["pass"] = pass;
    d[name] = detail;
    c.rec.flags[name] = pass;
    if (!pass) c.rec.violations.push_back(name);
  };
  auto st = check_structure(f, std::max(1000, 4 * f.degree()));
  add("(f1)", st.f1, {{"margin", st.f1_margin}, {"sigma", f.sigma}, {"L_max", f.L_max}});
  add("(P2)", st.p2 && st.surjective, {{"surjective", st.surjective}, {"roundtrip_error", st.roundtrip_error}});
  auto mem = check_PM_membership(phi);
  add("(f3.1)", mem.f31, {{"oscillation", mem.oscillation}, {"epsilon_phi", phi.epsilon_phi}});
  add("(f3.2)", mem.f32, {{"holder_exp_phi", mem.exp_holder}, {"rhs", mem.f32_rhs}});
  try {
    double gap = gap_condition_value(f.degree(), st.q, f.sigma, f.L_max, s.zeta, phi.epsilon_phi);
    add("(f2)", gap < 1.0, {{"q", st.q}, {"degree", f.degree()}, {"gap_value", gap}, {"exponent", s.zeta}});
  } catch (const hypothesis_violation& ex) {
    add("(f2)", false, {{"q", st.q}, {"degree", f.degree()}, {"error", ex.what()}});
  }
  auto fr = check_fiber(f, g, s.zeta);
  add("(H1)", fr.h1, {{"alpha", g.alpha}, {"max_contraction_ratio", fr.max_contraction_ratio}});
  add("(H2)", fr.h2, {{"G_holder", g.G_holder}, {"max_holder_ratio", fr.max_holder_ratio}});
  double beta = std::pow(g.alpha * f.L_max, s.zeta);
  add("(alpha L)^zeta < 1", beta < 1.0, {{"beta", beta}});
  if (e.fixed_fiber_y0) {
    double y0 = *e.fixed_fiber_y0, worst = 0.0;
    for (int i = 0; i < s.grid; ++i) {
      double x = cell_center(i, s.grid);
      worst = std::max(worst, std::fabs(g.G[f.branch_of(x)](x, y0) - y0));
    }
    add("class S", worst <= c.cfg.tolerances.class_s, {{"y0", y0}, {"max_violation", worst}});
  }
  if (e.ternary_sigma) {
    double gap = gap_condition_value(3, 1, *e.ternary_sigma, 1.0, s.zeta, 0.0);
    add("ternary gap", gap < 1.0, {{"sigma", *e.ternary_sigma}, {"gap_value", gap}});
    double gx = e.ternary_dgdx, gy = e.ternary_dgdy;
    auto ex = check_expansion_condition([gx](double, double) { return gx; }, [gy](double, double) { return gy; }, 32);
    add("ternary expansion", ex.pass, {{"min_margin", ex.min_margin}});
  }
  c.rec.metrics["dossier"] = d;
  c.write_json("dossier.json", d);
}

void run_cohomology(Context& c) {
  const auto& e = c.cfg.experiment;
  SkewSystem sys = build_system(c.cfg.system, c.cfg.tolerances);
  FiberFn phibar = named_observable(e.phibar, sys.base);
  auto r = birkhoff_cohomology_check(sys, phibar, e.y0, e.orbits, e.ns, c.cfg.output.seed);
  c.rec.metrics["C"] = r.C;
  c.rec.metrics["ns"] = r.ns;
  c.rec.flags["bound_holds"] = r.bound_holds;
  c.rec.flags["decay_ok"] = r.decay_ok;
  if (c.csv) {
    Csv out(c.path("cohomology.csv"), {"orbit", "y_start", "n", "delta"});
    for (std::size_t o = 0; o < r.orbits.size(); ++o)
      for (std::size_t k = 0; k < r.ns.size(); ++k) out.row(o, r.orbits[o].y_start, r.ns[k], r.orbits[o].delta[k]);
  }
}

}  // namespace

ResultRecord run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, int workers) {
  ResultRecord rec;
  rec.experiment = cfg.experiment.kind;
  rec.timestamp = utc_now();
  std::string yaml = to_yaml(cfg);
  rec.config_hash = hex64(fnv1a(yaml));
  rec.workers = workers;
  rec.seed = cfg.output.seed;
  std::filesystem::create_directories(out_dir);
  bool csv = std::find(cfg.output.formats.begin(), cfg.output.formats.end(), "csv") != cfg.output.formats.end();
  bool js = std::find(cfg.output.formats.begin(), cfg.output.formats.end(), "json") != cfg.output.formats.end();
  Context c{cfg, out_dir, rec, csv, js};
  {
    std::ofstream out(c.path("resolved_config.yaml"), std::ios::binary);
    out << yaml;
  }
  const std::string& k = cfg.experiment.kind;
  try {
    if (k != "verify") {
      IntervalMap f = build_base(cfg.system.base);
      auto st = check_structure(f, std::max(1000, 4 * f.degree()));
      rec.metrics["gap_value"] = gap_condition_value(f.degree(), st.q, f.sigma, f.L_max, cfg.system.zeta,
                                                     cfg.system.potential.epsilon_phi);
    }
    if (k == "spectrum") run_spectrum(c);
    else if (k == "equilibrium") run_equilibrium(c);
    else if (k == "decay") run_decay(c);
    else if (k == "clt") run_clt(c);
    else if (k == "stability") run_stability(c);
    else if (k == "verify") run_verify(c);
    else if (k == "cohomology") run_cohomology(c);
    else throw invalid_input("unknown experiment kind '" + k + "'");
  } catch (const hypothesis_violation& e) {
    rec.violations.push_back(e.condition);
    rec.metrics["violation"] = e.what();
  }
  rec.files.push_back("result.json");
  std::ofstream out((std::filesystem::path(out_dir) / "result.json").string(), std::ios::binary);
  out << rec.to_json().dump(2) << "\n";
  return rec;
}

}  // namespace ergo
