#include "ergo/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace ergo {

namespace {

config_error error_at(const YAML::Mark& m, const std::string& msg) { return config_error(msg, m.line, m.column); }

class Block {
 public:
  Block(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsMap()) throw error_at(node_.Mark(), path_ + ": expected a mapping");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_) return;
    YAML::Node v = node_[key];
    if (!v) return;
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      throw error_at(v.Mark(), path_ + "." + key + ": wrong type");
    }
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    seen_.insert(key);
    if (!node_) return;
    YAML::Node v = node_[key];
    if (!v || v.IsNull()) return;
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      throw error_at(v.Mark(), path_ + "." + key + ": wrong type");
    }
  }

  YAML::Node child(const std::string& key) {
    seen_.insert(key);
    return node_ ? node_[key] : YAML::Node();
  }

  void finish() const {
    if (!node_) return;
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      std::string k = it->first.as<std::string>();
      if (!seen_.count(k)) throw error_at(it->first.Mark(), "unknown key '" + path_ + "." + k + "'");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void check_choice(const YAML::Node& parent, const std::string& key, const std::string& value,
                  std::initializer_list<const char*> allowed, const std::string& path) {
  for (const char* a : allowed)
    if (value == a) return;
  YAML::Mark m = parent && parent[key] ? parent[key].Mark() : YAML::Mark::null_mark();
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw error_at(m, path + "." + key + ": '" + value + "' is not one of " + list);
}

void read_system(const YAML::Node& n, SystemSpec& s) {
  Block b(n, "system");
  {
    YAML::Node bn = b.child("base");
    Block k(bn, "system.base");
    k.get("builder", s.base.builder);
    k.get("l", s.base.l);
    k.get("circle", s.base.circle);
    k.get("shift", s.base.shift);
    k.get("alpha", s.base.alpha);
    k.get("neutral_width", s.base.neutral_width);
    k.get("slopes", s.base.slopes);
    k.get("breakpoints", s.base.breakpoints);
    k.get("neutral_region", s.base.neutral_region);
    k.get("L_max", s.base.L_max);
    k.finish();
    check_choice(bn, "builder", s.base.builder, {"doubling", "l_adic", "manneville_pomeau", "piecewise_affine"},
                 "system.base");
  }
  {
    YAML::Node fn = b.child("fiber");
    Block k(fn, "system.fiber");
    k.get("builder", s.fiber.builder);
    k.get("alpha", s.fiber.alpha);
    k.get("a", s.fiber.a);
    k.get("b", s.fiber.b);
    k.get("c", s.fiber.c);
    k.get("y0", s.fiber.y0);
    k.get("alphas", s.fiber.alphas);
    k.get("offsets", s.fiber.offsets);
    k.finish();
    check_choice(fn, "builder", s.fiber.builder, {"solenoid", "affine", "coefficient", "fixed"}, "system.fiber");
  }
  {
    YAML::Node pn = b.child("potential");
    Block k(pn, "system.potential");
    k.get("kind", s.potential.kind);
    k.get("value", s.potential.value);
    k.get("t", s.potential.t);
    k.get("amplitude", s.potential.amplitude);
    k.get("table", s.potential.table);
    k.get("epsilon_phi", s.potential.epsilon_phi);
    k.finish();
    check_choice(pn, "kind", s.potential.kind, {"constant", "geometric", "cosine", "table"}, "system.potential");
  }
  b.get("zeta", s.zeta);
  b.get("grid", s.grid);
  b.get("fiber_bins", s.fiber_bins);
  b.get("atom_cap", s.atom_cap);
  b.finish();
}

void read_experiment(const YAML::Node& n, ExperimentSpec& e) {
  Block b(n, "experiment");
  b.get("kind", e.kind);
  b.get("discretization", e.discretization);
  b.get("expect_lambda", e.expect_lambda);
  b.get("ly_trials", e.ly_trials);
  b.get("ly_n_max", e.ly_n_max);
  b.get("m2", e.m2);
  b.get("orbit_steps", e.orbit_steps);
  b.get("orbit_cells", e.orbit_cells);
  b.get("expect_fixed_point", e.expect_fixed_point);
  b.get("psi", e.psi);
  b.get("observable", e.observable);
  b.get("n_max", e.n_max);
  b.get("mc_samples", e.mc_samples);
  b.get("mc_n_max", e.mc_n_max);
  b.get("length", e.length);
  b.get("samples", e.samples);
  b.get("chain_grid", e.chain_grid);
  b.get("family", e.family);
  b.get("deltas", e.deltas);
  b.get("slopes", e.slopes);
  b.get("coupling_check", e.coupling_check);
  b.get("ternary_sigma", e.ternary_sigma);
  b.get("ternary_dgdx", e.ternary_dgdx);
  b.get("ternary_dgdy", e.ternary_dgdy);
  b.get("fixed_fiber_y0", e.fixed_fiber_y0);
  b.get("phibar", e.phibar);
  b.get("y0", e.y0);
  b.get("orbits", e.orbits);
  b.get("ns", e.ns);
  b.finish();
  if (!e.kind.empty())
    check_choice(n, "kind", e.kind, {"spectrum", "equilibrium", "decay", "clt", "stability", "verify", "cohomology"},
                 "experiment");
  check_choice(n, "discretization", e.discretization, {"collocation", "ulam"}, "experiment");
  check_choice(n, "family", e.family, {"fiber-shift", "base-shift", "coefficient", "constant"}, "experiment");
}

void read_output(const YAML::Node& n, OutputSpec& o) {
  Block b(n, "output");
  b.get("directory", o.directory);
  b.get("formats", o.formats);
  b.get("seed", o.seed);
  b.finish();
  for (auto& f : o.formats)
    if (f != "csv" && f != "json") throw error_at(n["formats"].Mark(), "output.formats: unknown format '" + f + "'");
}

void read_tolerances(const YAML::Node& n, ToleranceSpec& t) {
  Block b(n, "tolerances");
  b.get("eigen_tol", t.eigen_tol);
  b.get("eigen_max_iter", t.eigen_max_iter);
  b.get("equilibrium_tol", t.equilibrium_tol);
  b.get("equilibrium_max_iter", t.equilibrium_max_iter);
  b.get("residual", t.residual);
  b.get("normalization", t.normalization);
  b.get("lambda", t.lambda);
  b.get("fit_r2", t.fit_r2);
  b.get("mc_sigmas", t.mc_sigmas);
  b.get("degenerate_sigma_sq", t.degenerate_sigma_sq);
  b.get("jitter", t.jitter);
  b.get("class_s", t.class_s);
  b.get("holder_far_pairs", t.holder_far_pairs);
  b.finish();
}

template <class T>
void emit_seq(YAML::Emitter& y, const std::vector<T>& v) {
  y << YAML::Flow << YAML::BeginSeq;
  for (const auto& x : v) y << x;
  y << YAML::EndSeq;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw config_error(e.msg, e.mark.line, e.mark.column);
  }
  ExperimentConfig cfg;
  if (!root || root.IsNull()) return cfg;
  Block top(root, "");
  read_system(top.child("system"), cfg.system);
  read_experiment(top.child("experiment"), cfg.experiment);
  read_output(top.child("output"), cfg.output);
  read_tolerances(top.child("tolerances"), cfg.tolerances);
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'", -1, -1);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_yaml(const ExperimentConfig& c) {
  YAML::Emitter y;
  y.SetDoublePrecision(17);
  y << YAML::BeginMap;
  y << YAML::Key << "system" << YAML::Value << YAML::BeginMap;
  {
    const auto& b = c.system.base;
    y << YAML::Key << "base" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "builder" << YAML::Value << b.builder;
    y << YAML::Key << "l" << YAML::Value << b.l;
    y << YAML::Key << "circle" << YAML::Value << b.circle;
    y << YAML::Key << "shift" << YAML::Value << b.shift;
    y << YAML::Key << "alpha" << YAML::Value << b.alpha;
    y << YAML::Key << "neutral_width" << YAML::Value << b.neutral_width;
    y << YAML::Key << "slopes" << YAML::Value;
    emit_seq(y, b.slopes);
    y << YAML::Key << "breakpoints" << YAML::Value;
    emit_seq(y, b.breakpoints);
    if (b.neutral_region) {
      y << YAML::Key << "neutral_region" << YAML::Value;
      emit_seq(y, std::vector<double>{(*b.neutral_region)[0], (*b.neutral_region)[1]});
    }
    if (b.L_max) y << YAML::Key << "L_max" << YAML::Value << *b.L_max;
    y << YAML::EndMap;
  }
  {
    const auto& f = c.system.fiber;
    y << YAML::Key << "fiber" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "builder" << YAML::Value << f.builder;
    y << YAML::Key << "alpha" << YAML::Value << f.alpha;
    y << YAML::Key << "a" << YAML::Value << f.a;
    y << YAML::Key << "b" << YAML::Value << f.b;
    y << YAML::Key << "c" << YAML::Value << f.c;
    y << YAML::Key << "y0" << YAML::Value << f.y0;
    y << YAML::Key << "alphas" << YAML::Value;
    emit_seq(y, f.alphas);
    y << YAML::Key << "offsets" << YAML::Value;
    emit_seq(y, f.offsets);
    y << YAML::EndMap;
  }
  {
    const auto& p = c.system.potential;
    y << YAML::Key << "potential" << YAML::Value << YAML::BeginMap;
    y << YAML::Key << "kind" << YAML::Value << p.kind;
    y << YAML::Key << "value" << YAML::Value << p.value;
    y << YAML::Key << "t" << YAML::Value << p.t;
    y << YAML::Key << "amplitude" << YAML::Value << p.amplitude;
    y << YAML::Key << "table" << YAML::Value;
    emit_seq(y, p.table);
    y << YAML::Key << "epsilon_phi" << YAML::Value << p.epsilon_phi;
    y << YAML::EndMap;
  }
  y << YAML::Key << "zeta" << YAML::Value << c.system.zeta;
  y << YAML::Key << "grid" << YAML::Value << c.system.grid;
  y << YAML::Key << "fiber_bins" << YAML::Value << c.system.fiber_bins;
  y << YAML::Key << "atom_cap" << YAML::Value << c.system.atom_cap;
  y << YAML::EndMap;

  const auto& e = c.experiment;
  y << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "kind" << YAML::Value << e.kind;
  y << YAML::Key << "discretization" << YAML::Value << e.discretization;
  if (e.expect_lambda) y << YAML::Key << "expect_lambda" << YAML::Value << *e.expect_lambda;
  y << YAML::Key << "ly_trials" << YAML::Value << e.ly_trials;
  y << YAML::Key << "ly_n_max" << YAML::Value << e.ly_n_max;
  y << YAML::Key << "m2" << YAML::Value << YAML::BeginSeq;
  for (auto& a : e.m2) emit_seq(y, std::vector<double>{a[0], a[1]});
  y << YAML::EndSeq;
  y << YAML::Key << "orbit_steps" << YAML::Value << e.orbit_steps;
  y << YAML::Key << "orbit_cells" << YAML::Value << e.orbit_cells;
  if (e.expect_fixed_point) y << YAML::Key << "expect_fixed_point" << YAML::Value << *e.expect_fixed_point;
  y << YAML::Key << "psi" << YAML::Value << e.psi;
  y << YAML::Key << "observable" << YAML::Value << e.observable;
  y << YAML::Key << "n_max" << YAML::Value << e.n_max;
  y << YAML::Key << "mc_samples" << YAML::Value << e.mc_samples;
  y << YAML::Key << "mc_n_max" << YAML::Value << e.mc_n_max;
  y << YAML::Key << "length" << YAML::Value << e.length;
  y << YAML::Key << "samples" << YAML::Value << e.samples;
  y << YAML::Key << "chain_grid" << YAML::Value << e.chain_grid;
  y << YAML::Key << "family" << YAML::Value << e.family;
  y << YAML::Key << "deltas" << YAML::Value;
  emit_seq(y, e.deltas);
  y << YAML::Key << "slopes" << YAML::Value;
  emit_seq(y, e.slopes);
  y << YAML::Key << "coupling_check" << YAML::Value << e.coupling_check;
  if (e.ternary_sigma) y << YAML::Key << "ternary_sigma" << YAML::Value << *e.ternary_sigma;
  y << YAML::Key << "ternary_dgdx" << YAML::Value << e.ternary_dgdx;
  y << YAML::Key << "ternary_dgdy" << YAML::Value << e.ternary_dgdy;
  if (e.fixed_fiber_y0) y << YAML::Key << "fixed_fiber_y0" << YAML::Value << *e.fixed_fiber_y0;
  y << YAML::Key << "phibar" << YAML::Value << e.phibar;
  y << YAML::Key << "y0" << YAML::Value << e.y0;
  y << YAML::Key << "orbits" << YAML::Value << e.orbits;
  y << YAML::Key << "ns" << YAML::Value;
  emit_seq(y, e.ns);
  y << YAML::EndMap;

  y << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "directory" << YAML::Value << YAML::DoubleQuoted << c.output.directory;
  y << YAML::Key << "formats" << YAML::Value;
  emit_seq(y, c.output.formats);
  y << YAML::Key << "seed" << YAML::Value << c.output.seed;
  y << YAML::EndMap;

  const auto& t = c.tolerances;
  y << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  y << YAML::Key << "eigen_tol" << YAML::Value << t.eigen_tol;
  y << YAML::Key << "eigen_max_iter" << YAML::Value << t.eigen_max_iter;
  y << YAML::Key << "equilibrium_tol" << YAML::Value << t.equilibrium_tol;
  y << YAML::Key << "equilibrium_max_iter" << YAML::Value << t.equilibrium_max_iter;
  y << YAML::Key << "residual" << YAML::Value << t.residual;
  y << YAML::Key << "normalization" << YAML::Value << t.normalization;
  y << YAML::Key << "lambda" << YAML::Value << t.lambda;
  y << YAML::Key << "fit_r2" << YAML::Value << t.fit_r2;
  y << YAML::Key << "mc_sigmas" << YAML::Value << t.mc_sigmas;
  y << YAML::Key << "degenerate_sigma_sq" << YAML::Value << t.degenerate_sigma_sq;
  y << YAML::Key << "jitter" << YAML::Value << t.jitter;
  y << YAML::Key << "class_s" << YAML::Value << t.class_s;
  y << YAML::Key << "holder_far_pairs" << YAML::Value << t.holder_far_pairs;
  y << YAML::EndMap;
  y << YAML::EndMap;
  return std::string(y.c_str()) + "\n";
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace ergo
