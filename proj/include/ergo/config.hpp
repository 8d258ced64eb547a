#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ergo {

struct config_error : std::runtime_error {
  int line = -1, column = -1;
  config_error(const std::string& msg, int l, int c)
      : std::runtime_error(l >= 0 ? "config:" + std::to_string(l + 1) + ":" + std::to_string(c + 1) + ": " + msg : msg),
        line(l), column(c) {}
};

struct BaseSpec {
  std::string builder = "doubling";  // doubling | l_adic | manneville_pomeau | piecewise_affine
  int l = 2;
  bool circle = false;
  double shift = 0.0;
  double alpha = 0.5;
  double neutral_width = 0.05;
  std::vector<double> slopes, breakpoints;
  std::optional<std::array<double, 2>> neutral_region;
  std::optional<double> L_max;
  bool operator==(const BaseSpec&) const = default;
};

struct FiberSpec {
  std::string builder = "solenoid";  // solenoid | affine | coefficient | fixed
  double alpha = 0.5;
  double a = 0.25, b = 0.25;  // solenoid: alpha y + a + b cos 2 pi x; fixed: y0 + (a + b cos 2 pi x)(y - y0)
  double c = 0.0;             // affine: alpha y + c
  double y0 = 0.0;
  std::vector<double> alphas, offsets;  // coefficient: alphas[i] y + offsets[i] on branch i
  bool operator==(const FiberSpec&) const = default;
};

struct PotentialSpec {
  std::string kind = "geometric";  // constant | geometric | cosine | table
  double value = 0.0;              // constant level, or offset for cosine
  double t = 1.0;                  // geometric: -t log|Df|
  double amplitude = 0.0;          // cosine: value + amplitude cos 2 pi x
  std::vector<double> table;       // table: piecewise constant on equal cells
  double epsilon_phi = 0.05;
  bool operator==(const PotentialSpec&) const = default;
};

struct SystemSpec {
  BaseSpec base;
  FiberSpec fiber;
  PotentialSpec potential;
  double zeta = 1.0;
  int grid = 256;
  int fiber_bins = 256;
  int atom_cap = 512;
  bool operator==(const SystemSpec&) const = default;
};

struct ExperimentSpec {
  std::string kind;  // spectrum | equilibrium | decay | clt | stability | verify | cohomology
  // spectrum
  std::string discretization = "collocation";  // collocation | ulam
  std::optional<double> expect_lambda;
  int ly_trials = 10;
  int ly_n_max = 12;
  // equilibrium
  std::vector<std::array<double, 2>> m2{{0.5, 1.0}};
  long orbit_steps = 0;
  int orbit_cells = 64;
  std::optional<double> expect_fixed_point;
  // decay
  std::string psi = "cos2pix";
  std::string observable = "quad_xy";
  int n_max = 25;
  long mc_samples = 0;
  int mc_n_max = 10;
  // clt
  int length = 1000;
  long samples = 10000;
  int chain_grid = 0;
  // stability
  std::string family = "fiber-shift";  // fiber-shift | base-shift | coefficient | constant
  std::vector<double> deltas{0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
  std::vector<double> slopes;
  bool coupling_check = false;
  // verify
  std::optional<double> ternary_sigma;
  double ternary_dgdx = 0.0, ternary_dgdy = 0.0;
  std::optional<double> fixed_fiber_y0;
  // cohomology
  std::string phibar = "phibar_linear";
  double y0 = 0.0;
  int orbits = 20;
  std::vector<int> ns{100, 1000, 10000};
  bool operator==(const ExperimentSpec&) const = default;
};

struct OutputSpec {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};
  std::uint64_t seed = 1;
  bool operator==(const OutputSpec&) const = default;
};

struct ToleranceSpec {
  double eigen_tol = 1e-12;
  int eigen_max_iter = 100000;
  double equilibrium_tol = 1e-6;
  int equilibrium_max_iter = 400;
  double residual = 1e-8;
  double normalization = 1e-8;
  double lambda = 1e-10;
  double fit_r2 = 0.95;
  double mc_sigmas = 3.0;
  double degenerate_sigma_sq = 1e-12;
  double jitter = 0.10;
  double class_s = 1e-9;
  int holder_far_pairs = 10000;
  bool operator==(const ToleranceSpec&) const = default;
};

struct ExperimentConfig {
  SystemSpec system;
  ExperimentSpec experiment;
  OutputSpec output;
  ToleranceSpec tolerances;
  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string to_yaml(const ExperimentConfig& cfg);

std::uint64_t fnv1a(const std::string& s);

}  // namespace ergo
