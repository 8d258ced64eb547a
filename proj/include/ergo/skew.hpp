#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ergo/base_map.hpp"
#include "ergo/measure.hpp"
#include "ergo/potential.hpp"
#include "ergo/ruelle.hpp"

namespace ergo {

struct FiberMap {
  std::string name;
  // G_b(x, y) for x in the domain of branch b
  std::vector<FiberFn> G;
  double alpha = 0.5;
  double G_holder = 0.0;
};

struct FiberReport {
  bool h1 = true, h2 = true;
  double max_contraction_ratio = 0.0;
  double max_holder_ratio = 0.0;
};

FiberReport check_fiber(const IntervalMap& f, const FiberMap& g, double zeta, int samples = 64);

struct SkewSystem {
  IntervalMap base;
  FiberMap fiber;
  HolderPotential potential;
  double zeta = 1.0;
  int N = 256;
  int bins = 256;
  int atom_cap = 512;
  TransferOperator op;
  SpectralData spec;

  double beta() const;  // (alpha L)^zeta
  double G_at(double x, double y) const { return fiber.G[base.branch_of(x)](x, y); }
};

SkewSystem make_system(IntervalMap base, FiberMap fiber, HolderPotential potential, double zeta, int N, int bins,
                       int atom_cap = 512, double eig_tol = 1e-12, int eig_max_iter = 100000);

LeafFamily apply_transfer(const SkewSystem& sys, const LeafFamily& fam);

struct EquilibriumResult {
  LeafFamily family;
  std::vector<double> trace;
  bool converged = false;
  int iterations = 0;
  GeometricFit fit;  // over the last 20 trace entries
};

EquilibriumResult equilibrium(const SkewSystem& sys, const AtomicMeasure& m2, double tol = 1e-6, int n_max = 400);

struct RegularityReport {
  double H = 0.0, beta = 0.0, D = 0.0, bound = 0.0, slack = 0.0;
  bool pass = false;
};

RegularityReport regularity_check(const SkewSystem& sys, const LeafFamily& fam);

struct Sandwich {
  double lower = 0.0, upper = 0.0;
};

std::pair<double, double> skew_step(const SkewSystem& sys, double x, double y);
Sandwich sandwich_probe(const SkewSystem& sys, const FiberFn& psi, int n, int fiber_grid = 64);

// builders
FiberMap solenoid_fiber(int branches, double alpha, double a, double b);
FiberMap affine_fiber(int branches, double alpha, double c);
FiberMap coefficient_fiber(const std::vector<double>& alphas, const std::vector<double>& offsets);
// G(x, y) = y0 + (a + b cos 2 pi x)(y - y0)
FiberMap fixed_fiber(int branches, double y0, double a, double b);

}  // namespace ergo
