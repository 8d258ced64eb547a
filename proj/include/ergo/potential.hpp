#pragma once

#include <functional>
#include <optional>
#include <string>

#include "ergo/base_map.hpp"

namespace ergo {

using FiberFn = std::function<double(double, double)>;

struct HolderPotential {
  std::string name;
  RealFn eval;
  double zeta = 1.0;
  double holder_constant_estimate = 0.0;
  double sup_val = 0.0, inf_val = 0.0;
  double epsilon_phi = 0.05;
  bool circle = false;
  bool is_constant = false;
};

// nodes k/grid, k = 1..grid-1, so that the node set of 2*grid contains that of grid
double estimate_holder_constant(const RealFn& g, double zeta, int grid_size, bool circle);
double estimate_holder_constant(const HolderPotential& phi, int grid_size);

HolderPotential make_potential(std::string name, RealFn eval, double zeta, double epsilon_phi, bool circle,
                               int grid_size = 1024);
HolderPotential constant_potential(double c, double zeta, double epsilon_phi, bool circle = false);

struct MembershipReport {
  bool f31 = false, f32 = false;
  double oscillation = 0.0;     // sup - inf
  double exp_holder = 0.0;      // H_zeta(e^phi)
  double f32_rhs = 0.0;         // epsilon * e^{inf}
  bool pass() const { return f31 && f32; }
};

MembershipReport check_PM_membership(const HolderPotential& phi, int grid_size = 1024);

// exponent defaults to zeta
double gap_condition_value(int deg, int q, double sigma, double L, double zeta, double epsilon_phi,
                           std::optional<double> exponent = std::nullopt);

HolderPotential geometric_potential(const IntervalMap& f, double t, double zeta, double epsilon_phi);

// G is the point fiber map (x, y) -> G(x, y); checks G(x, y0) = y0 on the grid
HolderPotential reduce_fiber_potential(const FiberFn& G, const FiberFn& phibar, double y0, double zeta,
                                       double epsilon_phi, bool circle, int grid_size = 1024);

struct ExpansionReport {
  bool pass = false;
  double min_margin = 0.0;  // min of |d_y g| - 1 - |d_x g|/3
};

// sampled check of |d_y g| > 1 + |d_x g| / 3 on [0,1]^2
ExpansionReport check_expansion_condition(const FiberFn& dgdx, const FiberFn& dgdy, int samples);

}  // namespace ergo
