#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ergo/ruelle.hpp"
#include "ergo/skew.hpp"

namespace ergo {

struct PerturbationFamily {
  std::string kind;  // fiber-shift | base-shift | coefficient | constant
  std::function<SkewSystem(double)> generator;
  std::function<double(double)> R;
  std::vector<double> deltas{0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001};
};

struct AdmissibilityReport {
  double delta = 0.0, R = 0.0;
  bool u1 = false, u21 = false, u22 = false, u23 = false;
  double preimage_displacement = 0.0;  // (U2.2)
  double fiber_displacement = 0.0;     // (U2.3)
  double jacobian_difference = 0.0;    // (U2.1) condition value
  double spectral_slack = 0.0;         // reported separately from the condition value
  double density_ratio = 0.0;          // (U3) max m_delta / m_0
  bool pass() const { return u1 && u21 && u22 && u23; }
};

AdmissibilityReport check_admissibility(const SkewSystem& sys0, const SkewSystem& sysd, double delta, double R,
                                        int fiber_grid = 64);
AdmissibilityReport check_admissibility(const PerturbationFamily& fam, double delta);

struct CurveRow {
  double delta = 0.0, distance = 0.0, R = 0.0, envelope = 0.0, c_candidate = 0.0;
  int iterations = 0;
};

struct CurveOptions {
  AtomicMeasure m2 = AtomicMeasure::dirac(0.5);
  double tol = 1e-6;
  int n_max = 400;
};

struct StabilityCurve {
  std::vector<CurveRow> rows;  // deltas in decreasing order
  double C_hat = 0.0;
  double last_ratio = 1.0;  // c(delta_last) / c(delta_second_last)
  bool monotone = false, ratio_ok = false, finite = false, pass = false;
  std::vector<LeafFamily> families;  // mu_delta per row
  LeafFamily base_family;
  std::vector<SkewSystem> systems;
};

StabilityCurve stability_curve(const PerturbationFamily& fam, const CurveOptions& opt);

struct UniformRow {
  double delta = 0.0, beta = 0.0, D2 = 0.0, holder = 0.0, r_hat = 0.0, ly_C = 0.0;
};

struct UniformReport {
  std::vector<UniformRow> rows;
  double max_beta = 0.0, sup_D2 = 0.0, sup_holder = 0.0, B_u = 0.0, slack = 0.0;
  bool pass = false;
};

UniformReport uniform_constants_probe(const StabilityCurve& curve, std::uint64_t seed = 7);

// shipped families
PerturbationFamily fiber_shift_family(std::function<SkewSystem(const FiberMap&)> build, FiberMap g0,
                                      std::vector<double> deltas);
PerturbationFamily base_shift_family(std::function<SkewSystem(const IntervalMap&)> build, int l,
                                     std::vector<double> deltas);
PerturbationFamily coefficient_family(std::function<SkewSystem(const FiberMap&)> build, std::vector<double> alphas,
                                      std::vector<double> offsets, std::vector<double> slopes,
                                      std::vector<double> deltas);
PerturbationFamily constant_family(std::function<SkewSystem()> build, std::vector<double> deltas);

}  // namespace ergo
