#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "ergo/base_map.hpp"
#include "ergo/potential.hpp"

namespace ergo {

using Vec = Eigen::VectorXd;
using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline double cell_center(int i, int N) { return (i + 0.5) / N; }

// value at y is (1 - w) g[i0] + w g[i1]
struct Interp {
  int i0 = 0, i1 = 0;
  double w = 0.0;
};

Interp interp_at(double y, int N, bool circle);
double interp_eval(const Vec& g, double y, bool circle);

struct Preimage {
  int branch = 0;
  double y = 0.0;
  double ephi = 1.0;  // e^{phi(y)}
  Interp ip;
};

struct TransferOperator {
  int N = 0;
  int deg = 0;
  bool circle = false;
  std::vector<Preimage> pre;  // N * deg, row-major
  SparseMat A;
  const Preimage& at(int i, int b) const { return pre[static_cast<std::size_t>(i) * deg + b]; }
};

TransferOperator build_operator_matrix(const IntervalMap& f, const HolderPotential& phi, int N);
// cell-averaged cross-check discretization
TransferOperator build_ulam_matrix(const IntervalMap& f, const HolderPotential& phi, int N, int subsamples = 16);

struct SpectralData {
  double lambda = 0.0;
  Vec h, nu, m;
  int N = 0;
  bool circle = false;
  int iterations = 0;
  double residual_h = 0.0;   // |A h - lambda h|_inf / (lambda |h|_inf)
  double residual_nu = 0.0;  // |A^T nu - lambda nu|_1 / lambda
  double lambda_adjoint = 0.0;
};

SpectralData leading_eigendata(const SparseMat& A, bool circle, double tol = 1e-12, int max_iter = 100000);

Vec normalized_apply(const SpectralData& spec, const SparseMat& A, const Vec& u);

double grid_holder_seminorm(const Vec& u, double zeta, bool circle);
inline double grid_holder_norm(const Vec& u, double zeta, bool circle) {
  return grid_holder_seminorm(u, zeta, circle) + u.cwiseAbs().maxCoeff();
}

struct LYTrial {
  std::vector<double> strong;  // |L^n u|_zeta, n = 0..n_max
  std::vector<double> sup;     // |L^n u|_inf
  bool zero_mean = false;
  bool held_out = false;
};

struct LYReport {
  double r_hat = 0.0;  // fitted decay rate on zero-mean inputs
  double D = 0.0;      // strong_n <= D r_hat^n strong_0 on zero-mean inputs
  double B = 1.0, beta = 0.0, C = 0.0;
  bool ly_holds_on_test = false;
  double max_sup_growth = 0.0;  // max_n |L^n u|_inf - |u|_inf
  bool red_flag = false;
  std::vector<LYTrial> trials;
};

LYReport lasota_yorke_probe(const SpectralData& spec, const SparseMat& A, int trials, int n_max, double zeta,
                            std::uint64_t seed);

// log-linear fit of |v_n| over the entries above floor; returns rate exp(slope), r2, used count
struct GeometricFit {
  double rate = 0.0;
  double r2 = 0.0;
  double intercept = 0.0;
  int used = 0;
};
GeometricFit fit_geometric(const std::vector<double>& n, const std::vector<double>& v, double floor);

}  // namespace ergo
