#include "ergo/ruelle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergo/common.hpp"
#include "ergo/parallel.hpp"
#include "ergo/rng.hpp"

namespace ergo {

Interp interp_at(double y, int N, bool circle) {
  Interp ip;
  double t = y * N - 0.5;
  if (circle) {
    double fl = std::floor(t);
    ip.w = t - fl;
    long k = static_cast<long>(fl);
    ip.i0 = static_cast<int>(((k % N) + N) % N);
    ip.i1 = (ip.i0 + 1) % N;
    return ip;
  }
  if (t <= 0.0) return {0, 0, 0.0};
  if (t >= N - 1) return {N - 1, N - 1, 0.0};
  ip.i0 = static_cast<int>(std::floor(t));
  ip.i1 = ip.i0 + 1;
  ip.w = t - ip.i0;
  return ip;
}

double interp_eval(const Vec& g, double y, bool circle) {
  Interp ip = interp_at(y, static_cast<int>(g.size()), circle);
  return (1.0 - ip.w) * g[ip.i0] + ip.w * g[ip.i1];
}

TransferOperator build_operator_matrix(const IntervalMap& f, const HolderPotential& phi, int N) {
  if (N < 8) throw invalid_input("build_operator_matrix: N < 8");
  TransferOperator T;
  T.N = N;
  T.deg = f.degree();
  T.circle = f.circle;
  T.pre.resize(static_cast<std::size_t>(N) * T.deg);
  parallel_for(N, [&](std::size_t i) {
    double x = cell_center(static_cast<int>(i), N);
    for (int b = 0; b < T.deg; ++b) {
      Preimage& p = T.pre[i * T.deg + b];
      p.branch = b;
      p.y = branch_inverse(f, b, x);
      p.ephi = std::exp(phi.eval(p.y));
      p.ip = interp_at(p.y, N, f.circle);
    }
  });
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(T.pre.size() * 2);
  for (int i = 0; i < N; ++i)
    for (int b = 0; b < T.deg; ++b) {
      const Preimage& p = T.at(i, b);
      trip.emplace_back(i, p.ip.i0, p.ephi * (1.0 - p.ip.w));
      if (p.ip.w != 0.0) trip.emplace_back(i, p.ip.i1, p.ephi * p.ip.w);
    }
  T.A.resize(N, N);
  T.A.setFromTriplets(trip.begin(), trip.end());
  return T;
}

TransferOperator build_ulam_matrix(const IntervalMap& f, const HolderPotential& phi, int N, int subsamples) {
  TransferOperator T;
  T.N = N;
  T.deg = f.degree();
  T.circle = f.circle;
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < N; ++i)
    for (int s = 0; s < subsamples; ++s) {
      double x = (i + (s + 0.5) / subsamples) / N;
      for (int b = 0; b < T.deg; ++b) {
        double y = branch_inverse(f, b, x);
        int j = std::min(N - 1, static_cast<int>(y * N));
        trip.emplace_back(i, j, std::exp(phi.eval(y)) / subsamples);
      }
    }
  T.A.resize(N, N);
  T.A.setFromTriplets(trip.begin(), trip.end());
  return T;
}

SpectralData leading_eigendata(const SparseMat& A, bool circle, double tol, int max_iter) {
  const int N = static_cast<int>(A.rows());
  SpectralData s;
  s.N = N;
  s.circle = circle;
  Vec v = Vec::Ones(N);
  double lam = 0.0;
  int it = 0;
  double res = INFINITY;
  for (; it < max_iter; ++it) {
    Vec w = A * v;
    lam = w.sum() / v.sum();
    res = (w - lam * v).cwiseAbs().maxCoeff() / (lam * v.cwiseAbs().maxCoeff());
    v = w / w.cwiseAbs().maxCoeff();
    if (res <= tol) break;
  }
  if (res > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "leading_eigendata: no convergence after " << max_iter << " iterations, last Rayleigh quotient " << lam;
    throw numerical_failure(os.str());
  }
  SparseMat At = A.transpose();
  Vec nu = Vec::Constant(N, 1.0 / N);
  double lam_a = 0.0, res_a = INFINITY;
  int it_a = 0;
  for (; it_a < max_iter; ++it_a) {
    Vec w = At * nu;
    lam_a = w.sum();
    res_a = (w - lam_a * nu).cwiseAbs().sum() / lam_a;
    nu = w / w.sum();
    if (res_a <= tol) break;
  }
  if (res_a > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "leading_eigendata: adjoint iteration did not converge, last Rayleigh quotient " << lam_a;
    throw numerical_failure(os.str());
  }
  if ((v.array() <= 0.0).any()) throw numerical_failure("leading_eigendata: eigenfunction not positive");
  s.lambda = lam;
  s.lambda_adjoint = lam_a;
  s.nu = nu;
  s.h = v / v.dot(nu);
  s.m = s.h.cwiseProduct(s.nu);
  s.m /= s.m.sum();
  s.iterations = std::max(it, it_a) + 1;
  s.residual_h = (A * s.h - lam * s.h).cwiseAbs().maxCoeff() / (lam * s.h.cwiseAbs().maxCoeff());
  s.residual_nu = (At * s.nu - lam * s.nu).cwiseAbs().sum() / lam;
  return s;
}

Vec normalized_apply(const SpectralData& spec, const SparseMat& A, const Vec& u) {
  Vec w = A * u.cwiseProduct(spec.h);
  return w.cwiseQuotient(spec.lambda * spec.h);
}

double grid_holder_seminorm(const Vec& u, double zeta, bool circle) {
  const int N = static_cast<int>(u.size());
  std::vector<double> row(N, 0.0);
  std::vector<double> dz(N);
  for (int k = 1; k < N; ++k) {
    double d = static_cast<double>(k) / N;
    if (circle) d = std::fmin(d, 1.0 - d);
    dz[k] = std::pow(d, zeta);
  }
  parallel_for(N, [&](std::size_t i) {
    double m = 0.0;
    for (int j = static_cast<int>(i) + 1; j < N; ++j) m = std::max(m, std::fabs(u[i] - u[j]) / dz[j - i]);
    row[i] = m;
  });
  return N ? *std::max_element(row.begin(), row.end()) : 0.0;
}

GeometricFit fit_geometric(const std::vector<double>& n, const std::vector<double>& v, double floor) {
  GeometricFit g;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (std::fabs(v[k]) > floor) {
      xs.push_back(n[k]);
      ys.push_back(std::log(std::fabs(v[k])));
    }
  g.used = static_cast<int>(xs.size());
  if (xs.size() < 2) return g;
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  double slope = sxy / sxx;
  g.rate = std::exp(slope);
  g.intercept = my - slope * mx;
  g.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return g;
}

namespace {

Vec random_test_function(Rng& rng, int N) {
  Vec u = Vec::Zero(N);
  double a[4], b[4];
  for (int k = 0; k < 4; ++k) {
    a[k] = 2.0 * rng.uniform() - 1.0;
    b[k] = 2.0 * rng.uniform() - 1.0;
  }
  double c = rng.uniform(), wdt = 0.05 + 0.25 * rng.uniform(), amp = 2.0 * rng.uniform() - 1.0;
  for (int i = 0; i < N; ++i) {
    double x = cell_center(i, N);
    double v = 0.0;
    for (int k = 0; k < 4; ++k) v += (a[k] * std::cos(2 * pi * (k + 1) * x) + b[k] * std::sin(2 * pi * (k + 1) * x)) / (k + 1);
    v += amp * std::max(0.0, 1.0 - std::fabs(x - c) / wdt);
    u[i] = v;
  }
  return u;
}

}  // namespace

LYReport lasota_yorke_probe(const SpectralData& spec, const SparseMat& A, int trials, int n_max, double zeta,
                            std::uint64_t seed) {
  if (trials < 10) throw invalid_input("lasota_yorke_probe: trials < 10");
  LYReport rep;
  Rng rng(seed);
  const int N = spec.N;
  std::vector<double> ns(n_max + 1);
  for (int n = 0; n <= n_max; ++n) ns[n] = n;
  double rmax = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vec u = random_test_function(rng, N);
    for (int zm = 0; zm < 2; ++zm) {
      LYTrial tr;
      tr.zero_mean = zm == 1;
      tr.held_out = t >= trials / 2;
      Vec v = u;
      if (tr.zero_mean) v.array() -= v.dot(spec.m);
      for (int n = 0; n <= n_max; ++n) {
        tr.strong.push_back(grid_holder_norm(v, zeta, spec.circle));
        tr.sup.push_back(v.cwiseAbs().maxCoeff());
        rep.max_sup_growth = std::max(rep.max_sup_growth, tr.sup.back() - tr.sup.front());
        v = normalized_apply(spec, A, v);
      }
      if (tr.zero_mean && !tr.held_out) {
        auto g = fit_geometric(ns, tr.strong, 1e-12 * tr.strong[0]);
        double r = g.used >= 2 ? g.rate : 0.0;
        rmax = std::max(rmax, r);
      }
      rep.trials.push_back(std::move(tr));
    }
  }
  rep.r_hat = rmax;
  rep.red_flag = rep.r_hat >= 1.0;
  rep.beta = rep.r_hat;
  for (auto& tr : rep.trials) {
    if (!tr.zero_mean || tr.held_out) continue;
    for (int n = 0; n <= n_max; ++n) {
      double env = std::pow(rep.r_hat, n) * tr.strong[0];
      if (env > 0) rep.D = std::max(rep.D, tr.strong[n] / env);
    }
  }
  // constants carry no seminorm, so D covers every input; the sup part is weakly contracted
  rep.B = std::max(1.0, rep.D);
  rep.C = 1.0;
  for (auto& tr : rep.trials) {
    if (tr.held_out) continue;
    for (int n = 0; n <= n_max; ++n) {
      double ex = tr.strong[n] - rep.B * std::pow(rep.beta, n) * tr.strong[0];
      rep.C = std::max(rep.C, ex / tr.sup[0]);
    }
  }
  rep.ly_holds_on_test = true;
  for (auto& tr : rep.trials) {
    if (!tr.held_out) continue;
    for (int n = 0; n <= n_max; ++n) {
      double bound = rep.B * std::pow(rep.beta, n) * tr.strong[0] + rep.C * tr.sup[0];
      if (tr.strong[n] > bound * (1.0 + 1e-9) + 1e-12) rep.ly_holds_on_test = false;
    }
  }
  return rep;
}

}  // namespace ergo
