#include "ergo/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ergo/common.hpp"
#include "ergo/parallel.hpp"
#include "ergo/rng.hpp"
#include "ergo/ruelle.hpp"

namespace ergo {

AtomicMeasure AtomicMeasure::from_atoms(std::vector<std::pair<double, double>> atoms) {
  std::sort(atoms.begin(), atoms.end(), [](auto& a, auto& b) { return a.first < b.first; });
  AtomicMeasure m;
  for (auto& [p, wt] : atoms) {
    if (!m.pos.empty() && m.pos.back() == p)
      m.w.back() += wt;
    else {
      m.pos.push_back(p);
      m.w.push_back(wt);
    }
  }
  return m;
}

double AtomicMeasure::total_mass() const {
  double s = 0.0;
  for (double x : w) s += x;
  return s;
}

double AtomicMeasure::abs_mass() const {
  double s = 0.0;
  for (double x : w) s += std::fabs(x);
  return s;
}

AtomicMeasure AtomicMeasure::scaled(double c) const {
  AtomicMeasure m = *this;
  for (double& x : m.w) x *= c;
  return m;
}

AtomicMeasure AtomicMeasure::positive_part() const {
  AtomicMeasure m;
  for (std::size_t i = 0; i < size(); ++i)
    if (w[i] > 0) {
      m.pos.push_back(pos[i]);
      m.w.push_back(w[i]);
    }
  return m;
}

AtomicMeasure AtomicMeasure::negative_part() const {
  AtomicMeasure m;
  for (std::size_t i = 0; i < size(); ++i)
    if (w[i] < 0) {
      m.pos.push_back(pos[i]);
      m.w.push_back(-w[i]);
    }
  return m;
}

namespace {

AtomicMeasure merge(const AtomicMeasure& a, const AtomicMeasure& b, double sb) {
  AtomicMeasure m;
  m.pos.reserve(a.size() + b.size());
  m.w.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a.pos[i] < b.pos[j])) {
      m.pos.push_back(a.pos[i]);
      m.w.push_back(a.w[i++]);
    } else if (i == a.size() || b.pos[j] < a.pos[i]) {
      m.pos.push_back(b.pos[j]);
      m.w.push_back(sb * b.w[j++]);
    } else {
      m.pos.push_back(a.pos[i]);
      m.w.push_back(a.w[i++] + sb * b.w[j++]);
    }
  }
  return m;
}

}  // namespace

AtomicMeasure operator+(const AtomicMeasure& a, const AtomicMeasure& b) { return merge(a, b, 1.0); }
AtomicMeasure operator-(const AtomicMeasure& a, const AtomicMeasure& b) { return merge(a, b, -1.0); }

namespace {

// concave piecewise-linear function on [-1, 1]
struct Pwl {
  std::vector<double> x, v;
};

double pwl_at(const std::vector<double>& x, const std::vector<double>& v, double t) {
  if (t <= x.front()) return v.front();
  if (t >= x.back()) return v.back();
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t k = static_cast<std::size_t>(it - x.begin());
  double x0 = x[k - 1], x1 = x[k];
  if (x1 - x0 <= 0.0) return std::max(v[k - 1], v[k]);
  double s = (t - x0) / (x1 - x0);
  return v[k - 1] + s * (v[k] - v[k - 1]);
}

void push_point(Pwl& g, double x, double v) {
  if (!g.x.empty() && x - g.x.back() < 1e-15) {
    g.v.back() = std::max(g.v.back(), v);
    return;
  }
  g.x.push_back(x);
  g.v.push_back(v);
}

// M(u) = max of g over [u - d, u + d] intersected with [-1, 1]
Pwl window_max(const Pwl& g, double d) {
  std::size_t n = g.x.size();
  std::size_t p = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (g.v[k] > g.v[p]) p = k;
  std::size_t q = p;
  while (q + 1 < n && g.v[q + 1] >= g.v[p]) ++q;
  std::vector<double> xs, vs;
  xs.reserve(n + 2);
  vs.reserve(n + 2);
  for (std::size_t k = 0; k <= p; ++k) {
    xs.push_back(g.x[k] - d);
    vs.push_back(g.v[k]);
  }
  for (std::size_t k = q; k < n; ++k) {
    xs.push_back(g.x[k] + d);
    vs.push_back(g.v[k]);
  }
  Pwl out;
  push_point(out, -1.0, pwl_at(xs, vs, -1.0));
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (xs[k] > -1.0 && xs[k] < 1.0) push_point(out, xs[k], vs[k]);
  double right = pwl_at(xs, vs, 1.0);
  if (1.0 - out.x.back() < 1e-15) {
    out.x.back() = 1.0;
    out.v.back() = std::max(out.v.back(), right);
  } else
    push_point(out, 1.0, right);
  return out;
}

double wk_chain(const AtomicMeasure& mu) {
  const std::size_t n = mu.size();
  Pwl g;
  g.x = {-1.0, 1.0};
  g.v = {-mu.w[0], mu.w[0]};
  for (std::size_t k = 1; k < n; ++k) {
    g = window_max(g, mu.pos[k] - mu.pos[k - 1]);
    for (std::size_t j = 0; j < g.x.size(); ++j) g.v[j] += mu.w[k] * g.x[j];
  }
  double best = -INFINITY;
  for (double v : g.v) best = std::max(best, v);
  return std::max(0.0, best);
}

}  // namespace

double wk_norm(const AtomicMeasure& mu, double zeta) {
  if (!(zeta > 0.0 && zeta <= 1.0)) throw invalid_input("wk_norm: zeta must lie in (0,1]");
  if (mu.empty()) return 0.0;
  if (zeta == 1.0) return wk_chain(mu);
  return wk_norm_transport(mu, zeta);
}

double wk_norm_transport(const AtomicMeasure& mu, double zeta) {
  if (!(zeta > 0.0 && zeta <= 1.0)) throw invalid_input("wk_norm: zeta must lie in (0,1]");
  if (mu.empty()) return 0.0;
  // sources carry positive weight, sinks negative weight; the ground node absorbs the net mass at cost 1
  std::vector<double> sy, sc, ty, tc;
  std::vector<bool> sg, tg;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.w[i] > 0) {
      sy.push_back(mu.pos[i]);
      sc.push_back(mu.w[i]);
      sg.push_back(false);
    } else if (mu.w[i] < 0) {
      ty.push_back(mu.pos[i]);
      tc.push_back(-mu.w[i]);
      tg.push_back(false);
    }
  }
  double net = mu.total_mass();
  if (net > 0) {
    ty.push_back(0.0);
    tc.push_back(net);
    tg.push_back(true);
  } else if (net < 0) {
    sy.push_back(0.0);
    sc.push_back(-net);
    sg.push_back(true);
  }
  const int ns = static_cast<int>(sy.size()), nt = static_cast<int>(ty.size());
  if (ns == 0 || nt == 0) return 0.0;
  std::vector<double> cost(static_cast<std::size_t>(ns) * nt);
  for (int s = 0; s < ns; ++s)
    for (int t = 0; t < nt; ++t)
      cost[s * nt + t] = (sg[s] || tg[t]) ? 1.0 : std::min(std::pow(std::fabs(sy[s] - ty[t]), zeta), 2.0);
  std::vector<double> flow(cost.size(), 0.0);
  std::vector<double> supply = sc, demand = tc;
  double scale = 0.0;
  for (double c : sc) scale += c;
  const double eps = 1e-15 * std::max(scale, 1.0);
  // node ids: 0 = super source, 1..ns sources, ns+1..ns+nt sinks, ns+nt+1 super sink
  const int V = ns + nt + 2, SRC = 0, SNK = ns + nt + 1;
  std::vector<double> pot(V, 0.0);
  for (int t = 0; t < nt; ++t) {
    double m = INFINITY;
    for (int s = 0; s < ns; ++s) m = std::min(m, cost[s * nt + t]);
    pot[ns + 1 + t] = m;
  }
  pot[SNK] = *std::min_element(pot.begin() + ns + 1, pot.begin() + ns + 1 + nt);
  const int cap_iter = 100 * (ns + nt) + 1000;
  for (int iter = 0; iter < cap_iter; ++iter) {
    double rem = 0.0;
    for (double c : supply) rem += c;
    if (rem <= eps) break;
    std::vector<double> dist(V, INFINITY);
    std::vector<int> prev(V, -1);
    std::vector<bool> done(V, false);
    dist[SRC] = 0.0;
    for (int round = 0; round < V; ++round) {
      int u = -1;
      for (int k = 0; k < V; ++k)
        if (!done[k] && (u < 0 || dist[k] < dist[u])) u = k;
      if (u < 0 || dist[u] == INFINITY) break;
      done[u] = true;
      auto relax = [&](int v, double c) {
        if (done[v]) return;
        double nd = dist[u] + c + pot[u] - pot[v];
        if (nd < dist[v]) {
          dist[v] = nd;
          prev[v] = u;
        }
      };
      if (u == SRC) {
        for (int s = 0; s < ns; ++s)
          if (supply[s] > eps) relax(1 + s, 0.0);
      } else if (u <= ns) {
        int s = u - 1;
        for (int t = 0; t < nt; ++t) relax(ns + 1 + t, cost[s * nt + t]);
        if (supply[s] < sc[s] - eps) relax(SRC, 0.0);
      } else if (u < SNK) {
        int t = u - ns - 1;
        for (int s = 0; s < ns; ++s)
          if (flow[s * nt + t] > eps) relax(1 + s, -cost[s * nt + t]);
        if (demand[t] > eps) relax(SNK, 0.0);
      } else {
        for (int t = 0; t < nt; ++t)
          if (demand[t] < tc[t] - eps) relax(ns + 1 + t, 0.0);
      }
    }
    if (dist[SNK] == INFINITY) throw numerical_failure("wk_norm: transport solver found no augmenting path");
    for (int k = 0; k < V; ++k)
      if (dist[k] < INFINITY) pot[k] += dist[k];
    double push = INFINITY;
    for (int v = SNK; v != SRC; v = prev[v]) {
      int u = prev[v];
      if (u == SRC) push = std::min(push, supply[v - 1]);
      else if (v == SNK) push = std::min(push, demand[u - ns - 1]);
      else if (u > ns && v <= ns && v >= 1) push = std::min(push, flow[(v - 1) * nt + (u - ns - 1)]);
      else if (v == SRC) push = std::min(push, sc[u - 1] - supply[u - 1]);
      else if (u == SNK) push = std::min(push, tc[v - ns - 1] - demand[v - ns - 1]);
    }
    for (int v = SNK; v != SRC; v = prev[v]) {
      int u = prev[v];
      if (u == SRC) supply[v - 1] -= push;
      else if (v == SNK) demand[u - ns - 1] -= push;
      else if (u >= 1 && u <= ns && v > ns) flow[(u - 1) * nt + (v - ns - 1)] += push;
      else if (u > ns && v >= 1 && v <= ns) flow[(v - 1) * nt + (u - ns - 1)] -= push;
      else if (v == SRC) supply[u - 1] += push;
      else if (u == SNK) demand[v - ns - 1] += push;
    }
  }
  double total = 0.0;
  for (std::size_t k = 0; k < flow.size(); ++k) total += flow[k] * cost[k];
  return total;
}

namespace {

// Dykstra's alternating projection onto the box and the pairwise Hoelder slabs
void project_feasible(std::vector<double>& x, const std::vector<double>& D, int n, int cycles) {
  std::vector<double> ib(n, 0.0);
  std::vector<double> ip(static_cast<std::size_t>(n) * n * 2, 0.0);
  for (int c = 0; c < cycles; ++c) {
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      double y = x[i] + ib[i];
      double xn = std::clamp(y, -1.0, 1.0);
      ib[i] = y - xn;
      change = std::max(change, std::fabs(xn - x[i]));
      x[i] = xn;
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double* I = &ip[(static_cast<std::size_t>(i) * n + j) * 2];
        double yi = x[i] + I[0], yj = x[j] + I[1];
        double d = yi - yj, bound = D[i * n + j];
        double xi = yi, xj = yj;
        if (d > bound) {
          double e = 0.5 * (d - bound);
          xi -= e;
          xj += e;
        } else if (d < -bound) {
          double e = 0.5 * (-bound - d);
          xi += e;
          xj -= e;
        }
        I[0] = yi - xi;
        I[1] = yj - xj;
        change = std::max(change, std::max(std::fabs(xi - x[i]), std::fabs(xj - x[j])));
        x[i] = xi;
        x[j] = xj;
      }
    if (change < 1e-15) break;
  }
}

}  // namespace

double wk_norm_oracle(const AtomicMeasure& mu, double zeta, int grid, const OracleOptions& opt) {
  if (grid < 64) throw invalid_input("wk_norm_oracle: grid < 64");
  if (!(zeta > 0.0 && zeta <= 1.0)) throw invalid_input("wk_norm_oracle: zeta must lie in (0,1]");
  const int n = static_cast<int>(mu.size());
  if (n == 0) return 0.0;
  std::vector<double> D(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) D[i * n + j] = std::pow(std::fabs(mu.pos[i] - mu.pos[j]), zeta);
  double wmax = 0.0;
  for (double x : mu.w) wmax = std::max(wmax, std::fabs(x));
  if (wmax == 0.0) return 0.0;
  const double eta = opt.step_factor / wmax;
  std::vector<double> u(n, 0.0), v(n);
  double best = 0.0;
  for (int s = 0; s < opt.sweeps; ++s) {
    for (int i = 0; i < n; ++i) u[i] += eta * mu.w[i];
    project_feasible(u, D, n, opt.projection_cycles);
    // the lower envelope is exactly feasible, so every candidate is a certified lower bound
    double obj = 0.0;
    for (int i = 0; i < n; ++i) {
      double m = INFINITY;
      for (int j = 0; j < n; ++j) m = std::min(m, u[j] + D[i * n + j]);
      v[i] = std::clamp(m, -1.0, 1.0);
      obj += mu.w[i] * v[i];
    }
    best = std::max(best, obj);
  }
  return best;
}

AtomicMeasure pushforward(const std::function<double(double)>& G, const AtomicMeasure& mu) {
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double y = G(mu.pos[i]);
    if (y < -1e-12 || y > 1.0 + 1e-12) throw invalid_input("pushforward: fiber map leaves [0,1]");
    atoms.emplace_back(std::clamp(y, 0.0, 1.0), mu.w[i]);
  }
  return AtomicMeasure::from_atoms(std::move(atoms));
}

AtomicMeasure coarsen(const AtomicMeasure& mu, int bins) {
  if (bins < 2) throw invalid_input("coarsen: bins < 2");
  AtomicMeasure m;
  int last = -1;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    int k = bin_index(mu.pos[i], bins);
    if (k == last)
      m.w.back() += mu.w[i];
    else {
      m.pos.push_back((k + 0.5) / bins);
      m.w.push_back(mu.w[i]);
      last = k;
    }
  }
  return m;
}

double LeafFamily::total_mass() const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += base_weights[i] * leaves[i].total_mass();
  return s;
}

LeafFamily product_family(const AtomicMeasure& m2, const Eigen::VectorXd& base_weights, bool circle) {
  LeafFamily fam;
  fam.leaves.assign(base_weights.size(), m2);
  fam.base_weights = base_weights;
  fam.marginal_density = Eigen::VectorXd::Constant(base_weights.size(), m2.total_mass());
  fam.circle = circle;
  return fam;
}

double linf_norm(const LeafFamily& fam, double zeta) {
  std::vector<double> v(fam.size());
  parallel_for(v.size(), [&](std::size_t i) { v[i] = wk_norm(fam.leaves[i], zeta); });
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

double sinf_norm(const LeafFamily& fam, double zeta) {
  return grid_holder_norm(fam.marginal_density, zeta, fam.circle) + linf_norm(fam, zeta);
}

double holder_seminorm(const LeafFamily& fam, double zeta, int far_pairs, std::uint64_t seed) {
  const int N = fam.size();
  if (N == 0) throw invalid_input("holder_seminorm: empty family");
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i + 1 < N; ++i) pairs.emplace_back(i, i + 1);
  if (fam.circle && N > 2) pairs.emplace_back(N - 1, 0);
  Rng rng(seed);
  if (N > 2)
    for (int k = 0; k < far_pairs; ++k) {
      int i = static_cast<int>(rng.uniform() * N), j = static_cast<int>(rng.uniform() * N);
      if (i == j) continue;
      pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
  std::vector<double> r(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    auto [i, j] = pairs[k];
    double d = base_distance(cell_center(i, N), cell_center(j, N), fam.circle);
    r[k] = wk_norm(fam.leaves[i] - fam.leaves[j], zeta) / std::pow(d, zeta);
  });
  return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

double family_distance_linf(const LeafFamily& a, const LeafFamily& b, double zeta) {
  if (a.size() != b.size()) throw invalid_input("family_distance_linf: leaf counts differ");
  std::vector<double> v(a.size());
  parallel_for(v.size(), [&](std::size_t i) { v[i] = wk_norm(a.leaves[i] - b.leaves[i], zeta); });
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

void write_family_csv(const LeafFamily& fam, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.precision(17);
  os << "leaf,pos,weight\r\n";
  for (int i = 0; i < fam.size(); ++i)
    for (std::size_t k = 0; k < fam.leaves[i].size(); ++k)
      os << i << ',' << fam.leaves[i].pos[k] << ',' << fam.leaves[i].w[k] << "\r\n";
}

LeafFamily read_family_csv(const std::string& path, int leaf_count) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(is, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "leaf,pos,weight") throw invalid_input("read_family_csv: bad header in " + path);
  std::vector<std::vector<std::pair<double, double>>> atoms(leaf_count);
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string a, b, c;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c, ',');
    int i = std::stoi(a);
    if (i < 0 || i >= leaf_count) throw invalid_input("read_family_csv: leaf index out of range");
    atoms[i].emplace_back(std::stod(b), std::stod(c));
  }
  LeafFamily fam;
  fam.base_weights = Eigen::VectorXd::Constant(leaf_count, 1.0 / leaf_count);
  fam.marginal_density.resize(leaf_count);
  for (int i = 0; i < leaf_count; ++i) {
    fam.leaves.push_back(AtomicMeasure::from_atoms(std::move(atoms[i])));
    fam.marginal_density[i] = fam.leaves.back().total_mass();
  }
  return fam;
}

}  // namespace ergo
