#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace ergo {

// finite signed atomic measure on [0,1]; positions sorted and distinct
struct AtomicMeasure {
  std::vector<double> pos;
  std::vector<double> w;

  AtomicMeasure() = default;
  static AtomicMeasure from_atoms(std::vector<std::pair<double, double>> atoms);
  static AtomicMeasure dirac(double y, double mass = 1.0) { return from_atoms({{y, mass}}); }

  std::size_t size() const { return pos.size(); }
  bool empty() const { return pos.empty(); }
  double total_mass() const;
  double abs_mass() const;
  AtomicMeasure scaled(double c) const;
  // sign split of the weights
  AtomicMeasure positive_part() const;
  AtomicMeasure negative_part() const;
};

AtomicMeasure operator+(const AtomicMeasure& a, const AtomicMeasure& b);
AtomicMeasure operator-(const AtomicMeasure& a, const AtomicMeasure& b);

double wk_norm(const AtomicMeasure& mu, double zeta);
// min-cost transport form of the same program, valid for every zeta in (0,1]
double wk_norm_transport(const AtomicMeasure& mu, double zeta);

struct OracleOptions {
  int sweeps = 200;
  int projection_cycles = 20000;
  double step_factor = 3.0;
};
double wk_norm_oracle(const AtomicMeasure& mu, double zeta, int grid, const OracleOptions& opt = {});

AtomicMeasure pushforward(const std::function<double(double)>& G, const AtomicMeasure& mu);
AtomicMeasure coarsen(const AtomicMeasure& mu, int bins);

inline int bin_index(double y, int bins) {
  int k = static_cast<int>(y * bins);
  return k < 0 ? 0 : (k >= bins ? bins - 1 : k);
}

struct LeafFamily {
  std::vector<AtomicMeasure> leaves;
  Eigen::VectorXd base_weights;
  Eigen::VectorXd marginal_density;
  bool circle = false;

  int size() const { return static_cast<int>(leaves.size()); }
  double total_mass() const;
};

LeafFamily product_family(const AtomicMeasure& m2, const Eigen::VectorXd& base_weights, bool circle);

double linf_norm(const LeafFamily& fam, double zeta);
double sinf_norm(const LeafFamily& fam, double zeta);
double holder_seminorm(const LeafFamily& fam, double zeta, int far_pairs = 10000, std::uint64_t seed = 12345);
double family_distance_linf(const LeafFamily& a, const LeafFamily& b, double zeta);

void write_family_csv(const LeafFamily& fam, const std::string& path);
LeafFamily read_family_csv(const std::string& path, int leaf_count);

}  // namespace ergo
