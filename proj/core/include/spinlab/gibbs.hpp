#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "spinlab/graph.hpp"

namespace spinlab {

// mu(sigma) proportional to exp((beta/2) <sigma, J sigma> + <sigma, h>)
// over sigma in {-1,+1}^n. Spin encoding everywhere: bit v set <=> sigma_v = +1.
struct GibbsModel {
  SparseGraph graph;
  CouplingMap couplings;
  double beta = 0.0;
  std::vector<double> field;  // length n

  int n() const { return graph.n; }
  double coupling(int edge_id) const { return couplings.values[edge_id]; }
  // H(sigma) = (1/2) <sigma, J sigma> + <h, sigma>; mu ∝ exp(beta/2 <s,Js> + <h,s>).
  double log_weight(std::uint64_t state) const;
};

GibbsModel make_model(SparseGraph g, CouplingMap c, double beta, std::vector<double> field);
GibbsModel make_model(SparseGraph g, CouplingMap c, double beta);  // h = 0

inline int spin_of(std::uint64_t state, int v) { return (state >> v) & 1 ? +1 : -1; }

constexpr int kDefaultEnumerationCap = 20;

struct ExactDistribution {
  int n = 0;
  std::vector<double> probs;  // length 2^n, indexed by spin bitmask
  double log_z = 0.0;
};

// Full enumeration with max-shift for stability. Throws capacity_error above cap.
ExactDistribution exact_distribution(const GibbsModel& m, int cap = kDefaultEnumerationCap);

std::vector<double> exact_marginals_plus(const GibbsModel& m, int cap = kDefaultEnumerationCap);

// Cov = E[ss^T] - E[s]E[s]^T over +-1 spins.
Eigen::MatrixXd covariance(const GibbsModel& m, int cap = kDefaultEnumerationCap);

struct Pinning {
  std::vector<int> vertices;     // Lambda
  std::vector<int> spins;        // +1/-1 per pinned vertex
};

// Pairwise influence matrix over V \ Lambda:
//   I(w,u) = mu_u(+1 | (Lambda,tau), (w,+1)) - mu_u(+1 | (Lambda,tau), (w,-1)).
// Rows/cols indexed by position in `free_vertices` (V \ Lambda in id order).
struct InfluenceResult {
  std::vector<int> free_vertices;
  Eigen::MatrixXd influence;
};

InfluenceResult influence_matrix(const GibbsModel& m, const Pinning& pin,
                                 int cap = kDefaultEnumerationCap);

// Ent_mu(f) = mu(f log f) - mu(f) log mu(f), with 0 log 0 = 0. f >= 0 entrywise.
double entropy_functional(const ExactDistribution& dist, const std::vector<double>& f);

// Dirichlet form of single-site Glauber: sum_{s,t} (f(s)-f(t))(g(s)-g(t)) mu(s) P(s,t).
double dirichlet_form(const GibbsModel& m, const std::vector<double>& f,
                      const std::vector<double>& g, int cap = 14);

// Raw little-endian f64 dump of the probability vector (debugging aid).
void dump_probs(const ExactDistribution& dist, const std::string& path);

}  // namespace spinlab
