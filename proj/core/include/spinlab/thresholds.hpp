#pragma once

#include <cstdint>
#include <vector>

#include "spinlab/graph.hpp"
#include "spinlab/rng.hpp"

namespace spinlab {

// Gauss-Hermite rule for integrals against the standard normal density:
// int f(x) phi(x) dx ~ sum w_i f(x_i). Weights sum to 1; exact for
// polynomials up to degree 2*order - 1.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;
};

QuadratureRule gauss_hermite(int order);

constexpr int kDefaultQuadratureOrder = 128;

// d * E[tanh^2(gamma beta)]; evaluated with the given rule and re-checked
// against the order-doubled rule to relative 1e-10.
double kappa_integral(double beta, double d, const QuadratureRule& rule);
double kappa_integral(double beta, double d);

// Unique root of kappa_integral(beta, d) = kappa; bisection to rel 1e-10.
double beta_c(double d, double kappa = 0.25);
// Root of d * E[tanh^2(gamma beta)] = 1.
double beta_rec(double d);

struct TailHarnessResult {
  double empirical = 0.0;
  double bound = 0.0;
  double mc_sigma = 0.0;   // binomial std error of the empirical frequency
  std::uint64_t samples = 0;
};

// P[Theta(u) >= E[Theta] + delta/2] for a Binomial(n-1, d/n) degree vertex
// (n = 1e5 proxy) with Gaussian couplings, against 2 exp(-delta^2 d/(8+2delta)).
TailHarnessResult theta_tail_harness(double d, double beta, double delta, std::uint64_t samples,
                                     Rng& rng, int n_proxy = 100000);

// P[SQR_T(root, r) > C kappa^r] over Galton-Watson Poisson(d) trees at
// inverse temperature beta, against exp((1-C) t) for t in [0, d/(2 kappa)).
TailHarnessResult gw_sqr_tail_harness(double d, double beta, int r, double C, double t,
                                      std::uint64_t samples, std::uint64_t seed);

struct HalfNormalResult {
  TailHarnessResult tail;   // P[sum |X_i| > (1+delta) E] vs exp(-N delta^2 / pi)
  double mean_empirical = 0.0;
  double mean_exact = 0.0;  // N sigma sqrt(2/pi)
  double mean_sigma = 0.0;
};

HalfNormalResult half_normal_tail_harness(int N, double sigma, double delta,
                                          std::uint64_t samples, Rng& rng);

struct UpsilonHarnessResult {
  std::uint64_t paths_sampled = 0;
  std::uint64_t exceedances = 0;
  double threshold = 0.0;  // 2 d^{-1/100} log n
  double max_upsilon = 0.0;
};

// Random self-avoiding walks of the given length in G(n, d/n) instances;
// counts Upsilon_beta values above the threshold.
UpsilonHarnessResult upsilon_path_harness(int n, double d, double beta, int path_len,
                                          std::uint64_t samples, Rng& rng);

struct DensityWitness {
  bool found = false;
  std::vector<int> vertices;
  int spanned_edges = 0;
  bool exhaustive = true;       // false when the subset budget forced sampling
  std::uint64_t subsets_seen = 0;
};

// Searches connected vertex sets of size <= size_cap spanning more than |S|
// edges. Exhaustive while the extension budget lasts, then falls back to
// sampled connected subsets.
DensityWitness small_set_density_check(const SparseGraph& g, int size_cap,
                                       std::uint64_t budget = 10'000'000,
                                       std::uint64_t sampled_subsets = 20'000,
                                       std::uint64_t seed = 1);

}  // namespace spinlab
