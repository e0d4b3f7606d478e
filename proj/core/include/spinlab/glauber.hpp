#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spinlab/gibbs.hpp"
#include "spinlab/rng.hpp"

namespace spinlab {

// Chain state for sweeps at arbitrary n: one +-1 spin per vertex.
using SpinVector = std::vector<signed char>;

SpinVector all_plus(int n);
SpinVector all_minus(int n);

// Heat-bath single-site update: uniform vertex v, sigma_v resampled from
// mu(sigma_v | rest) = logistic(2 (beta sum_w J_vw sigma_w + h_v)). Returns v.
int glauber_step(SpinVector& state, const GibbsModel& m, Rng& rng);

double energy(const GibbsModel& m, const SpinVector& state);        // (1/2)<s,Js> + <h,s>
double magnetization(const SpinVector& state);                      // mean spin

constexpr int kTransitionCap = 14;

// Dense 2^n x 2^n row-stochastic single-site Glauber matrix (heat bath, no
// added laziness). Reversible w.r.t. exact_distribution.
Eigen::MatrixXd transition_matrix(const GibbsModel& m, int cap = kTransitionCap);

// 1/(1 - lambda*) where lambda* is the largest nontrivial |eigenvalue| of the
// self-adjointified chain (absolute spectral gap; heat-bath eigenvalues are
// not assumed nonnegative). Verifies detailed balance, throws otherwise.
double relaxation_time(const Eigen::MatrixXd& P, const Eigen::VectorXd& mu,
                       double balance_tol = 1e-10);
// Recovers the stationary law from detailed-balance ratios along a spanning
// tree of the transition graph, then defers to the overload above.
double relaxation_time(const Eigen::MatrixXd& P, double balance_tol = 1e-10);

struct ChainDiagnostics {
  double relaxation_time = 0.0;
  int mixing_time = 0;            // steps, worst start, threshold eps
  std::vector<double> tv_curve;   // tv_curve[t] = max-start TV after t steps
};

constexpr double kMixingEps = 0.18393972058572116;  // 1/(2e)

// Worst start over all 2^n states; TV computed by repeated row application.
int mixing_time_exact(const GibbsModel& m, double eps = kMixingEps, int cap = kTransitionCap,
                      int max_steps = 1 << 20);
ChainDiagnostics chain_diagnostics(const GibbsModel& m, double eps = kMixingEps,
                                   int cap = kTransitionCap, int max_steps = 1 << 20);

// min over sampled positive f of E(f, log f) / Ent(f): a certified upper
// bound on the modified log-Sobolev constant. Sampled f mix exponential
// tilts, near-indicator spikes and iid log-normal tables.
double mlsi_ratio_estimate(const GibbsModel& m, int num_f, Rng& rng, int cap = kTransitionCap);

// One step: uniform block, resample the block from the conditional Gibbs law
// given its complement. Blocks must cover V (overlaps allowed).
Eigen::MatrixXd block_dynamics_matrix(const GibbsModel& m,
                                      const std::vector<std::vector<int>>& blocks,
                                      int cap = kTransitionCap);

// Two maximally-coupled heat-bath chains from the antipodal starts. Returns
// the fraction of replicas that have met by the end of each epoch (an epoch
// is ceil(n log n)+1 steps); nondecreasing since the coupling is absorbing.
std::vector<double> coupling_meet_estimate(const GibbsModel& m, int epochs, Rng& rng,
                                           int replicas = 200);

}  // namespace spinlab
