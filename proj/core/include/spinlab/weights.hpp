#pragma once

#include <cstdint>
#include <vector>

#include "spinlab/gibbs.hpp"
#include "spinlab/walk_tree.hpp"

namespace spinlab {

// Scalar weight machinery over one model. `d` is the expected-degree
// parameter entering the weight formulas, not an empirical degree.
struct WeightContext {
  const GibbsModel* model = nullptr;
  double epsilon = 0.0;
  double d = 0.0;
  std::vector<double> gamma;  // Gamma_e = |tanh(beta J_e)| per edge id
  std::vector<double> theta;  // Theta(u) = sum of squared incident influences
};

WeightContext make_weight_context(const GibbsModel& m, double epsilon, double d);

double edge_influence(const WeightContext& ctx, int edge_id);
double aggregate_theta(const WeightContext& ctx, int u);

// M(u) = 1 - eps/4 when Theta(u) <= 1 - eps/2 (inclusive), d*Theta(u) otherwise.
double vertex_weight(const WeightContext& ctx, int u);

// Product of vertex weights over a self-avoiding walk; empty path -> 1.
double path_weight(const WeightContext& ctx, const std::vector<int>& path);

// Upsilon_beta(P) = beta * sum |J_e| over edges with at least one endpoint in
// P, plus sum of log deg(v) over the vertices of P.
double comparison_weight_upsilon(const WeightContext& ctx, const std::vector<int>& path);

constexpr std::uint64_t kDefaultPathBudget = 10'000'000;

// DFS enumeration outcome; `complete` is false when the extension budget ran
// out, in which case `value` is meaningless.
struct BudgetedValue {
  double value = 0.0;
  bool complete = true;
  std::uint64_t extensions = 0;
};

// SQR(v, ell) = sum over self-avoiding walks of length ell from v of the
// squared edge-influence product; SQR(v, 0) = 1.
BudgetedValue sqr_sphere(const WeightContext& ctx, int v, int ell,
                         std::uint64_t budget = kDefaultPathBudget);

// Restriction of SQR on a walk tree to paths of length ell from `node`
// ending at copies of the given boundary set. `boundary` holds original
// vertex ids; edge influences are taken from ctx through parent_edge.
double sqr_boundary(const WeightContext& ctx, const WalkTree& tree, int node, int ell,
                    const std::vector<int>& boundary);

}  // namespace spinlab
