#include "spinlab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "spinlab/errors.hpp"

namespace spinlab {

WeightContext make_weight_context(const GibbsModel& m, double epsilon, double d) {
  if (!(epsilon > 0 && epsilon < 1))
    throw parameter_error("make_weight_context: epsilon must be in (0,1)");
  if (!(d > 0)) throw parameter_error("make_weight_context: d must be > 0");
  WeightContext ctx;
  ctx.model = &m;
  ctx.epsilon = epsilon;
  ctx.d = d;
  ctx.gamma.resize(m.graph.edges.size());
  const double below_one = std::nextafter(1.0, 0.0);
  for (const Edge& e : m.graph.edges) {
    // |tanh| < 1 exactly; keep that in floating point where tanh saturates
    const double g = std::fabs(std::tanh(m.beta * m.couplings.values[e.id]));
    ctx.gamma[e.id] = std::min(g, below_one);
  }
  ctx.theta.assign(m.n(), 0.0);
  for (const Edge& e : m.graph.edges) {
    const double g2 = ctx.gamma[e.id] * ctx.gamma[e.id];
    ctx.theta[e.u] += g2;
    ctx.theta[e.v] += g2;
  }
  return ctx;
}

double edge_influence(const WeightContext& ctx, int edge_id) { return ctx.gamma.at(edge_id); }

double aggregate_theta(const WeightContext& ctx, int u) { return ctx.theta.at(u); }

double vertex_weight(const WeightContext& ctx, int u) {
  const double th = ctx.theta.at(u);
  if (th <= 1.0 - ctx.epsilon / 2.0) return 1.0 - ctx.epsilon / 4.0;
  return ctx.d * th;
}

namespace {

void check_saw(const SparseGraph& g, const std::vector<int>& path, const char* who) {
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] < 0 || path[i] >= g.n) throw parameter_error(std::string(who) + ": vertex out of range");
    for (std::size_t j = i + 1; j < path.size(); ++j)
      if (path[i] == path[j]) throw parameter_error(std::string(who) + ": path revisits a vertex");
  }
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    if (!g.adjacent(path[i], path[i + 1]))
      throw parameter_error(std::string(who) + ": consecutive vertices not adjacent");
}

}  // namespace

double path_weight(const WeightContext& ctx, const std::vector<int>& path) {
  check_saw(ctx.model->graph, path, "path_weight");
  double prod = 1.0;
  for (int v : path) prod *= vertex_weight(ctx, v);
  return prod;
}

double comparison_weight_upsilon(const WeightContext& ctx, const std::vector<int>& path) {
  const SparseGraph& g = ctx.model->graph;
  check_saw(g, path, "comparison_weight_upsilon");
  if (path.empty()) throw parameter_error("comparison_weight_upsilon: empty path");
  std::vector<bool> in_path(g.n, false);
  for (int v : path) in_path[v] = true;
  double edge_sum = 0.0;
  for (const Edge& e : g.edges)
    if (in_path[e.u] || in_path[e.v]) edge_sum += std::fabs(ctx.model->couplings.values[e.id]);
  double deg_sum = 0.0;
  for (int v : path) {
    const int deg = g.degree(v);
    if (deg == 0) throw parameter_error("comparison_weight_upsilon: degree-0 vertex (log 0)");
    deg_sum += std::log(static_cast<double>(deg));
  }
  return ctx.model->beta * edge_sum + deg_sum;
}

BudgetedValue sqr_sphere(const WeightContext& ctx, int v, int ell, std::uint64_t budget) {
  const SparseGraph& g = ctx.model->graph;
  if (v < 0 || v >= g.n) throw parameter_error("sqr_sphere: vertex out of range");
  if (ell < 0) throw parameter_error("sqr_sphere: ell must be >= 0");
  BudgetedValue out;
  if (ell == 0) {
    out.value = 1.0;
    return out;
  }
  std::vector<bool> used(g.n, false);
  double total = 0.0;
  bool exhausted = false;
  std::uint64_t extensions = 0;
  // DFS over self-avoiding walks, multiplying squared influences.
  std::function<void(int, int, double)> rec = [&](int x, int remaining, double prod) {
    if (exhausted) return;
    if (remaining == 0) {
      total += prod;
      return;
    }
    for (auto [y, eid] : g.inc[x]) {
      if (used[y]) continue;
      if (++extensions > budget) {
        exhausted = true;
        return;
      }
      const double gam = ctx.gamma[eid];
      used[y] = true;
      rec(y, remaining - 1, prod * gam * gam);
      used[y] = false;
    }
  };
  used[v] = true;
  rec(v, ell, 1.0);
  out.value = exhausted ? 0.0 : total;
  out.complete = !exhausted;
  out.extensions = extensions;
  return out;
}

double sqr_boundary(const WeightContext& ctx, const WalkTree& tree, int node, int ell,
                    const std::vector<int>& boundary) {
  if (node < 0 || node >= tree.size()) throw parameter_error("sqr_boundary: node out of range");
  if (ell < 0) throw parameter_error("sqr_boundary: ell must be >= 0");
  std::vector<bool> is_boundary(tree.source_n, false);
  for (int v : boundary) is_boundary.at(v) = true;

  // neighbours in the tree (parent + children); paths of length ell in a tree
  // are exactly the non-backtracking walks of length ell
  std::vector<std::vector<std::pair<int, int>>> nbrs(tree.size());  // (node, source edge id)
  for (int i = 0; i < tree.size(); ++i)
    if (tree.nodes[i].parent >= 0) {
      nbrs[i].emplace_back(tree.nodes[i].parent, tree.nodes[i].parent_edge);
      nbrs[tree.nodes[i].parent].emplace_back(i, tree.nodes[i].parent_edge);
    }

  double total = 0.0;
  std::function<void(int, int, int, double)> rec = [&](int x, int prev, int remaining, double prod) {
    if (remaining == 0) {
      if (is_boundary[tree.nodes[x].copy_of]) total += prod;
      return;
    }
    for (auto [y, eid] : nbrs[x]) {
      if (y == prev) continue;
      const double gam = ctx.gamma[eid];
      rec(y, x, remaining - 1, prod * gam * gam);
    }
  };
  if (ell == 0) {
    if (is_boundary[tree.nodes[node].copy_of]) total = 1.0;
    return total;
  }
  rec(node, -1, ell, 1.0);
  return total;
}

}  // namespace spinlab
