#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinlab/gibbs.hpp"
#include "spinlab/graph.hpp"

namespace spinlab {

enum class TreeSection : signed char { base = 0, high = 1, low = 2 };

struct WalkTreeNode {
  int copy_of = -1;          // original vertex
  int parent = -1;           // -1 at root
  int parent_edge = -1;      // edge id in the source graph (-1 at root)
  std::vector<int> children;
  signed char pinning = 0;   // 0 free, +1/-1 pinned
  TreeSection section = TreeSection::base;
};

struct WalkTree {
  enum class Kind { saw, ap };
  Kind kind = Kind::saw;
  int root = 0;
  int source_n = 0;
  std::vector<WalkTreeNode> nodes;

  int size() const { return static_cast<int>(nodes.size()); }
  // Copies of an original vertex, in node order.
  std::vector<int> copies_of(int vertex) const;
  int depth_of(int node) const;
};

constexpr std::uint64_t kDefaultWalkBudget = 2'000'000;

// Tree of self-avoiding walks from w. Nodes are the walks v_0..v_r from w
// that are self-avoiding, or self-avoiding up to r-1 with v_r = v_j for some
// j <= r-3. Cycle-closing nodes are pinned -1 if v_{j+1} > v_{l-1} under the
// total ordering, +1 otherwise, and copies of externally pinned vertices
// inherit that pinning. `ordering` maps vertex -> rank (empty = id order).
WalkTree build_saw_tree(const SparseGraph& g, int w, const Pinning& external = {},
                        const std::vector<int>& ordering = {},
                        std::uint64_t node_budget = kDefaultWalkBudget);

// All-paths tree for a tree-plus-at-most-one-edge graph. Tree input: output
// identical to the input re-rooted at w. Unicyclic input with cycle
// x_1..x_l (x_1 nearest to w, direction fixed by x_2 > x_l): T_SAW(G,w) with
// T_SAW(G_1,x_1) and T_SAW(G_2,x_1) hung from the two cycle-closing leaf
// copies of x_1 (sections high/low).
WalkTree build_ap_tree(const SparseGraph& g, int w, const std::vector<int>& ordering = {},
                       std::uint64_t node_budget = kDefaultWalkBudget);

// Every self-avoiding walk of G lifts to a walk of copies in the all-paths
// tree; verified by exhaustive enumeration on both sides.
bool all_paths_property_check(const SparseGraph& g, int w,
                              std::uint64_t walk_budget = kDefaultWalkBudget);

// 2-spin model living on a walk tree: node fields/couplings are inherited
// from the source model through copy_of / parent_edge.
struct TreeModel {
  const WalkTree* tree = nullptr;
  double beta = 0.0;
  std::vector<double> coupling_to_parent;  // per node, 0 at root
  std::vector<double> node_field;          // per node
};

TreeModel make_tree_model(const WalkTree& tree, const CouplingMap& c, double beta,
                          const std::vector<double>& field);

// Subtree weights (w_plus, w_minus) at every node by leaf-to-root dynamic
// programming; messages are normalised per node to avoid under/overflow.
struct TreeMarginals {
  std::vector<double> w_plus;
  std::vector<double> w_minus;
};
TreeMarginals tree_marginals(const TreeModel& tm);

// R = mu(+1)/mu(-1) at the subtree rooted at `node`, given pinnings below;
// +infinity when the minus weight is zero.
double ratio_of_marginals(const TreeModel& tm, int node);

// phi(e) for e = {parent(z), z}: 0 if either endpoint is pinned, otherwise
// h_e(log R_z) with h_e(x) = -(1-exp(4 b)) e^x / ((e^{x+2b}+1)(e^x+e^{2b})),
// b = beta * J_e. |phi| <= tanh|b|.
double h_edge(double beta_j, double x);
double phi_edge_weight(const TreeModel& tm, int child_node);
std::vector<double> phi_all_edges(const TreeModel& tm);

// Influence of the root on `node`: product of phi over the root-to-node path.
double tree_influence(const TreeModel& tm, int node);

// Influence reduction check: enumeration influence on G versus the summed
// walk-tree influence over copies. Returns max absolute deviation over all
// unpinned vertices.
double saw_reduction_check(const GibbsModel& m, int w, const Pinning& pin = {},
                           int cap = kDefaultEnumerationCap);

// Graphviz dump, node label = copy_of:pinning.
std::string to_dot(const WalkTree& tree);

}  // namespace spinlab
