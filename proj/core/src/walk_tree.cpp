#include "spinlab/walk_tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <sstream>

#include "spinlab/errors.hpp"

namespace spinlab {

namespace {

std::vector<int> identity_or(const std::vector<int>& ordering, int n) {
  if (ordering.empty()) {
    std::vector<int> id(n);
    for (int i = 0; i < n; ++i) id[i] = i;
    return id;
  }
  if (static_cast<int>(ordering.size()) != n)
    throw parameter_error("walk tree: ordering size must equal vertex count");
  return ordering;
}

std::vector<int> walk_of(const WalkTree& t, int node) {
  std::vector<int> walk;
  for (int x = node; x >= 0; x = t.nodes[x].parent) walk.push_back(t.nodes[x].copy_of);
  std::reverse(walk.begin(), walk.end());
  return walk;
}

struct EdgeKey {
  int u, v;
  bool operator==(const EdgeKey&) const = default;
};

WalkTree build_saw_tree_impl(const SparseGraph& g, int w, const Pinning& external,
                             const std::vector<int>& rank, std::uint64_t node_budget,
                             const std::vector<EdgeKey>& forbidden) {
  if (w < 0 || w >= g.n) throw parameter_error("build_saw_tree: start vertex out of range");
  std::vector<signed char> ext_pin(g.n, 0);
  for (std::size_t i = 0; i < external.vertices.size(); ++i)
    ext_pin[external.vertices[i]] = external.spins[i] > 0 ? +1 : -1;

  auto edge_forbidden = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    for (const EdgeKey& e : forbidden)
      if (e.u == a && e.v == b) return true;
    return false;
  };

  WalkTree t;
  t.kind = WalkTree::Kind::saw;
  t.source_n = g.n;
  t.root = 0;
  t.nodes.push_back({w, -1, -1, {}, ext_pin[w], TreeSection::base});

  // walk reconstruction per active node via the parent chain
  std::deque<int> frontier = {0};
  while (!frontier.empty()) {
    const int node = frontier.front();
    frontier.pop_front();
    const std::vector<int> walk = walk_of(t, node);
    const int x = t.nodes[node].copy_of;
    const int len = static_cast<int>(walk.size()) - 1;  // current walk length l
    for (auto [z, eid] : g.inc[x]) {
      if (edge_forbidden(x, z)) continue;
      int j = -1;
      for (int i = 0; i <= len; ++i)
        if (walk[i] == z) {
          j = i;
          break;
        }
      if (j >= 0 && j == len - 1) continue;  // backtracking, never a walk in the set
      if (t.nodes.size() >= node_budget)
        throw capacity_error("build_saw_tree: node budget exhausted");
      if (j < 0) {
        // extends to a longer self-avoiding walk
        const int child = t.size();
        t.nodes.push_back({z, node, eid, {}, ext_pin[z], TreeSection::base});
        t.nodes[node].children.push_back(child);
        frontier.push_back(child);
      } else if (j <= len - 2) {
        // cycle-closing copy: walk v_0..v_{l+1} with v_{l+1} = v_j, j <= (l+1)-3
        signed char pin;
        if (ext_pin[z] != 0) {
          pin = ext_pin[z];  // external pinning takes precedence
        } else {
          // closing walk is v_0..v_{l+1}, v_{l+1} = z = v_j; compare v_{j+1}
          // against v_l (the current endpoint x)
          pin = rank[walk[j + 1]] > rank[x] ? -1 : +1;
        }
        const int child = t.size();
        t.nodes.push_back({z, node, eid, {}, pin, TreeSection::base});
        t.nodes[node].children.push_back(child);
        // leaf by construction: the walk is no longer self-avoiding
      }
    }
  }
  return t;
}

}  // namespace

std::vector<int> WalkTree::copies_of(int vertex) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (nodes[i].copy_of == vertex) out.push_back(i);
  return out;
}

int WalkTree::depth_of(int node) const {
  int d = 0;
  for (int x = node; nodes[x].parent >= 0; x = nodes[x].parent) ++d;
  return d;
}

WalkTree build_saw_tree(const SparseGraph& g, int w, const Pinning& external,
                        const std::vector<int>& ordering, std::uint64_t node_budget) {
  return build_saw_tree_impl(g, w, external, identity_or(ordering, g.n), node_budget, {});
}

namespace {

// Vertices of the unique cycle, or empty for a tree. Input must be connected.
std::vector<int> find_cycle_vertices(const SparseGraph& g) {
  std::vector<int> deg(g.n);
  for (int v = 0; v < g.n; ++v) deg[v] = g.degree(v);
  std::deque<int> leaves;
  std::vector<bool> removed(g.n, false);
  for (int v = 0; v < g.n; ++v)
    if (deg[v] <= 1) {
      leaves.push_back(v);
      removed[v] = true;
    }
  while (!leaves.empty()) {
    const int v = leaves.front();
    leaves.pop_front();
    for (int u : g.adj[v])
      if (!removed[u] && --deg[u] <= 1) {
        removed[u] = true;
        leaves.push_back(u);
      }
  }
  std::vector<int> cycle;
  for (int v = 0; v < g.n; ++v)
    if (!removed[v]) cycle.push_back(v);
  return cycle;  // unordered
}

std::vector<int> bfs_parents(const SparseGraph& g, int src) {
  std::vector<int> parent(g.n, -2);
  parent[src] = -1;
  std::deque<int> q = {src};
  while (!q.empty()) {
    const int v = q.front();
    q.pop_front();
    for (int u : g.adj[v])  // sorted: lexicographically least shortest paths
      if (parent[u] == -2) {
        parent[u] = v;
        q.push_back(u);
      }
  }
  return parent;
}

}  // namespace

WalkTree build_ap_tree(const SparseGraph& g, int w, const std::vector<int>& ordering,
                       std::uint64_t node_budget) {
  if (w < 0 || w >= g.n) throw parameter_error("build_ap_tree: root out of range");
  const std::vector<int> rank = identity_or(ordering, g.n);
  const std::vector<int> parent = bfs_parents(g, w);
  for (int v = 0; v < g.n; ++v)
    if (parent[v] == -2) throw parameter_error("build_ap_tree: graph must be connected");
  const int m = g.edge_count();
  if (m != g.n - 1 && m != g.n)
    throw parameter_error("build_ap_tree: input must be a tree with at most one extra edge");

  if (m == g.n - 1) return build_saw_tree_impl(g, w, {}, rank, node_budget, {});

  // unicyclic case
  const std::vector<int> cycle_set = find_cycle_vertices(g);
  std::vector<bool> on_cycle(g.n, false);
  for (int v : cycle_set) on_cycle[v] = true;

  // x1 = cycle vertex closest to w (walk the BFS tree up from w's side:
  // closest cycle vertex along any shortest path is unique in a unicyclic graph)
  int x1 = -1;
  {
    std::deque<int> q = {w};
    std::vector<bool> seen(g.n, false);
    seen[w] = true;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      if (on_cycle[v]) {
        x1 = v;
        break;
      }
      for (int u : g.adj[v])
        if (!seen[u]) {
          seen[u] = true;
          q.push_back(u);
        }
    }
  }
  if (x1 < 0) throw parameter_error("build_ap_tree: unicyclic input without reachable cycle");

  // orient the cycle so that x2 > x_l in the ordering
  std::vector<int> cyc_nbrs;
  for (int u : g.adj[x1])
    if (on_cycle[u]) cyc_nbrs.push_back(u);
  // x1 has exactly two cycle neighbours unless the cycle is a triangle sharing both
  if (cyc_nbrs.size() != 2) throw parameter_error("build_ap_tree: malformed cycle");
  const int x2 = rank[cyc_nbrs[0]] > rank[cyc_nbrs[1]] ? cyc_nbrs[0] : cyc_nbrs[1];
  const int xl = x2 == cyc_nbrs[0] ? cyc_nbrs[1] : cyc_nbrs[0];

  // z = first vertex after x1 on the shortest path from x1 to w (absent if w = x1)
  int z = -1;
  if (w != x1) {
    // parent[] is the BFS tree from w, so stepping from x1 towards w is parent[x1]
    z = parent[x1];
  }

  auto forbid = [&](int a, int b) { return EdgeKey{std::min(a, b), std::max(a, b)}; };

  WalkTree base = build_saw_tree_impl(g, w, {}, rank, node_budget, {});
  base.kind = WalkTree::Kind::ap;

  std::vector<EdgeKey> fb_high = {forbid(x1, xl)};
  std::vector<EdgeKey> fb_low = {forbid(x1, x2)};
  if (z >= 0) {
    fb_high.push_back(forbid(x1, z));
    fb_low.push_back(forbid(x1, z));
  }
  const WalkTree high = build_saw_tree_impl(g, x1, {}, rank, node_budget, fb_high);
  const WalkTree low = build_saw_tree_impl(g, x1, {}, rank, node_budget, fb_low);

  // the two cycle-closing leaf copies of x1; the vertex entered right after
  // the first visit of x1 tells the direction
  int u_high = -1, u_low = -1;
  for (int i = 0; i < base.size(); ++i) {
    const WalkTreeNode& nd = base.nodes[i];
    if (nd.copy_of != x1 || nd.parent < 0 || !nd.children.empty()) continue;
    if (nd.pinning == 0) continue;
    const std::vector<int> walk = walk_of(base, i);
    int first = -1;
    for (std::size_t p = 0; p + 1 < walk.size(); ++p)
      if (walk[p] == x1) {
        first = static_cast<int>(p);
        break;
      }
    if (first < 0) continue;
    const int dir = walk[first + 1];
    if (dir == x2) u_high = i;
    if (dir == xl) u_low = i;
  }
  if (u_high < 0 || u_low < 0)
    throw parameter_error("build_ap_tree: could not locate the cycle-closing copies");

  // graft `sub` (minus its root, identified with `attach`) into base
  auto graft = [&](const WalkTree& sub, int attach, TreeSection section) {
    std::vector<int> remap(sub.size(), -1);
    remap[sub.root] = attach;
    for (int i = 0; i < sub.size(); ++i) {
      if (i == sub.root) continue;
      const WalkTreeNode& nd = sub.nodes[i];
      const int id = base.size();
      remap[i] = id;
      base.nodes.push_back({nd.copy_of, -1, nd.parent_edge, {}, nd.pinning, section});
      if ((std::uint64_t)base.size() > node_budget)
        throw capacity_error("build_ap_tree: node budget exhausted");
    }
    for (int i = 0; i < sub.size(); ++i) {
      if (i == sub.root) continue;
      const int id = remap[i];
      const int p = remap[sub.nodes[i].parent];
      base.nodes[id].parent = p;
      base.nodes[p].children.push_back(id);
    }
  };
  graft(high, u_high, TreeSection::high);
  graft(low, u_low, TreeSection::low);
  return base;
}

namespace {

// All directed self-avoiding walks of g with >= 2 vertices, via DFS.
void enumerate_saws(const SparseGraph& g, std::uint64_t budget,
                    const std::function<void(const std::vector<int>&)>& emit) {
  std::vector<int> path;
  std::vector<bool> used(g.n, false);
  std::uint64_t steps = 0;
  std::function<void()> rec = [&] {
    if (++steps > budget) throw capacity_error("enumerate_saws: walk budget exhausted");
    if (path.size() >= 2) emit(path);
    const int x = path.back();
    for (int y : g.adj[x]) {
      if (used[y]) continue;
      used[y] = true;
      path.push_back(y);
      rec();
      path.pop_back();
      used[y] = false;
    }
  };
  for (int v = 0; v < g.n; ++v) {
    used[v] = true;
    path = {v};
    rec();
    used[v] = false;
  }
}

}  // namespace

bool all_paths_property_check(const SparseGraph& g, int w, std::uint64_t walk_budget) {
  const WalkTree t = build_ap_tree(g, w, {}, walk_budget);
  // tree adjacency for walks of copies
  std::vector<std::vector<int>> nbrs(t.size());
  for (int i = 0; i < t.size(); ++i)
    if (t.nodes[i].parent >= 0) {
      nbrs[i].push_back(t.nodes[i].parent);
      nbrs[t.nodes[i].parent].push_back(i);
    }
  std::vector<std::vector<int>> copies(g.n);
  for (int i = 0; i < t.size(); ++i) copies[t.nodes[i].copy_of].push_back(i);

  bool all_ok = true;
  auto check_walk = [&](const std::vector<int>& walk) {
    if (!all_ok) return;
    // lift exists? DFS over tree nodes matching walk positions; a
    // non-backtracking walk in a tree is automatically self-avoiding.
    std::function<bool(std::size_t, int, int)> match = [&](std::size_t pos, int node, int prev) {
      if (pos + 1 == walk.size()) return true;
      for (int nb : nbrs[node]) {
        if (nb == prev) continue;
        if (t.nodes[nb].copy_of != walk[pos + 1]) continue;
        if (match(pos + 1, nb, node)) return true;
      }
      return false;
    };
    bool found = false;
    for (int start : copies[walk[0]])
      if (match(0, start, -1)) {
        found = true;
        break;
      }
    if (!found) all_ok = false;
  };
  enumerate_saws(g, walk_budget, check_walk);
  return all_ok;
}

TreeModel make_tree_model(const WalkTree& tree, const CouplingMap& c, double beta,
                          const std::vector<double>& field) {
  if (static_cast<int>(field.size()) != tree.source_n)
    throw parameter_error("make_tree_model: field length mismatch");
  TreeModel tm;
  tm.tree = &tree;
  tm.beta = beta;
  tm.coupling_to_parent.resize(tree.size(), 0.0);
  tm.node_field.resize(tree.size(), 0.0);
  for (int i = 0; i < tree.size(); ++i) {
    const WalkTreeNode& nd = tree.nodes[i];
    tm.node_field[i] = field[nd.copy_of];
    if (nd.parent_edge >= 0) tm.coupling_to_parent[i] = c.values[nd.parent_edge];
  }
  return tm;
}

TreeMarginals tree_marginals(const TreeModel& tm) {
  const WalkTree& t = *tm.tree;
  TreeMarginals out;
  out.w_plus.assign(t.size(), 0.0);
  out.w_minus.assign(t.size(), 0.0);
  // nodes are created parents-first, so reverse order is a valid post-order
  for (int i = t.size() - 1; i >= 0; --i) {
    const WalkTreeNode& nd = t.nodes[i];
    double wp = std::exp(tm.node_field[i]);
    double wm = std::exp(-tm.node_field[i]);
    for (int c : nd.children) {
      const double b = tm.beta * tm.coupling_to_parent[c];
      const double ep = std::exp(b), em = std::exp(-b);
      const double mp = ep * out.w_plus[c] + em * out.w_minus[c];   // sigma_i = +1
      const double mm = em * out.w_plus[c] + ep * out.w_minus[c];   // sigma_i = -1
      wp *= mp;
      wm *= mm;
      const double scale = std::max(wp, wm);
      if (scale > 0 && (scale > 1e100 || scale < 1e-100)) {
        wp /= scale;
        wm /= scale;
      }
    }
    if (nd.pinning > 0) wm = 0.0;
    if (nd.pinning < 0) wp = 0.0;
    out.w_plus[i] = wp;
    out.w_minus[i] = wm;
  }
  return out;
}

double ratio_of_marginals(const TreeModel& tm, int node) {
  const TreeMarginals marg = tree_marginals(tm);
  if (marg.w_minus[node] == 0.0) return std::numeric_limits<double>::infinity();
  return marg.w_plus[node] / marg.w_minus[node];
}

double h_edge(double beta_j, double x) {
  // sinh(2b) / (cosh(x) + cosh(2b)), overflow-safe
  if (std::isnan(x)) throw parameter_error("h_edge: x is NaN");
  const double b = beta_j;
  if (b == 0.0) return 0.0;
  if (std::isinf(x)) return 0.0;
  const double ab = std::fabs(b), ax = std::fabs(x);
  const double em4b = std::expm1(-4.0 * ab);           // e^{-4|b|} - 1
  const double exponent = ax - 2.0 * ab;
  if (exponent > 700.0) return 0.0;
  const double den = std::exp(exponent) * (1.0 + std::exp(-2.0 * ax)) + (2.0 + em4b);
  const double val = -em4b / den;
  return b > 0 ? val : -val;
}

std::vector<double> phi_all_edges(const TreeModel& tm) {
  const WalkTree& t = *tm.tree;
  const TreeMarginals marg = tree_marginals(tm);
  std::vector<double> phi(t.size(), 0.0);
  for (int i = 0; i < t.size(); ++i) {
    const WalkTreeNode& nd = t.nodes[i];
    if (nd.parent < 0) continue;
    if (nd.pinning != 0 || t.nodes[nd.parent].pinning != 0) {
      phi[i] = 0.0;
      continue;
    }
    double logr;
    if (marg.w_minus[i] == 0.0)
      logr = std::numeric_limits<double>::infinity();
    else if (marg.w_plus[i] == 0.0)
      logr = -std::numeric_limits<double>::infinity();
    else
      logr = std::log(marg.w_plus[i] / marg.w_minus[i]);
    phi[i] = h_edge(tm.beta * tm.coupling_to_parent[i], logr);
  }
  return phi;
}

double phi_edge_weight(const TreeModel& tm, int child_node) {
  return phi_all_edges(tm)[child_node];
}

double tree_influence(const TreeModel& tm, int node) {
  const std::vector<double> phi = phi_all_edges(tm);
  double prod = 1.0;
  for (int x = node; tm.tree->nodes[x].parent >= 0; x = tm.tree->nodes[x].parent) prod *= phi[x];
  return prod;
}

double saw_reduction_check(const GibbsModel& m, int w, const Pinning& pin, int cap) {
  const InfluenceResult exact = influence_matrix(m, pin, cap);
  int wi = -1;
  for (std::size_t i = 0; i < exact.free_vertices.size(); ++i)
    if (exact.free_vertices[i] == w) wi = static_cast<int>(i);
  if (wi < 0) throw parameter_error("saw_reduction_check: w must be unpinned");

  const WalkTree t = build_saw_tree(m.graph, w, pin);
  const TreeModel tm = make_tree_model(t, m.couplings, m.beta, m.field);
  const std::vector<double> phi = phi_all_edges(tm);

  // per-copy influence in one downward pass: product of phi from the root
  std::vector<double> prod(t.size(), 1.0);
  for (int i = 0; i < t.size(); ++i)
    if (t.nodes[i].parent >= 0) prod[i] = prod[t.nodes[i].parent] * phi[i];

  std::vector<double> tree_inf(m.n(), 0.0);
  for (int i = 0; i < t.size(); ++i) tree_inf[t.nodes[i].copy_of] += prod[i];

  double max_dev = 0.0;
  for (std::size_t ui = 0; ui < exact.free_vertices.size(); ++ui) {
    const int u = exact.free_vertices[ui];
    max_dev = std::max(max_dev, std::fabs(exact.influence(wi, ui) - tree_inf[u]));
  }
  return max_dev;
}

std::string to_dot(const WalkTree& tree) {
  std::ostringstream os;
  os << "digraph walktree {\n";
  for (int i = 0; i < tree.size(); ++i) {
    const WalkTreeNode& nd = tree.nodes[i];
    os << "  n" << i << " [label=\"" << nd.copy_of << ":"
       << (nd.pinning == 0 ? "free" : (nd.pinning > 0 ? "+1" : "-1")) << "\"];\n";
    if (nd.parent >= 0) os << "  n" << nd.parent << " -> n" << i << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace spinlab
