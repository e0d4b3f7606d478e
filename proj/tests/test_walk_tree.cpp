#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "doctest.h"
#include "spinlab/errors.hpp"
#include "spinlab/walk_tree.hpp"

using namespace spinlab;

namespace {

CouplingMap couplings_for(const SparseGraph& g, std::uint64_t seed) {
  Rng rng(seed);
  return sample_couplings(g, CouplingSpec::gaussian(), rng);
}

// Independent brute-force enumerator of the walks that define T_SAW.
int count_saw_tree_walks(const SparseGraph& g, int w) {
  int count = 0;
  std::function<void(std::vector<int>&)> rec = [&](std::vector<int>& walk) {
    ++count;  // the walk itself is a node
    const int x = walk.back();
    for (int y : g.adj[x]) {
      auto pos = std::find(walk.begin(), walk.end(), y);
      if (pos == walk.end()) {
        walk.push_back(y);
        rec(walk);
        walk.pop_back();
      } else {
        const int j = static_cast<int>(pos - walk.begin());
        const int l_new = static_cast<int>(walk.size());  // index of the new last vertex
        if (j <= l_new - 3) ++count;                      // pinned closure leaf
      }
    }
  };
  std::vector<int> walk = {w};
  rec(walk);
  return count;
}

}  // namespace

TEST_CASE("saw tree of a tree is the tree itself") {
  SparseGraph g = make_graph(5, {{0, 1}, {1, 2}, {1, 3}, {3, 4}});
  const WalkTree t = build_saw_tree(g, 2);
  CHECK(t.size() == 5);
  for (const auto& nd : t.nodes) CHECK(nd.pinning == 0);
  // every vertex appears exactly once
  for (int v = 0; v < 5; ++v) CHECK(t.copies_of(v).size() == 1);
}

TEST_CASE("triangle pinning rule") {
  SparseGraph g = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  const WalkTree t = build_saw_tree(g, 0);
  // nodes: 0; 0-1; 0-2; 0-1-2; 0-2-1; 0-1-2-0; 0-2-1-0
  CHECK(t.size() == 7);
  const auto root_children = t.nodes[t.root].children;
  REQUIRE(root_children.size() == 2);
  CHECK(t.nodes[root_children[0]].copy_of == 1);
  CHECK(t.nodes[root_children[1]].copy_of == 2);

  int pin_plus = 0, pin_minus = 0;
  for (const auto& nd : t.nodes)
    if (nd.copy_of == 0 && nd.parent >= 0) {
      REQUIRE(nd.pinning != 0);
      // walk 0-1-2-0: v_{j+1} = 1, v_{l-1} = 2 -> not greater -> +1
      // walk 0-2-1-0: v_{j+1} = 2, v_{l-1} = 1 -> greater -> -1
      const int before = t.nodes[nd.parent].copy_of;
      if (before == 2) {
        CHECK(nd.pinning == +1);
        ++pin_plus;
      } else {
        CHECK(nd.pinning == -1);
        ++pin_minus;
      }
    }
  CHECK(pin_plus == 1);
  CHECK(pin_minus == 1);
}

TEST_CASE("c4 node count matches the walk enumerator") {
  SparseGraph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  for (int w = 0; w < 4; ++w) {
    const WalkTree t = build_saw_tree(g, w);
    CHECK(t.size() == count_saw_tree_walks(g, w));
  }
}

TEST_CASE("closure pinning appears exactly for j <= r-3") {
  Rng rng(5);
  const SparseGraph g = sample_gnp(7, 3.0, rng);
  for (int w = 0; w < g.n; ++w) {
    const WalkTree t = build_saw_tree(g, w);
    std::set<std::vector<int>> walks;
    for (int i = 0; i < t.size(); ++i) {
      std::vector<int> walk;
      for (int x = i; x >= 0; x = t.nodes[x].parent) walk.push_back(t.nodes[x].copy_of);
      std::reverse(walk.begin(), walk.end());
      CHECK(walks.insert(walk).second);  // walks are distinct
      // closure-pinned iff last vertex reappears earlier with j <= r-3
      const int r = static_cast<int>(walk.size()) - 1;
      int j = -1;
      for (int p = 0; p < r; ++p)
        if (walk[p] == walk[r]) j = p;
      const bool closing = j >= 0 && j <= r - 3;
      CHECK((t.nodes[i].pinning != 0) == closing);
    }
  }
}

TEST_CASE("ap tree of a path is the path") {
  SparseGraph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}});
  const WalkTree t = build_ap_tree(g, 1);
  CHECK(t.size() == 4);
  for (int v = 0; v < 4; ++v) CHECK(t.copies_of(v).size() == 1);
}

TEST_CASE("ap tree of triangle with pendant matches the hand construction") {
  // vertices: 3 pendant attached to 0; cycle {0,1,2}
  SparseGraph g = make_graph(4, {{0, 1}, {0, 2}, {1, 2}, {0, 3}});
  const WalkTree t = build_ap_tree(g, 3);
  // T_base = T_SAW(G, 3): walks 3; 3-0; 3-0-1; 3-0-2; 3-0-1-2; 3-0-2-1;
  //   3-0-1-2-0; 3-0-2-1-0  -> 8 nodes
  // x1 = 0, x2 = 2 (ordering), xl = 1, z = 3.
  // G_1 = delete {0,3},{0,1}: component of cycle = {0,1,2} path 0-2-1 -> T_high = 3 nodes
  // G_2 = delete {0,3},{0,2}: path 0-1-2 -> T_low = 3 nodes
  // graft replaces the two roots: total 8 + 2 + 2 = 12
  CHECK(t.size() == 12);
  int high = 0, low = 0, base = 0;
  for (const auto& nd : t.nodes) {
    if (nd.section == TreeSection::high) ++high;
    if (nd.section == TreeSection::low) ++low;
    if (nd.section == TreeSection::base) ++base;
  }
  CHECK(base == 8);
  CHECK(high == 2);
  CHECK(low == 2);
  // every vertex has at most 4 copies
  for (int v = 0; v < 4; ++v) CHECK(t.copies_of(v).size() <= 4);
}

TEST_CASE("ap tree rejects non-unicyclic input") {
  SparseGraph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}});  // two cycles
  CHECK_THROWS_AS(build_ap_tree(g, 0), parameter_error);
}

TEST_CASE("all paths property on trees and small unicyclic graphs") {
  SparseGraph tree = make_graph(5, {{0, 1}, {1, 2}, {1, 3}, {3, 4}});
  CHECK(all_paths_property_check(tree, 0));

  SparseGraph tri_pendant = make_graph(4, {{0, 1}, {0, 2}, {1, 2}, {0, 3}});
  for (int w = 0; w < 4; ++w) CHECK(all_paths_property_check(tri_pendant, w));

  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    // random unicyclic graph: random tree + one closing edge
    const int n = 5 + static_cast<int>(rng.uniform_below(3));
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v) edges.emplace_back(static_cast<int>(rng.uniform_below(v)), v);
    // close a random non-edge
    for (int attempt = 0; attempt < 50; ++attempt) {
      const int a = static_cast<int>(rng.uniform_below(n));
      const int b = static_cast<int>(rng.uniform_below(n));
      if (a == b) continue;
      const auto p = std::minmax(a, b);
      if (std::find(edges.begin(), edges.end(), std::make_pair(p.first, p.second)) != edges.end())
        continue;
      edges.emplace_back(p.first, p.second);
      break;
    }
    SparseGraph g = make_graph(n, edges);
    if (g.edge_count() != n) continue;  // closing edge not found
    for (int w = 0; w < n; ++w) CHECK(all_paths_property_check(g, w));
  }
}

TEST_CASE("ratio of marginals") {
  SparseGraph one = make_graph(1, {});
  CouplingMap none;
  const WalkTree t1 = build_saw_tree(one, 0);
  const TreeModel tm1 = make_tree_model(t1, none, 1.0, {0.0});
  CHECK(ratio_of_marginals(tm1, 0) == doctest::Approx(1.0).epsilon(1e-14));

  Pinning pin;
  pin.vertices = {0};
  pin.spins = {+1};
  const WalkTree t1p = build_saw_tree(one, 0, pin);
  const TreeModel tm1p = make_tree_model(t1p, none, 1.0, {0.0});
  CHECK(std::isinf(ratio_of_marginals(tm1p, 0)));

  // depth-2 random tree vs enumeration, tol 1e-10
  Rng rng(21);
  SparseGraph g = make_graph(6, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}});
  CouplingMap c = couplings_for(g, 22);
  std::vector<double> h(6);
  for (auto& x : h) x = 0.3 * rng.normal();
  const GibbsModel m = make_model(g, c, 0.7, h);
  const auto marg = exact_marginals_plus(m);
  const WalkTree t = build_saw_tree(g, 0);
  const TreeModel tm = make_tree_model(t, c, 0.7, h);
  const double r_tree = ratio_of_marginals(tm, t.root);
  CHECK(r_tree == doctest::Approx(marg[0] / (1.0 - marg[0])).epsilon(1e-10));
}

TEST_CASE("phi edge weight") {
  // J = 0 -> 0
  CHECK(h_edge(0.0, 0.3) == 0.0);
  // R_z = 1: |phi| = tanh(beta J)
  CHECK(h_edge(0.3, 0.0) == doctest::Approx(std::tanh(0.3)).epsilon(1e-12));
  CHECK(h_edge(-0.3, 0.0) == doctest::Approx(-std::tanh(0.3)).epsilon(1e-12));
  // h_e matches its raw formula on a grid (independent evaluation)
  for (double b : {-1.2, -0.4, 0.2, 0.9}) {
    for (double x : {-3.0, -0.5, 0.0, 0.7, 2.5}) {
      const double raw = -(1.0 - std::exp(4.0 * b)) * std::exp(x) /
                         ((std::exp(x + 2.0 * b) + 1.0) * (std::exp(x) + std::exp(2.0 * b)));
      CHECK(h_edge(b, x) == doctest::Approx(raw).epsilon(1e-12));
      CHECK(std::fabs(h_edge(b, x)) <= std::tanh(std::fabs(b)) + 1e-15);
    }
  }
  // saturation: no overflow at extreme arguments
  CHECK(std::fabs(h_edge(300.0, 0.0)) <= 1.0);
  CHECK(h_edge(0.5, 1e4) == 0.0);

  // pinned child -> 0
  SparseGraph g = make_graph(2, {{0, 1}});
  CouplingMap c;
  c.values = {0.8};
  Pinning pin;
  pin.vertices = {1};
  pin.spins = {-1};
  const WalkTree t = build_saw_tree(g, 0, pin);
  const TreeModel tm = make_tree_model(t, c, 1.0, {0.0, 0.0});
  const int child = t.nodes[t.root].children[0];
  CHECK(phi_edge_weight(tm, child) == 0.0);
}

TEST_CASE("tree influence equals enumeration influence") {
  // root -> 1
  SparseGraph one = make_graph(1, {});
  CouplingMap none;
  const WalkTree t1 = build_saw_tree(one, 0);
  const TreeModel tm1 = make_tree_model(t1, none, 1.0, {0.0});
  CHECK(tree_influence(tm1, 0) == 1.0);

  // single edge at h = 0: influence = tanh(beta J)
  SparseGraph e = make_graph(2, {{0, 1}});
  CouplingMap ce;
  ce.values = {0.6};
  const WalkTree te = build_saw_tree(e, 0);
  const TreeModel tme = make_tree_model(te, ce, 0.9, {0.0, 0.0});
  CHECK(tree_influence(tme, te.copies_of(1)[0]) ==
        doctest::Approx(std::tanh(0.9 * 0.6)).epsilon(1e-12));

  // random trees of depth <= 3 vs the enumeration influence matrix
  Rng rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 5 + static_cast<int>(rng.uniform_below(5));
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v) edges.emplace_back(static_cast<int>(rng.uniform_below(v)), v);
    SparseGraph g = make_graph(n, edges);
    CouplingMap c = couplings_for(g, 500 + rep);
    std::vector<double> h(n);
    for (auto& x : h) x = 0.3 * rng.normal();
    const GibbsModel m = make_model(g, c, 0.5, h);
    const auto inf = influence_matrix(m, {});
    const WalkTree t = build_saw_tree(g, 0);
    const TreeModel tm = make_tree_model(t, c, 0.5, h);
    for (int u = 0; u < n; ++u) {
      const auto copies = t.copies_of(u);
      REQUIRE(copies.size() == 1);  // tree input
      CHECK(std::fabs(tree_influence(tm, copies[0]) - inf.influence(0, u)) <= 1e-10);
    }
  }
}

TEST_CASE("phi product telescopes below the influence product") {
  Rng rng(41);
  int checked = 0;
  for (int rep = 0; rep < 60 && checked < 1000; ++rep) {
    const int n = 6 + static_cast<int>(rng.uniform_below(3));
    const SparseGraph g = sample_gnp(n, 2.5, rng);
    CouplingMap c = sample_couplings(g, CouplingSpec::gaussian(), rng);
    const GibbsModel m = make_model(g, c, 0.4);
    WalkTree t;
    try {
      t = build_saw_tree(g, 0);
    } catch (const capacity_error&) {
      continue;
    }
    const TreeModel tm = make_tree_model(t, c, 0.4, m.field);
    const auto phi = phi_all_edges(tm);
    for (int i = 0; i < t.size() && checked < 1000; ++i) {
      if (t.nodes[i].parent < 0) continue;
      double prod_phi = 1.0, prod_gamma = 1.0;
      for (int x = i; t.nodes[x].parent >= 0; x = t.nodes[x].parent) {
        prod_phi *= phi[x];
        prod_gamma *= std::fabs(std::tanh(0.4 * tm.coupling_to_parent[x]));
      }
      CHECK(std::fabs(prod_phi) <= prod_gamma + 1e-12);
      ++checked;
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("saw reduction on trees, triangle, and chorded cycle") {
  // tree: constructions coincide
  Rng rng(51);
  SparseGraph tree = make_graph(6, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}});
  CouplingMap ct = couplings_for(tree, 52);
  CHECK(saw_reduction_check(make_model(tree, ct, 0.8), 0) <= 1e-12);

  // triangle, h = 0, random couplings
  SparseGraph tri = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  CouplingMap ctri = couplings_for(tri, 53);
  CHECK(saw_reduction_check(make_model(tri, ctri, 0.7), 0) <= 1e-9);

  // C5 with a chord
  SparseGraph c5 = make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {1, 3}});
  CouplingMap cc5 = couplings_for(c5, 54);
  CHECK(saw_reduction_check(make_model(c5, cc5, 0.5), 2) <= 1e-9);

  // with pinning
  Pinning pin;
  pin.vertices = {4};
  pin.spins = {+1};
  CHECK(saw_reduction_check(make_model(c5, cc5, 0.5), 0, pin) <= 1e-9);
}

TEST_CASE("dot export mentions pins") {
  SparseGraph tri = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
  const WalkTree t = build_saw_tree(tri, 0);
  const std::string dot = to_dot(t);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("+1") != std::string::npos);
  CHECK(dot.find("-1") != std::string::npos);
}
