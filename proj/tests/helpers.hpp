#pragma once

// Shared oracles and generators for the unit and acceptance suites.

#include <Eigen/Dense>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "spinlab/glauber.hpp"

namespace spinlab::testing {

inline GibbsModel random_model(int n, double d, double beta, std::uint64_t seed,
                               bool with_field = false) {
  Rng rng(seed);
  SparseGraph g = sample_gnp(n, d, rng);
  CouplingMap c = sample_couplings(g, CouplingSpec::gaussian(), rng);
  std::vector<double> h(n, 0.0);
  if (with_field)
    for (auto& x : h) x = 0.4 * rng.normal();
  return make_model(std::move(g), std::move(c), beta, std::move(h));
}

inline GibbsModel random_tree_model(int n, double beta, std::uint64_t seed,
                                    bool with_field = false, double coupling_scale = 1.0) {
  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) edges.emplace_back(static_cast<int>(rng.uniform_below(v)), v);
  SparseGraph g = make_graph(n, edges);
  CouplingMap c = sample_couplings(g, CouplingSpec::gaussian(), rng);
  for (auto& x : c.values) x *= coupling_scale;
  std::vector<double> h(n, 0.0);
  if (with_field)
    for (auto& x : h) x = 0.3 * rng.normal();
  return make_model(std::move(g), std::move(c), beta, std::move(h));
}

inline Eigen::VectorXd stationary(const GibbsModel& m) {
  const auto dist = exact_distribution(m);
  return Eigen::Map<const Eigen::VectorXd>(dist.probs.data(), dist.probs.size());
}

// Worst-boundary relaxation time of the conditional single-site chain on a
// block, in the per-site (continuous time) normalisation.
inline double worst_boundary_block_relaxation(const GibbsModel& m, const std::vector<int>& block) {
  const int n = m.n();
  std::vector<int> outside;
  for (int v = 0; v < n; ++v)
    if (std::find(block.begin(), block.end(), v) == block.end()) outside.push_back(v);
  double worst = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << outside.size()); ++mask) {
    std::vector<int> index(n, -1);
    for (std::size_t i = 0; i < block.size(); ++i) index[block[i]] = static_cast<int>(i);
    std::vector<std::pair<int, int>> sub_edges;
    std::vector<double> sub_vals;
    std::vector<double> sub_field(block.size());
    for (std::size_t i = 0; i < block.size(); ++i) {
      const int v = block[i];
      sub_field[i] = m.field[v];
      for (auto [w, eid] : m.graph.inc[v]) {
        if (index[w] >= 0) {
          if (w > v) {
            sub_edges.emplace_back(static_cast<int>(i), index[w]);
            sub_vals.push_back(m.couplings.values[eid]);
          }
        } else {
          const auto pos = std::find(outside.begin(), outside.end(), w) - outside.begin();
          const int sign = ((mask >> pos) & 1) ? +1 : -1;
          sub_field[i] += m.beta * m.couplings.values[eid] * sign;
        }
      }
    }
    SparseGraph sub = make_graph(static_cast<int>(block.size()), sub_edges);
    CouplingMap csub;
    csub.values.resize(sub.edge_count());
    for (std::size_t i = 0; i < sub_edges.size(); ++i) {
      auto [a, b] = sub_edges[i];
      csub.values[sub.edge_id(a, b)] = sub_vals[i];
    }
    const GibbsModel cond = make_model(sub, csub, m.beta, sub_field);
    worst = std::max(worst, relaxation_time(transition_matrix(cond)) / block.size());
  }
  return worst;
}

// ---- exhaustive unicyclic family up to isomorphism -------------------------

// Rooted trees on k vertices as canonical parenthesis encodings.
inline const std::vector<std::string>& rooted_trees(int k) {
  static std::map<int, std::vector<std::string>> cache;
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  std::vector<std::string> out;
  if (k == 1) {
    out = {"()"};
  } else {
    // root + multiset of subtrees: enumerate non-increasing sequences of
    // (size, encoding) pairs covering k-1 vertices
    struct Item {
      int size;
      std::string enc;
    };
    std::vector<Item> chosen;
    std::set<std::string> seen;
    std::function<void(int, int, const std::string&)> rec =
        [&](int remaining, int max_size, const std::string& max_enc) {
          if (remaining == 0) {
            std::string enc = "(";
            for (const Item& item : chosen) enc += item.enc;
            enc += ")";
            if (seen.insert(enc).second) out.push_back(enc);
            return;
          }
          for (int s = std::min(remaining, max_size); s >= 1; --s) {
            for (const std::string& sub : rooted_trees(s)) {
              if (s == max_size && sub > max_enc) continue;  // keep non-increasing order
              chosen.push_back({s, sub});
              rec(remaining - s, s, sub);
              chosen.pop_back();
            }
          }
        };
    rec(k - 1, k - 1, std::string(2 * k, '~'));
    std::sort(out.begin(), out.end());
  }
  return cache.emplace(k, std::move(out)).first->second;
}

// Attach the encoded rooted tree under `root`, appending new vertices.
inline void attach_tree(const std::string& enc, int root, int& next_id,
                        std::vector<std::pair<int, int>>& edges) {
  // enc = "(" children ")": parse recursively
  std::vector<int> stack = {root};
  for (std::size_t i = 1; i + 1 < enc.size(); ++i) {
    if (enc[i] == '(') {
      const int child = next_id++;
      edges.emplace_back(std::min(stack.back(), child), std::max(stack.back(), child));
      stack.push_back(child);
    } else {
      stack.pop_back();
    }
  }
}

// All unicyclic graphs on exactly n vertices up to isomorphism: a cycle of
// length c with rooted trees hung on its vertices, deduplicated over the
// dihedral symmetries of the cycle.
inline std::vector<SparseGraph> unicyclic_family(int n) {
  std::vector<SparseGraph> graphs;
  for (int c = 3; c <= n; ++c) {
    // tuples of rooted-tree encodings with total size n (each >= 1)
    std::vector<std::pair<int, std::string>> slot(c);
    std::set<std::vector<std::string>> seen;
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
      if (pos == c) {
        if (remaining != 0) return;
        std::vector<std::string> tuple(c);
        for (int i = 0; i < c; ++i) tuple[i] = slot[i].second;
        // canonical representative over rotations and reflections
        std::vector<std::string> best = tuple;
        for (int r = 0; r < c; ++r) {
          std::vector<std::string> rot(c), ref(c);
          for (int i = 0; i < c; ++i) rot[i] = tuple[(i + r) % c];
          for (int i = 0; i < c; ++i) ref[i] = tuple[(r + c - i) % c];
          if (rot < best) best = rot;
          if (ref < best) best = ref;
        }
        if (!seen.insert(best).second) return;
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < c; ++i) edges.emplace_back(i, (i + 1) % c);
        int next_id = c;
        for (int i = 0; i < c; ++i) attach_tree(best[i], i, next_id, edges);
        graphs.push_back(make_graph(n, edges));
        return;
      }
      const int slots_left = c - pos - 1;
      for (int s = 1; s + slots_left <= remaining; ++s) {
        for (const std::string& enc : rooted_trees(s)) {
          slot[pos] = {s, enc};
          rec(pos + 1, remaining - s);
        }
      }
    };
    rec(0, n);
  }
  return graphs;
}

}  // namespace spinlab::testing
