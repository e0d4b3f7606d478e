#include "spinlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "json.hpp"
#include "spinlab/errors.hpp"

namespace spinlab {

int SparseGraph::edge_id(int u, int v) const {
  if (u > v) std::swap(u, v);
  // edges are sorted by (u, v) at construction
  auto it = std::lower_bound(edges.begin(), edges.end(), std::make_pair(u, v),
                             [](const Edge& e, const std::pair<int, int>& k) {
                               return std::make_pair(e.u, e.v) < k;
                             });
  if (it != edges.end() && it->u == u && it->v == v) return it->id;
  return -1;
}

SparseGraph make_graph(int n, std::vector<std::pair<int, int>> edge_list) {
  if (n < 0) throw parameter_error("make_graph: n must be >= 0");
  SparseGraph g;
  g.n = n;
  g.adj.resize(n);
  for (auto& [u, v] : edge_list) {
    if (u == v) throw parameter_error("make_graph: self-loop");
    if (u < 0 || v < 0 || u >= n || v >= n) throw parameter_error("make_graph: vertex out of range");
    if (u > v) std::swap(u, v);
  }
  std::sort(edge_list.begin(), edge_list.end());
  edge_list.erase(std::unique(edge_list.begin(), edge_list.end()), edge_list.end());
  g.inc.resize(n);
  int id = 0;
  for (auto& [u, v] : edge_list) {
    g.edges.push_back({u, v, id});
    g.inc[u].emplace_back(v, id);
    g.inc[v].emplace_back(u, id);
    ++id;
  }
  for (auto& a : g.inc) std::sort(a.begin(), a.end());
  for (int u = 0; u < n; ++u) {
    g.adj[u].reserve(g.inc[u].size());
    for (auto& [v, eid] : g.inc[u]) g.adj[u].push_back(v);
  }
  return g;
}

SparseGraph sample_gnp(int n, double d, Rng& rng) {
  if (n < 1) throw parameter_error("sample_gnp: n must be >= 1");
  if (d < 0 || d > n) throw parameter_error("sample_gnp: d must be in [0, n]");
  const double p = d / n;
  std::vector<std::pair<int, int>> edges;
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (p >= 1.0) {
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  } else if (p > 0.0) {
    // Geometric skips through the lexicographic pair order.
    const double log1mp = std::log1p(-p);
    double idx = -1.0;
    for (;;) {
      double u01;
      do {
        u01 = rng.uniform();
      } while (u01 == 0.0);
      idx += 1.0 + std::floor(std::log(u01) / log1mp);
      if (idx >= static_cast<double>(total)) break;
      const std::uint64_t k = static_cast<std::uint64_t>(idx);
      // Pair index -> (u, v) with u rows of decreasing length n-1-u.
      std::uint64_t rem = k;
      int u = 0;
      while (rem >= static_cast<std::uint64_t>(n - 1 - u)) {
        rem -= static_cast<std::uint64_t>(n - 1 - u);
        ++u;
      }
      edges.emplace_back(u, u + 1 + static_cast<int>(rem));
    }
  }
  return make_graph(n, std::move(edges));
}

SparseGraph sample_gw_tree(double d, int depth, Rng& rng) {
  if (d < 0) throw parameter_error("sample_gw_tree: d must be >= 0");
  if (depth < 0) throw parameter_error("sample_gw_tree: depth must be >= 0");
  std::vector<std::pair<int, int>> edges;
  std::vector<int> level = {0};
  int next_id = 1;
  for (int h = 0; h < depth && !level.empty(); ++h) {
    std::vector<int> next_level;
    for (int parent : level) {
      const int k = rng.poisson(d);
      for (int c = 0; c < k; ++c) {
        edges.emplace_back(parent, next_id);
        next_level.push_back(next_id);
        ++next_id;
      }
    }
    level = std::move(next_level);
  }
  return make_graph(next_id, std::move(edges));
}

CouplingMap sample_couplings(const SparseGraph& g, const CouplingSpec& spec, Rng& rng) {
  CouplingMap c;
  c.spec = spec;
  c.values.resize(g.edges.size());
  switch (spec.dist) {
    case CouplingDist::gaussian:
      for (auto& v : c.values) v = rng.normal();
      break;
    case CouplingDist::rademacher:
      for (auto& v : c.values) v = rng.bernoulli(0.5) ? 1.0 : -1.0;
      break;
    case CouplingDist::truncated: {
      const double bound = spec.epsilon * std::sqrt(spec.d);
      if (!(bound > 0)) throw parameter_error("sample_couplings: truncated mode needs epsilon*sqrt(d) > 0");
      for (auto& v : c.values) v = rng.truncated_normal(bound);
      break;
    }
    case CouplingDist::fixed:
      for (auto& v : c.values) v = spec.value;
      break;
    default:
      throw parameter_error("sample_couplings: unknown distribution tag");
  }
  return c;
}

Eigen::SparseMatrix<double> interaction_matrix(const SparseGraph& g, const CouplingMap& c) {
  if (c.values.size() != g.edges.size())
    throw parameter_error("interaction_matrix: coupling map does not match edge count");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * g.edges.size());
  for (const Edge& e : g.edges) {
    trip.emplace_back(e.u, e.v, c.values[e.id]);
    trip.emplace_back(e.v, e.u, c.values[e.id]);
  }
  Eigen::SparseMatrix<double> J(g.n, g.n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

std::string graph_to_json(const SparseGraph& g, const CouplingMap& c) {
  nlohmann::json out;
  out["n"] = g.n;
  auto edges = nlohmann::json::array();
  for (const Edge& e : g.edges) {  // already sorted by (u, v)
    edges.push_back({e.u, e.v, c.values[e.id]});
  }
  out["edges"] = std::move(edges);
  return out.dump();
}

std::pair<SparseGraph, CouplingMap> graph_from_json(const std::string& text) {
  const auto in = nlohmann::json::parse(text);
  const int n = in.at("n").get<int>();
  std::vector<std::tuple<int, int, double>> items;
  for (const auto& e : in.at("edges")) {
    int u = e.at(0).get<int>();
    int v = e.at(1).get<int>();
    if (u > v) std::swap(u, v);
    items.emplace_back(u, v, e.at(2).get<double>());
  }
  std::sort(items.begin(), items.end());
  std::vector<std::pair<int, int>> edge_list;
  edge_list.reserve(items.size());
  for (const auto& [u, v, j] : items) edge_list.emplace_back(u, v);
  SparseGraph g = make_graph(n, edge_list);
  if (g.edges.size() != items.size()) throw parameter_error("graph_from_json: duplicate edges");
  CouplingMap c;
  c.spec = CouplingSpec::fixed(0);
  c.values.resize(items.size());
  // items and g.edges share the same (u,v)-sorted order, so ids line up.
  for (std::size_t i = 0; i < items.size(); ++i) c.values[g.edges[i].id] = std::get<2>(items[i]);
  return {std::move(g), std::move(c)};
}

}  // namespace spinlab
