#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <string>
#include <vector>

#include "spinlab/rng.hpp"

namespace spinlab {

struct Edge {
  int u;  // u < v
  int v;
  int id;  // dense in [0, m)
};

// Undirected simple graph with stable edge ids. Adjacency lists are sorted;
// edges are stored once with u < v and id fixed at generation time so
// coupling assignment is reproducible.
struct SparseGraph {
  int n = 0;
  std::vector<std::vector<int>> adj;
  // Same order as adj: (neighbor, edge id) per vertex.
  std::vector<std::vector<std::pair<int, int>>> inc;
  std::vector<Edge> edges;

  int edge_count() const { return static_cast<int>(edges.size()); }
  int degree(int u) const { return static_cast<int>(adj[u].size()); }
  // Edge id for {u,v}, or -1 if not adjacent.
  int edge_id(int u, int v) const;
  bool adjacent(int u, int v) const { return edge_id(u, v) >= 0; }
};

SparseGraph make_graph(int n, std::vector<std::pair<int, int>> edge_list);

// Each unordered pair present independently with probability d/n
// (skip-sampling, so sparse instances cost O(n + m)). Requires 0 <= d <= n.
SparseGraph sample_gnp(int n, double d, Rng& rng);

// Galton-Watson tree with Poisson(d) offspring, truncated at `depth` levels.
// Root is vertex 0; parents precede children in the id order.
SparseGraph sample_gw_tree(double d, int depth, Rng& rng);

enum class CouplingDist { gaussian, rademacher, truncated, fixed };

struct CouplingSpec {
  CouplingDist dist = CouplingDist::gaussian;
  // truncated mode: standard Gaussian conditioned on |x| < epsilon*sqrt(d).
  double epsilon = 0.0;
  double d = 0.0;
  // fixed mode: every edge gets this value.
  double value = 1.0;

  static CouplingSpec gaussian() { return {CouplingDist::gaussian, 0, 0, 0}; }
  static CouplingSpec rademacher() { return {CouplingDist::rademacher, 0, 0, 0}; }
  static CouplingSpec truncated_gaussian(double epsilon, double d) {
    return {CouplingDist::truncated, epsilon, d, 0};
  }
  static CouplingSpec fixed(double value) { return {CouplingDist::fixed, 0, 0, value}; }
};

struct CouplingMap {
  std::vector<double> values;  // indexed by edge id
  CouplingSpec spec;

  double operator[](int edge_id) const { return values[edge_id]; }
};

// One i.i.d. draw per edge, in edge-id order.
CouplingMap sample_couplings(const SparseGraph& g, const CouplingSpec& spec, Rng& rng);

// J(u,w) = 1{u~w} * gamma_{uw}; symmetric, zero diagonal.
Eigen::SparseMatrix<double> interaction_matrix(const SparseGraph& g, const CouplingMap& c);

// Canonical JSON dump/load: {"n":..., "edges":[[u,v,J_e],...]} sorted by (u,v).
std::string graph_to_json(const SparseGraph& g, const CouplingMap& c);
std::pair<SparseGraph, CouplingMap> graph_from_json(const std::string& text);

}  // namespace spinlab
