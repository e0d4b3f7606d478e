#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spinlab/weights.hpp"

namespace spinlab {

enum class BlockKind { single, tree, unicyclic };

struct Block {
  BlockKind kind = BlockKind::single;
  std::vector<int> vertices;        // sorted
  std::vector<int> inner_boundary;  // vertices of B with a neighbour outside
  std::vector<int> outer_boundary;  // vertices outside B with a neighbour inside
  std::vector<int> cycle;           // present iff kind == unicyclic
};

// Holds either a Definition-4.2 style partition (block vertices on inner
// boundaries) or an (eps,k)-decomposition (block vertices on outer
// boundaries); `k` < 0 marks the former.
struct BlockPartition {
  double epsilon = 0.0;
  int k = -1;
  std::vector<Block> blocks;
};

// All asymptotic thresholds as explicit parameters, defaulting to the
// formulas rounded up; desk-scale experiments may override any of them.
struct BlockThresholds {
  int range_q = 0;          // condition (a) path length, default ceil(log n)
  int short_cycle_len = 0;  // default ceil(4 log n / (log d)^4)
  int cycle_pair_dist = 0;  // condition 1, default ceil(2 log n / (log d)^2)
  int cycle_buffer = 0;     // cycle-to-boundary buffer, default ceil((150/eps) log log n)
  int unicyclic_radius = 0; // growth cap for cycle blocks, default ceil(2 log n / (log d)^2)
  int tree_radius = 0;      // growth cap for tree blocks, default ceil(4 log n / (log d)^2)
  std::uint64_t path_budget = kDefaultPathBudget;
  std::uint64_t cycle_budget = 10'000'000;

  static BlockThresholds defaults(int n, double d, double epsilon);
};

enum class VerdictStatus { yes, no, undetermined };

struct BlockVertexVerdict {
  VerdictStatus status = VerdictStatus::yes;
  char failing_condition = 0;  // 'a' | 'b' | 'c' when status == no
  std::vector<int> witness;    // heavy path (a), edge endpoints (b), vertex (c)
};

// (eps,k)-block vertex test:
//  (a) every self-avoiding walk of length <= range_q from u has M(P) < 1.
//      A walk-relaxation dynamic program on the radius-range_q ball settles
//      the common case without enumeration; otherwise a branch-and-bound
//      DFS decides exactly (budget exhaustion -> undetermined),
//  (b) every edge within distance k of u has Gamma_e <= d^{-1/10},
//  (c) every vertex within distance k+1 of u has sum_w J_vw^2 <= (1+eps) d.
BlockVertexVerdict is_block_vertex(const WeightContext& ctx, int u, int k, int range_q,
                                   std::uint64_t budget = kDefaultPathBudget);

// All simple cycles of length <= max_len, each reported once with canonical
// orientation (minimum vertex first, smaller neighbour second).
std::vector<std::vector<int>> find_short_cycles(const SparseGraph& g, int max_len,
                                                std::uint64_t budget = 10'000'000);

struct DecompositionFail {
  int condition = 0;  // 1 | 2 | 3
  std::vector<int> witness;
  std::string detail;
};

using DecompositionResult = std::variant<BlockPartition, DecompositionFail>;

// Staged construction of an (eps,k)-decomposition: short-cycle detection,
// condition-1 check, block-vertex set, unicyclic blocks with buffer, tree
// blocks, singletons, structural audit. Fail carries the broken condition
// and a concrete witness.
DecompositionResult build_decomposition(const WeightContext& ctx, int k,
                                        const BlockThresholds& thresholds);

struct RefineError {
  std::string detail;
  std::vector<int> witness;
};

// Refines an (eps,0)-decomposition D and a (zeta,100)-decomposition E with
// zeta = eps(1-1e-4) into an eps-block partition: for each multi-vertex
// B in E, grow L from the D-blocks inside B via L <- L + (outer(L) \ Q_B)
// to a fixpoint, then K = L + outer(L); remaining vertices are singletons.
std::variant<BlockPartition, RefineError> refine_to_partition(const WeightContext& ctx,
                                                              const BlockPartition& dec_d,
                                                              const BlockPartition& dec_e,
                                                              int buffer = 90);

struct ClauseReport {
  std::string clause;
  bool pass = true;
  std::string detail;
  std::vector<int> witness;
};

struct ValidationReport {
  bool pass = true;
  std::vector<ClauseReport> clauses;
};

// Checks every clause of the eps-block-partition definition: blocks
// partition V; each multi-vertex block induces a tree plus at most one edge;
// inner boundaries are eps-block vertices with exactly one neighbour inside;
// cycles are short and buffered away from the outer boundary; singletons are
// eps-block vertices. Also audits that no edge joins two inner-boundary
// vertices (so J = J_S + J_H holds without double counting).
ValidationReport validate_partition(const WeightContext& ctx, const BlockPartition& bp,
                                    const BlockThresholds& thresholds);

// Same clauses against the (eps,k)-decomposition variant (block vertices on
// outer boundaries).
ValidationReport validate_decomposition(const WeightContext& ctx, const BlockPartition& dec,
                                        const BlockThresholds& thresholds);

struct PartitionMatrices {
  Eigen::SparseMatrix<double> j_s;
  Eigen::SparseMatrix<double> j_h;
  std::vector<int> s_vertices;        // S = (V \ H) + boundary
  std::vector<int> h_vertices;        // union of multi-vertex blocks
  std::vector<int> boundary_vertices; // union of inner boundaries
};

PartitionMatrices partition_matrices(const Eigen::SparseMatrix<double>& J,
                                     const BlockPartition& bp);

std::string partition_to_json(const BlockPartition& bp);

}  // namespace spinlab
