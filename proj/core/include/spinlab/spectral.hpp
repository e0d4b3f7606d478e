#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <string>
#include <vector>

#include "spinlab/block_partition.hpp"
#include "spinlab/gibbs.hpp"

namespace spinlab {

// Directed-edge operator: B((i,j),(k,l)) = W_kl iff j = k and i != l.
// Only directed arcs with W != 0 are indexed (zero rows/columns of the full
// n(n-1)-dimensional operator carry no spectrum).
struct NonBacktracking {
  std::vector<std::pair<int, int>> arcs;
  Eigen::SparseMatrix<double> matrix;
};

NonBacktracking nonbacktracking_matrix(const Eigen::SparseMatrix<double>& W);

constexpr int kDenseSpectralDim = 2000;

// Max |eigenvalue|. Dense solver below kDenseSpectralDim; power iteration
// with a growth-rate estimate above (relative tolerance, iteration cap ->
// numeric_error carrying the residual).
double spectral_radius(const Eigen::MatrixXd& M, double rel_tol = 1e-8);
double spectral_radius(const Eigen::SparseMatrix<double>& M, double rel_tol = 1e-8,
                       int max_iter = 100000);

// Largest singular-value style norm for symmetric matrices: max |eig|.
double sym_operator_norm(const Eigen::MatrixXd& M);

// Bethe-Hessian pieces: A_t(i,j) = tQ_ij / (1-(tQ_ij)^2),
// D_t = diag_i sum_k (tQ_ik)^2 / (1-(tQ_ik)^2).
Eigen::MatrixXd bethe_a(const Eigen::MatrixXd& Q, double t);
Eigen::MatrixXd bethe_d(const Eigen::MatrixXd& Q, double t);

// Relative residual of det(I - t B_Q) = det(I + D_t - A_t) * prod_{i<=j}
// (1 - (tQ_ij)^2); determinants in log-magnitude + sign form. Requires
// |t Q_ij| != 1 for all i, j.
double ihara_bass_residual(const Eigen::MatrixXd& Q, double t);

double bethe_hessian_mineig(const Eigen::MatrixXd& Q, double t);

// lambda / (1-delta) + (1-delta)/(lambda-(1-delta)L) * ||Q o Q||_inf with
// lambda = max(rho(B_Q), L); an upper bound on ||Q||_2 whenever
// max|Q_ij| <= L and the denominator is positive.
double boundw_bound(const Eigen::MatrixXd& Q, double delta, double L);

enum class LocalisationForm {
  theorem,  // zeta/L and zeta/(sqrt(d) L) diagonals, L = log n / sqrt(d)
  sde       // zeta sqrt(d)/log n and zeta/log n diagonals (same values)
};

struct LocalisationMatrices {
  Eigen::MatrixXd jbar;  // shifted interaction
  Eigen::MatrixXd c_sq;  // time-independent C_t^2
  double js_norm = 0.0;
  double c_sq_min_eig = 0.0;

  Eigen::MatrixXd j_at(double t) const { return jbar - t * c_sq; }
};

// Jbar = J_S + J_H + (1+eps/100)||J_S|| I_S + (zeta/L) I_{H minus boundary};
// C^2  = J_S + (1+eps/200)||J_S|| I_S + (zeta/(sqrt(d) L)) I_{H minus boundary}.
// Throws when C^2 has an eigenvalue below -1e-9 (numerically non-PSD).
LocalisationMatrices localisation_matrices(const PartitionMatrices& pm, double eps, double zeta,
                                           int n, double d,
                                           LocalisationForm form = LocalisationForm::theorem);

// min-eig(beta M1 - beta^2 M1 Cov(M2, beta, M1 z + h) M1) - gamma_lower,
// Cov computed by enumeration over the model with interaction M2.
double localisation_psd_margin(const Eigen::MatrixXd& m1, const Eigen::SparseMatrix<double>& m2,
                               double beta, const Eigen::VectorXd& h, const Eigen::VectorXd& z,
                               double gamma_lower, int cap = kDefaultEnumerationCap);

// min-eig(L - L K L) - eta1 (1 - eta2); nonnegative whenever ||K|| <= alpha
// and eta1 I <= L <= (eta2/alpha) I.
double lkl_sandwich_margin(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L, double eta1,
                       double eta2);

// Certified upper bound on ||Y||_2 for the path-product matrix of a walk
// tree: chi(root)=1, chi(u) = (1+delta) Gamma_{parent,u} chi(parent),
// bound = sum_l ||D^{-1} Y_l D||_inf. Zero-influence edges split the tree;
// the bound is the max over the resulting components.
double chi_weighted_block_norm(const WalkTree& tree, const std::vector<double>& edge_gamma,
                               double delta);

// Dense ||Y||_2 oracle for tests/comparison.
Eigen::MatrixXd path_product_matrix(const WalkTree& tree, const std::vector<double>& edge_gamma);

// ||K||_2 for the vertex-by-tree-node copy indicator matrix.
double copies_matrix_norm(const WalkTree& tree);

struct JsNormRecord {
  int replica = 0;
  std::string status;   // "ok" or the failure description
  double js_norm = 0.0; // valid when status == "ok"
};

// Per-replica ||J_S||_2 of the refined partition pipeline on G(n, d/n) with
// Gaussian couplings at inverse temperature beta.
std::vector<JsNormRecord> js_norm_experiment(int n, double d, double eps, double beta,
                                             int replicas, std::uint64_t seed,
                                             const BlockThresholds* override_thresholds = nullptr,
                                             int k_fine = 100);

}  // namespace spinlab
