#include "spinlab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

#include "spinlab/errors.hpp"
#include "spinlab/parallel.hpp"
#include "spinlab/rng.hpp"

namespace spinlab {

namespace {

void require_symmetric(const Eigen::MatrixXd& M, const char* who) {
  if (M.rows() != M.cols()) throw parameter_error(std::string(who) + ": matrix not square");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw parameter_error(std::string(who) + ": matrix not symmetric");
}

struct LogDet {
  double log_abs;
  int sign;  // -1, 0, +1
};

LogDet log_det(const Eigen::MatrixXd& M) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const auto& diag = lu.matrixLU().diagonal();
  LogDet out{0.0, 1};
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    const double d = diag(i);
    if (d == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
    out.log_abs += std::log(std::fabs(d));
    if (d < 0) out.sign = -out.sign;
  }
  // permutation parity
  const auto& perm = lu.permutationP().indices();
  std::vector<bool> seen(perm.size(), false);
  for (Eigen::Index i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (Eigen::Index j = i; !seen[j]; j = perm(j)) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) out.sign = -out.sign;
  }
  return out;
}

}  // namespace

NonBacktracking nonbacktracking_matrix(const Eigen::SparseMatrix<double>& W) {
  const int n = static_cast<int>(W.rows());
  if (W.cols() != n) throw parameter_error("nonbacktracking_matrix: W not square");
  Eigen::MatrixXd dense(W);
  require_symmetric(dense, "nonbacktracking_matrix");

  NonBacktracking nb;
  std::vector<std::vector<int>> arcs_from(n);  // arc ids grouped by source i
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (dense(i, j) != 0.0) {
        arcs_from[i].push_back(static_cast<int>(nb.arcs.size()));
        nb.arcs.emplace_back(i, j);
      }
  const int m = static_cast<int>(nb.arcs.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (int a = 0; a < m; ++a) {
    const auto [i, j] = nb.arcs[a];
    for (int b : arcs_from[j]) {
      const auto [k, l] = nb.arcs[b];
      if (l == i) continue;  // backtracking
      trip.emplace_back(a, b, dense(k, l));
    }
  }
  nb.matrix.resize(m, m);
  nb.matrix.setFromTriplets(trip.begin(), trip.end());
  return nb;
}

double spectral_radius(const Eigen::MatrixXd& M, double rel_tol) {
  if (M.rows() != M.cols()) throw parameter_error("spectral_radius: matrix not square");
  if (M.rows() == 0) return 0.0;
  if (M.rows() < kDenseSpectralDim) {
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * scale) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
      return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::SparseMatrix<double> sparse = M.sparseView();
  return spectral_radius(sparse, rel_tol, 100000);
}

double spectral_radius(const Eigen::SparseMatrix<double>& M, double rel_tol, int max_iter) {
  const Eigen::Index dim = M.rows();
  if (M.cols() != dim) throw parameter_error("spectral_radius: matrix not square");
  if (dim == 0) return 0.0;
  if (dim < kDenseSpectralDim) return spectral_radius(Eigen::MatrixXd(M), rel_tol);

  // Power iteration tracking the norm growth rate; a window average rides
  // out the oscillation of complex-pair dominated spectra.
  Rng rng(0x5eed5eedULL, 7);
  Eigen::VectorXd x(dim);
  for (Eigen::Index i = 0; i < dim; ++i) x(i) = rng.normal();
  x.normalize();
  double estimate = 0.0;
  const int window = 16;
  std::vector<double> growth;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd y = M * x;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    growth.push_back(norm);
    y /= norm;
    x.swap(y);
    if (static_cast<int>(growth.size()) >= 2 * window && it % window == 0) {
      double a = 1.0, b = 1.0;
      const std::size_t sz = growth.size();
      for (int w = 0; w < window; ++w) {
        a *= growth[sz - 1 - w];
        b *= growth[sz - 1 - window - w];
      }
      const double est_new = std::pow(a, 1.0 / window);
      const double est_old = std::pow(b, 1.0 / window);
      estimate = est_new;
      if (std::fabs(est_new - est_old) <= rel_tol * std::max(1e-300, std::fabs(est_new)))
        return estimate;
    }
  }
  throw numeric_error("spectral_radius: power iteration did not converge, last estimate " +
                      std::to_string(estimate));
}

double sym_operator_norm(const Eigen::MatrixXd& M) {
  require_symmetric(M, "sym_operator_norm");
  if (M.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd bethe_a(const Eigen::MatrixXd& Q, double t) {
  require_symmetric(Q, "bethe_a");
  const Eigen::Index n = Q.rows();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double tq = t * Q(i, j);
      if (tq != 0.0) A(i, j) = tq / (1.0 - tq * tq);
    }
  return A;
}

Eigen::MatrixXd bethe_d(const Eigen::MatrixXd& Q, double t) {
  require_symmetric(Q, "bethe_d");
  const Eigen::Index n = Q.rows();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const double tq = t * Q(i, k);
      s += tq * tq / (1.0 - tq * tq);
    }
    D(i, i) = s;
  }
  return D;
}

double ihara_bass_residual(const Eigen::MatrixXd& Q, double t) {
  require_symmetric(Q, "ihara_bass_residual");
  const Eigen::Index n = Q.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::fabs(std::fabs(t * Q(i, j)) - 1.0) < 1e-14)
        throw parameter_error("ihara_bass_residual: |t Q_ij| = 1 (singular factor)");

  const NonBacktracking nb = nonbacktracking_matrix(Q.sparseView());
  const Eigen::Index m = nb.matrix.rows();
  const Eigen::MatrixXd lhs_mat = Eigen::MatrixXd::Identity(m, m) - t * Eigen::MatrixXd(nb.matrix);
  const LogDet lhs = log_det(lhs_mat);

  const Eigen::MatrixXd bh = Eigen::MatrixXd::Identity(n, n) + bethe_d(Q, t) - bethe_a(Q, t);
  LogDet rhs = log_det(bh);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double tq = t * Q(i, j);
      const double f = 1.0 - tq * tq;
      if (f == 0.0) return std::numeric_limits<double>::infinity();
      rhs.log_abs += std::log(std::fabs(f));
      if (f < 0) rhs.sign = -rhs.sign;
    }

  // relative difference of two signed log-magnitude numbers
  if (lhs.sign == 0 && rhs.sign == 0) return 0.0;
  const double ref = std::max(lhs.log_abs, rhs.log_abs);
  const double a = lhs.sign * std::exp(lhs.log_abs - ref);
  const double b = rhs.sign * std::exp(rhs.log_abs - ref);
  return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
}

double bethe_hessian_mineig(const Eigen::MatrixXd& Q, double t) {
  require_symmetric(Q, "bethe_hessian_mineig");
  const Eigen::Index n = Q.rows();
  const Eigen::MatrixXd bh = Eigen::MatrixXd::Identity(n, n) + bethe_d(Q, t) - bethe_a(Q, t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(bh, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double boundw_bound(const Eigen::MatrixXd& Q, double delta, double L) {
  require_symmetric(Q, "boundw_bound");
  if (!(delta > 0 && delta < 1)) throw parameter_error("boundw_bound: delta must be in (0,1)");
  if (Q.size() > 0 && Q.cwiseAbs().maxCoeff() > L * (1 + 1e-12))
    throw parameter_error("boundw_bound: max|Q_ij| exceeds L");
  const NonBacktracking nb = nonbacktracking_matrix(Q.sparseView());
  const double rho_b = nb.matrix.rows() == 0 ? 0.0 : spectral_radius(Eigen::MatrixXd(nb.matrix));
  const double lambda = std::max(rho_b, L);
  const double denom = lambda - (1.0 - delta) * L;
  if (!(denom > 0)) throw parameter_error("boundw_bound: lambda - (1-delta) L <= 0, bound inapplicable");
  const double hadamard_inf = Q.size() == 0 ? 0.0 : Q.cwiseProduct(Q).cwiseAbs().rowwise().sum().maxCoeff();
  return lambda / (1.0 - delta) + (1.0 - delta) / denom * hadamard_inf;
}

LocalisationMatrices localisation_matrices(const PartitionMatrices& pm, double eps, double zeta,
                                           int n, double d, LocalisationForm form) {
  if (!(n >= 2) || !(d > 1)) throw parameter_error("localisation_matrices: need n >= 2, d > 1");
  const Eigen::Index dim = pm.j_s.rows();
  const Eigen::MatrixXd js(pm.j_s);
  const Eigen::MatrixXd jh(pm.j_h);
  const double js_norm = js.size() == 0 ? 0.0 : sym_operator_norm(js);

  const double log_n = std::log(static_cast<double>(n));
  const double big_l = log_n / std::sqrt(d);
  // The two advertised parameterisations coincide: zeta/L = zeta sqrt(d)/log n
  // and zeta/(sqrt(d) L) = zeta/log n.
  double diag_jbar, diag_csq;
  if (form == LocalisationForm::theorem) {
    diag_jbar = zeta / big_l;
    diag_csq = zeta / (std::sqrt(d) * big_l);
  } else {
    diag_jbar = zeta * std::sqrt(d) / log_n;
    diag_csq = zeta / log_n;
  }

  Eigen::VectorXd is = Eigen::VectorXd::Zero(dim);   // indicator of S
  Eigen::VectorXd ihb = Eigen::VectorXd::Zero(dim);  // indicator of H minus boundary
  for (int v : pm.s_vertices) is(v) = 1.0;
  std::vector<bool> boundary(dim, false);
  for (int v : pm.boundary_vertices) boundary[v] = true;
  for (int v : pm.h_vertices)
    if (!boundary[v]) ihb(v) = 1.0;

  const Eigen::MatrixXd diag_s = is.asDiagonal();
  const Eigen::MatrixXd diag_hb = ihb.asDiagonal();
  LocalisationMatrices out;
  out.js_norm = js_norm;
  out.jbar = js + jh + (1.0 + eps / 100.0) * js_norm * diag_s + diag_jbar * diag_hb;
  out.c_sq = js + (1.0 + eps / 200.0) * js_norm * diag_s + diag_csq * diag_hb;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.c_sq, Eigen::EigenvaluesOnly);
  out.c_sq_min_eig = dim == 0 ? 0.0 : es.eigenvalues().minCoeff();
  if (out.c_sq_min_eig < -1e-9)
    throw numeric_error("localisation_matrices: C_t^2 is not PSD, min eig " +
                        std::to_string(out.c_sq_min_eig));
  return out;
}

namespace {

GibbsModel model_from_matrix(const Eigen::SparseMatrix<double>& M, double beta,
                             const Eigen::VectorXd& h) {
  const int n = static_cast<int>(M.rows());
  std::vector<std::pair<int, int>> edge_list;
  for (int col = 0; col < M.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, col); it; ++it)
      if (it.row() < it.col() && it.value() != 0.0)
        edge_list.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()));
  SparseGraph g = make_graph(n, std::move(edge_list));
  CouplingMap c;
  c.spec = CouplingSpec::fixed(0);
  c.values.resize(g.edges.size());
  for (const Edge& e : g.edges) c.values[e.id] = M.coeff(e.u, e.v);
  std::vector<double> field(h.data(), h.data() + h.size());
  return make_model(std::move(g), std::move(c), beta, std::move(field));
}

}  // namespace

double localisation_psd_margin(const Eigen::MatrixXd& m1, const Eigen::SparseMatrix<double>& m2,
                               double beta, const Eigen::VectorXd& h, const Eigen::VectorXd& z,
                               double gamma_lower, int cap) {
  require_symmetric(m1, "localisation_psd_margin");
  const Eigen::VectorXd field = m1 * z + h;
  const GibbsModel model = model_from_matrix(m2, beta, field);
  const Eigen::MatrixXd cov = covariance(model, cap);
  const Eigen::MatrixXd expr = beta * m1 - beta * beta * m1 * cov * m1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (expr + expr.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() - gamma_lower;
}

double lkl_sandwich_margin(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L, double eta1,
                       double eta2) {
  require_symmetric(K, "lkl_sandwich_margin");
  require_symmetric(L, "lkl_sandwich_margin");
  const Eigen::MatrixXd expr = L - L * K * L;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (expr + expr.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() - eta1 * (1.0 - eta2);
}

namespace {

// Connected components after removing zero-influence edges; within each
// component the chi weights stay strictly positive.
std::vector<std::vector<int>> gamma_components(const WalkTree& tree,
                                               const std::vector<double>& edge_gamma) {
  std::vector<int> comp(tree.size(), -1);
  std::vector<std::vector<int>> out;
  for (int i = 0; i < tree.size(); ++i) {
    if (comp[i] >= 0) continue;
    const int id = static_cast<int>(out.size());
    out.emplace_back();
    std::vector<int> stack = {i};
    comp[i] = id;
    while (!stack.empty()) {
      const int x = stack.back();
      stack.pop_back();
      out[id].push_back(x);
      const auto visit = [&](int y) {
        if (comp[y] < 0) {
          comp[y] = id;
          stack.push_back(y);
        }
      };
      const int p = tree.nodes[x].parent;
      if (p >= 0 && edge_gamma[x] > 0.0 && comp[p] < 0) visit(p);
      for (int ch : tree.nodes[x].children)
        if (edge_gamma[ch] > 0.0) visit(ch);
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd path_product_matrix(const WalkTree& tree, const std::vector<double>& edge_gamma) {
  if (static_cast<int>(edge_gamma.size()) != tree.size())
    throw parameter_error("path_product_matrix: edge_gamma must have one entry per node");
  const int sz = tree.size();
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(sz, sz);
  // BFS from every node through the tree, multiplying influences
  std::vector<std::vector<std::pair<int, double>>> nbrs(sz);
  for (int i = 0; i < sz; ++i)
    if (tree.nodes[i].parent >= 0) {
      nbrs[i].emplace_back(tree.nodes[i].parent, edge_gamma[i]);
      nbrs[tree.nodes[i].parent].emplace_back(i, edge_gamma[i]);
    }
  for (int src = 0; src < sz; ++src) {
    Y(src, src) = 1.0;
    std::vector<std::pair<int, int>> stack = {{src, -1}};
    while (!stack.empty()) {
      auto [x, prev] = stack.back();
      stack.pop_back();
      for (auto [y, g] : nbrs[x]) {
        if (y == prev) continue;
        Y(src, y) = Y(src, x) * g;
        stack.emplace_back(y, x);
      }
    }
  }
  return Y;
}

double chi_weighted_block_norm(const WalkTree& tree, const std::vector<double>& edge_gamma,
                               double delta) {
  if (!(delta > 0)) throw parameter_error("chi_weighted_block_norm: delta must be > 0");
  if (static_cast<int>(edge_gamma.size()) != tree.size())
    throw parameter_error("chi_weighted_block_norm: edge_gamma must have one entry per node");

  double worst = 0.0;
  for (const std::vector<int>& comp : gamma_components(tree, edge_gamma)) {
    // chi from the component's top node (the one whose parent-edge leaves the
    // component or which is the tree root)
    std::vector<int> order = comp;
    std::sort(order.begin(), order.end());  // parents precede children in node ids
    std::vector<double> chi(tree.size(), 0.0);
    std::vector<char> in_comp(tree.size(), 0);
    for (int v : comp) in_comp[v] = 1;
    chi[order.front()] = 1.0;
    for (int v : order) {
      const int p = tree.nodes[v].parent;
      if (v == order.front()) continue;
      if (p >= 0 && in_comp[p] && edge_gamma[v] > 0.0)
        chi[v] = (1.0 + delta) * edge_gamma[v] * chi[p];
    }
    // distances within the component
    const int k = static_cast<int>(order.size());
    std::vector<int> index(tree.size(), -1);
    for (int i = 0; i < k; ++i) index[order[i]] = i;
    // per-pair distance and path product via upward walks to the LCA
    auto path_info = [&](int a, int b) -> std::pair<int, double> {
      // climb to root of component collecting ancestors
      std::vector<std::pair<int, double>> up_a;  // (node, product)
      double prod = 1.0;
      int x = a;
      up_a.emplace_back(x, 1.0);
      while (tree.nodes[x].parent >= 0 && in_comp[tree.nodes[x].parent] && edge_gamma[x] > 0.0) {
        prod *= edge_gamma[x];
        x = tree.nodes[x].parent;
        up_a.emplace_back(x, prod);
      }
      prod = 1.0;
      int y = b;
      int steps_b = 0;
      while (true) {
        for (std::size_t i = 0; i < up_a.size(); ++i)
          if (up_a[i].first == y)
            return {static_cast<int>(i) + steps_b, up_a[i].second * prod};
        if (tree.nodes[y].parent < 0 || !in_comp[tree.nodes[y].parent] || edge_gamma[y] <= 0.0)
          break;
        prod *= edge_gamma[y];
        y = tree.nodes[y].parent;
        ++steps_b;
      }
      return {-1, 0.0};  // disconnected inside component: cannot happen
    };

    // slice row sums: for each ell, ||D^{-1} Y_ell D||_inf
    std::vector<double> slice_norm;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        const auto [dist, prod] = path_info(order[i], order[j]);
        if (dist < 0) throw numeric_error("chi_weighted_block_norm: component walk failed");
        if (static_cast<int>(slice_norm.size()) <= dist) slice_norm.resize(dist + 1, 0.0);
      }
    }
    std::vector<std::vector<double>> row_sums(k, std::vector<double>(slice_norm.size(), 0.0));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        const auto [dist, prod] = path_info(order[i], order[j]);
        row_sums[i][dist] += prod * chi[order[j]] / chi[order[i]];
      }
    double bound = 0.0;
    for (std::size_t ell = 0; ell < slice_norm.size(); ++ell) {
      double m = 0.0;
      for (int i = 0; i < k; ++i) m = std::max(m, row_sums[i][ell]);
      bound += m;
    }
    worst = std::max(worst, bound);
  }
  return worst;
}

double copies_matrix_norm(const WalkTree& tree) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(tree.source_n, tree.size());
  for (int i = 0; i < tree.size(); ++i) K(tree.nodes[i].copy_of, i) = 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K * K.transpose(), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

std::vector<JsNormRecord> js_norm_experiment(int n, double d, double eps, double beta,
                                             int replicas, std::uint64_t seed,
                                             const BlockThresholds* override_thresholds,
                                             int k_fine) {
  std::vector<JsNormRecord> out(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    JsNormRecord rec;
    rec.replica = static_cast<int>(r);
    Rng rng(replica_seed(seed, r), 0);
    const SparseGraph g = sample_gnp(n, d, rng);
    const CouplingMap c = sample_couplings(g, CouplingSpec::gaussian(), rng);
    const GibbsModel model = make_model(g, c, beta);
    const WeightContext ctx = make_weight_context(model, eps, d);
    const double zeta = eps * (1.0 - 1e-4);
    const GibbsModel model_z = make_model(g, c, beta);
    const WeightContext ctx_z = make_weight_context(model_z, zeta, d);
    const BlockThresholds th =
        override_thresholds ? *override_thresholds : BlockThresholds::defaults(n, d, eps);

    const DecompositionResult coarse = build_decomposition(ctx, 0, th);
    if (std::holds_alternative<DecompositionFail>(coarse)) {
      rec.status = "D-fail condition " +
                   std::to_string(std::get<DecompositionFail>(coarse).condition);
      out[r] = std::move(rec);
      return;
    }
    const DecompositionResult fine = build_decomposition(ctx_z, k_fine, th);
    if (std::holds_alternative<DecompositionFail>(fine)) {
      rec.status = "E-fail condition " +
                   std::to_string(std::get<DecompositionFail>(fine).condition);
      out[r] = std::move(rec);
      return;
    }
    const auto refined = refine_to_partition(ctx, std::get<BlockPartition>(coarse),
                                             std::get<BlockPartition>(fine));
    if (std::holds_alternative<RefineError>(refined)) {
      rec.status = "refine-fail: " + std::get<RefineError>(refined).detail;
      out[r] = std::move(rec);
      return;
    }
    const PartitionMatrices pm =
        partition_matrices(interaction_matrix(g, c), std::get<BlockPartition>(refined));
    rec.status = "ok";
    rec.js_norm = sym_operator_norm(Eigen::MatrixXd(pm.j_s));
    out[r] = std::move(rec);
  });
  return out;
}

}  // namespace spinlab
