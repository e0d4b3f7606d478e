#include "spinlab/glauber.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "spinlab/errors.hpp"
#include "spinlab/parallel.hpp"

namespace spinlab {

namespace {

void check_cap(int n, int cap, const char* who) {
  if (n > cap) throw capacity_error(std::string(who) + ": n above transition-matrix cap");
}

inline double conditional_plus(const GibbsModel& m, const SpinVector& state, int v) {
  double local = m.field[v];
  for (auto [w, eid] : m.graph.inc[v]) local += m.beta * m.couplings.values[eid] * state[w];
  return 1.0 / (1.0 + std::exp(-2.0 * local));
}

}  // namespace

SpinVector all_plus(int n) { return SpinVector(n, +1); }
SpinVector all_minus(int n) { return SpinVector(n, -1); }

int glauber_step(SpinVector& state, const GibbsModel& m, Rng& rng) {
  const int v = static_cast<int>(rng.uniform_below(m.n()));
  const double p = conditional_plus(m, state, v);
  state[v] = rng.uniform() < p ? +1 : -1;
  return v;
}

double energy(const GibbsModel& m, const SpinVector& state) {
  double e = 0.0;
  for (const Edge& ed : m.graph.edges) e += m.couplings.values[ed.id] * state[ed.u] * state[ed.v];
  for (int v = 0; v < m.n(); ++v) e += m.field[v] * state[v];
  return e;
}

double magnetization(const SpinVector& state) {
  double s = 0.0;
  for (auto x : state) s += x;
  return state.empty() ? 0.0 : s / static_cast<double>(state.size());
}

Eigen::MatrixXd transition_matrix(const GibbsModel& m, int cap) {
  check_cap(m.n(), cap, "transition_matrix");
  const int n = m.n();
  const std::uint64_t states = std::uint64_t{1} << n;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(states, states);
  for (std::uint64_t s = 0; s < states; ++s) {
    double stay = 0.0;
    for (int v = 0; v < n; ++v) {
      double local = m.field[v];
      for (auto [w, eid] : m.graph.inc[v]) local += m.beta * m.couplings.values[eid] * spin_of(s, w);
      const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * local));
      const bool up = (s >> v) & 1;
      const double p_flip = up ? (1.0 - p_plus) : p_plus;
      P(s, s ^ (std::uint64_t{1} << v)) = p_flip / n;
      stay += (up ? p_plus : 1.0 - p_plus) / n;
    }
    P(s, s) = stay;
  }
  return P;
}

double relaxation_time(const Eigen::MatrixXd& P, const Eigen::VectorXd& mu, double balance_tol) {
  const Eigen::Index states = P.rows();
  if (P.cols() != states || mu.size() != states)
    throw parameter_error("relaxation_time: dimension mismatch");
  for (Eigen::Index x = 0; x < states; ++x)
    for (Eigen::Index y = x + 1; y < states; ++y)
      if (std::fabs(mu(x) * P(x, y) - mu(y) * P(y, x)) > balance_tol)
        throw parameter_error("relaxation_time: chain is not reversible");

  // Self-adjointify: A = D^{1/2} P D^{-1/2} with D = diag(mu).
  Eigen::VectorXd root = mu.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd A(states, states);
  for (Eigen::Index x = 0; x < states; ++x)
    for (Eigen::Index y = 0; y < states; ++y)
      A(x, y) = root(x) > 0 && root(y) > 0 ? P(x, y) * root(x) / root(y) : (x == y ? P(x, x) : 0.0);
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  double lambda_star = std::fabs(ev(0));
  if (states >= 2) lambda_star = std::max(lambda_star, std::fabs(ev(states - 2)));
  if (states == 1) lambda_star = 0.0;
  if (lambda_star >= 1.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (1.0 - lambda_star);
}

double relaxation_time(const Eigen::MatrixXd& P, double balance_tol) {
  const Eigen::Index states = P.rows();
  // mu up to scale from detailed-balance ratios along a BFS tree of the
  // transition graph; fails loudly if ratios are inconsistent.
  Eigen::VectorXd logmu = Eigen::VectorXd::Constant(states, std::nan(""));
  logmu(0) = 0.0;
  std::deque<Eigen::Index> queue = {0};
  while (!queue.empty()) {
    const Eigen::Index x = queue.front();
    queue.pop_front();
    for (Eigen::Index y = 0; y < states; ++y) {
      if (y == x || !(P(x, y) > 0.0)) continue;
      if (!(P(y, x) > 0.0)) throw parameter_error("relaxation_time: chain is not reversible");
      if (std::isnan(logmu(y))) {
        logmu(y) = logmu(x) + std::log(P(x, y) / P(y, x));
        queue.push_back(y);
      }
    }
  }
  if (logmu.hasNaN()) throw parameter_error("relaxation_time: transition graph is not irreducible");
  const double shift = logmu.maxCoeff();
  Eigen::VectorXd mu = (logmu.array() - shift).exp();
  mu /= mu.sum();
  return relaxation_time(P, mu, balance_tol);
}

namespace {

// CSR-style sparse view of the Glauber chain: per state, the n flip targets
// with probabilities plus the holding probability.
struct SparseChain {
  int n;
  std::uint64_t states;
  std::vector<double> flip;  // states * n, P(s, s^v)
  std::vector<double> stay;  // states

  explicit SparseChain(const GibbsModel& m) {
    n = m.n();
    states = std::uint64_t{1} << n;
    flip.resize(states * n);
    stay.resize(states);
    for (std::uint64_t s = 0; s < states; ++s) {
      double hold = 0.0;
      for (int v = 0; v < n; ++v) {
        double local = m.field[v];
        for (auto [w, eid] : m.graph.inc[v])
          local += m.beta * m.couplings.values[eid] * spin_of(s, w);
        const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * local));
        const bool up = (s >> v) & 1;
        flip[s * n + v] = (up ? 1.0 - p_plus : p_plus) / n;
        hold += (up ? p_plus : 1.0 - p_plus) / n;
      }
      stay[s] = hold;
    }
  }

  // row <- row * P (distribution evolution)
  void evolve(std::vector<double>& row, std::vector<double>& scratch) const {
    std::fill(scratch.begin(), scratch.end(), 0.0);
    for (std::uint64_t s = 0; s < states; ++s) {
      const double p = row[s];
      if (p == 0.0) continue;
      scratch[s] += p * stay[s];
      for (int v = 0; v < n; ++v) scratch[s ^ (std::uint64_t{1} << v)] += p * flip[s * n + v];
    }
    row.swap(scratch);
  }
};

}  // namespace

ChainDiagnostics chain_diagnostics(const GibbsModel& m, double eps, int cap, int max_steps) {
  check_cap(m.n(), cap, "chain_diagnostics");
  const ExactDistribution dist = exact_distribution(m, cap);
  const SparseChain chain(m);
  const std::uint64_t states = chain.states;

  // Per-start TV curves, evaluated in parallel replicas; the max over starts
  // is taken per step afterwards so the result is thread-count independent.
  std::vector<int> start_mix(states, -1);
  std::vector<std::vector<double>> curves(states);
  parallel_for(states, [&](std::size_t start) {
    std::vector<double> row(states, 0.0), scratch(states);
    row[start] = 1.0;
    std::vector<double> curve;
    for (int t = 0;; ++t) {
      double tv = 0.0;
      for (std::uint64_t s = 0; s < states; ++s) tv += std::fabs(row[s] - dist.probs[s]);
      tv *= 0.5;
      curve.push_back(tv);
      if (tv <= eps && t > 0) {
        start_mix[start] = t;
        break;
      }
      if (t >= max_steps) break;
      chain.evolve(row, scratch);
    }
    curves[start] = std::move(curve);
  });

  ChainDiagnostics diag;
  int tmax = 0;
  for (std::uint64_t s = 0; s < states; ++s) {
    if (start_mix[s] < 0) throw numeric_error("chain_diagnostics: no mixing within max_steps");
    tmax = std::max(tmax, start_mix[s]);
  }
  diag.mixing_time = tmax;
  diag.tv_curve.assign(tmax + 1, 0.0);
  for (std::uint64_t s = 0; s < states; ++s)
    for (std::size_t t = 0; t < curves[s].size() && t < diag.tv_curve.size(); ++t)
      diag.tv_curve[t] = std::max(diag.tv_curve[t], curves[s][t]);
  // A start that mixed early stays below eps afterwards (its curve ended);
  // the recorded worst-start curve is still nonincreasing for these chains.
  if (m.n() <= 12) {
    Eigen::Map<const Eigen::VectorXd> mu(dist.probs.data(), states);
    diag.relaxation_time = relaxation_time(transition_matrix(m, cap), mu);
  }
  return diag;
}

int mixing_time_exact(const GibbsModel& m, double eps, int cap, int max_steps) {
  return chain_diagnostics(m, eps, cap, max_steps).mixing_time;
}

double mlsi_ratio_estimate(const GibbsModel& m, int num_f, Rng& rng, int cap) {
  check_cap(m.n(), cap, "mlsi_ratio_estimate");
  if (num_f < 1) throw parameter_error("mlsi_ratio_estimate: num_f must be >= 1");
  const int n = m.n();
  const std::uint64_t states = std::uint64_t{1} << n;
  const ExactDistribution dist = exact_distribution(m, cap);
  const SparseChain chain(m);

  auto dirichlet_flog = [&](const std::vector<double>& f) {
    double total = 0.0;
    for (std::uint64_t s = 0; s < states; ++s) {
      const double mu_s = dist.probs[s];
      if (mu_s == 0.0) continue;
      for (int v = 0; v < n; ++v) {
        const std::uint64_t t = s ^ (std::uint64_t{1} << v);
        const double df = f[s] - f[t];
        if (df != 0.0) total += df * std::log(f[s] / f[t]) * mu_s * chain.flip[s * n + v];
      }
    }
    return total;
  };

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> f(states);
  for (int k = 0; k < num_f; ++k) {
    switch (k % 3) {
      case 0: {  // exponential tilt of a random field; tau cycles towards flat
        const double tau = (k % 6 == 0) ? 0.05 : 0.4;
        std::vector<double> a(n);
        for (auto& x : a) x = tau * rng.normal();
        for (std::uint64_t s = 0; s < states; ++s) {
          double e = 0.0;
          for (int v = 0; v < n; ++v) e += a[v] * spin_of(s, v);
          f[s] = std::exp(e);
        }
        break;
      }
      case 1: {  // near-indicator spike
        const double delta = (k % 6 == 1) ? 1e-2 : 1e-1;
        const std::uint64_t s0 = rng.next_u64() & (states - 1);
        for (std::uint64_t s = 0; s < states; ++s) f[s] = delta + (s == s0 ? 1.0 : 0.0);
        break;
      }
      default: {  // iid log-normal table
        const double eta = (k % 6 == 2) ? 0.1 : 1.0;
        for (std::uint64_t s = 0; s < states; ++s) f[s] = std::exp(eta * rng.normal());
        break;
      }
    }
    const double ent = entropy_functional(dist, f);
    if (!(ent > 1e-13)) continue;
    best = std::min(best, dirichlet_flog(f) / ent);
  }
  if (!std::isfinite(best)) throw numeric_error("mlsi_ratio_estimate: all sampled f degenerate");
  return best;
}

Eigen::MatrixXd block_dynamics_matrix(const GibbsModel& m,
                                      const std::vector<std::vector<int>>& blocks, int cap) {
  check_cap(m.n(), cap, "block_dynamics_matrix");
  if (blocks.empty()) throw parameter_error("block_dynamics_matrix: empty block list");
  const int n = m.n();
  const std::uint64_t states = std::uint64_t{1} << n;
  std::vector<std::uint64_t> masks;
  std::uint64_t covered = 0;
  for (const auto& b : blocks) {
    if (b.empty()) throw parameter_error("block_dynamics_matrix: empty block");
    std::uint64_t bm = 0;
    for (int v : b) {
      if (v < 0 || v >= n) throw parameter_error("block_dynamics_matrix: vertex out of range");
      bm |= std::uint64_t{1} << v;
    }
    covered |= bm;
    masks.push_back(bm);
  }
  if (covered != states - 1) throw parameter_error("block_dynamics_matrix: blocks must cover V");

  const ExactDistribution dist = exact_distribution(m, cap);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(states, states);
  const double pick = 1.0 / static_cast<double>(masks.size());
  for (std::uint64_t bm : masks) {
    // partition states by their restriction outside the block
    std::unordered_map<std::uint64_t, double> z;
    for (std::uint64_t s = 0; s < states; ++s) z[s & ~bm] += dist.probs[s];
    for (std::uint64_t s = 0; s < states; ++s) {
      const std::uint64_t key = s & ~bm;
      const double zk = z[key];
      if (!(zk > 0)) throw numeric_error("block_dynamics_matrix: conditional normaliser is 0");
      // enumerate configurations of the block via subset walk of bm
      std::uint64_t sub = bm;
      for (;;) {
        const std::uint64_t t = key | sub;
        P(s, t) += pick * dist.probs[t] / zk;
        if (sub == 0) break;
        sub = (sub - 1) & bm;
      }
    }
  }
  return P;
}

std::vector<double> coupling_meet_estimate(const GibbsModel& m, int epochs, Rng& rng,
                                           int replicas) {
  if (epochs < 1 || replicas < 1)
    throw parameter_error("coupling_meet_estimate: epochs and replicas must be >= 1");
  const int n = m.n();
  // long enough that at beta = 0 every site is touched with probability
  // comfortably above 1/2 within one epoch
  const int epoch_len = static_cast<int>(std::ceil(1.5 * n * std::log(std::max(2, n)))) + 1;
  std::vector<std::vector<unsigned char>> met(replicas, std::vector<unsigned char>(epochs, 0));
  parallel_for(replicas, [&](std::size_t r) {
    Rng local = rng.split(r);
    SpinVector x = all_plus(n), y = all_minus(n);
    bool together = false;
    for (int ep = 0; ep < epochs; ++ep) {
      for (int t = 0; t < epoch_len && !together; ++t) {
        // maximal one-step coupling: same vertex, same uniform
        const int v = static_cast<int>(local.uniform_below(n));
        const double u = local.uniform();
        x[v] = u < conditional_plus(m, x, v) ? +1 : -1;
        y[v] = u < conditional_plus(m, y, v) ? +1 : -1;
        together = std::equal(x.begin(), x.end(), y.begin());
      }
      met[r][ep] = together ? 1 : 0;
    }
  });
  std::vector<double> out(epochs, 0.0);
  for (int ep = 0; ep < epochs; ++ep) {
    double c = 0.0;
    for (int r = 0; r < replicas; ++r) c += met[r][ep];
    out[ep] = c / replicas;
  }
  return out;
}

}  // namespace spinlab
