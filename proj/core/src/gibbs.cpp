#include "spinlab/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "spinlab/errors.hpp"

namespace spinlab {

namespace {

void check_cap(int n, int cap, const char* who) {
  if (n > cap) throw capacity_error(std::string(who) + ": n above enumeration cap");
  if (n > 62) throw capacity_error(std::string(who) + ": n above bitmask limit");
}

// Deterministic pairwise (tree) summation; independent of thread count by
// construction and more accurate than sequential accumulation.
double pairwise_sum(const double* data, std::size_t count) {
  if (count == 0) return 0.0;
  if (count <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += data[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, count - half);
}

}  // namespace

double GibbsModel::log_weight(std::uint64_t state) const {
  double e = 0.0;
  for (const Edge& ed : graph.edges)
    e += beta * couplings.values[ed.id] * spin_of(state, ed.u) * spin_of(state, ed.v);
  for (int v = 0; v < graph.n; ++v) e += field[v] * spin_of(state, v);
  return e;
}

GibbsModel make_model(SparseGraph g, CouplingMap c, double beta, std::vector<double> field) {
  if (beta < 0) throw parameter_error("make_model: beta must be >= 0");
  if (static_cast<int>(field.size()) != g.n) throw parameter_error("make_model: field length != n");
  if (c.values.size() != g.edges.size()) throw parameter_error("make_model: couplings do not match edges");
  return GibbsModel{std::move(g), std::move(c), beta, std::move(field)};
}

GibbsModel make_model(SparseGraph g, CouplingMap c, double beta) {
  std::vector<double> h(g.n, 0.0);
  return make_model(std::move(g), std::move(c), beta, std::move(h));
}

ExactDistribution exact_distribution(const GibbsModel& m, int cap) {
  check_cap(m.n(), cap, "exact_distribution");
  const int n = m.n();
  const std::uint64_t states = std::uint64_t{1} << n;
  std::vector<double> logw(states);

  // Gray-code sweep: one spin flip per step, energy updated incrementally.
  double e = m.log_weight(0);
  std::uint64_t gray_prev = 0;
  logw[0] = e;
  std::uint64_t state = 0;
  for (std::uint64_t k = 1; k < states; ++k) {
    const std::uint64_t gray = k ^ (k >> 1);
    const int v = std::countr_zero(gray ^ gray_prev);
    // flipping sigma_v: delta = -2 sigma_v (beta sum_w J_vw sigma_w + h_v) before flip
    double local = m.field[v];
    for (auto [w, eid] : m.graph.inc[v])
      local += m.beta * m.couplings.values[eid] * spin_of(state, w);
    e -= 2.0 * spin_of(state, v) * local;
    state ^= (std::uint64_t{1} << v);
    gray_prev = gray;
    logw[state] = e;
  }

  const double shift = *std::max_element(logw.begin(), logw.end());
  std::vector<double> w(states);
  for (std::uint64_t s = 0; s < states; ++s) w[s] = std::exp(logw[s] - shift);
  const double total = pairwise_sum(w.data(), w.size());

  ExactDistribution dist;
  dist.n = n;
  dist.probs.resize(states);
  for (std::uint64_t s = 0; s < states; ++s) dist.probs[s] = w[s] / total;
  dist.log_z = shift + std::log(total);
  return dist;
}

std::vector<double> exact_marginals_plus(const GibbsModel& m, int cap) {
  const ExactDistribution dist = exact_distribution(m, cap);
  std::vector<double> marg(m.n(), 0.0);
  for (std::uint64_t s = 0; s < dist.probs.size(); ++s)
    for (int v = 0; v < m.n(); ++v)
      if ((s >> v) & 1) marg[v] += dist.probs[s];
  return marg;
}

Eigen::MatrixXd covariance(const GibbsModel& m, int cap) {
  const ExactDistribution dist = exact_distribution(m, cap);
  const int n = m.n();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd s(n);
  for (std::uint64_t st = 0; st < dist.probs.size(); ++st) {
    const double p = dist.probs[st];
    if (p == 0.0) continue;
    for (int v = 0; v < n; ++v) s[v] = spin_of(st, v);
    mean.noalias() += p * s;
    second.noalias() += p * (s * s.transpose());
  }
  Eigen::MatrixXd cov = second - mean * mean.transpose();
  return 0.5 * (cov + cov.transpose());  // scrub rounding asymmetry
}

InfluenceResult influence_matrix(const GibbsModel& m, const Pinning& pin, int cap) {
  check_cap(m.n(), cap, "influence_matrix");
  if (pin.vertices.size() != pin.spins.size())
    throw parameter_error("influence_matrix: pinning vertices/spins mismatch");
  const int n = m.n();
  const ExactDistribution dist = exact_distribution(m, cap);

  std::uint64_t pin_mask = 0, pin_bits = 0;
  for (std::size_t i = 0; i < pin.vertices.size(); ++i) {
    const int v = pin.vertices[i];
    if (v < 0 || v >= n) throw parameter_error("influence_matrix: pinned vertex out of range");
    pin_mask |= std::uint64_t{1} << v;
    if (pin.spins[i] > 0) pin_bits |= std::uint64_t{1} << v;
  }

  InfluenceResult res;
  for (int v = 0; v < n; ++v)
    if (!((pin_mask >> v) & 1)) res.free_vertices.push_back(v);
  const int k = static_cast<int>(res.free_vertices.size());
  res.influence.resize(k, k);

  for (int wi = 0; wi < k; ++wi) {
    const int w = res.free_vertices[wi];
    // Conditional marginals mu_u(+1 | pin, w = +-1) in one pass per w.
    double zp = 0.0, zm = 0.0;
    std::vector<double> up(n, 0.0), um(n, 0.0);
    for (std::uint64_t st = 0; st < dist.probs.size(); ++st) {
      if ((st & pin_mask) != pin_bits) continue;
      const double p = dist.probs[st];
      if (p == 0.0) continue;
      if ((st >> w) & 1) {
        zp += p;
        for (int u = 0; u < n; ++u)
          if ((st >> u) & 1) up[u] += p;
      } else {
        zm += p;
        for (int u = 0; u < n; ++u)
          if ((st >> u) & 1) um[u] += p;
      }
    }
    if (zp <= 0.0 || zm <= 0.0)
      throw parameter_error("influence_matrix: conditioning event has probability 0");
    for (int ui = 0; ui < k; ++ui) {
      const int u = res.free_vertices[ui];
      res.influence(wi, ui) = up[u] / zp - um[u] / zm;
    }
  }
  return res;
}

double entropy_functional(const ExactDistribution& dist, const std::vector<double>& f) {
  if (f.size() != dist.probs.size()) throw parameter_error("entropy_functional: f size mismatch");
  double mean_flogf = 0.0, mean_f = 0.0;
  for (std::size_t s = 0; s < f.size(); ++s) {
    if (f[s] < 0) throw parameter_error("entropy_functional: f must be nonnegative");
    mean_f += dist.probs[s] * f[s];
    if (f[s] > 0) mean_flogf += dist.probs[s] * f[s] * std::log(f[s]);
  }
  if (mean_f <= 0) return 0.0;
  return mean_flogf - mean_f * std::log(mean_f);
}

double dirichlet_form(const GibbsModel& m, const std::vector<double>& f,
                      const std::vector<double>& g, int cap) {
  check_cap(m.n(), cap, "dirichlet_form");
  const int n = m.n();
  const std::uint64_t states = std::uint64_t{1} << n;
  if (f.size() != states || g.size() != states)
    throw parameter_error("dirichlet_form: table size mismatch");
  const ExactDistribution dist = exact_distribution(m, cap);

  // P(s, s^v) = (1/n) * P[resample v lands on the flipped spin]; diagonal
  // terms contribute zero to the form.
  double total = 0.0;
  for (std::uint64_t s = 0; s < states; ++s) {
    const double mu_s = dist.probs[s];
    if (mu_s == 0.0) continue;
    for (int v = 0; v < n; ++v) {
      double local = m.field[v];
      for (auto [w, eid] : m.graph.inc[v])
        local += m.beta * m.couplings.values[eid] * spin_of(s, w);
      // heat bath: new spin is +1 with probability logistic(2*local)
      const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * local));
      const std::uint64_t t = s ^ (std::uint64_t{1} << v);
      const double p_flip = ((s >> v) & 1) ? (1.0 - p_plus) : p_plus;
      total += (f[s] - f[t]) * (g[s] - g[t]) * mu_s * (p_flip / n);
    }
  }
  return total;
}

void dump_probs(const ExactDistribution& dist, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw error("dump_probs: cannot open " + path);
  std::fwrite(dist.probs.data(), sizeof(double), dist.probs.size(), fp);
  std::fclose(fp);
}

}  // namespace spinlab
