#include "spinlab/thresholds.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <mutex>

#include "spinlab/errors.hpp"
#include "spinlab/parallel.hpp"
#include "spinlab/weights.hpp"

namespace spinlab {

QuadratureRule gauss_hermite(int order) {
  if (order < 1) throw parameter_error("gauss_hermite: order must be >= 1");
  // Golub-Welsch on the probabilists' Hermite recurrence (b_k = sqrt(k)).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = std::sqrt(static_cast<double>(k));
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  QuadratureRule rule;
  rule.order = order;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;  // orthonormal columns: weights sum to 1
  }
  // enforce the +- node symmetry exactly so odd moments vanish
  for (int i = 0, j = order - 1; i < j; ++i, --j) {
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = rule.weights[j] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

namespace {

// Gauss-Legendre rule on [0, 1] via Golub-Welsch.
void gauss_legendre01(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  nodes.resize(order);
  weights.resize(order);
  for (int i = 0; i < order; ++i) {
    nodes[i] = 0.5 * (es.eigenvalues()(i) + 1.0);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = v0 * v0;  // total weight of [0,1] is 1
  }
}

// E[tanh^2(beta gamma)] for saturated beta: tanh^2 = 1 - sech^2 and the
// sech^2 mass localises at |x| ~ 1/beta, so substitute u = beta x and
// integrate the smooth localised remainder with Gauss-Legendre.
double saturated_expectation(double beta, int order) {
  std::vector<double> nodes, weights;
  gauss_legendre01(order, nodes, weights);
  const double span = 40.0;  // sech^2(u) < 1e-34 beyond
  double integral = 0.0;
  for (int i = 0; i < order; ++i) {
    const double u = span * nodes[i];
    const double c = std::cosh(u);
    const double phi = std::exp(-0.5 * (u / beta) * (u / beta)) / std::sqrt(2.0 * M_PI);
    integral += span * weights[i] * (1.0 / (c * c)) * phi / beta;
  }
  return 1.0 - 2.0 * integral;
}

}  // namespace

double kappa_integral(double beta, double d, const QuadratureRule& rule) {
  if (beta < 0) throw parameter_error("kappa_integral: beta must be >= 0");
  if (beta > 1.0) {
    // Gauss-Hermite cannot resolve the sech^2 dip once it narrows below the
    // node spacing; the localised substitution is machine accurate there
    const double coarse = saturated_expectation(beta, 96);
    const double fine = saturated_expectation(beta, 192);
    if (std::fabs(coarse - fine) > 1e-10 * std::max(1.0, std::fabs(fine)))
      throw numeric_error("kappa_integral: saturated quadrature self-check failed");
    return d * fine;
  }
  auto eval = [&](const QuadratureRule& r) {
    double s = 0.0;
    for (int i = 0; i < r.order; ++i) {
      const double t = std::tanh(beta * r.nodes[i]);
      s += r.weights[i] * t * t;
    }
    return d * s;
  };
  static std::mutex cache_mu;
  static std::map<int, QuadratureRule> doubled_cache;
  const QuadratureRule* doubled;
  {
    std::lock_guard<std::mutex> lock(cache_mu);
    auto it = doubled_cache.find(2 * rule.order);
    if (it == doubled_cache.end())
      it = doubled_cache.emplace(2 * rule.order, gauss_hermite(2 * rule.order)).first;
    doubled = &it->second;
  }
  const double coarse = eval(rule);
  const double fine = eval(*doubled);
  if (std::fabs(coarse - fine) > 1e-10 * std::max(1.0, std::fabs(fine)))
    throw numeric_error("kappa_integral: quadrature self-check failed");
  return fine;
}

double kappa_integral(double beta, double d) {
  static const QuadratureRule rule = gauss_hermite(kDefaultQuadratureOrder);
  return kappa_integral(beta, d, rule);
}

namespace {

double solve_kappa_root(double d, double target, const char* who) {
  if (!(d > target)) throw parameter_error(std::string(who) + ": requires d > target kappa");
  double lo = 0.0;
  double hi = 5.0 / std::sqrt(d) * std::max(1.0, target);
  int guard = 0;
  while (kappa_integral(hi, d) < target) {
    hi *= 2.0;
    if (++guard > 200) throw numeric_error(std::string(who) + ": no sign change in bracket");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kappa_integral(mid, d) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double beta_c(double d, double kappa) { return solve_kappa_root(d, kappa, "beta_c"); }

double beta_rec(double d) { return solve_kappa_root(d, 1.0, "beta_rec"); }

namespace {

// Binomial(n, p) by waiting times; exact and O(result) for small p.
std::uint64_t binomial_waiting(Rng& rng, std::uint64_t n, double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return n;
  const double log1mp = std::log1p(-p);
  std::uint64_t count = 0;
  double pos = -1.0;
  for (;;) {
    double u;
    do {
      u = rng.uniform();
    } while (u == 0.0);
    pos += 1.0 + std::floor(std::log(u) / log1mp);
    if (pos >= static_cast<double>(n)) break;
    ++count;
  }
  return count;
}

double binom_sigma(double phat, std::uint64_t n) {
  return std::sqrt(std::max(0.0, phat * (1.0 - phat)) / static_cast<double>(n));
}

constexpr std::uint64_t kChunks = 64;

}  // namespace

TailHarnessResult theta_tail_harness(double d, double beta, double delta, std::uint64_t samples,
                                     Rng& rng, int n_proxy) {
  if (samples < 1) throw parameter_error("theta_tail_harness: samples must be >= 1");
  static const QuadratureRule rule = gauss_hermite(kDefaultQuadratureOrder);
  const double e_tanh_sq = kappa_integral(beta, 1.0, rule);  // E[tanh^2(beta gamma)]
  const double mean_theta = d * (n_proxy - 1.0) / n_proxy * e_tanh_sq;
  const double threshold = mean_theta + delta / 2.0;
  const double p_edge = d / n_proxy;

  std::vector<std::uint64_t> hits(kChunks, 0);
  parallel_for(kChunks, [&](std::size_t chunk) {
    Rng local = rng.split(chunk);
    const std::uint64_t lo = samples * chunk / kChunks;
    const std::uint64_t hi = samples * (chunk + 1) / kChunks;
    std::uint64_t h = 0;
    for (std::uint64_t s = lo; s < hi; ++s) {
      const std::uint64_t deg = binomial_waiting(local, n_proxy - 1, p_edge);
      double theta = 0.0;
      for (std::uint64_t i = 0; i < deg; ++i) {
        const double t = std::tanh(beta * local.normal());
        theta += t * t;
      }
      if (theta >= threshold) ++h;
    }
    hits[chunk] = h;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;

  TailHarnessResult res;
  res.samples = samples;
  res.empirical = static_cast<double>(total) / samples;
  res.bound = 2.0 * std::exp(-delta * delta * d / (8.0 + 2.0 * delta));
  res.mc_sigma = binom_sigma(res.empirical, samples);
  return res;
}

namespace {

// Fast deterministic samplers for the Galton-Watson harness: the inner loop
// touches ~d^r edges per sample, so the draws are table/ziggurat based
// rather than the general Rng paths. Same xoshiro stream semantics.

struct PoissonTable {
  std::vector<double> cdf;
  double mean;

  explicit PoissonTable(double m) : mean(m) {
    double p = std::exp(-m);
    double c = p;
    cdf.push_back(c);
    for (int k = 1; c < 1.0 - 1e-15 && k < 4000; ++k) {
      p *= m / k;
      c += p;
      cdf.push_back(c);
    }
  }

  int sample(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    if (it != cdf.end()) return static_cast<int>(it - cdf.begin());
    return static_cast<int>(cdf.size());  // beyond table: probability < 1e-15
  }
};

// Marsaglia-Tsang ziggurat for the standard normal, 128 layers. X[] is
// decreasing: X[0] = v/f(r) is the virtual base width, X[1] = r, X[128] ~ 0;
// layer i covers [X[i+1], X[i]] with each region of area v.
struct ZigguratNormal {
  static constexpr int kLayers = 128;
  static constexpr double kR = 3.442619855899;
  static constexpr double kV = 9.91256303526217e-3;
  double X[kLayers + 1];
  double F[kLayers + 1];  // f(X[i]) with f(t) = exp(-t^2/2)

  ZigguratNormal() {
    auto f = [](double t) { return std::exp(-0.5 * t * t); };
    X[0] = kV / f(kR);
    X[1] = kR;
    for (int i = 2; i < kLayers; ++i) X[i] = std::sqrt(-2.0 * std::log(f(X[i - 1]) + kV / X[i - 1]));
    X[kLayers] = 0.0;
    for (int i = 0; i <= kLayers; ++i) F[i] = f(X[i]);
  }

  double sample(Rng& rng) const {
    for (;;) {
      const std::uint64_t bits = rng.next_u64();
      const int i = static_cast<int>(bits & (kLayers - 1));
      const bool neg = (bits >> 7) & 1;
      const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
      const double x = u * X[i];
      if (x < X[i + 1]) return neg ? -x : x;
      if (i == 0) {
        // tail beyond r (Marsaglia's exponential-majorant method)
        double a, b;
        do {
          a = -std::log(1.0 - rng.uniform()) / kR;
          b = -std::log(1.0 - rng.uniform());
        } while (b + b < a * a);
        return neg ? -(kR + a) : (kR + a);
      }
      const double y = F[i] + rng.uniform() * (F[i + 1] - F[i]);
      if (y < std::exp(-0.5 * x * x)) return neg ? -x : x;
    }
  }
};

// tanh on |x| <= 0.6 via the 5-term continued fraction (|error| < 1e-12 on
// that range), exact libm call beyond.
inline double fast_tanh(double v) {
  const double a = std::fabs(v);
  if (a > 0.6) return std::tanh(v);
  const double s = v * v;
  return v * (945.0 + s * (105.0 + s)) / (945.0 + s * (420.0 + 15.0 * s));
}

double sample_sqr_gw(Rng& rng, const PoissonTable& pois, const ZigguratNormal& zig, double beta,
                     int r) {
  if (r == 0) return 1.0;
  if (r == 1) {
    // SQR(1) = sum of squared child influences; the innermost loop of the
    // harness, kept free of recursion
    const int k = pois.sample(rng);
    double s = 0.0;
    for (int i = 0; i < k; ++i) {
      const double g = fast_tanh(beta * zig.sample(rng));
      s += g * g;
    }
    return s;
  }
  const int k = pois.sample(rng);
  double s = 0.0;
  for (int i = 0; i < k; ++i) {
    const double g = fast_tanh(beta * zig.sample(rng));
    s += g * g * sample_sqr_gw(rng, pois, zig, beta, r - 1);
  }
  return s;
}

}  // namespace

TailHarnessResult gw_sqr_tail_harness(double d, double beta, int r, double C, double t,
                                      std::uint64_t samples, std::uint64_t seed) {
  if (r < 0) throw parameter_error("gw_sqr_tail_harness: r must be >= 0");
  if (samples < 1) throw parameter_error("gw_sqr_tail_harness: samples must be >= 1");
  const double kappa = 0.25;  // the constant defining beta_c
  if (!(t >= 0.0 && t < d / (2.0 * kappa)))
    throw parameter_error("gw_sqr_tail_harness: t outside [0, d/(2 kappa))");
  const double cut = C * std::pow(kappa, r);

  const PoissonTable pois(d);
  const ZigguratNormal zig;

  std::vector<std::uint64_t> hits(kChunks, 0);
  parallel_for(kChunks, [&](std::size_t chunk) {
    Rng local(replica_seed(seed, chunk), 17);
    const std::uint64_t lo = samples * chunk / kChunks;
    const std::uint64_t hi = samples * (chunk + 1) / kChunks;
    std::uint64_t h = 0;
    for (std::uint64_t s = lo; s < hi; ++s)
      if (sample_sqr_gw(local, pois, zig, beta, r) > cut) ++h;
    hits[chunk] = h;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;

  TailHarnessResult res;
  res.samples = samples;
  res.empirical = static_cast<double>(total) / samples;
  res.bound = std::exp((1.0 - C) * t);
  res.mc_sigma = binom_sigma(res.empirical, samples);
  return res;
}

HalfNormalResult half_normal_tail_harness(int N, double sigma, double delta,
                                          std::uint64_t samples, Rng& rng) {
  if (N < 1) throw parameter_error("half_normal_tail_harness: N must be >= 1");
  const double mean_exact = N * sigma * std::sqrt(2.0 / M_PI);
  const double cut = (1.0 + delta) * mean_exact;

  std::vector<std::uint64_t> hits(kChunks, 0);
  std::vector<double> sum(kChunks, 0.0), sum_sq(kChunks, 0.0);
  parallel_for(kChunks, [&](std::size_t chunk) {
    Rng local = rng.split(chunk + 0xA11F00ULL);
    const std::uint64_t lo = samples * chunk / kChunks;
    const std::uint64_t hi = samples * (chunk + 1) / kChunks;
    std::uint64_t h = 0;
    double s1 = 0.0, s2 = 0.0;
    for (std::uint64_t s = lo; s < hi; ++s) {
      double x = 0.0;
      for (int i = 0; i < N; ++i) x += std::fabs(sigma * local.normal());
      if (x > cut) ++h;
      s1 += x;
      s2 += x * x;
    }
    hits[chunk] = h;
    sum[chunk] = s1;
    sum_sq[chunk] = s2;
  });
  std::uint64_t total = 0;
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t c = 0; c < kChunks; ++c) {
    total += hits[c];
    s1 += sum[c];
    s2 += sum_sq[c];
  }

  HalfNormalResult res;
  res.tail.samples = samples;
  res.tail.empirical = static_cast<double>(total) / samples;
  res.tail.bound = std::exp(-N * delta * delta / M_PI);
  res.tail.mc_sigma = binom_sigma(res.tail.empirical, samples);
  res.mean_exact = mean_exact;
  res.mean_empirical = s1 / samples;
  const double var = std::max(0.0, s2 / samples - res.mean_empirical * res.mean_empirical);
  res.mean_sigma = std::sqrt(var / samples);
  return res;
}

UpsilonHarnessResult upsilon_path_harness(int n, double d, double beta, int path_len,
                                          std::uint64_t samples, Rng& rng) {
  if (path_len < 1) throw parameter_error("upsilon_path_harness: path_len must be >= 1");
  UpsilonHarnessResult res;
  res.threshold = 2.0 * std::pow(d, -0.01) * std::log(static_cast<double>(n));

  const std::uint64_t paths_per_instance = 100;
  std::uint64_t remaining = samples;
  std::uint64_t instance_idx = 0;
  while (remaining > 0) {
    Rng inst_rng = rng.split(instance_idx++);
    const SparseGraph g = sample_gnp(n, d, inst_rng);
    const CouplingMap c = sample_couplings(g, CouplingSpec::gaussian(), inst_rng);
    const GibbsModel model = make_model(g, c, beta);
    const WeightContext ctx = make_weight_context(model, 0.5, d);
    const std::uint64_t quota = std::min(remaining, paths_per_instance);
    for (std::uint64_t p = 0; p < quota; ++p) {
      // random self-avoiding walk by rejection
      std::vector<int> path;
      for (int attempt = 0; attempt < 200 && path.empty(); ++attempt) {
        std::vector<int> cand = {static_cast<int>(inst_rng.uniform_below(g.n))};
        std::vector<bool> used(g.n, false);
        used[cand[0]] = true;
        while (static_cast<int>(cand.size()) <= path_len) {
          const int x = cand.back();
          std::vector<int> options;
          for (int y : g.adj[x])
            if (!used[y]) options.push_back(y);
          if (options.empty()) break;
          const int y = options[inst_rng.uniform_below(options.size())];
          used[y] = true;
          cand.push_back(y);
        }
        if (static_cast<int>(cand.size()) == path_len + 1) path = std::move(cand);
      }
      if (path.empty()) continue;  // no walk of that length found from random starts
      const double ups = comparison_weight_upsilon(ctx, path);
      ++res.paths_sampled;
      res.max_upsilon = std::max(res.max_upsilon, ups);
      if (ups > res.threshold) ++res.exceedances;
    }
    remaining -= quota;
  }
  return res;
}

namespace {

int edges_within_set(const SparseGraph& g, const std::vector<int>& s) {
  std::vector<bool> inside(g.n, false);
  for (int v : s) inside[v] = true;
  int m = 0;
  for (int v : s)
    for (int u : g.adj[v])
      if (u > v && inside[u]) ++m;
  return m;
}

}  // namespace

DensityWitness small_set_density_check(const SparseGraph& g, int size_cap, std::uint64_t budget,
                                       std::uint64_t sampled_subsets, std::uint64_t seed) {
  DensityWitness out;
  if (size_cap < 1) throw parameter_error("small_set_density_check: size_cap must be >= 1");

  std::uint64_t ops = 0;
  bool exhausted = false;

  std::vector<int> current;
  std::vector<int> ext;
  std::vector<char> in_set(g.n, 0), in_ext(g.n, 0);

  auto check_current = [&] {
    ++out.subsets_seen;
    const int m = edges_within_set(g, current);
    if (m > static_cast<int>(current.size()) &&
        (!out.found || static_cast<int>(current.size()) < static_cast<int>(out.vertices.size()))) {
      out.found = true;
      out.vertices = current;
      std::sort(out.vertices.begin(), out.vertices.end());
      out.spanned_edges = m;
    }
  };

  // ESU-style enumeration: each connected set with minimum vertex `pivot`
  // is emitted exactly once.
  std::function<void(int, std::vector<int>)> extend = [&](int pivot, std::vector<int> extension) {
    if (exhausted) return;
    check_current();
    if (static_cast<int>(current.size()) >= size_cap) return;
    while (!extension.empty()) {
      if (++ops > budget) {
        exhausted = true;
        return;
      }
      const int w = extension.back();
      extension.pop_back();
      in_ext[w] = 0;
      std::vector<int> next_ext = extension;
      std::vector<int> added;
      for (int u : g.adj[w])
        if (u > pivot && !in_set[u] && !in_ext[u]) {
          // exclusive neighbourhood: u must not already neighbour the set
          bool touches_set = false;
          for (int x : g.adj[u])
            if (in_set[x] && x != w) {
              touches_set = true;
              break;
            }
          if (touches_set) continue;
          next_ext.push_back(u);
          in_ext[u] = 1;
          added.push_back(u);
        }
      current.push_back(w);
      in_set[w] = 1;
      extend(pivot, next_ext);
      in_set[w] = 0;
      current.pop_back();
      for (int u : added) in_ext[u] = 0;
    }
  };

  for (int v = 0; v < g.n && !exhausted && !out.found; ++v) {
    current = {v};
    in_set.assign(g.n, 0);
    in_ext.assign(g.n, 0);
    in_set[v] = 1;
    std::vector<int> extension;
    for (int u : g.adj[v])
      if (u > v) {
        extension.push_back(u);
        in_ext[u] = 1;
      }
    extend(v, extension);
  }
  out.exhaustive = !exhausted;

  if (exhausted && !out.found) {
    // sampled fallback: random connected subsets by BFS growth
    Rng rng(seed, 99);
    for (std::uint64_t it = 0; it < sampled_subsets && !out.found; ++it) {
      const int start = static_cast<int>(rng.uniform_below(g.n));
      const int target = 2 + static_cast<int>(rng.uniform_below(std::max(1, size_cap - 1)));
      std::vector<int> set = {start};
      std::vector<char> used(g.n, 0);
      used[start] = 1;
      std::vector<int> frontier = {start};
      while (static_cast<int>(set.size()) < target && !frontier.empty()) {
        const std::size_t pick = rng.uniform_below(frontier.size());
        const int x = frontier[pick];
        std::vector<int> opts;
        for (int y : g.adj[x])
          if (!used[y]) opts.push_back(y);
        if (opts.empty()) {
          frontier.erase(frontier.begin() + pick);
          continue;
        }
        const int y = opts[rng.uniform_below(opts.size())];
        used[y] = 1;
        set.push_back(y);
        frontier.push_back(y);
      }
      ++out.subsets_seen;
      const int m = edges_within_set(g, set);
      if (m > static_cast<int>(set.size())) {
        out.found = true;
        out.vertices = set;
        std::sort(out.vertices.begin(), out.vertices.end());
        out.spanned_edges = m;
      }
    }
  }
  return out;
}

}  // namespace spinlab
