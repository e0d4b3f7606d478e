// spinlab: experiment runner for the 2-spin sampling laboratory.
//
// Subcommands: betac betarec sample mix partition jsnorm sqr iharabass
// tails localisation. Every run with the same configuration and seed
// produces byte-identical output, for any SPINLAB_THREADS.

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spinlab/block_partition.hpp"
#include "spinlab/errors.hpp"
#include "spinlab/glauber.hpp"
#include "spinlab/parallel.hpp"
#include "spinlab/spectral.hpp"
#include "spinlab/thresholds.hpp"

using namespace spinlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPartitionFail = 2;
constexpr int kExitUsage = 64;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// CSV payload -> {"header": [...], "rows": [...]} with numeric cells typed.
std::string csv_to_json(const std::string& csv) {
  nlohmann::json out;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  auto split = [](const std::string& text) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(text);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!text.empty() && text.back() == ',') cells.push_back("");
    return cells;
  };
  out["header"] = split(line);
  auto rows = nlohmann::json::array();
  while (std::getline(in, line)) {
    auto row = nlohmann::json::array();
    for (const std::string& cell : split(line)) {
      char* end = nullptr;
      const double value = std::strtod(cell.c_str(), &end);
      if (!cell.empty() && end == cell.c_str() + cell.size())
        row.push_back(value);
      else
        row.push_back(cell);
    }
    rows.push_back(std::move(row));
  }
  out["rows"] = std::move(rows);
  return out.dump(2) + "\n";
}

// Atomic emit: temp file + rename, or stdout when no path is given.
void write_output(const std::string& path, const std::string& payload) {
  if (path.empty()) {
    std::fwrite(payload.data(), 1, payload.size(), stdout);
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw error("cannot open " + tmp);
    out << payload;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw error("cannot rename into " + path);
}

struct CommonConfig {
  int n = 0;
  double d = 0.0;
  double beta = -1.0;       // absolute
  double beta_frac = -1.0;  // fraction of beta_c(d)
  double epsilon = 0.3;
  std::uint64_t seed = 1;
  int replicas = 1;
  std::string out;
  std::string format = "csv";

  double resolve_beta() const {
    if (beta >= 0.0 && beta_frac >= 0.0)
      throw parameter_error("give either --beta or --beta-frac, not both");
    if (beta >= 0.0) return beta;
    if (beta_frac >= 0.0) return beta_frac * beta_c(d);
    return 0.0;
  }
};

// Optional JSON config file: its entries become option tokens inserted right
// after the subcommand name, so explicit flags (parsed later with a take-last
// policy) win over file values.
std::vector<std::string> merge_config_tokens(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in) throw error("cannot open config file " + config_path);
  nlohmann::json cfg;
  in >> cfg;
  std::vector<std::string> tokens;
  for (auto& [key, value] : cfg.items()) {
    tokens.push_back("--" + key);
    tokens.push_back(value.is_string() ? value.get<std::string>() : value.dump());
  }
  // insert after the subcommand name (the first bare token)
  std::size_t pos = 0;
  while (pos < args.size() && args[pos].rfind("-", 0) == 0) ++pos;
  if (pos < args.size()) ++pos;
  args.insert(args.begin() + pos, tokens.begin(), tokens.end());
  return args;
}

GibbsModel sampled_model(const CommonConfig& cfg, double beta) {
  Rng rng(cfg.seed, 0);
  SparseGraph g = sample_gnp(cfg.n, cfg.d, rng);
  CouplingMap c = sample_couplings(g, CouplingSpec::gaussian(), rng);
  return make_model(std::move(g), std::move(c), beta);
}

int cmd_betac(double d, double kappa) {
  std::printf("%s\n", fmt(beta_c(d, kappa)).c_str());
  return kExitOk;
}

int cmd_betarec(double d) {
  std::printf("%s\n", fmt(beta_rec(d)).c_str());
  return kExitOk;
}

int cmd_sample(const CommonConfig& cfg, int steps) {
  const double beta = cfg.resolve_beta();
  const GibbsModel model = sampled_model(cfg, beta);

  // exact TV curve from the all-minus start, shared by every replica
  std::vector<double> tv;
  if (model.n() <= 12) {
    const auto dist = exact_distribution(model);
    std::vector<double> row(dist.probs.size(), 0.0), scratch(dist.probs.size());
    row[0] = 1.0;  // all-minus bitmask
    const Eigen::MatrixXd P = transition_matrix(model);
    for (int t = 0; t <= steps; ++t) {
      double total = 0.0;
      for (std::size_t s = 0; s < row.size(); ++s) total += std::fabs(row[s] - dist.probs[s]);
      tv.push_back(0.5 * total);
      Eigen::Map<Eigen::VectorXd> r(row.data(), row.size());
      Eigen::Map<Eigen::VectorXd> sc(scratch.data(), scratch.size());
      sc = P.transpose() * r;
      row.swap(scratch);
    }
  }

  std::vector<std::string> rows(cfg.replicas);
  parallel_for(cfg.replicas, [&](std::size_t rep) {
    Rng chain_rng(replica_seed(cfg.seed, rep), 1);
    SpinVector s = all_minus(model.n());
    std::ostringstream os;
    for (int t = 0; t <= steps; ++t) {
      os << rep << ',' << t << ',';
      if (!tv.empty()) os << fmt(tv[t]);
      os << ',' << fmt(energy(model, s)) << ',' << fmt(magnetization(s)) << '\n';
      glauber_step(s, model, chain_rng);
    }
    rows[rep] = os.str();
  });

  std::string payload = "replica,step,tv_distance,energy,magnetization\n";
  for (const auto& r : rows) payload += r;
  write_output(cfg.out, cfg.format == "json" ? csv_to_json(payload) : payload);
  return kExitOk;
}

int cmd_mix(const CommonConfig& cfg, double eps) {
  const double beta = cfg.resolve_beta();
  const GibbsModel model = sampled_model(cfg, beta);
  const ChainDiagnostics diag = chain_diagnostics(model, eps);
  std::string payload = "step,tv_distance\n";
  for (std::size_t t = 0; t < diag.tv_curve.size(); ++t)
    payload += std::to_string(t) + "," + fmt(diag.tv_curve[t]) + "\n";
  write_output(cfg.out, cfg.format == "json" ? csv_to_json(payload) : payload);
  std::printf("mixing_time=%d relaxation_time=%s\n", diag.mixing_time,
              fmt(diag.relaxation_time).c_str());
  return kExitOk;
}

nlohmann::json partition_report_json(const WeightContext& ctx, const BlockPartition& bp,
                                     const BlockThresholds& th) {
  const ValidationReport report = validate_partition(ctx, bp, th);
  nlohmann::json jr;
  jr["pass"] = report.pass;
  auto clauses = nlohmann::json::array();
  for (const auto& cl : report.clauses) {
    nlohmann::json jc;
    jc["clause"] = cl.clause;
    jc["pass"] = cl.pass;
    if (!cl.pass) {
      jc["detail"] = cl.detail;
      jc["witness"] = cl.witness;
    }
    clauses.push_back(std::move(jc));
  }
  jr["clauses"] = std::move(clauses);
  return jr;
}

int cmd_partition(const CommonConfig& cfg, int k_fine) {
  const double beta = cfg.resolve_beta();
  Rng rng(cfg.seed, 0);
  SparseGraph g = sample_gnp(cfg.n, cfg.d, rng);
  CouplingMap c = sample_couplings(g, CouplingSpec::gaussian(), rng);
  const GibbsModel model = make_model(g, c, beta);
  const GibbsModel model2 = make_model(g, c, beta);
  const double zeta = cfg.epsilon * (1.0 - 1e-4);
  const WeightContext ctx = make_weight_context(model, cfg.epsilon, cfg.d);
  const WeightContext ctx_fine = make_weight_context(model2, zeta, cfg.d);
  const BlockThresholds th = BlockThresholds::defaults(cfg.n, cfg.d, cfg.epsilon);

  nlohmann::json out;
  out["n"] = cfg.n;
  out["d"] = cfg.d;
  out["epsilon"] = cfg.epsilon;
  out["beta"] = beta;
  out["seed"] = cfg.seed;

  auto fail_json = [](const char* stage, const DecompositionFail& f) {
    nlohmann::json jf;
    jf["stage"] = stage;
    jf["condition"] = f.condition;
    jf["witness"] = f.witness;
    jf["detail"] = f.detail;
    return jf;
  };

  const DecompositionResult coarse = build_decomposition(ctx, 0, th);
  if (std::holds_alternative<DecompositionFail>(coarse)) {
    out["status"] = "fail";
    out["fail"] = fail_json("coarse", std::get<DecompositionFail>(coarse));
    write_output(cfg.out, out.dump(2) + "\n");
    return kExitPartitionFail;
  }
  const DecompositionResult fine = build_decomposition(ctx_fine, k_fine, th);
  if (std::holds_alternative<DecompositionFail>(fine)) {
    out["status"] = "fail";
    out["fail"] = fail_json("fine", std::get<DecompositionFail>(fine));
    write_output(cfg.out, out.dump(2) + "\n");
    return kExitPartitionFail;
  }
  const auto refined =
      refine_to_partition(ctx, std::get<BlockPartition>(coarse), std::get<BlockPartition>(fine));
  if (std::holds_alternative<RefineError>(refined)) {
    out["status"] = "fail";
    nlohmann::json jf;
    jf["stage"] = "refine";
    jf["detail"] = std::get<RefineError>(refined).detail;
    jf["witness"] = std::get<RefineError>(refined).witness;
    out["fail"] = std::move(jf);
    write_output(cfg.out, out.dump(2) + "\n");
    return kExitPartitionFail;
  }
  const BlockPartition& bp = std::get<BlockPartition>(refined);
  out["status"] = "ok";
  out["partition"] = nlohmann::json::parse(partition_to_json(bp));
  out["validation"] = partition_report_json(ctx, bp, th);
  write_output(cfg.out, out.dump(2) + "\n");
  return kExitOk;
}

int cmd_jsnorm(const CommonConfig& cfg) {
  const double beta = cfg.resolve_beta();
  const auto records = js_norm_experiment(cfg.n, cfg.d, cfg.epsilon, beta, cfg.replicas, cfg.seed);
  std::string payload = "replica,n,d,eps,beta,js_norm,partition_status\n";
  for (const auto& rec : records) {
    payload += std::to_string(rec.replica) + "," + std::to_string(cfg.n) + "," + fmt(cfg.d) + "," +
               fmt(cfg.epsilon) + "," + fmt(beta) + "," +
               (rec.status == "ok" ? fmt(rec.js_norm) : "") + "," + rec.status + "\n";
  }
  write_output(cfg.out, cfg.format == "json" ? csv_to_json(payload) : payload);
  return kExitOk;
}

int cmd_sqr(const CommonConfig& cfg, int ell_max, int vertices) {
  const double beta = cfg.resolve_beta();
  const GibbsModel model = sampled_model(cfg, beta);
  const WeightContext ctx = make_weight_context(model, cfg.epsilon, cfg.d);
  std::string payload = "vertex,ell,sqr,complete\n";
  const int count = std::min(vertices, model.n());
  for (int v = 0; v < count; ++v)
    for (int ell = 0; ell <= ell_max; ++ell) {
      const BudgetedValue res = sqr_sphere(ctx, v, ell);
      payload += std::to_string(v) + "," + std::to_string(ell) + "," +
                 (res.complete ? fmt(res.value) : "") + "," + (res.complete ? "1" : "0") + "\n";
    }
  write_output(cfg.out, cfg.format == "json" ? csv_to_json(payload) : payload);
  return kExitOk;
}

int cmd_iharabass(int trials, int dim, std::uint64_t seed, const std::string& out) {
  double worst = 0.0;
  std::string payload = "trial,t,residual\n";
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(replica_seed(seed, trial), 3);
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i + 1; j < dim; ++j) Q(i, j) = Q(j, i) = rng.normal();
    const NonBacktracking nb = nonbacktracking_matrix(Q.sparseView());
    const double lambda =
        std::max(spectral_radius(Eigen::MatrixXd(nb.matrix)), Q.cwiseAbs().maxCoeff());
    for (int k = 0; k < 20; ++k) {
      const double t = (2.0 * rng.uniform() - 1.0) * 0.999 / lambda;
      const double res = ihara_bass_residual(Q, t);
      worst = std::max(worst, res);
      payload += std::to_string(trial) + "," + fmt(t) + "," + fmt(res) + "\n";
    }
  }
  if (!out.empty()) write_output(out, payload);
  std::printf("max_residual=%s\n", fmt(worst).c_str());
  return kExitOk;
}

int cmd_tails(const std::string& which, const CommonConfig& cfg, double delta,
              std::uint64_t samples, int path_len, int size_cap, int gw_r, double gw_C) {
  std::string payload = "harness,params,empirical,bound,mc_sigma\n";
  if (which == "theta") {
    const double beta = cfg.beta >= 0 || cfg.beta_frac >= 0 ? cfg.resolve_beta() : beta_c(cfg.d);
    Rng rng(cfg.seed, 4);
    const auto r = theta_tail_harness(cfg.d, beta, delta, samples, rng);
    payload += "theta,d=" + fmt(cfg.d) + ";beta=" + fmt(beta) + ";delta=" + fmt(delta) + "," +
               fmt(r.empirical) + "," + fmt(r.bound) + "," + fmt(r.mc_sigma) + "\n";
  } else if (which == "gw") {
    const double beta = cfg.beta >= 0 || cfg.beta_frac >= 0 ? cfg.resolve_beta() : beta_c(cfg.d);
    const double t = cfg.d / (2.0 * 0.25) * 0.5;
    const auto r = gw_sqr_tail_harness(cfg.d, beta, gw_r, gw_C, t, samples, cfg.seed);
    payload += "gw,d=" + fmt(cfg.d) + ";beta=" + fmt(beta) + ";r=" + std::to_string(gw_r) +
               ";C=" + fmt(gw_C) + ";t=" + fmt(t) + "," + fmt(r.empirical) + "," + fmt(r.bound) +
               "," + fmt(r.mc_sigma) + "\n";
  } else if (which == "halfnormal") {
    Rng rng(cfg.seed, 5);
    const auto r = half_normal_tail_harness(cfg.n > 0 ? cfg.n : 100, 1.0, delta, samples, rng);
    payload += "halfnormal,N=" + std::to_string(cfg.n > 0 ? cfg.n : 100) +
               ";delta=" + fmt(delta) + "," + fmt(r.tail.empirical) + "," + fmt(r.tail.bound) +
               "," + fmt(r.tail.mc_sigma) + "\n";
    payload += "halfnormal_mean,N=" + std::to_string(cfg.n > 0 ? cfg.n : 100) + "," +
               fmt(r.mean_empirical) + "," + fmt(r.mean_exact) + "," + fmt(r.mean_sigma) + "\n";
  } else if (which == "upsilon") {
    const double beta = cfg.beta >= 0 || cfg.beta_frac >= 0 ? cfg.resolve_beta() : beta_c(cfg.d);
    Rng rng(cfg.seed, 6);
    const auto r = upsilon_path_harness(cfg.n, cfg.d, beta, path_len, samples, rng);
    payload += "upsilon,n=" + std::to_string(cfg.n) + ";d=" + fmt(cfg.d) +
               ";len=" + std::to_string(path_len) + "," +
               fmt(static_cast<double>(r.exceedances) /
                   std::max<std::uint64_t>(1, r.paths_sampled)) +
               "," + fmt(r.threshold) + ",\n";
  } else if (which == "smallset") {
    Rng rng(cfg.seed, 7);
    const SparseGraph g = sample_gnp(cfg.n, cfg.d, rng);
    const auto r = small_set_density_check(g, size_cap);
    payload += "smallset,n=" + std::to_string(cfg.n) + ";d=" + fmt(cfg.d) +
               ";cap=" + std::to_string(size_cap) + "," + (r.found ? "1" : "0") + ",," + "\n";
  } else {
    throw parameter_error("unknown tails harness: " + which);
  }
  write_output(cfg.out, cfg.format == "json" ? csv_to_json(payload) : payload);
  return kExitOk;
}

int cmd_localisation(const CommonConfig& cfg, int k_fine) {
  const double beta = cfg.resolve_beta();
  Rng rng(cfg.seed, 0);
  SparseGraph g = sample_gnp(cfg.n, cfg.d, rng);
  CouplingMap c = sample_couplings(g, CouplingSpec::gaussian(), rng);
  const GibbsModel model = make_model(g, c, beta);
  const GibbsModel model2 = make_model(g, c, beta);
  const double zeta = cfg.epsilon * (1.0 - 1e-4);
  const WeightContext ctx = make_weight_context(model, cfg.epsilon, cfg.d);
  const WeightContext ctx_fine = make_weight_context(model2, zeta, cfg.d);
  const BlockThresholds th = BlockThresholds::defaults(cfg.n, cfg.d, cfg.epsilon);

  nlohmann::json out;
  out["n"] = cfg.n;
  out["beta"] = beta;
  const DecompositionResult coarse = build_decomposition(ctx, 0, th);
  const DecompositionResult fine = build_decomposition(ctx_fine, k_fine, th);
  BlockPartition bp;
  if (std::holds_alternative<BlockPartition>(coarse) &&
      std::holds_alternative<BlockPartition>(fine)) {
    const auto refined = refine_to_partition(ctx, std::get<BlockPartition>(coarse),
                                             std::get<BlockPartition>(fine));
    if (std::holds_alternative<BlockPartition>(refined)) {
      bp = std::get<BlockPartition>(refined);
      out["partition_status"] = "ok";
    } else {
      out["partition_status"] = "refine-fail";
    }
  } else {
    out["partition_status"] = "decomposition-fail";
  }
  if (out["partition_status"] != "ok") {
    // all-singleton fallback so the matrices are still reportable
    bp.epsilon = cfg.epsilon;
    bp.blocks.clear();
    for (int v = 0; v < cfg.n; ++v) {
      Block s;
      s.kind = BlockKind::single;
      s.vertices = {v};
      bp.blocks.push_back(s);
    }
  }
  const auto pm = partition_matrices(interaction_matrix(g, c), bp);
  const auto loc = localisation_matrices(pm, cfg.epsilon, 0.1, cfg.n, cfg.d);
  out["js_norm"] = loc.js_norm;
  out["c_sq_min_eig"] = loc.c_sq_min_eig;
  // off-diagonal support of J_1 must sit inside H x H
  std::vector<bool> in_h(cfg.n, false);
  for (int v : pm.h_vertices) in_h[v] = true;
  const Eigen::MatrixXd j1 = loc.j_at(1.0);
  bool support_ok = true;
  for (int u = 0; u < cfg.n; ++u)
    for (int v = 0; v < cfg.n; ++v)
      if (u != v && std::fabs(j1(u, v)) > 1e-12 && !(in_h[u] && in_h[v])) support_ok = false;
  out["j1_offdiag_in_hxh"] = support_ok;
  if (cfg.n <= 12) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(cfg.n), z = Eigen::VectorXd::Zero(cfg.n);
    const Eigen::MatrixXd m1 = loc.c_sq + 1e-6 * Eigen::MatrixXd::Identity(cfg.n, cfg.n);
    out["psd_margin_t0"] = localisation_psd_margin(m1, pm.j_h, beta, h, z, 0.0);
  }
  write_output(cfg.out, out.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spinlab: sampling laboratory for diluted 2-spin models"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags win)");

  CommonConfig cfg;
  double kappa = 0.25;
  double mix_eps = kMixingEps;
  int steps = 200;
  int k_fine = 100;
  int ell_max = 3;
  int vertices = 8;
  int trials = 500;
  int dim = 6;
  double delta = 0.5;
  std::uint64_t samples = 100000;
  int path_len = 2;
  int size_cap = 8;
  int gw_r = 4;
  double gw_c = 150.0;
  std::string tails_which;

  auto add_common = [&](CLI::App* sub, bool needs_n) {
    sub->add_option("--config", config_path, "JSON config file (flags win)");
    if (needs_n) sub->add_option("--n", cfg.n, "vertex count");
    sub->add_option("--d", cfg.d, "expected degree");
    sub->add_option("--beta", cfg.beta, "inverse temperature (absolute)");
    sub->add_option("--beta-frac", cfg.beta_frac, "inverse temperature as a fraction of beta_c(d)");
    sub->add_option("--epsilon", cfg.epsilon, "weight parameter epsilon");
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--replicas", cfg.replicas, "replica count");
    sub->add_option("--out", cfg.out, "output path (atomic write); stdout if omitted");
    sub->add_option("--format", cfg.format, "csv | json");
  };

  CLI::App* betac = app.add_subcommand("betac", "print beta_c(d)");
  betac->add_option("--config", config_path, "JSON config file (flags win)");
  betac->add_option("--d", cfg.d, "expected degree");
  betac->add_option("--kappa", kappa, "target kappa (default 1/4)");

  CLI::App* betarec = app.add_subcommand("betarec", "print beta_rec(d)");
  betarec->add_option("--config", config_path, "JSON config file (flags win)");
  betarec->add_option("--d", cfg.d, "expected degree");

  CLI::App* sample = app.add_subcommand("sample", "run Glauber chains, emit step CSV");
  add_common(sample, true);
  sample->add_option("--steps", steps, "steps per replica");

  CLI::App* mix = app.add_subcommand("mix", "exact worst-start mixing diagnostics");
  add_common(mix, true);
  mix->add_option("--eps", mix_eps, "TV threshold (default 1/(2e))");

  CLI::App* partition = app.add_subcommand("partition", "build + validate a block partition");
  add_common(partition, true);
  partition->add_option("--k", k_fine, "radius k of the fine decomposition");

  CLI::App* jsnorm = app.add_subcommand("jsnorm", "replica sweep of ||J_S||_2");
  add_common(jsnorm, true);

  CLI::App* sqr = app.add_subcommand("sqr", "weighted sphere sums on an instance");
  add_common(sqr, true);
  sqr->add_option("--ell-max", ell_max, "largest sphere radius");
  sqr->add_option("--vertices", vertices, "number of vertices reported");

  CLI::App* ihara = app.add_subcommand("iharabass", "random residual sweep of the identity");
  ihara->add_option("--config", config_path, "JSON config file (flags win)");
  ihara->add_option("--trials", trials, "number of random matrices");
  ihara->add_option("--dim", dim, "matrix dimension");
  ihara->add_option("--seed", cfg.seed, "master seed");
  ihara->add_option("--out", cfg.out, "per-trial CSV path");

  CLI::App* tails = app.add_subcommand("tails", "Monte-Carlo tail harnesses");
  tails->add_option("--config", config_path, "JSON config file (flags win)");
  tails->add_option("harness", tails_which, "theta | gw | halfnormal | upsilon | smallset")
      ->required();
  tails->add_option("--n", cfg.n, "vertex count / half-normal N");
  tails->add_option("--d", cfg.d, "expected degree");
  tails->add_option("--beta", cfg.beta, "absolute inverse temperature");
  tails->add_option("--beta-frac", cfg.beta_frac, "fraction of beta_c(d)");
  tails->add_option("--delta", delta, "tail offset delta");
  tails->add_option("--samples", samples, "Monte-Carlo samples");
  tails->add_option("--path-len", path_len, "upsilon path length");
  tails->add_option("--size-cap", size_cap, "small-set size cap");
  tails->add_option("--gw-r", gw_r, "GW sphere radius");
  tails->add_option("--gw-C", gw_c, "GW tail constant C");
  tails->add_option("--seed", cfg.seed, "master seed");
  tails->add_option("--out", cfg.out, "output path");

  CLI::App* localisation = app.add_subcommand("localisation", "localisation matrices + PSD checks");
  add_common(localisation, true);
  localisation->add_option("--k", k_fine, "radius k of the fine decomposition");

  try {
    std::vector<std::string> args = merge_config_tokens(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 expects reversed token order
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "{\"error\":\"%s\"}\n", e.what());
    return kExitUsage;
  }

  try {
    const bool needs_instance = sample->parsed() || mix->parsed() || partition->parsed() ||
                                jsnorm->parsed() || sqr->parsed() || localisation->parsed();
    if ((betac->parsed() || betarec->parsed()) && !(cfg.d > 0)) {
      std::fprintf(stderr, "{\"error\":\"--d is required\"}\n");
      return kExitUsage;
    }
    if (needs_instance && (cfg.n < 1 || !(cfg.d >= 0))) {
      std::fprintf(stderr, "{\"error\":\"--n and --d are required\"}\n");
      return kExitUsage;
    }
    if (betac->parsed()) return cmd_betac(cfg.d, kappa);
    if (betarec->parsed()) return cmd_betarec(cfg.d);
    if (sample->parsed()) return cmd_sample(cfg, steps);
    if (mix->parsed()) return cmd_mix(cfg, mix_eps);
    if (partition->parsed()) return cmd_partition(cfg, k_fine);
    if (jsnorm->parsed()) return cmd_jsnorm(cfg);
    if (sqr->parsed()) return cmd_sqr(cfg, ell_max, vertices);
    if (ihara->parsed()) return cmd_iharabass(trials, dim, cfg.seed, cfg.out);
    if (tails->parsed())
      return cmd_tails(tails_which, cfg, delta, samples, path_len, size_cap, gw_r, gw_c);
    if (localisation->parsed()) return cmd_localisation(cfg, k_fine);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "{\"error\":\"%s\"}\n", e.what());
    return kExitError;
  }
  return kExitUsage;
}
