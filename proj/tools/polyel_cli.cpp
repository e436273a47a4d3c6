// polyel: command-line front end for sampling, energies, chains, estimators,
// bound tables and config-driven experiments.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polyel/error.hpp"
#include "polyel/estimators.hpp"
#include "polyel/functionals.hpp"
#include "polyel/harness.hpp"
#include "polyel/mcmc.hpp"
#include "polyel/parallel.hpp"
#include "polyel/path.hpp"
#include "polyel/report.hpp"
#include "polyel/simd/pair_kernels.hpp"
#include "polyel/theory.hpp"

using namespace polyel;
using nlohmann::json;

namespace {

struct Common {
  double T = 1.0;
  std::size_t n = 256;
  double beta = 0.0;
  double mu = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  int threads = 1;
  std::string kernel = "auto";
};

enum Flags : unsigned {
  kT = 1u << 0,
  kN = 1u << 1,
  kBeta = 1u << 2,
  kMu = 1u << 3,
  kSeed = 1u << 4,
};

void add_common(CLI::App* sub, Common& c, unsigned which) {
  if (which & kT) {
    sub->add_option("--T", c.T, "Horizon T > 0")->capture_default_str();
  }
  if (which & kN) {
    sub->add_option("--n", c.n, "Number of time steps (>= 2)")->capture_default_str();
  }
  if (which & kBeta) {
    sub->add_option("--beta", c.beta, "Coupling beta >= 0")->capture_default_str();
  }
  if (which & kMu) {
    sub->add_option("--mu", c.mu, "Drift along the first axis")->capture_default_str();
  }
  if (which & kSeed) {
    sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  }
  sub->add_option("--out", c.out, "Output file (sweep: output directory); env POLYEL_OUT");
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker count; env POLYEL_THREADS")->check(CLI::Range(1, 1024));
  sub->add_option("--kernel", c.kernel, "Pair kernel variant")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
      ->capture_default_str();
}

ModelParams params_of(const Common& c) {
  ModelParams p;
  p.horizon_T = c.T;
  p.n_steps = c.n;
  p.beta = c.beta;
  p.drift_mu = c.mu;
  p.validate();
  return p;
}

std::string num(double v) { return format_double(v); }

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Writes to --out when given, otherwise stdout.
void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) {
    throw ParameterError("cannot write " + c.out);
  }
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Key/value table for single-record outputs.
std::string kv_csv(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string s = "key,value\n";
  for (const auto& [k, v] : rows) {
    s += k + "," + v + "\n";
  }
  return s;
}

// ---------------------------------------------------------------------------

int cmd_sample(const Common& c) {
  const ModelParams p = params_of(c);
  const PathSample path = sample_path(p, SeedSpec{c.seed, 0});
  if (c.format == "json") {
    json nodes = json::array();
    for (std::size_t i = 0; i < path.node_count(); ++i) {
      const Vec3 x = path.position(i);
      nodes.push_back({{"i", i}, {"t", path.grid().time(i)}, {"x", x.x}, {"y", x.y}, {"z", x.z}});
    }
    emit(c, dump({{"T", c.T}, {"n", c.n}, {"mu", c.mu}, {"seed", c.seed}, {"nodes", nodes}}));
  } else {
    std::ostringstream s;
    write_path_csv(s, path);
    emit(c, s.str());
  }
  return kExitOk;
}

int cmd_energy(const Common& c, const std::string& path_file) {
  PathSample path;
  if (!path_file.empty()) {
    std::ifstream in(path_file);
    if (!in) {
      throw ParameterError("cannot read " + path_file);
    }
    path = read_path_csv(in);
  } else {
    path = sample_path(params_of(c), SeedSpec{c.seed, 0});
  }
  if (!(c.beta >= 0.0) || !std::isfinite(c.beta)) {
    throw ParameterError("beta must be finite and >= 0");
  }
  const EnergyResult e = coulomb_energy_diag(path);
  const HolderCheck h = holder_check(path);
  const double rg = radius_gyration_pairwise(path);
  const double rg_c = radius_gyration_centered(path);
  const double logw = c.beta == 0.0 ? 0.0 : -c.beta * e.value;
  if (c.format == "json") {
    emit(c, dump({{"T", path.grid().horizon()},
                  {"n", path.n_steps()},
                  {"beta", c.beta},
                  {"coulomb", e.value},
                  {"rg", rg},
                  {"rg_centered", rg_c},
                  {"endpoint_x1", path.endpoint_x1()},
                  {"holder_m2", h.m2},
                  {"holder_m_neg1", h.m_neg1},
                  {"holder_product", h.product},
                  {"log_gibbs_weight", logw},
                  {"clamped_pairs", e.clamped_pairs}}));
  } else {
    emit(c, kv_csv({{"T", num(path.grid().horizon())},
                    {"n", std::to_string(path.n_steps())},
                    {"beta", num(c.beta)},
                    {"coulomb", num(e.value)},
                    {"rg", num(rg)},
                    {"rg_centered", num(rg_c)},
                    {"endpoint_x1", num(path.endpoint_x1())},
                    {"holder_m2", num(h.m2)},
                    {"holder_m_neg1", num(h.m_neg1)},
                    {"holder_product", num(h.product)},
                    {"log_gibbs_weight", num(logw)},
                    {"clamped_pairs", std::to_string(e.clamped_pairs)}}));
  }
  return kExitOk;
}

int cmd_mcmc(const Common& c, McmcConfig mc, const std::string& trace_file) {
  const ModelParams p = params_of(c);
  mc.seed = SeedSpec{c.seed, 0};
  mc.record_trace = !trace_file.empty();
  mc.validate();
  const ChainOutput out = run_chain(p, mc);
  if (!trace_file.empty()) {
    std::ofstream f(trace_file, std::ios::binary);
    if (!f) {
      throw ParameterError("cannot write " + trace_file);
    }
    write_trace_csv(f, out.trace);
  }
  std::vector<double> energy, rg;
  for (const PathFunctionals& s : out.samples) {
    energy.push_back(s.coulomb);
    rg.push_back(s.rg);
  }
  const MeanSe me = mean_se(energy), mr = mean_se(rg);
  const double ess = std::max(1.0, out.stats.ess);
  const ChainStats& st = out.stats;
  std::vector<std::pair<std::string, std::string>> rows{
      {"T", num(c.T)},
      {"n", std::to_string(c.n)},
      {"beta", num(c.beta)},
      {"sweeps", std::to_string(mc.n_sweeps)},
      {"retained", std::to_string(out.samples.size())},
      {"mean_coulomb", num(me.mean)},
      {"se_coulomb", num(me.std_dev / std::sqrt(ess))},
      {"mean_rg", num(mr.mean)},
      {"se_rg", num(mr.std_dev / std::sqrt(ess))},
      {"iact", num(st.iact)},
      {"ess", num(st.ess)},
      {"iact_degenerate", st.iact_degenerate ? "1" : "0"},
      {"final_ar_step_s", num(st.final_ar_step_s)},
      {"clamp_events", std::to_string(st.clamp_events)},
      {"audits", std::to_string(st.audits)},
      {"max_audit_drift", num(st.max_audit_drift)}};
  for (std::size_t k = 0; k < kMoveKinds; ++k) {
    const std::string name(to_string(static_cast<MoveKind>(k)));
    rows.push_back({"proposed_" + name, std::to_string(st.proposed[k])});
    rows.push_back({"accepted_" + name, std::to_string(st.accepted[k])});
    rows.push_back({"acceptance_" + name, num(st.acceptance[k])});
  }
  if (c.format == "json") {
    json j = json::object();
    for (const auto& [k, v] : rows) {
      char* end = nullptr;
      const double d = std::strtod(v.c_str(), &end);
      j[k] = (end != nullptr && *end == '\0') ? jnum(d) : json(v);
    }
    j["config"] = mcmc_to_json(mc);
    emit(c, dump(j));
  } else {
    emit(c, kv_csv(rows));
  }
  return kExitOk;
}

int cmd_estimate_z(const Common& c, const std::string& method, std::size_t m, McmcConfig mc,
                   std::vector<double> grid, std::size_t grid_points) {
  ModelParams p = params_of(c);
  p.drift_mu = 0.0;
  struct Row {
    Estimate est;
    double mu;
    double bias = std::nan("");
  };
  std::vector<Row> rows;
  const SeedSpec base{c.seed, 0};
  if (method == "naive" || method == "all") {
    rows.push_back({z_naive(p, m, base.child(0)), 0.0});
  }
  if (method == "girsanov" || method == "all") {
    rows.push_back({z_girsanov(p, c.mu, m, base.child(1)), c.mu});
  }
  if (method == "thermo" || method == "all") {
    if (grid.empty()) {
      grid = default_thermo_grid(p.beta, grid_points);
    }
    if (grid.back() != p.beta) {
      throw ParameterError("--beta-grid must end at --beta");
    }
    mc.seed = base.child(1000);
    const ThermoResult th = z_thermo(p, grid, mc);
    rows.push_back({th.log_z, 0.0, th.trapezoid_bias_bound});
  }
  if (c.format == "json") {
    json recs = json::array();
    for (const Row& r : rows) {
      json j = estimate_record(r.est, p, r.mu);
      j["trapezoid_bias_bound"] = jnum(r.bias);
      recs.push_back(std::move(j));
    }
    emit(c, dump({{"estimates", recs}, {"seed", c.seed}, {"oracle_small_beta", theory::small_beta_z(c.T, c.beta)}}));
  } else {
    std::string s = "method,T,n,beta,mu,value,log_domain,std_error,n_effective,flags,trapezoid_bias_bound\n";
    for (const Row& r : rows) {
      std::string flags;
      for (const std::string& f : r.est.flags) {
        flags += (flags.empty() ? "" : ";") + f;
      }
      s += std::string(to_string(r.est.method)) + "," + num(c.T) + "," + std::to_string(c.n) + "," + num(c.beta) +
           "," + num(r.mu) + "," + num(r.est.value) + "," + (r.est.log_domain ? "1" : "0") + "," +
           num(r.est.std_error) + "," + num(r.est.n_effective) + "," + flags + "," + num(r.bias) + "\n";
    }
    emit(c, s);
  }
  return kExitOk;
}

int cmd_verify_bounds(const Common& c, double c1, double c2) {
  if (!(c.T > 0.0) || !std::isfinite(c.T)) {
    throw ParameterError("--T must be finite and > 0");
  }
  if (!(c.beta > 0.0) || !std::isfinite(c.beta)) {
    throw ParameterError("--beta must be finite and > 0");
  }
  if (!(c1 > 0.0)) {
    throw ParameterError("--c1 must be > 0");
  }
  if (c2 <= 0.0) {
    c2 = theory::default_c2(c.beta);
  }
  const double T = c.T, beta = c.beta;
  struct Row {
    std::string name;
    double value;
    std::string note;
  };
  std::vector<Row> rows;
  auto add = [&](std::string name, auto&& fn) {
    try {
      rows.push_back({std::move(name), fn(), ""});
    } catch (const DomainError& e) {
      rows.push_back({std::move(name), std::nan(""), e.what()});
    }
  };
  add("window_low", [&] { return theory::window(T, beta, c1, c2).low; });
  add("window_high", [&] { return theory::window(T, beta, c1, c2).high; });
  add("window_valid", [&] { return theory::window(T, beta, c1, c2).valid ? 1.0 : 0.0; });
  add("bound_p_less", [&] { return theory::bound_p_less(T, beta, c1); });
  add("log_bound_p_less", [&] { return theory::log_bound_p_less(T, beta, c1); });
  add("bound_p_greater", [&] { return theory::bound_p_greater(T, c2); });
  add("log_bound_p_greater", [&] { return theory::log_bound_p_greater(T, c2); });
  add("bound_z_lower", [&] { return theory::bound_z_lower(T, beta); });
  add("log_bound_z_lower", [&] { return theory::log_bound_z_lower(T, beta); });
  add("bound_z_lower_audited", [&] { return theory::bound_z_lower_audited(T, beta); });
  add("log_bound_z_lower_audited", [&] { return theory::log_bound_z_lower_audited(T, beta); });
  add("bound_q_less", [&] { return theory::bound_q_less(T, beta, c1); });
  add("log_bound_q_less", [&] { return theory::log_bound_q_less(T, beta, c1); });
  add("bound_q_greater", [&] { return theory::bound_q_greater(T, beta, c2); });
  add("log_bound_q_greater", [&] { return theory::log_bound_q_greater(T, beta, c2); });
  const theory::I1Result i1 = theory::i1_exact(T);
  rows.push_back({"i1_exact", i1.exact, ""});
  rows.push_back({"i1_outer_style", i1.outer_style, ""});
  rows.push_back({"i1_chain_bound", theory::i1_chain_bound(T), ""});
  rows.push_back({"i1_audited_bound", theory::i1_audited_bound(T), ""});
  add("i1_literal_bound", [&] { return theory::i1_literal_bound(T); });
  rows.push_back({"small_beta_z", theory::small_beta_z(T, beta), ""});
  if (c.format == "json") {
    json j = {{"T", T}, {"beta", beta}, {"c1", c1}, {"c2", c2}};
    json b = json::object();
    for (const Row& r : rows) {
      b[r.name] = jnum(r.value);
    }
    j["bounds"] = b;
    emit(c, dump(j));
  } else {
    std::string s = "name,value,note\n";
    s += "T," + num(T) + ",\nbeta," + num(beta) + ",\nc1," + num(c1) + ",\nc2," + num(c2) + ",\n";
    for (const Row& r : rows) {
      s += r.name + "," + num(r.value) + "," + r.note + "\n";
    }
    emit(c, s);
  }
  return kExitOk;
}

int cmd_sweep(const Common& c, const std::string& config_file, bool out_given, bool format_given) {
  std::ifstream in(config_file);
  if (!in) {
    throw ParameterError("cannot read " + config_file);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg = ExperimentConfig::from_json(j);
  if (out_given) {
    cfg.output_dir = c.out;
  }
  if (format_given) {
    cfg.format = c.format;
  }
  cfg.validate();
  const ExperimentReport rep = run_experiment(cfg);
  rep.write(cfg.output_dir, cfg.format);
  std::cout << (cfg.format == "json" ? dump(rep.to_json()) : rep.to_csv());
  std::size_t failed = 0;
  for (const Check& ch : rep.checks) {
    if (!ch.passed) {
      ++failed;
      std::cerr << (ch.fatal ? "FAIL " : "note ") << ch.name << ": " << ch.detail << "\n";
    }
  }
  std::cerr << rep.kind << ": " << rep.rows.size() << " rows, " << rep.checks.size() << " checks, " << failed
            << " not passed, " << rep.cell_failures << " cell failures\n";
  return rep.exit_status();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polyelectrolyte path sampler and estimators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", POLYEL_VERSION);

  Common c;

  CLI::App* sample = app.add_subcommand("sample", "Sample one path and print its nodes");
  add_common(sample, c, kT | kN | kMu | kSeed);

  CLI::App* energy = app.add_subcommand("energy", "Coulomb energy, gyration radius and Holder invariant of a path");
  add_common(energy, c, kT | kN | kBeta | kMu | kSeed);
  std::string path_file;
  energy->add_option("--path", path_file, "Path CSV (i,t,x,y,z); sampled from --T/--n/--mu/--seed if absent")
      ->check(CLI::ExistingFile);

  McmcConfig mc;
  std::string trace_file;
  auto add_mcmc = [&](CLI::App* sub) {
    sub->add_option("--sweeps", mc.n_sweeps, "Proposals in total")->capture_default_str();
    sub->add_option("--burn-in", mc.burn_in, "Proposals discarded before sampling")->capture_default_str();
    sub->add_option("--thinning", mc.thinning, "Keep every k-th sample")->capture_default_str();
    sub->add_option("--ar-step", mc.ar_step_s, "Initial autoregressive step s in (0, 1]")->capture_default_str();
    sub->add_option("--block-len", mc.block_len, "Block resample length")->capture_default_str();
    sub->add_option("--w-pivot", mc.move_weights.pivot, "Pivot move weight")->capture_default_str();
    sub->add_option("--w-global-ar", mc.move_weights.global_ar, "Autoregressive move weight")->capture_default_str();
    sub->add_option("--w-block", mc.move_weights.block, "Block move weight")->capture_default_str();
    sub->add_flag("!--no-adapt", mc.adapt, "Disable burn-in step adaptation");
    sub->add_option("--audit-interval", mc.audit_interval, "Accepted moves between energy audits")
        ->capture_default_str();
  };

  CLI::App* mcmc = app.add_subcommand("mcmc", "Run one Metropolis chain on the penalized measure");
  add_common(mcmc, c, kT | kN | kBeta | kSeed);
  add_mcmc(mcmc);
  mcmc->add_option("--trace", trace_file, "Write the per-sweep trace CSV here");

  CLI::App* estz = app.add_subcommand("estimate-z", "Estimate the partition function");
  add_common(estz, c, kT | kN | kBeta | kMu | kSeed);
  std::string method = "all";
  std::size_t replicates = 100000;
  std::vector<double> beta_grid;
  std::size_t grid_points = 3;
  estz->add_option("--method", method, "Estimator")
      ->check(CLI::IsMember({"naive", "girsanov", "thermo", "all"}))
      ->capture_default_str();
  estz->add_option("--replicates", replicates, "Paths for naive and drifted estimators")->capture_default_str();
  estz->add_option("--beta-grid", beta_grid, "Thermodynamic integration grid (starts at 0, ends at --beta)")
      ->delimiter(',');
  estz->add_option("--grid-points", grid_points, "Default grid size when --beta-grid is absent")
      ->capture_default_str();
  add_mcmc(estz);

  CLI::App* vb = app.add_subcommand("verify-bounds", "Closed-form bounds, window and I1 audit");
  add_common(vb, c, kT | kBeta);
  double c1 = theory::kDefaultC1, c2 = 0.0;
  vb->add_option("--c1", c1, "Small-radius constant")->capture_default_str();
  vb->add_option("--c2", c2, "Large-radius constant (default 7 sqrt(beta))");

  CLI::App* sweep = app.add_subcommand("sweep", "Run an experiment from a JSON config");
  add_common(sweep, c, 0);
  std::string config_file;
  sweep->add_option("--config", config_file, "Experiment config JSON")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  CLI::App* active = app.get_subcommands().front();
  const bool threads_given = active->count("--threads") > 0;
  const bool out_given = active->count("--out") > 0;
  const bool format_given = active->count("--format") > 0;

  try {
    if (!threads_given) {
      if (const char* env = std::getenv("POLYEL_THREADS")) {
        try {
          c.threads = std::stoi(env);
        } catch (const std::exception&) {
          throw ParameterError("POLYEL_THREADS must be an integer");
        }
        if (c.threads < 1) {
          throw ParameterError("POLYEL_THREADS must be >= 1");
        }
      }
    }
    bool out_set = out_given;
    if (!out_given) {
      if (const char* env = std::getenv("POLYEL_OUT")) {
        c.out = env;
        out_set = true;
      }
    }
    set_worker_count(c.threads);
    if (!simd::select_kernels(c.kernel.c_str())) {
      throw ParameterError("pair kernel '" + c.kernel + "' is not available on this machine");
    }

    if (active == sample) {
      return cmd_sample(c);
    }
    if (active == energy) {
      return cmd_energy(c, path_file);
    }
    if (active == mcmc) {
      return cmd_mcmc(c, mc, trace_file);
    }
    if (active == estz) {
      return cmd_estimate_z(c, method, replicates, mc, beta_grid, grid_points);
    }
    if (active == vb) {
      return cmd_verify_bounds(c, c1, c2);
    }
    return cmd_sweep(c, config_file, out_set, format_given);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ConsistencyError& e) {
    std::cerr << "consistency error: " << e.what() << "\n";
    return kExitConsistency;
  } catch (const DegeneratePathError& e) {
    std::cerr << "degenerate path: " << e.what() << "\n";
    return kExitCellFailure;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitConsistency;
  }
}
