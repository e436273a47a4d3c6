#include "polyel/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "polyel/rng.hpp"

namespace polyel {

std::string_view to_string(MoveKind m) {
  switch (m) {
    case MoveKind::pivot:
      return "pivot";
    case MoveKind::global_ar:
      return "global_ar";
    case MoveKind::block:
      return "block";
  }
  return "unknown";
}

void McmcConfig::validate() const {
  const MoveWeights& w = move_weights;
  if (!(w.pivot >= 0.0) || !(w.global_ar >= 0.0) || !(w.block >= 0.0)) {
    throw ParameterError("mcmc: move weights must be nonnegative");
  }
  if (std::abs(w.pivot + w.global_ar + w.block - 1.0) > 1e-9) {
    throw ParameterError("mcmc: move weights must sum to 1");
  }
  if (!(ar_step_s > 0.0) || !(ar_step_s <= 1.0)) {
    throw ParameterError("mcmc: ar_step_s must lie in (0, 1]");
  }
  if (block_len < 1) {
    throw ParameterError("mcmc: block_len must be >= 1");
  }
  if (thinning < 1) {
    throw ParameterError("mcmc: thinning must be >= 1");
  }
  if (burn_in >= n_sweeps) {
    throw ParameterError("mcmc: burn_in must be smaller than n_sweeps");
  }
  if (audit_interval < 1 || !(audit_tolerance > 0.0)) {
    throw ParameterError("mcmc: audit interval and tolerance must be positive");
  }
  if (!(adapt_target > 0.0 && adapt_target < 1.0)) {
    throw ParameterError("mcmc: adapt_target must lie in (0, 1)");
  }
}

namespace {

constexpr std::size_t kAdaptWindow = 50;
constexpr double kMinStep = 1e-4;

MoveKind draw_move(Rng& rng, const MoveWeights& w) {
  const double u = rng.uniform();
  if (u < w.pivot) {
    return MoveKind::pivot;
  }
  if (u < w.pivot + w.global_ar) {
    return MoveKind::global_ar;
  }
  return MoveKind::block;
}

// Energy of the current state. With beta = 0 every proposal is accepted and
// the energy is only evaluated when something reads it.
class EnergyTracker {
public:
  EnergyTracker(bool lazy, const PathSample& path) : lazy_(lazy) {
    if (!lazy_) {
      value_ = coulomb_energy(path);
    }
  }

  double get(const PathSample& path) {
    if (stale_) {
      value_ = coulomb_energy(path);
      stale_ = false;
    }
    return value_;
  }
  void set(double v) {
    value_ = v;
    stale_ = false;
  }
  void invalidate() { stale_ = true; }
  bool lazy() const { return lazy_; }

private:
  bool lazy_;
  bool stale_ = false;
  double value_ = 0.0;
};

}  // namespace

ChainOutput run_chain(const ModelParams& params, const McmcConfig& cfg, const PathSample* initial) {
  params.validate();
  cfg.validate();
  if (params.drift_mu != 0.0) {
    throw ParameterError("run_chain: the target is built over the driftless measure (mu must be 0)");
  }
  const TimeGrid grid = make_grid(params);
  Rng rng(cfg.seed);

  PathSample current = initial != nullptr ? *initial : sample_path(params, rng);
  if (!(current.grid() == grid)) {
    throw ParameterError("run_chain: initial path grid does not match params");
  }
  const std::size_t n = grid.n_steps();
  const std::size_t block_len = std::min(cfg.block_len, n);
  const double beta = params.beta;
  const bool lazy = beta == 0.0 && !cfg.record_trace;

  EnergyTracker energy(lazy, current);
  PathSample proposal = current;

  ChainOutput out;
  out.samples.reserve(cfg.retained_count());
  if (cfg.record_trace) {
    out.trace.reserve(cfg.n_sweeps);
  }
  ChainStats& st = out.stats;

  double step = cfg.ar_step_s;
  std::size_t window_prop = 0, window_acc = 0;
  std::size_t accepted_since_audit = 0;
  std::size_t retained = 0;

  for (std::size_t sweep = 0; sweep < cfg.n_sweeps; ++sweep) {
    const MoveKind move = draw_move(rng, cfg.move_weights);
    const auto mi = static_cast<std::size_t>(move);
    proposal = current;

    double delta = 0.0;
    double new_energy = 0.0;
    bool have_new_energy = false;
    std::uint64_t clamped = 0;

    switch (move) {
      case MoveKind::pivot: {
        const std::size_t k = static_cast<std::size_t>(rng.uniform_int(1, n - 1));
        const Rotation rot = random_rotation(rng);
        proposal.rotate_tail(k, rot);
        if (!lazy) {
          delta = coulomb_delta_tail(current, proposal, k, &clamped);
        }
        break;
      }
      case MoveKind::global_ar:
        global_autoregressive_in_place(proposal, step, rng, params);
        break;
      case MoveKind::block: {
        const std::size_t i0 = static_cast<std::size_t>(rng.uniform_int(1, n - block_len + 1));
        resample_block_in_place(proposal, i0, block_len, rng, params);
        break;
      }
    }
    if (move != MoveKind::pivot && !lazy) {
      const EnergyResult e = coulomb_energy_diag(proposal);
      new_energy = e.value;
      have_new_energy = true;
      clamped = e.clamped_pairs;
      delta = new_energy - energy.get(current);
    }
    st.clamp_events += clamped;

    bool accept = true;
    if (beta > 0.0 && delta > 0.0) {
      accept = rng.uniform() < std::exp(-beta * delta);
    }

    ++st.proposed[mi];
    if (move == MoveKind::global_ar) {
      ++window_prop;
    }
    if (accept) {
      ++st.accepted[mi];
      if (move == MoveKind::global_ar) {
        ++window_acc;
      }
      std::swap(current, proposal);
      if (lazy) {
        energy.invalidate();
      } else if (have_new_energy) {
        energy.set(new_energy);
      } else {
        energy.set(energy.get(current) + delta);
        ++accepted_since_audit;
      }
      if (!lazy && accepted_since_audit >= cfg.audit_interval) {
        const double full = coulomb_energy(current);
        const double drift = std::abs(full - energy.get(current)) / std::abs(full);
        st.max_audit_drift = std::max(st.max_audit_drift, drift);
        ++st.audits;
        if (drift > cfg.audit_tolerance) {
          throw ConsistencyError("run_chain: incremental energy drifted by " + std::to_string(drift) +
                                 " (relative) from a full recomputation");
        }
        energy.set(full);
        accepted_since_audit = 0;
      }
    }

    if (cfg.adapt && sweep < cfg.burn_in && window_prop >= kAdaptWindow) {
      const double rate = static_cast<double>(window_acc) / static_cast<double>(window_prop);
      step = std::clamp(step * std::exp(rate - cfg.adapt_target), kMinStep, 1.0);
      window_prop = window_acc = 0;
    }

    if (cfg.record_trace) {
      out.trace.push_back({sweep, energy.get(current), radius_gyration_centered(current),
                           current.endpoint_x1(), move, accept});
    }
    if (sweep >= cfg.burn_in && (sweep - cfg.burn_in + 1) % cfg.thinning == 0) {
      out.samples.push_back(
          {energy.get(current), radius_gyration_centered(current), current.endpoint_x1(), 0});
      if (cfg.retain_paths_every > 0 && retained % cfg.retain_paths_every == 0) {
        out.retained_paths.push_back(current);
      }
      ++retained;
    }
  }

  for (std::size_t m = 0; m < kMoveKinds; ++m) {
    st.acceptance[m] =
        st.proposed[m] == 0 ? 0.0 : static_cast<double>(st.accepted[m]) / static_cast<double>(st.proposed[m]);
  }
  st.final_ar_step_s = step;
  if (out.samples.size() >= 100) {
    std::vector<double> rg(out.samples.size());
    std::transform(out.samples.begin(), out.samples.end(), rg.begin(),
                   [](const PathFunctionals& f) { return f.rg; });
    const AutocorrResult ac = effective_sample_size(rg);
    st.iact = ac.iact * static_cast<double>(cfg.thinning);
    st.ess = ac.ess;
    st.iact_degenerate = ac.degenerate;
  } else {
    st.iact = 0.5 * static_cast<double>(cfg.thinning);
    st.ess = static_cast<double>(out.samples.size());
  }
  out.final_path = std::move(current);
  return out;
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace) {
  out << "sweep,coulomb,rg,endpoint_x1,move,accepted\n";
  char buf[200];
  for (const TraceRow& r : trace) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%s,%d\n", r.sweep, r.coulomb, r.rg,
                  r.endpoint_x1, std::string(to_string(r.move)).c_str(), r.accepted ? 1 : 0);
    out << buf;
  }
}

Estimate reweighted_event_prob(std::span<const PathFunctionals> prior_samples, double beta,
                               const EventPredicate& predicate) {
  if (!(beta >= 0.0)) {
    throw ParameterError("reweighted_event_prob: beta must be >= 0");
  }
  if (prior_samples.empty()) {
    throw ParameterError("reweighted_event_prob: no samples");
  }
  std::vector<double> logw(prior_samples.size()), ind(prior_samples.size());
  for (std::size_t i = 0; i < prior_samples.size(); ++i) {
    logw[i] = -beta * prior_samples[i].coulomb;
    ind[i] = predicate(prior_samples[i].rg) ? 1.0 : 0.0;
  }
  const WeightedMean wm = weighted_mean(logw, ind);
  Estimate e;
  e.value = wm.value;
  e.std_error = wm.std_error;
  e.n_effective = wm.weight_ess;
  e.method = Method::reweighted;
  if (wm.weight_ess < 0.01 * static_cast<double>(prior_samples.size())) {
    e.flags.emplace_back("unreliable");
  }
  return e;
}

}  // namespace polyel
