#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "polyel/functionals.hpp"
#include "polyel/model.hpp"
#include "polyel/path.hpp"
#include "polyel/stats.hpp"

namespace polyel {

enum class MoveKind : std::uint8_t { pivot = 0, global_ar = 1, block = 2 };
inline constexpr std::size_t kMoveKinds = 3;

std::string_view to_string(MoveKind m);

struct MoveWeights {
  double pivot = 0.4;
  double global_ar = 0.4;
  double block = 0.2;
};

/// Metropolis sampler settings. One sweep is one proposal drawn from the
/// move mixture.
struct McmcConfig {
  MoveWeights move_weights;
  double ar_step_s = 0.5;
  std::size_t block_len = 16;  // capped at n_steps
  std::size_t n_sweeps = 10000;
  std::size_t burn_in = 1000;
  std::size_t thinning = 1;
  SeedSpec seed;
  bool adapt = true;  // tune ar_step_s toward adapt_target during burn-in only
  double adapt_target = 0.3;
  bool record_trace = false;
  std::size_t retain_paths_every = 0;  // keep every k-th retained path; 0 = none
  std::size_t audit_interval = 1000;   // accepted moves between full energy recomputations
  double audit_tolerance = 1e-6;       // relative

  void validate() const;
  std::size_t retained_count() const { return (n_sweeps - burn_in) / thinning; }
};

struct ChainStats {
  std::array<std::uint64_t, kMoveKinds> proposed{};
  std::array<std::uint64_t, kMoveKinds> accepted{};
  std::array<double, kMoveKinds> acceptance{};  // accepted / proposed (0 if none)
  double iact = 0.5;                            // of the retained radius series, in sweeps
  double ess = 0.0;
  bool iact_degenerate = false;
  std::uint64_t clamp_events = 0;
  double final_ar_step_s = 0.0;
  std::uint64_t audits = 0;
  double max_audit_drift = 0.0;  // largest relative mismatch seen by the audit
};

struct TraceRow {
  std::size_t sweep = 0;
  double coulomb = 0.0;
  double rg = 0.0;
  double endpoint_x1 = 0.0;
  MoveKind move = MoveKind::pivot;
  bool accepted = false;
};

struct ChainOutput {
  std::vector<PathFunctionals> samples;
  ChainStats stats;
  PathSample final_path;
  std::vector<TraceRow> trace;
  std::vector<PathSample> retained_paths;
};

/// Samples the discretized penalized measure proportional to
/// exp(-beta * coulomb) times the Wiener measure. Proposals preserve the
/// Wiener measure, so a proposal with energy change delta is accepted with
/// probability min(1, exp(-beta * delta)).
///
/// Requires params.drift_mu == 0. Starts from `initial` when given (restart),
/// otherwise from a fresh prior path. Throws ConsistencyError when the
/// incremental energy drifts from a full recomputation by more than
/// cfg.audit_tolerance.
ChainOutput run_chain(const ModelParams& params, const McmcConfig& cfg,
                      const PathSample* initial = nullptr);

/// CSV columns: sweep, coulomb, rg, endpoint_x1, move, accepted.
void write_trace_csv(std::ostream& out, std::span<const TraceRow> trace);

/// Self-normalized reweighting of prior samples to the penalized measure:
/// sum w_i 1_A(i) / sum w_i with w_i = exp(-beta coulomb_i). Flags
/// "unreliable" when the weight ESS is below 1% of the sample count.
Estimate reweighted_event_prob(std::span<const PathFunctionals> prior_samples, double beta,
                               const EventPredicate& predicate);

}  // namespace polyel
