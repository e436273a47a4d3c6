#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "polyel/error.hpp"

namespace polyel {

/// Model and discretization parameters.
///
/// `drift_mu` is the magnitude of a constant drift along the first axis;
/// 0 selects the plain Wiener measure.
struct ModelParams {
  double beta = 0.0;
  double horizon_T = 1.0;
  std::size_t n_steps = 2;
  double drift_mu = 0.0;

  double dt() const { return horizon_T / static_cast<double>(n_steps); }

  /// Throws ParameterError unless beta >= 0, T > 0, n >= 2 and dt is finite.
  void validate() const;
};

/// Uniform grid t_i = i * dt on [0, T], i = 0..n_steps.
class TimeGrid {
public:
  TimeGrid() = default;

  double horizon() const { return horizon_; }
  std::size_t n_steps() const { return n_steps_; }
  std::size_t node_count() const { return n_steps_ + 1; }
  double dt() const { return dt_; }

  /// Node time; the last node is exactly the horizon.
  double time(std::size_t i) const {
    return i == n_steps_ ? horizon_ : static_cast<double>(i) * dt_;
  }

  friend TimeGrid make_grid(double horizon_T, std::size_t n_steps);
  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
  double horizon_ = 0.0;
  std::size_t n_steps_ = 0;
  double dt_ = 0.0;
};

TimeGrid make_grid(double horizon_T, std::size_t n_steps);
inline TimeGrid make_grid(const ModelParams& p) { return make_grid(p.horizon_T, p.n_steps); }

/// Identifies one independent random stream.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  /// A stream derived from this one; children of distinct parents or with
  /// distinct indices never share a key.
  SeedSpec child(std::uint64_t index) const;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

enum class EventKind { radius_below, radius_above };

struct EventPredicate {
  EventKind kind = EventKind::radius_above;
  double threshold = 0.0;

  bool operator()(double radius) const {
    return kind == EventKind::radius_below ? radius < threshold : radius > threshold;
  }
};

/// Thresholds of the small-radius and large-radius events:
/// low = c1 T / ln T, high = c2 T sqrt(ln T). Requires T > 1.
std::pair<double, double> event_thresholds(const ModelParams& params, double c1, double c2);

}  // namespace polyel
