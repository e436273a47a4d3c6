#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "polyel/path.hpp"

namespace polyel {

/// Distances below this are clamped in every inverse-distance sum.
inline constexpr double kMinPairDistance = 1e-12;

/// More than this fraction of clamped pairs is a degenerate path.
inline constexpr double kMaxClampedFraction = 1e-3;

/// Read-only view of node positions (structure of arrays). Unlike
/// PathSample it may hold any number of nodes, including 1 or 2.
struct NodeView {
  std::span<const double> x, y, z;

  std::size_t size() const { return x.size(); }
};

inline NodeView nodes_of(const PathSample& p) { return {p.xs(), p.ys(), p.zs()}; }

/// Coulomb energy, gyration radius and endpoint of one path.
struct PathFunctionals {
  double coulomb = 0.0;
  double rg = 0.0;
  double endpoint_x1 = 0.0;
  std::uint64_t clamped_pairs = 0;
};

struct EnergyResult {
  double value = 0.0;
  std::uint64_t clamped_pairs = 0;
  bool clamped() const { return clamped_pairs != 0; }
};

/// dt^2 * sum over ordered pairs i != j of 1 / |x_i - x_j|.
///
/// Each unordered pair is evaluated once and doubled. Rows are reduced in
/// fixed 256-row blocks, so the bits do not depend on worker_count().
/// Throws DegeneratePathError when more than 0.1% of pairs are clamped.
EnergyResult coulomb_energy_diag(NodeView nodes, double dt);
EnergyResult coulomb_energy_diag(const PathSample& path);
double coulomb_energy(const PathSample& path);

/// coulomb_energy(apply_pivot(path, k, rotation)) - coulomb_energy(path),
/// touching only pairs (head, tail) with head = 0..k and tail = k+1..n.
double coulomb_delta_pivot(const PathSample& path, std::size_t k, const Rotation& rotation);

/// Same quantity when the pivoted path is already built. `proposal` must
/// agree with `path` on nodes 0..k.
double coulomb_delta_tail(const PathSample& path, const PathSample& proposal, std::size_t k,
                          std::uint64_t* clamped_pairs = nullptr);

/// sqrt( (1/N^2) sum_{i,j} |x_i - x_j|^2 ) over all N nodes (O(N^2)).
double radius_gyration_pairwise(NodeView nodes);
double radius_gyration_pairwise(const PathSample& path);

/// sqrt( 2 (1/N) sum_i |x_i - centroid|^2 ) (O(N)); equal to the pairwise form.
double radius_gyration_centered(NodeView nodes);
double radius_gyration_centered(const PathSample& path);

/// Discrete Holder invariant over the N = n(n+1) off-diagonal ordered pairs:
/// m2 = mean |d|^2, m_neg1 = mean 1/|d|, product = sqrt(m2) * m_neg1 >= 1.
struct HolderCheck {
  double m2 = 0.0;
  double m_neg1 = 0.0;
  double product = 0.0;
  std::uint64_t clamped_pairs = 0;
};
HolderCheck holder_check(NodeView nodes);
HolderCheck holder_check(const PathSample& path);

/// -beta * coulomb_energy(path). The Gibbs weight itself is never formed.
double log_gibbs_weight(const PathSample& path, double beta);

/// All three functionals with the O(N) gyration form.
PathFunctionals evaluate(const PathSample& path);

}  // namespace polyel
