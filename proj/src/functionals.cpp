#include "polyel/functionals.hpp"

#include <cmath>
#include <string>

#include "polyel/parallel.hpp"
#include "polyel/simd/pair_kernels.hpp"

namespace polyel {

namespace {

simd::PointsSoA soa(NodeView v) { return {v.x.data(), v.y.data(), v.z.data(), v.size()}; }

// Unordered pairs i < j, reduced in fixed row blocks.
simd::PairAccum upper_pair_sums(NodeView nodes) {
  const simd::KernelTable& k = simd::active_kernels();
  const simd::PointsSoA pts = soa(nodes);
  return blocked_row_reduce<simd::PairAccum>(pts.size, [&](std::size_t i) {
    return k.row_pair(pts.x[i], pts.y[i], pts.z[i], pts.subrange(i + 1, pts.size), kMinPairDistance);
  });
}

void check_clamped(std::uint64_t clamped, std::uint64_t unordered_pairs) {
  if (clamped == 0) {
    return;
  }
  if (static_cast<double>(clamped) > kMaxClampedFraction * static_cast<double>(unordered_pairs)) {
    throw DegeneratePathError("degenerate path: " + std::to_string(clamped) + " of " +
                              std::to_string(unordered_pairs) + " node pairs closer than 1e-12");
  }
}

std::uint64_t unordered_pairs(std::size_t n) {
  return n < 2 ? 0 : static_cast<std::uint64_t>(n) * (n - 1) / 2;
}

struct DeltaAccum {
  double new_inv = 0.0;
  double old_inv = 0.0;
  std::uint64_t clamped = 0;

  DeltaAccum& operator+=(const DeltaAccum& o) {
    new_inv += o.new_inv;
    old_inv += o.old_inv;
    clamped += o.clamped;
    return *this;
  }
};

}  // namespace

EnergyResult coulomb_energy_diag(NodeView nodes, double dt) {
  const simd::PairAccum acc = upper_pair_sums(nodes);
  check_clamped(acc.clamped, unordered_pairs(nodes.size()));
  return {dt * dt * (2.0 * acc.inv_sum), acc.clamped};
}

EnergyResult coulomb_energy_diag(const PathSample& path) {
  return coulomb_energy_diag(nodes_of(path), path.grid().dt());
}

double coulomb_energy(const PathSample& path) { return coulomb_energy_diag(path).value; }

double coulomb_delta_tail(const PathSample& path, const PathSample& proposal, std::size_t k,
                          std::uint64_t* clamped_pairs) {
  const std::size_t nodes = path.node_count();
  if (proposal.node_count() != nodes || k >= nodes) {
    throw ParameterError("coulomb_delta_tail: mismatched paths or pivot index");
  }
  if (k + 1 == nodes) {
    if (clamped_pairs != nullptr) {
      *clamped_pairs = 0;
    }
    return 0.0;
  }
  const simd::KernelTable& kern = simd::active_kernels();
  const simd::PointsSoA old_pts = soa(nodes_of(path));
  const simd::PointsSoA new_pts = soa(nodes_of(proposal));
  const simd::PointsSoA old_tail = old_pts.subrange(k + 1, nodes);
  const simd::PointsSoA new_tail = new_pts.subrange(k + 1, nodes);
  const DeltaAccum acc = blocked_row_reduce<DeltaAccum>(k + 1, [&](std::size_t i) {
    const double px = old_pts.x[i], py = old_pts.y[i], pz = old_pts.z[i];
    const simd::PairAccum fresh = kern.row_pair(px, py, pz, new_tail, kMinPairDistance);
    const simd::PairAccum stale = kern.row_pair(px, py, pz, old_tail, kMinPairDistance);
    return DeltaAccum{fresh.inv_sum, stale.inv_sum, fresh.clamped};
  });
  if (clamped_pairs != nullptr) {
    *clamped_pairs = acc.clamped;
  }
  const double dt = path.grid().dt();
  return dt * dt * (2.0 * acc.new_inv - 2.0 * acc.old_inv);
}

double coulomb_delta_pivot(const PathSample& path, std::size_t k, const Rotation& rotation) {
  const PathSample pivoted = apply_pivot(path, k, rotation);
  return coulomb_delta_tail(path, pivoted, k);
}

double radius_gyration_pairwise(NodeView nodes) {
  const std::size_t n = nodes.size();
  if (n == 0) {
    return 0.0;
  }
  const simd::KernelTable& k = simd::active_kernels();
  const simd::PointsSoA pts = soa(nodes);
  const double upper = blocked_row_reduce<double>(n, [&](std::size_t i) {
    return k.row_sq(pts.x[i], pts.y[i], pts.z[i], pts.subrange(i + 1, n));
  });
  const double nn = static_cast<double>(n);
  return std::sqrt(2.0 * upper / (nn * nn));
}

double radius_gyration_pairwise(const PathSample& path) { return radius_gyration_pairwise(nodes_of(path)); }

double radius_gyration_centered(NodeView nodes) {
  const std::size_t n = nodes.size();
  if (n == 0) {
    return 0.0;
  }
  const double nn = static_cast<double>(n);
  double cx = 0.0, cy = 0.0, cz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cx += nodes.x[i];
    cy += nodes.y[i];
    cz += nodes.z[i];
  }
  cx /= nn;
  cy /= nn;
  cz /= nn;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = nodes.x[i] - cx;
    const double dy = nodes.y[i] - cy;
    const double dz = nodes.z[i] - cz;
    ss += (dx * dx + dy * dy) + dz * dz;
  }
  return std::sqrt(2.0 * ss / nn);
}

double radius_gyration_centered(const PathSample& path) { return radius_gyration_centered(nodes_of(path)); }

HolderCheck holder_check(NodeView nodes) {
  const std::size_t n = nodes.size();
  if (n < 2) {
    throw ParameterError("holder_check: need at least two nodes");
  }
  const simd::PairAccum acc = upper_pair_sums(nodes);
  check_clamped(acc.clamped, unordered_pairs(n));
  const double ordered = static_cast<double>(n) * static_cast<double>(n - 1);
  HolderCheck h;
  h.m2 = 2.0 * acc.sq_sum / ordered;
  h.m_neg1 = 2.0 * acc.inv_sum / ordered;
  h.product = std::sqrt(h.m2) * h.m_neg1;
  h.clamped_pairs = acc.clamped;
  return h;
}

HolderCheck holder_check(const PathSample& path) { return holder_check(nodes_of(path)); }

double log_gibbs_weight(const PathSample& path, double beta) {
  if (!(beta >= 0.0)) {
    throw ParameterError("log_gibbs_weight: beta must be >= 0");
  }
  return -beta * coulomb_energy(path);
}

PathFunctionals evaluate(const PathSample& path) {
  const EnergyResult e = coulomb_energy_diag(path);
  return {e.value, radius_gyration_centered(path), path.endpoint_x1(), e.clamped_pairs};
}

}  // namespace polyel
