#pragma once

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pfmbem/geometry.hpp"
#include "pfmbem/kernels.hpp"

namespace pfmbem {

// Unknowns are ordered scatterer by scatterer as (phi_1, psi_1, phi_2, psi_2, ...),
// each of length N. The exterior operator maps them to the value U and normal
// derivative V of the scattered field at every collocation point, in the same layout.

/// Quantized translation key; two vectors closer than the quantum share a key.
using TranslationKey = std::pair<long long, long long>;
TranslationKey translation_key(const Vec2& d, double quantum);

/// Images |m| >= 2 through root-level expansions about each scatterer center.
struct TailChannel {
  int p = 0;
  double quantum = 0.0;
  LatticeSumConfig cfg;
  std::vector<Eigen::MatrixXcd> p2m;  // per scatterer, (2p+1) x 2N
  std::vector<Eigen::MatrixXcd> l2p;  // per scatterer, 2N x (2p+1)
  std::map<TranslationKey, Eigen::MatrixXcd> m2l;

  const Eigen::MatrixXcd& translation(const FundamentalBlock& block, int t, int s) const;
};

/// Expansion order needed for the tail images to reach roughly 1e-13.
int tail_order(const FundamentalBlock& block);

/// p = 0 selects tail_order; epsilon is the lattice-sum tolerance.
TailChannel build_tail_channel(const FundamentalBlock& block, const WaveContext& ctx, int p = 0,
                               double epsilon = 1e-12);

/// Layer potentials from src evaluated at the collocation points of tgt:
/// [[D, -i eta S], [T, -i eta K]] summed over the weighted source shifts.
/// same marks tgt == src so the zero shift uses the singular rules.
Eigen::MatrixXcd layer_block(double k, double eta, const DiscretizedBoundary& tgt, const DiscretizedBoundary& src,
                             const std::vector<std::pair<Vec2, cdouble>>& shifts, bool same);

/// Shifts m h for m in {-1, 0, 1} weighted by alpha^m.
std::vector<std::pair<Vec2, cdouble>> near_images(const WaveContext& ctx);

/// Row scaling of the exterior part: 1 on value rows, -2i / (eta (1 + varrho)) on derivative rows.
cdouble derivative_row_scale(const WaveContext& ctx);

/// Interior contribution of scatterer s to its own rows, excluding the identity.
Eigen::MatrixXcd interior_block(const FundamentalBlock& block, const WaveContext& ctx, int s);

/// System block (t, s) including identity, interior, near images and tail.
Eigen::MatrixXcd assemble_block(const FundamentalBlock& block, const WaveContext& ctx, const TailChannel& tail, int t,
                                int s);

Eigen::MatrixXcd assemble_dense(const FundamentalBlock& block, const WaveContext& ctx, const TailChannel& tail);

/// Right-hand side (-u_inc, 2i/(eta(1+varrho)) du_inc/dnu) at the collocation points.
Eigen::VectorXcd incident_trace(const FundamentalBlock& block, const WaveContext& ctx);

/// A x with a shape check.
Eigen::VectorXcd matvec_dense(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& x);

/// LU solve; throws ConditioningError when the reciprocal condition estimate is below rcond_min.
Eigen::VectorXcd solve_dense(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b, double rcond_min = 1e-13);

}  // namespace pfmbem
