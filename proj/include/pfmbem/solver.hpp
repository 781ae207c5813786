#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "pfmbem/bem_dense.hpp"

namespace pfmbem {

using LinearMap = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

struct SolveReport {
  int iterations = 0;
  double final_relative_residual = 0.0;
  int restarts = 0;
  double wall_time = 0.0;
  bool converged = false;
  /// Preconditioned relative residual after each inner iteration.
  std::vector<double> history;
};

struct GmresOptions {
  double tol = 1e-6;
  int restart = 60;
  int max_iterations = 1000;
};

/// Left-preconditioned restarted GMRES with modified Gram-Schmidt. Success means
/// the unpreconditioned residual ||apply(x) - b|| / ||b|| is at most tol.
/// Throws IterationLimitError with the best iterate otherwise.
Eigen::VectorXcd gmres(const LinearMap& apply, const Eigen::VectorXcd& b, const GmresOptions& opt,
                       const LinearMap& precond, SolveReport* report = nullptr);

/// Inverse of the per-scatterer 2N x 2N diagonal blocks of the system.
LinearMap block_preconditioner(const FundamentalBlock& block, const WaveContext& ctx, const TailChannel& tail);

LinearMap identity_map();

}  // namespace pfmbem
