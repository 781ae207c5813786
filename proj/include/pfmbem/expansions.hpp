#pragma once

#include <span>

#include <Eigen/Dense>

#include "pfmbem/geometry.hpp"
#include "pfmbem/specfun.hpp"

namespace pfmbem {

// Coefficient vectors hold orders [-p, p] at index n + p. A multipole M about O
// represents (i/4) sum_n H_n(k|x-O|) e^{i n theta} M_n; a local L about O
// represents (i/4) sum_n J_n(k|x-O|) e^{i n theta} L_n.

/// J_n(k|v|) e^{sign i n theta_v} for |n| <= p.
void regular_basis(int p, double k, const Vec2& v, int sign, std::span<cdouble> out);

/// H_n(k|v|) e^{i n theta_v} for |n| <= p. Requires v != 0.
void singular_basis(int p, double k, const Vec2& v, std::span<cdouble> out);

/// Moments of the combined source dPhi/dnu(y) phi - i eta Phi psi on one element
/// (translated by shift): (2p+1) x 2, columns (phi, psi). Uses the far-rule nodes.
Eigen::MatrixXcd p2m_matrix(double k, double eta, const BoundaryElement& e, const Vec2& shift, const Vec2& center,
                            int p);

/// Value and nx-derivative of a local expansion at x: 2 x (2p+1).
Eigen::MatrixXcd l2p_matrix(double k, const Vec2& x, const Vec2& nx, const Vec2& center, int p);

/// Value and nx-derivative of a multipole expansion at x: 2 x (2p+1).
Eigen::MatrixXcd m2p_matrix(double k, const Vec2& x, const Vec2& nx, const Vec2& center, int p);

/// Multipole about a child center re-expanded about its parent; d = child - parent.
Eigen::MatrixXcd m2m_matrix(double k, const Vec2& d, int p);

/// Local about a parent re-expanded about a child; d = child - parent.
Eigen::MatrixXcd l2l_matrix(double k, const Vec2& d, int p);

/// Multipole about a source center to a local about a target center; d = target - source.
Eigen::MatrixXcd m2l_matrix(double k, const Vec2& d, int p);

/// Same conversion from precomputed translation sums z[n + 2p], |n| <= 2p.
Eigen::MatrixXcd m2l_from_sums(std::span<const cdouble> z, int p);

}  // namespace pfmbem
