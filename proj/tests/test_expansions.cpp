#include <cmath>
#include <vector>

#include "doctest.h"
#include "pfmbem/element_integrals.hpp"
#include "pfmbem/errors.hpp"
#include "pfmbem/expansions.hpp"
#include "pfmbem/geometry.hpp"

using namespace pfmbem;

namespace {

const double kK = 5.0;
const double kEta = 5.0;

// Direct (value, normal derivative) of the combined source on a circle.
Eigen::Vector2cd direct(const DiscretizedBoundary& b, const Eigen::VectorXcd& phi, const Eigen::VectorXcd& psi,
                        const Vec2& x, const Vec2& nx) {
  Eigen::Vector2cd out = Eigen::Vector2cd::Zero();
  for (std::size_t j = 0; j < b.elements.size(); ++j) {
    const ElementIntegrals e = integrate_element_far(kK, b.elements[j], Vec2(0, 0), x, nx);
    out(0) += e.D * phi(j) - kI * kEta * e.S * psi(j);
    out(1) += e.T * phi(j) - kI * kEta * e.K * psi(j);
  }
  return out;
}

Eigen::VectorXcd moments(const DiscretizedBoundary& b, const Eigen::VectorXcd& phi, const Eigen::VectorXcd& psi,
                         const Vec2& center, int p) {
  Eigen::VectorXcd m = Eigen::VectorXcd::Zero(2 * p + 1);
  for (std::size_t j = 0; j < b.elements.size(); ++j) {
    const Eigen::MatrixXcd a = p2m_matrix(kK, kEta, b.elements[j], Vec2(0, 0), center, p);
    m += a.col(0) * phi(j) + a.col(1) * psi(j);
  }
  return m;
}

struct Fixture {
  DiscretizedBoundary b = make_circle(0.2, 24, Vec2(0.1, -0.05));
  Eigen::VectorXcd phi = Eigen::VectorXcd::Random(24);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Random(24);
  Vec2 x{1.3, 0.7};
  Vec2 nx = Vec2(0.6, 0.8);
};

double err(const Eigen::Vector2cd& a, const Eigen::Vector2cd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("regular basis derivative rule") {
  const Vec2 v(0.3, -0.4), nu(std::cos(1.1), std::sin(1.1));
  const int p = 6;
  const double h = 1e-6;
  std::vector<cdouble> b(2 * p + 3), bp(2 * p + 3), bm(2 * p + 3);
  for (int sign : {1, -1}) {
    regular_basis(p + 1, kK, v, sign, b);
    regular_basis(p + 1, kK, v + h * nu, sign, bp);
    regular_basis(p + 1, kK, v - h * nu, sign, bm);
    const cdouble c(nu.x(), sign * nu.y());
    for (int n = -p; n <= p; ++n) {
      const cdouble fd = (bp[n + p + 1] - bm[n + p + 1]) / (2 * h);
      const cdouble rule = 0.5 * kK * (c * b[n + p] - std::conj(c) * b[n + p + 2]);
      CHECK(std::abs(fd - rule) < 1e-8);
    }
  }
}

TEST_CASE("multipole evaluation converges to the direct field") {
  Fixture f;
  const Eigen::Vector2cd ref = direct(f.b, f.phi, f.psi, f.x, f.nx);
  double prev = 1e300;
  for (int p : {4, 8, 12, 16}) {
    const Eigen::Vector2cd got = m2p_matrix(kK, f.x, f.nx, f.b.center, p) * moments(f.b, f.phi, f.psi, f.b.center, p);
    const double e = err(got, ref);
    CAPTURE(p);
    CHECK(e < prev);
    prev = e;
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("M2M, M2L and L2L chain reproduces the direct field") {
  Fixture f;
  const Eigen::Vector2cd ref = direct(f.b, f.phi, f.psi, f.x, f.nx);
  const int p = 22;
  const Vec2 child = f.b.center, parent = child + Vec2(-0.1, 0.15);
  const Vec2 local_parent(1.1, 0.9), local_child = local_parent + Vec2(0.12, -0.1);
  const Eigen::VectorXcd mc = moments(f.b, f.phi, f.psi, child, p);
  const Eigen::VectorXcd mp = m2m_matrix(kK, child - parent, p) * mc;
  CHECK((mp - moments(f.b, f.phi, f.psi, parent, p)).norm() < 1e-9 * mp.norm());
  const Eigen::VectorXcd lp = m2l_matrix(kK, local_parent - parent, p) * mp;
  const Eigen::VectorXcd lc = l2l_matrix(kK, local_child - local_parent, p) * lp;
  const Eigen::Vector2cd got = l2p_matrix(kK, f.x, f.nx, local_child, p) * lc;
  CHECK(err(got, ref) < 1e-8);
}

TEST_CASE("truncation error of M2L decays geometrically") {
  Fixture f;
  const Eigen::Vector2cd ref = direct(f.b, f.phi, f.psi, f.x, f.nx);
  const Vec2 target(1.2, 0.6);
  std::vector<double> e;
  for (int p = 4; p <= 16; p += 4) {
    const Eigen::VectorXcd m = moments(f.b, f.phi, f.psi, f.b.center, p);
    e.push_back(err(l2p_matrix(kK, f.x, f.nx, target, p) * (m2l_matrix(kK, target - f.b.center, p) * m), ref));
  }
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] < 0.5 * e[i - 1]);
}

TEST_CASE("singular basis rejects the origin") {
  std::vector<cdouble> out(5);
  CHECK_THROWS_AS(singular_basis(2, 1.0, Vec2(0, 0), out), DomainError);
}
