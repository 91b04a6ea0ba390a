#include "cqed/angular.hpp"
#include "cqed/errors.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <cmath>
#include <vector>

using namespace cqed;

namespace {

// Clebsch-Gordan coefficients for fixed (j1, j2, M) from the eigenvectors of
// J^2 = J1^2 + J2^2 + 2 J1z J2z + J1+ J2- + J1- J2+ built with ladder operators.
struct CgOracle {
  std::vector<std::pair<int, int>> basis; // (tm1, tm2)
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
};

double ladder(int tj, int tm, int dir) {
  const double j = 0.5 * tj, m = 0.5 * tm;
  return std::sqrt(j * (j + 1) - m * (m + dir));
}

CgOracle oracle(int tj1, int tj2, int tM) {
  CgOracle o;
  for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2) {
    const int tm2 = tM - tm1;
    if (std::abs(tm2) <= tj2)
      o.basis.push_back({tm1, tm2});
  }
  const auto n = static_cast<Eigen::Index>(o.basis.size());
  Eigen::MatrixXd J2 = Eigen::MatrixXd::Zero(n, n);
  const double j1 = 0.5 * tj1, j2 = 0.5 * tj2;
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto [m1, m2] = o.basis[a];
    J2(a, a) = j1 * (j1 + 1) + j2 * (j2 + 1) + 2 * (0.5 * m1) * (0.5 * m2);
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto [n1, n2] = o.basis[b];
      if (n1 == m1 + 2 && n2 == m2 - 2)
        J2(b, a) += ladder(tj1, m1, +1) * ladder(tj2, m2, -1);
      if (n1 == m1 - 2 && n2 == m2 + 2)
        J2(b, a) += ladder(tj1, m1, -1) * ladder(tj2, m2, +1);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J2);
  o.vectors = es.eigenvectors();
  o.values = es.eigenvalues();
  return o;
}

} // namespace

TEST_SUITE("angular") {

TEST_CASE("HalfInt parsing and arithmetic") {
  CHECK(HalfInt::parse("7/2").twice() == 7);
  CHECK(HalfInt::parse("-1/2").twice() == -1);
  CHECK(HalfInt::parse("3").twice() == 6);
  CHECK(HalfInt::parse("7/2").str() == "7/2");
  CHECK((HalfInt::parse("7/2") + HalfInt::parse("1/2")).str() == "4");
  CHECK_THROWS_AS(HalfInt::parse("4/2"), DomainError);
  CHECK_THROWS_AS(HalfInt::parse("3/4"), DomainError);
  CHECK_THROWS_AS(HalfInt::parse("x"), DomainError);
}

TEST_CASE("Clebsch-Gordan magnitudes match diagonalization of J^2") {
  const std::vector<std::pair<int, int>> pairs = {{1, 7}, {2, 3}, {3, 7}, {2, 8}, {1, 1}, {4, 5}};
  for (auto [tj1, tj2] : pairs) {
    for (int tM = -(tj1 + tj2); tM <= tj1 + tj2; tM += 2) {
      const auto o = oracle(tj1, tj2, tM);
      for (Eigen::Index k = 0; k < o.values.size(); ++k) {
        // J(J+1) -> twice J
        const double J = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * o.values[k]));
        const int tJ = static_cast<int>(std::lround(2.0 * J));
        for (std::size_t a = 0; a < o.basis.size(); ++a) {
          const auto [tm1, tm2] = o.basis[a];
          CHECK(std::abs(clebsch_gordan(tj1, tm1, tj2, tm2, tJ, tM)) ==
                doctest::Approx(std::abs(o.vectors(static_cast<Eigen::Index>(a), k))).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("Clebsch-Gordan phase convention: stretched component positive") {
  for (int tJ = 6; tJ <= 8; tJ += 2)
    CHECK(clebsch_gordan(1, 1, 7, tJ - 1, tJ, tJ) > 0.0);
  CHECK(clebsch_gordan(1, 1, 7, 7, 8, 8) == doctest::Approx(1.0));
}

TEST_CASE("3j symmetries") {
  const int a = 3, b = 2, c = 5, ma = 1, mb = 2, mc = -3;
  const double w = wigner_3j(a, b, c, ma, mb, mc);
  CHECK(w != 0.0);
  CHECK(wigner_3j(b, c, a, mb, mc, ma) == doctest::Approx(w));
  const double sign = ((a + b + c) / 2) % 2 == 0 ? 1.0 : -1.0;
  CHECK(wigner_3j(b, a, c, mb, ma, mc) == doctest::Approx(sign * w));
  CHECK(wigner_3j(a, b, c, -ma, -mb, -mc) == doctest::Approx(sign * w));
  CHECK(wigner_3j(a, b, c, 1, 1, 1) == 0.0);  // m sum
  CHECK(wigner_3j(1, 1, 6, 1, -1, 0) == 0.0); // triangle
}

TEST_CASE("6j orthogonality") {
  // sum_x (2x+1)(2f+1) {a b x; c d f}{a b x; c d f'} = delta_ff'
  // for f, f' allowed by the triads (a d f) and (c b f).
  const int a = 3, b = 7, c = 1, d = 9; // 3/2, 7/2, 1/2, 9/2
  for (int f = 6; f <= 8; f += 2)
    for (int fp = 6; fp <= 8; fp += 2) {
      double s = 0.0;
      for (int x = 0; x <= 20; ++x)
        s += (x + 1) * (f + 1) * wigner_6j(a, b, x, c, d, f) * wigner_6j(a, b, x, c, d, fp);
      CHECK(s == doctest::Approx(f == fp ? 1.0 : 0.0).epsilon(1e-12));
    }
}

TEST_CASE("hyperfine dipole factors obey the sum rule") {
  const HalfInt I = HalfInt::parse("7/2"), J = HalfInt::parse("1/2"), Jp = HalfInt::parse("3/2");
  for (int tF = 6; tF <= 8; tF += 2)
    for (int tm = -tF; tm <= tF; tm += 2) {
      double s = 0.0;
      for (int tFp = 4; tFp <= 10; tFp += 2)
        for (int q = -1; q <= 1; ++q) {
          const int tmp = tm + 2 * q;
          if (std::abs(tmp) > tFp)
            continue;
          const double a = angular_factor(HalfInt::from_twice(tF), HalfInt::from_twice(tm),
                                          HalfInt::from_twice(tFp), HalfInt::from_twice(tmp), q,
                                          J, Jp, I);
          s += a * a;
        }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("stretched normalization makes the cycling transition unity") {
  const HalfInt I = HalfInt::parse("7/2"), J = HalfInt::parse("1/2"), Jp = HalfInt::parse("3/2");
  const double a = angular_factor(HalfInt::integer(4), HalfInt::integer(4), HalfInt::integer(5),
                                  HalfInt::integer(5), 1, J, Jp, I, AngularNorm::Stretched);
  CHECK(std::abs(a) == doctest::Approx(1.0));
}

TEST_CASE("angular factor validates quantum numbers") {
  const HalfInt I = HalfInt::parse("7/2"), J = HalfInt::parse("1/2"), Jp = HalfInt::parse("3/2");
  CHECK_THROWS_AS(angular_factor(HalfInt::integer(4), HalfInt::integer(5), HalfInt::integer(5),
                                 HalfInt::integer(5), 0, J, Jp, I),
                  DomainError);
  CHECK_THROWS_AS(angular_factor(HalfInt::integer(6), HalfInt::integer(0), HalfInt::integer(5),
                                 HalfInt::integer(0), 0, J, Jp, I),
                  DomainError);
  // Delta F = 2 is forbidden but legal input
  CHECK(angular_factor(HalfInt::integer(3), HalfInt::integer(0), HalfInt::integer(5),
                       HalfInt::integer(0), 0, J, Jp, I) == 0.0);
}

}
