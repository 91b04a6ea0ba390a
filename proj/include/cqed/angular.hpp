#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace cqed {

/// Angular-momentum quantum number stored as twice its value, so 7/2 is 7.
class HalfInt {
public:
  constexpr HalfInt() = default;
  static constexpr HalfInt from_twice(int twice) { return HalfInt{twice, 0}; }
  static constexpr HalfInt integer(int n) { return HalfInt{2 * n, 0}; }

  /// Parses "3", "-2", "7/2", "-1/2".
  static HalfInt parse(std::string_view text);

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  constexpr HalfInt operator-() const { return from_twice(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return from_twice(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return from_twice(twice_ - o.twice_); }
  constexpr auto operator<=>(const HalfInt &) const = default;

  std::string str() const;

private:
  constexpr HalfInt(int twice, int) : twice_(twice) {}
  int twice_ = 0;
};

// All symbols take twice-valued integers so that sums stay exact.

double wigner_3j(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3);
double wigner_6j(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6);

/// <j1 m1 j2 m2 | J M>.
double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tJ, int tM);

inline double wigner_3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1,
                        HalfInt m2, HalfInt m3) {
  return wigner_3j(j1.twice(), j2.twice(), j3.twice(), m1.twice(), m2.twice(),
                   m3.twice());
}

inline double wigner_6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4,
                        HalfInt j5, HalfInt j6) {
  return wigner_6j(j1.twice(), j2.twice(), j3.twice(), j4.twice(), j5.twice(),
                   j6.twice());
}

/// Normalization of the hyperfine dipole coefficient.
enum class AngularNorm {
  /// Sum over all (F', m_F', q) of the squared coefficient is 1 for fixed (F, m_F).
  SumRule,
  /// The strongest fine-structure component (stretched transition) is 1.
  Stretched,
};

/// Ratio <F' m_F'| d_q |F m_F> / <J'||d||J> with nuclear spin I, optionally
/// rescaled per `norm`. Sign follows Edmonds' Wigner-Eckart convention.
/// Returns 0 when a selection rule fails; throws DomainError on inconsistent
/// quantum numbers (|m| > j, F outside |J-I|..J+I, mixed integer parity).
double angular_factor(HalfInt F, HalfInt mF, HalfInt Fp, HalfInt mFp, int q,
                      HalfInt J, HalfInt Jp, HalfInt I,
                      AngularNorm norm = AngularNorm::SumRule);

/// Fine-structure analogue: <J' m'| d_q |J m> / <J'||d||J>.
double fine_structure_factor(HalfInt J, HalfInt mJ, HalfInt Jp, HalfInt mJp,
                             int q);

} // namespace cqed
