#include "cqed/angular.hpp"

#include "cqed/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace cqed {

namespace {

constexpr int kMaxFactorial = 170;

const std::array<long double, kMaxFactorial + 1> &factorials() {
  static const auto table = [] {
    std::array<long double, kMaxFactorial + 1> t{};
    t[0] = 1.0L;
    for (int i = 1; i <= kMaxFactorial; ++i)
      t[i] = t[i - 1] * static_cast<long double>(i);
    return t;
  }();
  return table;
}

// Factorial of a twice-valued argument that must be an even non-negative.
long double fact2(int twice) {
  if (twice < 0 || twice % 2 != 0 || twice / 2 > kMaxFactorial)
    throw DomainError("factorial argument out of range");
  return factorials()[twice / 2];
}

bool triangle(int ta, int tb, int tc) {
  return tc >= std::abs(ta - tb) && tc <= ta + tb && (ta + tb + tc) % 2 == 0;
}

long double delta(int ta, int tb, int tc) {
  return fact2(ta + tb - tc) * fact2(ta - tb + tc) * fact2(-ta + tb + tc) /
         fact2(ta + tb + tc + 2);
}

int phase(int twice_exponent) {
  // (-1)^(x) for integer x = twice_exponent / 2.
  return ((twice_exponent / 2) % 2 == 0) ? 1 : -1;
}

} // namespace

HalfInt HalfInt::parse(std::string_view text) {
  auto to_int = [&](std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw DomainError("not an angular-momentum number: '" +
                        std::string(text) + "'");
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    if (to_int(text.substr(slash + 1)) != 2)
      throw DomainError("denominator must be 2: '" + std::string(text) + "'");
    int num = to_int(text.substr(0, slash));
    if (num % 2 == 0)
      throw DomainError("use an integer instead of '" + std::string(text) + "'");
    return from_twice(num);
  }
  return integer(to_int(text));
}

std::string HalfInt::str() const {
  if (is_integer())
    return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

double wigner_3j(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  if (tm1 + tm2 + tm3 != 0)
    return 0.0;
  if (!triangle(tj1, tj2, tj3))
    return 0.0;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3)
    return 0.0;
  if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tj3 + tm3) % 2)
    return 0.0;

  const long double pre =
      std::sqrt(delta(tj1, tj2, tj3) * fact2(tj1 + tm1) * fact2(tj1 - tm1) *
                fact2(tj2 + tm2) * fact2(tj2 - tm2) * fact2(tj3 + tm3) *
                fact2(tj3 - tm3));

  // Summation limits in twice-units.
  const int kmin = std::max({0, tj2 - tj3 - tm1, tj1 - tj3 + tm2});
  const int kmax = std::min({tj1 + tj2 - tj3, tj1 - tm1, tj2 + tm2});
  long double sum = 0.0L;
  for (int tk = kmin; tk <= kmax; tk += 2) {
    const long double den = fact2(tk) * fact2(tj3 - tj2 + tk + tm1) *
                            fact2(tj3 - tj1 + tk - tm2) *
                            fact2(tj1 + tj2 - tj3 - tk) * fact2(tj1 - tk - tm1) *
                            fact2(tj2 - tk + tm2);
    sum += phase(tk) / den;
  }
  return static_cast<double>(phase(tj1 - tj2 - tm3) * pre * sum);
}

double wigner_6j(int tj1, int tj2, int tj3, int tj4, int tj5, int tj6) {
  if (!triangle(tj1, tj2, tj3) || !triangle(tj1, tj5, tj6) ||
      !triangle(tj4, tj2, tj6) || !triangle(tj4, tj5, tj3))
    return 0.0;
  const long double pre =
      std::sqrt(delta(tj1, tj2, tj3) * delta(tj1, tj5, tj6) *
                delta(tj4, tj2, tj6) * delta(tj4, tj5, tj3));
  const int a1 = tj1 + tj2 + tj3, a2 = tj1 + tj5 + tj6, a3 = tj4 + tj2 + tj6,
            a4 = tj4 + tj5 + tj3;
  const int b1 = tj1 + tj2 + tj4 + tj5, b2 = tj2 + tj3 + tj5 + tj6,
            b3 = tj3 + tj1 + tj6 + tj4;
  const int tmin = std::max({a1, a2, a3, a4});
  const int tmax = std::min({b1, b2, b3});
  long double sum = 0.0L;
  for (int tt = tmin; tt <= tmax; tt += 2) {
    const long double den = fact2(tt - a1) * fact2(tt - a2) * fact2(tt - a3) *
                            fact2(tt - a4) * fact2(b1 - tt) * fact2(b2 - tt) *
                            fact2(b3 - tt);
    sum += phase(tt) * fact2(tt + 2) / den;
  }
  return static_cast<double>(pre * sum);
}

double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
  return phase(tj1 - tj2 + tM) * std::sqrt(tJ + 1.0) *
         wigner_3j(tj1, tj2, tJ, tm1, tm2, -tM);
}

double fine_structure_factor(HalfInt J, HalfInt mJ, HalfInt Jp, HalfInt mJp,
                             int q) {
  return phase(Jp.twice() - mJp.twice()) *
         wigner_3j(Jp.twice(), 2, J.twice(), -mJp.twice(), 2 * q, mJ.twice());
}

namespace {

void require_projection(HalfInt j, HalfInt m, const char *name) {
  if (j.twice() < 0 || std::abs(m.twice()) > j.twice() ||
      (j.twice() + m.twice()) % 2 != 0)
    throw DomainError(std::string("invalid projection for ") + name + ": j=" +
                      j.str() + " m=" + m.str());
}

void require_coupling(HalfInt J, HalfInt I, HalfInt F, const char *name) {
  if (!triangle(J.twice(), I.twice(), F.twice()))
    throw DomainError(std::string(name) + "=" + F.str() +
                      " cannot be formed from J=" + J.str() + ", I=" + I.str());
}

double stretched_fine_structure(HalfInt J, HalfInt Jp) {
  double best = 0.0;
  for (int tm = -J.twice(); tm <= J.twice(); tm += 2)
    for (int q = -1; q <= 1; ++q) {
      const int tmp = tm + 2 * q;
      if (std::abs(tmp) > Jp.twice())
        continue;
      best = std::max(best, std::abs(fine_structure_factor(
                                J, HalfInt::from_twice(tm), Jp,
                                HalfInt::from_twice(tmp), q)));
    }
  return best;
}

} // namespace

double angular_factor(HalfInt F, HalfInt mF, HalfInt Fp, HalfInt mFp, int q,
                      HalfInt J, HalfInt Jp, HalfInt I, AngularNorm norm) {
  if (q < -1 || q > 1)
    throw DomainError("polarization index q must be -1, 0 or +1");
  require_projection(F, mF, "F");
  require_projection(Fp, mFp, "F'");
  require_coupling(J, I, F, "F");
  require_coupling(Jp, I, Fp, "F'");
  if (!triangle(J.twice(), 2, Jp.twice()))
    throw DomainError("J=" + J.str() + " -> J'=" + Jp.str() +
                      " is not an electric-dipole pair");

  if (mFp.twice() != mF.twice() + 2 * q)
    return 0.0;
  if (std::abs(Fp.twice() - F.twice()) > 2)
    return 0.0;

  const double reduced_hfs =
      phase(Jp.twice() + I.twice() + F.twice() + 2) *
      std::sqrt((Fp.twice() + 1.0) * (F.twice() + 1.0)) *
      wigner_6j(Jp.twice(), Fp.twice(), I.twice(), F.twice(), J.twice(), 2);
  const double value = phase(Fp.twice() - mFp.twice()) *
                       wigner_3j(Fp.twice(), 2, F.twice(), -mFp.twice(), 2 * q,
                                 mF.twice()) *
                       reduced_hfs;
  switch (norm) {
  case AngularNorm::SumRule:
    return value * std::sqrt(J.twice() + 1.0);
  case AngularNorm::Stretched:
    return value / stretched_fine_structure(J, Jp);
  }
  return value;
}

} // namespace cqed
