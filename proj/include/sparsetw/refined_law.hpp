#pragma once

#include <complex>
#include <vector>

#include "sparsetw/error.hpp"

namespace sparsetw {

using cdouble = std::complex<double>;

/// A point z = E + iη of the open upper half-plane.
class ComplexUpper {
 public:
  ComplexUpper(double re, double im);
  explicit ComplexUpper(cdouble z) : ComplexUpper(z.real(), z.imag()) {}

  double re() const { return re_; }
  double im() const { return im_; }
  cdouble value() const { return {re_, im_}; }

 private:
  double re_;
  double im_;
};

enum class RootMode { Strict, Permissive };

/// Largest quartic coefficient for which the disk |w| < 5 is guaranteed to hold
/// exactly one root in the upper half-plane.
inline constexpr double kStrictC4Limit = 1.0 / 625.0;
inline constexpr double kRootRadius = 5.0;

/// Inputs of the refined law at flow time t: s4, q, t, and the derived
/// q_t = q e^{t/2} and quartic coefficient c4 = e^{-2t} s4 / q².
class LawParams {
 public:
  /// Throws InvalidParameter for q <= 0, t < 0 or s4 < 0.
  static LawParams make(double s4, double q, double t = 0.0);

  double s4() const { return s4_; }
  double q() const { return q_; }
  double t() const { return t_; }
  double qt() const { return qt_; }
  double c4() const { return c4_; }

  /// Same (s4, q) moved along the flow to time t.
  LawParams at_time(double t) const { return make(s4_, q_, t); }

 private:
  LawParams(double s4, double q, double t);
  double s4_, q_, t_, qt_, c4_;
};

/// Upper edge data of the refined measure.
///
/// tau is the stationary point of Q(w) = -1/w - w - c4 w³ on (-1, 0) and
/// L = Q(tau). The offsets are carried separately so that L - 2 and
/// L - 2 - c4 keep full relative precision even when c4 underflows L - 2
/// in double arithmetic (late flow times).
struct RefinedLaw {
  LawParams params;
  double L = 2.0;
  double tau = -1.0;
  double tau_offset = 0.0;  // tau + 1
  double excess = 0.0;      // L - 2
  double remainder = 0.0;   // L - 2 - c4
};

/// Stieltjes transform of the semicircle law.
cdouble msc(ComplexUpper z);

/// All roots w of 1 + z w + w² + c4 w⁴ (two when c4 == 0), unpolished.
/// Computed from the companion matrix of the reversed polynomial in 1/w so
/// the coefficients stay O(1) for any c4 >= 0.
std::vector<cdouble> quartic_roots(double c4, cdouble z);

/// P(w) = 1 + z w + w² + c4 w⁴.
inline cdouble law_polynomial(double c4, cdouble z, cdouble w) {
  const cdouble w2 = w * w;
  return 1.0 + z * w + w2 + c4 * w2 * w2;
}

/// The root of P with Im w > 0 and |w| <= 5: the refined Stieltjes transform.
///
/// Strict mode rejects c4 > 1/625 and reports AmbiguousRoot if two roots
/// qualify. Permissive mode follows the root by continuation in η from
/// η = 3 down to Im z (factor 0.9 per step) when c4 exceeds the strict limit.
cdouble solve_w(const LawParams& law, ComplexUpper z, RootMode mode = RootMode::Strict);

RefinedLaw edge(const LawParams& law);

/// Density of the refined measure at real E; exactly 0 for |E| >= L.
double density(const RefinedLaw& law, double e, RootMode mode = RootMode::Strict);
double density(const LawParams& law, double e, RootMode mode = RootMode::Strict);

/// ∫_{e1}^{e2} density, absolute tolerance 1e-8.
double integrated_density(const RefinedLaw& law, double e1, double e2,
                          RootMode mode = RootMode::Strict);

/// dL/dt along the flow: 2 c4 tau³.
double l_dot(const RefinedLaw& law);
/// dL/dt + 2 c4, i.e. the time derivative of the remainder L - 2 - c4,
/// evaluated without cancellation.
double l_dot_correction(const RefinedLaw& law);

/// |z + w(z)|.
double stability_margin(const LawParams& law, ComplexUpper z, RootMode mode = RootMode::Strict);

}  // namespace sparsetw
