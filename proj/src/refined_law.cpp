#include "sparsetw/refined_law.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

namespace sparsetw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A few Newton steps on P; stops when the correction no longer shrinks.
cdouble polish(double c4, cdouble z, cdouble w) {
  for (int it = 0; it < 8; ++it) {
    const cdouble w2 = w * w;
    const cdouble p = 1.0 + z * w + w2 + c4 * w2 * w2;
    const cdouble dp = z + 2.0 * w + 4.0 * c4 * w2 * w;
    if (dp == 0.0) break;
    const cdouble step = p / dp;
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w)) break;
  }
  return w;
}

std::vector<cdouble> upper_candidates(double c4, cdouble z) {
  std::vector<cdouble> out;
  for (cdouble w : quartic_roots(c4, z)) {
    w = polish(c4, z, w);
    if (w.imag() > 0.0 && std::abs(w) <= kRootRadius) out.push_back(w);
  }
  return out;
}

void warn_permissive_once(double c4) {
  static std::once_flag flag;
  std::call_once(flag, [c4] {
    warn("c4 = " + std::to_string(c4) +
         " exceeds 1/625; root uniqueness in |w| <= 5 is not guaranteed, "
         "selecting by continuation in eta");
  });
}

cdouble nearest(const std::vector<cdouble>& roots, cdouble target) {
  return *std::min_element(roots.begin(), roots.end(), [&](cdouble a, cdouble b) {
    return std::abs(a - target) < std::abs(b - target);
  });
}

cdouble continue_root(double c4, ComplexUpper z) {
  const double eta_target = z.im();
  double eta = std::max(3.0, eta_target);
  const cdouble z0(z.re(), eta);
  auto start = upper_candidates(c4, z0);
  require(!start.empty(), ErrorKind::NoUpperRoot,
          "no admissible root at continuation start z = " + std::to_string(z.re()) + " + " +
              std::to_string(eta) + "i");
  cdouble w = nearest(start, msc(ComplexUpper(z0)));
  while (eta > eta_target) {
    eta = std::max(eta * 0.9, eta_target);
    const cdouble zs(z.re(), eta);
    std::vector<cdouble> all;
    for (cdouble r : quartic_roots(c4, zs)) all.push_back(polish(c4, zs, r));
    w = nearest(all, w);
  }
  require(w.imag() > 0.0 && std::abs(w) <= kRootRadius, ErrorKind::NoUpperRoot,
          "continued root left the admissible region");
  return w;
}

void check_strict(double c4) {
  require(c4 <= kStrictC4Limit, ErrorKind::InvalidParameter,
          "c4 = " + std::to_string(c4) + " exceeds the strict-mode limit 1/625; use permissive mode");
}

}  // namespace

ComplexUpper::ComplexUpper(double re, double im) : re_(re), im_(im) {
  require(std::isfinite(re) && std::isfinite(im) && im > 0.0, ErrorKind::InvalidParameter,
          "spectral parameter must lie in the open upper half-plane");
}

LawParams::LawParams(double s4, double q, double t)
    : s4_(s4), q_(q), t_(t), qt_(q * std::exp(0.5 * t)), c4_(std::exp(-2.0 * t) * s4 / (q * q)) {}

LawParams LawParams::make(double s4, double q, double t) {
  require(std::isfinite(q) && q > 0.0, ErrorKind::InvalidParameter, "q must be positive");
  require(std::isfinite(t) && t >= 0.0, ErrorKind::InvalidParameter, "t must be >= 0");
  require(std::isfinite(s4) && s4 >= 0.0, ErrorKind::InvalidParameter,
          "negative fourth cumulant (s4 = " + std::to_string(s4) + ") is not supported");
  return LawParams(s4, q, t);
}

cdouble msc(ComplexUpper zu) {
  const cdouble z = zu.value();
  const cdouble s = std::sqrt(z * z - 4.0);
  // The two roots multiply to 1; the one in C+ is the smaller. Form the larger
  // one without cancellation and invert.
  const cdouble r1 = 0.5 * (-z + s);
  const cdouble r2 = 0.5 * (-z - s);
  const cdouble big = std::abs(r1) >= std::abs(r2) ? r1 : r2;
  return 1.0 / big;
}

std::vector<cdouble> quartic_roots(double c4, cdouble z) {
  // v = 1/w solves v⁴ + z v³ + v² + c4 = 0.
  Eigen::Matrix4cd companion = Eigen::Matrix4cd::Zero();
  companion(0, 0) = -z;
  companion(0, 1) = -1.0;
  companion(0, 2) = 0.0;
  companion(0, 3) = -c4;
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  companion(3, 2) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> solver(companion, false);
  require(solver.info() == Eigen::Success, ErrorKind::SolverFailure, "companion eigensolve failed");
  std::vector<cdouble> roots;
  roots.reserve(4);
  for (int i = 0; i < 4; ++i) {
    const cdouble v = solver.eigenvalues()(i);
    // v == 0 is the root at infinity of the degenerate (c4 == 0) quadratic.
    if (std::abs(v) > 1e-300) roots.push_back(1.0 / v);
  }
  if (c4 == 0.0) {
    std::sort(roots.begin(), roots.end(),
              [](cdouble a, cdouble b) { return std::abs(a) < std::abs(b); });
    if (roots.size() > 2) roots.resize(2);
  }
  return roots;
}

cdouble solve_w(const LawParams& law, ComplexUpper z, RootMode mode) {
  const double c4 = law.c4();
  if (mode == RootMode::Strict) check_strict(c4);
  if (mode == RootMode::Permissive && c4 > kStrictC4Limit) {
    warn_permissive_once(c4);
    return continue_root(c4, z);
  }
  const auto candidates = upper_candidates(c4, z.value());
  require(!candidates.empty(), ErrorKind::NoUpperRoot,
          "no root with Im w > 0 and |w| <= 5 at z = " + std::to_string(z.re()) + " + " +
              std::to_string(z.im()) + "i");
  require(candidates.size() == 1, ErrorKind::AmbiguousRoot,
          "several roots qualify at z = " + std::to_string(z.re()) + " + " + std::to_string(z.im()) + "i");
  return candidates.front();
}

RefinedLaw edge(const LawParams& law) {
  RefinedLaw r{law};
  const double c4 = law.c4();
  if (c4 == 0.0) return r;

  // tau = -1 + delta with delta the root of tau² Q'(tau) = delta(2 - delta) - 3 c4 (1 - delta)⁴
  // on (0, 2 s4 / q_t²). Working in delta keeps relative precision for tiny c4.
  auto g = [c4](double d) {
    const double u = 1.0 - d;
    const double u2 = u * u;
    return d * (2.0 - d) - 3.0 * c4 * u2 * u2;
  };
  auto dg = [c4](double d) {
    const double u = 1.0 - d;
    return 2.0 - 2.0 * d + 12.0 * c4 * u * u * u;
  };
  double lo = 0.0;
  double hi = 2.0 * law.s4() / (law.qt() * law.qt());
  if (hi < 1e-14) hi *= 2.0;
  hi = std::min(hi, 1.0);
  require(g(lo) < 0.0 && g(hi) > 0.0, ErrorKind::BracketFailure,
          "Q' does not change sign on the edge bracket (c4 = " + std::to_string(c4) + ")");

  double d = 1.5 * c4;
  if (!(d > lo && d < hi)) d = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double gd = g(d);
    if (gd == 0.0) break;
    if (gd < 0.0) lo = d; else hi = d;
    double next = d - gd / dg(d);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - d);
    d = next;
    if (step <= 1e-15 * d || hi - lo <= 1e-15 * d) break;
  }

  const double u = 1.0 - d;
  r.tau_offset = d;
  r.tau = -u;
  r.excess = d * d / u + c4 * u * u * u;
  r.remainder = d * d / u - c4 * d * (3.0 - 3.0 * d + d * d);
  r.L = 2.0 + r.excess;
  return r;
}

double density(const RefinedLaw& r, double e, RootMode mode) {
  if (!(std::abs(e) < r.L)) return 0.0;
  const double c4 = r.params.c4();
  if (mode == RootMode::Strict) check_strict(c4);

  if (c4 == 0.0) {
    return std::sqrt(std::max(0.0, 4.0 - e * e)) / (2.0 * M_PI);
  }

  // Real-axis quartic: admissible roots come as a conjugate pair, take the upper member.
  const auto candidates = upper_candidates(c4, cdouble(e, 0.0));
  if (mode == RootMode::Permissive && c4 > kStrictC4Limit) {
    warn_permissive_once(c4);
    if (candidates.empty()) return 0.0;
    const cdouble guide = continue_root(c4, ComplexUpper(e, 1e-9));
    return nearest(candidates, guide).imag() / M_PI;
  }
  require(candidates.size() <= 1, ErrorKind::AmbiguousRoot,
          "several admissible roots at E = " + std::to_string(e));
  // Within rounding distance of the edge the pair may collapse onto the real axis.
  return candidates.empty() ? 0.0 : candidates.front().imag() / M_PI;
}

double density(const LawParams& law, double e, RootMode mode) { return density(edge(law), e, mode); }

double integrated_density(const RefinedLaw& r, double e1, double e2, RootMode mode) {
  require(e1 < e2, ErrorKind::InvalidParameter, "integration bounds must satisfy E1 < E2");
  const double a = std::max(e1, -r.L);
  const double b = std::min(e2, r.L);
  if (a >= b) return 0.0;
  // Tanh-sinh clusters nodes at the interval ends, where the density has its
  // square-root singularities once the window is clipped to [-L, L]. Split at
  // zero as well so that each piece carries at most one edge.
  boost::math::quadrature::tanh_sinh<double> integrator(15);
  auto f = [&](double x) { return density(r, x, mode); };
  double total = 0.0;
  auto piece = [&](double lo, double hi) {
    if (lo >= hi) return;
    double err = 0.0;
    double l1 = 0.0;
    const double value = integrator.integrate(f, lo, hi, 1e-12, &err, &l1);
    require(std::isfinite(value) && err <= 1e-8, ErrorKind::QuadratureNonconvergence,
            "density quadrature on [" + std::to_string(lo) + ", " + std::to_string(hi) +
                "] stopped at error estimate " + std::to_string(err));
    total += value;
  };
  if (a < 0.0 && b > 0.0) {
    piece(a, 0.0);
    piece(0.0, b);
  } else {
    piece(a, b);
  }
  return total;
}

double l_dot(const RefinedLaw& r) {
  const double c4 = r.params.c4();
  return 2.0 * c4 * r.tau * r.tau * r.tau;
}

double l_dot_correction(const RefinedLaw& r) {
  const double d = r.tau_offset;
  // 2 c4 (tau³ + 1) with tau = -1 + d.
  return 2.0 * r.params.c4() * d * (3.0 - 3.0 * d + d * d);
}

double stability_margin(const LawParams& law, ComplexUpper z, RootMode mode) {
  return std::abs(z.value() + solve_w(law, z, mode));
}

}  // namespace sparsetw
