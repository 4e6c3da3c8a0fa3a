#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "sparsetw/refined_law.hpp"

using namespace sparsetw;

namespace {

// Independent edge oracle: plain bisection on Q'(w) = 1/w² - 1 - 3 c4 w² in long double.
struct EdgeOracle {
  long double tau, L;
};

EdgeOracle edge_oracle(double c4, double hi) {
  auto dq = [&](long double w) { return 1.0L / (w * w) - 1.0L - 3.0L * c4 * w * w; };
  long double lo = -1.0L, up = hi;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + up);
    (dq(mid) > 0 ? up : lo) = mid;
  }
  const long double tau = 0.5L * (lo + up);
  return {tau, -1.0L / tau - tau - c4 * tau * tau * tau};
}

std::vector<ComplexUpper> domain_grid(int ne, int neta) {
  std::vector<ComplexUpper> out;
  for (int i = 0; i < ne; ++i) {
    const double e = -3.0 + 1e-3 + (6.0 - 2e-3) * i / (ne - 1);
    for (int j = 0; j < neta; ++j) out.emplace_back(e, 1e-3 * std::pow(3e3, j / double(neta - 1)));
  }
  return out;
}

std::vector<std::string> captured;
void capture(std::string_view s) { captured.emplace_back(s); }

}  // namespace

TEST_CASE("msc") {
  CHECK(std::abs(msc({0.0, 1.0}) - cdouble(0.0, (std::sqrt(5.0) - 1.0) / 2.0)) < 1e-15);
  CHECK(std::abs(msc({2.0, 1e-9}) + 1.0) < 1e-4);
  // Closed form at z = 10i: i(sqrt(104) - 10)/2.
  const cdouble m10 = msc({0.0, 10.0});
  CHECK(std::abs(m10 - cdouble(0.0, 0.0990)) < 1e-3);
  CHECK(std::abs(m10 - cdouble(0.0, (std::sqrt(104.0) - 10.0) / 2.0)) < 1e-15);
  for (const auto& z : domain_grid(50, 20)) {
    const cdouble m = msc(z);
    REQUIRE(m.imag() > 0.0);
    REQUIRE(std::abs(1.0 + z.value() * m + m * m) <= 1e-14);
  }
}

TEST_CASE("ComplexUpper rejects the real axis") { CHECK_THROWS_AS(ComplexUpper(1.0, 0.0), Error); }

TEST_CASE("LawParams") {
  const auto law = LawParams::make(0.9, 12.0, 1.7);
  CHECK(law.qt() == 12.0 * std::exp(1.7 / 2));
  CHECK(law.c4() * 144.0 * std::exp(2 * 1.7) == doctest::Approx(0.9).epsilon(1e-14));
  CHECK_THROWS_AS(LawParams::make(-0.1, 10.0), Error);
  CHECK_THROWS_AS(LawParams::make(1.0, 0.0), Error);
  CHECK_THROWS_AS(LawParams::make(1.0, 10.0, -1.0), Error);
}

TEST_CASE("quartic_roots returns every root") {
  for (double c4 : {0.0, 1e-3, 0.02}) {
    const cdouble z(0.3, 0.2);
    const auto roots = quartic_roots(c4, z);
    CHECK(roots.size() == (c4 == 0.0 ? 2u : 4u));
    for (auto w : roots) CHECK(std::abs(law_polynomial(c4, z, w)) < 1e-9 * std::max(1.0, std::norm(w)));
  }
}

TEST_CASE("solve_w") {
  SUBCASE("c4 = 0 reproduces msc on a 100x100 grid") {
    const auto law = LawParams::make(0.0, 10.0);
    double worst = 0.0;
    for (const auto& z : domain_grid(100, 100)) worst = std::max(worst, std::abs(solve_w(law, z) - msc(z)));
    CHECK(worst <= 1e-12);
  }
  SUBCASE("closed form near z = 0") {
    const double c4 = 0.001;
    const auto law = LawParams::make(c4, 1.0);
    const double w2 = (-1.0 + std::sqrt(1.0 - 4.0 * c4)) / (2.0 * c4);
    const cdouble w = solve_w(law, {1e-9, 1e-6});
    CHECK(std::abs(w - cdouble(0.0, std::sqrt(-w2))) < 1e-5);
    CHECK(std::abs(w - cdouble(0.0, 1.0005)) < 1e-4);
  }
  SUBCASE("residual and stability on the domain") {
    for (double c4 : {1e-4, 1e-3, 1.0 / 625.0}) {
      const auto law = LawParams::make(c4, 1.0);
      for (const auto& z : domain_grid(50, 20)) {
        const cdouble w = solve_w(law, z);
        REQUIRE(w.imag() > 0.0);
        REQUIRE(std::abs(w) <= kRootRadius);
        REQUIRE(std::abs(law_polynomial(c4, z.value(), w)) <= 1e-12 * (1.0 + std::abs(z.value())));
        REQUIRE(std::abs(z.value() + w) > 1.0 / 6.0);
      }
    }
  }
  SUBCASE("strict mode refuses large c4, permissive mode warns once per call") {
    const auto law = LawParams::make(1.0, 10.0);
    CHECK_THROWS_AS(solve_w(law, {0.5, 0.1}), Error);
    captured.clear();
    const auto prev = set_warning_handler(&capture);
    const cdouble w = solve_w(law, {0.5, 0.1}, RootMode::Permissive);
    set_warning_handler(prev);
    CHECK(captured.size() == 1);
    CHECK(std::abs(law_polynomial(0.01, cdouble(0.5, 0.1), w)) < 1e-12);
    CHECK(w.imag() > 0.0);
  }
}

TEST_CASE("edge") {
  SUBCASE("c4 = 0 gives the semicircle edge") {
    const auto r = edge(LawParams::make(0.0, 10.0));
    CHECK(r.L == 2.0);
    CHECK(r.tau == -1.0);
  }
  SUBCASE("q = 10 against the bisection oracle") {
    const auto r = edge(LawParams::make(1.0, 10.0));
    const auto o = edge_oracle(0.01, -1.0 + 2.0 / 100.0);
    CHECK(r.L >= 2.0085);
    CHECK(r.L <= 2.0105);
    CHECK(std::abs(r.L - static_cast<double>(o.L)) <= 1e-12);
    CHECK(std::abs(r.tau - static_cast<double>(o.tau)) <= 1e-12);
  }
  SUBCASE("stationary point identities and invariants") {
    for (double q : {5.0, 10.0, 30.0, 300.0}) {
      for (double t : {0.0, 0.5, 3.0}) {
        const auto r = edge(LawParams::make(1.0, q, t));
        const double c4 = r.params.c4();
        const double tau = r.tau;
        CHECK(std::abs(1.0 / (tau * tau) - 1.0 - 3.0 * c4 * tau * tau) <= 1e-12);
        CHECK(std::abs(-1.0 / tau - tau - c4 * tau * tau * tau - r.L) <= 1e-12);
        CHECK(r.L >= 2.0);
        CHECK(r.L < 3.0);
        CHECK(tau > -1.0);
        CHECK(tau < -1.0 + 2.0 / (r.params.qt() * r.params.qt()));
      }
    }
  }
  SUBCASE("L - 2 - s4/q² decays like q^-4") {
    std::vector<double> lx, ly;
    for (double q : {10.0, 20.0, 40.0, 80.0}) {
      const auto r = edge(LawParams::make(1.0, q));
      lx.push_back(std::log(q));
      ly.push_back(std::log(std::abs(r.remainder)));
    }
    const double mx = (lx[0] + lx[1] + lx[2] + lx[3]) / 4, my = (ly[0] + ly[1] + ly[2] + ly[3]) / 4;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 4; ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    CHECK(std::abs(sxy / sxx + 4.0) <= 0.3);
  }
}

TEST_CASE("density") {
  CHECK(density(LawParams::make(0.0, 10.0), 0.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
  SUBCASE("closed form at E = 0") {
    const double c4 = 0.001;
    const double w2 = (-1.0 + std::sqrt(1.0 - 4.0 * c4)) / (2.0 * c4);
    const double rho = density(LawParams::make(c4, 1.0), 0.0);
    CHECK(rho == doctest::Approx(std::sqrt(-w2) / M_PI).epsilon(1e-12));
    CHECK(std::abs(rho - 0.31847) < 1e-5);
  }
  SUBCASE("zero outside the support, symmetric inside") {
    const auto r = edge(LawParams::make(1.0, 30.0));
    CHECK(density(r, r.L + 1e-6) == 0.0);
    CHECK(density(r, -r.L - 1e-6) == 0.0);
    for (int i = 0; i <= 200; ++i) {
      const double e = r.L * i / 200.0;
      REQUIRE(std::abs(density(r, e) - density(r, -e)) <= 1e-12);
      REQUIRE(density(r, e) >= 0.0);
    }
  }
}

TEST_CASE("integrated_density") {
  const auto r = edge(LawParams::make(1.0, 30.0));
  CHECK(std::abs(integrated_density(r, -r.L - 1.0, r.L + 1.0) - 1.0) <= 1e-6);
  for (double e : {0.3, 1.1, 1.9}) {
    CHECK(std::abs(integrated_density(r, -e, e) - 2.0 * integrated_density(r, 0.0, e)) <= 1e-8);
  }
  CHECK_THROWS_AS(integrated_density(r, 1.0, 0.5), Error);
  SUBCASE("square-root edge gives mass ~ delta^1.5") {
    std::vector<double> lx, ly;
    for (double d : {1e-2, 3e-3, 1e-3, 3e-4, 1e-4}) {
      lx.push_back(std::log(d));
      ly.push_back(std::log(integrated_density(r, r.L - d, r.L)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i] / lx.size();
      my += ly[i] / ly.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    CHECK(std::abs(sxy / sxx - 1.5) <= 0.05);
  }
}

TEST_CASE("l_dot") {
  CHECK(l_dot(edge(LawParams::make(0.0, 30.0))) == 0.0);
  const auto law = LawParams::make(1.0, 30.0);
  const double h = 1e-4;
  const double fd = (edge(law.at_time(h)).L - edge(law.at_time(0.0)).L) / h;  // one-sided at t = 0
  const double ld = l_dot(edge(law));
  CHECK(std::abs(ld - fd) <= 5e-5);
  CHECK(std::abs(ld + 2.0 / 900.0) <= 5e-5);
  SUBCASE("centered difference at interior times") {
    for (double t : {0.5, 2.0}) {
      const double c = (edge(law.at_time(t + h)).L - edge(law.at_time(t - h)).L) / (2 * h);
      CHECK(std::abs(l_dot(edge(law.at_time(t))) - c) <= 5e-5);
    }
  }
  SUBCASE("negative for positive s4 and consistent with the correction form") {
    for (double t : {0.0, 1.0, 10.0, 40.0}) {
      const auto r = edge(law.at_time(t));
      CHECK(l_dot(r) < 0.0);
      CHECK(l_dot_correction(r) - 2.0 * r.params.c4() == doctest::Approx(l_dot(r)).epsilon(1e-10));
    }
  }
}

TEST_CASE("stability_margin") {
  CHECK(stability_margin(LawParams::make(0.0, 10.0), {0.0, 1.0}) ==
        doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-14));
  const auto law = LawParams::make(1.0, 25.0);
  CHECK(stability_margin(law, {3.0 - 1e-6, 1e-3}) > 1.0 / 6.0);
  for (int i = 0; i <= 100; ++i) {
    const double e = -3.0 + 1e-6 + (6.0 - 2e-6) * i / 100.0;
    REQUIRE(stability_margin(law, {e, 1e-3}) > 1.0 / 6.0);
    REQUIRE(stability_margin(law, {e, 3.0}) > 1.0 / 6.0);
  }
}
