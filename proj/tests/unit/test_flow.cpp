#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <sstream>
#include <string>

#include "sparsetw/edge_stats.hpp"
#include "sparsetw/flow.hpp"

using namespace sparsetw;

TEST_CASE("default_t_grid") {
  const auto g = default_t_grid(1000);
  CHECK(g.size() == 26);
  CHECK(g.front() == 0.0);
  CHECK(g[1] == doctest::Approx(1e-3));
  CHECK(g.back() == doctest::Approx(6.0 * std::log(1000.0)));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}

TEST_CASE("trajectory") {
  SUBCASE("s4 = 0 stays on the semicircle edge") {
    const auto traj = trajectory(LawParams::make(0.0, 30.0), default_t_grid(500));
    for (const auto& r : traj.rows) {
      CHECK(r.Lt == 2.0);
      CHECK(r.Ldot == 0.0);
    }
  }
  const auto law0 = LawParams::make(1.0, 30.0);
  const auto grid = default_t_grid(1000);
  const auto traj = trajectory(law0, grid);
  SUBCASE("closed-form q_t and c4(t)") {
    for (const auto& r : traj.rows) {
      CHECK(r.qt == doctest::Approx(30.0 * std::exp(r.t / 2)).epsilon(1e-14));
      CHECK(law0.at_time(r.t).c4() == doctest::Approx(std::exp(-2 * r.t) * law0.c4()).epsilon(1e-14));
    }
  }
  SUBCASE("monotone edge with negative derivative") {
    for (std::size_t i = 0; i < traj.rows.size(); ++i) {
      CHECK(traj.rows[i].Ldot < 0.0);
      if (i > 0) {
        CHECK(traj.rows[i].qt > traj.rows[i - 1].qt);
        CHECK(traj.rows[i].Lt <= traj.rows[i - 1].Lt);
      }
    }
  }
  SUBCASE("endpoint reaches the semicircle edge") {
    const double t_end = grid.back();
    const double c4_end = law0.at_time(t_end).c4();
    CHECK(c4_end <= 1e-20);
    CHECK(std::abs(traj.rows.back().Lt - 2.0) <= 10.0 * c4_end);
  }
  SUBCASE("finite differences of L where double precision resolves them") {
    const double h = 1e-4;
    for (double t : grid) {
      const double c4 = law0.at_time(t).c4();
      if (c4 < 1e-5) continue;
      const double fd = (edge(law0.at_time(t + h)).L - edge(law0.at_time(std::max(t - h, 0.0))).L) /
                        (t + h - std::max(t - h, 0.0));
      const double tol = t >= h ? 10.0 * c4 * c4 : 5e-5;  // one-sided at t = 0
      CHECK(std::abs(l_dot(edge(law0.at_time(t))) - fd) <= tol);
    }
  }
  SUBCASE("finite differences of L - 2 - c4 across the whole grid") {
    const double h = 1e-4;
    for (double t : grid) {
      if (t < h) continue;
      const auto r = edge(law0.at_time(t));
      const double fd = (edge(law0.at_time(t + h)).remainder - edge(law0.at_time(t - h)).remainder) / (2 * h);
      const double c4 = r.params.c4();
      CHECK(std::abs(l_dot_correction(r) - fd) <= 10.0 * c4 * c4);
    }
  }
  SUBCASE("grid validation") {
    CHECK_THROWS_AS(trajectory(law0, std::vector<double>{0.1, 0.2}), Error);
    CHECK_THROWS_AS(trajectory(law0, std::vector<double>{0.0, 0.2, 0.2}), Error);
  }
  SUBCASE("CSV") {
    std::ostringstream os;
    write_trajectory_csv(FlowTrajectory{}, os);
    CHECK(os.str() == "t,qt,Lt,Ldot\n");
    std::ostringstream full;
    write_trajectory_csv(traj, full);
    const std::string text = full.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 27);
  }
}

TEST_CASE("flow_local_law_check") {
  const int n = 700;
  const double q = 25.0;
  const auto h0 = sample_sparse_generic(SparsityProfile::from_q(n, q, 0.0, 1.0), RngStream{41, 0});
  const auto w = sample_goe_zero_diag(n, RngStream{41, 1});
  const auto law0 = LawParams::make(1.0, q);
  const auto grid = default_scan_grid(n);
  SUBCASE("t = 0 equals a plain scan of H0") {
    const std::vector<double> ts{0.0};
    const auto reps = flow_local_law_check(h0, w, ts, law0, grid);
    const auto plain = local_law_scan(eigen(h0), law0, grid);
    REQUIRE(reps.size() == 1);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(reps[0].rows[i].ratio == plain.rows[i].ratio);
  }
  SUBCASE("parallel equals serial") {
    const std::vector<double> ts{0.0, 0.2, 1.0, 3.0};
    const auto a = flow_local_law_check(h0, w, ts, law0, grid);
    const auto b = flow_local_law_check_serial(h0, w, ts, law0, grid);
    for (std::size_t k = 0; k < ts.size(); ++k)
      for (std::size_t i = 0; i < grid.size(); ++i) REQUIRE(a[k].rows[i].m == b[k].rows[i].m);
  }
  SUBCASE("t = 20 looks like a fresh GOE against the semicircle") {
    // Grid points of one scan share a spectrum, so each draw contributes one
    // point; both samples visit the same sequence of grid points.
    const auto law_late = law0.at_time(20.0);
    const auto goe_law = LawParams::make(0.0, law_late.qt());
    std::vector<double> a, b;
    for (std::uint64_t k = 0; k < 120; ++k) {
      const std::vector<GridPoint> point{grid[(k * 7919) % grid.size()]};
      const auto hk = sample_sparse_generic(SparsityProfile::from_q(n, q, 0.0, 1.0), RngStream{44, k});
      const auto wk = sample_goe_zero_diag(n, RngStream{45, k});
      const std::vector<double> ts{0.0, 20.0};
      a.push_back(flow_local_law_check(hk, wk, ts, law0, point)[1].rows[0].ratio);
      b.push_back(local_law_scan(eigen(sample_goe_zero_diag(n, RngStream{46, k})), goe_law, point).rows[0].ratio);
    }
    CHECK(two_sample_ks(a, b).p_value > 0.01);
  }
  SUBCASE("mismatched inputs") {
    const auto small = sample_goe_zero_diag(10, RngStream{1, 1});
    CHECK_THROWS_AS(flow_local_law_check(h0, small, std::vector<double>{0.0}, law0, grid), Error);
  }
}

TEST_CASE("flow local law at N = 2000") {
  const int n = 2000;
  const double q = std::pow(n, 0.45);
  const auto h0 = sample_sparse_generic(SparsityProfile::from_q(n, q, 0.0, 1.0), RngStream{43, 0});
  const auto w = sample_goe_zero_diag(n, RngStream{43, 1});
  const auto ts = default_t_grid(n);
  const auto reps = flow_local_law_check(h0, w, ts, LawParams::make(1.0, q), default_scan_grid(n));
  for (const auto& rep : reps) CHECK(rep.fraction_within(std::pow(n, 0.15)) >= 0.9);
}
