#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sastro/optimizer.hpp"
#include "sastro/problems.hpp"

using namespace sastro;

namespace {

Problem deterministic_bowl() {
  Problem p;
  p.name = "bowl";
  p.d = 2;
  p.q = 1;
  p.oracle = [](const VectorXd& t, const VectorXd&) { return t.squaredNorm(); };
  p.map = InverseMap::uniform(1);
  p.theta0 = VectorXd::Constant(2, 1.5);
  p.true_objective = [](const VectorXd& t) { return t.squaredNorm(); };
  p.true_gradient = [](const VectorXd& t) -> VectorXd { return 2.0 * t; };
  p.f_star = 0.0;
  return p;
}

RunOptions options_for(Variant v, std::int64_t nbar = 2) {
  RunOptions o;
  o.variant = v;
  o.nbar = nbar;
  return o;
}

}  // namespace

TEST_CASE("acceptance ratio") {
  CHECK(acceptance_ratio(1.0, 0.5, 1.0, 0.4).value == doctest::Approx(0.5 / 0.6));
  const auto zero = acceptance_ratio(2.0, 2.0, 1.0, 0.3);
  CHECK_FALSE(zero.degenerate);
  CHECK(zero.value == 0.0);
  CHECK(acceptance_ratio(1.0, 0.9, 1.0, 1.0 - 1e-15).degenerate);
  CHECK(acceptance_ratio(1.0, 0.9, 1.0, 1.5).degenerate);
}

TEST_CASE("radius update") {
  TrustRegionConfig c;
  c.delta_max = 10.0;
  auto u = update_radius(0.1, 0.9, 1.0, c);
  CHECK(u.Delta == doctest::Approx(0.2));
  CHECK(u.accepted);
  u = update_radius(0.1, 0.05, 1.0, c);
  CHECK(u.Delta == doctest::Approx(0.05));
  CHECK_FALSE(u.accepted);
  u = update_radius(5.0, 0.9, 0.01, c);
  CHECK(u.Delta == doctest::Approx(2.5));
  CHECK_FALSE(u.accepted);
  u = update_radius(8.0, 0.9, 10.0, c);
  CHECK(u.Delta == 10.0);
  CHECK_FALSE(update_radius(1.0, std::nullopt, 10.0, c).accepted);
}

TEST_CASE("config validation") {
  TrustRegionConfig c;
  c.gamma_down = 1.0;
  CHECK_THROWS(c.validate());
  c = TrustRegionConfig{};
  c.delta0 = 200.0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("deterministic problem decreases monotonically") {
  TrustRegionConfig c;
  c.w_max = 20000;
  RunOptions o = options_for(Variant::SASTRODF);
  o.schedule.sigma2_min = 1e-12;
  const auto trace = run(deterministic_bowl(), c, o, 0);
  double prev = trace.records.front().true_f_incumbent.value();
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    const double f = r.true_f_incumbent.value();
    CHECK(f <= prev);
    if (r.accepted) CHECK(f < prev);
    if (r.rho && *r.rho < c.eta) CHECK(r.Delta < r.Delta_used);
    prev = f;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("runs are reproducible") {
  TrustRegionConfig c;
  c.w_max = 20000;
  for (auto v : {Variant::TRODF, Variant::SASTRODF, Variant::ASTRODF_C}) {
    const auto a = run(make_ex3(), c, options_for(v), 17);
    const auto b = run(make_ex3(), c, options_for(v), 17);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      CHECK(a.records[i].theta == b.records[i].theta);
      CHECK(a.records[i].w_cum == b.records[i].w_cum);
      CHECK(a.records[i].f_tilde_incumbent == b.records[i].f_tilde_incumbent);
    }
    const auto other = run(make_ex3(), c, options_for(v), 18);
    CHECK(other.records.back().theta != a.records.back().theta);
  }
}

TEST_CASE("Ex1 with nbar = 2 reaches a small gap") {
  TrustRegionConfig c;
  c.w_max = 100000;
  const auto p = make_ex1();
  const auto trace = run(p, c, options_for(Variant::SASTRODF), 0);
  const double f0 = p.true_objective(p.theta0);
  CHECK(trace.records.back().true_f_incumbent.value() - *p.f_star < 0.05 * f0);
  CHECK(trace.reason == TerminalReason::Budget);
}

TEST_CASE("trace invariants") {
  for (auto v : {Variant::SASTRODF, Variant::ASTRODF_C, Variant::ASTRODF_B, Variant::TRODF}) {
    for (const char* name : {"ex1", "ex2", "portfolio"}) {
      auto p = make_problem(name);
      std::int64_t counted = 0;
      auto inner = p.oracle;
      p.oracle = [&counted, inner](const VectorXd& t, const VectorXd& x) {
        ++counted;
        return inner(t, x);
      };
      TrustRegionConfig c;
      c.w_max = 30000;
      const auto trace = run(p, c, options_for(v, 3), 5);
      SamplingSchedule schedule = schedule_for(v, {});
      const AdmissibleSizes sizes(3, p.q);

      REQUIRE_FALSE(trace.records.empty());
      CHECK(trace.records.back().w_cum == counted);
      // The per-point cap never lets a run overspend.
      CHECK(trace.records.back().w_cum <= c.w_max);
      for (std::size_t i = 1; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        const auto& prev = trace.records[i - 1];
        CHECK(r.w_cum > prev.w_cum);
        CHECK(r.Delta <= c.delta_max);
        if (!r.accepted) CHECK(r.theta == prev.theta);
        if (schedule.regime != Regime::Fixed) {
          for (const auto& s : r.samples) {
            CHECK(static_cast<double>(s.n) >= r.lambda);
            if (v == Variant::SASTRODF) CHECK(sizes.contains(s.n));
          }
        } else {
          for (const auto& s : r.samples) CHECK(s.n == schedule.fixed_n);
        }
      }
    }
  }
}

TEST_CASE("iteration cap and stationarity stop") {
  TrustRegionConfig c;
  c.k_max = 5;
  auto t = run(make_ex1(), c, options_for(Variant::TRODF), 0);
  CHECK(t.reason == TerminalReason::Iterations);
  CHECK(t.records.size() == 6);

  c = TrustRegionConfig{};
  c.stationarity_tol = 1e-3;
  RunOptions o = options_for(Variant::SASTRODF);
  o.schedule.sigma2_min = 1e-12;
  t = run(deterministic_bowl(), c, o, 0);
  CHECK(t.reason == TerminalReason::Stationarity);
}

TEST_CASE("median gradient norm shrinks on the toy problems") {
  for (const char* name : {"ex1", "ex2", "ex3"}) {
    const auto p = make_problem(name);
    const TrustRegionConfig c;
    std::vector<double> norms;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto trace = run(p, c, options_for(Variant::SASTRODF), seed);
      norms.push_back(p.true_gradient(trace.records.back().theta).norm());
    }
    std::sort(norms.begin(), norms.end());
    const double median = 0.5 * (norms[9] + norms[10]);
    CHECK_MESSAGE(median < 0.1 * p.true_gradient(p.theta0).norm(), std::string(name));
  }
}

TEST_CASE("argument checks") {
  TrustRegionConfig c;
  auto p = make_ex1();
  CHECK_THROWS(run(p, c, options_for(Variant::SASTRODF, 1), 0));
  p.theta0 = VectorXd::Zero(3);
  CHECK_THROWS(run(p, c, options_for(Variant::SASTRODF), 0));
  auto q = deterministic_bowl();
  q.true_gradient = nullptr;
  c.stationarity_tol = 1e-3;
  CHECK_THROWS(run(q, c, options_for(Variant::SASTRODF), 0));
}
