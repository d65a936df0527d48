#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mpb/errors.hpp"
#include "mpb/quadrature.hpp"
#include "mpb/volume.hpp"

using namespace mpb;
using std::numbers::pi;

namespace {

double fact(int k) { return std::tgamma(k + 1.0); }

// Even/odd-dimension Euclidean ball formulas, written independently of tgamma(d/2+1).
double l2_ball_oracle(int dim, double r) {
  if (dim % 2 == 0) {
    const int d = dim / 2;
    return std::pow(pi, d) / fact(d) * std::pow(r, dim);
  }
  const int d = (dim - 1) / 2;
  return 2.0 * fact(d) * std::pow(4 * pi, d) / fact(2 * d + 1) * std::pow(r, dim);
}

// C_m recurrences for (L2(2))^m, (L2(3))^m and (SE(2))^m products.
double c_l2_2(int m) { return m == 1 ? 1.0 : c_l2_2(m - 1) / (m * (2.0 * m - 1)); }
double c_l2_3(int m) { return m == 1 ? 4.0 / 3.0 : 8.0 * c_l2_3(m - 1) / (3.0 * m * (3.0 * m - 1) * (3.0 * m - 2)); }
double c_se2(int m) { return m == 1 ? 2.0 / 3.0 : 4.0 * c_se2(m - 1) / (3.0 * m * (3.0 * m - 1) * (3.0 * m - 2)); }

double se3_oracle(double w1, double w2, double r) {
  return pi * pi / 3.0 / (w1 * w1 * w1 * w2) *
         (2 * std::pow(r, 4) - 6 * w2 * w2 * r * r + 3 * std::pow(w2, 4) - 3 * std::pow(w2, 4) * std::cos(2 * r / w2));
}

StateSpace power(const StateSpace& s, int m, const std::vector<double>& w) {
  return StateSpace::compound(std::vector<StateSpace>(static_cast<std::size_t>(m), s), w);
}

}  // namespace

TEST_CASE("quadrature integrates smooth functions") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, pi) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(integrate([](double x) { return x * x * x; }, 0.0, 2.0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(integrate([](double) { return 1.0; }, 1.0, 1.0) == 0.0);
}

TEST_CASE("leaf ball volumes") {
  CHECK(ball_volume(StateSpace::l2_unit(2), 1) == doctest::Approx(pi).epsilon(1e-14));
  CHECK(ball_volume(StateSpace::l1_unit(3), 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(ball_volume(StateSpace::circle(), 1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(ball_volume(StateSpace::so3(), pi / 2) == doctest::Approx(pi * pi).epsilon(1e-14));
  CHECK(ball_volume(StateSpace::sphere2(), 1.0) == doctest::Approx(2 * pi * (1 - std::cos(1.0))));
  for (int d = 1; d <= 9; ++d) {
    for (double r : {0.1, 0.5, 1.0, 2.0}) {
      CHECK(ball_volume(StateSpace::l2_unit(d), r) == doctest::Approx(l2_ball_oracle(d, r)).epsilon(1e-12));
    }
  }
  CHECK(ball_volume(StateSpace::l2_unit(3), 0.0) == 0.0);
}

TEST_CASE("compact leaves saturate at their measure") {
  CHECK(ball_volume(StateSpace::circle(), 10.0) == doctest::Approx(2 * pi));
  CHECK(ball_volume(StateSpace::sphere2(), 4.0) == doctest::Approx(4 * pi));
  CHECK(ball_volume(StateSpace::so3(), 3.0) == doctest::Approx(pi * pi));
  CHECK(ball_volume(StateSpace::torus(2), 10.0) == doctest::Approx(4 * pi * pi).epsilon(1e-6));
}

TEST_CASE("compound closed forms match independent formulas") {
  const auto box2 = StateSpace::l2_unit(2);
  const auto box3 = StateSpace::l2_unit(3);
  CHECK(ball_volume(StateSpace::se2({{0, 1}, {0, 1}}), 1.0) == doctest::Approx(2 * pi / 3).epsilon(1e-12));
  CHECK(ball_volume(StateSpace::se3({{0, 1}, {0, 1}, {0, 1}}), 1.0) == doctest::Approx(se3_oracle(1, 1, 1)).epsilon(1e-12));
  CHECK(ball_volume(StateSpace::se3({{0, 1}, {0, 1}, {0, 1}}), 1.0) == doctest::Approx(0.81737).epsilon(1e-4));
  CHECK(ball_volume(StateSpace::torus(2), 0.5) == doctest::Approx(0.5).epsilon(1e-12));

  for (double w1 : {0.5, 1.0, 2.0}) {
    for (double w2 : {0.7, 1.0, 1.6}) {
      for (double r : {0.2, 0.6, 1.0}) {
        CAPTURE(w1);
        CAPTURE(w2);
        CAPTURE(r);
        CHECK(ball_volume(StateSpace::se2({{0, 1}, {0, 1}}, w1, w2), r) ==
              doctest::Approx(2 * pi / 3 / (w1 * w1 * w2) * r * r * r).epsilon(1e-12));
        CHECK(ball_volume(StateSpace::torus(2, {w1, w2}), r) ==
              doctest::Approx(2 / (w1 * w2) * r * r).epsilon(1e-12));
        CHECK(ball_volume(power(box2, 2, {w1, w2}), r) ==
              doctest::Approx(pi * pi / 6 / (w1 * w1 * w2 * w2) * std::pow(r, 4)).epsilon(1e-12));
        CHECK(ball_volume(power(box3, 2, {w1, w2}), r) ==
              doctest::Approx(4 * pi * pi / 45 / std::pow(w1 * w2, 3) * std::pow(r, 6)).epsilon(1e-12));
        CHECK(ball_volume(StateSpace::se3({{0, 1}, {0, 1}, {0, 1}}, w1, w2), r) ==
              doctest::Approx(se3_oracle(w1, w2, r)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("torus and product recurrences") {
  const std::vector<double> w{0.5, 1.5, 1.0, 2.0};
  for (int d = 1; d <= 4; ++d) {
    if (d == 1) continue;
    std::vector<double> wd(w.begin(), w.begin() + d);
    double prod = 1;
    for (double x : wd) prod *= x;
    CHECK(ball_volume(StateSpace::torus(d, wd), 0.3) ==
          doctest::Approx(std::pow(2.0, d) / fact(d) / prod * std::pow(0.3, d)).epsilon(1e-12));
  }
  for (int m = 2; m <= 4; ++m) {
    std::vector<double> wm(w.begin(), w.begin() + m);
    double p2 = 1, p3 = 1;
    for (double x : wm) {
      p2 *= 1 / (x * x);
      p3 *= 1 / (x * x * x);
    }
    const double r = 0.4;
    CHECK(ball_volume(power(StateSpace::l2_unit(2), m, wm), r) ==
          doctest::Approx(c_l2_2(m) * std::pow(pi, m) * p2 * std::pow(r, 2 * m)).epsilon(1e-12));
    CHECK(ball_volume(power(StateSpace::l2_unit(3), m, wm), r) ==
          doctest::Approx(c_l2_3(m) * std::pow(pi, m) * p3 * std::pow(r, 3 * m)).epsilon(1e-12));

    std::vector<StateSpace> robots;
    std::vector<double> ws;
    double pse = 1;
    for (int i = 0; i < m; ++i) {
      robots.push_back(StateSpace::se2({{0, 1}, {0, 1}}, w[static_cast<std::size_t>(i)], 1.0));
      ws.push_back(1.0);
      pse *= 1 / (w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)]);
    }
    CHECK(ball_volume(StateSpace::compound(robots, ws), r) ==
          doctest::Approx(c_se2(m) * std::pow(pi, m) * pse * std::pow(r, 3 * m)).epsilon(1e-12));
  }
  // S1 x SE(2), unit weights.
  const auto s1se2 = StateSpace::compound({StateSpace::circle(), StateSpace::se2({{0, 1}, {0, 1}})}, {1.0, 1.0});
  CHECK(ball_volume(s1se2, 1.0) == doctest::Approx(pi / 3).epsilon(1e-12));
}

TEST_CASE("numeric integration formula") {
  const auto l2 = StateSpace::l2_unit(2);
  const auto c = StateSpace::circle();
  CHECK(compound_ball_volume_numeric(l2, c, 1, 1, 1, 1.0) == doctest::Approx(2 * pi / 3).epsilon(1e-8));
  CHECK(compound_ball_volume_numeric(c, StateSpace::se2({{0, 1}, {0, 1}}), 1, 1, 1, 1.0) ==
        doctest::Approx(pi / 3).epsilon(1e-8));
  CHECK(compound_ball_volume_numeric(l2, c, 1, 1, 1, 0.0) == 0.0);
  CHECK_THROWS_AS(compound_ball_volume_numeric(StateSpace::sphere2(), c, 1, 1, 1, 1.0), StructuralError);
  CHECK_THROWS_AS(compound_ball_volume_numeric(StateSpace::l1_unit(2), c, 1, 1, 1, 1.0), StructuralError);

  // SE(3) through integration against the closed form.
  const auto r3 = StateSpace::l2_unit(3);
  for (double r : {0.3, 0.7, 1.2}) {
    CHECK(compound_ball_volume_numeric(r3, StateSpace::so3(), 1.3, 0.9, 1, r) ==
          doctest::Approx(se3_oracle(1.3, 0.9, r)).epsilon(1e-7));
  }
  // p = 2: L2(1) x L2(1) with unit weights is the Euclidean disk (balls are not clipped to the box).
  const auto line = StateSpace::l2_unit(1);
  CHECK(compound_ball_volume_numeric(line, line, 1, 1, 2, 0.4) == doctest::Approx(pi * 0.16).epsilon(1e-7));
}

TEST_CASE("p != 1 compounds go through the numeric path") {
  const auto line = StateSpace::l2({{-1, 1}});
  const auto disk = StateSpace::compound({line, line}, {1.0, 1.0}, 2.0);
  const auto bv = ball_volume_detailed(disk, 0.5);
  CHECK(bv.method == VolumeMethod::Numeric);
  // Full circle area: both half-lines are integrated.
  CHECK(bv.value == doctest::Approx(pi * 0.25).epsilon(1e-7));
}

TEST_CASE("sphere measures and the derivative property") {
  CHECK(sphere_surface(StateSpace::l2_unit(2), 1.0) == doctest::Approx(2 * pi));
  CHECK(sphere_surface(StateSpace::circle(), 0.3) == doctest::Approx(2.0));
  CHECK(sphere_surface(StateSpace::l1_unit(2), 2.0) == doctest::Approx(8 * std::sqrt(2.0)));
  CHECK(sphere_surface(StateSpace::sphere2(), 1.0) == doctest::Approx(2 * pi * std::sin(1.0)));
  CHECK(sphere_surface(StateSpace::so3(), 1.0) == doctest::Approx(4 * pi * std::sin(1.0) * std::sin(1.0)));
  CHECK_THROWS_AS(sphere_surface(StateSpace::l2_unit(2), 0.0), DomainError);
  CHECK_THROWS_AS(sphere_surface(StateSpace::se3({{0, 1}, {0, 1}, {0, 1}}), 0.5), UnsupportedOperation);

  auto fd = [](const StateSpace& s, double r) {
    const double h = 1e-5 * r;
    return (ball_volume(s, r + h) - ball_volume(s, r - h)) / (2 * h);
  };
  // L1(2): dB/dr = 4r while S = 4 sqrt2 r.
  const auto l1 = StateSpace::l1_unit(2);
  CHECK(fd(l1, 0.5) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::fabs(fd(l1, 0.5) / sphere_surface(l1, 0.5) - 1.0) > 0.2);
  // The cap formulas differentiate to the sphere measures.
  CHECK(fd(StateSpace::sphere2(), 1.0) == doctest::Approx(sphere_surface(StateSpace::sphere2(), 1.0)).epsilon(1e-6));
  CHECK(fd(StateSpace::so3(), 1.0) == doctest::Approx(sphere_surface(StateSpace::so3(), 1.0)).epsilon(1e-6));
}

TEST_CASE("canonical transform") {
  CHECK(canonical_transform(StateSpace::l2_unit(3), 0.7) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(canonical_transform(StateSpace::sphere2(), pi / 2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(canonical_transform(StateSpace::l1_unit(2), 1.0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
  const double r = 1.1;
  CHECK(canonical_transform(StateSpace::so3(), r) ==
        doctest::Approx(3 * (2 * r - std::sin(2 * r)) / (4 * std::sin(r) * std::sin(r))).epsilon(1e-12));
  CHECK_THROWS_AS(canonical_transform(StateSpace::circle(), 4.0), DomainError);
}

TEST_CASE("connection radius and k_n") {
  RadiusParams p{1.0, 1.0, 2, pi};
  CHECK(connection_radius(100, p) == doctest::Approx(0.17123).epsilon(1e-4));
  const auto q = radius_params_for(StateSpace::l2_unit(2));
  CHECK(q.zeta_d == doctest::Approx(pi));
  CHECK(connection_radius(100, q) == doctest::Approx(connection_radius(100, p)));
  RadiusParams p2 = p;
  p2.eta = 2.0;
  CHECK(connection_radius(100, p2) == doctest::Approx(2 * connection_radius(100, p)).epsilon(1e-15));
  // log n / n at n = e is e^-1; n is an integer so compare the n = 3 ratio to the formula instead.
  const double r3 = connection_radius(3, p);
  CHECK(r3 == doctest::Approx(2 * std::sqrt(1 / pi) * std::sqrt(0.5) * std::sqrt(std::log(3.0) / 3)));
  for (int n = 3; n < 200; ++n) CHECK(connection_radius(n + 1, p) < connection_radius(n, p));
  CHECK_THROWS_AS(connection_radius(1, p), DomainError);
  RadiusParams bad = p;
  bad.eta = 0.5;
  CHECK_THROWS_AS(connection_radius(10, bad), DomainError);

  CHECK(knn_count(100, 2) == 19);
  CHECK(knn_count(100, 1000000) == 13);
  CHECK(knn_count(2, 5) >= 1);
}

TEST_CASE("effective radius") {
  const auto plane = StateSpace::l2({{0, 20}, {0, 20}});
  const auto thin = StateSpace::compound({plane, StateSpace::circle()}, {1.0, 0.01});
  const auto params = radius_params_for(thin);
  const auto eff = effective_radius(thin, 100, params);
  CHECK(eff.projected);
  RadiusParams p1 = radius_params_for(plane);
  CHECK(eff.radius == doctest::Approx(connection_radius(100, p1)).epsilon(1e-12));
  CHECK(connection_radius(100, params) > 0.01 * pi);

  const auto fat = StateSpace::compound({plane, StateSpace::circle()}, {1.0, 100.0});
  const auto e2 = effective_radius(fat, 100, radius_params_for(fat));
  CHECK_FALSE(e2.projected);
  CHECK(e2.radius == doctest::Approx(connection_radius(100, radius_params_for(fat))));

  // Crossover: bisect for the n where r_n drops below w2 * pi.
  std::int64_t lo = 100, hi = 100;
  while (effective_radius(thin, hi, params).projected) hi *= 2;
  while (hi - lo > 1) {
    const auto mid = lo + (hi - lo) / 2;
    (effective_radius(thin, mid, params).projected ? lo : hi) = mid;
  }
  CHECK(effective_radius(thin, lo, params).projected);
  CHECK_FALSE(effective_radius(thin, hi, params).projected);

  CHECK_THROWS_AS(effective_radius(plane, 100, p1), StructuralError);
  const auto swapped = StateSpace::compound({StateSpace::l2_unit(2), StateSpace::circle()}, {1.0, 1.0});
  CHECK_THROWS_AS(effective_radius(swapped, 100, radius_params_for(swapped)), StructuralError);
}

TEST_CASE("thin compounds keep their unsaturated unit-ball coefficient") {
  const auto strip = StateSpace::compound({StateSpace::l2({{0, 20}, {0, 1}}), StateSpace::circle()}, {1.0, 0.001});
  // 2 pi / (3 w1^2 w2) from the SE(2) formula, even though the unit ball wraps the circle.
  CHECK(unit_ball_coefficient(strip) == doctest::Approx(2 * pi / 3 / 0.001).epsilon(1e-12));
  CHECK(ball_volume(strip, 1.0) < unit_ball_coefficient(strip));
  CHECK(unit_ball_coefficient(StateSpace::so3()) == doctest::Approx(pi * (2 - std::sin(2.0))));
}

TEST_CASE("monte carlo oracle") {
  Rng rng(1);
  const auto est = ball_volume_monte_carlo(StateSpace::l2_unit(2), 0.2, 200000, rng);
  CHECK(std::fabs(est.estimate - pi * 0.04) < 3 * est.std_error);
  CHECK(ball_volume_monte_carlo(StateSpace::l2_unit(2), 0.0, 1000, rng).estimate == 0.0);
  const auto full = ball_volume_monte_carlo(StateSpace::so3(), pi / 2, 10000, rng);
  CHECK(full.estimate == doctest::Approx(pi * pi));
  CHECK_THROWS_AS(ball_volume_monte_carlo(StateSpace::l2_unit(2), 0.6, 10000, rng), InfeasibleOracle);
  CHECK_THROWS_AS(ball_volume_monte_carlo(StateSpace::l2_unit(2), 0.1, 10, rng), DomainError);
}

TEST_CASE("ball volume is monotone") {
  for (const auto& s : {StateSpace::se3({{0, 1}, {0, 1}, {0, 1}}, 1.0, 0.5), StateSpace::torus(3),
                        StateSpace::compound({StateSpace::sphere2(), StateSpace::circle()}, {1.0, 1.0})}) {
    double prev = 0;
    for (int i = 1; i <= 40; ++i) {
      const double v = ball_volume(s, 0.1 * i);
      CHECK(v >= prev - 1e-9);
      prev = v;
    }
  }
}
