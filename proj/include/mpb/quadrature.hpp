#pragma once

#include <cmath>
#include <functional>

namespace mpb {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-8;
  int max_depth = 60;
};

namespace detail {

template <typename F>
double simpson_step(const F& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b]. The tolerance is the larger of
/// abs_tol and rel_tol times a coarse estimate of the integral magnitude.
template <typename F>
double integrate(const F& f, double a, double b, const QuadratureOptions& opt = {}) {
  if (a == b) return 0.0;
  // Seed with a 4-panel pass so integrands vanishing at the coarse nodes still refine.
  constexpr int kPanels = 4;
  const double h = (b - a) / kPanels;
  double coarse = 0.0;
  double xs[2 * kPanels + 1];
  double fs[2 * kPanels + 1];
  for (int i = 0; i <= 2 * kPanels; ++i) {
    xs[i] = a + 0.5 * h * i;
    fs[i] = f(xs[i]);
  }
  for (int i = 0; i < kPanels; ++i) {
    coarse += h / 6.0 * (fs[2 * i] + 4.0 * fs[2 * i + 1] + fs[2 * i + 2]);
  }
  const double tol = std::fmax(opt.abs_tol, opt.rel_tol * std::fabs(coarse));
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double whole = h / 6.0 * (fs[2 * i] + 4.0 * fs[2 * i + 1] + fs[2 * i + 2]);
    total += detail::simpson_step(f, xs[2 * i], fs[2 * i], xs[2 * i + 2], fs[2 * i + 2], xs[2 * i + 1],
                                  fs[2 * i + 1], whole, tol / kPanels, opt.max_depth);
  }
  return total;
}

}  // namespace mpb
