#pragma once

#include <cstdint>
#include <optional>

#include "mpb/rng.hpp"
#include "mpb/space.hpp"

namespace mpb {

/// Inputs of the asymptotic-optimality connection radius.
struct RadiusParams {
  double eta = 1.0;
  double mu_free = 1.0;  ///< measure of the free space (or the ambient measure)
  int d = 1;
  double zeta_d = 1.0;  ///< unit-ball volume in the space's own metric
};

/// zeta_d: the closed-form unit-ball volume evaluated at r = 1 without
/// saturating small-weight circle or rotation factors (so a thin S1 factor keeps
/// its r^d scaling); equals ball_volume(space, 1) whenever nothing saturates.
double unit_ball_coefficient(const StateSpace& space);

/// Parameters for a space: d = dimension, zeta = unit_ball_coefficient(space) and
/// mu_free = measure(space) unless overridden.
RadiusParams radius_params_for(const StateSpace& space, double eta = 1.0,
                               std::optional<double> mu_free = std::nullopt);

enum class VolumeMethod { ClosedForm, Numeric };

struct BallVolume {
  double value = 0.0;
  VolumeMethod method = VolumeMethod::ClosedForm;
};

/// Volume of the metric ball of radius r. Closed forms cover the leaves, SE(3)
/// and every p = 1 product of Euclidean and circle factors (SE(2), T(d), L2(d)^m,
/// SE(2)^m, ...); other shapes integrate one factor at a time. Boundaryless
/// spaces saturate at their total measure; Euclidean balls are not clipped.
BallVolume ball_volume_detailed(const StateSpace& space, double r);
double ball_volume(const StateSpace& space, double r);

/// Measure of the metric sphere of radius r (leaves, Euclidean spaces, flat tori).
double sphere_surface(const StateSpace& space, double r);

/// True for spaces where dB/dr = S(r) holds and the integration formula may peel
/// them directly: L2(d), the circle and flat tori.
bool is_well_behaved(const StateSpace& space);

/// s(r) = d * B(r) / S(r).
double canonical_transform(const StateSpace& space, double r);

/// Ball volume of the weighted product space1 x space2 with metric
/// (w1 rho1^p + w2 rho2^p)^(1/p), integrating sphere shells of the well-behaved
/// first factor against balls of the second.
double compound_ball_volume_numeric(const StateSpace& space1, const StateSpace& space2, double w1,
                                    double w2, double p, double r);

/// The same integral for any p = 1 compound: the compound is flattened and its
/// first L2 or circle leaf is peeled off. nullopt when no such leaf exists.
std::optional<double> peeled_ball_volume(const StateSpace& space, double r);

/// r_n = 2 eta (mu_free / zeta_d)^(1/d) (1/d)^(1/d) (log n / n)^(1/d).
double connection_radius(std::int64_t n, const RadiusParams& params);

/// k_n = ceil(e (1 + 1/d) log n), at least 1.
int knn_count(std::int64_t n, int d);

struct EffectiveRadius {
  double radius = 0.0;
  bool projected = false;
};

/// Radius for a two-factor p = 1 compound X1 x X2 with mu(X1) >= mu(X2): when the
/// full-space radius exceeds w2 * extent(X2), every ball spans the whole second
/// factor and the radius is recomputed in X1 alone.
EffectiveRadius effective_radius(const StateSpace& space, std::int64_t n, const RadiusParams& params);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Rejection-sampling estimate of ball_volume around a center where the ball
/// cannot clip the Euclidean bounds.
MonteCarloEstimate ball_volume_monte_carlo(const StateSpace& space, double r, std::int64_t trials,
                                           Rng& rng);

/// Center point used by the Monte-Carlo oracle.
Point ball_center(const StateSpace& space);

}  // namespace mpb
