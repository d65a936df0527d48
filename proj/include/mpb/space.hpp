#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mpb/rng.hpp"

namespace mpb {

enum class SpaceKind { EuclideanL2, EuclideanL1, Circle, Sphere2, SO3, Compound };

const char* to_string(SpaceKind kind);

struct Bounds {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
  bool operator==(const Bounds&) const = default;
};

/// A configuration: flat coordinates laid out in the order of the space's leaves.
/// Euclidean leaves take d coordinates, Circle one angle in [0, 2pi), Sphere2 a
/// unit 3-vector, SO3 a unit quaternion (w, x, y, z).
class Point {
 public:
  Point() = default;
  explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {}
  Point(std::initializer_list<double> coords) : coords_(coords) {}

  std::size_t size() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }
  const double* data() const { return coords_.data(); }
  double* data() { return coords_.data(); }
  std::span<const double> coords() const { return coords_; }

  bool operator==(const Point&) const = default;

 private:
  std::vector<double> coords_;
};

/// Immutable description of a configuration space. Copies share the same tree.
class StateSpace {
 public:
  static StateSpace l2(std::vector<Bounds> bounds);
  static StateSpace l1(std::vector<Bounds> bounds);
  /// L2 over the unit box [0,1]^d.
  static StateSpace l2_unit(int d);
  static StateSpace l1_unit(int d);
  static StateSpace circle();
  static StateSpace sphere2();
  static StateSpace so3();
  /// Weighted compound with metric (sum_i w_i rho_i^p)^(1/p).
  static StateSpace compound(std::vector<StateSpace> children, std::vector<double> weights,
                             double p = 1.0);

  // Common named spaces.
  static StateSpace se2(std::vector<Bounds> bounds, double w_translation = 1.0, double w_rotation = 1.0);
  static StateSpace se3(std::vector<Bounds> bounds, double w_translation = 1.0, double w_rotation = 1.0);
  /// Flat torus T(d) = (S^1)^d.
  static StateSpace torus(int d, std::vector<double> weights = {});

  SpaceKind kind() const;
  bool is_leaf() const { return kind() != SpaceKind::Compound; }
  bool is_euclidean() const {
    return kind() == SpaceKind::EuclideanL2 || kind() == SpaceKind::EuclideanL1;
  }
  /// Manifold dimension.
  int dimension() const;
  /// Number of stored coordinates.
  std::size_t width() const;

  std::span<const Bounds> bounds() const;
  std::span<const StateSpace> children() const;
  std::span<const double> weights() const;
  double p() const;
  /// Coordinate offset of child i inside a compound point.
  std::size_t child_offset(std::size_t i) const;

  bool same_structure(const StateSpace& other) const;

 private:
  struct Node;
  explicit StateSpace(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Builds a point, normalizing circle angles and checking it against the space.
Point make_point(const StateSpace& space, std::vector<double> coords);
/// Throws StructuralError when the point does not fit the space layout or invariants.
void validate_point(const StateSpace& space, const Point& x);

double distance(const StateSpace& space, const Point& x, const Point& y);
/// Unchecked variant used on hot paths; both pointers must hold width() values.
double distance_unchecked(const StateSpace& space, const double* x, const double* y);

Point interpolate(const StateSpace& space, const Point& x, const Point& y, double t);
/// Writes the geodesic point at parameter t into out (out must hold width() values).
void interpolate_into(const StateSpace& space, const double* x, const double* y, double t,
                      double* out);

Point sample_uniform(const StateSpace& space, Rng& rng);

/// Supremum of the distance between two points of the space.
double extent(const StateSpace& space);
/// Lebesgue measure in the space's own (unweighted) coordinates.
double measure(const StateSpace& space);
inline int dimension(const StateSpace& space) { return space.dimension(); }

std::string describe(const StateSpace& space);

}  // namespace mpb
