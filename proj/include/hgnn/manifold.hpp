#pragma once

#include <span>
#include <vector>

#include "hgnn/common.hpp"

// Curvature-parameterized Poincare-ball and Klein-model operations.
// All tangent-space operations are anchored at the origin; there is no
// parallel transport. Every map that lands on the ball is followed by a
// margin projection so downstream atanh evaluations stay finite.
namespace hgnn::manifold {

// Projection margin: points are kept at radius <= (1 - kBallEps)/sqrt(c).
inline constexpr double kBallEps = 1e-5;
// atanh arguments are clamped to 1 - kAtanhEps before evaluation.
inline constexpr double kAtanhEps = 1e-7;
// Norms below this are treated as the origin.
inline constexpr double kZeroEps = 1e-12;

// Positive curvature parameter c of the ball {x : c * ||x||^2 < 1}.
struct Curvature {
  double c;
  explicit Curvature(double value) : c(value) {
    if (!(value > 0.0)) throw InvalidInput("curvature must be positive");
  }
};

struct PoincarePoint {
  std::vector<double> coords;
  Curvature curv;
};

struct TangentVector {
  std::vector<double> coords;
  Curvature curv;
};

struct KleinPoint {
  std::vector<double> coords;
  Curvature curv;
};

enum class MeanMode {
  kUnweighted,       // plain mean of Klein coordinates
  kLorentzWeighted,  // Einstein midpoint with Lorentz factors
};

// tanh(sqrt(c)||v||) * v / (sqrt(c)||v||); ||v|| below kZeroEps maps to the
// origin. Result is projected to the ball margin.
PoincarePoint exp_map0(const TangentVector& v);

// atanh(sqrt(c)||x||) * x / (sqrt(c)||x||); the atanh argument is clamped to
// 1 - kAtanhEps. Throws DomainError for points outside the ball beyond
// tolerance.
TangentVector log_map0(const PoincarePoint& x);

// x_K = 2 x_P / (1 + c ||x_P||^2)
KleinPoint poincare_to_klein(const PoincarePoint& x);

// x_P = x_K / (1 + sqrt(1 - c ||x_K||^2))
PoincarePoint klein_to_poincare(const KleinPoint& x);

// Converts to Klein coordinates, averages, converts back. The default is the
// unweighted mean; kLorentzWeighted applies Einstein-midpoint factors
// gamma_u = 1 / sqrt(1 - c ||x_u||_K^2).
PoincarePoint klein_mean(std::span<const PoincarePoint> points,
                         MeanMode mode = MeanMode::kUnweighted);

// d(x,y) = (1/sqrt(c)) acosh(1 + 2c||x-y||^2 / ((1-c||x||^2)(1-c||y||^2)))
double hyperbolic_distance(const PoincarePoint& x, const PoincarePoint& y);

// If c||x||^2 >= (1 - kBallEps)^2, rescales x to norm (1 - kBallEps)/sqrt(c);
// interior points pass through unchanged.
PoincarePoint project_to_ball(std::vector<double> x, Curvature c);

double norm(std::span<const double> v);

}  // namespace hgnn::manifold
