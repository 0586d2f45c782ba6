#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace cxhyp {

using ComplexScalar = std::complex<double>;

// Point of the unit ball in C^n, stored as split real/imaginary arrays.
// The homogeneous coordinate is an implicit constant 1 and is never stored.
struct ComplexPoint {
  std::vector<double> re, im;

  ComplexPoint() = default;
  ComplexPoint(std::vector<double> re_, std::vector<double> im_);
  static ComplexPoint zero(int32_t n);

  int32_t n() const { return static_cast<int32_t>(re.size()); }
  ComplexScalar coord(int32_t j) const { return {re[j], im[j]}; }
};

// Non-owning view over one point; the layout matches ComplexPoint and the
// rows of the embedding table, so both can feed the same kernels.
struct PointView {
  const double* re = nullptr;
  const double* im = nullptr;
  int32_t n = 0;

  PointView() = default;
  PointView(const double* re_, const double* im_, int32_t n_)
      : re(re_), im(im_), n(n_) {}
  PointView(const ComplexPoint& p)
      : re(p.re.data()), im(p.im.data()), n(p.n()) {}

  ComplexScalar coord(int32_t j) const { return {re[j], im[j]}; }
};

// Indefinite Hermitian inner product of signature (n, 1):
//   <<z, w>> = sum_j z_j * conj(w_j) - 1,
// the trailing -1 coming from the implicit homogeneous coordinate.
ComplexScalar hermitian_form(PointView z, PointView w);

// sum_j |z_j|^2; points of the ball satisfy ball_norm_sq(z) < 1.
double ball_norm_sq(PointView z);

// Geodesic distance between two points of the ball:
//   d(z, w) = arcosh(2 |<<z,w>>|^2 / (<<z,z>> <<w,w>>) - 1).
// The arcosh argument is >= 1 in exact arithmetic; it is clamped to 1 here
// so that roundoff near z == w cannot produce a NaN.
double distance(PointView z, PointView w);

enum class MetricMode {
  // Scalar conformal factor (1 - |z|^2)^2 / 4; this treats the metric as if
  // it were conformal to the Euclidean one, exact at the origin and along
  // radial directions, and is the default used for training.
  conformal,
  // Evaluates the full metric tensor on the given direction and rescales by
  // its reciprocal, accounting for the anisotropy of the true metric.
  quadratic_form,
};

// Squared length of the tangent vector `direction` at z under the Bergman
// metric. `direction` holds the n real parts followed by the n imaginary
// parts of the tangent components.
double metric_quadratic_form(PointView z, std::span<const double> direction);

// Metric rescale factor at z. Conformal mode returns the scalar multiplier
// (1 - |z|^2)^2 / 4 applied directly to Euclidean gradients; quadratic_form
// mode returns the value of the Bergman quadratic form on `direction` (the
// gradient itself), whose reciprocal is the multiplier.
double metric_scale(PointView z, MetricMode mode,
                    std::span<const double> direction = {});

// Distance restricted to a complex line through the origin (one complex
// coordinate). Equals the Poincare disc distance on that coordinate.
double poincare_line_distance(ComplexScalar z, ComplexScalar w);

// Distance restricted to real coordinates. Equals the Klein-Beltrami
// distance on the real unit ball:
//   2 arcosh((1 - x.y) / sqrt((1 - |x|^2)(1 - |y|^2))).
double klein_real_distance(std::span<const double> x,
                           std::span<const double> y);

namespace detail {

// Unchecked kernels for hot loops; callers guarantee points are in the ball.
ComplexScalar herm(PointView z, PointView w);
double dist_unchecked(PointView z, PointView w);

void require_in_ball(PointView z, const char* who);
void require_finite(PointView z, const char* who);

}  // namespace detail

}  // namespace cxhyp
