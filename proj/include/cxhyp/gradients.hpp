#pragma once

#include <functional>
#include <stdexcept>

#include "cxhyp/geometry.hpp"

namespace cxhyp {

// Euclidean gradient w.r.t. the 2n real coordinates (x_j, y_j) of a point.
struct Gradient {
  std::vector<double> d_re, d_im;

  Gradient() = default;
  static Gradient zero(int32_t n);
  int32_t n() const { return static_cast<int32_t>(d_re.size()); }

  // Flattened copy: n real parts followed by n imaginary parts.
  std::vector<double> flat() const;
};

// Raised when the distance gradient is evaluated at (numerically) coincident
// points, where d is not differentiable. Callers are expected to skip the
// offending pair.
struct singular_gradient_error : std::domain_error {
  using std::domain_error::domain_error;
};

// Closed-form partial derivatives of d(z, w) with respect to the real
// coordinates of z. With p the arcosh argument of the distance and
// q = |<<z,w>>|^2:
//   dd/dx_j = 4/sqrt(p^2-1) * ( Re(<<z,w>> w_j) / (<<z,z>><<w,w>>)
//                               - q x_j / (<<z,z>>^2 <<w,w>>) )
// and dd/dy_j the same with Im and y_j. Throws singular_gradient_error when
// p <= 1 + eps_d.
Gradient distance_partials(PointView z, PointView w, double eps_d = 1e-12);

// Converts a Euclidean gradient at z into a Riemannian one by rescaling with
// metric_scale. A zero gradient is returned unchanged (the quadratic form
// would be degenerate on it).
Gradient riemannian_gradient(const Gradient& euclid, PointView z,
                             MetricMode mode);

// Central finite differences of f over all 2n real coordinates, used as a
// test oracle for the closed forms above. Perturbed points must stay inside
// the ball.
Gradient finite_difference_oracle(
    const std::function<double(const ComplexPoint&)>& f, const ComplexPoint& z,
    double h = 1e-6);

namespace detail {

// Unchecked kernel: writes dd(z,w)/dx into gx[0..n) and dd/dy into gy[0..n).
// Returns false (leaving gx/gy untouched) when the pair is singular.
bool distance_partials_into(PointView z, PointView w, double* gx, double* gy,
                            double eps_d);

}  // namespace detail

}  // namespace cxhyp
