#include "cxhyp/gradients.hpp"

#include <cmath>

namespace cxhyp {

Gradient Gradient::zero(int32_t n) {
  Gradient g;
  g.d_re.assign(static_cast<size_t>(n), 0.0);
  g.d_im.assign(static_cast<size_t>(n), 0.0);
  return g;
}

std::vector<double> Gradient::flat() const {
  std::vector<double> out;
  out.reserve(d_re.size() * 2);
  out.insert(out.end(), d_re.begin(), d_re.end());
  out.insert(out.end(), d_im.begin(), d_im.end());
  return out;
}

namespace detail {

bool distance_partials_into(PointView z, PointView w, double* gx, double* gy,
                            double eps_d) {
  ComplexScalar zw = herm(z, w);
  double hzz = ball_norm_sq(z) - 1.0;
  double hww = ball_norm_sq(w) - 1.0;
  double den = hzz * hww;  // product of two negative reals, positive
  double q = std::norm(zw);
  double p = 2.0 * q / den - 1.0;
  if (p <= 1.0 + eps_d) return false;
  double s = 4.0 / std::sqrt(p * p - 1.0);
  double qden2 = q / (hzz * hzz * hww);  // negative
  for (int32_t j = 0; j < z.n; ++j) {
    // <<z,w>> * w_j
    double cr = zw.real() * w.re[j] - zw.imag() * w.im[j];
    double ci = zw.real() * w.im[j] + zw.imag() * w.re[j];
    gx[j] = s * (cr / den - qden2 * z.re[j]);
    gy[j] = s * (ci / den - qden2 * z.im[j]);
  }
  return true;
}

}  // namespace detail

Gradient distance_partials(PointView z, PointView w, double eps_d) {
  if (z.n != w.n)
    throw std::invalid_argument("distance_partials: dimension mismatch");
  detail::require_in_ball(z, "distance_partials");
  detail::require_in_ball(w, "distance_partials");
  Gradient g = Gradient::zero(z.n);
  if (!detail::distance_partials_into(z, w, g.d_re.data(), g.d_im.data(),
                                      eps_d))
    throw singular_gradient_error(
        "distance_partials: coincident points, gradient undefined");
  return g;
}

Gradient riemannian_gradient(const Gradient& euclid, PointView z,
                             MetricMode mode) {
  if (euclid.n() != z.n)
    throw std::invalid_argument("riemannian_gradient: dimension mismatch");
  bool all_zero = true;
  for (int32_t j = 0; j < z.n && all_zero; ++j)
    if (euclid.d_re[j] != 0.0 || euclid.d_im[j] != 0.0) all_zero = false;
  if (all_zero) return euclid;

  double scale;
  if (mode == MetricMode::conformal) {
    scale = metric_scale(z, mode);
  } else {
    std::vector<double> dir = euclid.flat();
    scale = 1.0 / metric_scale(z, mode, dir);
  }
  Gradient g = euclid;
  for (int32_t j = 0; j < g.n(); ++j) {
    g.d_re[j] *= scale;
    g.d_im[j] *= scale;
  }
  return g;
}

Gradient finite_difference_oracle(
    const std::function<double(const ComplexPoint&)>& f, const ComplexPoint& z,
    double h) {
  int32_t n = z.n();
  Gradient g = Gradient::zero(n);
  ComplexPoint probe = z;
  auto central = [&](double* slot) {
    double saved = *slot;
    *slot = saved + h;
    if (ball_norm_sq(probe) >= 1.0)
      throw std::domain_error(
          "finite_difference_oracle: perturbation leaves the ball");
    double fp = f(probe);
    *slot = saved - h;
    double fm = f(probe);
    *slot = saved;
    return (fp - fm) / (2.0 * h);
  };
  for (int32_t j = 0; j < n; ++j) g.d_re[j] = central(&probe.re[j]);
  for (int32_t j = 0; j < n; ++j) g.d_im[j] = central(&probe.im[j]);
  return g;
}

}  // namespace cxhyp
