#include "cxhyp/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cxhyp {

ComplexPoint::ComplexPoint(std::vector<double> re_, std::vector<double> im_)
    : re(std::move(re_)), im(std::move(im_)) {
  if (re.size() != im.size())
    throw std::invalid_argument("ComplexPoint: re/im length mismatch");
}

ComplexPoint ComplexPoint::zero(int32_t n) {
  ComplexPoint p;
  p.re.assign(static_cast<size_t>(n), 0.0);
  p.im.assign(static_cast<size_t>(n), 0.0);
  return p;
}

namespace detail {

ComplexScalar herm(PointView z, PointView w) {
  double re = 0.0, im = 0.0;
  for (int32_t j = 0; j < z.n; ++j) {
    // z_j * conj(w_j)
    re += z.re[j] * w.re[j] + z.im[j] * w.im[j];
    im += z.im[j] * w.re[j] - z.re[j] * w.im[j];
  }
  return {re - 1.0, im};
}

double dist_unchecked(PointView z, PointView w) {
  ComplexScalar zw = herm(z, w);
  double hzz = ball_norm_sq(z) - 1.0;  // <<z,z>>, real and negative
  double hww = ball_norm_sq(w) - 1.0;
  double p = 2.0 * std::norm(zw) / (hzz * hww) - 1.0;
  if (p < 1.0) p = 1.0;
  return std::acosh(p);
}

void require_finite(PointView z, const char* who) {
  for (int32_t j = 0; j < z.n; ++j) {
    if (!std::isfinite(z.re[j]) || !std::isfinite(z.im[j]))
      throw std::invalid_argument(std::string(who) +
                                  ": non-finite coordinate");
  }
}

void require_in_ball(PointView z, const char* who) {
  require_finite(z, who);
  if (ball_norm_sq(z) >= 1.0)
    throw std::domain_error(std::string(who) +
                            ": point outside the open unit ball");
}

}  // namespace detail

ComplexScalar hermitian_form(PointView z, PointView w) {
  if (z.n != w.n)
    throw std::invalid_argument("hermitian_form: dimension mismatch");
  detail::require_finite(z, "hermitian_form");
  detail::require_finite(w, "hermitian_form");
  return detail::herm(z, w);
}

double ball_norm_sq(PointView z) {
  double s = 0.0;
  for (int32_t j = 0; j < z.n; ++j) s += z.re[j] * z.re[j] + z.im[j] * z.im[j];
  return s;
}

double distance(PointView z, PointView w) {
  if (z.n != w.n) throw std::invalid_argument("distance: dimension mismatch");
  detail::require_in_ball(z, "distance");
  detail::require_in_ball(w, "distance");
  return detail::dist_unchecked(z, w);
}

double metric_quadratic_form(PointView z, std::span<const double> direction) {
  if (static_cast<int32_t>(direction.size()) != 2 * z.n)
    throw std::invalid_argument(
        "metric_quadratic_form: direction must have 2n components");
  detail::require_in_ball(z, "metric_quadratic_form");
  const double* dx = direction.data();
  const double* dy = direction.data() + z.n;
  double hzz = ball_norm_sq(z) - 1.0;
  // The direction is a tangent vector, so its homogeneous component is 0 and
  // the pairings against it carry no -1 term.
  double dd = 0.0;       // <<dz,dz>>
  double dz_re = 0.0;    // <<dz,z>>
  double dz_im = 0.0;
  for (int32_t j = 0; j < z.n; ++j) {
    dd += dx[j] * dx[j] + dy[j] * dy[j];
    dz_re += dx[j] * z.re[j] + dy[j] * z.im[j];
    dz_im += dy[j] * z.re[j] - dx[j] * z.im[j];
  }
  double det = hzz * dd - (dz_re * dz_re + dz_im * dz_im);
  return -4.0 / (hzz * hzz) * det;
}

double metric_scale(PointView z, MetricMode mode,
                    std::span<const double> direction) {
  detail::require_in_ball(z, "metric_scale");
  if (mode == MetricMode::conformal) {
    double f = 1.0 - ball_norm_sq(z);
    return f * f / 4.0;
  }
  double q = metric_quadratic_form(z, direction);
  if (q <= 0.0)
    throw std::domain_error("metric_scale: zero direction");
  return q;
}

double poincare_line_distance(ComplexScalar z, ComplexScalar w) {
  double az = std::norm(z), aw = std::norm(w);
  if (!(az < 1.0) || !(aw < 1.0))
    throw std::domain_error("poincare_line_distance: point outside disc");
  double c2 = std::norm(z * std::conj(w) - 1.0) / ((az - 1.0) * (aw - 1.0));
  double p = 2.0 * c2 - 1.0;  // cosh(d) from cosh^2(d/2)
  if (p < 1.0) p = 1.0;
  return std::acosh(p);
}

double klein_real_distance(std::span<const double> x,
                           std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("klein_real_distance: dimension mismatch");
  double xx = 0.0, yy = 0.0, xy = 0.0;
  for (size_t j = 0; j < x.size(); ++j) {
    xx += x[j] * x[j];
    yy += y[j] * y[j];
    xy += x[j] * y[j];
  }
  if (!(xx < 1.0) || !(yy < 1.0))
    throw std::domain_error("klein_real_distance: point outside ball");
  double c2 = (xy - 1.0) * (xy - 1.0) / ((xx - 1.0) * (yy - 1.0));
  double p = 2.0 * c2 - 1.0;
  if (p < 1.0) p = 1.0;
  return std::acosh(p);
}

}  // namespace cxhyp
