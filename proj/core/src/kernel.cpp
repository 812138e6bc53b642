#include "seqdf/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace seqdf {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684;

// Half-width of the validation window and of the gaussian truncation. The
// gaussian density at 8 is ~5e-15, far below every tolerance in play.
constexpr double kWindow = 8.0;

double gaussian_value(double z) {
  if (std::abs(z) > kWindow) return 0.0;
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double gaussian_deriv(double z) {
  if (std::abs(z) > kWindow) return 0.0;
  return -z * kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

// (35/32)(1 - z^2)^3 on [-1, 1]: compactly supported density whose first and
// second derivatives vanish at the support boundary, so it is C^2 on the
// whole line (the classical parabolic kernel is not).
double bump_value(double z) {
  if (std::abs(z) >= 1.0) return 0.0;
  const double u = 1.0 - z * z;
  return (35.0 / 32.0) * u * u * u;
}

double bump_deriv(double z) {
  if (std::abs(z) >= 1.0) return 0.0;
  const double u = 1.0 - z * z;
  return (35.0 / 32.0) * 3.0 * u * u * (-2.0 * z);
}

}  // namespace

Kernel Kernel::parse(const std::string& name) {
  if (name == "gaussian") return Kernel(KernelId::gaussian);
  if (name == "epanechnikov-smoothed")
    return Kernel(KernelId::epanechnikov_smoothed);
  if (name == "flat-test") return Kernel(KernelId::flat_test);
  throw std::invalid_argument(
      "unknown kernel '" + name +
      "' (choices: gaussian, epanechnikov-smoothed, flat-test)");
}

std::string Kernel::name() const {
  switch (id_) {
    case KernelId::gaussian: return "gaussian";
    case KernelId::epanechnikov_smoothed: return "epanechnikov-smoothed";
    case KernelId::flat_test: return "flat-test";
  }
  return "?";
}

double Kernel::operator()(double z) const {
  switch (id_) {
    case KernelId::gaussian: return gaussian_value(z);
    case KernelId::epanechnikov_smoothed: return bump_value(z);
    case KernelId::flat_test: return 1.0;
  }
  return 0.0;
}

double Kernel::deriv(double z) const {
  switch (id_) {
    case KernelId::gaussian: return gaussian_deriv(z);
    case KernelId::epanechnikov_smoothed: return bump_deriv(z);
    case KernelId::flat_test: return 0.0;
  }
  return 0.0;
}

bool Kernel::compact_support() const { return id_ != KernelId::flat_test; }

double Kernel::support_radius() const {
  switch (id_) {
    case KernelId::gaussian: return kWindow;
    case KernelId::epanechnikov_smoothed: return 1.0;
    case KernelId::flat_test: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

std::string KernelValidation::summary() const {
  std::ostringstream os;
  os << (passed() ? "admissible" : "NOT admissible")
     << ": integral=" << integral << " (unit: " << (unit_integral ? "ok" : "FAIL")
     << "), first_moment=" << first_moment
     << " (zero: " << (zero_first_moment ? "ok" : "FAIL")
     << "), min=" << min_value
     << " (nonnegative: " << (nonnegative ? "ok" : "FAIL")
     << "), sup=" << sup_norm
     << ", max_derivative_gap=" << max_derivative_gap
     << " (derivative: " << (derivative_consistent ? "ok" : "FAIL") << ")";
  return os.str();
}

KernelValidation validate_kernel_fns(
    const std::function<double(double)>& value,
    const std::function<double(double)>& deriv) {
  KernelValidation v;

  // Composite Simpson over [-kWindow, kWindow]. 2^15 intervals push the
  // quadrature error for these smooth integrands far below the tolerances.
  const int n = 1 << 15;
  const double step = 2.0 * kWindow / n;
  double integral = 0.0;
  double first_moment = 0.0;
  double min_value = std::numeric_limits<double>::infinity();
  double sup_norm = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = -kWindow + i * step;
    const double k = value(z);
    if (!std::isfinite(k)) {
      std::ostringstream os;
      os << "kernel value is not finite at z=" << z;
      throw std::invalid_argument(os.str());
    }
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    integral += w * k;
    first_moment += w * z * k;
    min_value = std::min(min_value, k);
    sup_norm = std::max(sup_norm, std::abs(k));
  }
  integral *= step / 3.0;
  first_moment *= step / 3.0;

  // Central differences vs the analytic derivative on a coarse sweep.
  double max_gap = 0.0;
  const double eps = 1e-5;
  for (int i = 0; i <= 1600; ++i) {
    const double z = -kWindow + i * 0.01;
    const double d = deriv(z);
    if (!std::isfinite(d)) {
      std::ostringstream os;
      os << "kernel derivative is not finite at z=" << z;
      throw std::invalid_argument(os.str());
    }
    const double fd = (value(z + eps) - value(z - eps)) / (2.0 * eps);
    max_gap = std::max(max_gap, std::abs(d - fd));
  }

  v.integral = integral;
  v.first_moment = first_moment;
  v.min_value = min_value;
  v.sup_norm = sup_norm;
  v.max_derivative_gap = max_gap;
  v.unit_integral = std::abs(integral - 1.0) <= 1e-6;
  v.zero_first_moment = std::abs(first_moment) <= 1e-6;
  v.nonnegative = min_value >= 0.0;
  v.derivative_consistent = max_gap <= 1e-6;
  return v;
}

KernelValidation validate_kernel(const Kernel& kernel) {
  return validate_kernel_fns([&kernel](double z) { return kernel(z); },
                             [&kernel](double z) { return kernel.deriv(z); });
}

}  // namespace seqdf
