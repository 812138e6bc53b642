#pragma once

#include <functional>
#include <string>

namespace seqdf {

// Available smoothing kernels.
//
//  gaussian               standard normal density, truncated to |z| <= 8 where
//                         it is below 7e-15; C^2 on the truncation window.
//  epanechnikov_smoothed  polynomial bump (35/32)(1-z^2)^3 on [-1, 1]: the
//                         C^2-smoothed replacement for the classical parabolic
//                         kernel, with matching support and unit integral.
//  flat_test              K == 1 everywhere. Not integrable, so it fails
//                         validation and is rejected by production monitoring
//                         configs; it exists because a flat kernel reduces the
//                         weighted statistics to their classical unweighted
//                         forms, which is the basis of the oracle tests.
enum class KernelId { gaussian, epanechnikov_smoothed, flat_test };

// Weighting kernel with analytic derivative. Value type; immutable and safe
// to share across threads.
class Kernel {
 public:
  explicit Kernel(KernelId id = KernelId::gaussian) : id_(id) {}

  // Accepts "gaussian", "epanechnikov-smoothed", "flat-test".
  // Throws std::invalid_argument for anything else, listing the choices.
  static Kernel parse(const std::string& name);

  KernelId id() const { return id_; }
  std::string name() const;

  double operator()(double z) const;  // K(z)
  double deriv(double z) const;       // K'(z)

  // True when K vanishes outside [-support_radius(), support_radius()].
  // The gaussian reports its truncation radius here so that weight tables
  // can be kept short.
  bool compact_support() const;
  double support_radius() const;

 private:
  KernelId id_;
};

// Result of the numeric admissibility check. A kernel is admissible when it
// is a symmetric density (unit integral, zero first moment, nonnegative,
// bounded) and its analytic derivative matches central differences.
struct KernelValidation {
  bool unit_integral = false;
  bool zero_first_moment = false;
  bool nonnegative = false;
  bool derivative_consistent = false;

  double integral = 0.0;
  double first_moment = 0.0;
  double min_value = 0.0;
  double sup_norm = 0.0;
  double max_derivative_gap = 0.0;

  bool passed() const {
    return unit_integral && zero_first_moment && nonnegative &&
           derivative_consistent;
  }
  std::string summary() const;
};

// Checks admissibility on the window [-8, 8] by composite Simpson quadrature
// and a central-difference sweep. Throws std::invalid_argument naming the
// offending z if the kernel or its derivative evaluates to a non-finite value.
KernelValidation validate_kernel(const Kernel& kernel);

// Same check for externally supplied value/derivative functions (used to
// exercise the validator itself against deliberately broken kernels).
KernelValidation validate_kernel_fns(
    const std::function<double(double)>& value,
    const std::function<double(double)>& deriv);

}  // namespace seqdf
