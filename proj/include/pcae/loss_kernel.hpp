#pragma once

#include "pcae/types.hpp"

#include <functional>
#include <string>

namespace pcae {

using ScalarFn = std::function<double(double)>;
using ArrayFn = std::function<Array(const Array&)>;

// Partial losses for scoring a soft reconstruction t in [-1, +1] against a
// true bit: loss_plus is paid when the bit is +1 and must be strictly
// decreasing in t; loss_minus is paid when the bit is -1 and must be strictly
// increasing. Either may diverge to +inf at the wrong endpoint, but the
// correct-endpoint values loss_plus(+1) and loss_minus(-1) must be finite.
struct PartialLossPair {
  ScalarFn loss_plus;
  ScalarFn loss_minus;
};

// A reconstruction loss plus everything the solvers need alongside it.
//
//   gamma(x)        = loss_minus(x) - loss_plus(x), strictly increasing
//   gamma_inverse   = pseudoinverse of gamma, clamped into [-1, +1]
//   psi(m)          = convex potential paired with gamma; its slope saturates
//                     at +-1, which is what keeps decoder logits meaningful
//   psi_prime(m)    = derivative of psi (a subgradient at kink points)
//   transfer(m)     = optimal reconstruction value for a logit m; equals
//                     gamma_inverse on the interior and +-1 past saturation
//
// The *_map members are vectorized forms of the hot-path functions and always
// agree elementwise with their scalar counterparts.
struct LossKernel {
  std::string id;
  PartialLossPair partials;
  ScalarFn gamma;
  ScalarFn gamma_inverse;
  ScalarFn psi;
  ScalarFn psi_prime;
  ScalarFn transfer;
  ArrayFn psi_map;
  ArrayFn psi_prime_map;
  ArrayFn transfer_map;

  Array psi_of(const Array& m) const { return psi_map(m); }
  Array psi_prime_of(const Array& m) const { return psi_prime_map(m); }
  Array transfer_of(const Array& m) const { return transfer_map(m); }
};

// Closed-form kernel for the logarithmic (cross-entropy) loss
//   loss_plus(t) = ln(2/(1+t)),  loss_minus(t) = ln(2/(1-t)).
LossKernel cross_entropy_kernel();

// Closed-form kernel for the Hamming loss
//   loss_plus(t) = (1-t)/2,  loss_minus(t) = (1+t)/2.
// psi(m) = max(|m|, 1); its subgradient convention is 0 for |m| <= 1 and
// sign(m) outside.
LossKernel hamming_kernel();

// Builds a kernel numerically from an arbitrary pair of partial losses:
// gamma_inverse by bisection, psi/psi_prime from the piecewise construction
//   psi(m) = -m + 2 loss_minus(-1)            for m below gamma(-1)
//          = (loss_plus + loss_minus)(t)      for t = gamma_inverse(m)
//          = +m + 2 loss_plus(+1)             for m above gamma(+1)
// Monotonicity of the partials is validated on a grid of interior points.
// Accuracy degrades once gamma_inverse(m) is within ~1e-9 of +-1 (for the
// cross-entropy partials that means |m| beyond ~40); the closed-form kernels
// do not have this limitation.
LossKernel general_kernel(const std::string& id, PartialLossPair partials);

// Lookup by id: "xent" or "hamming".
LossKernel kernel_by_id(const std::string& id);

// Reconstruction values are clamped to this magnitude before being fed back
// into partial losses that diverge at +-1 (training-loop reporting only).
constexpr double kFeedbackClampMax = 1.0 - 1e-12;

// Mean over examples of the summed per-bit loss
//   (1+x)/2 * loss_plus(t) + (1-x)/2 * loss_minus(t).
// x and x_tilde are V x n with entries in [-1, +1]; terms whose weight is
// exactly zero are skipped so that a perfect +-1 reconstruction costs 0 even
// when the opposite partial diverges. A non-finite total throws
// std::overflow_error unless clamp_feedback is set, in which case x_tilde is
// evaluated at magnitudes capped to kFeedbackClampMax.
double reconstruction_loss(const Matrix& x, const Matrix& x_tilde,
                           const LossKernel& kernel,
                           bool clamp_feedback = false);
double reconstruction_loss(const DataBatch& x, const Matrix& x_tilde,
                           const LossKernel& kernel,
                           bool clamp_feedback = false);

// Per-example summed per-bit losses, one entry per column of x; the mean of
// this vector is reconstruction_loss. Same validation and overflow rules.
Vector per_example_losses(const Matrix& x, const Matrix& x_tilde,
                          const LossKernel& kernel,
                          bool clamp_feedback = false);

// Bisection solve of fn(t) = target for increasing fn on [lo, hi]; evaluates
// fn only at interior midpoints and runs the interval down to machine
// precision.
double invert_increasing(const ScalarFn& fn, double target, double lo,
                         double hi);

}  // namespace pcae
