#include "pcae/loss_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace pcae {
namespace {

ArrayFn elementwise(ScalarFn fn) {
  return [fn = std::move(fn)](const Array& m) -> Array {
    return m.unaryExpr([&fn](double v) { return fn(v); });
  };
}

double clamp_unit(double t) { return std::clamp(t, -1.0, 1.0); }

// Central difference with a step that shrinks near the +-1 endpoints, where
// partial losses may blow up.
double partial_slope(const ScalarFn& fn, double t) {
  double h = 5e-6 * (1.0 - std::abs(t) + 1e-5);
  return (fn(t + h) - fn(t - h)) / (2.0 * h);
}

}  // namespace

double invert_increasing(const ScalarFn& fn, double target, double lo,
                         double hi) {
  require(lo < hi, "invert_increasing: empty bracket");
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval narrowed to machine width
    if (fn(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LossKernel cross_entropy_kernel() {
  LossKernel k;
  k.id = "xent";
  k.partials.loss_plus = [](double t) { return std::log(2.0) - std::log1p(t); };
  k.partials.loss_minus = [](double t) {
    return std::log(2.0) - std::log1p(-t);
  };
  k.gamma = [](double x) { return std::log1p(x) - std::log1p(-x); };
  k.gamma_inverse = [](double m) { return std::tanh(0.5 * m); };
  // ln(1+e^m) + ln(1+e^-m), written to stay exact for large |m|.
  k.psi = [](double m) {
    double a = std::abs(m);
    return a + 2.0 * std::log1p(std::exp(-a));
  };
  k.psi_prime = [](double m) { return std::tanh(0.5 * m); };
  k.transfer = k.psi_prime;
  k.psi_map = [](const Array& m) -> Array {
    Array a = m.abs();
    Array out =
        a + 2.0 * (-a).exp().unaryExpr([](double v) { return std::log1p(v); });
    return out;
  };
  k.psi_prime_map = [](const Array& m) -> Array { return (0.5 * m).tanh(); };
  k.transfer_map = k.psi_prime_map;
  return k;
}

LossKernel hamming_kernel() {
  LossKernel k;
  k.id = "hamming";
  k.partials.loss_plus = [](double t) { return 0.5 * (1.0 - t); };
  k.partials.loss_minus = [](double t) { return 0.5 * (1.0 + t); };
  k.gamma = [](double x) { return x; };
  k.gamma_inverse = clamp_unit;
  k.psi = [](double m) { return std::max(std::abs(m), 1.0); };
  k.psi_prime = [](double m) {
    if (std::abs(m) <= 1.0) return 0.0;
    return m > 0.0 ? 1.0 : -1.0;
  };
  k.transfer = clamp_unit;
  k.psi_map = [](const Array& m) -> Array { return m.abs().max(1.0); };
  k.psi_prime_map = [](const Array& m) -> Array {
    return (m.abs() > 1.0).select(m.sign(), Array::Zero(m.rows(), m.cols()));
  };
  k.transfer_map = [](const Array& m) -> Array { return m.min(1.0).max(-1.0); };
  return k;
}

LossKernel general_kernel(const std::string& id, PartialLossPair partials) {
  require(static_cast<bool>(partials.loss_plus) &&
              static_cast<bool>(partials.loss_minus),
          "general_kernel: both partial losses must be set");

  // Shared so every derived closure sees the same pair.
  auto p = std::make_shared<PartialLossPair>(std::move(partials));

  // Validate shape on a grid of strictly interior points.
  constexpr int kGrid = 64;
  double prev_plus = 0.0, prev_minus = 0.0;
  for (int j = 0; j <= kGrid; ++j) {
    double t = -1.0 + 2.0 * (j + 1) / (kGrid + 2.0);
    double lp = p->loss_plus(t);
    double lm = p->loss_minus(t);
    require(std::isfinite(lp) && std::isfinite(lm),
            "general_kernel: partial losses must be finite on (-1, 1)");
    if (j > 0) {
      require(lp < prev_plus,
              "general_kernel: loss_plus must be strictly decreasing");
      require(lm > prev_minus,
              "general_kernel: loss_minus must be strictly increasing");
    }
    prev_plus = lp;
    prev_minus = lm;
  }
  require(std::isfinite(p->loss_plus(1.0)) && std::isfinite(p->loss_minus(-1.0)),
          "general_kernel: correct-endpoint losses must be finite");

  LossKernel k;
  k.id = id;
  k.partials = *p;
  k.gamma = [p](double x) {
    require(x >= -1.0 && x <= 1.0, "gamma: argument outside [-1, 1]");
    return p->loss_minus(x) - p->loss_plus(x);
  };

  // Saturation thresholds; +-inf when the corresponding partial diverges.
  double gamma_lo = p->loss_minus(-1.0) - p->loss_plus(-1.0);
  double gamma_hi = p->loss_minus(1.0) - p->loss_plus(1.0);
  double floor_minus = 2.0 * p->loss_minus(-1.0);  // psi offset below gamma_lo
  double floor_plus = 2.0 * p->loss_plus(1.0);     // psi offset above gamma_hi
  ScalarFn gamma_fn = k.gamma;

  k.gamma_inverse = [p, gamma_fn, gamma_lo, gamma_hi](double m) {
    if (m <= gamma_lo) return -1.0;
    if (m >= gamma_hi) return 1.0;
    return invert_increasing(gamma_fn, m, -1.0, 1.0);
  };
  ScalarFn ginv = k.gamma_inverse;

  k.psi = [p, ginv, gamma_lo, gamma_hi, floor_minus, floor_plus](double m) {
    if (m <= gamma_lo) return -m + floor_minus;
    if (m >= gamma_hi) return m + floor_plus;
    double t = ginv(m);
    // Keep the evaluation strictly interior; only relevant once the
    // bisection result has rounded onto an endpoint.
    t = std::clamp(t, -kFeedbackClampMax, kFeedbackClampMax);
    return p->loss_plus(t) + p->loss_minus(t);
  };
  k.psi_prime = [p, ginv, gamma_lo, gamma_hi](double m) {
    if (m <= gamma_lo) return -1.0;
    if (m >= gamma_hi) return 1.0;
    double t = ginv(m);
    if (t >= 1.0 - 1e-9) return 1.0;
    if (t <= -1.0 + 1e-9) return -1.0;
    // Chain rule through t = gamma_inverse(m):
    //   psi'(m) = (l+' + l-')(t) / (l-' - l+')(t).
    double sp = partial_slope(p->loss_plus, t);
    double sm = partial_slope(p->loss_minus, t);
    return (sp + sm) / (sm - sp);
  };
  k.transfer = [ginv](double m) { return clamp_unit(ginv(m)); };
  k.psi_map = elementwise(k.psi);
  k.psi_prime_map = elementwise(k.psi_prime);
  k.transfer_map = elementwise(k.transfer);
  return k;
}

LossKernel kernel_by_id(const std::string& id) {
  if (id == "xent") return cross_entropy_kernel();
  if (id == "hamming") return hamming_kernel();
  throw std::invalid_argument("unknown loss kernel id: " + id);
}

Vector per_example_losses(const Matrix& x, const Matrix& x_tilde,
                          const LossKernel& kernel, bool clamp_feedback) {
  require(x.rows() == x_tilde.rows() && x.cols() == x_tilde.cols(),
          "reconstruction_loss: shape mismatch between data and "
          "reconstructions");
  require(x.cols() > 0, "reconstruction_loss: empty batch");

  Vector losses = Vector::Zero(x.cols());
  for (Index i = 0; i < x.cols(); ++i) {
    double total = 0.0;
    for (Index v = 0; v < x.rows(); ++v) {
      double xv = x(v, i);
      double t = x_tilde(v, i);
      require(std::abs(xv) <= 1.0,
              "reconstruction_loss: data entry outside [-1, 1]");
      require(std::abs(t) <= 1.0,
              "reconstruction_loss: reconstruction entry outside [-1, 1]");
      if (clamp_feedback) t = std::clamp(t, -kFeedbackClampMax, kFeedbackClampMax);
      double weight_plus = 0.5 * (1.0 + xv);
      double weight_minus = 0.5 * (1.0 - xv);
      if (weight_plus != 0.0) total += weight_plus * kernel.partials.loss_plus(t);
      if (weight_minus != 0.0)
        total += weight_minus * kernel.partials.loss_minus(t);
    }
    losses(i) = total;
  }
  if (!losses.allFinite())
    throw std::overflow_error(
        "reconstruction_loss: total is not finite (a reconstruction sits on "
        "the wrong +-1 endpoint of a divergent partial loss)");
  return losses;
}

double reconstruction_loss(const Matrix& x, const Matrix& x_tilde,
                           const LossKernel& kernel, bool clamp_feedback) {
  return per_example_losses(x, x_tilde, kernel, clamp_feedback).mean();
}

double reconstruction_loss(const DataBatch& x, const Matrix& x_tilde,
                           const LossKernel& kernel, bool clamp_feedback) {
  return reconstruction_loss(x.x, x_tilde, kernel, clamp_feedback);
}

}  // namespace pcae
