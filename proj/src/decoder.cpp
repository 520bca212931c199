#include "pcae/decoder.hpp"

#include "pcae/parallel.hpp"
#include "pcae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pcae {
namespace {

void check_row_args(const Vector& w_row, const Vector& b_row,
                    const Encodings& e) {
  require(e.examples() > 0, "decoder: empty encoding batch");
  require(w_row.size() == e.hidden() && b_row.size() == e.hidden(),
          "decoder: weight/correlation row length must match hidden size");
}

double l1_norm(const Vector& w) { return w.lpNorm<1>(); }

Vector sign_subgradient(const Vector& w) {
  return w.unaryExpr([](double v) {
    if (v > 0.0) return 1.0;
    if (v < 0.0) return -1.0;
    return 0.0;  // subgradient choice at 0
  });
}

}  // namespace

double slack(const Vector& w_row, const Vector& b_row, const Encodings& e,
             const LossKernel& kernel, double l1_epsilon) {
  check_row_args(w_row, b_row, e);
  Array logits = (e.e.transpose() * w_row).array();
  double mean_psi = kernel.psi_of(logits).sum() / static_cast<double>(e.examples());
  double value = -b_row.dot(w_row) + mean_psi;
  if (l1_epsilon != 0.0) value += l1_epsilon * l1_norm(w_row);
  return value;
}

Vector slack_gradient(const Vector& w_row, const Vector& b_row,
                      const Encodings& e, const LossKernel& kernel,
                      double l1_epsilon) {
  check_row_args(w_row, b_row, e);
  Array logits = (e.e.transpose() * w_row).array();
  Vector mean_term =
      e.e * kernel.psi_prime_of(logits).matrix() / static_cast<double>(e.examples());
  Vector g = mean_term - b_row;
  if (l1_epsilon != 0.0) g += l1_epsilon * sign_subgradient(w_row);
  return g;
}

RowFit fit_weights_row(const Encodings& e, const Vector& b_row,
                       const LossKernel& kernel, const AdagradConfig& config,
                       const Vector& w0, Index row_label) {
  check_row_args(w0, b_row, e);
  require(config.learning_rate > 0.0, "decoder: learning_rate must be > 0");
  require(config.max_iterations >= 0, "decoder: max_iterations must be >= 0");
  require(config.l1_epsilon >= 0.0, "decoder: l1_epsilon must be >= 0");

  const double n = static_cast<double>(e.examples());
  RowFit fit;
  fit.w = w0;
  Vector accumulator = Vector::Zero(w0.size());
  Vector logits(e.examples());

  for (int it = 0; it <= config.max_iterations; ++it) {
    logits.noalias() = e.e.transpose() * fit.w;
    Vector g = e.e * kernel.psi_prime_of(logits.array()).matrix() / n - b_row;
    if (config.l1_epsilon != 0.0) g += config.l1_epsilon * sign_subgradient(fit.w);
    if (!g.allFinite())
      throw std::runtime_error(
          "decoder: non-finite slack gradient at row " +
          std::to_string(row_label) + ", iteration " + std::to_string(it));
    if (g.lpNorm<Eigen::Infinity>() <= config.tolerance) {
      fit.converged = true;
      return fit;
    }
    if (it == config.max_iterations) break;  // cap reached with tolerance unmet
    accumulator.array() += g.array().square();
    fit.w.array() -= config.learning_rate * g.array() /
                     (accumulator.array() + config.accumulator_offset).sqrt();
    ++fit.iterations;
  }
  return fit;
}

bool FitResult::all_converged() const {
  return std::all_of(converged.begin(), converged.end(),
                     [](bool c) { return c; });
}

int FitResult::total_iterations() const {
  return std::accumulate(iterations.begin(), iterations.end(), 0);
}

FitResult fit_weights(const Encodings& e, const CorrelationMatrix& b,
                      const LossKernel& kernel, const AdagradConfig& config,
                      const Matrix* warm_start, int threads) {
  require(b.b.cols() == e.hidden(),
          "decoder: correlation columns must match hidden size");
  if (warm_start != nullptr)
    require(warm_start->rows() == b.b.rows() && warm_start->cols() == e.hidden(),
            "decoder: warm start shape must be V x H");

  const Index v_bits = b.b.rows();
  FitResult result;
  result.weights.kernel_id = kernel.id;
  result.weights.w.resize(v_bits, e.hidden());
  result.iterations.assign(static_cast<size_t>(v_bits), 0);
  result.converged.assign(static_cast<size_t>(v_bits), false);

  parallel_for_ranges(v_bits, threads, [&](long begin, long end) {
    for (long v = begin; v < end; ++v) {
      Vector w0 = warm_start != nullptr
                      ? Vector(warm_start->row(v).transpose())
                      : random_row_init(config.seed, v, e.hidden());
      RowFit fit = fit_weights_row(e, b.b.row(v).transpose(), kernel, config,
                                   w0, v);
      result.weights.w.row(v) = fit.w.transpose();
      result.iterations[static_cast<size_t>(v)] = fit.iterations;
      result.converged[static_cast<size_t>(v)] = fit.converged;
    }
  });
  return result;
}

Matrix decode(const Encodings& e, const DecoderWeights& weights,
              const LossKernel& kernel) {
  require(weights.hidden() == e.hidden(),
          "decode: weight columns must match hidden size");
  return kernel.transfer_of((weights.w * e.e).array()).matrix();
}

double game_value(const DecoderWeights& weights, const CorrelationMatrix& b,
                  const Encodings& e, const LossKernel& kernel) {
  require(weights.visible() == b.b.rows() && weights.hidden() == b.b.cols(),
          "game_value: weight and correlation shapes must match");
  // Summed row by row so the total agrees bit for bit with slack().
  double total = 0.0;
  for (Index v = 0; v < weights.visible(); ++v)
    total += slack(weights.w.row(v).transpose(), b.b.row(v).transpose(), e,
                   kernel);
  return 0.5 * total;
}

Matrix hallucinated_correlations(const DecoderWeights& weights,
                                 const Encodings& e, const LossKernel& kernel) {
  require(weights.hidden() == e.hidden(),
          "hallucinated_correlations: weight columns must match hidden size");
  require(e.examples() > 0, "hallucinated_correlations: empty encoding batch");
  Matrix x_check = kernel.psi_prime_of((weights.w * e.e).array()).matrix();
  return x_check * e.e.transpose() / static_cast<double>(e.examples());
}

Vector random_row_init(std::uint64_t seed, Index row, Index hidden) {
  auto rng = make_rng(seed, seed_stream::decoder_init,
                      static_cast<std::uint64_t>(row));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(hidden);
  for (Index h = 0; h < hidden; ++h) w[h] = normal(rng);
  return w;
}

}  // namespace pcae
