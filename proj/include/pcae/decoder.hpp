#pragma once

#include "pcae/loss_kernel.hpp"
#include "pcae/types.hpp"

#include <cstdint>
#include <vector>

namespace pcae {

// Settings for the per-bit Adagrad solve. l1_epsilon > 0 adds an
// epsilon * ||w||_1 penalty (the budget for slack in the correlation
// constraints); its subgradient contribution at w_h = 0 is taken as 0.
struct AdagradConfig {
  double learning_rate = 0.1;
  double accumulator_offset = 1e-8;
  int max_iterations = 2000;
  double tolerance = 1e-6;  // inf-norm of the slack gradient
  double l1_epsilon = 0.0;
  std::uint64_t seed = 0;  // drives per-row random inits when no warm start
};

// Convex per-bit objective the decoder minimizes:
//   slack(w) = -b_v . w + (1/n) sum_i psi(w . e_i) + l1_epsilon ||w||_1.
// Its minimum over w is this bit's contribution (times 1/2) to the
// worst-case reconstruction loss achievable from the correlations alone.
double slack(const Vector& w_row, const Vector& b_row, const Encodings& e,
             const LossKernel& kernel, double l1_epsilon = 0.0);

// Gradient of slack: -b_v + (1/n) sum_i psi'(w . e_i) e_i + l1 subgradient.
Vector slack_gradient(const Vector& w_row, const Vector& b_row,
                      const Encodings& e, const LossKernel& kernel,
                      double l1_epsilon = 0.0);

struct RowFit {
  Vector w;
  int iterations = 0;
  bool converged = false;
};

// Adagrad on one visible bit's slack, starting from w0. Iterations count
// steps actually taken; a warm start already inside tolerance takes none.
// Non-finite gradients abort with std::runtime_error naming the row.
RowFit fit_weights_row(const Encodings& e, const Vector& b_row,
                       const LossKernel& kernel, const AdagradConfig& config,
                       const Vector& w0, Index row_label = -1);

struct FitResult {
  DecoderWeights weights;
  std::vector<int> iterations;  // per visible bit
  std::vector<bool> converged;  // tolerance reached before the cap

  bool all_converged() const;
  int total_iterations() const;
};

// Fits all V rows independently (optionally in parallel; results do not
// depend on the thread count). Rows start from the matching row of
// warm_start when given, else from a per-row N(0,1) init derived from
// config.seed, so row v's outcome never depends on the other rows.
FitResult fit_weights(const Encodings& e, const CorrelationMatrix& b,
                      const LossKernel& kernel, const AdagradConfig& config,
                      const Matrix* warm_start = nullptr, int threads = 1);

// Reconstructions from logits: transfer(w e) for every bit and example.
Matrix decode(const Encodings& e, const DecoderWeights& weights,
              const LossKernel& kernel);

// Upper bound on the batch reconstruction loss implied by weights w and
// correlations b: (1/2) sum_v slack(w_v, b_v). Tight at the per-bit minima.
double game_value(const DecoderWeights& weights, const CorrelationMatrix& b,
                  const Encodings& e, const LossKernel& kernel);

// Correlations the current weights hallucinate: (1/n) psi'(W E) E^T.
// Equals b exactly at a stationary point of the slack objectives.
Matrix hallucinated_correlations(const DecoderWeights& weights,
                                 const Encodings& e, const LossKernel& kernel);

// Deterministic N(0,1) init for one weight row; depends only on (seed, row).
Vector random_row_init(std::uint64_t seed, Index row, Index hidden);

}  // namespace pcae
