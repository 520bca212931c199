#pragma once

#include "pcae/loss_kernel.hpp"
#include "pcae/types.hpp"

#include <vector>

namespace pcae {

// Settings for the per-example projected-gradient solve with Armijo
// backtracking.
struct PgdConfig {
  double armijo_c = 1e-4;
  double shrink = 0.5;
  int max_iterations = 300;
  double tolerance = 1e-6;  // inf-norm of the projected-gradient residual
  bool record_trace = false;
  double min_step = 1e-14;  // below this the line search gives up
};

// Per-example objective the encoder minimizes over e (weights fixed):
//   distortion(e) = sum_v [ -x_v (w_v . e) + psi(w_v . e) ].
// Summed over a batch and divided by 2n this is the same number game_value
// reports once correlations are recomputed from the result.
double distortion(const Vector& e_col, const Vector& x_col,
                  const DecoderWeights& weights, const LossKernel& kernel);

// Gradient of distortion for every column at once:
//   column i of the result = W^T (psi'(W e_i) - x_i).
Matrix distortion_gradient_batch(const Encodings& e, const Matrix& x,
                                 const DecoderWeights& weights,
                                 const LossKernel& kernel);

struct EncodeResult {
  Encodings encodings;
  std::vector<int> iterations;   // per example
  std::vector<bool> converged;   // stationarity reached before the cap
  // With record_trace: objective value of every example after each sweep,
  // trace[k][i] = distortion of example i after sweep k (k = 0 is the init).
  std::vector<Vector> trace;

  bool all_converged() const;
  int total_iterations() const;
};

// Solves every column of x independently, batched through shared
// matrix products. In binary_box mode iterates are projected onto
// [-1, 1]^H after every step; in unconstrained mode the projection is the
// identity. Columns start from the matching column of init when given
// (entries already inside the box in binary_box mode), else from zero.
// Step sizes warm-start per column and are re-grown between sweeps.
// Stationarity for column i is || P(e_i - g_i) - e_i ||_inf <= tolerance.
// Results do not depend on the thread count.
EncodeResult encode_batch(const DataBatch& x, const DecoderWeights& weights,
                          const LossKernel& kernel, EncodingMode mode,
                          const PgdConfig& config, const Matrix* init = nullptr,
                          int threads = 1);

// Pairwise correlations b = (1/n) x e^T of a batch with its encodings.
CorrelationMatrix correlations(const DataBatch& x, const Encodings& e);

}  // namespace pcae
