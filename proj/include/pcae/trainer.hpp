#pragma once

#include "pcae/decoder.hpp"
#include "pcae/encoder.hpp"
#include "pcae/loss_kernel.hpp"
#include "pcae/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pcae {

enum class NoiseKind : std::uint8_t {
  none,
  zero_mean,  // corruption already applied upstream averages to zero
  masking,    // +1 bits flip to -1 independently with probability mask_rate
};

NoiseKind noise_kind_from_string(const std::string& name);
std::string to_string(NoiseKind kind);

struct DenoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double mask_rate = 0.0;
  // Use the survivors-only estimator for the correlation correction even
  // though the trainer holds the clean batch (the estimator is what a
  // deployment without clean data would rely on; the default uses the exact
  // correction available here).
  bool estimate_delta = false;
};

struct TrainConfig {
  Index hidden = 8;
  std::string kernel_id = "xent";
  EncodingMode mode = EncodingMode::binary_box;
  int epochs = 100;
  Index batch_size = 250;
  // Train on the whole dataset every epoch and warm-start both half-steps
  // from the previous epoch, making the objective non-increasing per
  // half-step. Default is streaming: one fresh minibatch per epoch, encoder
  // restarted from zero.
  bool fixed_batch = false;
  // Log the joint objective after every encoder and decoder half-step
  // (fixed_batch only).
  bool record_half_steps = false;
  AdagradConfig decoder;
  PgdConfig encoder;
  DenoiseSpec denoise;
  std::uint64_t seed = 0;
  int threads = 1;
  int eval_cadence = 1;  // early-stop metric refresh, in epochs
  int patience = 20;     // consecutive non-improving evals before stopping; 0 disables
  double min_delta = 0.0;  // an eval must beat the best by this much to count
};

struct EpochRecord {
  int epoch = 0;             // 1-based
  double loss = 0.0;         // clean-batch reconstruction loss
  double bound = 0.0;        // game value against this epoch's correlations
  double holdout_loss = 0.0; // NaN unless a holdout was evaluated this epoch
  int encoder_iterations = 0;
  int decoder_iterations = 0;
  double seconds = 0.0;
};

struct TrainReport {
  DecoderWeights weights;  // best-metric weights when early stopping is on
  std::vector<EpochRecord> epochs;
  // With record_half_steps: the joint objective before training, then after
  // every half-step (encoder, decoder, encoder, ...).
  std::vector<double> half_step_objectives;
  int stopped_epoch = 0;
  bool early_stopped = false;
};

// Alternating minimization: each epoch encodes a batch under the current
// weights, recomputes correlations, and refits the decoder from a warm
// start. With denoising the batch is corrupted first, encoded as corrupted,
// and the correlation matrix handed to the decoder is corrected toward the
// clean one; reported losses always score reconstructions against the clean
// batch. All randomness (weight init, batch order, masking) derives from
// config.seed, so a rerun with the same config and data is bit-identical.
TrainReport train(const DataBatch& data, const TrainConfig& config,
                  const Matrix* initial_weights = nullptr,
                  const DataBatch* holdout = nullptr);

// Flips +1 entries of a +-1 matrix to -1 independently with the given rate.
// Traversal is column-major, so the flip pattern depends only on the seed
// and the matrix shape.
Matrix masking_corrupt(const Matrix& x, double rate, std::uint64_t seed);

// Correction delta with E[b_corrupted - delta] = b_clean, to be subtracted
// from correlations measured on corrupted data.
//   zero_mean: exactly zero.
//   masking with x_clean: the exact per-batch correction (x_hat - x) e^T / n.
//   masking without x_clean (or estimate_delta): the survivors-only
//     estimator  delta_v = b_hat_v - [ 2/(1-rate) sum_{i: x_hat_v=+1} e_i
//                                       - sum_i e_i ] / n,
//     which is unbiased over the masking noise. Rows whose surviving set is
//     empty fall back to zero correction and are reported via starved_rows.
Matrix denoise_correction(const DataBatch& x_hat, const Encodings& e,
                          const DenoiseSpec& spec,
                          const DataBatch* x_clean = nullptr,
                          std::vector<Index>* starved_rows = nullptr);

// Joint objective of the alternation at (w, e) for a clean batch x:
//   (1/2n) sum_i sum_v [ -x_vi (w_v . e_i) + psi(w_v . e_i) ].
// The encoder half-step lowers it by construction; the decoder half-step
// lowers it because it equals the summed per-bit slack at the batch
// correlations.
double alternation_objective(const Matrix& x, const Matrix& w, const Matrix& e,
                             const LossKernel& kernel);

struct EvalResult {
  double loss = 0.0;   // reconstruction loss, feedback-clamped
  double bound = 0.0;  // game value at the eval batch's correlations
  int encoder_iterations = 0;
};

// Encodes a batch from scratch under fixed weights and scores it.
EvalResult evaluate(const DataBatch& data, const DecoderWeights& weights,
                    const LossKernel& kernel, EncodingMode mode,
                    const PgdConfig& encoder_config, int threads = 1);

// Epoch records as CSV. Layout:
//   epoch,loss,bound,holdout_loss,encoder_iterations,decoder_iterations,seconds
// holdout_loss is left empty on epochs without an eval. Everything except
// the seconds column is reproducible across reruns of the same config.
void write_report_csv(const TrainReport& report, std::ostream& out);
void write_report_csv(const TrainReport& report, const std::string& path);

}  // namespace pcae
