#include "pcae/trainer.hpp"

#include "pcae/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace pcae {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool is_plus_minus_one(const Matrix& x) {
  return ((x.array() == 1.0) || (x.array() == -1.0)).all();
}

// Without-replacement minibatch stream: deals the shuffled deck in order,
// reshuffles (new pass, new derived seed) once fewer than a full batch
// remains, discarding the remainder.
class BatchStream {
 public:
  BatchStream(Index n, Index batch, std::uint64_t seed)
      : deck_(static_cast<size_t>(n)), batch_(batch), seed_(seed) {
    std::iota(deck_.begin(), deck_.end(), Index{0});
    reshuffle();
  }

  std::vector<Index> next() {
    if (pos_ + static_cast<size_t>(batch_) > deck_.size()) reshuffle();
    std::vector<Index> out(deck_.begin() + static_cast<long>(pos_),
                           deck_.begin() + static_cast<long>(pos_) + batch_);
    pos_ += static_cast<size_t>(batch_);
    return out;
  }

 private:
  void reshuffle() {
    auto rng = make_rng(seed_, seed_stream::shuffle, pass_++);
    std::shuffle(deck_.begin(), deck_.end(), rng);
    pos_ = 0;
  }

  std::vector<Index> deck_;
  Index batch_;
  std::uint64_t seed_;
  std::uint64_t pass_ = 0;
  size_t pos_ = 0;
};

Matrix gather_columns(const Matrix& x, const std::vector<Index>& idx) {
  Matrix out(x.rows(), static_cast<Index>(idx.size()));
  for (size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = x.col(idx[j]);
  return out;
}

void append_csv_double(std::string& line, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  line += buf;
}

}  // namespace

NoiseKind noise_kind_from_string(const std::string& name) {
  if (name == "none") return NoiseKind::none;
  if (name == "zero_mean") return NoiseKind::zero_mean;
  if (name == "masking") return NoiseKind::masking;
  throw std::invalid_argument("unknown noise kind: " + name);
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::zero_mean: return "zero_mean";
    case NoiseKind::masking: return "masking";
  }
  throw std::logic_error("unreachable");
}

Matrix masking_corrupt(const Matrix& x, double rate, std::uint64_t seed) {
  require(rate >= 0.0 && rate <= 1.0, "masking_corrupt: rate outside [0, 1]");
  require(is_plus_minus_one(x), "masking_corrupt: data entries must be +-1");
  Matrix out = x;
  if (rate == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (Index i = 0; i < out.cols(); ++i)
    for (Index v = 0; v < out.rows(); ++v)
      if (out(v, i) == 1.0 && uniform(rng) < rate) out(v, i) = -1.0;
  return out;
}

Matrix denoise_correction(const DataBatch& x_hat, const Encodings& e,
                          const DenoiseSpec& spec, const DataBatch* x_clean,
                          std::vector<Index>* starved_rows) {
  const Index v_bits = x_hat.visible();
  const Index hidden = e.hidden();
  if (starved_rows != nullptr) starved_rows->clear();

  if (spec.kind == NoiseKind::none || spec.kind == NoiseKind::zero_mean)
    return Matrix::Zero(v_bits, hidden);

  require(x_hat.examples() == e.examples(),
          "denoise_correction: batch and encodings must have the same examples");
  require(x_hat.examples() > 0, "denoise_correction: empty batch");
  require(spec.mask_rate >= 0.0 && spec.mask_rate < 1.0,
          "denoise_correction: mask rate must lie in [0, 1); rate 1 leaves no "
          "surviving +1 bits to estimate from");
  const double n = static_cast<double>(x_hat.examples());

  if (x_clean != nullptr && !spec.estimate_delta) {
    require(x_clean->visible() == v_bits && x_clean->examples() == x_hat.examples(),
            "denoise_correction: clean batch shape mismatch");
    return (x_hat.x - x_clean->x) * e.e.transpose() / n;
  }

  require(is_plus_minus_one(x_hat.x),
          "denoise_correction: the estimator needs +-1 data");
  // b_hat from the corrupted batch; b_tilde estimates the clean correlations
  // from the surviving +1 bits, reweighted by the keep probability.
  Matrix b_hat = x_hat.x * e.e.transpose() / n;
  Matrix survivors = (x_hat.x.array() == 1.0).cast<double>().matrix();
  Matrix survivor_sums = survivors * e.e.transpose();        // V x H
  Vector code_sums = e.e.rowwise().sum();                    // H
  Matrix b_tilde =
      (2.0 / (1.0 - spec.mask_rate) / n) * survivor_sums -
      code_sums.transpose().replicate(v_bits, 1) / n;
  Matrix delta = b_hat - b_tilde;
  for (Index v = 0; v < v_bits; ++v) {
    if (survivors.row(v).sum() == 0.0) {
      delta.row(v).setZero();
      if (starved_rows != nullptr) starved_rows->push_back(v);
    }
  }
  return delta;
}

double alternation_objective(const Matrix& x, const Matrix& w, const Matrix& e,
                             const LossKernel& kernel) {
  require(x.cols() == e.cols() && x.rows() == w.rows() && w.cols() == e.rows(),
          "alternation_objective: inconsistent shapes");
  Array m = (w * e).array();
  double total = (-x.array() * m + kernel.psi_of(m)).sum();
  return total / (2.0 * static_cast<double>(x.cols()));
}

EvalResult evaluate(const DataBatch& data, const DecoderWeights& weights,
                    const LossKernel& kernel, EncodingMode mode,
                    const PgdConfig& encoder_config, int threads) {
  EncodeResult enc =
      encode_batch(data, weights, kernel, mode, encoder_config, nullptr, threads);
  EvalResult out;
  out.encoder_iterations = enc.total_iterations();
  out.loss = reconstruction_loss(data.x, decode(enc.encodings, weights, kernel),
                                 kernel, /*clamp_feedback=*/true);
  out.bound = game_value(weights, correlations(data, enc.encodings),
                         enc.encodings, kernel);
  return out;
}

TrainReport train(const DataBatch& data, const TrainConfig& config,
                  const Matrix* initial_weights, const DataBatch* holdout) {
  require(data.examples() > 0, "train: empty dataset");
  require(config.hidden > 0, "train: hidden size must be positive");
  require(config.epochs >= 0, "train: epochs must be >= 0");
  require((data.x.array().abs() <= 1.0).all(),
          "train: data entries outside [-1, 1]");
  require(config.eval_cadence >= 1, "train: eval_cadence must be >= 1");
  require(config.patience >= 0, "train: patience must be >= 0");
  require(config.min_delta >= 0.0, "train: min_delta must be >= 0");
  if (config.record_half_steps)
    require(config.fixed_batch,
            "train: half-step logging needs fixed_batch (streaming epochs "
            "see different batches, so their objectives are not comparable)");
  const bool masking = config.denoise.kind == NoiseKind::masking;
  if (masking) {
    require(is_plus_minus_one(data.x),
            "train: masking noise needs binarized +-1 data");
    require(config.denoise.mask_rate >= 0.0 && config.denoise.mask_rate < 1.0,
            "train: mask rate must lie in [0, 1)");
  }

  const LossKernel kernel = kernel_by_id(config.kernel_id);
  const Index v_bits = data.visible();
  const Index n = data.examples();
  const Index batch =
      config.fixed_batch ? n : std::min<Index>(config.batch_size, n);
  require(batch > 0, "train: batch size must be positive");

  AdagradConfig decoder_config = config.decoder;
  decoder_config.seed = config.seed;

  Matrix w;
  if (initial_weights != nullptr) {
    require(initial_weights->rows() == v_bits &&
                initial_weights->cols() == config.hidden,
            "train: initial weights must be V x H");
    w = *initial_weights;
  } else {
    w.resize(v_bits, config.hidden);
    for (Index v = 0; v < v_bits; ++v)
      w.row(v) = random_row_init(config.seed, v, config.hidden).transpose();
  }

  TrainReport report;
  report.weights.kernel_id = kernel.id;

  std::optional<BatchStream> stream;
  if (!config.fixed_batch) stream.emplace(n, batch, config.seed);

  Matrix warm_encodings;  // fixed_batch: encoder warm start across epochs
  if (config.fixed_batch) warm_encodings = Matrix::Zero(config.hidden, n);

  if (config.record_half_steps)
    report.half_step_objectives.push_back(
        alternation_objective(data.x, w, warm_encodings, kernel));

  double best_metric = std::numeric_limits<double>::infinity();
  std::optional<Matrix> best_weights;
  int stale_evals = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    auto start = Clock::now();

    Matrix x_clean = config.fixed_batch ? data.x : gather_columns(data.x, stream->next());
    DataBatch clean_batch{x_clean, data.binarized};
    DataBatch train_batch = clean_batch;
    if (masking && config.denoise.mask_rate > 0.0)
      train_batch.x = masking_corrupt(
          x_clean, config.denoise.mask_rate,
          mix_seed(config.seed, seed_stream::masking,
                   static_cast<std::uint64_t>(epoch)));

    DecoderWeights weights{w, kernel.id};
    const Matrix* enc_init =
        (config.fixed_batch && epoch > 1) ? &warm_encodings : nullptr;
    EncodeResult enc = encode_batch(train_batch, weights, kernel, config.mode,
                                    config.encoder, enc_init, config.threads);
    if (config.fixed_batch) warm_encodings = enc.encodings.e;
    if (config.record_half_steps)
      report.half_step_objectives.push_back(
          alternation_objective(x_clean, w, enc.encodings.e, kernel));

    CorrelationMatrix b = correlations(train_batch, enc.encodings);
    if (config.denoise.kind != NoiseKind::none)
      b.b -= denoise_correction(train_batch, enc.encodings, config.denoise,
                                &clean_batch);

    FitResult fit =
        fit_weights(enc.encodings, b, kernel, decoder_config, &w, config.threads);
    w = fit.weights.w;
    if (config.record_half_steps)
      report.half_step_objectives.push_back(
          alternation_objective(x_clean, w, enc.encodings.e, kernel));

    EpochRecord rec;
    rec.epoch = epoch;
    rec.encoder_iterations = enc.total_iterations();
    rec.decoder_iterations = fit.total_iterations();
    rec.loss = reconstruction_loss(
        x_clean, decode(enc.encodings, fit.weights, kernel), kernel,
        /*clamp_feedback=*/true);
    rec.bound = game_value(fit.weights, b, enc.encodings, kernel);
    rec.holdout_loss = std::numeric_limits<double>::quiet_NaN();

    bool eval_now = config.patience > 0 &&
                    (epoch % config.eval_cadence == 0 || epoch == config.epochs);
    if (eval_now) {
      double metric = rec.loss;
      if (holdout != nullptr) {
        EvalResult ev = evaluate(*holdout, fit.weights, kernel, config.mode,
                                 config.encoder, config.threads);
        metric = ev.loss;
        rec.holdout_loss = ev.loss;
      }
      if (metric < best_metric - config.min_delta) {
        best_metric = metric;
        best_weights = w;
        stale_evals = 0;
      } else {
        if (metric < best_metric) {
          best_metric = metric;
          best_weights = w;
        }
        ++stale_evals;
      }
    }

    rec.seconds = seconds_since(start);
    report.epochs.push_back(rec);
    report.stopped_epoch = epoch;

    if (config.patience > 0 && stale_evals >= config.patience) {
      report.early_stopped = true;
      break;
    }
  }

  report.weights.w = best_weights.has_value() ? *best_weights : w;
  return report;
}

void write_report_csv(const TrainReport& report, std::ostream& out) {
  out << "epoch,loss,bound,holdout_loss,encoder_iterations,"
         "decoder_iterations,seconds\n";
  for (const EpochRecord& rec : report.epochs) {
    std::string line = std::to_string(rec.epoch);
    line += ',';
    append_csv_double(line, rec.loss);
    line += ',';
    append_csv_double(line, rec.bound);
    line += ',';
    if (!std::isnan(rec.holdout_loss)) append_csv_double(line, rec.holdout_loss);
    line += ',';
    line += std::to_string(rec.encoder_iterations);
    line += ',';
    line += std::to_string(rec.decoder_iterations);
    line += ',';
    append_csv_double(line, rec.seconds);
    out << line << '\n';
  }
}

void write_report_csv(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open report file: " + path);
  write_report_csv(report, out);
  out.close();
  if (!out) throw std::runtime_error("failed writing report file: " + path);
}

}  // namespace pcae
