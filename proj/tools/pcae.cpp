#include "pcae/data_io.hpp"
#include "pcae/decoder.hpp"
#include "pcae/encoder.hpp"
#include "pcae/loss_kernel.hpp"
#include "pcae/trainer.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace {

using nlohmann::json;
using namespace pcae;

// Problems with how the tool was invoked (missing or inconsistent flags,
// bad config keys). These exit with code 2; runtime failures exit with 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Applies config-file values to the same variables the flags write, after
// parsing, so a flag given on the command line always beats its config twin.
class ConfigKeys {
 public:
  template <typename T>
  void bind(CLI::App* sub, const std::string& key, T& target) {
    setters_[key] = [sub, key, &target](const json& value) {
      if (sub->count("--" + key) > 0) return;  // flag wins
      target = value.get<T>();
    };
  }

  void apply_file(const std::string& path) const {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    json parsed;
    try {
      parsed = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError("config file " + path + ": " + e.what());
    }
    if (!parsed.is_object())
      throw UsageError("config file " + path + " must hold a JSON object");
    for (const auto& [key, value] : parsed.items()) {
      auto it = setters_.find(key);
      if (it == setters_.end())
        throw UsageError("config file " + path + ": key '" + key +
                         "' is not a flag of this subcommand");
      try {
        it->second(value);
      } catch (const json::exception& e) {
        throw UsageError("config file " + path + ": key '" + key + "': " +
                         e.what());
      }
    }
  }

 private:
  std::map<std::string, std::function<void(const json&)>> setters_;
};

struct DataOpts {
  std::string data;
  std::string format = "csv";
  std::string binarize_mode = "stochastic";
};

void add_data_opts(CLI::App* sub, ConfigKeys& keys, DataOpts& o) {
  keys.bind(sub, "data", o.data);
  sub->add_option("--data", o.data, "dataset path, values in [0, 1]");
  keys.bind(sub, "format", o.format);
  sub->add_option("--format", o.format, "dataset format: csv, idx, or raw_f32");
  keys.bind(sub, "binarize", o.binarize_mode);
  sub->add_option("--binarize", o.binarize_mode,
                  "stochastic (seeded +-1 draws) or pass_through (affine map "
                  "to [-1, 1])");
}

struct EncodeKnobs {
  int encoder_iters = 300;
  double encoder_tol = 1e-6;
  std::uint64_t seed = 0;
  int threads = 1;
};

void add_encode_knobs(CLI::App* sub, ConfigKeys& keys, EncodeKnobs& o) {
  keys.bind(sub, "encoder-iters", o.encoder_iters);
  sub->add_option("--encoder-iters", o.encoder_iters,
                  "cap on encoder sweeps per example");
  keys.bind(sub, "encoder-tol", o.encoder_tol);
  sub->add_option("--encoder-tol", o.encoder_tol,
                  "encoder stationarity tolerance");
  keys.bind(sub, "seed", o.seed);
  sub->add_option("--seed", o.seed,
                  "seed for all randomness; defaults to 0, never to entropy, "
                  "so runs are reproducible by default");
  keys.bind(sub, "threads", o.threads);
  sub->add_option("--threads", o.threads, "worker thread cap");
}

std::string add_config_opt(CLI::App* sub, std::string& path) {
  sub->add_option("--config", path,
                  "JSON config file; keys mirror this subcommand's flag "
                  "names, and an explicit flag wins on conflict");
  return path;
}

DataBatch load_batch(const DataOpts& o, std::uint64_t seed,
                     RawDataset* raw_out = nullptr) {
  if (o.data.empty()) throw UsageError("--data is required");
  RawDataset raw = load_dataset(o.data, dataset_format_from_string(o.format));
  DataBatch batch =
      binarize(raw, binarize_mode_from_string(o.binarize_mode), seed);
  if (raw_out) *raw_out = std::move(raw);
  return batch;
}

PgdConfig pgd_from(const EncodeKnobs& o) {
  PgdConfig pgd;
  pgd.max_iterations = o.encoder_iters;
  pgd.tolerance = o.encoder_tol;
  return pgd;
}

// Tile geometry for image exports: explicit flags win, then dimensions the
// dataset itself carried, then a square inferred from the bit count.
TileLayout resolve_layout(Index v_bits, Index width, Index height,
                          Index grid_cols, Index count, Index raw_rows = 0,
                          Index raw_cols = 0) {
  TileLayout layout;
  if (width > 0 || height > 0) {
    if (width <= 0 || height <= 0)
      throw UsageError("--image-width and --image-height must be given together");
    layout.image_width = width;
    layout.image_height = height;
  } else if (raw_rows > 0 && raw_cols > 0) {
    layout.image_width = raw_cols;
    layout.image_height = raw_rows;
  } else {
    auto side = static_cast<Index>(
        std::lround(std::sqrt(static_cast<double>(v_bits))));
    if (side * side != v_bits)
      throw UsageError("cannot infer an image shape from " +
                       std::to_string(v_bits) +
                       " values per example; pass --image-width and "
                       "--image-height");
    layout.image_width = side;
    layout.image_height = side;
  }
  if (layout.image_width * layout.image_height != v_bits)
    throw UsageError("image shape " + std::to_string(layout.image_width) +
                     "x" + std::to_string(layout.image_height) +
                     " does not match " + std::to_string(v_bits) +
                     " values per example");
  layout.grid_cols =
      grid_cols > 0 ? grid_cols
                    : static_cast<Index>(std::ceil(
                          std::sqrt(static_cast<double>(count))));
  return layout;
}

void print_metric(const char* name, double value) {
  std::printf("%s %.17g\n", name, value);
}

// ---------------------------------------------------------------- train --

struct TrainOpts {
  DataOpts data;
  std::string holdout;
  Index hidden = 0;
  std::string kernel = "xent";
  std::string mode = "binary_box";
  int epochs = 100;
  Index batch_size = 250;
  bool fixed_batch = false;
  double l1_epsilon = 0.0;
  double decoder_lr = 0.1;
  int decoder_iters = 2000;
  double decoder_tol = 1e-6;
  std::string noise = "none";
  double mask_rate = 0.0;
  bool estimate_delta = false;
  int patience = 20;
  int eval_cadence = 1;
  double min_delta = 0.0;
  EncodeKnobs knobs;
  std::string out;
  std::string report;
  std::string config_path;
};

void add_train_opts(CLI::App* sub, ConfigKeys& keys, TrainOpts& o) {
  add_data_opts(sub, keys, o.data);
  keys.bind(sub, "holdout", o.holdout);
  sub->add_option("--holdout", o.holdout,
                  "dataset evaluated for the early-stopping metric instead "
                  "of the training loss");
  keys.bind(sub, "hidden", o.hidden);
  sub->add_option("--hidden", o.hidden, "code length H (required)");
  keys.bind(sub, "kernel", o.kernel);
  sub->add_option("--kernel", o.kernel,
                  "reconstruction loss family: xent or hamming");
  keys.bind(sub, "mode", o.mode);
  sub->add_option("--mode", o.mode,
                  "encoding constraint: binary_box or unconstrained");
  keys.bind(sub, "epochs", o.epochs);
  sub->add_option("--epochs", o.epochs, "alternation passes");
  keys.bind(sub, "batch-size", o.batch_size);
  sub->add_option("--batch-size", o.batch_size,
                  "minibatch size in streaming mode");
  keys.bind(sub, "fixed-batch", o.fixed_batch);
  sub->add_flag("--fixed-batch", o.fixed_batch,
                "train on the whole dataset every epoch with warm starts "
                "(objective becomes non-increasing)");
  keys.bind(sub, "l1-epsilon", o.l1_epsilon);
  sub->add_option("--l1-epsilon", o.l1_epsilon,
                  "correlation slack budget; adds an L1 weight penalty to "
                  "the decoder solve");
  keys.bind(sub, "decoder-lr", o.decoder_lr);
  sub->add_option("--decoder-lr", o.decoder_lr, "decoder learning rate");
  keys.bind(sub, "decoder-iters", o.decoder_iters);
  sub->add_option("--decoder-iters", o.decoder_iters,
                  "cap on decoder steps per visible bit");
  keys.bind(sub, "decoder-tol", o.decoder_tol);
  sub->add_option("--decoder-tol", o.decoder_tol,
                  "decoder gradient tolerance");
  keys.bind(sub, "noise", o.noise);
  sub->add_option("--noise", o.noise,
                  "training corruption: none, zero_mean, or masking");
  keys.bind(sub, "mask-rate", o.mask_rate);
  sub->add_option("--mask-rate", o.mask_rate,
                  "probability a +1 bit is masked to -1");
  keys.bind(sub, "estimate-delta", o.estimate_delta);
  sub->add_flag("--estimate-delta", o.estimate_delta,
                "estimate the masking correlation correction from corrupted "
                "data instead of using the clean batch");
  keys.bind(sub, "patience", o.patience);
  sub->add_option("--patience", o.patience,
                  "non-improving evals before early stop; 0 disables");
  keys.bind(sub, "eval-cadence", o.eval_cadence);
  sub->add_option("--eval-cadence", o.eval_cadence,
                  "epochs between early-stopping evals");
  keys.bind(sub, "min-delta", o.min_delta);
  sub->add_option("--min-delta", o.min_delta,
                  "improvement an eval must show to reset patience");
  add_encode_knobs(sub, keys, o.knobs);
  keys.bind(sub, "out", o.out);
  sub->add_option("--out", o.out, "model file to write (required)");
  keys.bind(sub, "report", o.report);
  sub->add_option("--report", o.report, "per-epoch CSV report to write");
  add_config_opt(sub, o.config_path);
}

json train_echo(const TrainOpts& o) {
  return json{{"data", o.data.data},
              {"format", o.data.format},
              {"binarize", o.data.binarize_mode},
              {"holdout", o.holdout},
              {"hidden", o.hidden},
              {"kernel", o.kernel},
              {"mode", o.mode},
              {"epochs", o.epochs},
              {"batch-size", o.batch_size},
              {"fixed-batch", o.fixed_batch},
              {"l1-epsilon", o.l1_epsilon},
              {"decoder-lr", o.decoder_lr},
              {"decoder-iters", o.decoder_iters},
              {"decoder-tol", o.decoder_tol},
              {"encoder-iters", o.knobs.encoder_iters},
              {"encoder-tol", o.knobs.encoder_tol},
              {"noise", o.noise},
              {"mask-rate", o.mask_rate},
              {"estimate-delta", o.estimate_delta},
              {"patience", o.patience},
              {"eval-cadence", o.eval_cadence},
              {"min-delta", o.min_delta},
              {"seed", o.knobs.seed},
              {"threads", o.knobs.threads},
              {"out", o.out},
              {"report", o.report}};
}

int run_train(const TrainOpts& o) {
  if (o.hidden <= 0)
    throw UsageError("--hidden is required and must be positive");
  if (o.out.empty()) throw UsageError("--out is required");

  DataBatch batch = load_batch(o.data, o.knobs.seed);
  DataBatch holdout;
  const DataBatch* holdout_ptr = nullptr;
  if (!o.holdout.empty()) {
    DataOpts holdout_source = o.data;
    holdout_source.data = o.holdout;
    holdout = load_batch(holdout_source, o.knobs.seed);
    holdout_ptr = &holdout;
  }

  TrainConfig config;
  config.hidden = o.hidden;
  config.kernel_id = o.kernel;
  config.mode = encoding_mode_from_string(o.mode);
  config.epochs = o.epochs;
  config.batch_size = o.batch_size;
  config.fixed_batch = o.fixed_batch;
  config.decoder.learning_rate = o.decoder_lr;
  config.decoder.max_iterations = o.decoder_iters;
  config.decoder.tolerance = o.decoder_tol;
  config.decoder.l1_epsilon = o.l1_epsilon;
  config.decoder.seed = o.knobs.seed;
  config.encoder.max_iterations = o.knobs.encoder_iters;
  config.encoder.tolerance = o.knobs.encoder_tol;
  config.denoise.kind = noise_kind_from_string(o.noise);
  config.denoise.mask_rate = o.mask_rate;
  config.denoise.estimate_delta = o.estimate_delta;
  config.patience = o.patience;
  config.eval_cadence = o.eval_cadence;
  config.min_delta = o.min_delta;
  config.seed = o.knobs.seed;
  config.threads = o.knobs.threads;

  TrainReport report = train(batch, config, nullptr, holdout_ptr);

  ModelFile model;
  model.weights = report.weights;
  model.mode = config.mode;
  model.seed = o.knobs.seed;
  model.config_echo = train_echo(o).dump();
  save_model(model, o.out);
  if (!o.report.empty()) write_report_csv(report, o.report);

  std::printf("epochs %d\n", report.stopped_epoch);
  if (report.early_stopped) std::printf("early_stopped 1\n");
  if (!report.epochs.empty()) {
    print_metric("loss", report.epochs.back().loss);
    print_metric("bound", report.epochs.back().bound);
  }
  return 0;
}

// ----------------------------------------------------------------- eval --

struct EvalOpts {
  DataOpts data;
  std::string model;
  std::string kernel;  // empty: use the kernel the model was trained with
  EncodeKnobs knobs;
  std::string per_example;
  std::string config_path;
};

void add_eval_opts(CLI::App* sub, ConfigKeys& keys, EvalOpts& o) {
  add_data_opts(sub, keys, o.data);
  keys.bind(sub, "model", o.model);
  sub->add_option("--model", o.model, "model file (required)");
  keys.bind(sub, "kernel", o.kernel);
  sub->add_option("--kernel", o.kernel,
                  "score under this loss family instead of the model's own");
  add_encode_knobs(sub, keys, o.knobs);
  keys.bind(sub, "per-example", o.per_example);
  sub->add_option("--per-example", o.per_example,
                  "CSV of per-example losses to write");
  add_config_opt(sub, o.config_path);
}

int run_eval(const EvalOpts& o) {
  if (o.model.empty()) throw UsageError("--model is required");
  ModelFile model = load_model(o.model);
  DataBatch batch = load_batch(o.data, o.knobs.seed);
  LossKernel kernel =
      kernel_by_id(o.kernel.empty() ? model.weights.kernel_id : o.kernel);
  PgdConfig pgd = pgd_from(o.knobs);

  EvalResult result = evaluate(batch, model.weights, kernel, model.mode, pgd,
                               o.knobs.threads);
  print_metric("loss", result.loss);
  print_metric("bound", result.bound);

  if (!o.per_example.empty()) {
    EncodeResult enc = encode_batch(batch, model.weights, kernel, model.mode,
                                    pgd, nullptr, o.knobs.threads);
    Matrix recon = decode(enc.encodings, model.weights, kernel);
    Vector losses =
        per_example_losses(batch.x, recon, kernel, /*clamp_feedback=*/true);
    write_matrix_csv(losses.transpose(), o.per_example);
  }
  return 0;
}

// --------------------------------------------------------------- encode --

struct EncodeOpts {
  DataOpts data;
  std::string model;
  std::string out;
  EncodeKnobs knobs;
  std::string config_path;
};

void add_encode_opts(CLI::App* sub, ConfigKeys& keys, EncodeOpts& o) {
  add_data_opts(sub, keys, o.data);
  keys.bind(sub, "model", o.model);
  sub->add_option("--model", o.model, "model file (required)");
  add_encode_knobs(sub, keys, o.knobs);
  keys.bind(sub, "out", o.out);
  sub->add_option("--out", o.out,
                  "encodings CSV to write, one example per row (required)");
  add_config_opt(sub, o.config_path);
}

int run_encode(const EncodeOpts& o) {
  if (o.model.empty()) throw UsageError("--model is required");
  if (o.out.empty()) throw UsageError("--out is required");
  ModelFile model = load_model(o.model);
  DataBatch batch = load_batch(o.data, o.knobs.seed);
  LossKernel kernel = kernel_by_id(model.weights.kernel_id);
  EncodeResult enc = encode_batch(batch, model.weights, kernel, model.mode,
                                  pgd_from(o.knobs), nullptr, o.knobs.threads);
  write_matrix_csv(enc.encodings.e, o.out);
  return 0;
}

// --------------------------------------------------------------- decode --

struct DecodeOpts {
  std::string model;
  std::string encodings;
  std::string out;
  std::string config_path;
};

void add_decode_opts(CLI::App* sub, ConfigKeys& keys, DecodeOpts& o) {
  keys.bind(sub, "model", o.model);
  sub->add_option("--model", o.model, "model file (required)");
  keys.bind(sub, "encodings", o.encodings);
  sub->add_option("--encodings", o.encodings,
                  "encodings CSV, one example per row (required)");
  keys.bind(sub, "out", o.out);
  sub->add_option("--out", o.out, "reconstructions CSV to write (required)");
  add_config_opt(sub, o.config_path);
}

int run_decode(const DecodeOpts& o) {
  if (o.model.empty()) throw UsageError("--model is required");
  if (o.encodings.empty()) throw UsageError("--encodings is required");
  if (o.out.empty()) throw UsageError("--out is required");
  ModelFile model = load_model(o.model);
  Matrix e = read_matrix_csv(o.encodings);
  if (e.rows() != model.weights.hidden())
    throw UsageError("encodings have " + std::to_string(e.rows()) +
                     " values per example, but the model decodes codes of "
                     "length " + std::to_string(model.weights.hidden()));
  Encodings enc{e, model.mode};
  Matrix recon =
      decode(enc, model.weights, kernel_by_id(model.weights.kernel_id));
  write_matrix_csv(recon, o.out);
  return 0;
}

// ---------------------------------------------------------- reconstruct --

struct ReconstructOpts {
  DataOpts data;
  std::string model;
  std::string out;
  std::string images;
  Index image_width = 0;
  Index image_height = 0;
  Index grid_cols = 0;
  EncodeKnobs knobs;
  std::string config_path;
};

void add_image_opts(CLI::App* sub, ConfigKeys& keys, Index& width,
                    Index& height, Index& grid_cols) {
  keys.bind(sub, "image-width", width);
  sub->add_option("--image-width", width,
                  "pixels per image row (inferred from the dataset or a "
                  "square bit count when omitted)");
  keys.bind(sub, "image-height", height);
  sub->add_option("--image-height", height, "pixel rows per image");
  keys.bind(sub, "grid-cols", grid_cols);
  sub->add_option("--grid-cols", grid_cols,
                  "tiles per sheet row (default: near-square)");
}

void add_reconstruct_opts(CLI::App* sub, ConfigKeys& keys, ReconstructOpts& o) {
  add_data_opts(sub, keys, o.data);
  keys.bind(sub, "model", o.model);
  sub->add_option("--model", o.model, "model file (required)");
  add_encode_knobs(sub, keys, o.knobs);
  keys.bind(sub, "out", o.out);
  sub->add_option("--out", o.out, "reconstructions CSV to write");
  keys.bind(sub, "images", o.images);
  sub->add_option("--images", o.images, "PGM tile sheet to write");
  add_image_opts(sub, keys, o.image_width, o.image_height, o.grid_cols);
  add_config_opt(sub, o.config_path);
}

int run_reconstruct(const ReconstructOpts& o) {
  if (o.model.empty()) throw UsageError("--model is required");
  ModelFile model = load_model(o.model);
  RawDataset raw;
  DataBatch batch = load_batch(o.data, o.knobs.seed, &raw);
  LossKernel kernel = kernel_by_id(model.weights.kernel_id);
  EncodeResult enc = encode_batch(batch, model.weights, kernel, model.mode,
                                  pgd_from(o.knobs), nullptr, o.knobs.threads);
  Matrix recon = decode(enc.encodings, model.weights, kernel);
  print_metric("loss", reconstruction_loss(batch.x, recon, kernel,
                                           /*clamp_feedback=*/true));
  if (!o.out.empty()) write_matrix_csv(recon, o.out);
  if (!o.images.empty()) {
    TileLayout layout =
        resolve_layout(batch.visible(), o.image_width, o.image_height,
                       o.grid_cols, recon.cols(), raw.image_rows,
                       raw.image_cols);
    export_images(recon, layout, o.images);
  }
  return 0;
}

// ------------------------------------------------------------ basis-viz --

struct BasisVizOpts {
  std::string model;
  std::string out;
  Index image_width = 0;
  Index image_height = 0;
  Index grid_cols = 0;
  std::string config_path;
};

void add_basis_viz_opts(CLI::App* sub, ConfigKeys& keys, BasisVizOpts& o) {
  keys.bind(sub, "model", o.model);
  sub->add_option("--model", o.model, "model file (required)");
  keys.bind(sub, "out", o.out);
  sub->add_option("--out", o.out, "PGM tile sheet to write (required)");
  add_image_opts(sub, keys, o.image_width, o.image_height, o.grid_cols);
  add_config_opt(sub, o.config_path);
}

int run_basis_viz(const BasisVizOpts& o) {
  if (o.model.empty()) throw UsageError("--model is required");
  if (o.out.empty()) throw UsageError("--out is required");
  ModelFile model = load_model(o.model);
  const Index hidden = model.weights.hidden();

  // One tile per code bit: that bit on, every other bit at its off value
  // (-1 inside the box, 0 when unconstrained).
  const double off = model.mode == EncodingMode::binary_box ? -1.0 : 0.0;
  Matrix basis = Matrix::Constant(hidden, hidden, off);
  basis.diagonal().setConstant(1.0);
  Encodings enc{basis, model.mode};
  Matrix tiles =
      decode(enc, model.weights, kernel_by_id(model.weights.kernel_id));

  TileLayout layout =
      resolve_layout(model.weights.visible(), o.image_width, o.image_height,
                     o.grid_cols, hidden);
  export_images(tiles, layout, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "binary autoencoder whose decoder is fit from pairwise data-code "
      "correlations"};
  app.require_subcommand(1);

  TrainOpts train_opts;
  ConfigKeys train_keys;
  CLI::App* train_cmd = app.add_subcommand(
      "train", "fit a model by alternating encode and decoder-refit passes");
  add_train_opts(train_cmd, train_keys, train_opts);

  EvalOpts eval_opts;
  ConfigKeys eval_keys;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "encode a dataset under a model and report loss and bound");
  add_eval_opts(eval_cmd, eval_keys, eval_opts);

  EncodeOpts encode_opts;
  ConfigKeys encode_keys;
  CLI::App* encode_cmd =
      app.add_subcommand("encode", "write the encodings of a dataset");
  add_encode_opts(encode_cmd, encode_keys, encode_opts);

  DecodeOpts decode_opts;
  ConfigKeys decode_keys;
  CLI::App* decode_cmd = app.add_subcommand(
      "decode", "map an encodings CSV back to reconstructions");
  add_decode_opts(decode_cmd, decode_keys, decode_opts);

  ReconstructOpts reconstruct_opts;
  ConfigKeys reconstruct_keys;
  CLI::App* reconstruct_cmd = app.add_subcommand(
      "reconstruct", "encode then decode a dataset; optionally export images");
  add_reconstruct_opts(reconstruct_cmd, reconstruct_keys, reconstruct_opts);

  BasisVizOpts viz_opts;
  ConfigKeys viz_keys;
  CLI::App* viz_cmd = app.add_subcommand(
      "basis-viz", "render each code bit's lone-bit decoding as an image tile");
  add_basis_viz_opts(viz_cmd, viz_keys, viz_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train_cmd->parsed()) {
      train_keys.apply_file(train_opts.config_path);
      return run_train(train_opts);
    }
    if (eval_cmd->parsed()) {
      eval_keys.apply_file(eval_opts.config_path);
      return run_eval(eval_opts);
    }
    if (encode_cmd->parsed()) {
      encode_keys.apply_file(encode_opts.config_path);
      return run_encode(encode_opts);
    }
    if (decode_cmd->parsed()) {
      decode_keys.apply_file(decode_opts.config_path);
      return run_decode(decode_opts);
    }
    if (reconstruct_cmd->parsed()) {
      reconstruct_keys.apply_file(reconstruct_opts.config_path);
      return run_reconstruct(reconstruct_opts);
    }
    if (viz_cmd->parsed()) {
      viz_keys.apply_file(viz_opts.config_path);
      return run_basis_viz(viz_opts);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
