#include "pcae/encoder.hpp"

#include "pcae/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace pcae {
namespace {

void check_batch_args(const DataBatch& x, const DecoderWeights& weights) {
  require(x.examples() > 0, "encoder: empty data batch");
  require(x.visible() == weights.visible(),
          "encoder: data rows must match weight rows");
  require((x.x.array().abs() <= 1.0).all(),
          "encoder: data entries outside [-1, 1]");
}

// Objective value of every column of a logit block: column sums of
// -x .* m + psi(m).
Eigen::RowVectorXd column_objectives(const Matrix& x_block, const Matrix& m,
                                     const LossKernel& kernel) {
  return ((-x_block.array() * m.array()) + kernel.psi_of(m.array())).colwise().sum();
}

Vector project(const Vector& e_col, EncodingMode mode) {
  if (mode == EncodingMode::unconstrained) return e_col;
  return e_col.cwiseMax(-1.0).cwiseMin(1.0);
}

// Runs the projected-gradient solve on columns [begin, end) of x, writing
// results into the matching slice of the output arrays.
struct SliceSolver {
  const DataBatch& x;
  const DecoderWeights& weights;
  const LossKernel& kernel;
  EncodingMode mode;
  const PgdConfig& config;
  EncodeResult& out;

  void run(long begin, long end) {
    const Matrix& w = weights.w;
    const long count = end - begin;
    const Index hidden = w.cols();

    // Packed copies of the still-active columns.
    std::vector<long> active(count);
    std::iota(active.begin(), active.end(), begin);
    Vector alpha = Vector::Ones(count);  // per-column step memory (global idx - begin)

    Vector current_f;  // per-column objective, kept fresh for the trace
    if (config.record_trace) current_f.resize(count);

    for (int sweep = 0; sweep <= config.max_iterations; ++sweep) {
      if (active.empty()) break;
      const long a_count = static_cast<long>(active.size());

      Matrix e_pack(hidden, a_count);
      Matrix x_pack(x.visible(), a_count);
      for (long j = 0; j < a_count; ++j) {
        e_pack.col(j) = out.encodings.e.col(active[static_cast<size_t>(j)]);
        x_pack.col(j) = x.x.col(active[static_cast<size_t>(j)]);
      }

      Matrix m = w * e_pack;
      Matrix grad = w.transpose() *
                    (kernel.psi_prime_of(m.array()).matrix() - x_pack);
      if (!grad.allFinite())
        throw std::runtime_error("encoder: non-finite gradient at sweep " +
                                 std::to_string(sweep));
      Eigen::RowVectorXd f = column_objectives(x_pack, m, kernel);
      if (config.record_trace) {
        for (long j = 0; j < a_count; ++j)
          current_f[active[static_cast<size_t>(j)] - begin] = f[j];
        if (sweep == 0) out.trace.push_back(current_f);
      }

      // Stationarity: || P(e - g) - e ||_inf per column.
      std::vector<long> working;  // indices into the packed block
      working.reserve(static_cast<size_t>(a_count));
      std::vector<long> still_active;
      for (long j = 0; j < a_count; ++j) {
        long col = active[static_cast<size_t>(j)];
        double residual =
            (project(e_pack.col(j) - grad.col(j), mode) - e_pack.col(j))
                .lpNorm<Eigen::Infinity>();
        if (residual <= config.tolerance) {
          out.converged[static_cast<size_t>(col)] = true;
        } else {
          working.push_back(j);
          still_active.push_back(col);
        }
      }
      if (working.empty() || sweep == config.max_iterations) break;

      // Armijo backtracking, batched over the columns still lacking a step.
      std::vector<long> pending = working;
      Matrix trial = e_pack;
      std::vector<char> stepped(static_cast<size_t>(a_count), 0);
      for (long j : working) {
        long col = active[static_cast<size_t>(j)];
        double& a = alpha[col - begin];
        a = std::min(1.0, 2.0 * a);  // re-grow the remembered step
      }
      while (!pending.empty()) {
        Matrix t_pack(hidden, static_cast<long>(pending.size()));
        Matrix xt_pack(x.visible(), static_cast<long>(pending.size()));
        for (size_t q = 0; q < pending.size(); ++q) {
          long j = pending[q];
          long col = active[static_cast<size_t>(j)];
          t_pack.col(static_cast<long>(q)) = project(
              e_pack.col(j) - alpha[col - begin] * grad.col(j), mode);
          xt_pack.col(static_cast<long>(q)) = x_pack.col(j);
        }
        Eigen::RowVectorXd f_trial =
            column_objectives(xt_pack, w * t_pack, kernel);

        std::vector<long> retry;
        for (size_t q = 0; q < pending.size(); ++q) {
          long j = pending[q];
          long col = active[static_cast<size_t>(j)];
          Vector step = t_pack.col(static_cast<long>(q)) - e_pack.col(j);
          double decrease_bound =
              config.armijo_c * grad.col(j).dot(step);
          if (f_trial[static_cast<long>(q)] <= f[j] + decrease_bound) {
            trial.col(j) = t_pack.col(static_cast<long>(q));
            stepped[static_cast<size_t>(j)] = 1;
            if (config.record_trace)
              current_f[col - begin] = f_trial[static_cast<long>(q)];
          } else {
            alpha[col - begin] *= config.shrink;
            if (alpha[col - begin] < config.min_step) {
              // No acceptable step at machine scale; give up on this column
              // without marking it converged.
            } else {
              retry.push_back(j);
            }
          }
        }
        pending = std::move(retry);
      }

      std::vector<long> next_active;
      for (long j : working) {
        long col = active[static_cast<size_t>(j)];
        if (stepped[static_cast<size_t>(j)]) {
          out.encodings.e.col(col) = trial.col(j);
          ++out.iterations[static_cast<size_t>(col)];
          next_active.push_back(col);
        }
        // Columns whose line search bottomed out drop from the active set.
      }
      if (config.record_trace) out.trace.push_back(current_f);
      active = std::move(next_active);
    }
  }
};

}  // namespace

double distortion(const Vector& e_col, const Vector& x_col,
                  const DecoderWeights& weights, const LossKernel& kernel) {
  require(e_col.size() == weights.hidden(),
          "distortion: encoding length must match hidden size");
  require(x_col.size() == weights.visible(),
          "distortion: data length must match visible size");
  Array m = (weights.w * e_col).array();
  return (-x_col.array() * m + kernel.psi_of(m)).sum();
}

Matrix distortion_gradient_batch(const Encodings& e, const Matrix& x,
                                 const DecoderWeights& weights,
                                 const LossKernel& kernel) {
  require(e.hidden() == weights.hidden(),
          "distortion_gradient_batch: hidden sizes must match");
  require(x.rows() == weights.visible() && x.cols() == e.examples(),
          "distortion_gradient_batch: data shape must be V x n");
  return weights.w.transpose() *
         (kernel.psi_prime_of((weights.w * e.e).array()).matrix() - x);
}

bool EncodeResult::all_converged() const {
  return std::all_of(converged.begin(), converged.end(),
                     [](bool c) { return c; });
}

int EncodeResult::total_iterations() const {
  return std::accumulate(iterations.begin(), iterations.end(), 0);
}

EncodeResult encode_batch(const DataBatch& x, const DecoderWeights& weights,
                          const LossKernel& kernel, EncodingMode mode,
                          const PgdConfig& config, const Matrix* init,
                          int threads) {
  check_batch_args(x, weights);
  require(config.shrink > 0.0 && config.shrink < 1.0,
          "encoder: shrink must lie in (0, 1)");
  require(config.max_iterations >= 0, "encoder: max_iterations must be >= 0");

  const Index n = x.examples();
  const Index hidden = weights.hidden();

  EncodeResult result;
  result.encodings.mode = mode;
  if (init != nullptr) {
    require(init->rows() == hidden && init->cols() == n,
            "encoder: init shape must be H x n");
    if (mode == EncodingMode::binary_box)
      require((init->array().abs() <= 1.0).all(),
              "encoder: init entries outside [-1, 1] in binary_box mode");
    result.encodings.e = *init;
  } else {
    result.encodings.e = Matrix::Zero(hidden, n);
  }
  result.iterations.assign(static_cast<size_t>(n), 0);
  result.converged.assign(static_cast<size_t>(n), false);

  // The trace is one shared sweep-indexed sequence; run it on one worker.
  int workers = config.record_trace ? 1 : threads;
  parallel_for_ranges(n, workers, [&](long begin, long end) {
    SliceSolver solver{x, weights, kernel, mode, config, result};
    solver.run(begin, end);
  });
  return result;
}

CorrelationMatrix correlations(const DataBatch& x, const Encodings& e) {
  require(x.examples() == e.examples(),
          "correlations: data and encodings must have the same examples");
  require(x.examples() > 0, "correlations: empty batch");
  CorrelationMatrix b;
  b.b = x.x * e.e.transpose() / static_cast<double>(x.examples());
  b.n_source = x.examples();
  return b;
}

}  // namespace pcae
