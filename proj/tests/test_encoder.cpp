#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pcae/encoder.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace pcae;

namespace {

Matrix random_signs(Index rows, Index cols, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  std::bernoulli_distribution coin(0.5);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = coin(rng) ? 1.0 : -1.0;
  return m;
}

Matrix random_uniform(Index rows, Index cols, double lo, double hi,
                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = u(rng);
  return m;
}

DataBatch batch_of(Matrix x) { return DataBatch{std::move(x), true}; }

}  // namespace

TEST_CASE("distortion reproduces a hand-computed value") {
  // One visible bit x = +1, weight 1, encoding 1: -1 + psi(1) = 2 ln(1+e^-1).
  DecoderWeights w{Matrix::Ones(1, 1), "xent"};
  Vector e(1), x(1);
  e << 1.0;
  x << 1.0;
  CHECK(distortion(e, x, w, cross_entropy_kernel()) ==
        doctest::Approx(2.0 * std::log1p(std::exp(-1.0))).epsilon(1e-14));
}

TEST_CASE("distortion_gradient_batch matches finite differences column by column") {
  std::mt19937_64 rng(555);
  LossKernel kernel = cross_entropy_kernel();
  for (int trial = 0; trial < 25; ++trial) {
    Index v_bits = 2 + static_cast<Index>(rng() % 4);
    Index hidden = 1 + static_cast<Index>(rng() % 3);
    Index n = 1 + static_cast<Index>(rng() % 4);
    DecoderWeights w{random_uniform(v_bits, hidden, -2.0, 2.0, rng), kernel.id};
    Matrix x = random_signs(v_bits, n, rng);
    Encodings e{random_uniform(hidden, n, -1.0, 1.0, rng),
                EncodingMode::binary_box};

    Matrix g = distortion_gradient_batch(e, x, w, kernel);
    for (Index i = 0; i < n; ++i) {
      Vector x_col = x.col(i);
      Vector fd = oracles::fd_gradient(
          [&](const Vector& ec) { return distortion(ec, x_col, w, kernel); },
          e.e.col(i));
      CHECK((g.col(i) - fd).lpNorm<Eigen::Infinity>() <=
            1e-5 * std::max(1.0, fd.lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST_CASE("zero weights leave the initialization untouched") {
  std::mt19937_64 rng(9);
  DecoderWeights w{Matrix::Zero(3, 2), "xent"};
  DataBatch x = batch_of(random_signs(3, 5, rng));
  Matrix init = random_uniform(2, 5, -1.0, 1.0, rng);
  EncodeResult res = encode_batch(x, w, cross_entropy_kernel(),
                                  EncodingMode::binary_box, PgdConfig{}, &init);
  CHECK(res.encodings.e == init);
  CHECK(res.all_converged());
  CHECK(res.total_iterations() == 0);
}

TEST_CASE("a confident copy decoder makes the encoder reproduce the data") {
  std::mt19937_64 rng(21);
  Matrix x = random_signs(4, 7, rng);
  DecoderWeights w{20.0 * Matrix::Identity(4, 4), "xent"};
  EncodeResult res = encode_batch(batch_of(x), w, cross_entropy_kernel(),
                                  EncodingMode::binary_box, PgdConfig{});
  CHECK(res.all_converged());
  CHECK((res.encodings.e - x).lpNorm<Eigen::Infinity>() <= 1e-6);
}

TEST_CASE("solutions match golden-section search when the code is one-dimensional") {
  std::mt19937_64 rng(303);
  LossKernel kernel = cross_entropy_kernel();
  for (int trial = 0; trial < 10; ++trial) {
    DecoderWeights w{random_uniform(3, 1, -2.0, 2.0, rng), kernel.id};
    Matrix x = random_signs(3, 6, rng);
    PgdConfig config;
    config.max_iterations = 2000;
    EncodeResult res = encode_batch(batch_of(x), w, kernel,
                                    EncodingMode::binary_box, config);
    REQUIRE(res.all_converged());
    for (Index i = 0; i < 6; ++i) {
      Vector x_col = x.col(i);
      double best = oracles::golden_min(
          [&](double u) {
            Vector ec(1);
            ec << u;
            return distortion(ec, x_col, w, kernel);
          },
          -1.0, 1.0, 1e-12);
      Vector ec(1);
      ec << best;
      double oracle_value = distortion(ec, x_col, w, kernel);
      double ours = distortion(res.encodings.e.col(i), x_col, w, kernel);
      CHECK(ours <= oracle_value + 1e-8);
    }
  }
}

TEST_CASE("per-example objectives never increase along the solve") {
  std::mt19937_64 rng(1234);
  LossKernel kernel = cross_entropy_kernel();
  DecoderWeights w{random_uniform(6, 3, -1.5, 1.5, rng), kernel.id};
  Matrix x = random_signs(6, 8, rng);
  PgdConfig config;
  config.record_trace = true;
  EncodeResult res = encode_batch(batch_of(x), w, kernel,
                                  EncodingMode::binary_box, config);
  REQUIRE(res.trace.size() >= 2);
  for (size_t k = 1; k < res.trace.size(); ++k)
    for (Index i = 0; i < 8; ++i)
      CHECK(res.trace[k][i] <= res.trace[k - 1][i] + 1e-12);
  // The recorded endpoint is the realized objective.
  for (Index i = 0; i < 8; ++i)
    CHECK(res.trace.back()[i] ==
          doctest::Approx(distortion(res.encodings.e.col(i), x.col(i), w,
                                     kernel))
              .epsilon(1e-12));
}

TEST_CASE("converged columns satisfy the projected-gradient stationarity test") {
  std::mt19937_64 rng(77);
  LossKernel kernel = cross_entropy_kernel();
  DecoderWeights w{random_uniform(5, 2, -1.0, 1.0, rng), kernel.id};
  Matrix x = random_signs(5, 9, rng);
  PgdConfig config;
  config.max_iterations = 2000;
  EncodeResult res = encode_batch(batch_of(x), w, kernel,
                                  EncodingMode::binary_box, config);
  REQUIRE(res.all_converged());
  Matrix g = distortion_gradient_batch(res.encodings, x, w, kernel);
  for (Index i = 0; i < 9; ++i) {
    Vector step = (res.encodings.e.col(i) - g.col(i))
                      .cwiseMax(-1.0)
                      .cwiseMin(1.0) -
                  res.encodings.e.col(i);
    CHECK(step.lpNorm<Eigen::Infinity>() <= config.tolerance);
  }
}

TEST_CASE("binary box encodings stay inside the box, unconstrained ones may leave it") {
  // Crafted so the unconstrained optimum sits just outside the box:
  // x = (+1, -1), w = (0.8, 0.4): 0.8 tanh(0.4 e) + 0.4 tanh(0.2 e) = 0.4
  // has its root near e = 1.05.
  Matrix w(2, 1);
  w << 0.8, 0.4;
  Matrix x(2, 1);
  x << 1.0, -1.0;
  DecoderWeights weights{w, "xent"};
  PgdConfig config;
  config.max_iterations = 5000;

  EncodeResult boxed = encode_batch(batch_of(x), weights, cross_entropy_kernel(),
                                    EncodingMode::binary_box, config);
  REQUIRE(boxed.all_converged());
  CHECK(boxed.encodings.e(0, 0) == doctest::Approx(1.0).epsilon(1e-9));

  EncodeResult free = encode_batch(batch_of(x), weights, cross_entropy_kernel(),
                                   EncodingMode::unconstrained, config);
  REQUIRE(free.all_converged());
  CHECK(free.encodings.e(0, 0) > 1.0);
  Vector g = distortion_gradient_batch(free.encodings, x, weights,
                                       cross_entropy_kernel())
                 .col(0);
  CHECK(g.lpNorm<Eigen::Infinity>() <= config.tolerance);
}

TEST_CASE("a warm start at the solution takes zero iterations") {
  std::mt19937_64 rng(42);
  LossKernel kernel = cross_entropy_kernel();
  DecoderWeights w{random_uniform(4, 2, -1.0, 1.0, rng), kernel.id};
  DataBatch x = batch_of(random_signs(4, 5, rng));
  PgdConfig config;
  config.max_iterations = 2000;
  EncodeResult first = encode_batch(x, w, kernel, EncodingMode::binary_box,
                                    config);
  REQUIRE(first.all_converged());
  EncodeResult warm = encode_batch(x, w, kernel, EncodingMode::binary_box,
                                   config, &first.encodings.e);
  CHECK(warm.encodings.e == first.encodings.e);
  CHECK(warm.total_iterations() == 0);
}

TEST_CASE("encode_batch is deterministic and thread-count independent") {
  std::mt19937_64 rng(66);
  LossKernel kernel = cross_entropy_kernel();
  DecoderWeights w{random_uniform(5, 3, -1.5, 1.5, rng), kernel.id};
  DataBatch x = batch_of(random_signs(5, 11, rng));
  EncodeResult one = encode_batch(x, w, kernel, EncodingMode::binary_box,
                                  PgdConfig{}, nullptr, 1);
  EncodeResult four = encode_batch(x, w, kernel, EncodingMode::binary_box,
                                   PgdConfig{}, nullptr, 4);
  CHECK(one.encodings.e == four.encodings.e);
  CHECK(one.iterations == four.iterations);
  CHECK(one.converged == four.converged);
}

TEST_CASE("correlations match the naive loop and record the batch size") {
  std::mt19937_64 rng(11);
  Matrix x = random_signs(4, 9, rng);
  Encodings e{random_uniform(2, 9, -1.0, 1.0, rng), EncodingMode::binary_box};
  CorrelationMatrix b = correlations(batch_of(x), e);
  CHECK(b.n_source == 9);
  CHECK((b.b - oracles::naive_correlations(x, e.e)).lpNorm<Eigen::Infinity>() <=
        1e-14);
  CHECK((b.b.array().abs() <= 1.0 + 1e-12).all());
}

TEST_CASE("encoder entry points validate their inputs") {
  LossKernel kernel = hamming_kernel();
  DecoderWeights w{Matrix::Ones(2, 2), kernel.id};
  DataBatch x = batch_of((Matrix(2, 1) << 1, -1).finished());

  Matrix bad_init = Matrix::Constant(2, 1, 1.5);
  CHECK_THROWS_AS(encode_batch(x, w, kernel, EncodingMode::binary_box,
                               PgdConfig{}, &bad_init),
                  std::invalid_argument);
  Matrix wrong_shape = Matrix::Zero(3, 1);
  CHECK_THROWS_AS(encode_batch(x, w, kernel, EncodingMode::binary_box,
                               PgdConfig{}, &wrong_shape),
                  std::invalid_argument);
  DataBatch out_of_range{(Matrix(2, 1) << 2.0, 0.0).finished(), false};
  CHECK_THROWS_AS(encode_batch(out_of_range, w, kernel,
                               EncodingMode::binary_box, PgdConfig{}),
                  std::invalid_argument);
  DataBatch wrong_rows{(Matrix(3, 1) << 1, 1, 1).finished(), true};
  CHECK_THROWS_AS(encode_batch(wrong_rows, w, kernel, EncodingMode::binary_box,
                               PgdConfig{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      correlations(x, Encodings{Matrix::Zero(2, 5), EncodingMode::binary_box}),
      std::invalid_argument);
}
