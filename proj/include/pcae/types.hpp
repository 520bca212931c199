#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pcae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Array = Eigen::ArrayXXd;
using Index = Eigen::Index;

// How encodings are constrained during the encoder solve.
enum class EncodingMode : std::uint8_t {
  binary_box,     // entries kept in [-1, +1] by projection
  unconstrained,  // entries free real values
};

inline std::string to_string(EncodingMode mode) {
  return mode == EncodingMode::binary_box ? "binary_box" : "unconstrained";
}

inline EncodingMode encoding_mode_from_string(const std::string& name) {
  if (name == "binary_box") return EncodingMode::binary_box;
  if (name == "unconstrained") return EncodingMode::unconstrained;
  throw std::invalid_argument("unknown encoding mode: " + name);
}

// A batch of data bits, examples as columns: x is V x n.
// Binarized batches contain only {-1, +1}; pass-through batches may hold
// any values in [-1, +1].
struct DataBatch {
  Matrix x;
  bool binarized = false;

  Index visible() const { return x.rows(); }
  Index examples() const { return x.cols(); }
};

// Code vectors, examples as columns: e is H x n.
struct Encodings {
  Matrix e;
  EncodingMode mode = EncodingMode::binary_box;

  Index hidden() const { return e.rows(); }
  Index examples() const { return e.cols(); }
};

// Pairwise correlations b = (1/n) x e^T, one row per visible bit: V x H.
// n_source records how many examples the average was taken over.
struct CorrelationMatrix {
  Matrix b;
  Index n_source = 0;
};

// Decoder weights, one row per visible bit: V x H.
struct DecoderWeights {
  Matrix w;
  std::string kernel_id;

  Index visible() const { return w.rows(); }
  Index hidden() const { return w.cols(); }
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace pcae
