#pragma once

#include "pcae/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pcae {

// Real-valued dataset as loaded from disk, one row per example, values in
// [0, 1]. In memory the library keeps examples as columns; the loaders
// transpose on the way in and the writers transpose on the way out.
struct RawDataset {
  Matrix values;  // n x V
  std::string source;
  Index image_rows = 0;  // known for image formats, else 0
  Index image_cols = 0;

  Index examples() const { return values.rows(); }
  Index visible() const { return values.cols(); }
};

enum class DatasetFormat : std::uint8_t {
  csv,         // text, one example per line, optional header
  idx_images,  // big-endian IDX image file (magic 0x00000803), bytes / 255
  raw_f32,     // little-endian: u32 n, u32 V, then n*V float32 row-major
};

DatasetFormat dataset_format_from_string(const std::string& name);
std::string to_string(DatasetFormat format);

RawDataset load_dataset(const std::string& path, DatasetFormat format);

enum class BinarizeMode : std::uint8_t {
  stochastic,    // entry is +1 with probability equal to the raw value
  pass_through,  // affine map [0,1] -> [-1,1], no sampling
};

BinarizeMode binarize_mode_from_string(const std::string& name);
std::string to_string(BinarizeMode mode);

// Converts a raw dataset to a +-1 (stochastic) or [-1,1] (pass_through)
// batch with examples as columns. Stochastic sampling walks examples in
// order and bits within an example, so the draw depends only on the seed
// and the dataset shape.
DataBatch binarize(const RawDataset& raw, BinarizeMode mode,
                   std::uint64_t seed);

// Serialized decoder model. save/load round-trips are byte-identical, which
// is what makes reruns of the same training config comparable with cmp.
struct ModelFile {
  std::uint32_t format_version = 1;
  DecoderWeights weights;
  EncodingMode mode = EncodingMode::binary_box;
  std::uint64_t seed = 0;
  std::string config_echo;  // JSON copy of the training configuration
};

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

// Grayscale PGM (P5) tile sheet. Each column of `values` is one image with
// entries in [-1, 1], laid out row-major at image_width x image_height;
// pixels map through round-to-nearest-even of 127.5 * (v + 1). Tiles fill
// the sheet left to right, top to bottom; unused cells stay black.
struct TileLayout {
  Index image_width = 0;
  Index image_height = 0;
  Index grid_cols = 0;
};

void export_images(const Matrix& values, const TileLayout& layout,
                   const std::string& path);

// Numeric matrix CSV, examples as columns in memory and as rows on disk.
void write_matrix_csv(const Matrix& columns_are_examples,
                      const std::string& path);
Matrix read_matrix_csv(const std::string& path);

}  // namespace pcae
