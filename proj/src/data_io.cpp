#include "pcae/data_io.hpp"

#include "pcae/rng.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "binary readers and writers assume a little-endian host");

namespace pcae {
namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error(what);
}

std::ifstream open_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file: " + path);
  return in;
}

template <typename T>
T read_raw(std::istream& in, const std::string& context) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) fail(context + ": truncated file");
  return value;
}

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

std::uint32_t read_u32_be(std::istream& in, const std::string& context) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) fail(context + ": truncated file");
  return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
         (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

bool parse_double(const std::string& token, double& out) {
  const char* begin = token.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end != begin && *end == '\0';
}

RawDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open file: " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  Index width = -1;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<double> row;
    std::stringstream fields(line);
    std::string token;
    bool numeric = true;
    while (std::getline(fields, token, ',')) {
      // Trim surrounding whitespace before parsing.
      size_t a = token.find_first_not_of(" \t");
      size_t b = token.find_last_not_of(" \t");
      token = a == std::string::npos ? "" : token.substr(a, b - a + 1);
      double value;
      if (!parse_double(token, value)) {
        numeric = false;
        break;
      }
      row.push_back(value);
    }
    if (!numeric) {
      if (rows.empty() && width < 0) continue;  // header line
      fail("csv: non-numeric value at line " + std::to_string(line_no) +
           " of " + path);
    }
    if (width < 0) width = static_cast<Index>(row.size());
    if (static_cast<Index>(row.size()) != width)
      fail("csv: line " + std::to_string(line_no) + " of " + path + " has " +
           std::to_string(row.size()) + " fields, expected " +
           std::to_string(width));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail("csv: no data rows in " + path);

  RawDataset raw;
  raw.source = path;
  raw.values.resize(static_cast<Index>(rows.size()), width);
  for (size_t i = 0; i < rows.size(); ++i)
    for (Index v = 0; v < width; ++v)
      raw.values(static_cast<Index>(i), v) = rows[i][static_cast<size_t>(v)];
  return raw;
}

RawDataset load_idx_images(const std::string& path) {
  std::ifstream in = open_binary(path);
  std::uint32_t magic = read_u32_be(in, "idx");
  if (magic != 0x00000803u)
    fail("idx: bad magic in " + path +
         " (want 0x00000803, an unsigned-byte rank-3 image file)");
  std::uint32_t n = read_u32_be(in, "idx");
  std::uint32_t rows = read_u32_be(in, "idx");
  std::uint32_t cols = read_u32_be(in, "idx");
  if (n == 0 || rows == 0 || cols == 0) fail("idx: empty dimensions in " + path);

  const size_t pixels = size_t(n) * rows * cols;
  std::vector<unsigned char> bytes(pixels);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(pixels));
  if (!in) fail("idx: truncated pixel payload in " + path);

  RawDataset raw;
  raw.source = path;
  raw.image_rows = rows;
  raw.image_cols = cols;
  raw.values.resize(Index(n), Index(rows) * Index(cols));
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t p = 0; p < rows * cols; ++p)
      raw.values(Index(i), Index(p)) = bytes[size_t(i) * rows * cols + p] / 255.0;
  return raw;
}

RawDataset load_raw_f32(const std::string& path) {
  std::ifstream in = open_binary(path);
  std::uint32_t n = read_raw<std::uint32_t>(in, "raw_f32");
  std::uint32_t v = read_raw<std::uint32_t>(in, "raw_f32");
  if (n == 0 || v == 0) fail("raw_f32: empty dimensions in " + path);
  std::vector<float> buffer(size_t(n) * v);
  in.read(reinterpret_cast<char*>(buffer.data()),
          static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  if (!in) fail("raw_f32: truncated payload in " + path);

  RawDataset raw;
  raw.source = path;
  raw.values.resize(Index(n), Index(v));
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < v; ++j)
      raw.values(Index(i), Index(j)) = buffer[size_t(i) * v + j];
  return raw;
}

void check_unit_range(const RawDataset& raw) {
  if (!((raw.values.array() >= 0.0) && (raw.values.array() <= 1.0)).all())
    fail("dataset " + raw.source + " has values outside [0, 1]");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

DatasetFormat dataset_format_from_string(const std::string& name) {
  if (name == "csv") return DatasetFormat::csv;
  if (name == "idx") return DatasetFormat::idx_images;
  if (name == "raw_f32") return DatasetFormat::raw_f32;
  throw std::invalid_argument("unknown dataset format: " + name);
}

std::string to_string(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::csv: return "csv";
    case DatasetFormat::idx_images: return "idx";
    case DatasetFormat::raw_f32: return "raw_f32";
  }
  throw std::logic_error("unreachable");
}

RawDataset load_dataset(const std::string& path, DatasetFormat format) {
  RawDataset raw;
  switch (format) {
    case DatasetFormat::csv: raw = load_csv(path); break;
    case DatasetFormat::idx_images: raw = load_idx_images(path); break;
    case DatasetFormat::raw_f32: raw = load_raw_f32(path); break;
  }
  check_unit_range(raw);
  return raw;
}

BinarizeMode binarize_mode_from_string(const std::string& name) {
  if (name == "stochastic") return BinarizeMode::stochastic;
  if (name == "pass_through") return BinarizeMode::pass_through;
  throw std::invalid_argument("unknown binarize mode: " + name);
}

std::string to_string(BinarizeMode mode) {
  return mode == BinarizeMode::stochastic ? "stochastic" : "pass_through";
}

DataBatch binarize(const RawDataset& raw, BinarizeMode mode,
                   std::uint64_t seed) {
  require(raw.examples() > 0 && raw.visible() > 0, "binarize: empty dataset");
  DataBatch batch;
  batch.x.resize(raw.visible(), raw.examples());
  if (mode == BinarizeMode::pass_through) {
    batch.x = (2.0 * raw.values.transpose()).array() - 1.0;
    batch.binarized = false;
    return batch;
  }
  auto rng = make_rng(seed, seed_stream::binarize);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (Index i = 0; i < raw.examples(); ++i)
    for (Index v = 0; v < raw.visible(); ++v)
      batch.x(v, i) = uniform(rng) < raw.values(i, v) ? 1.0 : -1.0;
  batch.binarized = true;
  return batch;
}

namespace {
constexpr char kModelMagic[4] = {'P', 'C', 'A', 'E'};
}

void save_model(const ModelFile& model, const std::string& path) {
  require(model.weights.w.size() > 0, "save_model: empty weights");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open file for writing: " + path);

  out.write(kModelMagic, 4);
  write_raw(out, model.format_version);
  write_raw(out, static_cast<std::uint64_t>(model.weights.visible()));
  write_raw(out, static_cast<std::uint64_t>(model.weights.hidden()));
  auto id_len = static_cast<std::uint32_t>(model.weights.kernel_id.size());
  write_raw(out, id_len);
  out.write(model.weights.kernel_id.data(), id_len);
  write_raw(out, static_cast<std::uint8_t>(model.mode));
  write_raw(out, model.seed);
  // Row-major so that one visible bit's weights are contiguous on disk.
  for (Index v = 0; v < model.weights.visible(); ++v)
    for (Index h = 0; h < model.weights.hidden(); ++h)
      write_raw(out, model.weights.w(v, h));
  auto cfg_len = static_cast<std::uint32_t>(model.config_echo.size());
  write_raw(out, cfg_len);
  out.write(model.config_echo.data(), cfg_len);
  out.close();
  if (!out) fail("failed writing model file: " + path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in = open_binary(path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
    fail("model: bad magic in " + path);

  ModelFile model;
  model.format_version = read_raw<std::uint32_t>(in, "model");
  if (model.format_version != 1)
    fail("model: unsupported format version " +
         std::to_string(model.format_version) + " in " + path);
  auto v_bits = read_raw<std::uint64_t>(in, "model");
  auto hidden = read_raw<std::uint64_t>(in, "model");
  if (v_bits == 0 || hidden == 0 || v_bits > (1u << 24) || hidden > (1u << 24))
    fail("model: implausible dimensions in " + path);
  auto id_len = read_raw<std::uint32_t>(in, "model");
  if (id_len > 256) fail("model: oversized kernel id in " + path);
  model.weights.kernel_id.resize(id_len);
  in.read(model.weights.kernel_id.data(), id_len);
  auto mode_byte = read_raw<std::uint8_t>(in, "model");
  if (mode_byte > 1) fail("model: bad encoding mode byte in " + path);
  model.mode = static_cast<EncodingMode>(mode_byte);
  model.seed = read_raw<std::uint64_t>(in, "model");
  model.weights.w.resize(static_cast<Index>(v_bits), static_cast<Index>(hidden));
  for (Index v = 0; v < model.weights.visible(); ++v)
    for (Index h = 0; h < model.weights.hidden(); ++h)
      model.weights.w(v, h) = read_raw<double>(in, "model");
  auto cfg_len = read_raw<std::uint32_t>(in, "model");
  if (cfg_len > (1u << 20)) fail("model: oversized config echo in " + path);
  model.config_echo.resize(cfg_len);
  in.read(model.config_echo.data(), cfg_len);
  if (!in && cfg_len > 0) fail("model: truncated config echo in " + path);
  return model;
}

void export_images(const Matrix& values, const TileLayout& layout,
                   const std::string& path) {
  require(layout.image_width > 0 && layout.image_height > 0,
          "export_images: image dimensions must be positive");
  require(layout.grid_cols > 0, "export_images: grid_cols must be positive");
  require(values.rows() == layout.image_width * layout.image_height,
          "export_images: column length must equal width * height");
  require(values.cols() > 0, "export_images: no images");
  require((values.array().abs() <= 1.0).all(),
          "export_images: values outside [-1, 1]");

  const Index k = values.cols();
  const Index grid_rows = (k + layout.grid_cols - 1) / layout.grid_cols;
  const Index sheet_w = layout.grid_cols * layout.image_width;
  const Index sheet_h = grid_rows * layout.image_height;
  std::vector<unsigned char> sheet(static_cast<size_t>(sheet_w * sheet_h), 0);

  for (Index img = 0; img < k; ++img) {
    const Index tile_x = (img % layout.grid_cols) * layout.image_width;
    const Index tile_y = (img / layout.grid_cols) * layout.image_height;
    for (Index y = 0; y < layout.image_height; ++y) {
      for (Index x = 0; x < layout.image_width; ++x) {
        double v = values(y * layout.image_width + x, img);
        auto pixel = static_cast<unsigned char>(std::nearbyint(127.5 * (v + 1.0)));
        sheet[static_cast<size_t>((tile_y + y) * sheet_w + tile_x + x)] = pixel;
      }
    }
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open file for writing: " + path);
  out << "P5\n" << sheet_w << " " << sheet_h << "\n255\n";
  out.write(reinterpret_cast<const char*>(sheet.data()),
            static_cast<std::streamsize>(sheet.size()));
  out.close();
  if (!out) fail("failed writing image file: " + path);
}

void write_matrix_csv(const Matrix& columns_are_examples,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot open file for writing: " + path);
  const Matrix& m = columns_are_examples;
  for (Index i = 0; i < m.cols(); ++i) {
    std::string line;
    for (Index r = 0; r < m.rows(); ++r) {
      if (r > 0) line += ',';
      line += format_double(m(r, i));
    }
    out << line << '\n';
  }
  out.close();
  if (!out) fail("failed writing csv file: " + path);
}

Matrix read_matrix_csv(const std::string& path) {
  RawDataset raw = load_csv(path);
  return raw.values.transpose();
}

}  // namespace pcae
