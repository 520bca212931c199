#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pcae/data_io.hpp"
#include "pcae/decoder.hpp"
#include "pcae/encoder.hpp"
#include "pcae/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

using namespace pcae;

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

// Runs the installed binary (path in PCAE_BIN) with the given arguments.
CliResult run_cli(const std::string& args) {
  const char* bin = std::getenv("PCAE_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "PCAE_BIN must point at the built binary");
  std::string cmd = std::string("\"") + bin + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult result;
  char buf[1024];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, got);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

// Extracts the value of a "key <number>" stdout line.
double metric(const std::string& output, const std::string& key) {
  std::istringstream in(output);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + " ", 0) == 0)
      return std::strtod(line.c_str() + key.size() + 1, nullptr);
  FAIL("no '" << key << "' line in output:\n" << output);
  return 0.0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Report lines with the wall-clock column cut off, for comparing reruns.
std::vector<std::string> report_without_seconds(const std::string& path) {
  std::vector<std::string> lines;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    size_t cut = line.find_last_of(',');
    REQUIRE(cut != std::string::npos);
    lines.push_back(line.substr(0, cut));
  }
  return lines;
}

// Two interleaved 6-bit prototypes with one deterministic flip per example:
// 0/1 values, so stochastic binarization is deterministic for any seed.
void write_dataset(const std::string& path, int n = 12) {
  std::ofstream out(path);
  for (int i = 0; i < n; ++i) {
    int row[6];
    for (int v = 0; v < 6; ++v) row[v] = (v + i) % 2;
    row[(i * 3 + 1) % 6] ^= 1;
    for (int v = 0; v < 6; ++v) out << row[v] << (v < 5 ? ',' : '\n');
  }
}

// One scratch directory with one trained model, shared by the test cases.
struct Fixture {
  fs::path dir;
  std::string data_csv;
  std::string model;
  std::string report;
  std::string train_args;
  CliResult train_result;
};

const Fixture& fixture() {
  static Fixture f = [] {
    Fixture fx;
    fx.dir = fs::temp_directory_path() /
             ("pcae_cli_" + std::to_string(static_cast<unsigned>(::getpid())));
    fs::create_directories(fx.dir);
    fx.data_csv = (fx.dir / "data.csv").string();
    write_dataset(fx.data_csv);
    fx.model = (fx.dir / "model.pcae").string();
    fx.report = (fx.dir / "report.csv").string();
    fx.train_args = "train --data " + fx.data_csv +
                    " --hidden 2 --epochs 15 --fixed-batch --seed 7 --out " +
                    fx.model + " --report " + fx.report;
    fx.train_result = run_cli(fx.train_args);
    return fx;
  }();
  return f;
}

DataBatch fixture_batch() {
  RawDataset raw = load_dataset(fixture().data_csv, DatasetFormat::csv);
  return binarize(raw, BinarizeMode::stochastic, 7);
}

std::string scratch(const std::string& name) {
  return (fixture().dir / name).string();
}

}  // namespace

TEST_CASE("train writes a model and a report and prints final metrics") {
  const Fixture& f = fixture();
  REQUIRE(f.train_result.exit_code == 0);
  CHECK(fs::exists(f.model));
  CHECK(fs::exists(f.report));
  CHECK(metric(f.train_result.output, "epochs") == 15);
  double loss = metric(f.train_result.output, "loss");
  double bound = metric(f.train_result.output, "bound");
  CHECK(std::isfinite(loss));
  CHECK(bound >= loss - 1e-9);

  // The report has the documented header and one row per epoch.
  std::vector<std::string> lines = report_without_seconds(f.report);
  REQUIRE(lines.size() == 16);
  CHECK(lines[0] ==
        "epoch,loss,bound,holdout_loss,encoder_iterations,decoder_iterations");
  CHECK(lines[1].rfind("1,", 0) == 0);

  // The model file echoes the run configuration.
  ModelFile model = load_model(f.model);
  CHECK(model.weights.kernel_id == "xent");
  CHECK(model.seed == 7);
  CHECK(model.config_echo.find("\"hidden\":2") != std::string::npos);
  CHECK(model.config_echo.find("\"fixed-batch\":true") != std::string::npos);
}

TEST_CASE("eval matches the library evaluate() on the trained model") {
  const Fixture& f = fixture();
  REQUIRE(f.train_result.exit_code == 0);
  CliResult r = run_cli("eval --data " + f.data_csv + " --model " + f.model +
                        " --seed 7 --per-example " + scratch("pe.csv"));
  REQUIRE(r.exit_code == 0);

  ModelFile model = load_model(f.model);
  EvalResult want = evaluate(fixture_batch(), model.weights,
                             kernel_by_id(model.weights.kernel_id), model.mode,
                             PgdConfig{});
  // %.17g round-trips doubles exactly, so the match is bitwise.
  CHECK(metric(r.output, "loss") == want.loss);
  CHECK(metric(r.output, "bound") == want.bound);

  // Per-example losses average to the printed loss.
  Matrix pe = read_matrix_csv(scratch("pe.csv"));
  REQUIRE(pe.rows() == 1);
  REQUIRE(pe.cols() == 12);
  CHECK(pe.mean() == doctest::Approx(want.loss).epsilon(1e-12));
}

TEST_CASE("a zero-weight model scores the neutral loss under either kernel") {
  const Fixture& f = fixture();
  ModelFile zero;
  zero.weights.w = Matrix::Zero(6, 2);
  zero.weights.kernel_id = "xent";
  const std::string path = scratch("zero.pcae");
  save_model(zero, path);

  CliResult r = run_cli("eval --data " + f.data_csv + " --model " + path);
  REQUIRE(r.exit_code == 0);
  CHECK(metric(r.output, "loss") == doctest::Approx(6.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(metric(r.output, "bound") == doctest::Approx(6.0 * std::log(2.0)).epsilon(1e-12));

  CliResult h = run_cli("eval --data " + f.data_csv + " --model " + path +
                        " --kernel hamming");
  REQUIRE(h.exit_code == 0);
  CHECK(metric(h.output, "loss") == doctest::Approx(6.0 * 0.5).epsilon(1e-12));
}

TEST_CASE("encode and decode compose back to the evaluated reconstruction") {
  const Fixture& f = fixture();
  REQUIRE(f.train_result.exit_code == 0);
  const std::string enc_csv = scratch("enc.csv");
  const std::string dec_csv = scratch("dec.csv");
  REQUIRE(run_cli("encode --data " + f.data_csv + " --model " + f.model +
                  " --seed 7 --out " + enc_csv)
              .exit_code == 0);
  REQUIRE(run_cli("decode --model " + f.model + " --encodings " + enc_csv +
                  " --out " + dec_csv)
              .exit_code == 0);

  Matrix encodings = read_matrix_csv(enc_csv);
  CHECK(encodings.rows() == 2);   // code bits
  CHECK(encodings.cols() == 12);  // examples
  CHECK((encodings.array().abs() <= 1.0 + 1e-15).all());

  Matrix recon = read_matrix_csv(dec_csv);
  REQUIRE(recon.rows() == 6);
  REQUIRE(recon.cols() == 12);

  ModelFile model = load_model(f.model);
  double loss = reconstruction_loss(fixture_batch().x, recon,
                                    kernel_by_id(model.weights.kernel_id),
                                    /*clamp_feedback=*/true);
  CliResult ev = run_cli("eval --data " + f.data_csv + " --model " + f.model +
                         " --seed 7");
  // The CSV stores full precision, so composing the files reproduces the
  // one-shot loss to rounding noise.
  CHECK(loss == doctest::Approx(metric(ev.output, "loss")).epsilon(1e-12));
}

TEST_CASE("reconstruct prints the eval loss and exports matching files") {
  const Fixture& f = fixture();
  REQUIRE(f.train_result.exit_code == 0);
  const std::string rec_csv = scratch("rec.csv");
  const std::string sheet = scratch("rec.pgm");
  CliResult r = run_cli("reconstruct --data " + f.data_csv + " --model " +
                        f.model + " --seed 7 --out " + rec_csv + " --images " +
                        sheet + " --image-width 3 --image-height 2");
  REQUIRE(r.exit_code == 0);

  CliResult ev = run_cli("eval --data " + f.data_csv + " --model " + f.model +
                         " --seed 7");
  CHECK(metric(r.output, "loss") == metric(ev.output, "loss"));

  // 12 tiles of 3x2 on a default 4-wide grid -> 12x6 sheet.
  std::string pgm = read_file(sheet);
  CHECK(pgm.rfind("P5\n12 6\n255\n", 0) == 0);
  CHECK(pgm.size() == std::strlen("P5\n12 6\n255\n") + 12 * 6);
}

TEST_CASE("basis-viz renders one tile per code bit via the decoder") {
  const Fixture& f = fixture();
  REQUIRE(f.train_result.exit_code == 0);
  const std::string sheet = scratch("basis.pgm");
  REQUIRE(run_cli("basis-viz --model " + f.model + " --out " + sheet +
                  " --image-width 3 --image-height 2 --grid-cols 2")
              .exit_code == 0);

  // Expected tiles: decode the two lone-bit codes with the library.
  ModelFile model = load_model(f.model);
  Matrix basis = Matrix::Constant(2, 2, -1.0);
  basis.diagonal().setConstant(1.0);
  Matrix tiles = decode(Encodings{basis, model.mode}, model.weights,
                        kernel_by_id(model.weights.kernel_id));

  std::string pgm = read_file(sheet);
  const std::string header = "P5\n6 2\n255\n";
  REQUIRE(pgm.rfind(header, 0) == 0);
  REQUIRE(pgm.size() == header.size() + 12);
  const auto* px = reinterpret_cast<const unsigned char*>(pgm.data() + header.size());
  for (Index h = 0; h < 2; ++h)
    for (Index y = 0; y < 2; ++y)
      for (Index x = 0; x < 3; ++x) {
        auto want = static_cast<unsigned char>(
            std::nearbyint(127.5 * (tiles(y * 3 + x, h) + 1.0)));
        CHECK(px[y * 6 + h * 3 + x] == want);
      }

  // A zero-weight model decodes every code to 0: uniform mid-gray tiles.
  // Four tiles on the default 2-wide grid fill the sheet with no filler.
  ModelFile zero;
  zero.weights.w = Matrix::Zero(4, 4);
  zero.weights.kernel_id = "xent";
  save_model(zero, scratch("zero_viz.pcae"));
  const std::string gray = scratch("gray.pgm");
  REQUIRE(run_cli("basis-viz --model " + scratch("zero_viz.pcae") + " --out " +
                  gray)
              .exit_code == 0);
  std::string gray_pgm = read_file(gray);
  size_t px_at = gray_pgm.find("255\n") + 4;
  for (size_t i = px_at; i < gray_pgm.size(); ++i)
    CHECK(static_cast<unsigned char>(gray_pgm[i]) == 128);
}

TEST_CASE("identical train invocations produce identical artifacts") {
  const Fixture& f = fixture();
  REQUIRE(f.train_result.exit_code == 0);
  const std::string model2 = scratch("model2.pcae");
  const std::string report2 = scratch("report2.csv");
  CliResult again = run_cli("train --data " + f.data_csv +
                            " --hidden 2 --epochs 15 --fixed-batch --seed 7"
                            " --out " + model2 + " --report " + report2);
  REQUIRE(again.exit_code == 0);

  // Model bytes differ only in the echoed output paths; compare the loaded
  // weights bit-for-bit and the reports with wall-clock times masked.
  ModelFile a = load_model(f.model);
  ModelFile b = load_model(model2);
  CHECK(a.weights.w == b.weights.w);
  CHECK(report_without_seconds(f.report) == report_without_seconds(report2));
  CHECK(again.output == f.train_result.output);

  // Same command, same paths: byte-identical model file across reruns.
  std::string before = read_file(f.model);
  CliResult third = run_cli(f.train_args);
  REQUIRE(third.exit_code == 0);
  CHECK(read_file(f.model) == before);

  // A different seed trains different weights.
  const std::string model3 = scratch("model3.pcae");
  REQUIRE(run_cli("train --data " + f.data_csv +
                  " --hidden 2 --epochs 15 --fixed-batch --seed 8 --out " +
                  model3)
              .exit_code == 0);
  CHECK(load_model(model3).weights.w != a.weights.w);
}

TEST_CASE("config files feed flags, and explicit flags win") {
  const Fixture& f = fixture();
  const std::string cfg = scratch("cfg.json");
  std::ofstream(cfg) << R"({"hidden": 2, "epochs": 3, "fixed-batch": true,)"
                     << R"( "data": ")" << f.data_csv << R"("})";

  const std::string m1 = scratch("cfg_m1.pcae");
  CliResult r1 = run_cli("train --config " + cfg + " --out " + m1);
  REQUIRE(r1.exit_code == 0);
  CHECK(metric(r1.output, "epochs") == 3);

  // --epochs on the command line beats the config value.
  const std::string m2 = scratch("cfg_m2.pcae");
  CliResult r2 = run_cli("train --config " + cfg + " --epochs 2 --out " + m2);
  REQUIRE(r2.exit_code == 0);
  CHECK(metric(r2.output, "epochs") == 2);

  // Unknown keys are rejected as usage errors.
  const std::string bad = scratch("bad.json");
  std::ofstream(bad) << R"({"hidden": 2, "bogus": 1})";
  CliResult r3 = run_cli("train --config " + bad + " --data " + f.data_csv +
                         " --out " + scratch("cfg_m3.pcae"));
  CHECK(r3.exit_code == 2);
  CHECK(r3.output.find("bogus") != std::string::npos);
}

TEST_CASE("usage problems exit 2, runtime failures exit 1, help exits 0") {
  const Fixture& f = fixture();

  CHECK(run_cli("").exit_code == 2);                    // no subcommand
  CHECK(run_cli("frobnicate").exit_code == 2);          // unknown subcommand
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("train --help").exit_code == 0);

  // Missing required flags.
  CHECK(run_cli("train --data " + f.data_csv + " --out " + scratch("x.pcae"))
            .exit_code == 2);
  CHECK(run_cli("train --data " + f.data_csv + " --hidden 2").exit_code == 2);
  CHECK(run_cli("eval --data " + f.data_csv).exit_code == 2);

  // Bad option values.
  CHECK(run_cli("train --data " + f.data_csv +
                " --hidden 2 --kernel mystery --out " + scratch("x.pcae"))
            .exit_code == 2);
  CHECK(run_cli("train --data " + f.data_csv +
                " --hidden 2 --epochs notanint --out " + scratch("x.pcae"))
            .exit_code == 2);

  // Runtime failures: missing files.
  CHECK(run_cli("train --data " + scratch("nope.csv") +
                " --hidden 2 --out " + scratch("x.pcae"))
            .exit_code == 1);
  CHECK(run_cli("eval --data " + f.data_csv + " --model " +
                scratch("nope.pcae"))
            .exit_code == 1);

  // Structurally wrong inputs: encodings of the wrong width.
  const std::string wide = scratch("wide.csv");
  std::ofstream(wide) << "0.5,0.5,0.5\n0.1,0.2,0.3\n";
  CliResult r = run_cli("decode --model " + f.model + " --encodings " + wide +
                        " --out " + scratch("never.csv"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("length") != std::string::npos);
}
