#include "unicon/dataio.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"
#include "oracles.hpp"
#include "unicon/linalg.hpp"

using unicon::Mask;
using unicon::Matrix;

namespace {

std::string temp_path(const std::string& name) {
  return ::testing::TempDir() + "dataio_" + name;
}

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
}

std::vector<unsigned char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

void expect_throw_containing(const std::function<void()>& fn,
                             const std::string& fragment) {
  try {
    fn();
    FAIL() << "expected an exception mentioning '" << fragment << "'";
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos)
        << "actual message: " << e.what();
  }
}

TEST(Embeddings, HandCraftedLittleEndianFile) {
  // 1 sample, 2 dims; payload floats 1.0 and -2.0 in little-endian bytes.
  const std::vector<unsigned char> bytes = {
      'U', 'E', 'M', 'B',              // magic
      0x01, 0x00,                      // version 1 (u16 LE)
      0x01, 0x00, 0x00, 0x00,          // rows = 1 sample
      0x02, 0x00, 0x00, 0x00,          // cols = 2 dims
      0x00, 0x00, 0x80, 0x3F,          // 1.0f
      0x00, 0x00, 0x00, 0xC0,          // -2.0f
  };
  const std::string path = temp_path("hand.uemb");
  write_bytes(path, bytes);
  const Matrix m = unicon::read_embeddings(path);
  ASSERT_EQ(m.rows(), 2);  // dims become in-memory rows
  ASSERT_EQ(m.cols(), 1);
  EXPECT_DOUBLE_EQ(m(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m(1, 0), -2.0);
}

TEST(Embeddings, RoundTripAtFloat32Precision) {
  std::mt19937_64 rng(3);
  const Matrix m = oracle::random_matrix(3, 2, rng);  // 2 samples of dim 3
  const std::string path = temp_path("roundtrip.uemb");
  unicon::write_embeddings(path, m);
  const Matrix back = unicon::read_embeddings(path);
  ASSERT_EQ(back.rows(), 3);
  ASSERT_EQ(back.cols(), 2);
  for (Eigen::Index j = 0; j < 2; ++j) {
    for (Eigen::Index i = 0; i < 3; ++i) {
      EXPECT_DOUBLE_EQ(back(i, j), double(float(m(i, j))));
    }
  }
  // On-disk header says 2 samples (rows) x 3 dims (cols).
  const auto bytes = read_bytes(path);
  ASSERT_GE(bytes.size(), 14u);
  EXPECT_EQ(bytes[6], 2u);   // rows LSB
  EXPECT_EQ(bytes[10], 3u);  // cols LSB
  EXPECT_EQ(bytes.size(), 14u + 2u * 3u * 4u);
}

TEST(Embeddings, ErrorsNameOffsetsAndIndices) {
  const std::string bad_magic = temp_path("badmagic.uemb");
  write_bytes(bad_magic, {'X', 'X', 'X', 'X', 1, 0, 1, 0, 0, 0, 1, 0, 0, 0,
                          0, 0, 0x80, 0x3F});
  expect_throw_containing([&] { unicon::read_embeddings(bad_magic); }, "magic");

  const std::string bad_version = temp_path("badversion.uemb");
  write_bytes(bad_version, {'U', 'E', 'M', 'B', 2, 0, 1, 0, 0, 0, 1, 0, 0, 0,
                            0, 0, 0x80, 0x3F});
  expect_throw_containing([&] { unicon::read_embeddings(bad_version); },
                          "version");

  // Truncate the round-trip file by one float.
  std::mt19937_64 rng(5);
  const Matrix m = oracle::random_matrix(2, 2, rng);
  const std::string truncated = temp_path("truncated.uemb");
  unicon::write_embeddings(truncated, m);
  auto bytes = read_bytes(truncated);
  bytes.resize(bytes.size() - 4);
  write_bytes(truncated, bytes);
  try {
    unicon::read_embeddings(truncated);
    FAIL() << "expected truncation error";
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("16"), std::string::npos) << msg;  // expected bytes
    EXPECT_NE(msg.find("12"), std::string::npos) << msg;  // actual bytes
  }

  // NaN payload entry (quiet NaN float bits 0x7FC00000) at entry index 1.
  const std::string nan_file = temp_path("nan.uemb");
  write_bytes(nan_file, {'U', 'E', 'M', 'B', 1, 0, 1, 0, 0, 0, 2, 0, 0, 0,
                         0, 0, 0x80, 0x3F, 0x00, 0x00, 0xC0, 0x7F});
  expect_throw_containing([&] { unicon::read_embeddings(nan_file); },
                          "entry 1");

  expect_throw_containing(
      [&] { unicon::read_embeddings(temp_path("no_such.uemb")); }, "open");

  Matrix with_nan = Matrix::Zero(2, 2);
  with_nan(1, 1) = std::numeric_limits<double>::quiet_NaN();
  expect_throw_containing(
      [&] { unicon::write_embeddings(temp_path("w.uemb"), with_nan); },
      "finite");
}

TEST(PairMask, ParsesPairsAndDefaults) {
  const std::string path = temp_path("mask.csv");
  {
    std::ofstream out(path);
    out << "i,j\n0,0\n0,1\n1,1\n";
  }
  const Mask mask = unicon::read_pair_mask(path, 2, 2);
  EXPECT_TRUE(mask(0, 0));
  EXPECT_TRUE(mask(0, 1));
  EXPECT_TRUE(mask(1, 1));
  EXPECT_FALSE(mask(1, 0));

  // Absent file: identity for square shapes, error otherwise.
  const Mask identity = unicon::read_pair_mask(temp_path("absent.csv"), 4, 4);
  EXPECT_TRUE((identity == unicon::identity_mask(4)).all());
  EXPECT_THROW(unicon::read_pair_mask(temp_path("absent.csv"), 3, 4),
               std::invalid_argument);
}

TEST(PairMask, ReportsLineNumbersAndCoverage) {
  const std::string path = temp_path("bad_mask.csv");
  {
    std::ofstream out(path);
    out << "i,j\n0,0\n5,0\n";
  }
  expect_throw_containing([&] { unicon::read_pair_mask(path, 3, 3); },
                          "line 3");

  {
    std::ofstream out(path);
    out << "i,j\n0,0\n1,0\n2,0\n";  // y columns 1,2 never matched
  }
  expect_throw_containing([&] { unicon::read_pair_mask(path, 3, 3); },
                          "empty positive set");

  {
    std::ofstream out(path);
    out << "i,j\n0,zero\n";
  }
  expect_throw_containing([&] { unicon::read_pair_mask(path, 3, 3); },
                          "line 2");
}

TEST(PairMask, WriteReadRoundTrip) {
  Mask mask = Mask::Constant(3, 3, false);
  mask(0, 1) = mask(1, 0) = mask(2, 2) = mask(0, 2) = true;
  const std::string path = temp_path("mask_rt.csv");
  unicon::write_pair_mask(path, mask);
  const Mask back = unicon::read_pair_mask(path, 3, 3);
  EXPECT_TRUE((back == mask).all());
}

TEST(Labels, RoundTrip) {
  const std::vector<int> labels = {0, 2, 1, 1, 0};
  const std::string path = temp_path("labels.csv");
  unicon::write_labels(path, labels);
  EXPECT_EQ(unicon::read_labels(path), labels);
  EXPECT_THROW(unicon::read_labels(temp_path("absent_labels.csv")),
               std::runtime_error);
}

TEST(Models, LinearRoundTripAtStoragePrecision) {
  std::mt19937_64 rng(11);
  unicon::LinearModel model;
  model.f1 = oracle::random_matrix(3, 5, rng);
  model.f2 = oracle::random_matrix(3, 4, rng);
  model.rho = 1.25;
  const std::string path = temp_path("linear.umdl");
  unicon::save_model(path, model);
  const auto loaded = unicon::load_model(path);
  const auto& back = std::get<unicon::LinearModel>(loaded);
  EXPECT_DOUBLE_EQ(back.rho, 1.25);
  for (Eigen::Index j = 0; j < 5; ++j) {
    for (Eigen::Index i = 0; i < 3; ++i) {
      EXPECT_DOUBLE_EQ(back.f1(i, j), double(float(model.f1(i, j))));
    }
  }
  EXPECT_EQ(back.f2.rows(), 3);
  EXPECT_EQ(back.f2.cols(), 4);
}

TEST(Models, KernelRoundTripReproducesInference) {
  std::mt19937_64 rng(13);
  unicon::KernelModel model;
  const Eigen::Index n = 6;
  model.ref_x = unicon::unit_normalize_columns(oracle::random_matrix(4, n, rng));
  model.ref_y = unicon::unit_normalize_columns(oracle::random_matrix(3, n, rng));
  model.a = oracle::random_matrix(n, 2, rng);
  model.b = oracle::random_matrix(n, 2, rng);
  model.spec_x = {unicon::KernelKind::kAngular, 1.0, 1.0};
  model.spec_y = {unicon::KernelKind::kRbf, 0.7, 1.3};
  model.rho = 2.0;
  model.normalized_inputs = true;

  const std::string path = temp_path("kernel.umdl");
  unicon::save_model(path, model);
  const auto loaded = unicon::load_model(path);
  const auto& back = std::get<unicon::KernelModel>(loaded);
  EXPECT_EQ(back.spec_x.kind, unicon::KernelKind::kAngular);
  EXPECT_EQ(back.spec_y.kind, unicon::KernelKind::kRbf);
  EXPECT_DOUBLE_EQ(back.spec_y.bandwidth, 0.7);
  EXPECT_DOUBLE_EQ(back.spec_y.scale, 1.3);
  EXPECT_TRUE(back.normalized_inputs);

  const Matrix qx = oracle::random_matrix(4, 3, rng);
  const Matrix qy = oracle::random_matrix(3, 3, rng);
  const auto before = unicon::infer_kernel(model, qx, qy);
  const auto after = unicon::infer_kernel(back, qx, qy);
  EXPECT_LT((before.sim - after.sim).cwiseAbs().maxCoeff(), 1e-5);

  // Determinism: loading twice yields bit-identical inference.
  const auto reloaded = unicon::load_model(path);
  const auto& again = std::get<unicon::KernelModel>(reloaded);
  const auto rerun = unicon::infer_kernel(again, qx, qy);
  EXPECT_TRUE(rerun.sim == after.sim);
}

TEST(Models, EnsembleRoundTrip) {
  std::mt19937_64 rng(17);
  unicon::BatchEnsemble ens;
  for (int i = 0; i < 2; ++i) {
    unicon::LinearModel m;
    m.f1 = oracle::random_matrix(2, 4, rng);
    m.f2 = oracle::random_matrix(2, 3, rng);
    m.rho = 1.0;
    ens.models.emplace_back(m);
  }
  ens.weights = {0.25, 0.75};
  ens.val_accuracies = {0.2, 0.6};
  ens.strategy = {unicon::FusionKind::kSoftmaxAccuracy, 0.5};
  ens.degenerate_weights = false;

  const std::string path = temp_path("ensemble.umdl");
  unicon::save_model(path, ens);
  const auto loaded = unicon::load_model(path);
  const auto& back = std::get<unicon::BatchEnsemble>(loaded);
  ASSERT_EQ(back.models.size(), 2u);
  EXPECT_EQ(back.strategy.kind, unicon::FusionKind::kSoftmaxAccuracy);
  EXPECT_DOUBLE_EQ(back.strategy.softmax_temp, 0.5);
  EXPECT_DOUBLE_EQ(back.weights[1], 0.75);
  EXPECT_DOUBLE_EQ(back.val_accuracies[0], 0.2);

  const Matrix qx = oracle::random_matrix(4, 5, rng);
  const Matrix qy = oracle::random_matrix(3, 5, rng);
  const Matrix before = unicon::ensemble_similarity(ens, qx, qy);
  const Matrix after = unicon::ensemble_similarity(back, qx, qy);
  EXPECT_LT((before - after).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Models, RejectsCorruptContainers) {
  std::mt19937_64 rng(19);
  unicon::LinearModel model;
  model.f1 = oracle::random_matrix(2, 2, rng);
  model.f2 = oracle::random_matrix(2, 2, rng);
  const std::string path = temp_path("corrupt.umdl");
  unicon::save_model(path, model);

  auto bytes = read_bytes(path);
  auto patched = bytes;
  patched[0] = 'X';
  write_bytes(path, patched);
  expect_throw_containing([&] { unicon::load_model(path); }, "magic");

  patched = bytes;
  patched[4] = 9;  // version
  write_bytes(path, patched);
  expect_throw_containing([&] { unicon::load_model(path); }, "version");

  patched = bytes;
  patched[6] = 7;  // kind tag
  write_bytes(path, patched);
  expect_throw_containing([&] { unicon::load_model(path); }, "kind");
}

TEST(RunConfig, DefaultsAndPresetString) {
  const auto cfg = unicon::parse_run_config("{}");
  EXPECT_EQ(cfg.loss_preset_name, "clip");
  EXPECT_EQ(cfg.loss.phi, unicon::PhiKind::kTauLog);
  EXPECT_EQ(cfg.rank, 10);
  EXPECT_EQ(cfg.fixed_point.max_iters, 20);
  EXPECT_FALSE(cfg.aggregation.enabled);

  const auto trip = unicon::parse_run_config(R"({"loss": "triplet"})");
  EXPECT_EQ(trip.loss_preset_name, "triplet");
  EXPECT_EQ(trip.loss.psi, unicon::PsiKind::kHingeMargin);
  EXPECT_DOUBLE_EQ(trip.loss.epsilon_diag, 0.0);
}

TEST(RunConfig, LossOverridesAndFullDocument) {
  const std::string text = R"({
    "loss": {"preset": "clip", "tau": 0.5, "nu": 2.0, "bidirectional": false},
    "kernel_x": {"kind": "rbf", "bandwidth": 0.4, "scale": 2.0},
    "kernel_y": {"kind": "arc_cosine_order1"},
    "rank": 6,
    "rho": 1.5,
    "fixed_point": {"max_iters": 7, "rel_tol": 0.01},
    "spectral": {"tikhonov_lambda": 1e-4, "use_randomized": true,
                 "oversampling": 5, "power_iters": 1},
    "aggregation": {"batch_size": 100, "strategy": "softmax",
                    "scheme": "balanced", "softmax_temp": 0.3},
    "seed": 42
  })";
  const auto cfg = unicon::parse_run_config(text);
  EXPECT_DOUBLE_EQ(cfg.loss.tau, 0.5);
  EXPECT_DOUBLE_EQ(cfg.loss.nu, 2.0);
  EXPECT_FALSE(cfg.loss.bidirectional);
  EXPECT_DOUBLE_EQ(cfg.loss.rho, 1.5);
  EXPECT_EQ(cfg.kernel_x.kind, unicon::KernelKind::kRbf);
  EXPECT_DOUBLE_EQ(cfg.kernel_x.bandwidth, 0.4);
  EXPECT_EQ(cfg.kernel_y.kind, unicon::KernelKind::kAngular);
  EXPECT_EQ(cfg.rank, 6);
  EXPECT_EQ(cfg.fixed_point.max_iters, 7);
  EXPECT_DOUBLE_EQ(cfg.fixed_point.rel_tol, 0.01);
  ASSERT_TRUE(cfg.fixed_point.spectral.tikhonov_lambda.has_value());
  EXPECT_DOUBLE_EQ(*cfg.fixed_point.spectral.tikhonov_lambda, 1e-4);
  EXPECT_TRUE(cfg.fixed_point.spectral.use_randomized);
  EXPECT_EQ(cfg.fixed_point.spectral.rsvd_oversampling, 5);
  EXPECT_EQ(cfg.fixed_point.spectral.rsvd_power_iters, 1);
  EXPECT_TRUE(cfg.aggregation.enabled);
  EXPECT_EQ(cfg.aggregation.batch_size, 100);
  EXPECT_EQ(cfg.aggregation.strategy.kind, unicon::FusionKind::kSoftmaxAccuracy);
  EXPECT_DOUBLE_EQ(cfg.aggregation.strategy.softmax_temp, 0.3);
  EXPECT_EQ(cfg.aggregation.scheme, unicon::PartitionScheme::kBalanced);
  EXPECT_EQ(cfg.seed, 42u);

  // The resolved echo parses back to the same configuration.
  const auto echo = unicon::parse_run_config(cfg.resolved_json);
  EXPECT_EQ(echo.rank, 6);
  EXPECT_DOUBLE_EQ(echo.loss.tau, 0.5);
  EXPECT_EQ(echo.aggregation.scheme, unicon::PartitionScheme::kBalanced);
}

TEST(RunConfig, RejectsUnknownKeysNamingOffender) {
  expect_throw_containing([&] { unicon::parse_run_config(R"({"rankk": 3})"); },
                          "rankk");
  expect_throw_containing(
      [&] {
        unicon::parse_run_config(R"({"fixed_point": {"tolerance": 0.1}})");
      },
      "fixed_point.tolerance");
  expect_throw_containing(
      [&] { unicon::parse_run_config(R"({"loss": {"phi": "identity"}})"); },
      "loss.phi");
  expect_throw_containing(
      [&] { unicon::parse_run_config(R"({"kernel_x": {"kind": "poly"}})"); },
      "poly");
  EXPECT_THROW(unicon::parse_run_config("[1, 2]"), std::invalid_argument);
  EXPECT_THROW(unicon::parse_run_config("not json"), std::invalid_argument);
  EXPECT_THROW(unicon::parse_run_config(R"({"loss": "mse"})"),
               std::invalid_argument);
}

TEST(SynthConfigJson, ParsesAndValidates) {
  const std::string text = R"({
    "n": 100, "d1": 8, "d2": 6, "r_latent": 3, "k_clusters": 2,
    "snr": 0.1, "nonlinearity": "tanh", "seed": 9,
    "split": [0.8, 0.1, 0.1], "center_scale": 1.0, "within_cluster_std": 0.5
  })";
  const auto cfg = unicon::parse_synth_config(text);
  EXPECT_EQ(cfg.n, 100);
  EXPECT_EQ(cfg.d1, 8);
  EXPECT_EQ(cfg.r_latent, 3);
  EXPECT_EQ(cfg.nonlinearity, unicon::Nonlinearity::kTanh);
  EXPECT_DOUBLE_EQ(cfg.split[0], 0.8);
  EXPECT_DOUBLE_EQ(cfg.center_scale, 1.0);
  EXPECT_DOUBLE_EQ(cfg.within_cluster_std, 0.5);

  expect_throw_containing(
      [&] { unicon::parse_synth_config(R"({"clusters": 3})"); }, "clusters");
  EXPECT_THROW(unicon::parse_synth_config(R"({"nonlinearity": "relu"})"),
               std::invalid_argument);
  EXPECT_THROW(unicon::parse_synth_config(R"({"split": [0.5, 0.5]})"),
               std::invalid_argument);
}

TEST(Reports, JsonAndCsvSerialization) {
  unicon::EvalReport report;
  report.accuracy = {0.9, 0.8, 0.85};
  report.recall.x_to_y = {{1, 0.9}, {5, 0.95}};
  report.recall.y_to_x = {{1, 0.8}, {5, 0.9}};
  report.wall_time_seconds = 0.125;
  report.iterations = 4;
  report.converged = true;

  const std::string json_text =
      unicon::report_to_json(report, R"({"rank": 3})");
  const auto j = nlohmann::json::parse(json_text);
  EXPECT_DOUBLE_EQ(j.at("matching_accuracy_i2t").get<double>(), 0.9);
  EXPECT_DOUBLE_EQ(j.at("matching_accuracy_t2i").get<double>(), 0.8);
  EXPECT_DOUBLE_EQ(j.at("matching_accuracy_avg").get<double>(), 0.85);
  EXPECT_DOUBLE_EQ(j.at("r_at_1_i2t").get<double>(), 0.9);
  EXPECT_DOUBLE_EQ(j.at("r_at_5_t2i").get<double>(), 0.9);
  EXPECT_EQ(j.at("iterations").get<int>(), 4);
  EXPECT_TRUE(j.at("converged").get<bool>());
  EXPECT_EQ(j.at("config").at("rank").get<int>(), 3);

  const std::string csv = unicon::report_to_csv(report);
  const auto newline = csv.find('\n');
  ASSERT_NE(newline, std::string::npos);
  const std::string header = csv.substr(0, newline);
  EXPECT_NE(header.find("matching_accuracy_avg"), std::string::npos);
  EXPECT_NE(header.find("r_at_5_t2i"), std::string::npos);
  const auto count_commas = [](const std::string& s) {
    return std::count(s.begin(), s.end(), ',');
  };
  std::string row = csv.substr(newline + 1);
  if (!row.empty() && row.back() == '\n') row.pop_back();
  EXPECT_EQ(count_commas(header), count_commas(row));
  EXPECT_NE(row.find("0.85"), std::string::npos);
}

}  // namespace
