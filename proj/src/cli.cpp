#include "unicon/cli.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "unicon/aggregate.hpp"
#include "unicon/dataio.hpp"
#include "unicon/eval.hpp"
#include "unicon/solver.hpp"
#include "unicon/synth.hpp"

namespace unicon {
namespace {

namespace fs = std::filesystem;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void ensure_output_dir(const std::string& dir, bool force) {
  if (fs::exists(dir) && !fs::is_empty(dir) && !force) {
    throw std::runtime_error("output directory " + dir +
                             " is not empty (pass --force to overwrite)");
  }
  fs::create_directories(dir);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

// Positive-pair mask for a pair of embedding files. Without --mask the
// pairing must be the identity, which needs equal sample counts.
Mask mask_for(const std::string& mask_path, const std::string& x_path,
              Eigen::Index n_x, const std::string& y_path, Eigen::Index n_y) {
  if (mask_path.empty()) {
    if (n_x != n_y) {
      throw std::runtime_error(
          "pair counts differ: " + x_path + " has " + std::to_string(n_x) +
          " samples, " + y_path + " has " + std::to_string(n_y) +
          "; provide --mask");
    }
    return identity_mask(n_x);
  }
  if (!fs::exists(mask_path)) {
    throw std::runtime_error("pair mask file not found: " + mask_path);
  }
  return read_pair_mask(mask_path, n_x, n_y);
}

// Default recall cutoffs {1, 5, 10}, clipped to the candidate count so tiny
// evaluation sets still report something; explicit --ks are passed through
// unmodified and validated by recall_at_k.
std::vector<int> resolve_ks(const std::vector<int>& requested, Eigen::Index n_x,
                            Eigen::Index n_y) {
  if (!requested.empty()) return requested;
  const int cap = int(std::min(n_x, n_y));
  std::set<int> ks;
  for (const int k : {1, 5, 10}) ks.insert(std::min(k, cap));
  return {ks.begin(), ks.end()};
}

Matrix model_similarity(const StoredModel& stored, const Matrix& x,
                        const Matrix& y) {
  return std::visit(
      [&](const auto& model) -> Matrix {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return linear_similarity(model, x, y);
        } else if constexpr (std::is_same_v<T, KernelModel>) {
          return infer_kernel(model, x, y).sim;
        } else {
          return ensemble_similarity(model, x, y);
        }
      },
      stored);
}

std::string csv_sibling(const std::string& json_path) {
  const std::string suffix = ".json";
  if (json_path.size() > suffix.size() &&
      json_path.compare(json_path.size() - suffix.size(), suffix.size(),
                        suffix) == 0) {
    return json_path.substr(0, json_path.size() - suffix.size()) + ".csv";
  }
  return json_path + ".csv";
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::string out_dir;
  bool force = false;
};

struct FitArgs {
  std::string x, y, mask, val_x, val_y, labels, config, out_model;
  std::string mode = "linear";
};

struct EvalArgs {
  std::string model, x, y, mask, out;
  std::vector<int> ks;
};

struct InferArgs {
  std::string model, x, y, out_dir;
  bool force = false;
};

struct GradArgs {
  std::string loss = "clip";
  int n = 5;
  std::uint64_t seed = 0;
};

void write_split(const std::string& dir, const std::string& stem,
                 const SynthDataset& ds) {
  write_embeddings(dir + "/" + stem + "_x.uemb", ds.batch.x);
  write_embeddings(dir + "/" + stem + "_y.uemb", ds.batch.y);
  write_pair_mask(dir + "/" + stem + "_mask.csv", ds.batch.pos_mask);
  write_labels(dir + "/" + stem + "_labels.csv", ds.labels);
}

int cmd_synth(const SynthArgs& a) {
  const SynthConfig cfg = read_synth_config(a.config);
  ensure_output_dir(a.out_dir, a.force);
  const SynthDataset ds = generate(cfg);
  const SynthSplits splits = split_dataset(ds, cfg.seed);
  write_split(a.out_dir, "train", splits.train);
  write_split(a.out_dir, "val", splits.val);
  write_split(a.out_dir, "test", splits.test);
  std::cout << "wrote " << splits.train.batch.size() << "/"
            << splits.val.batch.size() << "/" << splits.test.batch.size()
            << " train/val/test samples to " << a.out_dir << "\n";
  return 0;
}

int cmd_fit(const FitArgs& a) {
  const RunConfig cfg = read_run_config(a.config);
  const Matrix x = read_embeddings(a.x);
  const Matrix y = read_embeddings(a.y);
  PairedBatch batch{x, y, mask_for(a.mask, a.x, x.cols(), a.y, y.cols())};

  EvalReport report;
  Matrix sim;
  StoredModel stored;

  if (cfg.aggregation.enabled) {
    if (a.val_x.empty() || a.val_y.empty()) {
      throw std::runtime_error(
          "aggregation weighs sub-models by validation accuracy: pass "
          "--val-x and --val-y");
    }
    const Matrix vx = read_embeddings(a.val_x);
    const Matrix vy = read_embeddings(a.val_y);
    if (vx.cols() != vy.cols()) {
      throw std::runtime_error("validation pair counts differ: " + a.val_x +
                               " has " + std::to_string(vx.cols()) + ", " +
                               a.val_y + " has " + std::to_string(vy.cols()));
    }
    const PairedBatch val{vx, vy, identity_mask(vx.cols())};
    std::vector<int> labels;
    if (cfg.aggregation.scheme == PartitionScheme::kBalanced) {
      if (a.labels.empty()) {
        throw std::runtime_error(
            "balanced partitioning needs class labels: pass --labels");
      }
      labels = read_labels(a.labels);
    }
    std::vector<std::string> warnings;
    const auto subs = partition(batch, cfg.aggregation.batch_size,
                                cfg.aggregation.scheme, cfg.seed, labels,
                                &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    const auto t0 = std::chrono::steady_clock::now();
    BatchEnsemble ens =
        a.mode == "linear"
            ? fit_ensemble_linear(subs, val, cfg.loss, cfg.rank,
                                  cfg.fixed_point, cfg.aggregation.strategy,
                                  cfg.seed)
            : fit_ensemble(subs, val, cfg.loss, cfg.kernel_x, cfg.kernel_y,
                           cfg.rank, cfg.fixed_point,
                           cfg.aggregation.strategy, cfg.seed);
    report.wall_time_seconds = seconds_since(t0);
    report.iterations = 0;  // per-member counts are not aggregated
    report.converged = true;
    sim = ensemble_similarity(ens, x, y);
    stored = std::move(ens);
  } else if (a.mode == "linear") {
    LinearFitResult result =
        fit_linear(batch, cfg.loss, cfg.rank, cfg.fixed_point, cfg.seed);
    sim = linear_similarity(result.model, x, y);
    report.wall_time_seconds = result.diagnostics.wall_time_seconds;
    report.iterations = result.diagnostics.iterations;
    report.converged = result.diagnostics.converged;
    stored = std::move(result.model);
  } else {
    KernelFitResult result = fit_kernel(batch, cfg.loss, cfg.kernel_x,
                                        cfg.kernel_y, cfg.rank,
                                        cfg.fixed_point, cfg.seed);
    sim = infer_kernel(result.model, x, y).sim;
    report.wall_time_seconds = result.diagnostics.wall_time_seconds;
    report.iterations = result.diagnostics.iterations;
    report.converged = result.diagnostics.converged;
    stored = std::move(result.model);
  }

  report.accuracy = matching_accuracy(sim, batch.pos_mask);
  report.recall =
      recall_at_k(sim, batch.pos_mask, resolve_ks({}, x.cols(), y.cols()));

  save_model(a.out_model, stored);
  const std::string report_path = a.out_model + ".report.json";
  write_text_file(report_path, report_to_json(report, cfg.resolved_json));
  std::cout << "fit " << a.mode << " model: train matching accuracy "
            << report.accuracy.avg << ", " << report.iterations
            << " iterations ("
            << (report.converged ? "converged" : "stopped at max_iters")
            << ")\nmodel -> " << a.out_model << "\nreport -> " << report_path
            << "\n";
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  const StoredModel stored = load_model(a.model);
  const Matrix x = read_embeddings(a.x);
  const Matrix y = read_embeddings(a.y);
  const Mask mask = mask_for(a.mask, a.x, x.cols(), a.y, y.cols());

  const auto t0 = std::chrono::steady_clock::now();
  const Matrix sim = model_similarity(stored, x, y);
  EvalReport report;
  report.accuracy = matching_accuracy(sim, mask);
  report.recall = recall_at_k(sim, mask, resolve_ks(a.ks, x.cols(), y.cols()));
  report.wall_time_seconds = seconds_since(t0);
  report.iterations = 0;
  report.converged = true;

  write_text_file(a.out, report_to_json(report));
  write_text_file(csv_sibling(a.out), report_to_csv(report));
  std::cout << "matching accuracy avg " << report.accuracy.avg
            << "\nreport -> " << a.out << " and " << csv_sibling(a.out)
            << "\n";
  return 0;
}

int cmd_infer(const InferArgs& a) {
  const StoredModel stored = load_model(a.model);
  const Matrix x = read_embeddings(a.x);
  const Matrix y = read_embeddings(a.y);
  ensure_output_dir(a.out_dir, a.force);

  Matrix sim;
  bool wrote_embeddings = true;
  if (std::holds_alternative<LinearModel>(stored)) {
    const auto& model = std::get<LinearModel>(stored);
    if (x.rows() != model.f1.cols()) {
      throw std::runtime_error(a.x + " has " + std::to_string(x.rows()) +
                               " dims but the model expects " +
                               std::to_string(model.f1.cols()));
    }
    if (y.rows() != model.f2.cols()) {
      throw std::runtime_error(a.y + " has " + std::to_string(y.rows()) +
                               " dims but the model expects " +
                               std::to_string(model.f2.cols()));
    }
    write_embeddings(a.out_dir + "/ex.uemb", model.f1 * x);
    write_embeddings(a.out_dir + "/ey.uemb", model.f2 * y);
    sim = linear_similarity(model, x, y);
  } else if (std::holds_alternative<KernelModel>(stored)) {
    const InferResult result =
        infer_kernel(std::get<KernelModel>(stored), x, y);
    if (result.zero_norm_x + result.zero_norm_y > 0) {
      std::cerr << "warning: " << result.zero_norm_x + result.zero_norm_y
                << " zero-norm embedded columns excluded from similarity\n";
    }
    write_embeddings(a.out_dir + "/ex.uemb", result.ex);
    write_embeddings(a.out_dir + "/ey.uemb", result.ey);
    sim = result.sim;
  } else {
    // Fused ensembles have no single embedding space; only the similarity
    // matrix is defined.
    sim = ensemble_similarity(std::get<BatchEnsemble>(stored), x, y);
    wrote_embeddings = false;
  }

  std::ostringstream out;
  out << std::setprecision(10);
  for (Eigen::Index i = 0; i < sim.rows(); ++i) {
    for (Eigen::Index j = 0; j < sim.cols(); ++j) {
      if (j > 0) out << ',';
      out << sim(i, j);
    }
    out << '\n';
  }
  write_text_file(a.out_dir + "/sim.csv", out.str());
  std::cout << "wrote " << (wrote_embeddings ? "ex.uemb, ey.uemb, " : "")
            << "sim.csv to " << a.out_dir << "\n";
  return 0;
}

int cmd_gradcheck(const GradArgs& a) {
  const LossFamily family = loss_preset(a.loss);
  const GradCheckReport report = gradcheck(family, a.n, a.seed);
  std::cout << "gradcheck loss=" << a.loss << " n=" << a.n
            << " seed=" << a.seed << "\n"
            << "  max_rel_dev_weights = " << report.max_rel_dev_weights
            << "\n"
            << "  max_rel_dev_linear  = " << report.max_rel_dev_linear << "\n"
            << "  resamples = " << report.resamples
            << " (instances are re-sampled until every hinge argument clears "
               "1e-3 in magnitude)\n"
            << (report.pass ? "PASS" : "FAIL") << "\n";
  return report.pass ? 0 : 3;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"closed-form spectral solver for contrastive alignment",
               "unicon"};
  app.require_subcommand(1);

  SynthArgs sa;
  FitArgs fa;
  EvalArgs ea;
  InferArgs ia;
  GradArgs ga;

  auto* synth = app.add_subcommand("synth", "generate a paired synthetic dataset");
  synth->add_option("--config", sa.config, "synth config JSON path")->required();
  synth->add_option("--out-dir", sa.out_dir, "output directory")->required();
  synth->add_flag("--force", sa.force, "overwrite a non-empty output directory");

  auto* fit = app.add_subcommand("fit", "fit an alignment model");
  fit->add_option("--x", fa.x, "x-view embeddings (.uemb)")->required();
  fit->add_option("--y", fa.y, "y-view embeddings (.uemb)")->required();
  fit->add_option("--mask", fa.mask, "positive-pair CSV (default: identity)");
  fit->add_option("--val-x", fa.val_x, "validation x embeddings");
  fit->add_option("--val-y", fa.val_y, "validation y embeddings");
  fit->add_option("--labels", fa.labels, "class labels CSV (balanced scheme)");
  fit->add_option("--config", fa.config, "run config JSON path")->required();
  fit->add_option("--mode", fa.mode, "linear|kernel")
      ->check(CLI::IsMember({"linear", "kernel"}));
  fit->add_option("--out-model", fa.out_model, "model output path")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a saved model");
  eval->add_option("--model", ea.model, "model path (.umdl)")->required();
  eval->add_option("--x", ea.x)->required();
  eval->add_option("--y", ea.y)->required();
  eval->add_option("--mask", ea.mask, "positive-pair CSV (default: identity)");
  eval->add_option("--ks", ea.ks, "recall cutoffs (default 1,5,10 clipped)")
      ->delimiter(',');
  eval->add_option("--out", ea.out, "report JSON path (CSV written beside)")
      ->required();

  auto* infer = app.add_subcommand("infer", "embed new data with a model");
  infer->add_option("--model", ia.model)->required();
  infer->add_option("--x", ia.x)->required();
  infer->add_option("--y", ia.y)->required();
  infer->add_option("--out-dir", ia.out_dir)->required();
  infer->add_flag("--force", ia.force, "overwrite a non-empty output directory");

  auto* grad = app.add_subcommand("gradcheck",
                                  "verify closed-form weights against "
                                  "finite differences");
  grad->add_option("--loss", ga.loss, "loss preset")
      ->check(CLI::IsMember({"clip", "infonce", "triplet", "identity"}));
  grad->add_option("--n", ga.n, "batch size (at most 8)")
      ->check(CLI::Range(1, 8));
  grad->add_option("--seed", ga.seed, "base RNG seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(synth)) return cmd_synth(sa);
    if (app.got_subcommand(fit)) return cmd_fit(fa);
    if (app.got_subcommand(eval)) return cmd_eval(ea);
    if (app.got_subcommand(infer)) return cmd_infer(ia);
    return cmd_gradcheck(ga);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace unicon
