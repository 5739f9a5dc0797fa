// protoattn: train, evaluate, render and inspect proto-object attention agents.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error, 130 interrupted.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "protoattn/agent.hpp"
#include "protoattn/errors.hpp"
#include "protoattn/harness.hpp"
#include "protoattn/render.hpp"

namespace fs = std::filesystem;
using namespace protoattn;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInterrupted = 130;

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

struct Options {
  std::string config_path;
  std::string checkpoint_path;
  std::string out_dir;
  std::string preset = "default";
  std::vector<std::string> overrides;
  int seeds = -1;
  int steps = 10;
  int workers = 0;
  std::uint64_t seed = test_seed(0);
};

RunConfig build_config(const Options& o, bool require_file) {
  RunConfig c;
  if (!o.config_path.empty())
    c = load_run_config(o.config_path);
  else if (require_file)
    throw ConfigError("--config PATH is required");
  for (const auto& kv : o.overrides) apply_override(c, kv);
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (o.workers > 0) c.workers = o.workers;
  return c;
}

int cmd_train(const Options& o) {
  RunConfig config;
  TrainOptions opts;
  if (!o.checkpoint_path.empty()) {
    config = o.config_path.empty() ? load_checkpoint(o.checkpoint_path).config : load_run_config(o.config_path);
    for (const auto& kv : o.overrides) apply_override(config, kv);
    if (!o.out_dir.empty()) config.out_dir = o.out_dir;
    if (o.workers > 0) config.workers = o.workers;
    opts.resume_from = o.checkpoint_path;
  } else {
    config = build_config(o, true);
  }
  config.validate();

  std::signal(SIGINT, on_sigint);
  opts.stop = &g_stop;
  opts.on_generation = [](const GenerationLog& row) {
    std::printf("gen %5lld  best %10.3f  mean %10.3f  sigma %.4g  tokens %.2f\n", static_cast<long long>(row.gen),
                row.best, row.mean, row.sigma, row.tokens_mean);
    std::fflush(stdout);
  };
  opts.on_test = [](std::int64_t gen, const EvalReport& r) {
    std::printf("test @%lld: %.3f +/- %.3f (n=%zu), tokens/frame %.2f +/- %.2f\n", static_cast<long long>(gen),
                r.score.mean, r.score.half_width, r.score.n, r.tokens.mean, r.tokens.half_width);
  };
  const TrainResult result = train(config, opts);
  std::printf("checkpoint: %s\nlog: %s\n", result.checkpoint_path.c_str(), result.log_path.c_str());
  if (result.interrupted) {
    std::fprintf(stderr, "interrupted at generation %lld; checkpoint flushed\n",
                 static_cast<long long>(result.state.cma.generation));
    return kExitInterrupted;
  }
  return 0;
}

int cmd_eval(const Options& o) {
  if (o.checkpoint_path.empty()) throw ConfigError("--checkpoint PATH is required");
  TrainerState st = load_checkpoint(o.checkpoint_path);
  RunConfig config = st.config;
  for (const auto& kv : o.overrides) apply_override(config, kv);
  if (o.workers > 0) config.workers = o.workers;
  config.validate();
  if (st.best_genome.empty()) throw MalformedInput("checkpoint has no evaluated genome yet");
  const int n = o.seeds > 0 ? o.seeds : config.test_seeds;
  const EvalReport report = test_best(st.best_genome, config, n, WorkerPool(config.workers));

  const fs::path dir = o.out_dir.empty() ? fs::path(o.checkpoint_path).parent_path() : fs::path(o.out_dir);
  if (!dir.empty()) fs::create_directories(dir);
  const std::string csv = (dir / "eval.csv").string();
  write_eval_csv(report, csv);
  std::printf("env %s, %zu held-out seeds\n", std::string(env_name(config.env)).c_str(), report.score.n);
  std::printf("score        %.4f +/- %.4f (95%% CI)\n", report.score.mean, report.score.half_width);
  std::printf("tokens/frame %.4f +/- %.4f (95%% CI, %zu frames)\n", report.tokens.mean, report.tokens.half_width,
              report.tokens.n);
  std::printf("per-seed scores: %s\n", csv.c_str());
  return 0;
}

int cmd_render(const Options& o) {
  RunConfig config;
  std::vector<double> genome;
  if (!o.checkpoint_path.empty()) {
    TrainerState st = load_checkpoint(o.checkpoint_path);
    config = st.config;
    genome = st.best_genome.empty() ? std::vector<double>(st.cma.mean.data(), st.cma.mean.data() + st.cma.mean.size())
                                    : st.best_genome;
    for (const auto& kv : o.overrides) apply_override(config, kv);
  } else {
    config = build_config(o, false);
    genome.assign(count_params(config.model), 0.0);
  }
  config.validate();
  const fs::path dir = o.out_dir.empty() ? fs::path("render") : fs::path(o.out_dir);
  fs::create_directories(dir);

  Agent agent(config.model, decode(genome, config.model));
  auto env = make_env(config.env);
  Rgb8Image raster = env->reset(o.seed);
  int written = 0;
  for (int t = 0; t < o.steps && !env->done(); ++t) {
    PerceptionTrace trace;
    const Action action = agent.act(to_frame(raster), &trace);
    char stem[32];
    std::snprintf(stem, sizeof stem, "step_%04d_", t);
    write_png((dir / (std::string(stem) + "raw.png")).string(), raster);
    write_png((dir / (std::string(stem) + "conv.png")).string(), to_rgb8(trace.conv));
    write_png((dir / (std::string(stem) + "quantized.png")).string(), palette_image(trace.quantized));
    write_png((dir / (std::string(stem) + "overlay.png")).string(), render_overlay(raster, trace));
    written += 4;
    raster = env->step(action).frame;
  }
  std::printf("wrote %d PNG files to %s\n", written, dir.string().c_str());
  return 0;
}

int cmd_inspect_params(const Options& o) {
  RunConfig config;
  if (o.preset == "patch")
    config.model = patch_reference_config();
  else if (o.preset == "doom-k10") {
    config.model.k = 10;
    config.model.d_q = 4;
    config.model.conv_kernel = 3;
  } else if (o.preset != "default")
    throw ConfigError("unknown preset '" + o.preset + "' (default, patch, doom-k10)");
  if (!o.config_path.empty()) config = load_run_config(o.config_path);
  for (const auto& kv : o.overrides) apply_override(config, kv);
  const ParamCounts n = count_params_by_part(config.model);
  const auto& m = config.model;
  std::printf("d_in %d  d_q %d  k %d  lstm_in %d  n_h %d  n_out %d\n", m.d_in, m.d_q, m.k, m.lstm_inputs(), m.n_h,
              m.n_out);
  std::printf("%-12s %8s\n", "component", "params");
  std::printf("%-12s %8zu\n", "convolution", n.conv);
  std::printf("%-12s %8zu\n", "attention", n.attention);
  std::printf("%-12s %8zu\n", "lstm", n.lstm);
  std::printf("%-12s %8zu\n", "output", n.head);
  std::printf("%-12s %8zu\n", "total", n.total());
  return 0;
}

int cmd_bench_segmentation(const Options& o) {
  RunConfig config = build_config(o, false);
  config.validate();
  auto env = make_env(config.env);
  const ConvParams zero{};
  Rgb8Image raster = env->reset(o.seed);
  std::vector<Rgb8Image> frames;
  CounterRng rng(o.seed);
  for (int t = 0; t < o.steps && !env->done(); ++t) {
    frames.push_back(raster);
    Action a = env->discrete_actions() ? Action{static_cast<DodgeAction>(rng.below(3))}
                                       : Action{ContinuousAction{rng.uniform(-1, 1), 0.6, 0.0}};
    raster = env->step(a).frame;
  }
  std::size_t tokens = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& f : frames) {
    const auto q = preprocess(to_frame(f), zero, config.model.bits);
    tokens += segment(q, config.model.connectivity).size();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double n = static_cast<double>(frames.size());
  std::printf("%zu frames, %.1f us/frame (preprocess + segmentation), %.2f tokens/frame\n", frames.size(),
              1e6 * secs / n, static_cast<double>(tokens) / n);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proto-object hard-attention agents trained with CMA-ES"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Run config file (key = value)");
    sub->add_option("--override", o.overrides, "Config overrides, key=value")->expected(1, -1);
    sub->add_option("--workers", o.workers, "Worker threads (default: PROTOATTN_WORKERS or all cores)");
  };

  auto* train_cmd = app.add_subcommand("train", "Run CMA-ES training");
  add_common(train_cmd);
  train_cmd->add_option("--checkpoint", o.checkpoint_path, "Resume from this checkpoint");
  train_cmd->add_option("--out", o.out_dir, "Output directory");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint's best genome on held-out seeds");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", o.checkpoint_path, "Checkpoint file")->required();
  eval_cmd->add_option("--seeds", o.seeds, "Number of held-out seeds (default: test_seeds)");
  eval_cmd->add_option("--out", o.out_dir, "Directory for eval.csv (default: next to the checkpoint)");

  auto* render_cmd = app.add_subcommand("render", "Dump per-step PNGs of every pipeline stage");
  add_common(render_cmd);
  render_cmd->add_option("--checkpoint", o.checkpoint_path, "Checkpoint file (default: zero genome)");
  render_cmd->add_option("--seed", o.seed, "Environment seed");
  render_cmd->add_option("--steps", o.steps, "Number of steps to render");
  render_cmd->add_option("--out", o.out_dir, "Output directory");

  auto* inspect_cmd = app.add_subcommand("inspect-params", "Print the learnable parameter budget");
  add_common(inspect_cmd);
  inspect_cmd->add_option("--preset", o.preset, "default, patch or doom-k10");

  auto* bench_cmd = app.add_subcommand("bench-segmentation", "Time preprocessing and segmentation");
  add_common(bench_cmd);
  bench_cmd->add_option("--steps", o.steps, "Frames to time");
  bench_cmd->add_option("--seed", o.seed, "Environment seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(o);
    if (*eval_cmd) return cmd_eval(o);
    if (*render_cmd) return cmd_render(o);
    if (*inspect_cmd) return cmd_inspect_params(o);
    if (*bench_cmd) return cmd_bench_segmentation(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MalformedInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
