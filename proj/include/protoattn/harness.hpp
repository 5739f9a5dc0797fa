#pragma once

// Training and evaluation orchestration: rollouts, common-random-number
// seeding, the CMA-ES generation loop, checkpoints and held-out testing.

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "protoattn/cmaes.hpp"
#include "protoattn/config.hpp"
#include "protoattn/envs.hpp"
#include "protoattn/genome.hpp"
#include "protoattn/stats.hpp"

namespace protoattn {

struct RolloutResult {
  double total_reward = 0.0;
  int steps = 0;
  std::vector<int> tokens_per_frame;
};

/// Runs one episode: reset(seed), zero LSTM state, then the full pipeline on
/// every frame until the episode ends or max_steps (0: no extra cap) is hit.
RolloutResult episode_rollout(const ModelParams& params, const ModelConfig& config, Environment& env,
                              std::uint64_t seed, int max_steps = 0);
RolloutResult episode_rollout(const ModelParams& params, const ModelConfig& config, EnvId env, std::uint64_t seed,
                              int max_steps = 0);

/// Episode return of a policy drawing uniform random actions, seeded by seed.
double random_policy_return(EnvId env, std::uint64_t seed, int max_steps = 0);

/// generation * 10^4 + repetition.
std::uint64_t train_seed(std::int64_t generation, int repetition);
/// 10^9 + index; disjoint from every training seed for generation <= 10^5.
std::uint64_t test_seed(int index);

/// Fixed-size pool running index-addressed tasks. Results are written by
/// index, so completion order never matters.
class WorkerPool {
 public:
  /// 0 picks PROTOATTN_WORKERS, then the hardware concurrency.
  explicit WorkerPool(int workers = 0);
  int size() const noexcept { return workers_; }
  /// Calls fn(i) for i in [0, n). Rethrows the first task exception.
  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) const;
  /// Optional task order permutation, for scheduling-independence tests.
  void set_schedule_shuffle(std::uint64_t seed) { shuffle_seed_ = seed; }

 private:
  int workers_;
  std::uint64_t shuffle_seed_ = 0;
};

int resolve_worker_count(int requested);

struct CandidateEval {
  double fitness = 0.0;  // mean episode return over the generation's seeds
  std::int64_t token_sum = 0;
  std::int64_t frame_count = 0;
};

/// Mean return over seeds train_seed(generation, 0 .. R-1).
CandidateEval evaluate_candidate(std::span<const double> genome, const RunConfig& config, std::int64_t generation,
                                 const WorkerPool& pool);

/// Evaluates every candidate of a generation on the same seed set, one
/// rollout per task.
std::vector<CandidateEval> evaluate_population(std::span<const std::vector<double>> genomes, const RunConfig& config,
                                               std::int64_t generation, const WorkerPool& pool);

struct EvalReport {
  std::vector<std::uint64_t> seeds;
  std::vector<double> scores;
  std::vector<int> episode_lengths;
  MeanCi score;
  MeanCi tokens;  // over every recorded frame
};

/// Runs the genome on n_seeds held-out seeds test_seed(0 .. n-1).
EvalReport test_best(std::span<const double> genome, const RunConfig& config, int n_seeds, const WorkerPool& pool);
EvalReport summarize(std::vector<std::uint64_t> seeds, std::span<const RolloutResult> rollouts);
/// Per-seed rows followed by a summary row.
void write_eval_csv(const EvalReport& report, const std::string& path);

struct GenerationLog {
  std::int64_t gen = 0;
  double best = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double sigma = 0.0;
  double tokens_mean = 0.0;
  double wall_s = 0.0;
};

inline constexpr std::string_view kLogHeader = "gen,best,mean,median,sigma,tokens_mean,wall_s";
std::string format_log_row(const GenerationLog& row);

/// Everything needed to continue a run exactly where it stopped.
struct TrainerState {
  RunConfig config;
  CmaState cma;
  CounterRng rng;
  std::vector<double> best_genome;
  double best_fitness = -std::numeric_limits<double>::infinity();
  std::int64_t best_generation = -1;
  std::int64_t log_rows = 0;
};

/// Writes atomically (temp file + rename).
void save_checkpoint(const TrainerState& state, const std::string& path);
/// Throws MalformedInput on corruption or a layout version mismatch.
TrainerState load_checkpoint(const std::string& path);

class Trainer {
 public:
  /// Fresh run: mean 0, sigma0 from the config, CMA-ES sampling seeded by the
  /// master seed.
  explicit Trainer(RunConfig config);
  explicit Trainer(TrainerState state);

  /// One ask / evaluate / tell cycle.
  GenerationLog step(const WorkerPool& pool);

  const TrainerState& state() const noexcept { return state_; }
  TrainerState& mutable_state() noexcept { return state_; }
  /// Candidates of the most recent generation and their evaluations.
  const std::vector<std::vector<double>>& last_candidates() const noexcept { return last_candidates_; }
  const std::vector<CandidateEval>& last_evals() const noexcept { return last_evals_; }

 private:
  TrainerState state_;
  std::vector<std::vector<double>> last_candidates_;
  std::vector<CandidateEval> last_evals_;
};

struct TrainOptions {
  std::optional<std::string> resume_from;
  const std::atomic<bool>* stop = nullptr;
  std::function<void(const GenerationLog&)> on_generation;
  std::function<void(std::int64_t, const EvalReport&)> on_test;
};

struct TrainResult {
  TrainerState state;
  bool interrupted = false;
  std::string checkpoint_path;
  std::string log_path;
};

/// Trains until config.generations generations exist in the log. Writes
/// log.csv, tests.csv, eval_gen<G>.csv and checkpoint.bin under out_dir.
/// Every test_every generations the best genome so far is scored on
/// test_seeds held-out episodes and the checkpoint is rewritten.
TrainResult train(const RunConfig& config, const TrainOptions& options = {});

}  // namespace protoattn
