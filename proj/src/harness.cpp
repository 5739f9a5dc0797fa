#include "protoattn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "protoattn/agent.hpp"
#include "protoattn/errors.hpp"

namespace protoattn {

RolloutResult episode_rollout(const ModelParams& params, const ModelConfig& config, Environment& env,
                              std::uint64_t seed, int max_steps) {
  Agent agent(config, params);
  RolloutResult out;
  Rgb8Image raster = env.reset(seed);
  const int limit = max_steps > 0 ? max_steps : env.step_limit();
  out.tokens_per_frame.reserve(static_cast<std::size_t>(std::min(limit, env.step_limit())));
  while (!env.done() && out.steps < limit) {
    const Action action = agent.act(to_frame(raster));
    out.tokens_per_frame.push_back(agent.last_token_count());
    EnvStep step = env.step(action);
    out.total_reward += step.reward;
    ++out.steps;
    raster = std::move(step.frame);
  }
  return out;
}

RolloutResult episode_rollout(const ModelParams& params, const ModelConfig& config, EnvId env_id,
                              std::uint64_t seed, int max_steps) {
  auto env = make_env(env_id);
  return episode_rollout(params, config, *env, seed, max_steps);
}

double random_policy_return(EnvId env_id, std::uint64_t seed, int max_steps) {
  auto env = make_env(env_id);
  env->reset(seed);
  CounterRng rng(seed ^ 0xA11CE5EEDULL);
  const int limit = max_steps > 0 ? max_steps : env->step_limit();
  double total = 0.0;
  for (int t = 0; t < limit && !env->done(); ++t) {
    Action a;
    if (env->discrete_actions())
      a = static_cast<DodgeAction>(rng.below(3));
    else
      a = ContinuousAction{rng.uniform(-1.0, 1.0), rng.uniform(), rng.uniform()};
    total += env->step(a).reward;
  }
  return total;
}

std::uint64_t train_seed(std::int64_t generation, int repetition) {
  return static_cast<std::uint64_t>(generation) * 10000ULL + static_cast<std::uint64_t>(repetition);
}

std::uint64_t test_seed(int index) { return 1000000000ULL + static_cast<std::uint64_t>(index); }

int resolve_worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PROTOATTN_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

WorkerPool::WorkerPool(int workers) : workers_(resolve_worker_count(workers)) {}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) const {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle_seed_ != 0) {
    CounterRng rng(shuffle_seed_);
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  }
  if (workers_ <= 1 || n <= 1) {
    for (std::size_t i : order) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= n) return;
      try {
        fn(order[slot]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    const int count = static_cast<int>(std::min<std::size_t>(workers_, n));
    for (int t = 0; t < count; ++t) threads.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

std::vector<CandidateEval> evaluate_population(std::span<const std::vector<double>> genomes, const RunConfig& config,
                                               std::int64_t generation, const WorkerPool& pool) {
  const std::size_t reps = static_cast<std::size_t>(config.seeds_per_gen);
  std::vector<ModelParams> decoded;
  decoded.reserve(genomes.size());
  for (const auto& g : genomes) decoded.push_back(decode(g, config.model));

  std::vector<RolloutResult> results(genomes.size() * reps);
  pool.parallel_for(results.size(), [&](std::size_t task) {
    const std::size_t cand = task / reps;
    const int rep = static_cast<int>(task % reps);
    results[task] = episode_rollout(decoded[cand], config.model, config.env, train_seed(generation, rep),
                                    config.max_steps);
  });

  std::vector<CandidateEval> evals(genomes.size());
  for (std::size_t c = 0; c < genomes.size(); ++c) {
    double total = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& res = results[c * reps + r];
      total += res.total_reward;
      evals[c].token_sum += std::accumulate(res.tokens_per_frame.begin(), res.tokens_per_frame.end(), std::int64_t{0});
      evals[c].frame_count += static_cast<std::int64_t>(res.tokens_per_frame.size());
    }
    evals[c].fitness = total / static_cast<double>(reps);
  }
  return evals;
}

CandidateEval evaluate_candidate(std::span<const double> genome, const RunConfig& config, std::int64_t generation,
                                 const WorkerPool& pool) {
  const std::vector<std::vector<double>> one{std::vector<double>(genome.begin(), genome.end())};
  return evaluate_population(one, config, generation, pool).front();
}

EvalReport summarize(std::vector<std::uint64_t> seeds, std::span<const RolloutResult> rollouts) {
  EvalReport report;
  report.seeds = std::move(seeds);
  std::vector<double> token_samples;
  for (const auto& r : rollouts) {
    report.scores.push_back(r.total_reward);
    report.episode_lengths.push_back(r.steps);
    token_samples.insert(token_samples.end(), r.tokens_per_frame.begin(), r.tokens_per_frame.end());
  }
  report.score = mean_ci95(report.scores);
  report.tokens = mean_ci95(token_samples);
  return report;
}

EvalReport test_best(std::span<const double> genome, const RunConfig& config, int n_seeds, const WorkerPool& pool) {
  const ModelParams params = decode(genome, config.model);
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n_seeds));
  for (int i = 0; i < n_seeds; ++i) seeds[i] = test_seed(i);
  std::vector<RolloutResult> results(seeds.size());
  pool.parallel_for(seeds.size(), [&](std::size_t i) {
    results[i] = episode_rollout(params, config.model, config.env, seeds[i], config.max_steps);
  });
  return summarize(std::move(seeds), results);
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_eval_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "seed,score,episode_length\n";
  for (std::size_t i = 0; i < report.scores.size(); ++i)
    out << report.seeds[i] << ',' << fmt(report.scores[i]) << ',' << report.episode_lengths[i] << '\n';
  out << "summary,mean=" << fmt(report.score.mean) << ",ci95=" << fmt(report.score.half_width)
      << ",tokens_mean=" << fmt(report.tokens.mean) << ",tokens_ci95=" << fmt(report.tokens.half_width)
      << ",n=" << report.score.n << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string format_log_row(const GenerationLog& row) {
  std::ostringstream s;
  s << row.gen << ',' << fmt(row.best) << ',' << fmt(row.mean) << ',' << fmt(row.median) << ',' << fmt(row.sigma)
    << ',' << fmt(row.tokens_mean) << ',' << fmt(row.wall_s);
  return s.str();
}

Trainer::Trainer(RunConfig config) {
  config.validate();
  state_.config = config;
  const int dim = static_cast<int>(count_params(config.model));
  state_.cma = cma_init(dim, config.sigma0, config.population);
  state_.rng = CounterRng(config.master_seed);
}

Trainer::Trainer(TrainerState state) : state_(std::move(state)) { state_.config.validate(); }

GenerationLog Trainer::step(const WorkerPool& pool) {
  const auto start = std::chrono::steady_clock::now();
  auto& s = state_;
  const std::int64_t gen = s.cma.generation;

  const auto samples = cma_ask(s.cma, s.rng);
  last_candidates_.clear();
  for (const auto& v : samples) last_candidates_.emplace_back(v.data(), v.data() + v.size());
  last_evals_ = evaluate_population(last_candidates_, s.config, gen, pool);

  std::vector<double> fitness;
  std::int64_t tokens = 0, frames = 0;
  for (const auto& e : last_evals_) {
    fitness.push_back(e.fitness);
    tokens += e.token_sum;
    frames += e.frame_count;
  }

  GenerationLog row;
  row.gen = gen;
  row.sigma = s.cma.sigma;
  std::vector<double> sorted = fitness;
  std::sort(sorted.begin(), sorted.end());
  row.best = sorted.back();
  row.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  const std::size_t m = sorted.size();
  row.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  row.tokens_mean = frames > 0 ? static_cast<double>(tokens) / static_cast<double>(frames) : 0.0;

  const auto best_idx = static_cast<std::size_t>(cma_rank(fitness, true).front());
  if (fitness[best_idx] > s.best_fitness) {
    s.best_fitness = fitness[best_idx];
    s.best_genome = last_candidates_[best_idx];
    s.best_generation = gen;
  }

  cma_tell(s.cma, samples, fitness, true);
  if (s.config.record_wall_time)
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

namespace {

// Run settings that may change when a checkpoint is resumed.
bool resumable_change(const RunConfig& saved, const RunConfig& requested) {
  RunConfig a = saved;
  a.generations = requested.generations;
  a.workers = requested.workers;
  a.out_dir = requested.out_dir;
  a.record_wall_time = requested.record_wall_time;
  a.test_every = requested.test_every;
  a.test_seeds = requested.test_seeds;
  return a == requested;
}

// Keeps the header and the first `rows` data rows of a CSV log.
void truncate_log(const std::string& path, std::int64_t rows, std::string_view header) {
  std::vector<std::string> kept;
  if (std::ifstream in(path); in) {
    std::string line;
    std::getline(in, line);
    while (static_cast<std::int64_t>(kept.size()) < rows && std::getline(in, line)) kept.push_back(line);
  }
  if (static_cast<std::int64_t>(kept.size()) < rows)
    throw MalformedInput("log " + path + " has fewer rows than the checkpoint records");
  std::ofstream out(path, std::ios::trunc);
  out << header << '\n';
  for (const auto& l : kept) out << l << '\n';
}

}  // namespace

TrainResult train(const RunConfig& config, const TrainOptions& options) {
  config.validate();
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  TrainResult result;
  result.log_path = (fs::path(config.out_dir) / "log.csv").string();
  result.checkpoint_path = (fs::path(config.out_dir) / "checkpoint.bin").string();
  const std::string tests_path = (fs::path(config.out_dir) / "tests.csv").string();

  std::optional<Trainer> trainer;
  if (options.resume_from) {
    TrainerState state = load_checkpoint(*options.resume_from);
    if (!resumable_change(state.config, config))
      throw ConfigError("resume: configuration differs from the checkpoint beyond "
                        "generations/workers/out_dir/record_wall_time/test_every/test_seeds");
    state.config = config;
    truncate_log(result.log_path, state.log_rows, kLogHeader);
    trainer.emplace(std::move(state));
  } else {
    trainer.emplace(config);
    std::ofstream(result.log_path, std::ios::trunc) << kLogHeader << '\n';
    std::ofstream(tests_path, std::ios::trunc) << "gen,mean,ci95,tokens_mean,tokens_ci95,n\n";
  }

  const WorkerPool pool(config.workers);
  std::ofstream log(result.log_path, std::ios::app);
  auto& st = trainer->mutable_state();
  while (st.cma.generation < config.generations) {
    if (options.stop != nullptr && options.stop->load()) {
      result.interrupted = true;
      break;
    }
    const GenerationLog row = trainer->step(pool);
    log << format_log_row(row) << '\n';
    log.flush();
    ++st.log_rows;
    if (options.on_generation) options.on_generation(row);

    const std::int64_t done_gens = st.cma.generation;
    if (config.test_every > 0 && config.test_seeds > 0 && done_gens % config.test_every == 0) {
      // Same genome that `eval` reads back from the checkpoint.
      const EvalReport report = test_best(st.best_genome, config, config.test_seeds, pool);
      write_eval_csv(report, (fs::path(config.out_dir) / ("eval_gen" + std::to_string(done_gens) + ".csv")).string());
      std::ofstream(tests_path, std::ios::app)
          << done_gens << ',' << fmt(report.score.mean) << ',' << fmt(report.score.half_width) << ','
          << fmt(report.tokens.mean) << ',' << fmt(report.tokens.half_width) << ',' << report.score.n << '\n';
      if (options.on_test) options.on_test(done_gens, report);
      save_checkpoint(st, result.checkpoint_path);
    }
  }
  save_checkpoint(st, result.checkpoint_path);
  result.state = st;
  return result;
}

}  // namespace protoattn
