#pragma once

#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "symphony/checkpoint.hpp"
#include "symphony/config.hpp"
#include "symphony/envs.hpp"
#include "symphony/nets.hpp"
#include "symphony/optim.hpp"
#include "symphony/replay.hpp"

namespace symphony {

/// Loss pieces of one update; `total` is what the single backward pass saw.
struct LossParts {
  double advantage_term = 0.0;  // -ReHAE((Q_t - Q_T)/|Q_T|)
  double td_term = 0.0;         // ReHSE(r + gamma (1-d) Q*_t - Q nodes)
  double swaddling_term = 0.0;
  double total = 0.0;
  double q_target_detached_mean = 0.0;
  double batch_sigma_mean = 0.0;
  double batch_beta_mean = 0.0;
  bool applied = false;  // optimizer step taken (finite loss and grads)
};

struct EvalStats {
  double mean = 0.0;
  double stddev = 0.0;
  double min_return = 0.0;
  double max_return = 0.0;
  int episodes = 0;
};

struct EpisodeRecord {
  std::int64_t step = 0;
  std::int64_t episode = 0;  // 0 marks evaluation rows
  double ret = 0.0;
  double avg_sigma = 0.0;
  double avg_beta = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double swaddling = 0.0;
  double q_ema = 0.0;
  std::int64_t nonfinite_skips = 0;
};

/// CSV metrics stream; one row per completed episode plus one per evaluation.
class MetricsWriter {
 public:
  static constexpr const char* kHeader =
      "step,episode,return,avg_sigma,avg_beta,actor_loss,critic_loss,"
      "swaddling,q_ema,nonfinite_skips";

  explicit MetricsWriter(const std::string& path);
  void write_row(const EpisodeRecord& row);

 private:
  std::ofstream out_;
};

/// The Symphony loop: exploration with pure-noise actions, reward
/// normalization, fading-replay prefill, then per step one environment
/// transition followed by G joint actor-critic updates, with per-step
/// reseeding of every random stream. Strictly single-threaded.
class Trainer {
 public:
  explicit Trainer(const RunConfig& config);

  /// Full run to config.total_steps: exploration, training, metrics,
  /// checkpoints. Returns completed episode count.
  std::int64_t run();

  // --- pieces (used by run(), the CLI and the test suites) ---

  /// Collects exploration transitions (capped by total_steps when positive),
  /// freezes r_norm = mean |r_exp| (1.0 fallback when all rewards vanish),
  /// normalizes and prefills the buffer. No-op if already explored.
  void explore();
  bool exploration_complete() const { return scalars_.explored != 0.0; }

  /// One environment step plus G updates. Requires completed exploration.
  void train_step();

  /// One joint update on a batch: single backward, one optimizer step over
  /// actor and critic parameters, polyak target update, Q_T EMA refresh.
  LossParts update_once(const TransitionBatch& batch);

  /// Single combined backward pass with per-term weights (gradients land in
  /// the parameter .grad fields; caller zeroes them). Term weights exist so
  /// tests can isolate gradient routes; training uses (1, 1, 1).
  LossParts loss_backward(const TransitionBatch& batch, double w_adv,
                          double w_td, double w_sw);

  /// Noise-free rollouts on a cloned environment with the learned sigma
  /// scaling applied (a config flag forces sigma = 1 instead).
  EvalStats evaluate(int episodes);

  /// Deterministic policy action for a single observation (the eval policy).
  Eigen::VectorXd deterministic_action(const Eigen::VectorXd& obs);

  /// Behavior policy: composed noisy action, or pure noise with the scaled
  /// action zeroed when inside the deliberate-fall window.
  Eigen::VectorXd act_for_training(const Eigen::VectorXd& obs, bool zero_zone);

  /// Reward normalizer of Eq-style mean |r|, with the all-zero fallback.
  static double reward_norm(const std::vector<double>& rewards);

  /// Number of backward passes taken so far (one per update by contract).
  std::int64_t backward_count() const { return backward_count_; }

  void save_checkpoint_files(const std::string& stem);
  void resume_from(const std::string& checkpoint_path, bool with_buffer = true);

  /// Reseeds the noise / dropout / sampling streams from (master seed, step).
  void reseed_streams(std::int64_t step);

  const RunConfig& config() const { return config_; }
  ActorCriticNet& net() { return *net_; }
  AdamW& optimizer() { return *optim_; }
  Environment& env() { return *env_; }
  FadingReplayBuffer* buffer() { return buffer_ ? &*buffer_ : nullptr; }
  TrainerScalars& scalars() { return scalars_; }
  Rng& noise_rng() { return noise_rng_; }
  Rng& dropout_rng() { return dropout_rng_; }

  /// Per-episode mean batch sigma, one entry per completed episode.
  const std::vector<double>& sigma_history() const { return sigma_history_; }
  const std::vector<EpisodeRecord>& episode_log() const { return episode_log_; }

  void set_metrics_writer(MetricsWriter* writer) { metrics_ = writer; }

  int deliberate_fall_from() const;  // first 1-based episode step with zeroing

 private:
  Eigen::MatrixXd draw_noise(int rows);
  void finish_episode();
  void begin_episode();

  RunConfig config_;
  std::unique_ptr<Environment> env_;
  std::unique_ptr<ActorCriticNet> net_;
  std::unique_ptr<AdamW> optim_;
  std::optional<FadingReplayBuffer> buffer_;

  TrainerScalars scalars_;
  Rng noise_rng_, dropout_rng_, sample_rng_;

  std::vector<Transition> exploration_;  // raw until r_norm freezes

  // episode bookkeeping
  Eigen::VectorXd current_obs_;
  std::int64_t episode_step_ = 0;
  double episode_return_ = 0.0;
  double sum_sigma_ = 0.0, sum_beta_ = 0.0;
  double sum_adv_ = 0.0, sum_td_ = 0.0, sum_sw_ = 0.0;
  std::int64_t update_count_ = 0;

  std::vector<double> sigma_history_;
  std::vector<EpisodeRecord> episode_log_;
  MetricsWriter* metrics_ = nullptr;
  std::int64_t backward_count_ = 0;
};

}  // namespace symphony
