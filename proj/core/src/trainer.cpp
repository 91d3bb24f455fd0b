#include "symphony/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

#include "symphony/io.hpp"
#include "symphony/math_core.hpp"

namespace symphony {

namespace {
// Stream tags for per-step seed derivation.
constexpr std::uint64_t kTagInit = 0x696e6974ULL;       // 'init'
constexpr std::uint64_t kTagNoise = 0x6e6f6973ULL;      // 'nois'
constexpr std::uint64_t kTagDropout = 0x64726f70ULL;    // 'drop'
constexpr std::uint64_t kTagSample = 0x73616d70ULL;     // 'samp'
constexpr std::uint64_t kTagReset = 0x72736574ULL;      // 'rset'
constexpr std::uint64_t kTagEvalReset = 0x65726573ULL;  // 'eres'
constexpr std::uint64_t kTagEvalDrop = 0x65647270ULL;   // 'edrp'
}  // namespace

MetricsWriter::MetricsWriter(const std::string& path) : out_(path, std::ios::binary) {
  if (!out_) throw IoError("cannot open metrics file '" + path + "'");
  out_ << kHeader << "\n";
}

void MetricsWriter::write_row(const EpisodeRecord& row) {
  out_ << row.step << ',' << row.episode << ',' << format_double(row.ret) << ','
       << format_double(row.avg_sigma) << ',' << format_double(row.avg_beta)
       << ',' << format_double(row.actor_loss) << ','
       << format_double(row.critic_loss) << ',' << format_double(row.swaddling)
       << ',' << format_double(row.q_ema) << ',' << row.nonfinite_skips << "\n";
  out_.flush();
}

Trainer::Trainer(const RunConfig& config) : config_(config) {
  std::vector<std::string> warnings;
  config_.algo.validate(&warnings);
  for (const auto& w : warnings) {
    std::fprintf(stderr, "[config] warning: %s\n", w.c_str());
  }
  env_ = make_env(config_.env_name, config_.c_ctrl);

  NetConfig net_config;
  net_config.obs_dim = env_->obs_dim();
  net_config.action_dim = env_->action_dim();
  net_config.h_dim = config_.algo.h_dim;
  net_config.n_out = config_.algo.n_out;
  net_config.grad_dropout_p = config_.algo.grad_dropout_p;
  net_config.a_max = env_->a_max();
  net_config.dimpled_node_schedule = config_.algo.dimpled_schedules;

  Rng init_rng(mix_seed(config_.seed, kTagInit));
  net_ = std::make_unique<ActorCriticNet>(net_config, init_rng);
  if (config_.algo.fixed_beta >= 0.0) {
    net_->actor().set_fixed_beta(config_.algo.fixed_beta);
  }

  AdamW::Options opt;
  opt.lr = config_.algo.continuous_learning ? 1e-5 : config_.algo.lr;
  opt.weight_decay = config_.algo.weight_decay;
  opt.sqrt_divisor = config_.algo.sqrt_divisor;
  optim_ = std::make_unique<AdamW>(net_->trainable_params(), opt);

  reseed_streams(0);
}

void Trainer::reseed_streams(std::int64_t step) {
  const auto s = static_cast<std::uint64_t>(step);
  noise_rng_.reseed(mix_seed(config_.seed, s, kTagNoise));
  dropout_rng_.reseed(mix_seed(config_.seed, s, kTagDropout));
  sample_rng_.reseed(mix_seed(config_.seed, s, kTagSample));
}

Eigen::MatrixXd Trainer::draw_noise(int rows) {
  const auto& algo = config_.algo;
  Eigen::MatrixXd noise(rows, env_->action_dim());
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < env_->action_dim(); ++j) {
      noise(i, j) = algo.noise_scale * noise_rng_.normal_clipped(algo.noise_clip);
    }
  }
  return noise;
}

int Trainer::deliberate_fall_from() const {
  const int limit = env_->step_limit();
  return limit - limit / 20;
}

Eigen::VectorXd Trainer::act_for_training(const Eigen::VectorXd& obs,
                                          bool zero_zone) {
  const Mat noise = draw_noise(1);
  const int d = env_->action_dim();
  if (zero_zone) {
    // Deliberate fall: zero the scaled actions, leave only noise.
    const ComposedAction ca =
        compose_action(Mat::Zero(1, d), Mat::Zero(1, d), noise, env_->a_max());
    return ca.action.row(0).transpose();
  }
  const ActorOutput ao = net_->actor().forward(obs.transpose(), dropout_rng_);
  const ComposedAction ca = compose_action(ao.a_raw, ao.sigma, noise, env_->a_max());
  return ca.action.row(0).transpose();
}

void Trainer::begin_episode() {
  current_obs_ = env_->reset(
      mix_seed(config_.seed, kTagReset,
               static_cast<std::uint64_t>(scalars_.reset_count++)));
  episode_step_ = 0;
  episode_return_ = 0.0;
  sum_sigma_ = sum_beta_ = sum_adv_ = sum_td_ = sum_sw_ = 0.0;
  update_count_ = 0;
}

void Trainer::explore() {
  if (exploration_complete()) return;
  const auto& algo = config_.algo;
  std::int64_t budget = algo.n_exp;
  if (config_.total_steps > 0) {
    budget = std::min<std::int64_t>(budget, config_.total_steps);
  }

  begin_episode();
  exploration_.clear();
  exploration_.reserve(static_cast<std::size_t>(budget));
  for (std::int64_t k = 0; k < budget; ++k) {
    reseed_streams(scalars_.global_step);
    const Eigen::VectorXd action =
        act_for_training(current_obs_, /*zero_zone=*/true);
    const StepResult sr = env_->step(action);
    Transition t;
    t.state = current_obs_;
    t.action = action;
    t.reward_norm = sr.reward;  // raw here; normalized below
    t.done = sr.terminated ? 1.0 : 0.0;
    t.next_state = sr.observation;
    exploration_.push_back(std::move(t));
    ++scalars_.global_step;
    if (sr.terminated || sr.truncated) {
      begin_episode();  // exploratory episodes are excluded from metrics
    } else {
      current_obs_ = sr.observation;
    }
  }

  if (exploration_.size() < static_cast<std::size_t>(algo.n_exp)) {
    return;  // run ended inside exploration; nothing to train on
  }

  std::vector<double> raw;
  raw.reserve(exploration_.size());
  for (const auto& t : exploration_) raw.push_back(t.reward_norm);
  scalars_.r_norm = reward_norm(raw);
  const double r_norm = scalars_.r_norm;
  for (auto& t : exploration_) t.reward_norm /= r_norm;

  FadingReplayBuffer::Options options;
  options.capacity = algo.n_rb();
  options.obs_dim = env_->obs_dim();
  options.action_dim = env_->action_dim();
  options.precision = algo.buffer_precision;
  options.done_epsilon_decay = algo.continuous_learning;
  buffer_.emplace(FadingReplayBuffer::prefill(
      exploration_, algo.repeats, options,
      WeightSchedule(algo.n_rb(), algo.dimpled_schedules
                                      ? ScheduleKind::kBufferDimpled
                                      : ScheduleKind::kBuffer)));
  exploration_.clear();
  exploration_.shrink_to_fit();
  scalars_.explored = 1.0;
  begin_episode();  // training starts on a fresh episode
}

double Trainer::reward_norm(const std::vector<double>& rewards) {
  if (rewards.empty()) return 1.0;
  double abs_sum = 0.0;
  for (double r : rewards) abs_sum += std::abs(r);
  const double norm = abs_sum / static_cast<double>(rewards.size());
  if (norm == 0.0) {
    std::fprintf(stderr,
                 "[explore] warning: all exploratory rewards are zero, "
                 "falling back to r_norm = 1\n");
    return 1.0;
  }
  return norm;
}

LossParts Trainer::loss_backward(const TransitionBatch& batch, double w_adv,
                                 double w_td, double w_sw) {
  ++backward_count_;
  const auto& algo = config_.algo;
  const auto B = batch.states.rows();

  // Forward: actor on next states, composed next action, target critic.
  const ActorOutput ao = net_->actor().forward(batch.next_states, dropout_rng_);
  static const bool kNoiseFree = std::getenv("SYMPHONY_NOISE_FREE_UPDATES") != nullptr;
  const Mat noise = kNoiseFree ? Mat::Zero(B, env_->action_dim())
                               : draw_noise(static_cast<int>(B));
  const ComposedAction ca =
      compose_action(ao.a_raw, ao.sigma, noise, env_->a_max());
  const Mat nodes_t =
      net_->target_critic().forward(batch.next_states, ca.action, dropout_rng_);
  SortedWeightedQ sorted_q(&net_->node_schedule());
  const Vec q_tgt = sorted_q.forward(nodes_t);

  if (!scalars_.q_ema_initialized) {
    // EMA seeded from the very first update batch, no zero-bias burn-in.
    scalars_.q_ema = q_tgt.mean();
    scalars_.q_ema_initialized = 1.0;
  }
  const double denom = std::max(std::abs(scalars_.q_ema), 1e-6);

  // Temporal Advantage term (actor path, through the attached target Q).
  Vec adv = (q_tgt.array() - scalars_.q_ema) / denom;
  Vec adv_grad;
  const double advantage_term = -math::rehae(adv, &adv_grad);

  // Temporal Difference term (online critic path, detached target).
  const Vec target_y =
      batch.rewards.array() +
      algo.gamma * (1.0 - batch.dones.array()) * q_tgt.array();
  const Mat nodes_o =
      net_->critic().forward(batch.states, batch.actions, dropout_rng_);
  const auto width = nodes_o.cols();
  const double inv_count = 1.0 / static_cast<double>(B * width);
  Mat d_nodes_o(B, width);
  double td_sum = 0.0;
  for (Eigen::Index j = 0; j < width; ++j) {
    for (Eigen::Index i = 0; i < B; ++i) {
      const double e = target_y[i] - nodes_o(i, j);
      const double t = std::tanh(0.5 * e);
      td_sum += e * t;
      d_nodes_o(i, j) = -w_td * (t + 0.5 * e * (1.0 - t * t)) * inv_count;
    }
  }
  const double td_term = td_sum * inv_count;

  // Swaddling term (actor path through sigma and beta).
  Eigen::ArrayXXd d_sigma_sw, d_beta_sw;
  const double swaddling_term = math::full_swaddling(
      ao.sigma.array(), ao.beta.array(), &d_sigma_sw, &d_beta_sw);

  // Single backward pass over the combined scalar loss.
  net_->critic().backward(d_nodes_o, /*accumulate_param_grads=*/true);
  const Vec dq = (-w_adv / denom) * adv_grad;
  const Mat d_nodes_t = sorted_q.backward(dq);
  Mat d_action;
  net_->target_critic().backward(d_nodes_t, /*accumulate_param_grads=*/false,
                                 nullptr, &d_action);
  Mat d_a_raw, d_sigma_adv;
  ca.backward(d_action, &d_a_raw, &d_sigma_adv);
  const Mat d_sigma = d_sigma_adv + (w_sw * d_sigma_sw).matrix();
  const Mat d_beta = (w_sw * d_beta_sw).matrix();
  net_->actor().backward(d_a_raw, d_sigma, d_beta);

  LossParts parts;
  parts.advantage_term = advantage_term;
  parts.td_term = td_term;
  parts.swaddling_term = swaddling_term;
  parts.total =
      w_adv * advantage_term + w_td * td_term + w_sw * swaddling_term;
  parts.q_target_detached_mean = q_tgt.mean();
  parts.batch_sigma_mean = ao.sigma.mean();
  parts.batch_beta_mean = ao.beta.mean();
  return parts;
}

LossParts Trainer::update_once(const TransitionBatch& batch) {
  net_->zero_grad();
  LossParts parts = loss_backward(batch, 1.0, 1.0, 1.0);
  bool applied = false;
  if (std::isfinite(parts.total)) {
    applied = optim_->step();
  }
  if (applied) {
    net_->polyak(config_.algo.tau);
    const double a = math::kGoldenAlpha;
    scalars_.q_ema = a * scalars_.q_ema + (1.0 - a) * parts.q_target_detached_mean;
  } else {
    ++scalars_.nonfinite_skips;
  }
  parts.applied = applied;
  return parts;
}

void Trainer::train_step() {
  if (!exploration_complete()) {
    throw std::logic_error("train_step: exploration has not completed");
  }
  if (current_obs_.size() == 0) begin_episode();  // post-resume
  const auto& algo = config_.algo;
  reseed_streams(scalars_.global_step);

  const bool zero_zone = (episode_step_ + 1) >= deliberate_fall_from();
  const Eigen::VectorXd action = act_for_training(current_obs_, zero_zone);
  const StepResult sr = env_->step(action);
  ++episode_step_;
  episode_return_ += sr.reward;

  Transition t;
  t.state = current_obs_;
  t.action = action;
  t.reward_norm = sr.reward / scalars_.r_norm;
  t.done = sr.terminated ? 1.0 : 0.0;
  t.next_state = sr.observation;
  buffer_->push(t);
  current_obs_ = sr.observation;

  TransitionBatch batch;
  for (int u = 0; u < algo.updates_per_step; ++u) {
    if (u == 0 || algo.resample_per_update) {
      batch = buffer_->sample(algo.batch(), sample_rng_);
    }
    const LossParts parts = update_once(batch);
    sum_sigma_ += parts.batch_sigma_mean;
    sum_beta_ += parts.batch_beta_mean;
    sum_adv_ += parts.advantage_term;
    sum_td_ += parts.td_term;
    sum_sw_ += parts.swaddling_term;
    ++update_count_;
  }
  ++scalars_.global_step;

  if (sr.terminated || sr.truncated) {
    finish_episode();
  }
}

void Trainer::finish_episode() {
  ++scalars_.episode;
  const double inv = update_count_ > 0 ? 1.0 / update_count_ : 0.0;
  EpisodeRecord row;
  row.step = scalars_.global_step;
  row.episode = scalars_.episode;
  row.ret = episode_return_;
  row.avg_sigma = sum_sigma_ * inv;
  row.avg_beta = sum_beta_ * inv;
  row.actor_loss = sum_adv_ * inv;
  row.critic_loss = sum_td_ * inv;
  row.swaddling = sum_sw_ * inv;
  row.q_ema = scalars_.q_ema;
  row.nonfinite_skips = scalars_.nonfinite_skips;
  sigma_history_.push_back(row.avg_sigma);
  episode_log_.push_back(row);
  if (metrics_) metrics_->write_row(row);
  begin_episode();
}

Eigen::VectorXd Trainer::deterministic_action(const Eigen::VectorXd& obs) {
  Rng throwaway(mix_seed(config_.seed, kTagEvalDrop));
  const ActorOutput ao = net_->actor().forward(obs.transpose(), throwaway);
  const int d = env_->action_dim();
  const Mat sigma =
      config_.algo.eval_sigma_one ? Mat::Ones(1, d) : ao.sigma;
  const ComposedAction ca =
      compose_action(ao.a_raw, sigma, Mat::Zero(1, d), env_->a_max());
  return ca.action.row(0).transpose();
}

EvalStats Trainer::evaluate(int episodes) {
  auto eval_env = env_->clone();
  std::vector<double> returns;
  returns.reserve(episodes);
  for (int ep = 0; ep < episodes; ++ep) {
    Eigen::VectorXd obs = eval_env->reset(
        mix_seed(config_.seed, kTagEvalReset, static_cast<std::uint64_t>(ep)));
    double ret = 0.0;
    while (true) {
      const StepResult sr = eval_env->step(deterministic_action(obs));
      ret += sr.reward;
      obs = sr.observation;
      if (sr.terminated || sr.truncated) break;
    }
    returns.push_back(ret);
  }
  EvalStats stats;
  stats.episodes = episodes;
  if (returns.empty()) return stats;
  double sum = 0.0, min_v = returns[0], max_v = returns[0];
  for (double r : returns) {
    sum += r;
    min_v = std::min(min_v, r);
    max_v = std::max(max_v, r);
  }
  stats.mean = sum / returns.size();
  double sq = 0.0;
  for (double r : returns) sq += (r - stats.mean) * (r - stats.mean);
  stats.stddev = std::sqrt(sq / returns.size());
  stats.min_return = min_v;
  stats.max_return = max_v;
  return stats;
}

void Trainer::save_checkpoint_files(const std::string& stem) {
  save_checkpoint(stem + ".symc", *net_, *optim_, scalars_,
                  config_.algo.variant);
  if (buffer_) buffer_->save(stem + ".frb");
}

void Trainer::resume_from(const std::string& checkpoint_path, bool with_buffer) {
  load_checkpoint(checkpoint_path, *net_, *optim_, scalars_);
  if (exploration_complete() && with_buffer) {
    std::string stem = checkpoint_path;
    if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".symc") {
      stem.resize(stem.size() - 5);
    }
    const auto& algo = config_.algo;
    FadingReplayBuffer::Options options;
    options.capacity = algo.n_rb();
    options.obs_dim = env_->obs_dim();
    options.action_dim = env_->action_dim();
    options.precision = algo.buffer_precision;
    options.done_epsilon_decay = algo.continuous_learning;
    buffer_.emplace(FadingReplayBuffer::load(
        stem + ".frb", options,
        WeightSchedule(algo.n_rb(), algo.dimpled_schedules
                                        ? ScheduleKind::kBufferDimpled
                                        : ScheduleKind::kBuffer)));
  }
  // The in-flight episode is not serialized; the next train_step starts a
  // fresh one. Deferring keeps load -> save byte-identical.
  current_obs_.resize(0);
}

std::int64_t Trainer::run() {
  namespace fs = std::filesystem;
  fs::create_directories(config_.out_dir);
  MetricsWriter writer(config_.out_dir + "/metrics.csv");
  set_metrics_writer(&writer);
  const auto wall_start = std::chrono::steady_clock::now();

  if (!config_.resume_from.empty()) {
    resume_from(config_.resume_from);
  }
  if (!exploration_complete()) {
    explore();
  }
  if (exploration_complete()) {
    std::int64_t next_checkpoint =
        config_.checkpoint_every > 0
            ? ((scalars_.global_step / config_.checkpoint_every) + 1) *
                  config_.checkpoint_every
            : -1;
    while (scalars_.global_step < config_.total_steps) {
      train_step();
      if (next_checkpoint > 0 && scalars_.global_step >= next_checkpoint) {
        save_checkpoint_files(config_.out_dir + "/checkpoint_" +
                              std::to_string(scalars_.global_step));
        save_checkpoint_files(config_.out_dir + "/checkpoint_latest");
        next_checkpoint += config_.checkpoint_every;
      }
      if (config_.eval_every > 0 &&
          scalars_.global_step % config_.eval_every == 0) {
        const EvalStats stats = evaluate(config_.eval_episodes);
        EpisodeRecord row;
        row.step = scalars_.global_step;
        row.episode = 0;  // evaluation row marker
        row.ret = stats.mean;
        const double inv = update_count_ > 0 ? 1.0 / update_count_ : 0.0;
        row.avg_sigma = sum_sigma_ * inv;
        row.avg_beta = sum_beta_ * inv;
        row.actor_loss = sum_adv_ * inv;
        row.critic_loss = sum_td_ * inv;
        row.swaddling = sum_sw_ * inv;
        row.q_ema = scalars_.q_ema;
        row.nonfinite_skips = scalars_.nonfinite_skips;
        writer.write_row(row);
      }
    }
    save_checkpoint_files(config_.out_dir + "/checkpoint_latest");
  }

  const auto wall_end = std::chrono::steady_clock::now();
  const double wall_s =
      std::chrono::duration<double>(wall_end - wall_start).count();
  std::ofstream summary(config_.out_dir + "/summary.txt");
  summary << "steps " << scalars_.global_step << "\n"
          << "episodes " << scalars_.episode << "\n"
          << "wall_seconds " << format_double(wall_s) << "\n"
          << "mean_final_sigma "
          << format_double(sigma_history_.empty() ? 0.0 : sigma_history_.back())
          << "\n"
          << "nonfinite_skips " << scalars_.nonfinite_skips << "\n";
  set_metrics_writer(nullptr);
  return scalars_.episode;
}

}  // namespace symphony
