#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "symphony/math_core.hpp"
#include "symphony/rng.hpp"

namespace symphony {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Named trainable tensor plus its gradient accumulator. Vectors are stored
/// as n x 1 matrices so the optimizer and checkpoints see a uniform shape.
struct Param {
  std::string name;
  Mat value;
  Mat grad;

  Param(std::string n, int rows, int cols)
      : name(std::move(n)), value(Mat::Zero(rows, cols)),
        grad(Mat::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

/// y = x W^T + b with x as batch rows. backward() accumulates parameter
/// gradients unless told otherwise (target networks skip them).
class Linear {
 public:
  Linear(const std::string& name, int in_dim, int out_dim);

  void init_uniform(Rng& rng);  // U[-1/sqrt(fan_in), 1/sqrt(fan_in)], W then b

  Mat forward(const Mat& x);
  Mat backward(const Mat& dy, bool accumulate_param_grads = true);

  Param weight;  // out x in
  Param bias;    // out x 1

 private:
  Mat x_cache_;
};

/// Per-feature normalization with learnable gain and bias.
class LayerNorm {
 public:
  LayerNorm(const std::string& name, int dim, double epsilon = 1e-5);

  Mat forward(const Mat& x);
  Mat backward(const Mat& dy, bool accumulate_param_grads = true);

  Param gain;  // dim x 1
  Param bias;  // dim x 1

 private:
  double epsilon_;
  Mat xhat_cache_;
  Vec inv_std_cache_;
};

/// ReSine activation with a trainable per-unit scale vector s:
/// sigma = sigmoid(s), y = sigma sin(x/sigma) * sigmoid(1.5 sin(x/sigma)).
class ReSineLayer {
 public:
  ReSineLayer(const std::string& name, int dim);

  void init_uniform(Rng& rng);  // U[-1/sqrt(dim), 1/sqrt(dim)]

  Mat forward(const Mat& x);
  Mat backward(const Mat& dy, bool accumulate_param_grads = true);

  Param s;  // dim x 1

 private:
  Mat u_cache_, sin_cache_, cos_cache_, rect_cache_;
  Vec sig_cache_;
};

/// Backward-only stochastic masking: forward values pass through untouched;
/// dropped elements contribute no gradient. No 1/(1-p) rescaling.
class GradDropout {
 public:
  explicit GradDropout(double p) : p_(p) {}

  /// Returns x unchanged (bit-identical) and draws a fresh keep-mask.
  Mat forward(const Mat& x, Rng& rng);
  Mat backward(const Mat& dy) const;

  double p() const { return p_; }
  const Mat& mask() const { return mask_; }

 private:
  double p_;
  Mat mask_;
};

/// action = a_max * tanh(sigma (.) tanh(a_raw / 2) + noise). The outer tanh
/// keeps the action strictly inside (-a_max, a_max) for all finite inputs.
struct ComposedAction {
  Mat action;
  void backward(const Mat& d_action, Mat* d_a_raw, Mat* d_sigma) const;

  // caches
  Mat half_tanh_;   // tanh(a_raw / 2)
  Mat outer_tanh_;  // tanh(sigma * half_tanh + noise)
  Mat sigma_;
  double a_max_ = 1.0;
};

ComposedAction compose_action(const Mat& a_raw, const Mat& sigma,
                              const Mat& noise, double a_max);

/// Per-row ascending sort of the critic nodes followed by a dot product with
/// the fixed schedule weights. Ties keep original node order, so gradients
/// are deterministic.
class SortedWeightedQ {
 public:
  explicit SortedWeightedQ(const WeightSchedule* schedule)
      : schedule_(schedule) {}

  Vec forward(const Mat& nodes);
  Mat backward(const Vec& dq) const;

 private:
  const WeightSchedule* schedule_;
  std::vector<std::int32_t> perm_;  // rows x cols, row-major
  Eigen::Index rows_ = 0, cols_ = 0;
};

/// Convenience wrapper around SortedWeightedQ::forward.
Vec target_q(const Mat& nodes, const WeightSchedule& schedule);

/// In-place convex blend: target <- (1 - tau) * target + tau * online.
void polyak_update(const std::vector<Param*>& target,
                   const std::vector<Param*>& online, double tau);

struct ActorOutput {
  Mat a_raw;  // unsquashed action head
  Mat sigma;  // clip(|tanh(s/2)|, 1e-3, 1-1e-3)
  Mat beta;   // clip(|tanh(b/2)|, 1e-3, 1-1e-3)
};

/// Decoupled actor: shared trunk, three heads (a, s, b), Gradient Dropout
/// after each head's fully connected output layer.
class Actor {
 public:
  Actor(const std::string& prefix, int obs_dim, int action_dim, int h_dim,
        double grad_dropout_p);

  void init(Rng& rng);

  ActorOutput forward(const Mat& states, Rng& dropout_rng);
  void backward(const Mat& d_a_raw, const Mat& d_sigma, const Mat& d_beta);

  std::vector<Param*> params();

  /// Testing hook matching the fixed-beta configuration: sigma becomes the
  /// action-dim mean of |tanh(s/2)| and beta a constant.
  void set_fixed_beta(double beta) { fixed_beta_ = beta; }

  int action_dim() const { return action_dim_; }

 private:
  int action_dim_;
  Linear fc_in_;
  LayerNorm ln_;
  ReSineLayer act_;
  Linear head_a_, head_s_, head_b_;
  GradDropout drop_a_, drop_s_, drop_b_;

  double fixed_beta_ = -1.0;
  Mat tanh_s_, tanh_b_;         // squash caches
  Mat sigma_gate_, beta_gate_;  // d sigma/beta wrt head pre-activation
  Vec mean_mode_inside_;        // clip gate per row in the fixed-beta mode
};

/// Three independent critic stacks whose node outputs are concatenated
/// (stack 0 nodes, then 1, then 2), with Gradient Dropout on the result.
class CriticSet {
 public:
  CriticSet(const std::string& prefix, int obs_dim, int action_dim, int h_dim,
            int n_out, double grad_dropout_p);

  void init(Rng& rng);

  /// Returns B x 3*n_out node matrix.
  Mat forward(const Mat& states, const Mat& actions, Rng& dropout_rng);

  /// Routes node gradients back. Parameter gradients are accumulated only if
  /// requested; d_states / d_actions are optional input-gradient outputs.
  void backward(const Mat& d_nodes, bool accumulate_param_grads,
                Mat* d_states = nullptr, Mat* d_actions = nullptr);

  std::vector<Param*> params();

  int n_out() const { return n_out_; }
  int width() const { return 3 * n_out_; }

 private:
  struct Stack {
    Linear fc_in;
    LayerNorm ln;
    ReSineLayer act;
    Linear fc_out;
    Stack(const std::string& prefix, int in_dim, int h_dim, int n_out);
  };

  int obs_dim_, action_dim_, n_out_;
  std::vector<Stack> stacks_;
  GradDropout drop_nodes_;
};

struct NetConfig {
  int obs_dim = 0;
  int action_dim = 0;
  int h_dim = 512;
  int n_out = 128;  // per critic stack; concatenated width is 3*n_out
  double grad_dropout_p = 0.0;
  double a_max = 1.0;
  bool dimpled_node_schedule = false;
};

/// Unified actor + three online critics + target critics. Target parameters
/// are never optimizer-managed; they move only through polyak_update.
class ActorCriticNet {
 public:
  ActorCriticNet(const NetConfig& config, Rng& init_rng);

  const NetConfig& config() const { return config_; }

  Actor& actor() { return actor_; }
  CriticSet& critic() { return critic_; }
  CriticSet& target_critic() { return target_critic_; }
  const WeightSchedule& node_schedule() const { return node_schedule_; }

  std::vector<Param*> trainable_params();  // actor + online critic
  std::vector<Param*> target_params();
  std::vector<Param*> online_critic_params();
  std::vector<Param*> all_params();  // trainable + target, checkpoint order

  void zero_grad();
  void sync_target();  // hard copy online -> target
  void polyak(double tau);

 private:
  NetConfig config_;
  Actor actor_;
  CriticSet critic_;
  CriticSet target_critic_;
  WeightSchedule node_schedule_;
};

}  // namespace symphony
