#include "symphony/nets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "symphony/fastmath.hpp"

namespace symphony {

namespace {
constexpr double kClipLo = math::kClipLo;
constexpr double kClipHi = math::kClipHi;

void check_finite(const Mat& x, const char* what) {
  if (!x.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite input");
  }
}
}  // namespace

// ---------------------------------------------------------------------------
// Linear
// ---------------------------------------------------------------------------

Linear::Linear(const std::string& name, int in_dim, int out_dim)
    : weight(name + ".weight", out_dim, in_dim), bias(name + ".bias", out_dim, 1) {}

void Linear::init_uniform(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(weight.value.cols()));
  for (Eigen::Index i = 0; i < weight.value.rows(); ++i) {
    for (Eigen::Index j = 0; j < weight.value.cols(); ++j) {
      weight.value(i, j) = rng.uniform(-bound, bound);
    }
  }
  for (Eigen::Index i = 0; i < bias.value.rows(); ++i) {
    bias.value(i, 0) = rng.uniform(-bound, bound);
  }
}

Mat Linear::forward(const Mat& x) {
  x_cache_ = x;
  Mat y = x * weight.value.transpose();
  y.rowwise() += bias.value.col(0).transpose();
  return y;
}

Mat Linear::backward(const Mat& dy, bool accumulate_param_grads) {
  if (accumulate_param_grads) {
    weight.grad.noalias() += dy.transpose() * x_cache_;
    bias.grad.col(0).noalias() += dy.colwise().sum().transpose();
  }
  return dy * weight.value;
}

// ---------------------------------------------------------------------------
// LayerNorm
// ---------------------------------------------------------------------------

LayerNorm::LayerNorm(const std::string& name, int dim, double epsilon)
    : gain(name + ".gain", dim, 1), bias(name + ".bias", dim, 1),
      epsilon_(epsilon) {
  gain.value.setOnes();
  bias.value.setZero();
}

Mat LayerNorm::forward(const Mat& x) {
  // Column-sweep formulation: per-sample statistics accumulate down the
  // contiguous columns of the col-major batch.
  const auto rows = x.rows();
  const auto cols = x.cols();
  const double inv_cols = 1.0 / static_cast<double>(cols);
  Vec mu = x.rowwise().sum() * inv_cols;
  xhat_cache_ = x.colwise() - mu;
  Vec var = xhat_cache_.array().square().matrix().rowwise().sum() * inv_cols;
  inv_std_cache_ = (var.array() + epsilon_).sqrt().inverse();
  xhat_cache_.array().colwise() *= inv_std_cache_.array();
  Mat y(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    y.col(j) = gain.value(j, 0) * xhat_cache_.col(j);
    y.col(j).array() += bias.value(j, 0);
  }
  return y;
}

Mat LayerNorm::backward(const Mat& dy, bool accumulate_param_grads) {
  const auto rows = dy.rows();
  const auto cols = dy.cols();
  const double inv_cols = 1.0 / static_cast<double>(cols);
  Vec m1 = Vec::Zero(rows);
  Vec m2 = Vec::Zero(rows);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double g = gain.value(j, 0);
    const double* d = dy.col(j).data();
    const double* xh = xhat_cache_.col(j).data();
    double* a1 = m1.data();
    double* a2 = m2.data();
    double d_gain = 0.0, d_bias = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double v = g * d[i];
      a1[i] += v;
      a2[i] += v * xh[i];
      d_gain += d[i] * xh[i];
      d_bias += d[i];
    }
    if (accumulate_param_grads) {
      gain.grad(j, 0) += d_gain;
      bias.grad(j, 0) += d_bias;
    }
  }
  m1 *= inv_cols;
  m2 *= inv_cols;
  Mat dx(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double g = gain.value(j, 0);
    const double* d = dy.col(j).data();
    const double* xh = xhat_cache_.col(j).data();
    double* out = dx.col(j).data();
    for (Eigen::Index i = 0; i < rows; ++i) {
      out[i] = (g * d[i] - m1[i] - xh[i] * m2[i]) * inv_std_cache_[i];
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// ReSineLayer
// ---------------------------------------------------------------------------

ReSineLayer::ReSineLayer(const std::string& name, int dim)
    : s(name + ".s", dim, 1) {}

void ReSineLayer::init_uniform(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(s.value.rows()));
  for (Eigen::Index i = 0; i < s.value.rows(); ++i) {
    s.value(i, 0) = rng.uniform(-bound, bound);
  }
}

Mat ReSineLayer::forward(const Mat& x) {
  const auto rows = x.rows();
  const auto cols = x.cols();
  sig_cache_.resize(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    sig_cache_[j] = fastmath::sigmoid(s.value(j, 0));
  }
  u_cache_.resize(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    u_cache_.col(j) = x.col(j) / sig_cache_[j];
  }
  sin_cache_.resize(rows, cols);
  cos_cache_.resize(rows, cols);
  fastmath::sincos(u_cache_.data(), sin_cache_.data(), cos_cache_.data(),
                   u_cache_.size());
  rect_cache_ = 1.5 * sin_cache_;  // |argument| <= 1.5 by construction
  fastmath::sigmoid_bounded(rect_cache_.data(), rect_cache_.data(),
                            rect_cache_.size(), 1.5);
  Mat y(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    y.col(j) =
        sig_cache_[j] * (sin_cache_.col(j).array() * rect_cache_.col(j).array());
  }
  return y;
}

Mat ReSineLayer::backward(const Mat& dy, bool accumulate_param_grads) {
  // y = sig * t * g with t = sin(u), g = sigmoid(1.5 t), u = x / sig.
  // dy/dx   = cos(u) g (1 + 1.5 t (1 - g))
  // dy/dsig = t g - u cos(u) g (1 + 1.5 t (1 - g))
  const auto rows = dy.rows();
  const auto cols = dy.cols();
  Mat dx(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double* t = sin_cache_.col(j).data();
    const double* cu = cos_cache_.col(j).data();
    const double* g = rect_cache_.col(j).data();
    const double* u = u_cache_.col(j).data();
    const double* d = dy.col(j).data();
    double* out = dx.col(j).data();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double chain = cu[i] * g[i] * (1.0 + 1.5 * t[i] * (1.0 - g[i]));
      out[i] = d[i] * chain;
      acc += d[i] * (t[i] * g[i] - u[i] * chain);
    }
    if (accumulate_param_grads) {
      s.grad(j, 0) += acc * sig_cache_[j] * (1.0 - sig_cache_[j]);
    }
  }
  return dx;
}

// ---------------------------------------------------------------------------
// GradDropout
// ---------------------------------------------------------------------------

Mat GradDropout::forward(const Mat& x, Rng& rng) {
  if (p_ <= 0.0) {
    mask_ = Mat::Ones(x.rows(), x.cols());
  } else if (p_ >= 1.0) {
    mask_ = Mat::Zero(x.rows(), x.cols());
  } else {
    mask_.resize(x.rows(), x.cols());
    double* m = mask_.data();
    for (Eigen::Index i = 0; i < mask_.size(); ++i) {
      m[i] = rng.uniform() >= p_ ? 1.0 : 0.0;
    }
  }
  return x;
}

Mat GradDropout::backward(const Mat& dy) const {
  return dy.array() * mask_.array();
}

// ---------------------------------------------------------------------------
// compose_action
// ---------------------------------------------------------------------------

ComposedAction compose_action(const Mat& a_raw, const Mat& sigma,
                              const Mat& noise, double a_max) {
  ComposedAction out;
  out.a_max_ = a_max;
  out.sigma_ = sigma;
  out.half_tanh_ = (0.5 * a_raw).array().tanh();
  out.outer_tanh_ =
      (sigma.array() * out.half_tanh_.array() + noise.array()).tanh();
  out.action = a_max * out.outer_tanh_;
  return out;
}

void ComposedAction::backward(const Mat& d_action, Mat* d_a_raw,
                              Mat* d_sigma) const {
  const Mat common =
      d_action.array() * a_max_ * (1.0 - outer_tanh_.array().square());
  if (d_a_raw) {
    *d_a_raw = common.array() * sigma_.array() * 0.5 *
               (1.0 - half_tanh_.array().square());
  }
  if (d_sigma) {
    *d_sigma = common.array() * half_tanh_.array();
  }
}

// ---------------------------------------------------------------------------
// SortedWeightedQ
// ---------------------------------------------------------------------------

Vec SortedWeightedQ::forward(const Mat& nodes) {
  rows_ = nodes.rows();
  cols_ = nodes.cols();
  if (schedule_->size() != cols_) {
    throw std::invalid_argument("target_q: schedule length != node count");
  }
  perm_.resize(static_cast<std::size_t>(rows_ * cols_));
  Vec q(rows_);
  // Contiguous (value, index) pairs per row; sorting by value with the index
  // as tiebreaker keeps equal nodes in original order.
  std::vector<std::pair<double, std::int32_t>> keyed(cols_);
  const auto& w = schedule_->weights();
  for (Eigen::Index r = 0; r < rows_; ++r) {
    for (Eigen::Index j = 0; j < cols_; ++j) {
      keyed[j] = {nodes(r, j), static_cast<std::int32_t>(j)};
    }
    std::sort(keyed.begin(), keyed.end());
    double acc = 0.0;
    for (Eigen::Index k = 0; k < cols_; ++k) {
      perm_[static_cast<std::size_t>(r * cols_ + k)] = keyed[k].second;
      acc += w[k] * keyed[k].first;
    }
    q[r] = acc;
  }
  return q;
}

Mat SortedWeightedQ::backward(const Vec& dq) const {
  Mat d_nodes = Mat::Zero(rows_, cols_);
  const auto& w = schedule_->weights();
  for (Eigen::Index r = 0; r < rows_; ++r) {
    for (Eigen::Index k = 0; k < cols_; ++k) {
      d_nodes(r, perm_[static_cast<std::size_t>(r * cols_ + k)]) += w[k] * dq[r];
    }
  }
  return d_nodes;
}

Vec target_q(const Mat& nodes, const WeightSchedule& schedule) {
  SortedWeightedQ op(&schedule);
  return op.forward(nodes);
}

void polyak_update(const std::vector<Param*>& target,
                   const std::vector<Param*>& online, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("polyak_update: tau must be in (0, 1]");
  }
  if (target.size() != online.size()) {
    throw std::invalid_argument("polyak_update: parameter count mismatch");
  }
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i]->value.rows() != online[i]->value.rows() ||
        target[i]->value.cols() != online[i]->value.cols()) {
      throw std::invalid_argument("polyak_update: shape mismatch at " +
                                  target[i]->name);
    }
    target[i]->value = (1.0 - tau) * target[i]->value + tau * online[i]->value;
  }
}

// ---------------------------------------------------------------------------
// Actor
// ---------------------------------------------------------------------------

Actor::Actor(const std::string& prefix, int obs_dim, int action_dim, int h_dim,
             double grad_dropout_p)
    : action_dim_(action_dim),
      fc_in_(prefix + ".fc_in", obs_dim, h_dim),
      ln_(prefix + ".ln", h_dim),
      act_(prefix + ".resine", h_dim),
      head_a_(prefix + ".head_a", h_dim, action_dim),
      head_s_(prefix + ".head_s", h_dim, action_dim),
      head_b_(prefix + ".head_b", h_dim, action_dim),
      drop_a_(grad_dropout_p),
      drop_s_(grad_dropout_p),
      drop_b_(grad_dropout_p) {}

void Actor::init(Rng& rng) {
  fc_in_.init_uniform(rng);
  act_.init_uniform(rng);
  head_a_.init_uniform(rng);
  head_s_.init_uniform(rng);
  head_b_.init_uniform(rng);
}

ActorOutput Actor::forward(const Mat& states, Rng& dropout_rng) {
  check_finite(states, "actor_forward");
  const Mat trunk = act_.forward(ln_.forward(fc_in_.forward(states)));
  ActorOutput out;
  out.a_raw = drop_a_.forward(head_a_.forward(trunk), dropout_rng);
  const Mat s_pre = drop_s_.forward(head_s_.forward(trunk), dropout_rng);
  const Mat b_pre = drop_b_.forward(head_b_.forward(trunk), dropout_rng);

  tanh_s_ = (0.5 * s_pre).array().tanh();
  tanh_b_ = (0.5 * b_pre).array().tanh();

  auto squash = [](const Mat& t, Mat& gate) {
    Mat value(t.rows(), t.cols());
    gate.resize(t.rows(), t.cols());
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      for (Eigen::Index i = 0; i < t.rows(); ++i) {
        const double v = std::abs(t(i, j));
        const bool inside = v > kClipLo && v < kClipHi;
        value(i, j) = std::clamp(v, kClipLo, kClipHi);
        const double sign = (t(i, j) > 0.0) - (t(i, j) < 0.0);
        gate(i, j) = inside ? sign * 0.5 * (1.0 - t(i, j) * t(i, j)) : 0.0;
      }
    }
    return value;
  };

  if (fixed_beta_ >= 0.0) {
    // Fixed-beta configuration: sigma is the action-dim mean of |tanh(s/2)|,
    // beta a constant.
    const Vec mean = tanh_s_.array().abs().rowwise().mean();
    out.sigma.resize(tanh_s_.rows(), action_dim_);
    for (Eigen::Index i = 0; i < tanh_s_.rows(); ++i) {
      const double v = std::clamp(mean[i], kClipLo, kClipHi);
      out.sigma.row(i).setConstant(v);
    }
    mean_mode_inside_.resize(tanh_s_.rows());
    for (Eigen::Index i = 0; i < tanh_s_.rows(); ++i) {
      mean_mode_inside_[i] = mean[i] > kClipLo && mean[i] < kClipHi ? 1.0 : 0.0;
    }
    out.beta = Mat::Constant(tanh_s_.rows(), action_dim_, fixed_beta_);
    beta_gate_ = Mat::Zero(tanh_b_.rows(), tanh_b_.cols());
  } else {
    out.sigma = squash(tanh_s_, sigma_gate_);
    out.beta = squash(tanh_b_, beta_gate_);
  }
  return out;
}

void Actor::backward(const Mat& d_a_raw, const Mat& d_sigma, const Mat& d_beta) {
  Mat d_s_pre;
  if (fixed_beta_ >= 0.0) {
    // Mean over action dim: every column shares the row's mean gradient.
    const Vec row_d = d_sigma.rowwise().sum() / static_cast<double>(action_dim_);
    d_s_pre.resize(tanh_s_.rows(), tanh_s_.cols());
    for (Eigen::Index j = 0; j < tanh_s_.cols(); ++j) {
      for (Eigen::Index i = 0; i < tanh_s_.rows(); ++i) {
        const double sign = (tanh_s_(i, j) > 0.0) - (tanh_s_(i, j) < 0.0);
        d_s_pre(i, j) = mean_mode_inside_[i] * row_d[i] * sign * 0.5 *
                        (1.0 - tanh_s_(i, j) * tanh_s_(i, j));
      }
    }
  } else {
    d_s_pre = d_sigma.array() * sigma_gate_.array();
  }
  const Mat d_b_pre = d_beta.array() * beta_gate_.array();

  Mat d_trunk = head_a_.backward(drop_a_.backward(d_a_raw));
  d_trunk += head_s_.backward(drop_s_.backward(d_s_pre));
  d_trunk += head_b_.backward(drop_b_.backward(d_b_pre));
  fc_in_.backward(ln_.backward(act_.backward(d_trunk)));
}

std::vector<Param*> Actor::params() {
  return {&fc_in_.weight, &fc_in_.bias, &ln_.gain,        &ln_.bias,
          &act_.s,        &head_a_.weight, &head_a_.bias, &head_s_.weight,
          &head_s_.bias,  &head_b_.weight, &head_b_.bias};
}

// ---------------------------------------------------------------------------
// CriticSet
// ---------------------------------------------------------------------------

CriticSet::Stack::Stack(const std::string& prefix, int in_dim, int h_dim,
                        int n_out)
    : fc_in(prefix + ".fc_in", in_dim, h_dim),
      ln(prefix + ".ln", h_dim),
      act(prefix + ".resine", h_dim),
      fc_out(prefix + ".fc_out", h_dim, n_out) {}

CriticSet::CriticSet(const std::string& prefix, int obs_dim, int action_dim,
                     int h_dim, int n_out, double grad_dropout_p)
    : obs_dim_(obs_dim), action_dim_(action_dim), n_out_(n_out),
      drop_nodes_(grad_dropout_p) {
  stacks_.reserve(3);
  for (int i = 0; i < 3; ++i) {
    stacks_.emplace_back(prefix + "." + std::to_string(i), obs_dim + action_dim,
                         h_dim, n_out);
  }
}

void CriticSet::init(Rng& rng) {
  for (auto& stack : stacks_) {
    stack.fc_in.init_uniform(rng);
    stack.act.init_uniform(rng);
    stack.fc_out.init_uniform(rng);
  }
}

Mat CriticSet::forward(const Mat& states, const Mat& actions, Rng& dropout_rng) {
  if (states.rows() != actions.rows()) {
    throw std::invalid_argument("critic_forward: batch length mismatch");
  }
  check_finite(states, "critic_forward");
  check_finite(actions, "critic_forward");
  Mat sa(states.rows(), obs_dim_ + action_dim_);
  sa << states, actions;
  Mat nodes(states.rows(), width());
  for (int i = 0; i < 3; ++i) {
    auto& st = stacks_[i];
    nodes.middleCols(static_cast<Eigen::Index>(i) * n_out_, n_out_) =
        st.fc_out.forward(st.act.forward(st.ln.forward(st.fc_in.forward(sa))));
  }
  return drop_nodes_.forward(nodes, dropout_rng);
}

void CriticSet::backward(const Mat& d_nodes, bool accumulate_param_grads,
                         Mat* d_states, Mat* d_actions) {
  const Mat d_masked = drop_nodes_.backward(d_nodes);
  Mat d_sa;
  const bool want_input = d_states != nullptr || d_actions != nullptr;
  for (int i = 0; i < 3; ++i) {
    auto& st = stacks_[i];
    const Mat d_out =
        d_masked.middleCols(static_cast<Eigen::Index>(i) * n_out_, n_out_);
    Mat d = st.fc_out.backward(d_out, accumulate_param_grads);
    d = st.act.backward(d, accumulate_param_grads);
    d = st.ln.backward(d, accumulate_param_grads);
    d = st.fc_in.backward(d, accumulate_param_grads);
    if (want_input) {
      if (d_sa.size() == 0) {
        d_sa = d;
      } else {
        d_sa += d;
      }
    }
  }
  if (d_states) *d_states = d_sa.leftCols(obs_dim_);
  if (d_actions) *d_actions = d_sa.rightCols(action_dim_);
}

std::vector<Param*> CriticSet::params() {
  std::vector<Param*> out;
  for (auto& st : stacks_) {
    out.push_back(&st.fc_in.weight);
    out.push_back(&st.fc_in.bias);
    out.push_back(&st.ln.gain);
    out.push_back(&st.ln.bias);
    out.push_back(&st.act.s);
    out.push_back(&st.fc_out.weight);
    out.push_back(&st.fc_out.bias);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ActorCriticNet
// ---------------------------------------------------------------------------

ActorCriticNet::ActorCriticNet(const NetConfig& config, Rng& init_rng)
    : config_(config),
      actor_("actor", config.obs_dim, config.action_dim, config.h_dim,
             config.grad_dropout_p),
      critic_("critic", config.obs_dim, config.action_dim, config.h_dim,
              config.n_out, config.grad_dropout_p),
      target_critic_("target_critic", config.obs_dim, config.action_dim,
                     config.h_dim, config.n_out, config.grad_dropout_p),
      node_schedule_(3 * config.n_out,
                     config.dimpled_node_schedule
                         ? ScheduleKind::kTargetCriticDimpled
                         : ScheduleKind::kTargetCritic) {
  if (config.obs_dim <= 0 || config.action_dim <= 0 || config.h_dim <= 0 ||
      config.n_out <= 0) {
    throw std::invalid_argument("ActorCriticNet: invalid dimensions");
  }
  actor_.init(init_rng);
  critic_.init(init_rng);
  sync_target();
}

std::vector<Param*> ActorCriticNet::trainable_params() {
  auto out = actor_.params();
  for (auto* p : critic_.params()) out.push_back(p);
  return out;
}

std::vector<Param*> ActorCriticNet::target_params() {
  return target_critic_.params();
}

std::vector<Param*> ActorCriticNet::online_critic_params() {
  return critic_.params();
}

std::vector<Param*> ActorCriticNet::all_params() {
  auto out = trainable_params();
  for (auto* p : target_critic_.params()) out.push_back(p);
  return out;
}

void ActorCriticNet::zero_grad() {
  for (auto* p : all_params()) p->zero_grad();
}

void ActorCriticNet::sync_target() {
  auto online = critic_.params();
  auto target = target_critic_.params();
  for (std::size_t i = 0; i < online.size(); ++i) {
    target[i]->value = online[i]->value;
  }
}

void ActorCriticNet::polyak(double tau) {
  polyak_update(target_critic_.params(), critic_.params(), tau);
}

}  // namespace symphony
