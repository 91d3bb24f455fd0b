#include "symphony/optim.hpp"

#include <cmath>

namespace symphony {

AdamW::AdamW(std::vector<Param*> params, const Options& options)
    : params_(std::move(params)), options_(options) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto* p : params_) {
    m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

bool AdamW::step() {
  for (const auto* p : params_) {
    if (!p->grad.allFinite()) {
      ++rejected_steps_;
      return false;
    }
  }
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double lr = options_.lr;
  const double wd = options_.weight_decay;
  const double eps = options_.epsilon;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * p.grad;
    v_[i] = b2 * v_[i].array() + (1.0 - b2) * p.grad.array().square();
    if (options_.sqrt_divisor) {
      p.value.array() -=
          lr * (m_[i].array() / (v_[i].array().sqrt() + eps) +
                wd * p.value.array());
    } else {
      p.value.array() -=
          lr * (m_[i].array() / (v_[i].array() + eps) + wd * p.value.array());
    }
  }
  return true;
}

}  // namespace symphony
