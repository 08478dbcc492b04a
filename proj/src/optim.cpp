#include "uno/optim.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uno {

double LrSchedule::at(std::size_t step) const {
  if (warmup_steps > 0 && step < warmup_steps)
    return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  if (step >= total_steps) return min_lr;
  if (step == warmup_steps) return base_lr;
  const double progress = static_cast<double>(step - warmup_steps) /
                          static_cast<double>(total_steps - warmup_steps);
  return min_lr + (base_lr - min_lr) * (1.0 + std::cos(std::numbers::pi * progress)) / 2.0;
}

SgdMomentum::SgdMomentum(std::vector<ag::Var> params, SgdConfig config)
    : params_(std::move(params)), config_(config) {
  buffers_.reserve(params_.size());
  for (const auto& p : params_) {
    if (!p->requires_grad) throw std::invalid_argument("SgdMomentum: parameter without gradient");
    buffers_.emplace_back(p->value.rows(), p->value.cols());
  }
}

double SgdMomentum::step(std::size_t step) {
  const double lr = config_.schedule.at(step);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i]->value;
    const auto& g = params_[i]->ensure_grad();
    auto& buf = buffers_[i];
    if (!buf.same_shape(p)) throw std::logic_error("SgdMomentum: buffer shape drifted");
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double d = g.data()[j] + config_.weight_decay * p.data()[j];
      buf.data()[j] = config_.momentum * buf.data()[j] + d;
      p.data()[j] -= lr * buf.data()[j];
    }
  }
  return lr;
}

}  // namespace uno
