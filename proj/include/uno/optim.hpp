#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uno/autograd.hpp"

namespace uno {

// Linear warmup from 0 to base_lr over warmup_steps, then cosine annealing
// down to min_lr at total_steps. Steps past total_steps stay at min_lr.
struct LrSchedule {
  double base_lr = 0.1;
  double min_lr = 0.001;
  std::size_t warmup_steps = 0;
  std::size_t total_steps = 1;

  double at(std::size_t step) const;
};

struct SgdConfig {
  LrSchedule schedule;
  double momentum = 0.9;
  double weight_decay = 1e-4;
};

// SGD with momentum and coupled weight decay:
//   g <- grad + wd * p;  buf <- momentum * buf + g;  p <- p - lr * buf
class SgdMomentum {
 public:
  SgdMomentum(std::vector<ag::Var> params, SgdConfig config);

  // Applies one update using lr = schedule.at(step) and returns that lr.
  double step(std::size_t step);

  const SgdConfig& config() const { return config_; }
  std::span<const Matrix> momentum_buffers() const { return buffers_; }

 private:
  std::vector<ag::Var> params_;
  std::vector<Matrix> buffers_;
  SgdConfig config_;
};

}  // namespace uno
