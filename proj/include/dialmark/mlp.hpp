#pragma once

#include <vector>

#include "dialmark/rng.hpp"

namespace dialmark {

// Fully-connected net with rectifier hidden layers and a linear output,
// trained by Adam on squared error of selected output units. Small enough to
// hand-roll; keeping it dependency-free makes benchmark cells bit-reproducible
// across platforms.
class Mlp {
 public:
  // sizes = {input, hidden..., output}. Weights start uniform in
  // ±sqrt(6/(fan_in+fan_out)), biases at zero.
  Mlp(std::vector<int> sizes, RandomStream& rng);

  std::vector<double> forward(const std::vector<double>& x) const;

  // Accumulates Adam gradients for one sample: squared error on output unit
  // `a` against `target`, scaled by `weight` (use 1/batch for a mean-loss
  // batch). Returns the current prediction for that unit.
  double accumulate(const std::vector<double>& x, int a, double target, double weight);
  // Applies one Adam step with the accumulated gradients, then clears them.
  void step(double lr);

  const std::vector<int>& sizes() const { return sizes_; }
  // Flat parameter views, layer-major (W0, b0, W1, b1, ...): used by the
  // target-network copy and checkpointing.
  std::vector<double> parameters() const;
  void set_parameters(const std::vector<double>& flat);
  // Gradients accumulated since the last step(), same layout as parameters().
  // Exposed so tests can check the backward pass against finite differences.
  std::vector<double> gradients() const;

 private:
  std::vector<int> sizes_;
  // W_[l] is sizes_[l+1] x sizes_[l], row-major; b_[l] has sizes_[l+1].
  std::vector<std::vector<double>> W_, b_;
  std::vector<std::vector<double>> gW_, gb_;   // accumulated gradients
  std::vector<std::vector<double>> mW_, mb_;   // Adam first moment
  std::vector<std::vector<double>> vW_, vb_;   // Adam second moment
  long adam_t_ = 0;

  void forward_cached(const std::vector<double>& x,
                      std::vector<std::vector<double>>& pre,
                      std::vector<std::vector<double>>& post) const;
};

}  // namespace dialmark
