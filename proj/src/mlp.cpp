#include "dialmark/mlp.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace dialmark {

Mlp::Mlp(std::vector<int> sizes, RandomStream& rng) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
  const std::size_t n_layers = sizes_.size() - 1;
  W_.resize(n_layers);
  b_.resize(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    int fan_in = sizes_[l], fan_out = sizes_[l + 1];
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    W_[l].resize(static_cast<std::size_t>(fan_in) * fan_out);
    for (double& w : W_[l]) w = (2.0 * rng.uniform01() - 1.0) * bound;
    b_[l].assign(static_cast<std::size_t>(fan_out), 0.0);
  }
  gW_ = mW_ = vW_ = std::vector<std::vector<double>>(n_layers);
  gb_ = mb_ = vb_ = std::vector<std::vector<double>>(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    gW_[l].assign(W_[l].size(), 0.0);
    mW_[l].assign(W_[l].size(), 0.0);
    vW_[l].assign(W_[l].size(), 0.0);
    gb_[l].assign(b_[l].size(), 0.0);
    mb_[l].assign(b_[l].size(), 0.0);
    vb_[l].assign(b_[l].size(), 0.0);
  }
}

void Mlp::forward_cached(const std::vector<double>& x, std::vector<std::vector<double>>& pre,
                         std::vector<std::vector<double>>& post) const {
  assert(static_cast<int>(x.size()) == sizes_.front());
  const std::size_t n_layers = W_.size();
  pre.resize(n_layers);
  post.assign(n_layers + 1, {});
  post[0] = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    int in = sizes_[l], out = sizes_[l + 1];
    pre[l].assign(static_cast<std::size_t>(out), 0.0);
    for (int j = 0; j < out; ++j) {
      double z = b_[l][j];
      const double* row = &W_[l][static_cast<std::size_t>(j) * in];
      for (int i = 0; i < in; ++i) z += row[i] * post[l][i];
      pre[l][j] = z;
    }
    post[l + 1] = pre[l];
    if (l + 1 < n_layers)  // rectifier on hidden layers only
      for (double& v : post[l + 1]) v = v > 0.0 ? v : 0.0;
  }
}

std::vector<double> Mlp::forward(const std::vector<double>& x) const {
  std::vector<std::vector<double>> pre, post;
  forward_cached(x, pre, post);
  return post.back();
}

double Mlp::accumulate(const std::vector<double>& x, int a, double target, double weight) {
  std::vector<std::vector<double>> pre, post;
  forward_cached(x, pre, post);
  const std::size_t n_layers = W_.size();
  double prediction = post.back()[a];

  // d(weight * (q_a - target)^2) / dq_a
  std::vector<double> delta(post.back().size(), 0.0);
  delta[a] = 2.0 * weight * (prediction - target);

  for (std::size_t l = n_layers; l-- > 0;) {
    int in = sizes_[l], out = sizes_[l + 1];
    std::vector<double> delta_prev(static_cast<std::size_t>(in), 0.0);
    for (int j = 0; j < out; ++j) {
      double d = delta[j];
      if (d == 0.0) continue;
      gb_[l][j] += d;
      double* grow = &gW_[l][static_cast<std::size_t>(j) * in];
      const double* wrow = &W_[l][static_cast<std::size_t>(j) * in];
      for (int i = 0; i < in; ++i) {
        grow[i] += d * post[l][i];
        delta_prev[i] += d * wrow[i];
      }
    }
    if (l > 0)  // gate through the rectifier
      for (int i = 0; i < in; ++i)
        if (pre[l - 1][i] <= 0.0) delta_prev[i] = 0.0;
    delta = std::move(delta_prev);
  }
  return prediction;
}

void Mlp::step(double lr) {
  ++adam_t_;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t_));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t_));
  auto update = [&](std::vector<double>& p, std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
      g[i] = 0.0;
    }
  };
  for (std::size_t l = 0; l < W_.size(); ++l) {
    update(W_[l], gW_[l], mW_[l], vW_[l]);
    update(b_[l], gb_[l], mb_[l], vb_[l]);
  }
}

std::vector<double> Mlp::parameters() const {
  std::vector<double> flat;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    flat.insert(flat.end(), W_[l].begin(), W_[l].end());
    flat.insert(flat.end(), b_[l].begin(), b_[l].end());
  }
  return flat;
}

std::vector<double> Mlp::gradients() const {
  std::vector<double> flat;
  for (std::size_t l = 0; l < gW_.size(); ++l) {
    flat.insert(flat.end(), gW_[l].begin(), gW_[l].end());
    flat.insert(flat.end(), gb_[l].begin(), gb_[l].end());
  }
  return flat;
}

void Mlp::set_parameters(const std::vector<double>& flat) {
  std::size_t pos = 0;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    if (pos + W_[l].size() + b_[l].size() > flat.size())
      throw std::invalid_argument("parameter vector too short for network shape");
    std::copy(flat.begin() + pos, flat.begin() + pos + W_[l].size(), W_[l].begin());
    pos += W_[l].size();
    std::copy(flat.begin() + pos, flat.begin() + pos + b_[l].size(), b_[l].begin());
    pos += b_[l].size();
  }
  if (pos != flat.size())
    throw std::invalid_argument("parameter vector length does not match network shape");
}

}  // namespace dialmark
