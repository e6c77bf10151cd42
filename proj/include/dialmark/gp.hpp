#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dialmark/dialog.hpp"

namespace dialmark {

// Gaussian-process value learner over (belief vector, action) points. The
// kernel is linear on the belief side and a Kronecker delta on the action
// side, so points with different actions never covary and the dictionary
// splits into independent per-action blocks. Feature vectors are projected
// onto the unit sphere on entry: the residual threshold and the exploration
// scale are calibrated for k(z,z) = 1 at fresh points.
struct GpConfig {
  double noise = 1.0;    // observation noise variance on the reward rows
  double nu = 0.01;      // squared kernel residual needed to enter the dictionary
  int max_dict = 1500;   // dictionary cap; lowest-residual point is dropped
  double scale = 3.0;    // exploration: sample N(mean, scale^2 * var) per action
  double gamma = 1.0;
};

struct GpStat {
  double mean = 0.0;
  double var = 0.0;
};

// On-policy temporal-difference learner. Each consecutive pair of visited
// points contributes one linear observation mean(z_t) - gamma*mean(z_{t+1}) =
// r_t (just mean(z_t) = r_t at episode end), and the posterior over the
// dictionary values is updated by exact Gaussian conditioning, one rank-1
// step per row. Points enter the dictionary only while their kernel residual
// against it exceeds nu, which keeps the recursion sparse.
class GpPolicy : public TrainablePolicy {
 public:
  // Featurization shaped by the domain (the benchmark route).
  GpPolicy(const ItemSet& domain, GpConfig config, bool with_group);
  // Domain-free form for controlled experiments on synthetic tasks; drive it
  // through select_action()/observe_reward().
  GpPolicy(int n_actions, GpConfig config);

  void begin_episode(RandomStream& rng) override;
  int act(const BeliefTracker& t, const std::vector<bool>& legal, RandomStream& rng) override;
  void observe(double reward, const BeliefTracker& next, const std::vector<bool>& legal_next,
               bool done) override;

  // While training, scores every allowed action by a posterior sample and
  // registers the chosen point for the pending temporal-difference row.
  // Evaluation scores by the posterior mean (ties -> lowest index) and leaves
  // the learner untouched.
  int select_action(const std::vector<double>& features, const std::vector<bool>& legal,
                    RandomStream& rng);
  // Reward for the most recent select_action; completes the pending row at
  // episode end, otherwise holds it until the next action is known.
  void observe_reward(double reward, bool done);

  // Posterior mean/variance per action at a belief vector. An action absent
  // from the dictionary scores mean 0 at prior variance.
  std::vector<GpStat> q_stats(const std::vector<double>& features) const;
  std::vector<double> q_values(const std::vector<double>& features) const;

  void set_training(bool training) override { training_ = training; }
  int dict_size() const { return static_cast<int>(entry_action_.size()); }

  // Dictionary + mean coefficients. A restored learner replays the trained
  // greedy behaviour exactly, but the posterior spread is not kept: it reports
  // prior variance and refuses further training.
  std::string checkpoint_json() const;
  void restore_checkpoint_json(const std::string& text);

 private:
  // Per-action dictionary block with its own kernel-matrix inverse.
  struct Block {
    std::vector<std::vector<double>> points;
    std::vector<int> global;       // row in the shared posterior per point
    std::vector<double> kinv;      // n x n, row-major
  };

  struct Projection {
    std::vector<double> coeffs;  // onto the action's block, block order
    double residual = 0.0;
  };

  Projection project(const std::vector<double>& b, int action) const;
  bool consider_add(const std::vector<double>& b, int action);
  void add_point(const std::vector<double>& b, int action, const Projection& proj);
  void evict_lowest_residual();
  void apply_row(const std::vector<std::pair<int, double>>& h, double y);
  void complete_pending(const std::vector<double>* next_b, int next_action);
  GpStat stat_at(const std::vector<double>& b, int action) const;

  const ItemSet* domain_ = nullptr;
  GpConfig config_;
  bool with_group_ = false;
  int n_actions_ = 0;
  bool training_ = true;
  bool eval_only_ = false;  // set by checkpoint restore

  std::vector<Block> blocks_;       // one per action
  std::vector<int> entry_action_;   // global id -> action
  std::vector<int> entry_pos_;      // global id -> position inside its block
  std::vector<double> mu_;          // posterior mean over dictionary values
  std::vector<double> S_;           // posterior covariance, d x d row-major
  std::vector<double> alpha_;       // restored-checkpoint mean coefficients

  bool have_pending_ = false;
  bool have_reward_ = false;
  std::vector<double> pending_b_;
  int pending_action_ = 0;
  double pending_reward_ = 0.0;
};

}  // namespace dialmark
