#pragma once

#include <algorithm>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "dialmark/dialog.hpp"
#include "dialmark/mlp.hpp"

namespace dialmark {

// Linear anneal from eps_start to eps_end over `horizon` dialogues, constant
// afterwards.
struct EpsilonSchedule {
  double eps_start = 0.5;
  double eps_end = 0.05;
  int horizon = 4000;
  double operator()(int dialogue) const {
    double f = horizon > 0 ? std::min(1.0, static_cast<double>(dialogue) / horizon) : 1.0;
    return eps_start + (eps_end - eps_start) * f;
  }
};

// Greedy pick over allowed actions, ties to the lowest index. Throws
// ContractViolation when nothing is allowed.
int argmax_allowed(const std::vector<double>& q, const std::vector<bool>& legal);

// Per-turn reward stream of a finished episode: -1 each system turn, +20 on
// the final turn iff successful. Sums to the episode return.
std::vector<double> decompose_reward(int length, bool success);

struct Transition {
  std::vector<double> b;
  int a = 0;
  double r = 0.0;
  std::vector<double> b_next;      // unused when terminal
  std::vector<bool> legal_next;    // action mask at b_next
  bool terminal = false;
};

struct DqnConfig {
  std::vector<int> hidden{300, 100};
  double lr = 0.001;
  double gamma = 1.0;
  int replay_capacity = 2000;
  int batch_size = 64;
  int target_sync = 100;  // online->target copy period, in updates
  EpsilonSchedule eps;
};

class DqnPolicy : public TrainablePolicy {
 public:
  // Network shaped by the domain featurization (the benchmark route).
  DqnPolicy(const ItemSet& domain, DqnConfig config, bool with_group, RandomStream init_rng);
  // Explicit input/action dimensions, for controlled experiments on synthetic
  // tasks. act()/observe() featurize, so drive this form through
  // select_action()/record() instead.
  DqnPolicy(int n_inputs, int n_actions, DqnConfig config, RandomStream init_rng);

  void begin_episode(RandomStream& rng) override;
  int act(const BeliefTracker& t, const std::vector<bool>& legal, RandomStream& rng) override;
  void observe(double reward, const BeliefTracker& next, const std::vector<bool>& legal_next,
               bool done) override;

  // Action choice on a raw feature vector: while training, uniform over the
  // allowed actions with probability ε(current dialogue), otherwise greedy
  // (ties -> lowest index). Evaluation is always greedy.
  int select_action(const std::vector<double>& features, const std::vector<bool>& legal,
                    RandomStream& rng);
  // Pushes one transition into the replay window and, once it holds a full
  // batch, takes one gradient step. No-op when not training.
  void record(Transition tr);

  void set_training(bool training) override { training_ = training; }
  int episodes_begun() const { return episodes_; }
  int replay_size() const { return static_cast<int>(replay_.size()); }
  std::vector<double> q_values(const std::vector<double>& features) const {
    return online_.forward(features);
  }
  // One gradient step on a batch (exposed for unit tests); returns mean
  // squared TD error before the step.
  double update(const std::vector<Transition>& batch);

  std::string checkpoint_json() const;
  void restore_checkpoint_json(const std::string& text);

 private:
  const ItemSet* domain_;
  DqnConfig config_;
  bool with_group_;
  Mlp online_, target_;
  RandomStream replay_rng_;
  std::deque<Transition> replay_;
  bool training_ = true;
  int episodes_ = 0;
  long updates_ = 0;

  bool pending_ = false;  // transition awaiting its outcome
  std::vector<double> last_features_;
  int last_action_ = 0;
};

}  // namespace dialmark
