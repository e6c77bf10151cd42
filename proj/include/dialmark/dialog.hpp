#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dialmark/acts.hpp"
#include "dialmark/belief.hpp"
#include "dialmark/ontology.hpp"
#include "dialmark/usersim.hpp"

namespace dialmark {

// Environment knobs: understanding-error rate, whether illegal summary
// actions are pruned for the policy, and how the user behaves.
struct EnvConfig {
  double error_rate = 0.0;
  bool action_masks = true;
  UserSimConfig user = friendly_user_config();
  int max_turns = 30;
  double theta_accept = 0.5;
};

// The six benchmark environments, 1-based.
EnvConfig benchmark_env(int idx);
std::string env_name(int idx);
constexpr int kNumEnvs = 6;

// Summary action ids over n_c constrainable slots:
// [0, n_c) request, [n_c, 2n_c) confirm, [2n_c, 3n_c) select,
// 3n_c recommend, 3n_c+1 bye.
inline int n_summary_actions(int n_c) { return 3 * n_c + 2; }
inline int request_action(int ci) { return ci; }
inline int confirm_action(int n_c, int ci) { return n_c + ci; }
inline int select_action(int n_c, int ci) { return 2 * n_c + ci; }
inline int recommend_action(int n_c) { return 3 * n_c; }
inline int bye_action(int n_c) { return 3 * n_c + 1; }

std::string summary_action_name(const ItemSet& domain, const BeliefTracker& t, int action);

// Legality under masks: no re-requesting, confirm/select only with observed
// evidence on the slot, bye only after a recommendation; recommend is always
// available. With masks off every action is legal.
std::vector<bool> legal_summary_actions(const BeliefTracker& t, const EnvConfig& cfg);

// Deterministic item choice for the recommend action: candidates compatible
// with the committed constraints, ranked by how much belief mass each item's
// value draws per slot (counting none/unheard mass as compatible).
int recommend_item(const ItemSet& domain, const BeliefTracker& t, double theta);

// Summary -> master act against the current belief (confirm takes the top
// value, select the top two, recommend the ranked item).
SystemAct to_master_act(const ItemSet& domain, const BeliefTracker& t, int action, double theta);

// Thrown when a policy picks an action the mask ruled out.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

struct TurnRecord {
  SystemAct system;
  std::vector<UserAct> true_acts;
  std::vector<ScoredUserAct> heard_acts;
  double reward = 0.0;
};

struct EpisodeRecord {
  UserProfile user;
  int length = 0;
  bool success = false;
  bool hung_up = false;
  double ret = 0.0;
  std::vector<TurnRecord> turns;  // filled only when transcripts are requested
};

std::string episode_to_jsonl(const ItemSet& domain, const EpisodeRecord& rec);

// Anything that can drive the system side of a dialogue. Learners override
// the feedback hooks; scripted baselines typically only need act() and
// hear().
class Policy {
 public:
  virtual ~Policy() = default;
  // User group for the upcoming episode (0 = layperson, 1 = expert), announced
  // before begin_episode. Known with certainty out-of-band; routing wrappers
  // use it, learners must not.
  virtual void on_user_group(int /*group*/) {}
  virtual void begin_episode(RandomStream& /*rng*/) {}
  virtual int act(const BeliefTracker& t, const std::vector<bool>& legal, RandomStream& rng) = 0;
  // Raw (possibly corrupted) user acts, before the next act() call.
  virtual void hear(const SystemAct& /*last_system*/,
                    const std::vector<ScoredUserAct>& /*acts*/) {}
  // Reward for the system turn just taken and the resulting state.
  virtual void observe(double /*reward*/, const BeliefTracker& /*next*/,
                       const std::vector<bool>& /*legal_next*/, bool /*done*/) {}
  // Evidence-based policies pick their own item for the recommend action;
  // return -1 to use the default belief ranking.
  virtual int recommend_override(const BeliefTracker& /*t*/, RandomStream& /*rng*/) {
    return -1;
  }
};

// A policy whose behaviour differs between learning and frozen evaluation.
class TrainablePolicy : public Policy {
 public:
  virtual void set_training(bool training) = 0;
};

class DialogEngine {
 public:
  DialogEngine(const ItemSet& domain, EnvConfig cfg);

  // Samples a user profile from the stream and plays one dialogue.
  EpisodeRecord run_episode(Policy& policy, RandomStream rng, bool transcript = false);
  // Fixed-profile variant for controlled experiments.
  EpisodeRecord run_episode(Policy& policy, RandomStream rng, const UserProfile& profile,
                            bool transcript = false);

  const EnvConfig& config() const { return cfg_; }

 private:
  const ItemSet* domain_;
  EnvConfig cfg_;
};

}  // namespace dialmark
