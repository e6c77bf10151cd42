#pragma once

#include <vector>

#include "dialmark/acts.hpp"
#include "dialmark/ontology.hpp"
#include "dialmark/rng.hpp"

namespace dialmark {

// A sampled user: expertise group, the item their constraints were seeded
// from, the constraints themselves, and how many fruitless turns they sit
// through before hanging up.
struct UserProfile {
  bool expert = false;
  int goal_item = -1;
  ConstraintSet constraints;
  int patience = 0;
};

struct UserSimConfig {
  double p_volunteer = 0.3;       // chance of adding an unprompted inform
  double p_repeat = 0.1;          // chance of restating old evidence instead of null
  double null_substitution = 0.0; // chance an inform answer degrades to null
};

inline UserSimConfig friendly_user_config() { return {0.3, 0.1, 0.0}; }
inline UserSimConfig unfriendly_user_config() { return {0.0, 0.1, 0.4}; }

// Laypersons constrain 1-3 group-1 slots; experts constrain exactly 3
// constrainable slots drawn with double weight on the slots only they can
// see. Values come from a uniformly drawn seed item, so the target set is
// never empty. Patience is uniform on {12..20}.
UserProfile sample_user_profile(const ItemSet& domain, RandomStream& rng);

// Deterministic-given-rng scripted user. Produces the true acts of one user
// turn; corruption and confidence scoring happen elsewhere.
class UserSimulator {
 public:
  UserSimulator(const ItemSet& domain, UserSimConfig config, RandomStream rng);

  void begin(const UserProfile& profile);
  std::vector<UserAct> respond(const SystemAct& system);

  bool hung_up() const { return hung_up_; }
  bool accepted() const { return accepted_; }
  const UserProfile& profile() const { return profile_; }

 private:
  UserAct main_response(const SystemAct& system);
  bool conveyed(int slot) const;

  const ItemSet* domain_;
  UserSimConfig config_;
  RandomStream rng_;
  UserProfile profile_;
  std::vector<int> conveyed_;  // constrained slots the user has stated
  int fruitless_ = 0;          // consecutive null/deny main acts
  bool hung_up_ = false;
  bool accepted_ = false;
};

// Speech-understanding channel: with probability err_rate the act is swapped
// for a confusable one (inform value -> another value of the same slot,
// affirm <-> deny, anything else -> null) and scored with a low-confidence
// draw; otherwise it passes through with a high-confidence draw.
ScoredUserAct corrupt_user_act(const ItemSet& domain, const UserAct& act, double err_rate,
                               RandomStream& rng);

}  // namespace dialmark
