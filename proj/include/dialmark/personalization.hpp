#pragma once

#include <memory>
#include <stdexcept>

#include "dialmark/dialog.hpp"

namespace dialmark {

// Segment assignment over the two user groups (0 = layperson, 1 = expert).
// The groups are announced with certainty, so the map is the identity.
inline int segment_of_group(int group) {
  if (group != 0 && group != 1) throw std::invalid_argument("unknown user group");
  return group;
}

// Personalization by segmentation: one independent learner per user group,
// with every episode routed wholesale to the learner owning that group. The
// learners never see the group itself — only their own share of dialogues —
// so each one's feature stream is untouched by who is on the line.
class SegmentedPolicy : public TrainablePolicy {
 public:
  SegmentedPolicy(std::unique_ptr<TrainablePolicy> layperson,
                  std::unique_ptr<TrainablePolicy> expert);

  void on_user_group(int group) override;
  void begin_episode(RandomStream& rng) override;
  int act(const BeliefTracker& t, const std::vector<bool>& legal, RandomStream& rng) override;
  void hear(const SystemAct& last_system, const std::vector<ScoredUserAct>& acts) override;
  void observe(double reward, const BeliefTracker& next, const std::vector<bool>& legal_next,
               bool done) override;
  int recommend_override(const BeliefTracker& t, RandomStream& rng) override;
  void set_training(bool training) override;

  TrainablePolicy& segment(int g) { return *seg_[segment_of_group(g)]; }
  // Episodes begun per segment, training and evaluation alike.
  int episodes_routed(int g) const { return routed_[segment_of_group(g)]; }

 private:
  std::unique_ptr<TrainablePolicy> seg_[2];
  int active_ = 0;
  int routed_[2] = {0, 0};
};

}  // namespace dialmark
