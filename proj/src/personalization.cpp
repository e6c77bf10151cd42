#include "dialmark/personalization.hpp"

namespace dialmark {

SegmentedPolicy::SegmentedPolicy(std::unique_ptr<TrainablePolicy> layperson,
                                 std::unique_ptr<TrainablePolicy> expert) {
  if (!layperson || !expert) throw std::invalid_argument("segmented policy needs both learners");
  seg_[0] = std::move(layperson);
  seg_[1] = std::move(expert);
}

void SegmentedPolicy::on_user_group(int group) { active_ = segment_of_group(group); }

void SegmentedPolicy::begin_episode(RandomStream& rng) {
  ++routed_[active_];
  seg_[active_]->begin_episode(rng);
}

int SegmentedPolicy::act(const BeliefTracker& t, const std::vector<bool>& legal,
                         RandomStream& rng) {
  return seg_[active_]->act(t, legal, rng);
}

void SegmentedPolicy::hear(const SystemAct& last_system, const std::vector<ScoredUserAct>& acts) {
  seg_[active_]->hear(last_system, acts);
}

void SegmentedPolicy::observe(double reward, const BeliefTracker& next,
                              const std::vector<bool>& legal_next, bool done) {
  seg_[active_]->observe(reward, next, legal_next, done);
}

int SegmentedPolicy::recommend_override(const BeliefTracker& t, RandomStream& rng) {
  return seg_[active_]->recommend_override(t, rng);
}

void SegmentedPolicy::set_training(bool training) {
  seg_[0]->set_training(training);
  seg_[1]->set_training(training);
}

}  // namespace dialmark
