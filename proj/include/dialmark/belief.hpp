#pragma once

#include <vector>

#include "dialmark/acts.hpp"
#include "dialmark/ontology.hpp"

namespace dialmark {

// Focus-style belief over one slot. Mass is split between concrete values,
// "user does not care" (none), and "nothing heard yet" (residual); the three
// parts always sum to 1.
struct SlotBelief {
  std::vector<double> p;
  double none = 0.0;
  double residual = 1.0;

  explicit SlotBelief(int n_values = 0) : p(n_values, 0.0) {}

  // Evidence for value v with confidence c: keep 1-c of the old belief, move
  // c onto v. Repeated consistent evidence converges toward certainty.
  void update_inform(int v, double c);

  // Non-answer to a question about this slot; moves half the confidence mass
  // toward "does not care" so unprompted slots drift to none, not to a value.
  void update_none(double c);

  // Rejection of value v with confidence c: c of v's mass leaves and is
  // spread over the remaining components in proportion to their mass
  // (uniformly over values+none when nothing else has mass yet).
  void update_deny(int v, double c);

  int top_value() const;          // argmax over concrete values, -1 if |V|=0
  double top_prob() const;        // mass of top_value, 0 when empty
  double observed_mass() const { return 1.0 - residual - none; }
  double sum() const;
};

// Dialogue-level belief state: per-slot beliefs over the constrainable slots
// plus the bookkeeping a policy conditions on (what was asked, what came
// back, how far along the dialogue is) and a two-way posterior over the
// user's expertise group.
class BeliefTracker {
 public:
  explicit BeliefTracker(const ItemSet& domain, int max_turns = 30);

  void begin_dialogue();
  void observe_system(const SystemAct& act);
  void observe_user(const SystemAct& last_system, const std::vector<ScoredUserAct>& acts);

  int n_constrainable() const { return static_cast<int>(cons_.size()); }
  int domain_slot(int ci) const { return cons_[ci]; }
  int constrainable_index(int domain_slot) const;  // -1 when not constrainable
  const SlotBelief& slot(int ci) const { return beliefs_[ci]; }
  bool requested(int ci) const { return requested_[ci]; }
  bool recommended_any() const { return recommended_any_; }
  int turn() const { return turn_; }

  // Hard constraints: slots whose top value holds at least theta of the mass.
  ConstraintSet committed(double theta) const;
  std::vector<int> candidates(double theta) const;

  // [p_layperson, p_expert]
  const std::vector<double>& group_posterior() const { return group_; }

  // Flat policy features: per-slot value masses and none mass, then one-hot
  // last system act kind, per-slot asked flags, recommended flag, elapsed-turn
  // and candidate-set fractions. with_group appends the group posterior.
  std::vector<double> featurize(bool with_group) const;
  int feature_dim(bool with_group) const;

 private:
  const ItemSet* domain_;
  int max_turns_;
  std::vector<int> cons_;  // ci -> domain slot index
  std::vector<SlotBelief> beliefs_;
  std::vector<bool> requested_;
  int last_kind_ = -1;  // index into SystemActKind, -1 before first system act
  bool recommended_any_ = false;
  int turn_ = 0;
  std::vector<double> group_;
};

}  // namespace dialmark
