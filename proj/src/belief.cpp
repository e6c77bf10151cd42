#include "dialmark/belief.hpp"

#include <algorithm>
#include <cassert>

namespace dialmark {

void SlotBelief::update_inform(int v, double c) {
  for (double& x : p) x *= 1.0 - c;
  none *= 1.0 - c;
  residual *= 1.0 - c;
  p[v] += c;
}

void SlotBelief::update_none(double c) {
  double a = 0.5 * c;
  for (double& x : p) x *= 1.0 - a;
  none *= 1.0 - a;
  residual *= 1.0 - a;
  none += a;
}

void SlotBelief::update_deny(int v, double c) {
  double m = c * p[v];
  if (m <= 0.0) return;
  p[v] -= m;
  double rest = none + residual;
  for (size_t i = 0; i < p.size(); ++i)
    if (static_cast<int>(i) != v) rest += p[i];
  if (rest > 1e-12) {
    double scale = m / rest;
    for (size_t i = 0; i < p.size(); ++i)
      if (static_cast<int>(i) != v) p[i] += p[i] * scale;
    none += none * scale;
    residual += residual * scale;
  } else {
    // v held everything; spread evenly over the other values and none.
    double share = m / static_cast<double>(p.size());  // |V|-1 others + none
    for (size_t i = 0; i < p.size(); ++i)
      if (static_cast<int>(i) != v) p[i] += share;
    none += share;
  }
}

int SlotBelief::top_value() const {
  if (p.empty()) return -1;
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double SlotBelief::top_prob() const {
  int v = top_value();
  return v < 0 ? 0.0 : p[v];
}

double SlotBelief::sum() const {
  double s = none + residual;
  for (double x : p) s += x;
  return s;
}

BeliefTracker::BeliefTracker(const ItemSet& domain, int max_turns)
    : domain_(&domain), max_turns_(max_turns), cons_(domain.constrainable_slots()) {
  begin_dialogue();
}

void BeliefTracker::begin_dialogue() {
  beliefs_.clear();
  for (int f : cons_) beliefs_.emplace_back(static_cast<int>(domain_->slots[f].values.size()));
  requested_.assign(cons_.size(), false);
  last_kind_ = -1;
  recommended_any_ = false;
  turn_ = 0;
  group_ = {0.5, 0.5};
}

int BeliefTracker::constrainable_index(int domain_slot) const {
  for (size_t i = 0; i < cons_.size(); ++i)
    if (cons_[i] == domain_slot) return static_cast<int>(i);
  return -1;
}

void BeliefTracker::observe_system(const SystemAct& act) {
  last_kind_ = static_cast<int>(act.kind);
  ++turn_;
  if (act.kind == SystemActKind::request || act.kind == SystemActKind::select) {
    int ci = constrainable_index(act.slot);
    if (ci >= 0) requested_[ci] = true;
  }
  if (act.kind == SystemActKind::recommend) recommended_any_ = true;
}

void BeliefTracker::observe_user(const SystemAct& last_system,
                                 const std::vector<ScoredUserAct>& acts) {
  bool asked_slot = last_system.kind == SystemActKind::request ||
                    last_system.kind == SystemActKind::select;
  int asked_ci = asked_slot ? constrainable_index(last_system.slot) : -1;
  int confirm_ci = last_system.kind == SystemActKind::confirm
                       ? constrainable_index(last_system.slot)
                       : -1;

  for (const auto& [act, c] : acts) {
    switch (act.kind) {
      case UserActKind::inform: {
        int ci = constrainable_index(act.slot);
        if (ci < 0) break;
        beliefs_[ci].update_inform(act.value, c);
        // Group evidence: only one group ever volunteers values for slots the
        // other group cannot see.
        if (domain_->slots[act.slot].visibility == GroupVisibility::group2_only) {
          group_[0] *= 0.05;
        } else {
          group_[1] *= 0.45;
        }
        break;
      }
      case UserActKind::affirm:
        if (confirm_ci >= 0) beliefs_[confirm_ci].update_inform(last_system.value, c);
        break;
      case UserActKind::deny:
        if (confirm_ci >= 0) beliefs_[confirm_ci].update_deny(last_system.value, c);
        break;
      case UserActKind::null_act:
        if (asked_ci >= 0) {
          beliefs_[asked_ci].update_none(c);
          if (domain_->slots[last_system.slot].visibility == GroupVisibility::group2_only)
            group_[1] *= 0.7;
          else
            group_[0] *= 0.4;
        }
        break;
      case UserActKind::bye:
        break;
    }
  }
  double z = group_[0] + group_[1];
  if (z > 0) {
    group_[0] /= z;
    group_[1] /= z;
  }
}

ConstraintSet BeliefTracker::committed(double theta) const {
  ConstraintSet cs(domain_->n_slots());
  for (size_t ci = 0; ci < cons_.size(); ++ci)
    if (beliefs_[ci].top_prob() >= theta) cs.set(cons_[ci], beliefs_[ci].top_value());
  return cs;
}

std::vector<int> BeliefTracker::candidates(double theta) const {
  return filter_candidates(*domain_, committed(theta));
}

int BeliefTracker::feature_dim(bool with_group) const {
  int d = 0;
  for (int f : cons_) d += static_cast<int>(domain_->slots[f].values.size()) + 1;
  d += 5 + n_constrainable() + 1 + 1 + 1;
  if (with_group) d += 2;
  return d;
}

std::vector<double> BeliefTracker::featurize(bool with_group) const {
  std::vector<double> x;
  x.reserve(feature_dim(with_group));
  for (const auto& b : beliefs_) {
    x.insert(x.end(), b.p.begin(), b.p.end());
    x.push_back(b.none);
  }
  for (int k = 0; k < 5; ++k) x.push_back(last_kind_ == k ? 1.0 : 0.0);
  for (bool r : requested_) x.push_back(r ? 1.0 : 0.0);
  x.push_back(recommended_any_ ? 1.0 : 0.0);
  x.push_back(std::min(1.0, static_cast<double>(turn_) / max_turns_));
  x.push_back(static_cast<double>(candidates(0.5).size()) / domain_->n_items());
  if (with_group) {
    x.push_back(group_[0]);
    x.push_back(group_[1]);
  }
  assert(static_cast<int>(x.size()) == feature_dim(with_group));
  return x;
}

}  // namespace dialmark
