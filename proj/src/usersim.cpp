#include "dialmark/usersim.hpp"

#include <algorithm>

namespace dialmark {

UserProfile sample_user_profile(const ItemSet& domain, RandomStream& rng) {
  UserProfile p;
  p.expert = rng.bernoulli(0.5);
  p.goal_item = rng.uniform_int(domain.n_items());
  p.constraints = ConstraintSet(domain.n_slots());
  const Item& seed = domain.items[p.goal_item];

  if (p.expert) {
    // Three distinct slots, group-2-only ones twice as likely per draw.
    std::vector<int> pool = domain.constrainable_slots();
    for (int k = 0; k < 3 && !pool.empty(); ++k) {
      double total = 0.0;
      for (int f : pool)
        total += domain.slots[f].visibility == GroupVisibility::group2_only ? 2.0 : 1.0;
      double r = rng.uniform01() * total;
      size_t pick = 0;
      for (size_t i = 0; i < pool.size(); ++i) {
        r -= domain.slots[pool[i]].visibility == GroupVisibility::group2_only ? 2.0 : 1.0;
        if (r <= 0.0) {
          pick = i;
          break;
        }
      }
      p.constraints.set(pool[pick], seed.assignment[pool[pick]]);
      pool.erase(pool.begin() + pick);
    }
  } else {
    std::vector<int> g1 = domain.group1_slots();
    int k = 1 + rng.uniform_int(std::min(3, static_cast<int>(g1.size())));
    for (int i : rng.sample_indices(static_cast<int>(g1.size()), k))
      p.constraints.set(g1[i], seed.assignment[g1[i]]);
  }

  p.patience = 18 + rng.uniform_int(9);
  return p;
}

UserSimulator::UserSimulator(const ItemSet& domain, UserSimConfig config, RandomStream rng)
    : domain_(&domain), config_(config), rng_(rng) {}

void UserSimulator::begin(const UserProfile& profile) {
  profile_ = profile;
  conveyed_.clear();
  fruitless_ = 0;
  hung_up_ = false;
  accepted_ = false;
}

bool UserSimulator::conveyed(int slot) const {
  return std::find(conveyed_.begin(), conveyed_.end(), slot) != conveyed_.end();
}

UserAct UserSimulator::main_response(const SystemAct& system) {
  const ConstraintSet& cs = profile_.constraints;
  switch (system.kind) {
    case SystemActKind::request:
    case SystemActKind::select: {
      int f = system.slot;
      if (cs.constrains(f)) {
        if (config_.null_substitution > 0.0 && rng_.bernoulli(config_.null_substitution))
          return UserAct::make_null();
        if (!conveyed(f)) conveyed_.push_back(f);
        return UserAct::make_inform(f, cs.required[f]);
      }
      if (!conveyed_.empty() && rng_.bernoulli(config_.p_repeat)) {
        int f2 = conveyed_[rng_.uniform_int(static_cast<int>(conveyed_.size()))];
        return UserAct::make_inform(f2, cs.required[f2]);
      }
      return UserAct::make_null();
    }
    case SystemActKind::confirm: {
      int f = system.slot;
      if (!cs.constrains(f)) return UserAct::make_null();
      if (cs.required[f] == system.value) {
        if (!conveyed(f)) conveyed_.push_back(f);
        return UserAct::make_affirm();
      }
      return UserAct::make_deny();
    }
    case SystemActKind::recommend:
      if (cs.satisfied_by(domain_->items[system.item])) {
        accepted_ = true;
        return UserAct::make_affirm();
      }
      return UserAct::make_deny();
    case SystemActKind::bye:
      return UserAct::make_null();
  }
  return UserAct::make_null();
}

std::vector<UserAct> UserSimulator::respond(const SystemAct& system) {
  if (hung_up_ || accepted_) return {};

  UserAct main = main_response(system);
  if (main.kind == UserActKind::null_act || main.kind == UserActKind::deny)
    ++fruitless_;
  else
    fruitless_ = 0;

  if (!accepted_ && fruitless_ >= profile_.patience) {
    hung_up_ = true;
    return {UserAct::make_bye()};
  }

  std::vector<UserAct> acts = {main};
  bool volunteerable = main.kind == UserActKind::inform || main.kind == UserActKind::null_act ||
                       main.kind == UserActKind::deny;
  if (volunteerable && !accepted_ && rng_.bernoulli(config_.p_volunteer)) {
    std::vector<int> fresh;
    for (size_t f = 0; f < profile_.constraints.required.size(); ++f)
      if (profile_.constraints.required[f] >= 0 && !conveyed(static_cast<int>(f)))
        fresh.push_back(static_cast<int>(f));
    if (!fresh.empty()) {
      int f = fresh[rng_.uniform_int(static_cast<int>(fresh.size()))];
      conveyed_.push_back(f);
      acts.push_back(UserAct::make_inform(f, profile_.constraints.required[f]));
    }
  }
  return acts;
}

ScoredUserAct corrupt_user_act(const ItemSet& domain, const UserAct& act, double err_rate,
                               RandomStream& rng) {
  ScoredUserAct out{act, 1.0};
  bool corrupted = err_rate > 0.0 && rng.bernoulli(err_rate);
  if (corrupted) {
    switch (act.kind) {
      case UserActKind::inform: {
        int n = static_cast<int>(domain.slots[act.slot].values.size());
        if (n > 1) {
          int v = rng.uniform_int(n - 1);
          out.act.value = v >= act.value ? v + 1 : v;
        }
        break;
      }
      case UserActKind::affirm:
        out.act = UserAct::make_deny();
        break;
      case UserActKind::deny:
        out.act = UserAct::make_affirm();
        break;
      case UserActKind::null_act:
      case UserActKind::bye:
        break;  // nothing confusable to swap in
    }
  }
  out.confidence = corrupted ? rng.beta(5.0, 5.0) : rng.beta(16.0, 4.0);
  return out;
}

}  // namespace dialmark
