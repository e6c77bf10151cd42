#include "dialmark/dialog.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace dialmark {

EnvConfig benchmark_env(int idx) {
  switch (idx) {
    case 1: return {0.00, true, friendly_user_config()};
    case 2: return {0.00, false, friendly_user_config()};
    case 3: return {0.15, true, friendly_user_config()};
    case 4: return {0.15, false, friendly_user_config()};
    case 5: return {0.15, false, unfriendly_user_config()};
    case 6: return {0.30, true, friendly_user_config()};
  }
  throw std::out_of_range("environment index must be 1..6");
}

std::string env_name(int idx) { return "env" + std::to_string(idx); }

std::string summary_action_name(const ItemSet& domain, const BeliefTracker& t, int action) {
  int n_c = t.n_constrainable();
  if (action < n_c) return "request_" + domain.slots[t.domain_slot(action)].name;
  if (action < 2 * n_c) return "confirm_" + domain.slots[t.domain_slot(action - n_c)].name;
  if (action < 3 * n_c) return "select_" + domain.slots[t.domain_slot(action - 2 * n_c)].name;
  if (action == recommend_action(n_c)) return "recommend";
  return "bye";
}

std::vector<bool> legal_summary_actions(const BeliefTracker& t, const EnvConfig& cfg) {
  int n_c = t.n_constrainable();
  std::vector<bool> legal(n_summary_actions(n_c), true);
  if (!cfg.action_masks) return legal;
  for (int ci = 0; ci < n_c; ++ci) {
    legal[request_action(ci)] = !t.requested(ci);
    bool heard = t.slot(ci).observed_mass() > 0.01;
    legal[confirm_action(n_c, ci)] = heard;
    legal[select_action(n_c, ci)] = heard;
  }
  legal[bye_action(n_c)] = t.recommended_any();
  return legal;
}

int recommend_item(const ItemSet& domain, const BeliefTracker& t, double theta) {
  std::vector<int> pool = t.candidates(theta);
  if (pool.empty()) {
    pool.resize(domain.n_items());
    for (int i = 0; i < domain.n_items(); ++i) pool[i] = i;
  }
  int best = pool[0];
  double best_score = -1.0;
  for (int i : pool) {
    double score = 1.0;
    for (int ci = 0; ci < t.n_constrainable(); ++ci) {
      const SlotBelief& b = t.slot(ci);
      score *= b.p[domain.items[i].assignment[t.domain_slot(ci)]] + b.none + b.residual;
    }
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

SystemAct to_master_act(const ItemSet& domain, const BeliefTracker& t, int action, double theta) {
  int n_c = t.n_constrainable();
  if (action < n_c) return SystemAct::make_request(t.domain_slot(action));
  if (action < 2 * n_c) {
    int ci = action - n_c;
    int v = t.slot(ci).top_value();
    return SystemAct::make_confirm(t.domain_slot(ci), std::max(v, 0));
  }
  if (action < 3 * n_c) {
    int ci = action - 2 * n_c;
    const SlotBelief& b = t.slot(ci);
    int v1 = std::max(b.top_value(), 0);
    int v2 = -1;
    double best = -1.0;
    for (size_t v = 0; v < b.p.size(); ++v)
      if (static_cast<int>(v) != v1 && b.p[v] > best) {
        best = b.p[v];
        v2 = static_cast<int>(v);
      }
    if (v2 < 0) v2 = (v1 + 1) % static_cast<int>(b.p.size());
    return SystemAct::make_select(t.domain_slot(ci), v1, v2);
  }
  if (action == recommend_action(n_c))
    return SystemAct::make_recommend(recommend_item(domain, t, theta));
  return SystemAct::make_bye();
}

std::string episode_to_jsonl(const ItemSet& domain, const EpisodeRecord& rec) {
  nlohmann::ordered_json j;
  j["user"] = {{"group", rec.user.expert ? "expert" : "layperson"},
               {"goal_item", domain.items[rec.user.goal_item].id},
               {"patience", rec.user.patience}};
  nlohmann::ordered_json cons = nlohmann::ordered_json::object();
  for (size_t f = 0; f < rec.user.constraints.required.size(); ++f)
    if (rec.user.constraints.required[f] >= 0)
      cons[domain.slots[f].name] = domain.slots[f].values[rec.user.constraints.required[f]];
  j["user"]["constraints"] = cons;
  j["length"] = rec.length;
  j["success"] = rec.success;
  j["hung_up"] = rec.hung_up;
  j["return"] = rec.ret;
  j["turns"] = nlohmann::ordered_json::array();
  for (const auto& turn : rec.turns) {
    nlohmann::ordered_json jt;
    jt["sys"] = to_string(domain, turn.system);
    jt["user"] = nlohmann::ordered_json::array();
    for (const auto& a : turn.true_acts) jt["user"].push_back(to_string(domain, a));
    jt["heard"] = nlohmann::ordered_json::array();
    for (const auto& h : turn.heard_acts)
      jt["heard"].push_back({{"act", to_string(domain, h.act)},
                             {"conf", std::round(h.confidence * 1000.0) / 1000.0}});
    jt["r"] = turn.reward;
    j["turns"].push_back(jt);
  }
  return j.dump();
}

DialogEngine::DialogEngine(const ItemSet& domain, EnvConfig cfg) : domain_(&domain), cfg_(cfg) {}

EpisodeRecord DialogEngine::run_episode(Policy& policy, RandomStream rng, bool transcript) {
  RandomStream profile_rng = rng.substream("profile");
  return run_episode(policy, rng, sample_user_profile(*domain_, profile_rng), transcript);
}

EpisodeRecord DialogEngine::run_episode(Policy& policy, RandomStream rng,
                                        const UserProfile& profile, bool transcript) {
  RandomStream user_rng = rng.substream("user");
  RandomStream error_rng = rng.substream("error");
  RandomStream policy_rng = rng.substream("policy");

  UserSimulator sim(*domain_, cfg_.user, user_rng);
  sim.begin(profile);
  BeliefTracker tracker(*domain_, cfg_.max_turns);
  policy.on_user_group(profile.expert ? 1 : 0);
  policy.begin_episode(policy_rng);

  EpisodeRecord rec;
  rec.user = profile;

  for (int t = 1; t <= cfg_.max_turns; ++t) {
    std::vector<bool> legal = legal_summary_actions(tracker, cfg_);
    int action = policy.act(tracker, legal, policy_rng);
    if (action < 0 || action >= static_cast<int>(legal.size()))
      throw ContractViolation("summary action id out of range");
    if (cfg_.action_masks && !legal[action])
      throw ContractViolation("policy chose masked action " +
                              summary_action_name(*domain_, tracker, action));

    SystemAct master;
    if (action == recommend_action(tracker.n_constrainable())) {
      int item = policy.recommend_override(tracker, policy_rng);
      master = SystemAct::make_recommend(
          item >= 0 ? item : recommend_item(*domain_, tracker, cfg_.theta_accept));
    } else {
      master = to_master_act(*domain_, tracker, action, cfg_.theta_accept);
    }
    tracker.observe_system(master);

    double reward = -1.0;
    rec.length = t;
    bool done = false;

    TurnRecord turn;
    turn.system = master;

    if (master.kind == SystemActKind::bye) {
      done = true;
    } else {
      std::vector<UserAct> true_acts = sim.respond(master);
      std::vector<ScoredUserAct> heard;
      for (const UserAct& a : true_acts)
        heard.push_back(corrupt_user_act(*domain_, a, cfg_.error_rate, error_rng));
      turn.true_acts = true_acts;
      turn.heard_acts = heard;

      if (sim.accepted()) {
        reward += 20.0;
        rec.success = true;
        done = true;
      } else if (sim.hung_up()) {
        rec.hung_up = true;
        done = true;
      } else {
        tracker.observe_user(master, heard);
        policy.hear(master, heard);
      }
    }
    if (t == cfg_.max_turns) done = true;

    rec.ret += reward;
    turn.reward = reward;
    if (transcript) rec.turns.push_back(turn);

    std::vector<bool> legal_next =
        done ? std::vector<bool>() : legal_summary_actions(tracker, cfg_);
    policy.observe(reward, tracker, legal_next, done);
    if (done) break;
  }
  return rec;
}

}  // namespace dialmark
