#include "dialmark/rl.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace dialmark {

int argmax_allowed(const std::vector<double>& q, const std::vector<bool>& legal) {
  int best = -1;
  for (std::size_t a = 0; a < q.size(); ++a) {
    if (!legal[a]) continue;
    if (best < 0 || q[a] > q[best]) best = static_cast<int>(a);
  }
  if (best < 0) throw ContractViolation("no action allowed by mask");
  return best;
}

std::vector<double> decompose_reward(int length, bool success) {
  std::vector<double> r(static_cast<std::size_t>(length), -1.0);
  if (success && length > 0) r.back() += 20.0;
  return r;
}

static std::vector<int> dqn_layer_sizes(int n_inputs, const DqnConfig& config, int n_actions) {
  std::vector<int> sizes;
  sizes.push_back(n_inputs);
  for (int h : config.hidden) sizes.push_back(h);
  sizes.push_back(n_actions);
  return sizes;
}

static std::vector<int> dqn_layer_sizes(const ItemSet& domain, const DqnConfig& config,
                                        bool with_group) {
  BeliefTracker probe(domain);
  return dqn_layer_sizes(probe.feature_dim(with_group), config,
                         n_summary_actions(probe.n_constrainable()));
}

DqnPolicy::DqnPolicy(const ItemSet& domain, DqnConfig config, bool with_group,
                     RandomStream init_rng)
    : domain_(&domain),
      config_(std::move(config)),
      with_group_(with_group),
      online_(dqn_layer_sizes(domain, config_, with_group), init_rng),
      target_(online_),
      replay_rng_(init_rng.substream("replay")) {}

DqnPolicy::DqnPolicy(int n_inputs, int n_actions, DqnConfig config, RandomStream init_rng)
    : domain_(nullptr),
      config_(std::move(config)),
      with_group_(false),
      online_(dqn_layer_sizes(n_inputs, config_, n_actions), init_rng),
      target_(online_),
      replay_rng_(init_rng.substream("replay")) {}

void DqnPolicy::begin_episode(RandomStream&) {
  if (training_) ++episodes_;
  pending_ = false;
}

int DqnPolicy::act(const BeliefTracker& t, const std::vector<bool>& legal, RandomStream& rng) {
  return select_action(t.featurize(with_group_), legal, rng);
}

int DqnPolicy::select_action(const std::vector<double>& features, const std::vector<bool>& legal,
                             RandomStream& rng) {
  int action;
  // Exploration is on only while training; evaluation is pure greedy.
  double eps = training_ ? config_.eps(episodes_ - 1) : 0.0;
  if (eps > 0.0 && rng.uniform01() < eps) {
    std::vector<int> allowed;
    for (std::size_t a = 0; a < legal.size(); ++a)
      if (legal[a]) allowed.push_back(static_cast<int>(a));
    if (allowed.empty()) throw ContractViolation("no action allowed by mask");
    action = allowed[rng.uniform_int(static_cast<int>(allowed.size()))];
  } else {
    action = argmax_allowed(online_.forward(features), legal);
  }
  last_features_ = features;
  last_action_ = action;
  pending_ = true;
  return action;
}

void DqnPolicy::observe(double reward, const BeliefTracker& next,
                        const std::vector<bool>& legal_next, bool done) {
  if (!training_ || !pending_) return;
  pending_ = false;

  Transition tr;
  tr.b = last_features_;
  tr.a = last_action_;
  tr.r = reward;
  tr.terminal = done;
  if (!done) {
    tr.b_next = next.featurize(with_group_);
    tr.legal_next = legal_next;
  }
  record(std::move(tr));
}

void DqnPolicy::record(Transition tr) {
  if (!training_) return;
  replay_.push_back(std::move(tr));
  if (static_cast<int>(replay_.size()) > config_.replay_capacity) replay_.pop_front();
  if (static_cast<int>(replay_.size()) < config_.batch_size) return;

  // One update per system turn: sample uniformly with replacement from the
  // replay window. The draw comes from a stream owned by this instance, so the
  // training path stays deterministic per cell without coupling to the
  // policy's action-selection stream.
  std::vector<Transition> batch;
  batch.reserve(static_cast<std::size_t>(config_.batch_size));
  for (int i = 0; i < config_.batch_size; ++i)
    batch.push_back(replay_[replay_rng_.uniform_int(static_cast<int>(replay_.size()))]);
  update(batch);
}

double DqnPolicy::update(const std::vector<Transition>& batch) {
  double weight = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const Transition& tr : batch) {
    double y = tr.r;
    if (!tr.terminal) {
      std::vector<double> qn = target_.forward(tr.b_next);
      y += config_.gamma * qn[argmax_allowed(qn, tr.legal_next)];
    }
    double pred = online_.accumulate(tr.b, tr.a, y, weight);
    loss += weight * (pred - y) * (pred - y);
  }
  online_.step(config_.lr);
  ++updates_;
  if (updates_ % config_.target_sync == 0) target_.set_parameters(online_.parameters());
  return loss;
}

std::string DqnPolicy::checkpoint_json() const {
  nlohmann::json j;
  j["kind"] = "dqn";
  j["domain"] = domain_ ? domain_->name : "";
  j["with_group"] = with_group_;
  j["sizes"] = online_.sizes();
  j["parameters"] = online_.parameters();
  return j.dump();
}

void DqnPolicy::restore_checkpoint_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  if (j.at("kind") != "dqn") throw std::runtime_error("checkpoint: not a dqn checkpoint");
  if (domain_ && j.at("domain").get<std::string>() != domain_->name)
    throw std::runtime_error("checkpoint: domain mismatch");
  if (j.at("sizes").get<std::vector<int>>() != online_.sizes())
    throw std::runtime_error("checkpoint: network shape mismatch");
  online_.set_parameters(j.at("parameters").get<std::vector<double>>());
  target_.set_parameters(online_.parameters());
}

}  // namespace dialmark
