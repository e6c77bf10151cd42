#include "dialmark/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

namespace dialmark {

namespace {

double distribution_entropy(const std::map<int, int>& counts, int total) {
  double h = 0.0;
  for (const auto& [item, c] : counts) {
    double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

EvidencePolicy::EvidencePolicy(const ItemSet& domain)
    : domain_(&domain), cons_(domain.constrainable_slots()) {
  evidence_.assign(domain.n_slots(), -1);
  asked_.assign(cons_.size(), false);
}

void EvidencePolicy::begin_episode(RandomStream&) {
  std::fill(evidence_.begin(), evidence_.end(), -1);
  asked_.assign(cons_.size(), false);
}

void EvidencePolicy::hear(const SystemAct&, const std::vector<ScoredUserAct>& acts) {
  for (const auto& [act, conf] : acts)
    if (act.kind == UserActKind::inform) evidence_[act.slot] = act.value;
}

std::vector<int> EvidencePolicy::evidence_candidates() const {
  // Taken at face value; contradictory evidence (possible once the error
  // channel mangles informs) can leave this empty.
  ConstraintSet cs(domain_->n_slots());
  for (size_t f = 0; f < evidence_.size(); ++f)
    if (evidence_[f] >= 0) cs.set(static_cast<int>(f), evidence_[f]);
  return filter_candidates(*domain_, cs);
}

std::vector<int> EvidencePolicy::unasked() const {
  std::vector<int> out;
  for (size_t ci = 0; ci < asked_.size(); ++ci)
    if (!asked_[ci]) out.push_back(static_cast<int>(ci));
  return out;
}

// ---- random questioner ----

int RandomQuestionPolicy::act(const BeliefTracker& t, const std::vector<bool>&,
                              RandomStream& rng) {
  std::vector<int> cands = evidence_candidates();
  if (cands.empty() || !max_entropy_slot(*domain_, cands, cons_, rng).has_value())
    return recommend_action(t.n_constrainable());
  std::vector<int> open = unasked();
  if (open.empty()) return recommend_action(t.n_constrainable());
  int ci = open[rng.uniform_int(static_cast<int>(open.size()))];
  asked_[ci] = true;
  return request_action(ci);
}

int RandomQuestionPolicy::recommend_override(const BeliefTracker&, RandomStream& rng) {
  std::vector<int> cands = evidence_candidates();
  // Nothing matches the stated constraints: the heuristic has no basis to
  // pick from, so it dead-ends on the first catalogue item.
  if (cands.empty()) return 0;
  return cands[rng.uniform_int(static_cast<int>(cands.size()))];
}

// ---- max-entropy questioner ----

int MaxEntropyQuestionPolicy::act(const BeliefTracker& t, const std::vector<bool>&,
                                  RandomStream& rng) {
  std::vector<int> cands = evidence_candidates();
  if (cands.empty() || !max_entropy_slot(*domain_, cands, cons_, rng).has_value())
    return recommend_action(t.n_constrainable());
  std::vector<int> open = unasked();
  if (open.empty()) return recommend_action(t.n_constrainable());

  std::vector<int> open_slots;
  for (int ci : open) open_slots.push_back(cons_[ci]);
  std::optional<int> best = max_entropy_slot(*domain_, cands, open_slots, rng);
  int slot = best ? *best : open_slots[rng.uniform_int(static_cast<int>(open_slots.size()))];
  for (int ci : open)
    if (cons_[ci] == slot) {
      asked_[ci] = true;
      return request_action(ci);
    }
  return recommend_action(t.n_constrainable());
}

int MaxEntropyQuestionPolicy::recommend_override(const BeliefTracker&, RandomStream& rng) {
  std::vector<int> cands = evidence_candidates();
  if (cands.empty()) return 0;
  return cands[rng.uniform_int(static_cast<int>(cands.size()))];
}

// ---- experience-matching questioner ----

MemoryMatchPolicy::MemoryMatchPolicy(const ItemSet& domain) : EvidencePolicy(domain) {}

void MemoryMatchPolicy::begin_episode(RandomStream& rng) {
  EvidencePolicy::begin_episode(rng);
  recommend_from_memory_ = false;
  last_recommended_ = -1;
}

std::vector<int> MemoryMatchPolicy::matching_cases() const {
  std::vector<int> out;
  for (size_t m = 0; m < memory_.size(); ++m) {
    bool covers = true;
    for (size_t f = 0; f < evidence_.size() && covers; ++f) {
      if (evidence_[f] < 0) continue;
      covers = false;
      for (const auto& [slot, value] : memory_[m].evidence)
        if (slot == static_cast<int>(f) && value == evidence_[f]) {
          covers = true;
          break;
        }
    }
    if (covers) out.push_back(static_cast<int>(m));
  }
  return out;
}

int MemoryMatchPolicy::act(const BeliefTracker& t, const std::vector<bool>& legal,
                           RandomStream& rng) {
  std::vector<int> matched = matching_cases();
  if (matched.empty()) {
    // No experience covers this evidence: behave like the random questioner.
    recommend_from_memory_ = false;
    std::vector<int> cands = evidence_candidates();
    if (cands.empty() || !max_entropy_slot(*domain_, cands, cons_, rng).has_value())
      return recommend_action(t.n_constrainable());
    std::vector<int> open = unasked();
    if (open.empty()) return recommend_action(t.n_constrainable());
    int ci = open[rng.uniform_int(static_cast<int>(open.size()))];
    asked_[ci] = true;
    return request_action(ci);
  }

  std::map<int, int> rec_counts;
  for (int m : matched) ++rec_counts[memory_[m].item];
  double h0 = distribution_entropy(rec_counts, static_cast<int>(matched.size()));

  if (h0 > 1e-12) {
    // Expected entropy of the recommendation distribution after hearing each
    // possible answer, weighted by how often remembered dialogues gave it.
    double best_eh = h0 - 1e-9;
    std::vector<int> best_cis;
    for (int ci : unasked()) {
      int f = cons_[ci];
      std::map<int, std::map<int, int>> by_value;  // answer value -> rec counts
      std::map<int, int> value_totals;
      for (int m : matched)
        for (const auto& [slot, value] : memory_[m].evidence)
          if (slot == f) {
            ++by_value[value][memory_[m].item];
            ++value_totals[value];
          }
      int total = 0;
      for (const auto& [v, n] : value_totals) total += n;
      if (total == 0) continue;  // no remembered dialogue answers this question
      double eh = 0.0;
      for (const auto& [v, n] : value_totals)
        eh += (static_cast<double>(n) / total) * distribution_entropy(by_value[v], n);
      if (eh < best_eh - 1e-12) {
        best_eh = eh;
        best_cis.assign(1, ci);
      } else if (eh <= best_eh + 1e-12 && !best_cis.empty()) {
        best_cis.push_back(ci);
      }
    }
    if (!best_cis.empty()) {
      int ci = best_cis[rng.uniform_int(static_cast<int>(best_cis.size()))];
      asked_[ci] = true;
      return request_action(ci);
    }
  }
  recommend_from_memory_ = true;
  return recommend_action(t.n_constrainable());
}

int MemoryMatchPolicy::recommend_override(const BeliefTracker&, RandomStream& rng) {
  if (recommend_from_memory_) {
    std::vector<int> matched = matching_cases();
    if (!matched.empty()) {
      std::map<int, int> rec_counts;
      for (int m : matched) ++rec_counts[memory_[m].item];
      int best = 0;
      for (const auto& [item, c] : rec_counts) best = std::max(best, c);
      std::vector<int> modal;
      for (const auto& [item, c] : rec_counts)
        if (c == best) modal.push_back(item);
      last_recommended_ = modal[rng.uniform_int(static_cast<int>(modal.size()))];
      return last_recommended_;
    }
  }
  std::vector<int> cands = evidence_candidates();
  last_recommended_ = cands.empty() ? 0 : cands[rng.uniform_int(static_cast<int>(cands.size()))];
  return last_recommended_;
}

void MemoryMatchPolicy::observe(double reward, const BeliefTracker&, const std::vector<bool>&,
                                bool done) {
  if (!done || !training_ || reward <= 0.0 || last_recommended_ < 0) return;
  ExperienceCase c;
  for (size_t f = 0; f < evidence_.size(); ++f)
    if (evidence_[f] >= 0) c.evidence.emplace_back(static_cast<int>(f), evidence_[f]);
  c.item = last_recommended_;
  memory_.push_back(std::move(c));
}

std::string experience_to_jsonl(const ItemSet& domain, const std::vector<ExperienceCase>& memory) {
  std::string out;
  for (const auto& c : memory) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json ev = nlohmann::ordered_json::object();
    for (const auto& [slot, value] : c.evidence)
      ev[domain.slots[slot].name] = domain.slots[slot].values[value];
    j["evidence"] = ev;
    j["recommendation"] = domain.items[c.item].id;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<ExperienceCase> experience_from_jsonl(const ItemSet& domain, const std::string& text) {
  std::vector<ExperienceCase> memory;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    ExperienceCase c;
    for (const auto& [slot_name, value] : j.at("evidence").items()) {
      int f = domain.slot_index(slot_name);
      if (f < 0) throw std::runtime_error("experience log: unknown slot '" + slot_name + "'");
      int v = domain.value_index(f, value.get<std::string>());
      if (v < 0)
        throw std::runtime_error("experience log: unknown value '" + value.get<std::string>() +
                                 "' for slot '" + slot_name + "'");
      c.evidence.emplace_back(f, v);
    }
    std::sort(c.evidence.begin(), c.evidence.end());
    std::string id = j.at("recommendation").get<std::string>();
    c.item = -1;
    for (int i = 0; i < domain.n_items(); ++i)
      if (domain.items[i].id == id) c.item = i;
    if (c.item < 0) throw std::runtime_error("experience log: unknown item '" + id + "'");
    memory.push_back(std::move(c));
  }
  return memory;
}

// ---- handcrafted rules ----

int HandcraftedPolicy::act(const BeliefTracker& t, const std::vector<bool>& legal,
                           RandomStream&) {
  int n_c = t.n_constrainable();
  for (int ci = 0; ci < n_c; ++ci) {
    double top = t.slot(ci).top_prob();
    if (top >= 0.5 && top < 0.8 && legal[confirm_action(n_c, ci)])
      return confirm_action(n_c, ci);
  }
  if (t.candidates(0.5).size() > 1) {
    for (int ci = 0; ci < n_c; ++ci) {
      const SlotBelief& b = t.slot(ci);
      if (b.top_prob() < 0.5 && b.none < 0.9 && !t.requested(ci) &&
          legal[request_action(ci)])
        return request_action(ci);
    }
  }
  return recommend_action(n_c);
}

}  // namespace dialmark
