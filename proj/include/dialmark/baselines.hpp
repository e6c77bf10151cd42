#pragma once

#include <utility>
#include <vector>

#include "dialmark/dialog.hpp"

namespace dialmark {

// Shared bookkeeping for the evidence-driven questioners: hard (slot, value)
// constraints taken from heard informs at face value, plus which slots this
// policy has already asked about this episode.
class EvidencePolicy : public Policy {
 public:
  explicit EvidencePolicy(const ItemSet& domain);
  void begin_episode(RandomStream& rng) override;
  void hear(const SystemAct& last_system, const std::vector<ScoredUserAct>& acts) override;

 protected:
  // Items consistent with the gathered evidence; falls back to the full item
  // set when conflicting (corrupted) evidence empties the filter.
  std::vector<int> evidence_candidates() const;
  std::vector<int> unasked() const;  // constrainable indices not asked yet

  const ItemSet* domain_;
  std::vector<int> cons_;      // ci -> domain slot
  std::vector<int> evidence_;  // per domain slot, -1 = none (last inform wins)
  std::vector<bool> asked_;    // per ci
};

// Asks uniformly random not-yet-requested slots until no slot differentiates
// the candidates (or none are left), then recommends uniformly from the
// candidates, resampling on every retry.
class RandomQuestionPolicy : public EvidencePolicy {
 public:
  using EvidencePolicy::EvidencePolicy;
  int act(const BeliefTracker& t, const std::vector<bool>& legal, RandomStream& rng) override;
  int recommend_override(const BeliefTracker& t, RandomStream& rng) override;
};

// Same termination as the random questioner, but asks the highest-entropy
// not-yet-requested slot (uniform among not-yet-requested when none of them
// differentiates while an already-asked slot still does).
class MaxEntropyQuestionPolicy : public EvidencePolicy {
 public:
  using EvidencePolicy::EvidencePolicy;
  int act(const BeliefTracker& t, const std::vector<bool>& legal, RandomStream& rng) override;
  int recommend_override(const BeliefTracker& t, RandomStream& rng) override;
};

// One remembered success: the evidence that had been gathered when the
// recommendation was accepted, and the accepted item.
struct ExperienceCase {
  std::vector<std::pair<int, int>> evidence;  // (domain slot, value), sorted
  int item = -1;
};

std::string experience_to_jsonl(const ItemSet& domain, const std::vector<ExperienceCase>& memory);
std::vector<ExperienceCase> experience_from_jsonl(const ItemSet& domain, const std::string& text);

// Questions by expected posterior entropy of the recommendation distribution
// over remembered successes whose evidence covers the current evidence;
// recommends the modal remembered item once no question is expected to lower
// that entropy. Falls back to random questioning while no memory matches.
// Memory grows during training episodes only.
class MemoryMatchPolicy : public EvidencePolicy {
 public:
  explicit MemoryMatchPolicy(const ItemSet& domain);
  void begin_episode(RandomStream& rng) override;
  int act(const BeliefTracker& t, const std::vector<bool>& legal, RandomStream& rng) override;
  int recommend_override(const BeliefTracker& t, RandomStream& rng) override;
  void observe(double reward, const BeliefTracker& next, const std::vector<bool>& legal_next,
               bool done) override;

  void set_training(bool training) { training_ = training; }
  const std::vector<ExperienceCase>& memory() const { return memory_; }
  void set_memory(std::vector<ExperienceCase> memory) { memory_ = std::move(memory); }

 private:
  std::vector<int> matching_cases() const;

  std::vector<ExperienceCase> memory_;
  bool training_ = true;
  bool recommend_from_memory_ = false;  // which rule produced the pending recommend
  int last_recommended_ = -1;
};

// Deterministic belief-driven rules: consolidate an uncertain top value by
// confirming it, otherwise ask the first unresolved unasked slot while more
// than one candidate remains, otherwise recommend the top candidate.
class HandcraftedPolicy : public Policy {
 public:
  explicit HandcraftedPolicy(const ItemSet& domain) : domain_(&domain) {}
  int act(const BeliefTracker& t, const std::vector<bool>& legal, RandomStream& rng) override;

 private:
  const ItemSet* domain_;
};

}  // namespace dialmark
