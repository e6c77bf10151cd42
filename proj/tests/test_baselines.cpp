#include "doctest.h"

#include <map>
#include <set>
#include <vector>

#include "dialmark/baselines.hpp"

using namespace dialmark;

namespace {

// Four items over two binary slots: H(a) = 1.0, H(b) = 0.8113.
ItemSet entropy_domain() {
  ItemSet d;
  d.name = "ent";
  d.slots = {
      {"a", {"a0", "a1"}, true, GroupVisibility::group1_and_2},
      {"b", {"b0", "b1"}, true, GroupVisibility::group1_and_2},
      {"c", {"c0", "c1"}, true, GroupVisibility::group2_only},
  };
  d.items = {{"e0", {0, 0, 0}}, {"e1", {0, 0, 1}}, {"e2", {1, 0, 0}}, {"e3", {1, 1, 1}}};
  return d;
}

void feed_inform(EvidencePolicy& p, int slot, int value) {
  p.hear(SystemAct::make_request(slot), {{UserAct::make_inform(slot, value), 0.9}});
}

}  // namespace

TEST_CASE("random questioner asks each fresh slot uniformly") {
  ItemSet fin = generate_synthetic_domain(fin_spec());
  BeliefTracker t(fin, 30);
  RandomQuestionPolicy rq(fin);
  RandomStream rng(101);
  auto legal = std::vector<bool>(n_summary_actions(t.n_constrainable()), true);
  std::map<int, int> counts;
  const int n = 9000;
  for (int i = 0; i < n; ++i) {
    rq.begin_episode(rng);
    int a = rq.act(t, legal, rng);
    REQUIRE(a < t.n_constrainable());  // always a request on a fresh dialogue
    ++counts[a];
  }
  REQUIRE(counts.size() == 9);
  for (const auto& [a, c] : counts)
    CHECK(static_cast<double>(c) / n == doctest::Approx(1.0 / 9).epsilon(0.18));
}

TEST_CASE("random questioner recommends once nothing differentiates") {
  ItemSet d = entropy_domain();
  BeliefTracker t(d, 30);
  RandomQuestionPolicy rq(d);
  RandomStream rng(102);
  auto legal = std::vector<bool>(n_summary_actions(3), true);
  rq.begin_episode(rng);

  // Single candidate: e3 is the only item with a=a1, b=b1.
  feed_inform(rq, 0, 1);
  feed_inform(rq, 1, 1);
  CHECK(rq.act(t, legal, rng) == recommend_action(3));
  CHECK(rq.recommend_override(t, rng) == 3);
}

TEST_CASE("random questioner exhausts slots then samples candidates uniformly") {
  ItemSet d = entropy_domain();
  BeliefTracker t(d, 30);
  RandomQuestionPolicy rq(d);
  RandomStream rng(103);
  auto legal = std::vector<bool>(n_summary_actions(3), true);
  rq.begin_episode(rng);
  std::set<int> asked;
  for (int i = 0; i < 3; ++i) {
    int a = rq.act(t, legal, rng);
    REQUIRE(a < 3);
    asked.insert(a);
  }
  CHECK(asked.size() == 3);  // never re-asks
  CHECK(rq.act(t, legal, rng) == recommend_action(3));
  // No evidence gathered: recommend resamples over all four items.
  std::map<int, int> picks;
  for (int i = 0; i < 4000; ++i) ++picks[rq.recommend_override(t, rng)];
  REQUIRE(picks.size() == 4);
  for (const auto& [item, c] : picks)
    CHECK(static_cast<double>(c) / 4000 == doctest::Approx(0.25).epsilon(0.15));
}

TEST_CASE("max-entropy questioner asks the most informative slot first") {
  ItemSet d = entropy_domain();
  BeliefTracker t(d, 30);
  MaxEntropyQuestionPolicy emdb(d);
  RandomStream rng(104);
  auto legal = std::vector<bool>(n_summary_actions(3), true);
  for (int rep = 0; rep < 20; ++rep) {
    emdb.begin_episode(rng);
    int a = emdb.act(t, legal, rng);
    CHECK((a == request_action(0) || a == request_action(2)));  // H(a)=H(c)=1.0 > H(b)
  }
}

TEST_CASE("max-entropy questioner's pick is verified by the entropy oracle") {
  ItemSet cr = generate_synthetic_domain(cr_spec());
  BeliefTracker t(cr, 30);
  MaxEntropyQuestionPolicy emdb(cr);
  RandomStream rng(105);
  auto legal = std::vector<bool>(n_summary_actions(3), true);
  emdb.begin_episode(rng);

  feed_inform(emdb, 0, cr.items[5].assignment[0]);
  ConstraintSet cs(cr.n_slots());
  cs.set(0, cr.items[5].assignment[0]);
  auto cands = filter_candidates(cr, cs);
  int a = emdb.act(t, legal, rng);
  REQUIRE(a < 3);
  double picked = slot_entropy(cr, cands, a);
  for (int f = 1; f < 3; ++f) CHECK(picked >= slot_entropy(cr, cands, f) - 1e-9);
}

TEST_CASE("memory matcher with unanimous history recommends immediately") {
  ItemSet d = entropy_domain();
  BeliefTracker t(d, 30);
  MemoryMatchPolicy emdm(d);
  std::vector<ExperienceCase> mem;
  for (int i = 0; i < 10; ++i) mem.push_back({{{0, 0}}, 2});
  emdm.set_memory(mem);
  RandomStream rng(106);
  auto legal = std::vector<bool>(n_summary_actions(3), true);
  emdm.begin_episode(rng);
  CHECK(emdm.act(t, legal, rng) == recommend_action(3));
  CHECK(emdm.recommend_override(t, rng) == 2);
}

TEST_CASE("memory matcher asks the question that splits its memory") {
  ItemSet d = entropy_domain();
  BeliefTracker t(d, 30);
  MemoryMatchPolicy emdm(d);
  // Slot a separates the two remembered outcomes; expected posterior entropy
  // 0 beats H0 = 1 bit.
  emdm.set_memory({{{{0, 0}}, 0}, {{{0, 1}}, 3}});
  RandomStream rng(107);
  auto legal = std::vector<bool>(n_summary_actions(3), true);
  emdm.begin_episode(rng);
  CHECK(emdm.act(t, legal, rng) == request_action(0));

  // The answer narrows matching to one case: modal recommendation follows.
  feed_inform(emdm, 0, 1);
  CHECK(emdm.act(t, legal, rng) == recommend_action(3));
  CHECK(emdm.recommend_override(t, rng) == 3);
}

TEST_CASE("memory matcher with empty memory mirrors the random questioner") {
  ItemSet fin = generate_synthetic_domain(fin_spec());
  BeliefTracker t(fin, 30);
  MemoryMatchPolicy emdm(fin);
  RandomQuestionPolicy rq(fin);
  auto legal = std::vector<bool>(n_summary_actions(t.n_constrainable()), true);
  for (int i = 0; i < 50; ++i) {
    RandomStream ra(5000 + i), rb(5000 + i);
    emdm.begin_episode(ra);
    rq.begin_episode(rb);
    CHECK(emdm.act(t, legal, ra) == rq.act(t, legal, rb));
  }
}

TEST_CASE("memory matcher stores successes only while training") {
  ItemSet cr = generate_synthetic_domain(cr_spec());
  MemoryMatchPolicy emdm(cr);
  DialogEngine eng(cr, benchmark_env(1));
  RandomStream root(108);
  for (int i = 0; i < 60; ++i) eng.run_episode(emdm, root.substream("train", i));
  size_t grown = emdm.memory().size();
  CHECK(grown > 0);
  for (const auto& c : emdm.memory()) {
    REQUIRE(c.item >= 0);
    REQUIRE(c.item < cr.n_items());
    ConstraintSet cs(cr.n_slots());
    for (auto [f, v] : c.evidence) cs.set(f, v);
    // A remembered recommendation always satisfied the evidence against it.
    CHECK(cs.satisfied_by(cr.items[c.item]));
  }
  emdm.set_training(false);
  for (int i = 0; i < 30; ++i) eng.run_episode(emdm, root.substream("test", i));
  CHECK(emdm.memory().size() == grown);
}

TEST_CASE("experience log round-trips through jsonl") {
  ItemSet cr = generate_synthetic_domain(cr_spec());
  MemoryMatchPolicy emdm(cr);
  DialogEngine eng(cr, benchmark_env(1));
  RandomStream root(109);
  for (int i = 0; i < 40; ++i) eng.run_episode(emdm, root.substream("train", i));
  REQUIRE(!emdm.memory().empty());
  std::string text = experience_to_jsonl(cr, emdm.memory());
  auto back = experience_from_jsonl(cr, text);
  REQUIRE(back.size() == emdm.memory().size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].item == emdm.memory()[i].item);
    CHECK(back[i].evidence == emdm.memory()[i].evidence);
  }
}

TEST_CASE("handcrafted rules fire in documented order") {
  ItemSet d = entropy_domain();
  BeliefTracker t(d, 30);
  HandcraftedPolicy hdc(d);
  RandomStream rng(110);
  EnvConfig cfg = benchmark_env(1);

  // Fresh belief: request the first constrainable slot.
  CHECK(hdc.act(t, legal_summary_actions(t, cfg), rng) == request_action(0));

  // Mid-band top value: confirm beats further requests.
  SystemAct req = SystemAct::make_request(0);
  t.observe_system(req);
  t.observe_user(req, {{UserAct::make_inform(0, 1), 0.6}});
  CHECK(hdc.act(t, legal_summary_actions(t, cfg), rng) == confirm_action(3, 0));

  // Affirmed: mass above 0.8; next unresolved slot is requested.
  SystemAct conf = SystemAct::make_confirm(0, 1);
  t.observe_system(conf);
  t.observe_user(conf, {{UserAct::make_affirm(), 0.9}});
  CHECK(t.slot(0).top_prob() > 0.8);
  CHECK(hdc.act(t, legal_summary_actions(t, cfg), rng) == request_action(1));
}

TEST_CASE("handcrafted policy skips asked slots even while unresolved") {
  ItemSet d = entropy_domain();
  BeliefTracker t(d, 30);
  HandcraftedPolicy hdc(d);
  RandomStream rng(111);
  EnvConfig cfg = benchmark_env(1);

  // Null answer: slot 0 stays unresolved (top 0, none 0.4) but was asked.
  SystemAct req = SystemAct::make_request(0);
  t.observe_system(req);
  t.observe_user(req, {{UserAct::make_null(), 0.8}});
  CHECK(t.slot(0).none < 0.9);
  CHECK(hdc.act(t, legal_summary_actions(t, cfg), rng) == request_action(1));
}

TEST_CASE("handcrafted policy recommends once one candidate remains") {
  ItemSet d = entropy_domain();
  BeliefTracker t(d, 30);
  HandcraftedPolicy hdc(d);
  RandomStream rng(112);
  EnvConfig cfg = benchmark_env(1);

  SystemAct r0 = SystemAct::make_request(0);
  t.observe_system(r0);
  t.observe_user(r0, {{UserAct::make_inform(0, 1), 0.95}});
  SystemAct r1 = SystemAct::make_request(1);
  t.observe_system(r1);
  t.observe_user(r1, {{UserAct::make_inform(1, 1), 0.95}});
  // Candidates = {e3} alone; rule 3 recommends it.
  REQUIRE(t.candidates(0.5).size() == 1);
  int a = hdc.act(t, legal_summary_actions(t, cfg), rng);
  CHECK(a == recommend_action(3));
  CHECK(recommend_item(d, t, 0.5) == 3);
}

TEST_CASE("handcrafted policy is a pure function of the belief") {
  ItemSet fin = generate_synthetic_domain(fin_spec());
  BeliefTracker t(fin, 30);
  HandcraftedPolicy a(fin), b(fin);
  RandomStream rng(113);
  EnvConfig cfg = benchmark_env(1);
  SystemAct req = SystemAct::make_request(t.domain_slot(2));
  t.observe_system(req);
  t.observe_user(req, {{UserAct::make_inform(t.domain_slot(2), 3), 0.7}});
  auto legal = legal_summary_actions(t, cfg);
  int first = a.act(t, legal, rng);
  for (int i = 0; i < 10; ++i) {
    CHECK(a.act(t, legal, rng) == first);
    CHECK(b.act(t, legal, rng) == first);
  }
}

TEST_CASE("all baselines complete episodes under masks without violations") {
  for (auto spec_fn : {fin_spec, cr_spec, sfr_spec, lap_spec}) {
    ItemSet d = generate_synthetic_domain(spec_fn());
    for (int env : {1, 3, 6}) {
      DialogEngine eng(d, benchmark_env(env));
      RandomQuestionPolicy rq(d);
      MaxEntropyQuestionPolicy emdb(d);
      MemoryMatchPolicy emdm(d);
      HandcraftedPolicy hdc(d);
      RandomStream root(114);
      std::vector<Policy*> all = {&rq, &emdb, &emdm, &hdc};
      for (size_t pi = 0; pi < all.size(); ++pi)
        for (int i = 0; i < 25; ++i) {
          EpisodeRecord rec =
              eng.run_episode(*all[pi], root.substream(d.name + "/" + std::to_string(pi), i));
          REQUIRE(rec.length >= 1);
          REQUIRE(rec.length <= 30);
        }
    }
  }
}
