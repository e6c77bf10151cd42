#include "doctest.h"

#include <vector>

#include "dialmark/belief.hpp"

using namespace dialmark;

namespace {

ItemSet tracker_domain() {
  ItemSet d;
  d.name = "trk";
  d.slots = {
      {"a", {"a0", "a1", "a2"}, true, GroupVisibility::group1_and_2},
      {"b", {"b0", "b1"}, true, GroupVisibility::group2_only},
      {"note", {"n0", "n1"}, false, GroupVisibility::inform_only},
  };
  d.items = {
      {"i0", {0, 0, 0}}, {"i1", {1, 0, 1}}, {"i2", {2, 1, 0}}, {"i3", {0, 1, 1}},
  };
  return d;
}

}  // namespace

TEST_CASE("inform chain frozen values") {
  SlotBelief b(3);
  b.update_inform(0, 0.6);
  CHECK(b.p[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(b.residual == doctest::Approx(0.4).epsilon(1e-12));
  b.update_inform(1, 0.5);
  CHECK(b.p[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(b.p[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b.residual == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(b.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.top_value() == 1);
  CHECK(b.observed_mass() == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("repeated consistent informs converge") {
  SlotBelief b(2);
  for (int i = 0; i < 6; ++i) b.update_inform(0, 0.8);
  CHECK(b.p[0] > 0.999);
  CHECK(b.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("null drifts toward none at half weight") {
  SlotBelief b(3);
  b.update_inform(0, 0.6);
  b.update_inform(1, 0.5);
  b.update_none(0.8);  // alpha = 0.4
  CHECK(b.p[0] == doctest::Approx(0.18).epsilon(1e-12));
  CHECK(b.p[1] == doctest::Approx(0.30).epsilon(1e-12));
  CHECK(b.residual == doctest::Approx(0.12).epsilon(1e-12));
  CHECK(b.none == doctest::Approx(0.40).epsilon(1e-12));
  CHECK(b.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("deny redistributes proportionally") {
  SlotBelief b(3);
  b.update_inform(0, 0.6);  // p=[.6,0,0], residual .4
  b.update_deny(0, 0.5);    // removes .3, all flows to residual
  CHECK(b.p[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(b.residual == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(b.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("deny of a certain value falls back to uniform spread") {
  SlotBelief b(2);
  b.update_inform(0, 1.0);  // p=[1,0]
  b.update_deny(0, 1.0);    // 1.0 spread over {p[1], none}
  CHECK(b.p[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(b.p[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b.none == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(b.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("belief stays a distribution under random update storms") {
  RandomStream rng(88);
  for (int rep = 0; rep < 50; ++rep) {
    SlotBelief b(4);
    for (int step = 0; step < 60; ++step) {
      double c = rng.uniform01() * 0.98 + 0.01;
      switch (rng.uniform_int(3)) {
        case 0: b.update_inform(rng.uniform_int(4), c); break;
        case 1: b.update_none(c); break;
        case 2: b.update_deny(rng.uniform_int(4), c); break;
      }
      REQUIRE(b.sum() == doctest::Approx(1.0).epsilon(1e-9));
      REQUIRE(b.none >= -1e-12);
      REQUIRE(b.residual >= -1e-12);
      for (double x : b.p) REQUIRE(x >= -1e-12);
    }
  }
}

TEST_CASE("tracker routes acts by the preceding system act") {
  ItemSet d = tracker_domain();
  BeliefTracker t(d, 30);

  SystemAct req_a = SystemAct::make_request(0);
  t.observe_system(req_a);
  t.observe_user(req_a, {{UserAct::make_inform(0, 2), 0.9}});
  CHECK(t.slot(0).p[2] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(t.requested(0));
  CHECK_FALSE(t.requested(1));

  SystemAct conf = SystemAct::make_confirm(0, 2);
  t.observe_system(conf);
  t.observe_user(conf, {{UserAct::make_affirm(), 0.8}});
  CHECK(t.slot(0).p[2] == doctest::Approx(0.9 * 0.2 + 0.8).epsilon(1e-12));

  SystemAct req_b = SystemAct::make_request(1);
  t.observe_system(req_b);
  t.observe_user(req_b, {{UserAct::make_null(), 0.6}});
  CHECK(t.slot(1).none == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(t.turn() == 3);
}

TEST_CASE("deny after confirm lowers the confirmed value") {
  ItemSet d = tracker_domain();
  BeliefTracker t(d, 30);
  SystemAct req = SystemAct::make_request(0);
  t.observe_system(req);
  t.observe_user(req, {{UserAct::make_inform(0, 1), 0.6}});
  SystemAct conf = SystemAct::make_confirm(0, 1);
  t.observe_system(conf);
  t.observe_user(conf, {{UserAct::make_deny(), 0.5}});
  CHECK(t.slot(0).p[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(t.slot(0).residual == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("commitment threshold drives candidate filtering") {
  ItemSet d = tracker_domain();
  BeliefTracker t(d, 30);
  CHECK(t.candidates(0.5).size() == 4);

  SystemAct req = SystemAct::make_request(1);
  t.observe_system(req);
  t.observe_user(req, {{UserAct::make_inform(1, 1), 0.6}});
  auto cs = t.committed(0.5);
  CHECK(cs.count() == 1);
  CHECK(cs.required[1] == 1);
  CHECK(t.committed(0.7).count() == 0);
  auto cand = t.candidates(0.5);
  REQUIRE(cand.size() == 2);  // items i2, i3 have b=b1
  CHECK(cand[0] == 2);
  CHECK(cand[1] == 3);
}

TEST_CASE("feature vector layout and dimensions") {
  ItemSet d = tracker_domain();
  BeliefTracker t(d, 30);
  // values 3+2, nones 2, history 5+2+1+1+1, group 2
  CHECK(t.feature_dim(false) == 3 + 1 + 2 + 1 + 5 + 2 + 3);
  CHECK(t.feature_dim(true) == t.feature_dim(false) + 2);

  auto x0 = t.featurize(true);
  REQUIRE(static_cast<int>(x0.size()) == t.feature_dim(true));
  CHECK(x0[x0.size() - 2] == doctest::Approx(0.5));  // group prior
  CHECK(x0.back() == doctest::Approx(0.5));
  CHECK(x0[x0.size() - 3] == doctest::Approx(1.0));  // full candidate set

  SystemAct req = SystemAct::make_request(0);
  t.observe_system(req);
  t.observe_user(req, {{UserAct::make_inform(0, 0), 0.9}});
  auto x = t.featurize(false);
  CHECK(x[0] == doctest::Approx(0.9).epsilon(1e-12));  // slot a, value a0
  // one-hot of last kind: request is index 0 of the 5-wide block after beliefs
  int hist = 3 + 1 + 2 + 1;
  CHECK(x[hist + 0] == 1.0);
  CHECK(x[hist + 1] == 0.0);
  CHECK(x[hist + 5] == 1.0);      // slot a asked
  CHECK(x[hist + 6] == 0.0);      // slot b not asked
  CHECK(x[hist + 7] == 0.0);      // nothing recommended
  CHECK(x[hist + 8] == doctest::Approx(1.0 / 30));
}

TEST_CASE("feature dimensions on the shipped domains") {
  ItemSet fin = generate_synthetic_domain(fin_spec());
  BeliefTracker tf(fin, 30);
  CHECK(tf.feature_dim(false) == 90);
  CHECK(tf.feature_dim(true) == 92);

  ItemSet lap = generate_synthetic_domain(lap_spec());
  BeliefTracker tl(lap, 30);
  CHECK(tl.feature_dim(false) == 52);

  ItemSet cr = generate_synthetic_domain(cr_spec());
  BeliefTracker tc(cr, 30);
  CHECK(tc.feature_dim(false) == 44);

  ItemSet sfr = generate_synthetic_domain(sfr_spec());
  BeliefTracker ts(sfr, 30);
  CHECK(ts.feature_dim(false) == 44);
}

TEST_CASE("group posterior moves with slot visibility evidence") {
  ItemSet d = tracker_domain();
  BeliefTracker t(d, 30);

  // Volunteering a group-2-only slot is near-proof of expertise.
  SystemAct req = SystemAct::make_request(1);
  t.observe_system(req);
  t.observe_user(req, {{UserAct::make_inform(1, 0), 0.9}});
  CHECK(t.group_posterior()[1] > 0.9);

  BeliefTracker u(d, 30);
  SystemAct req_a = SystemAct::make_request(0);
  u.observe_system(req_a);
  u.observe_user(req_a, {{UserAct::make_inform(0, 1), 0.9}});
  CHECK(u.group_posterior()[0] > 0.5);  // group-1 inform tilts layperson

  u.begin_dialogue();
  CHECK(u.group_posterior()[0] == doctest::Approx(0.5));
}
