#include <doctest.h>

#include "cfx/sparsify.hpp"
#include "support.hpp"

using namespace cfx;

TEST_CASE("mask_top_fraction keeps the highest-scored coordinates") {
  std::vector<double> scores = {0.1, 0.9, 0.5, 0.9, 0.0, 0.3};
  Mask m = mask_top_fraction(scores, 3, 2, 0.5);  // k = 3
  CHECK(m.ones() == 3);
  CHECK(m.m[1] == 1);
  CHECK(m.m[3] == 1);  // the two 0.9s (tie broken by index)
  CHECK(m.m[2] == 1);  // then 0.5
  CHECK(m.m[0] == 0);

  Mask one = mask_top_fraction(scores, 3, 2, 0.0);  // clamps to at least one
  CHECK(one.ones() == 1);
  CHECK(one.m[1] == 1);

  Mask all = mask_top_fraction(scores, 3, 2, 1.0);
  CHECK(all.ones() == 6);
}

TEST_CASE("clean_segments zeroes short per-channel runs") {
  SUBCASE("run of 5 with min_len 10 vanishes") {
    Mask m(30, 1);
    for (int t = 8; t < 13; ++t) m.set(t, 0, true);
    Mask cleaned = clean_segments(m, 10);
    CHECK(cleaned.ones() == 0);
  }

  SUBCASE("run of exactly min_len survives") {
    Mask m(30, 1);
    for (int t = 5; t < 15; ++t) m.set(t, 0, true);
    Mask cleaned = clean_segments(m, 10);
    CHECK(cleaned == m);
  }

  SUBCASE("all-ones mask is unchanged") {
    Mask m(25, 3);
    for (auto& bit : m.m) bit = 1;
    CHECK(clean_segments(m, 10) == m);
  }

  SUBCASE("channels are independent") {
    Mask m(40, 2);
    for (int t = 0; t < 12; ++t) m.set(t, 0, true);  // long run, channel 0
    for (int t = 20; t < 24; ++t) m.set(t, 1, true);  // short run, channel 1
    Mask cleaned = clean_segments(m, 10);
    CHECK(cleaned.at(5, 0));
    CHECK_FALSE(cleaned.at(21, 1));
  }

  SUBCASE("idempotent") {
    Mask m(50, 2);
    for (int t = 3; t < 9; ++t) m.set(t, 0, true);
    for (int t = 14; t < 40; ++t) m.set(t, 0, true);
    for (int t = 30; t < 35; ++t) m.set(t, 1, true);
    Mask once = clean_segments(m, 8);
    CHECK(clean_segments(once, 8) == once);
  }
}

TEST_CASE("compose selects element-exactly between query and donor") {
  Series q = cfxtest::filled("q", 4, 2, 1.f);
  Series d = cfxtest::filled("d", 4, 2, 9.f);
  Mask m(4, 2);
  m.set(0, 0, true);
  m.set(3, 1, true);
  Series out = compose(q, d, m);
  CHECK(out.at(0, 0) == 9.f);
  CHECK(out.at(3, 1) == 9.f);
  CHECK(out.at(1, 0) == 1.f);
  CHECK(out.at(2, 1) == 1.f);
  CHECK(out.record_id == q.record_id);
}

TEST_CASE("sparsify walks the keep-ratio schedule until the target is reached") {
  // Class flips on the mean of window [40, 52) of channel 0.
  cfxtest::WindowMeanModel model(40, 12, 0, 2.0);
  Series query = cfxtest::filled("q", 100, 1, 0.f);
  Series donor = cfxtest::filled("d", 100, 1, 0.f);
  for (int t = 40; t < 52; ++t) donor.at(t, 0) = 5.f;

  LabelVec target(2);
  target.set(1);
  REQUIRE(model.predict(donor) == target);

  SUBCASE("a localized donor difference keeps the mask at the initial ratio") {
    SparsifyResult res = sparsify(query, donor, model, target);
    CHECK(res.attained);
    CHECK(model.predict(res.series) == target);
    CHECK(res.keep_ratio == doctest::Approx(0.10));
    CHECK(res.mask.fraction() <= 0.10 + 1e-9);
    // Only window coordinates were transplanted.
    for (int t = 0; t < 100; ++t)
      if (t < 40 || t >= 52) CHECK(res.series.at(t, 0) == 0.f);
  }

  SUBCASE("keep ratio forced to 1.0 transplants the whole donor") {
    SparsifyConfig cfg;
    cfg.initial_keep_ratio = 1.0;
    SparsifyResult res = sparsify(query, donor, model, target, cfg);
    CHECK(res.attained);
    CHECK(res.series.values == donor.values);
    CHECK(res.mask.fraction() == doctest::Approx(1.0));
  }

  SUBCASE("a donor not classified as target is rejected up front") {
    LabelVec wrong(2);
    wrong.set(0);
    CHECK_THROWS_AS(sparsify(query, donor, model, wrong), CfxError);
  }

  SUBCASE("best effort reports failure but still returns the final candidate") {
    LabelVec unreachable(2);
    unreachable.set(0);
    unreachable.set(1);  // this model never predicts both classes
    SparsifyResult res = sparsify_best_effort(query, donor, model, unreachable);
    CHECK_FALSE(res.attained);
    CHECK(res.keep_ratio == doctest::Approx(1.0));
    CHECK(res.series.values == donor.values);
  }

  SUBCASE("schedule result is deterministic") {
    SparsifyResult a = sparsify(query, donor, model, target);
    SparsifyResult b = sparsify(query, donor, model, target);
    CHECK(a.mask == b.mask);
    CHECK(a.series.values == b.series.values);
  }
}

TEST_CASE("sparsify tolerates min-segment cleaning against tiny masks") {
  // With T*C=60 and ratio 0.10, k=6 < min_segment_len: the first probes are
  // cleaned to empty masks and the loop must still advance and terminate.
  cfxtest::WindowMeanModel model(10, 20, 0, 2.0);
  Series query = cfxtest::filled("q", 60, 1, 0.f);
  Series donor = cfxtest::filled("d", 60, 1, 4.f);
  LabelVec target(2);
  target.set(1);
  SparsifyResult res = sparsify(query, donor, model, target);
  CHECK(res.attained);
  CHECK(model.predict(res.series) == target);
}
