#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "cfx/attribution.hpp"
#include "cfx/series.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cfx;
using cfxtest::BoundaryModel;
using cfxtest::ConstModel;

namespace {

AttributionTensor tensor_from(const std::vector<float>& values, int records, int classes, int t,
                              int c) {
  AttributionTensor attr;
  attr.n_records = records;
  attr.n_classes = classes;
  attr.n_timesteps = t;
  attr.n_channels = c;
  attr.provenance = "test";
  attr.values = values;
  REQUIRE(attr.values.size() ==
          static_cast<std::size_t>(records) * classes * static_cast<std::size_t>(t) * c);
  return attr;
}

Dataset tiny_dataset(const std::vector<std::vector<float>>& rows,
                     const std::vector<int>& label_idx, int n_classes) {
  Dataset d;
  for (int i = 0; i < n_classes; ++i) d.class_names.push_back("C" + std::to_string(i));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    d.records.push_back(cfxtest::from_vector("r" + std::to_string(i), rows[i]));
    LabelVec lv(static_cast<std::size_t>(n_classes));
    lv.set(static_cast<std::size_t>(label_idx[i]));
    d.labels.push_back(lv);
  }
  d.stats.mu = 0.0;
  d.stats.sigma = 1.0;
  return d;
}

}  // namespace

TEST_CASE("global_threshold interpolates percentiles of pooled magnitudes") {
  std::vector<float> one_to_ten = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  AttributionTensor attr = tensor_from(one_to_ten, 1, 1, 10, 1);
  CHECK(global_threshold(attr, 90.0) == doctest::Approx(9.1).epsilon(1e-12));

  AttributionTensor two = tensor_from({0.f, 10.f}, 1, 1, 2, 1);
  CHECK(global_threshold(two, 50.0) == doctest::Approx(5.0).epsilon(1e-12));

  AttributionTensor constant = tensor_from(std::vector<float>(8, 3.25f), 1, 1, 4, 2);
  for (double p : {0.5, 13.0, 50.0, 99.0, 99.9})
    CHECK(global_threshold(constant, p) == doctest::Approx(3.25).epsilon(1e-12));

  // The percentile domain is the open interval (0, 100).
  CHECK_THROWS_AS(global_threshold(constant, 0.0), CfxError);
  CHECK_THROWS_AS(global_threshold(constant, 100.0), CfxError);
  CHECK_THROWS_AS(global_threshold(constant, -3.0), CfxError);

  // Magnitudes are pooled, so signs are irrelevant.
  AttributionTensor negated = tensor_from({-1, 2, -3, 4, -5, 6, -7, 8, -9, 10}, 1, 1, 10, 1);
  CHECK(global_threshold(negated, 90.0) == doctest::Approx(9.1).epsilon(1e-12));

  AttributionTensor empty;
  empty.provenance = "empty";
  CHECK_THROWS_AS(global_threshold(empty, 50.0), CfxError);
}

TEST_CASE("global_threshold matches the sort-and-interpolate oracle") {
  std::mt19937_64 rng(512);
  for (int rep = 0; rep < 50; ++rep) {
    int t = 2 + static_cast<int>(rng_index(rng, 12));
    int c = 1 + static_cast<int>(rng_index(rng, 3));
    std::vector<float> vals;
    std::vector<double> mags;
    for (int i = 0; i < t * c; ++i) {
      auto v = static_cast<float>(rng_normal(rng) * 4.0);
      vals.push_back(v);
      mags.push_back(std::abs(static_cast<double>(v)));
    }
    AttributionTensor attr = tensor_from(vals, 1, 1, t, c);
    double p = 0.5 + rng_uniform(rng) * 99.0;
    CHECK(global_threshold(attr, p) ==
          doctest::Approx(cfxtest::oracle_percentile(mags, p)).epsilon(1e-12));
  }
}

TEST_CASE("important_features selects coordinates at or above the threshold") {
  std::vector<float> plane = {0.1f, -0.9f, 0.5f, 0.9f, -0.2f, 0.05f};
  AttributionTensor attr = tensor_from(plane, 1, 1, 3, 2);
  auto slice = attr.slice(0, 0);

  auto picked = important_features(slice, 3, 2, 0.5);
  REQUIRE(picked.size() == 3);
  CHECK(picked[0] == std::pair<int, int>{0, 1});
  CHECK(picked[1] == std::pair<int, int>{1, 0});
  CHECK(picked[2] == std::pair<int, int>{1, 1});

  CHECK(important_features(slice, 3, 2, 0.0).size() == 6);  // threshold 0 keeps everything
  CHECK(important_features(slice, 3, 2, 10.0).empty());
}

TEST_CASE("stable_intervals widens to the label-preserving range") {
  RuleConfig cfg;
  cfg.n_perturb = 1000;
  cfg.seed = 77;

  SUBCASE("constant model keeps every draw, so intervals span x +- sigma") {
    ConstModel stub({0.9, 0.1});
    Series s = cfxtest::from_vector("q", {1.0f, 2.0f, 3.0f});
    std::vector<std::pair<int, int>> feats = {{0, 0}, {2, 0}};
    std::vector<double> sigma_f = {0.5, 0.0, 2.0};  // one entry per (t,c)
    bool degenerate = true;
    auto intervals = stable_intervals(stub, s, feats, sigma_f, cfg, &degenerate);
    REQUIRE(intervals.size() == 2);
    CHECK_FALSE(degenerate);
    // Empirical extremes approach the analytic span at sampling resolution.
    CHECK(intervals[0].low >= 1.0 - 0.5);
    CHECK(intervals[0].low <= 1.0 - 0.5 + 0.05 * 0.5);
    CHECK(intervals[0].high <= 1.0 + 0.5);
    CHECK(intervals[0].high >= 1.0 + 0.5 - 0.05 * 0.5);
    CHECK(intervals[1].low >= 3.0 - 2.0);
    CHECK(intervals[1].high <= 3.0 + 2.0);
    CHECK(intervals[1].high >= 3.0 + 2.0 - 0.05 * 2.0);
    // The original value always sits inside its own interval.
    CHECK(intervals[0].low < 1.0);
    CHECK(1.0 <= intervals[0].high);
  }

  SUBCASE("zero sigma collapses to point intervals") {
    ConstModel stub({0.9, 0.1});
    Series s = cfxtest::from_vector("q", {4.0f, 5.0f});
    auto intervals = stable_intervals(stub, s, {{0, 0}, {1, 0}}, {0.0, 0.0}, cfg);
    REQUIRE(intervals.size() == 2);
    CHECK(intervals[0].high == doctest::Approx(4.0));
    CHECK(intervals[0].low < intervals[0].high);
    CHECK(std::nextafter(intervals[0].low, 1e9) == doctest::Approx(4.0));
    CHECK(intervals[1].high == doctest::Approx(5.0));
  }

  SUBCASE("decision boundary caps the preserved range") {
    // Label flips when the watched value exceeds 2; x=1, sigma=2 puts the
    // draw range at [-1, 3], so preserved highs approach 2 from below.
    BoundaryModel boundary(0, 0, 2.0);
    Series s = cfxtest::from_vector("q", {1.0f});
    auto intervals = stable_intervals(boundary, s, {{0, 0}}, {2.0}, cfg);
    REQUIRE(intervals.size() == 1);
    CHECK(intervals[0].high <= 2.0);
    CHECK(intervals[0].high >= 2.0 - 0.05 * 4.0);
    CHECK(intervals[0].low >= -1.0 - 1e-6);
  }

  SUBCASE("every draw flipping a feature degrades it to a point interval") {
    Series mixed = cfxtest::from_vector("m", {1.0f, 0.0f});
    class FlipSecond : public cfx::Model {
     public:
      FlipSecond() {
        ModelThresholds th;
        th.t = {0.5, 0.5};
        set_thresholds(th);
      }
      int expected_timesteps() const override { return -1; }
      int expected_channels() const override { return -1; }
      const std::vector<std::string>& class_names() const override { return classes_; }

     protected:
      ProbVec compute_proba(const Series& s) const override {
        // Any nonzero second sample flips the decision.
        return s.at(1, 0) == 0.0f ? ProbVec{0.9, 0.1} : ProbVec{0.1, 0.9};
      }

     private:
      std::vector<std::string> classes_ = {"A", "B"};
    } flip;
    bool degenerate = false;
    auto intervals = stable_intervals(flip, mixed, {{1, 0}}, {0.0, 1.0}, cfg, &degenerate);
    REQUIRE(intervals.size() == 1);
    CHECK(degenerate);
    CHECK(intervals[0].high == doctest::Approx(0.0));
    CHECK(std::nextafter(intervals[0].low, 1e9) == doctest::Approx(0.0));
  }
}

TEST_CASE("extract_rule builds scored conjuncts for one record/class") {
  // Four 3-sample records; the model reads sample 0: <= 2 -> class 0.
  Dataset d = tiny_dataset({{1.f, 0.f, 0.f}, {1.5f, 4.f, 0.f}, {8.f, 1.f, 0.f}, {9.f, 0.f, 2.f}},
                           {0, 0, 1, 1}, 2);
  BoundaryModel model(0, 0, 2.0);
  RuleConfig cfg;
  cfg.percentile = 50.0;
  cfg.seed = 9;

  SUBCASE("dominant attribution coordinate yields a single conjunct") {
    // Pool: {0.001 x2, 2.0 x21, 5.0}; the 50th percentile lands at 2.0, so
    // only record 0's spiked coordinate survives for (record 0, class 0).
    std::vector<float> attr(static_cast<std::size_t>(4) * 2 * 3, 2.0f);
    attr[0] = 5.0f;
    attr[1] = 0.001f;
    attr[2] = 0.001f;
    AttributionTensor tensor = tensor_from(attr, 4, 2, 3, 1);
    RuleInputs inputs = make_rule_inputs(tensor, d, cfg);
    IntervalRule rule = extract_rule(model, d.records[0], tensor.slice(0, 0), inputs, d, 0, cfg);
    REQUIRE(rule.conjuncts.size() == 1);
    CHECK(rule.conjuncts[0].time == 0);
    CHECK(rule.conjuncts[0].channel == 0);
    CHECK(rule.record_id == "r0");
    CHECK(rule.class_index == 0);
    CHECK(rule.source_labels.test(0));
    CHECK_FALSE(rule.source_labels.test(1));

    // Scoring agrees with a brute-force re-scan.
    auto [cov, conf] = score_rule(rule, d, model);
    CHECK(rule.coverage == doctest::Approx(cov));
    CHECK(rule.confidence == doctest::Approx(conf));
  }

  SUBCASE("attributions below the global threshold raise the empty-rule error") {
    // Record 0's slice is all zeros while the pooled 50th percentile is 1.
    std::vector<float> attr(static_cast<std::size_t>(4) * 2 * 3, 1.f);
    attr[0] = attr[1] = attr[2] = 0.f;
    AttributionTensor tensor = tensor_from(attr, 4, 2, 3, 1);
    RuleInputs inputs = make_rule_inputs(tensor, d, cfg);
    CHECK(inputs.threshold > 0.0);
    CHECK_THROWS_AS(extract_rule(model, d.records[0], tensor.slice(0, 0), inputs, d, 0, cfg),
                    EmptyRuleError);
  }
}

TEST_CASE("multi-label records keep the whole label vector under rule perturbation") {
  // Two independent watched coordinates decide two labels.
  class TwoBit : public cfx::Model {
   public:
    TwoBit() {
      ModelThresholds th;
      th.t = {0.5, 0.5};
      set_thresholds(th);
    }
    int expected_timesteps() const override { return -1; }
    int expected_channels() const override { return -1; }
    const std::vector<std::string>& class_names() const override { return classes_; }

   protected:
    ProbVec compute_proba(const Series& s) const override {
      return {s.at(0, 0) <= 2.0f ? 0.9 : 0.1, s.at(1, 0) <= 3.0f ? 0.9 : 0.1};
    }

   private:
    std::vector<std::string> classes_ = {"A", "B"};
  } model;

  Series s = cfxtest::from_vector("q", {1.0f, 1.0f, 0.0f});
  LabelVec before = model.predict(s);
  CHECK(before.count() == 2);

  RuleConfig cfg;
  cfg.seed = 33;
  auto intervals =
      stable_intervals(model, s, {{0, 0}, {1, 0}}, {2.0, 4.0, 0.0}, cfg);
  REQUIRE(intervals.size() == 2);

  // Re-drawing inside the intervals must preserve BOTH labels.
  std::mt19937_64 rng(4242);
  Series probe = s;
  for (int rep = 0; rep < 500; ++rep) {
    for (std::size_t f = 0; f < intervals.size(); ++f) {
      double u = rng_uniform(rng);
      double v = intervals[f].low + u * (intervals[f].high - intervals[f].low);
      probe.at(intervals[f].time, intervals[f].channel) = static_cast<float>(v);
    }
    CHECK(model.predict(probe) == before);
  }
}

TEST_CASE("score_rule counts coverage and confidence") {
  Dataset d = tiny_dataset({{1.f}, {2.f}, {3.f}, {4.f}}, {0, 0, 1, 1}, 2);
  BoundaryModel model(0, 0, 2.5);

  IntervalRule rule;
  rule.record_id = "r0";
  rule.class_index = 0;
  rule.source_labels = model.predict(d.records[0]);
  RuleConjunct conj;
  conj.time = 0;
  conj.channel = 0;

  SUBCASE("two of four records inside -> coverage 0.5") {
    conj.low = 0.5;
    conj.high = 2.0;  // covers values 1 and 2
    rule.conjuncts = {conj};
    auto [cov, conf] = score_rule(rule, d, model);
    CHECK(cov == doctest::Approx(0.5));
    CHECK(conf == doctest::Approx(1.0));  // both covered records predict class 0
  }

  SUBCASE("whole value range -> coverage 1") {
    conj.low = -100.0;
    conj.high = 100.0;
    rule.conjuncts = {conj};
    auto [cov, conf] = score_rule(rule, d, model);
    CHECK(cov == doctest::Approx(1.0));
    CHECK(conf == doctest::Approx(0.5));  // records 3,4 predict class 1
  }

  SUBCASE("three covered, two matching -> confidence 2/3") {
    conj.low = 0.5;
    conj.high = 3.0;  // covers 1, 2, 3
    rule.conjuncts = {conj};
    auto [cov, conf] = score_rule(rule, d, model);
    CHECK(cov == doctest::Approx(0.75));
    CHECK(conf == doctest::Approx(2.0 / 3.0));
  }
}

TEST_CASE("occlusion attribution localizes model sensitivity") {
  SUBCASE("constant model -> all-zero attributions") {
    ConstModel stub({0.4, 0.6});
    Series s = cfxtest::filled("q", 12, 2, 1.5f);
    for (int t = 0; t < s.t; ++t)
      for (int c = 0; c < s.c; ++c) s.at(t, c) += 0.1f * t;
    auto attr = occlusion_attribution(stub, s, 4);
    for (float v : attr) CHECK(v == 0.0f);
  }

  SUBCASE("window = T gives one shared value per channel") {
    cfxtest::ChannelMeanModel model(0);
    Series s = cfxtest::filled("q", 6, 2, 0.f);
    for (int t = 0; t < s.t; ++t) s.at(t, 0) = static_cast<float>(t);
    auto attr = occlusion_attribution(model, s, 6);
    // layout: [class][time][channel]
    for (int cls = 0; cls < 2; ++cls)
      for (int ch = 0; ch < 2; ++ch) {
        float first = attr[static_cast<std::size_t>(cls) * 12 + 0 * 2 + ch];
        for (int t = 1; t < 6; ++t)
          CHECK(attr[static_cast<std::size_t>(cls) * 12 + static_cast<std::size_t>(t) * 2 + ch] ==
                first);
      }
  }

  SUBCASE("channel-0-only model localizes attributions to channel 0") {
    cfxtest::ChannelMeanModel model(0);
    Series s = cfxtest::filled("q", 10, 3, 0.f);
    for (int t = 0; t < s.t; ++t) {
      s.at(t, 0) = static_cast<float>(t) - 4.5f;
      s.at(t, 1) = static_cast<float>(t % 3);
      s.at(t, 2) = 2.f;
    }
    auto attr = occlusion_attribution(model, s, 3);
    bool any_ch0 = false;
    for (int cls = 0; cls < 2; ++cls)
      for (int t = 0; t < 10; ++t) {
        float ch0 = attr[static_cast<std::size_t>(cls) * 30 + static_cast<std::size_t>(t) * 3];
        if (ch0 != 0.0f) any_ch0 = true;
        CHECK(attr[static_cast<std::size_t>(cls) * 30 + static_cast<std::size_t>(t) * 3 + 1] ==
              0.0f);
        CHECK(attr[static_cast<std::size_t>(cls) * 30 + static_cast<std::size_t>(t) * 3 + 2] ==
              0.0f);
      }
    CHECK(any_ch0);
  }
}

TEST_CASE("attribution tensor and rules files round trip") {
  AttributionTensor attr = tensor_from({1, -2, 3, -4, 5, -6, 7, -8}, 2, 2, 2, 1);
  std::filesystem::path dir = std::filesystem::temp_directory_path() / "cfx_attr_roundtrip";
  std::filesystem::remove_all(dir);
  write_attribution(dir, attr);
  AttributionTensor back = load_attribution(dir);
  CHECK(back.n_records == attr.n_records);
  CHECK(back.n_classes == attr.n_classes);
  CHECK(back.values == attr.values);
  CHECK(load_attribution(dir / "attr.f32").values == attr.values);
  std::filesystem::remove_all(dir);

  IntervalRule rule;
  rule.record_id = "rec7";
  rule.class_index = 1;
  rule.coverage = 0.25;
  rule.confidence = 0.75;
  rule.degenerate = true;
  rule.source_labels = LabelVec(3);
  rule.source_labels.set(1);
  RuleConjunct conj;
  conj.time = 4;
  conj.channel = 2;
  conj.low = -1.25;
  conj.high = 3.5;
  rule.conjuncts = {conj};

  std::filesystem::path rules_path = std::filesystem::temp_directory_path() / "cfx_rules.jsonl";
  write_rules_jsonl(rules_path, {rule});
  auto loaded = load_rules_jsonl(rules_path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].record_id == rule.record_id);
  CHECK(loaded[0].class_index == rule.class_index);
  CHECK(loaded[0].coverage == doctest::Approx(rule.coverage));
  CHECK(loaded[0].degenerate == rule.degenerate);
  CHECK(loaded[0].source_labels == rule.source_labels);
  REQUIRE(loaded[0].conjuncts.size() == 1);
  CHECK(loaded[0].conjuncts[0].low == doctest::Approx(conj.low));
  CHECK(loaded[0].conjuncts[0].high == doctest::Approx(conj.high));
  std::filesystem::remove(rules_path);
}
