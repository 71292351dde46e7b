#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "cfx/prototypes.hpp"
#include "cfx/synthetic.hpp"
#include "support.hpp"

using namespace cfx;

namespace {

Dataset small_fixture(int per_class, std::uint64_t seed = 77) {
  SynthConfig cfg;
  cfg.n_classes = 2;
  cfg.per_class = per_class;
  cfg.t = 120;
  cfg.c = 2;
  cfg.seed = seed;
  return make_synthetic_dataset(cfg);
}

}  // namespace

TEST_CASE("filter_samples keeps exactly the single-label, exactly-predicted records") {
  Dataset d = small_fixture(10);
  auto model = fit_reference_classifier(d);

  // Turn one record multi-label: it must be excluded everywhere.
  d.labels[3].set(1);
  // Break another record's prediction by swapping ground truth.
  LabelVec swapped(2);
  swapped.set(1);
  d.labels[5] = swapped;

  auto kept = filter_samples(d, *model);
  REQUIRE(kept.size() == 2);
  for (const auto& rows : kept)
    for (std::size_t row : rows) {
      CHECK(row != 3);
      CHECK(d.labels[row].count() == 1);
      CHECK(model->predict(d.records[row]) == d.labels[row]);
    }
  // Record 5 claims class 1 but the model still reads class 0 morphology.
  for (std::size_t row : kept[1]) CHECK(row != 5);

  // A clean single-label record predicted correctly stays under its class.
  CHECK(std::find(kept[0].begin(), kept[0].end(), 0u) != kept[0].end());
}

TEST_CASE("mine_prototypes picks verbatim records per class") {
  Dataset d = small_fixture(20);
  auto model = fit_reference_classifier(d);
  MiningConfig cfg;
  cfg.seed = 13;
  PrototypeDB db = mine_prototypes(d, *model, cfg);

  CHECK(db.class_names == d.class_names);
  CHECK(db.n_timesteps == d.n_timesteps());
  CHECK(db.n_channels == d.n_channels());
  REQUIRE(db.stats.size() == 2);

  for (int cls = 0; cls < 2; ++cls) {
    auto entries = db.entries_for_class(cls);
    CHECK(entries.size() >= 1);
    CHECK(entries.size() <= 10);
    for (const PrototypeEntry* e : entries) {
      auto row = d.find_record(e->record_id);
      REQUIRE(row);
      CHECK(e->series.values == d.records[*row].values);  // verbatim dataset record
      CHECK(e->class_index == cls);
      CHECK(e->mean_intra_dtw >= 0.0);
    }
  }

  SUBCASE("mining is deterministic") {
    PrototypeDB again = mine_prototypes(d, *model, cfg);
    REQUIRE(again.entries.size() == db.entries.size());
    for (std::size_t i = 0; i < db.entries.size(); ++i) {
      CHECK(again.entries[i].record_id == db.entries[i].record_id);
      CHECK(again.entries[i].cluster_index == db.entries[i].cluster_index);
    }
  }

  SUBCASE("db round trips through disk") {
    std::filesystem::path dir = std::filesystem::temp_directory_path() / "cfx_db_roundtrip";
    std::filesystem::remove_all(dir);
    save_prototype_db(dir, db);
    PrototypeDB back = load_prototype_db(dir);
    CHECK(back.class_names == db.class_names);
    REQUIRE(back.entries.size() == db.entries.size());
    for (std::size_t i = 0; i < db.entries.size(); ++i) {
      CHECK(back.entries[i].record_id == db.entries[i].record_id);
      CHECK(back.entries[i].class_index == db.entries[i].class_index);
      CHECK(back.entries[i].series.values == db.entries[i].series.values);
      CHECK(back.entries[i].mean_intra_dtw ==
            doctest::Approx(db.entries[i].mean_intra_dtw).epsilon(1e-12));
    }
    REQUIRE(back.stats.size() == db.stats.size());
    CHECK(back.stats[0].silhouette == doctest::Approx(db.stats[0].silhouette).epsilon(1e-12));
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("classes with too few survivors pass through as their own prototypes") {
  Dataset d = small_fixture(6, 99);
  auto model = fit_reference_classifier(d);

  // Shrink class 1 to a single record: drop the rest from the dataset.
  Dataset trimmed;
  trimmed.class_names = d.class_names;
  trimmed.stats = d.stats;
  int kept_cls1 = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    bool is_cls1 = d.labels[i].test(1);
    if (is_cls1 && kept_cls1 >= 1) continue;
    if (is_cls1) ++kept_cls1;
    trimmed.records.push_back(d.records[i]);
    trimmed.labels.push_back(d.labels[i]);
  }

  PrototypeDB db = mine_prototypes(trimmed, *model, {});
  auto cls1 = db.entries_for_class(1);
  REQUIRE(cls1.size() == 1);
  CHECK(db.stats[1].passthrough);
  CHECK(db.stats[1].n_filtered == 1);
  CHECK(cls1[0]->mean_intra_dtw == 0.0);

  // Class 0 still goes through the clustering path.
  CHECK_FALSE(db.stats[0].passthrough);
}
