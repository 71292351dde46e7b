#include "cfx/prototypes.hpp"

#include <algorithm>

#include <json.hpp>

#include "cfx/dataset_io.hpp"

namespace cfx {

using json = nlohmann::ordered_json;

namespace {
constexpr const char* kLibraryVersion = "0.1.0";
}

std::vector<const PrototypeEntry*> PrototypeDB::entries_for_class(int class_index) const {
  std::vector<const PrototypeEntry*> out;
  for (const PrototypeEntry& e : entries)
    if (e.class_index == class_index) out.push_back(&e);
  return out;
}

std::vector<std::vector<std::size_t>> filter_samples(const Dataset& dataset, const Model& model) {
  if (model.thresholds().size() != dataset.class_names.size())
    throw CfxError("filter_samples: model thresholds not calibrated for this class list");
  std::vector<std::vector<std::size_t>> per_class(dataset.class_names.size());

  std::vector<LabelVec> predictions(dataset.size());
  parallel_for(dataset.size(), [&](std::size_t i) { predictions[i] = model.predict(dataset.records[i]); });

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const LabelVec& truth = dataset.labels[i];
    if (truth.count() != 1) continue;
    if (predictions[i] != truth) continue;
    for (std::size_t l = 0; l < truth.size(); ++l)
      if (truth.test(l)) per_class[l].push_back(i);
  }
  for (std::size_t l = 0; l < per_class.size(); ++l)
    if (per_class[l].empty())
      log_info("filter_samples: class " + dataset.class_names[l] + " has no surviving records");
  return per_class;
}

PrototypeDB mine_prototypes(const Dataset& dataset, const Model& model, const MiningConfig& config) {
  validate_dataset(dataset);
  PrototypeDB db;
  db.class_names = dataset.class_names;
  db.config = config;
  db.n_timesteps = dataset.n_timesteps();
  db.n_channels = dataset.n_channels();

  int band = config.band.value_or(std::max(1, dataset.n_timesteps() / 10));
  auto filtered = filter_samples(dataset, model);

  for (std::size_t l = 0; l < filtered.size(); ++l) {
    const std::vector<std::size_t>& rows = filtered[l];
    ClassMiningStats st;
    st.class_index = static_cast<int>(l);
    st.n_filtered = static_cast<int>(rows.size());

    if (rows.empty()) {
      st.passthrough = true;
      db.stats.push_back(st);
      log_info("mine_prototypes: class " + dataset.class_names[l] + " omitted (no records)");
      continue;
    }
    if (rows.size() < 3) {
      st.passthrough = true;
      int cluster = 0;
      for (std::size_t r : rows) {
        PrototypeEntry e;
        e.class_index = static_cast<int>(l);
        e.cluster_index = cluster++;
        e.record_id = dataset.records[r].record_id;
        e.series = dataset.records[r];
        e.mean_intra_dtw = 0.0;
        db.entries.push_back(std::move(e));
      }
      db.stats.push_back(st);
      log_info("mine_prototypes: class " + dataset.class_names[l] + " passed through " +
               std::to_string(rows.size()) + " record(s)");
      continue;
    }

    std::vector<const Series*> members;
    members.reserve(rows.size());
    for (std::size_t r : rows) members.push_back(&dataset.records[r]);
    DistanceMatrix m = distance_matrix(members, band);

    KMeansConfig kc;
    kc.restarts = config.kmeans_restarts;
    StructureSelection sel =
        select_structure(m, {config.dim_min, config.dim_max}, {config.k_min, config.k_max},
                         mix_seed(config.seed, hash_str(dataset.class_names[l])), MdsConfig{}, kc);
    st.dims = sel.dims;
    st.k = sel.k;
    st.silhouette = sel.silhouette;
    st.k_truncated = sel.k_range_truncated;

    for (int cluster = 0; cluster < sel.k; ++cluster) {
      std::vector<std::size_t> cluster_rows;
      for (std::size_t i = 0; i < m.n; ++i)
        if (sel.assignment.labels[i] == cluster) cluster_rows.push_back(i);
      std::size_t med = medoid(cluster_rows, m);

      PrototypeEntry e;
      e.class_index = static_cast<int>(l);
      e.cluster_index = cluster;
      e.record_id = m.ids[med];
      e.series = dataset.records[rows[med]];
      double sum = 0.0;
      for (std::size_t o : cluster_rows) sum += m.at(med, o);
      e.mean_intra_dtw =
          cluster_rows.size() > 1 ? sum / static_cast<double>(cluster_rows.size() - 1) : 0.0;
      db.entries.push_back(std::move(e));
    }
    db.stats.push_back(st);
    log_info("mine_prototypes: class " + dataset.class_names[l] + " -> dims=" +
             std::to_string(sel.dims) + " k=" + std::to_string(sel.k) +
             " silhouette=" + std::to_string(sel.silhouette));
  }
  return db;
}

void save_prototype_db(const std::filesystem::path& dir, const PrototypeDB& db) {
  std::filesystem::create_directories(dir);
  json j;
  j["version"] = kLibraryVersion;
  j["classes"] = db.class_names;
  j["n_timesteps"] = db.n_timesteps;
  j["n_channels"] = db.n_channels;
  json cfg;
  if (db.config.band)
    cfg["band"] = *db.config.band;
  else
    cfg["band"] = nullptr;
  cfg["dim_min"] = db.config.dim_min;
  cfg["dim_max"] = db.config.dim_max;
  cfg["k_min"] = db.config.k_min;
  cfg["k_max"] = db.config.k_max;
  cfg["seed"] = db.config.seed;
  cfg["kmeans_restarts"] = db.config.kmeans_restarts;
  j["config"] = cfg;

  json entries = json::array();
  for (const PrototypeEntry& e : db.entries) {
    entries.push_back({{"class_index", e.class_index},
                       {"cluster_index", e.cluster_index},
                       {"record_id", e.record_id},
                       {"mean_intra_dtw", e.mean_intra_dtw}});
  }
  j["entries"] = entries;

  json stats = json::array();
  for (const ClassMiningStats& s : db.stats) {
    stats.push_back({{"class_index", s.class_index},
                     {"n_filtered", s.n_filtered},
                     {"dims", s.dims},
                     {"k", s.k},
                     {"silhouette", s.silhouette},
                     {"passthrough", s.passthrough},
                     {"k_truncated", s.k_truncated}});
  }
  j["stats"] = stats;
  atomic_write(dir / "prototypes.json", j.dump(2) + "\n");

  std::vector<float> raw;
  raw.reserve(db.entries.size() * static_cast<std::size_t>(db.n_timesteps) * db.n_channels);
  for (const PrototypeEntry& e : db.entries)
    raw.insert(raw.end(), e.series.values.begin(), e.series.values.end());
  write_f32(dir / "proto_signals.f32", raw);
}

PrototypeDB load_prototype_db(const std::filesystem::path& dir) {
  json j;
  try {
    j = json::parse(read_text_file(dir / "prototypes.json"));
  } catch (const json::exception& e) {
    throw CfxError("prototypes.json: " + std::string(e.what()));
  }
  PrototypeDB db;
  try {
    db.class_names = j.at("classes").get<std::vector<std::string>>();
    db.n_timesteps = j.at("n_timesteps").get<int>();
    db.n_channels = j.at("n_channels").get<int>();
    const json& cfg = j.at("config");
    if (!cfg.at("band").is_null()) db.config.band = cfg.at("band").get<int>();
    db.config.dim_min = cfg.at("dim_min").get<int>();
    db.config.dim_max = cfg.at("dim_max").get<int>();
    db.config.k_min = cfg.at("k_min").get<int>();
    db.config.k_max = cfg.at("k_max").get<int>();
    db.config.seed = cfg.at("seed").get<std::uint64_t>();
    db.config.kmeans_restarts = cfg.at("kmeans_restarts").get<int>();

    std::size_t per = static_cast<std::size_t>(db.n_timesteps) * db.n_channels;
    std::vector<float> raw = read_f32(dir / "proto_signals.f32", j.at("entries").size() * per);
    std::size_t row = 0;
    for (const json& je : j.at("entries")) {
      PrototypeEntry e;
      e.class_index = je.at("class_index").get<int>();
      e.cluster_index = je.at("cluster_index").get<int>();
      e.record_id = je.at("record_id").get<std::string>();
      e.mean_intra_dtw = je.at("mean_intra_dtw").get<double>();
      e.series = Series(e.record_id, db.n_timesteps, db.n_channels);
      std::copy_n(raw.begin() + static_cast<std::ptrdiff_t>(row * per), per, e.series.values.begin());
      db.entries.push_back(std::move(e));
      ++row;
    }
    for (const json& js : j.at("stats")) {
      ClassMiningStats s;
      s.class_index = js.at("class_index").get<int>();
      s.n_filtered = js.at("n_filtered").get<int>();
      s.dims = js.at("dims").get<int>();
      s.k = js.at("k").get<int>();
      s.silhouette = js.at("silhouette").get<double>();
      s.passthrough = js.at("passthrough").get<bool>();
      s.k_truncated = js.at("k_truncated").get<bool>();
      db.stats.push_back(s);
    }
  } catch (const json::exception& e) {
    throw CfxError("prototypes.json: " + std::string(e.what()));
  }
  return db;
}

}  // namespace cfx
