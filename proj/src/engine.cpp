#include "cfx/engine.hpp"

#include <algorithm>
#include <limits>

#include <json.hpp>

#include "cfx/dataset_io.hpp"
#include "cfx/dtw.hpp"

namespace cfx {

using json = nlohmann::ordered_json;

int select_target_class(const ProbVec& probs, const LabelVec& predicted,
                        const std::vector<std::string>& class_names) {
  std::size_t n = class_names.size();
  if (probs.size() != n || predicted.size() != n)
    throw CfxError("select_target_class: class count mismatch");

  bool all = true;
  for (std::size_t i = 0; i < n; ++i) all = all && predicted.test(i);
  if (all) throw CfxError("select_target_class: every class is already predicted, no target");

  int norm_idx = -1;
  for (std::size_t i = 0; i < n; ++i)
    if (class_names[i] == "NORM") norm_idx = static_cast<int>(i);
  if (norm_idx >= 0 && !predicted.test(static_cast<std::size_t>(norm_idx)) && predicted.any())
    return norm_idx;

  int best = -1;
  double best_p = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (predicted.test(i)) continue;
    if (probs[i] > best_p) {
      best_p = probs[i];
      best = static_cast<int>(i);
    }
  }
  return best;
}

const PrototypeEntry& retrieve_prototype(const PrototypeDB& db, const Series& query, int target,
                                         std::optional<int> band) {
  auto candidates = db.entries_for_class(target);
  if (candidates.empty())
    throw CfxError("retrieve_prototype: no prototypes for class index " + std::to_string(target));
  const PrototypeEntry* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const PrototypeEntry* e : candidates) {
    double d = dtw_distance(query, e->series, band);
    if (d < best_d) {
      best_d = d;
      best = e;
    }
  }
  return *best;
}

CounterfactualResult explain(const Series& query, const Model& model, const PrototypeDB& db,
                             const ExplainOptions& options) {
  CounterfactualResult res;
  res.query_id = query.record_id;
  res.query_probs = model.predict_proba(query);
  res.query_labels = predict_labels(res.query_probs, model.thresholds());

  int target;
  if (options.target) {
    target = *options.target;
    if (target < 0 || static_cast<std::size_t>(target) >= model.num_classes())
      throw CfxError("explain: target class index out of range");
    if (res.query_labels.test(static_cast<std::size_t>(target)))
      throw CfxError("explain: target class " + db.class_names[static_cast<std::size_t>(target)] +
                     " is already predicted for this query; pick a class the model does not "
                     "currently assign");
  } else {
    target = select_target_class(res.query_probs, res.query_labels, db.class_names);
  }
  res.target_class = target;
  res.target_name = db.class_names[static_cast<std::size_t>(target)];

  LabelVec target_vec(model.num_classes());
  target_vec.set(static_cast<std::size_t>(target));

  int band = options.band.value_or(std::max(1, query.t / 10));
  const PrototypeEntry& proto = retrieve_prototype(db, query, target, band);
  res.prototype_id = proto.record_id;

  VariantResult original;
  original.name = "Original";
  original.series = proto.series;
  original.mask = Mask(query.t, query.c);
  std::fill(original.mask.m.begin(), original.mask.m.end(), std::uint8_t{1});
  original.probs = model.predict_proba(proto.series);
  original.valid = predict_labels(original.probs, model.thresholds()) == target_vec;
  original.mask_fraction = 1.0;
  res.variants.push_back(std::move(original));

  SparsifyResult sparse = sparsify(query, proto.series, model, target_vec, options.sparsify);
  VariantResult sv;
  sv.name = "Sparse";
  sv.probs = model.predict_proba(sparse.series);
  sv.valid = sparse.attained;
  sv.mask_fraction = sparse.mask.fraction();
  sv.series = std::move(sparse.series);
  sv.mask = std::move(sparse.mask);
  res.variants.push_back(std::move(sv));

  try {
    RPeaks qp = detect_rpeaks_auto(query, options.sampling_rate);
    if (qp.empty()) throw AlignmentUnavailable("explain: query has no detectable R-peaks");
    RPeaks pp = detect_rpeaks_auto(proto.series, options.sampling_rate);
    Series aligned = align_prototype(proto.series, pp, query, qp);
    SparsifyResult asr = sparsify_best_effort(query, aligned, model, target_vec, options.sparsify);
    VariantResult av;
    av.name = "Aligned Sparse";
    av.probs = model.predict_proba(asr.series);
    av.valid = asr.attained;
    av.mask_fraction = asr.mask.fraction();
    av.series = std::move(asr.series);
    av.mask = std::move(asr.mask);
    res.aligned_available = true;
    res.aligned_valid = av.valid;
    res.variants.push_back(std::move(av));
  } catch (const AlignmentUnavailable& e) {
    res.aligned_available = false;
    res.aligned_valid = false;
    log_info(std::string("explain: aligned variant unavailable: ") + e.what());
  }
  return res;
}

namespace {

json rle_encode(const Mask& mask) {
  json channels = json::array();
  for (int c = 0; c < mask.c; ++c) {
    json runs = json::array();
    bool current = false;  // runs alternate starting with a zeros-run
    int len = 0;
    for (int t = 0; t < mask.t; ++t) {
      bool v = mask.at(t, c);
      if (v == current) {
        ++len;
      } else {
        runs.push_back(len);
        current = v;
        len = 1;
      }
    }
    runs.push_back(len);
    channels.push_back(runs);
  }
  return channels;
}

Mask rle_decode(const json& channels, int t, int c) {
  Mask mask(t, c);
  if (static_cast<int>(channels.size()) != c) throw CfxError("result mask: channel count mismatch");
  for (int ch = 0; ch < c; ++ch) {
    bool current = false;
    int pos = 0;
    for (const json& run : channels[static_cast<std::size_t>(ch)]) {
      int len = run.get<int>();
      for (int i = 0; i < len; ++i) {
        if (pos >= t) throw CfxError("result mask: runs exceed T");
        mask.set(pos++, ch, current);
      }
      current = !current;
    }
    if (pos != t) throw CfxError("result mask: runs do not cover T");
  }
  return mask;
}

}  // namespace

void save_result(const std::filesystem::path& dir, const CounterfactualResult& result) {
  std::filesystem::create_directories(dir);
  json j;
  j["query_id"] = result.query_id;
  j["target_class"] = result.target_class;
  j["target_name"] = result.target_name;
  j["prototype_id"] = result.prototype_id;
  j["query_probs"] = result.query_probs;
  std::vector<int> bits(result.query_labels.bits.begin(), result.query_labels.bits.end());
  j["query_labels"] = bits;
  j["aligned_available"] = result.aligned_available;
  j["aligned_valid"] = result.aligned_valid;
  int t = result.variants.empty() ? 0 : result.variants.front().series.t;
  int c = result.variants.empty() ? 0 : result.variants.front().series.c;
  j["n_timesteps"] = t;
  j["n_channels"] = c;
  json variants = json::array();
  for (const VariantResult& v : result.variants) {
    json vj;
    vj["name"] = v.name;
    vj["probs"] = v.probs;
    vj["mask_fraction"] = v.mask_fraction;
    vj["valid"] = v.valid;
    vj["mask_rle"] = rle_encode(v.mask);
    variants.push_back(vj);
  }
  j["variants"] = variants;
  atomic_write(dir / "result.json", j.dump(2) + "\n");

  std::vector<float> raw;
  for (const VariantResult& v : result.variants)
    raw.insert(raw.end(), v.series.values.begin(), v.series.values.end());
  write_f32(dir / "cf_signals.f32", raw);
}

CounterfactualResult load_result(const std::filesystem::path& dir) {
  json j;
  try {
    j = json::parse(read_text_file(dir / "result.json"));
  } catch (const json::exception& e) {
    throw CfxError("result.json: " + std::string(e.what()));
  }
  CounterfactualResult res;
  try {
    res.query_id = j.at("query_id").get<std::string>();
    res.target_class = j.at("target_class").get<int>();
    res.target_name = j.at("target_name").get<std::string>();
    res.prototype_id = j.at("prototype_id").get<std::string>();
    res.query_probs = j.at("query_probs").get<ProbVec>();
    std::vector<int> bits = j.at("query_labels").get<std::vector<int>>();
    res.query_labels.bits.assign(bits.begin(), bits.end());
    res.aligned_available = j.at("aligned_available").get<bool>();
    res.aligned_valid = j.at("aligned_valid").get<bool>();
    int t = j.at("n_timesteps").get<int>();
    int c = j.at("n_channels").get<int>();
    const json& variants = j.at("variants");
    std::size_t per = static_cast<std::size_t>(t) * static_cast<std::size_t>(c);
    std::vector<float> raw = read_f32(dir / "cf_signals.f32", variants.size() * per);
    std::size_t row = 0;
    for (const json& vj : variants) {
      VariantResult v;
      v.name = vj.at("name").get<std::string>();
      v.probs = vj.at("probs").get<ProbVec>();
      v.mask_fraction = vj.at("mask_fraction").get<double>();
      v.valid = vj.at("valid").get<bool>();
      v.mask = rle_decode(vj.at("mask_rle"), t, c);
      v.series = Series(res.query_id + ":" + v.name, t, c);
      std::copy_n(raw.begin() + static_cast<std::ptrdiff_t>(row * per), per,
                  v.series.values.begin());
      res.variants.push_back(std::move(v));
      ++row;
    }
  } catch (const json::exception& e) {
    throw CfxError("result.json: " + std::string(e.what()));
  }
  return res;
}

}  // namespace cfx
