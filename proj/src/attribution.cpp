#include "cfx/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "cfx/dataset_io.hpp"

namespace cfx {

using json = nlohmann::ordered_json;

std::span<const float> AttributionTensor::slice(int record, int cls) const {
  std::size_t per = slice_size();
  std::size_t offset = (static_cast<std::size_t>(record) * n_classes + cls) * per;
  return {values.data() + offset, per};
}

AttributionTensor load_attribution(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  fs::path f32 = fs::is_directory(path) ? path / "attr.f32" : path;
  fs::path manifest_path = f32.parent_path() / "attr_manifest.json";

  json manifest;
  try {
    manifest = json::parse(read_text_file(manifest_path));
  } catch (const json::exception& e) {
    throw CfxError("attr_manifest.json: " + std::string(e.what()));
  }
  AttributionTensor attr;
  attr.n_records = manifest.at("n_records").get<int>();
  attr.n_classes = manifest.at("n_classes").get<int>();
  attr.n_timesteps = manifest.at("n_timesteps").get<int>();
  attr.n_channels = manifest.at("n_channels").get<int>();
  attr.provenance = manifest.value("provenance", "");
  std::size_t count = static_cast<std::size_t>(attr.n_records) * attr.n_classes *
                      attr.n_timesteps * attr.n_channels;
  attr.values = read_f32(f32, count);
  for (float v : attr.values)
    if (!std::isfinite(v)) throw CfxError("attribution tensor has non-finite values");
  return attr;
}

void write_attribution(const std::filesystem::path& dir, const AttributionTensor& attr) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["n_records"] = attr.n_records;
  manifest["n_classes"] = attr.n_classes;
  manifest["n_timesteps"] = attr.n_timesteps;
  manifest["n_channels"] = attr.n_channels;
  manifest["provenance"] = attr.provenance;
  atomic_write(dir / "attr_manifest.json", manifest.dump(2) + "\n");
  write_f32(dir / "attr.f32", attr.values);
}

double global_threshold(const AttributionTensor& attr, double percentile) {
  if (attr.values.empty()) throw CfxError("global_threshold: empty tensor");
  if (!(percentile > 0.0 && percentile < 100.0))
    throw CfxError("global_threshold: percentile must lie in (0,100)");
  std::vector<double> mag(attr.values.size());
  for (std::size_t i = 0; i < attr.values.size(); ++i) mag[i] = std::abs(static_cast<double>(attr.values[i]));
  std::sort(mag.begin(), mag.end());
  double rank = percentile / 100.0 * static_cast<double>(mag.size() - 1);
  auto lo = static_cast<std::size_t>(rank);
  double frac = rank - static_cast<double>(lo);
  if (lo + 1 >= mag.size()) return mag.back();
  return mag[lo] + frac * (mag[lo + 1] - mag[lo]);
}

std::vector<std::pair<int, int>> important_features(std::span<const float> attr_slice, int t,
                                                    int c, double threshold) {
  if (attr_slice.size() != static_cast<std::size_t>(t) * static_cast<std::size_t>(c))
    throw CfxError("important_features: slice size does not match T*C");
  std::vector<std::pair<int, int>> out;
  for (int ti = 0; ti < t; ++ti)
    for (int ci = 0; ci < c; ++ci)
      if (std::abs(static_cast<double>(attr_slice[static_cast<std::size_t>(ti) * c + ci])) >= threshold)
        out.emplace_back(ti, ci);
  return out;
}

RuleInputs make_rule_inputs(const AttributionTensor& attr, const Dataset& dataset,
                            const RuleConfig& config) {
  if (attr.n_timesteps != dataset.n_timesteps() || attr.n_channels != dataset.n_channels() ||
      attr.n_records != static_cast<int>(dataset.size()))
    throw CfxError("make_rule_inputs: attribution dimensions do not match the dataset");
  if (attr.n_classes != static_cast<int>(dataset.class_names.size()))
    throw CfxError("make_rule_inputs: attribution class count does not match the dataset");

  RuleInputs in;
  in.threshold = global_threshold(attr, config.percentile);

  std::size_t per = static_cast<std::size_t>(dataset.n_timesteps()) * dataset.n_channels();
  in.sigma_f.assign(per, 0.0);
  std::vector<double> mean(per, 0.0);
  for (const Series& s : dataset.records)
    for (std::size_t i = 0; i < per; ++i) mean[i] += s.values[i];
  for (double& m : mean) m /= static_cast<double>(dataset.size());
  for (const Series& s : dataset.records)
    for (std::size_t i = 0; i < per; ++i) {
      double d = s.values[i] - mean[i];
      in.sigma_f[i] += d * d;
    }
  for (double& v : in.sigma_f) v = std::sqrt(v / static_cast<double>(dataset.size()));
  return in;
}

std::vector<RuleConjunct> stable_intervals(const Model& model, const Series& series,
                                           const std::vector<std::pair<int, int>>& features,
                                           const std::vector<double>& sigma_f,
                                           const RuleConfig& config, bool* degenerate) {
  if (features.empty()) throw CfxError("stable_intervals: empty feature set");
  if (sigma_f.size() != series.values.size())
    throw CfxError("stable_intervals: sigma_f length must equal T*C");
  LabelVec original = model.predict(series);

  std::size_t nf = features.size();
  std::vector<double> lo(nf, std::numeric_limits<double>::infinity());
  std::vector<double> hi(nf, -std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> any_kept(nf, 0);

  std::mt19937_64 rng(mix_seed(config.seed, hash_str(series.record_id)));
  Series perturbed = series;
  std::vector<double> draw(nf);
  for (int m = 0; m < config.n_perturb; ++m) {
    for (std::size_t fi = 0; fi < nf; ++fi) {
      auto [t, c] = features[fi];
      double x = series.at(t, c);
      double s = sigma_f[static_cast<std::size_t>(t) * series.c + c] * config.perturb_scale;
      double v;
      if (config.perturb_kind == RuleConfig::Kind::Gaussian)
        v = x + s * rng_normal(rng);
      else
        v = x - s + 2.0 * s * rng_uniform(rng);
      draw[fi] = v;
      perturbed.at(t, c) = static_cast<float>(v);
    }
    if (model.predict(perturbed) == original) {
      for (std::size_t fi = 0; fi < nf; ++fi) {
        lo[fi] = std::min(lo[fi], draw[fi]);
        hi[fi] = std::max(hi[fi], draw[fi]);
        any_kept[fi] = 1;
      }
    }
  }

  bool collapsed = false;
  std::vector<RuleConjunct> out;
  out.reserve(nf);
  for (std::size_t fi = 0; fi < nf; ++fi) {
    auto [t, c] = features[fi];
    double x = series.at(t, c);
    RuleConjunct rc;
    rc.time = t;
    rc.channel = c;
    if (any_kept[fi]) {
      double mn = std::min(lo[fi], x);
      double mx = std::max(hi[fi], x);
      rc.low = std::nextafter(mn, -std::numeric_limits<double>::infinity());
      rc.high = mx;
    } else {
      collapsed = true;
      rc.low = std::nextafter(x, -std::numeric_limits<double>::infinity());
      rc.high = x;
    }
    out.push_back(rc);
  }
  if (degenerate) *degenerate = collapsed;
  return out;
}

IntervalRule extract_rule(const Model& model, const Series& series,
                          std::span<const float> attr_slice, const RuleInputs& inputs,
                          const Dataset& dataset, int class_index, const RuleConfig& config) {
  auto features = important_features(attr_slice, series.t, series.c, inputs.threshold);
  if (features.empty())
    throw EmptyRuleError("extract_rule: no attribution for record " + series.record_id +
                         " reaches the global threshold");
  IntervalRule rule;
  rule.record_id = series.record_id;
  rule.class_index = class_index;
  rule.source_labels = model.predict(series);
  rule.conjuncts =
      stable_intervals(model, series, features, inputs.sigma_f, config, &rule.degenerate);
  auto [cov, conf] = score_rule(rule, dataset, model);
  rule.coverage = cov;
  rule.confidence = conf;
  return rule;
}

std::pair<double, double> score_rule(const IntervalRule& rule, const Dataset& dataset,
                                     const Model& model) {
  if (dataset.records.empty()) throw CfxError("score_rule: empty dataset");
  std::size_t covered = 0, matching = 0;
  for (const Series& s : dataset.records) {
    bool inside = true;
    for (const RuleConjunct& rc : rule.conjuncts) {
      double v = s.at(rc.time, rc.channel);
      if (!(v > rc.low && v <= rc.high)) {
        inside = false;
        break;
      }
    }
    if (!inside) continue;
    ++covered;
    if (model.predict(s) == rule.source_labels) ++matching;
  }
  double coverage = static_cast<double>(covered) / static_cast<double>(dataset.size());
  double confidence = covered > 0 ? static_cast<double>(matching) / static_cast<double>(covered) : 0.0;
  if (covered == 0) log_info("score_rule: rule for " + rule.record_id + " covers no records");
  return {coverage, confidence};
}

std::vector<float> occlusion_attribution(const Model& model, const Series& series, int window) {
  if (window < 1 || window > series.t)
    throw CfxError("occlusion_attribution: window must lie in [1, T]");
  ProbVec base = model.predict_proba(series);
  std::size_t n_classes = base.size();
  std::size_t per = static_cast<std::size_t>(series.t) * series.c;
  std::vector<float> attr(n_classes * per, 0.0f);

  std::vector<double> channel_mean(series.c, 0.0);
  for (int t = 0; t < series.t; ++t)
    for (int c = 0; c < series.c; ++c) channel_mean[c] += series.at(t, c);
  for (double& m : channel_mean) m /= series.t;

  Series occluded = series;
  int half = window / 2;
  for (int c = 0; c < series.c; ++c) {
    for (int t = 0; t < series.t; ++t) {
      // The window slides at the borders instead of shrinking, so every
      // probe replaces exactly `window` samples (window = T occludes the
      // whole channel regardless of t).
      int start = std::clamp(t - half, 0, series.t - window);
      int end = start + window - 1;
      for (int i = start; i <= end; ++i)
        occluded.at(i, c) = static_cast<float>(channel_mean[c]);
      ProbVec probs = model.predict_proba(occluded);
      for (int i = start; i <= end; ++i) occluded.at(i, c) = series.at(i, c);
      for (std::size_t l = 0; l < n_classes; ++l)
        attr[l * per + static_cast<std::size_t>(t) * series.c + c] =
            static_cast<float>(base[l] - probs[l]);
    }
  }
  return attr;
}

void write_rules_jsonl(const std::filesystem::path& path, const std::vector<IntervalRule>& rules) {
  std::string out;
  for (const IntervalRule& r : rules) {
    json j;
    j["record_id"] = r.record_id;
    j["class_index"] = r.class_index;
    json cj = json::array();
    for (const RuleConjunct& rc : r.conjuncts)
      cj.push_back({{"time", rc.time}, {"channel", rc.channel}, {"low", rc.low}, {"high", rc.high}});
    j["conjuncts"] = cj;
    j["coverage"] = r.coverage;
    j["confidence"] = r.confidence;
    std::vector<int> bits(r.source_labels.bits.begin(), r.source_labels.bits.end());
    j["source_labels"] = bits;
    j["degenerate"] = r.degenerate;
    out += j.dump();
    out += '\n';
  }
  atomic_write(path, out);
}

std::vector<IntervalRule> load_rules_jsonl(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  std::vector<IntervalRule> rules;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw CfxError("rules file " + path.string() + ": " + e.what());
    }
    IntervalRule r;
    r.record_id = j.at("record_id").get<std::string>();
    r.class_index = j.at("class_index").get<int>();
    for (const json& cj : j.at("conjuncts")) {
      RuleConjunct rc;
      rc.time = cj.at("time").get<int>();
      rc.channel = cj.at("channel").get<int>();
      rc.low = cj.at("low").get<double>();
      rc.high = cj.at("high").get<double>();
      r.conjuncts.push_back(rc);
    }
    r.coverage = j.at("coverage").get<double>();
    r.confidence = j.at("confidence").get<double>();
    std::vector<int> bits = j.at("source_labels").get<std::vector<int>>();
    r.source_labels.bits.assign(bits.begin(), bits.end());
    r.degenerate = j.at("degenerate").get<bool>();
    rules.push_back(std::move(r));
  }
  return rules;
}

}  // namespace cfx
