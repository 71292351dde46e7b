#include "cfx/classifier.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace cfx {

using json = nlohmann::ordered_json;

LabelVec predict_labels(const ProbVec& probs, const ModelThresholds& thresholds) {
  if (probs.size() != thresholds.t.size())
    throw CfxError("predict_labels: probs and thresholds length mismatch");
  LabelVec lv(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) lv.set(i, probs[i] > thresholds.t[i]);
  return lv;
}

ThresholdSelection select_thresholds(const std::vector<ProbVec>& probs_per_record,
                                     const std::vector<LabelVec>& labels) {
  if (probs_per_record.empty() || probs_per_record.size() != labels.size())
    throw CfxError("select_thresholds: empty or misaligned inputs");
  std::size_t n_classes = probs_per_record.front().size();
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i].size() != n_classes || probs_per_record[i].size() != n_classes)
      throw CfxError("select_thresholds: inconsistent class count");

  ThresholdSelection sel;
  sel.thresholds.t.assign(n_classes, 0.5);
  sel.fallback_flags.assign(n_classes, 0);

  for (std::size_t cls = 0; cls < n_classes; ++cls) {
    std::size_t n_pos = 0;
    for (const LabelVec& lv : labels) n_pos += lv.test(cls) ? 1 : 0;
    if (n_pos == 0) {
      sel.fallback_flags[cls] = 1;
      continue;
    }
    double best_f1 = -1.0;
    double best_t = 0.5;
    for (int g = 1; g <= 999; ++g) {
      double t = g / 1000.0;
      std::size_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        // The sweep treats a score equal to the candidate threshold as
        // positive; the smallest maximizer therefore lands just above the
        // top negative score.
        bool pred = probs_per_record[i][cls] >= t;
        bool truth = labels[i].test(cls);
        if (pred && truth)
          ++tp;
        else if (pred && !truth)
          ++fp;
        else if (!pred && truth)
          ++fn;
      }
      double f1 = (2.0 * tp + fp + fn) > 0 ? (2.0 * tp) / (2.0 * tp + fp + fn) : 0.0;
      if (f1 > best_f1) {
        best_f1 = f1;
        best_t = t;
      }
    }
    sel.thresholds.t[cls] = best_t;
  }
  return sel;
}

ProbVec Model::predict_proba(const Series& s) const {
  int et = expected_timesteps();
  int ec = expected_channels();
  if ((et >= 0 && s.t != et) || (ec >= 0 && s.c != ec))
    throw CfxError("predict_proba: series shape (" + std::to_string(s.t) + "," +
                   std::to_string(s.c) + ") does not match model (" + std::to_string(et) + "," +
                   std::to_string(ec) + ")");
  return compute_proba(s);
}

void Model::set_thresholds(ModelThresholds th) {
  if (th.t.size() != num_classes())
    throw CfxError("set_thresholds: wrong length");
  for (double v : th.t)
    if (!(v > 0.0 && v < 1.0)) throw CfxError("set_thresholds: thresholds must lie in (0,1)");
  thresholds_ = std::move(th);
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::vector<double> ReferenceClassifier::features(const Series& s) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(s.c) * 5);
  for (int ch = 0; ch < s.c; ++ch) {
    double sum = 0.0, mn = s.at(0, ch), mx = s.at(0, ch);
    for (int t = 0; t < s.t; ++t) {
      double v = s.at(t, ch);
      sum += v;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    double mean = sum / s.t;
    double sq = 0.0, adiff = 0.0;
    for (int t = 0; t < s.t; ++t) {
      double v = s.at(t, ch);
      sq += (v - mean) * (v - mean);
      if (t > 0) adiff += std::abs(v - s.at(t - 1, ch));
    }
    out.push_back(mean);
    out.push_back(std::sqrt(sq / s.t));
    out.push_back(mn);
    out.push_back(mx);
    out.push_back(adiff / (s.t - 1));
  }
  return out;
}

ProbVec ReferenceClassifier::compute_proba(const Series& s) const {
  std::vector<double> f = features(s);
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = (f[j] - feat_mu_[j]) / feat_sd_[j];
  ProbVec probs(classes_.size());
  for (std::size_t cls = 0; cls < classes_.size(); ++cls) {
    const std::vector<double>& w = weights_[cls];
    double z = w.back();
    for (std::size_t j = 0; j < f.size(); ++j) z += w[j] * f[j];
    probs[cls] = sigmoid(z);
  }
  return probs;
}

std::unique_ptr<ReferenceClassifier> fit_reference_classifier(const Dataset& d,
                                                              const ReferenceConfig& cfg) {
  validate_dataset(d);
  for (std::size_t cls = 0; cls < d.class_names.size(); ++cls) {
    bool any = false;
    for (const LabelVec& lv : d.labels) any = any || lv.test(cls);
    if (!any)
      throw CfxError("fit_reference_classifier: class " + d.class_names[cls] +
                     " has no positive example");
  }

  auto model = std::unique_ptr<ReferenceClassifier>(new ReferenceClassifier());
  model->classes_ = d.class_names;
  model->t_ = d.n_timesteps();
  model->c_ = d.n_channels();
  model->config_ = cfg;

  std::size_t n = d.records.size();
  std::vector<std::vector<double>> feats(n);
  for (std::size_t i = 0; i < n; ++i) feats[i] = model->features(d.records[i]);
  std::size_t nf = feats.front().size();

  model->feat_mu_.assign(nf, 0.0);
  model->feat_sd_.assign(nf, 0.0);
  for (const auto& f : feats)
    for (std::size_t j = 0; j < nf; ++j) model->feat_mu_[j] += f[j];
  for (double& m : model->feat_mu_) m /= static_cast<double>(n);
  for (const auto& f : feats)
    for (std::size_t j = 0; j < nf; ++j) {
      double dlt = f[j] - model->feat_mu_[j];
      model->feat_sd_[j] += dlt * dlt;
    }
  for (double& sd : model->feat_sd_) {
    sd = std::sqrt(sd / static_cast<double>(n));
    if (sd < 1e-12) sd = 1.0;
  }
  for (auto& f : feats)
    for (std::size_t j = 0; j < nf; ++j) f[j] = (f[j] - model->feat_mu_[j]) / model->feat_sd_[j];

  // Full-batch gradient descent from zero init: deterministic independent of seed.
  model->weights_.assign(d.class_names.size(), std::vector<double>(nf + 1, 0.0));
  for (std::size_t cls = 0; cls < d.class_names.size(); ++cls) {
    std::vector<double>& w = model->weights_[cls];
    std::vector<double> grad(nf + 1);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double z = w.back();
        for (std::size_t j = 0; j < nf; ++j) z += w[j] * feats[i][j];
        double err = sigmoid(z) - (d.labels[i].test(cls) ? 1.0 : 0.0);
        for (std::size_t j = 0; j < nf; ++j) grad[j] += err * feats[i][j];
        grad[nf] += err;
      }
      for (std::size_t j = 0; j < nf; ++j)
        w[j] -= cfg.learning_rate * (grad[j] / static_cast<double>(n) + cfg.l2 * w[j]);
      w[nf] -= cfg.learning_rate * grad[nf] / static_cast<double>(n);
    }
  }

  std::vector<ProbVec> train_probs(n);
  for (std::size_t i = 0; i < n; ++i) train_probs[i] = model->predict_proba(d.records[i]);
  ThresholdSelection sel = select_thresholds(train_probs, d.labels);
  model->thresholds_ = sel.thresholds;
  return model;
}

void ReferenceClassifier::save(const std::filesystem::path& path) const {
  json j;
  j["kind"] = "reference";
  j["classes"] = classes_;
  j["n_timesteps"] = t_;
  j["n_channels"] = c_;
  j["feature_mu"] = feat_mu_;
  j["feature_sd"] = feat_sd_;
  j["weights"] = weights_;
  j["thresholds"] = thresholds_.t;
  j["config"] = {{"seed", config_.seed},
                 {"epochs", config_.epochs},
                 {"learning_rate", config_.learning_rate},
                 {"l2", config_.l2}};
  atomic_write(path, j.dump(2) + "\n");
}

std::unique_ptr<ReferenceClassifier> ReferenceClassifier::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw CfxError("model file " + path.string() + ": " + e.what());
  }
  if (j.value("kind", "") != "reference")
    throw CfxError("model file " + path.string() + ": not a reference classifier");
  auto model = std::unique_ptr<ReferenceClassifier>(new ReferenceClassifier());
  try {
    model->classes_ = j.at("classes").get<std::vector<std::string>>();
    model->t_ = j.at("n_timesteps").get<int>();
    model->c_ = j.at("n_channels").get<int>();
    model->feat_mu_ = j.at("feature_mu").get<std::vector<double>>();
    model->feat_sd_ = j.at("feature_sd").get<std::vector<double>>();
    model->weights_ = j.at("weights").get<std::vector<std::vector<double>>>();
    model->thresholds_.t = j.at("thresholds").get<std::vector<double>>();
    model->config_.seed = j.at("config").at("seed").get<std::uint64_t>();
    model->config_.epochs = j.at("config").at("epochs").get<int>();
    model->config_.learning_rate = j.at("config").at("learning_rate").get<double>();
    model->config_.l2 = j.at("config").at("l2").get<double>();
  } catch (const json::exception& e) {
    throw CfxError("model file " + path.string() + ": " + e.what());
  }
  return model;
}

}  // namespace cfx
