#include "cfx/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "cfx/dataset_io.hpp"
#include "cfx/external_model.hpp"
#include "cfx/svg.hpp"
#include "cfx/synthetic.hpp"

namespace cfx {

namespace fs = std::filesystem;

std::unique_ptr<Model> open_model(const ModelSpec& spec) {
  std::unique_ptr<Model> model;
  if (!spec.adapter.empty()) {
    model = std::make_unique<ExternalModel>(spec.adapter);
  } else {
    if (spec.model_file.empty()) throw CfxError("no model given: use --model FILE or --adapter CMD");
    model = ReferenceClassifier::load(spec.model_file);
  }
  if (!spec.thresholds.empty()) {
    ModelThresholds th;
    th.t = spec.thresholds;
    model->set_thresholds(std::move(th));
  }
  return model;
}

namespace {

void require_exists(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw CfxError(std::string(what) + " path does not exist: " + p.string());
}

std::string labels_to_names(const LabelVec& lv, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    if (!lv.test(i)) continue;
    if (!out.empty()) out += ';';
    out += names[i];
  }
  return out;
}

}  // namespace

int cmd_fit(const FitParams& p) {
  require_exists(p.dataset, "dataset");
  Dataset d = load_dataset(p.dataset);
  auto model = fit_reference_classifier(d, p.config);

  std::size_t exact = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (model->predict(d.records[i]) == d.labels[i]) ++exact;
  model->save(p.out);
  std::cout << "model: " << p.out.string() << "\n"
            << "classes: " << d.class_names.size() << ", records: " << d.size() << "\n"
            << "train exact-match: "
            << static_cast<double>(exact) / static_cast<double>(d.size()) << "\n";
  for (std::size_t l = 0; l < d.class_names.size(); ++l)
    std::cout << "  threshold[" << d.class_names[l] << "] = " << model->thresholds().t[l] << "\n";
  return 0;
}

int cmd_mine(const MineParams& p) {
  require_exists(p.dataset, "dataset");
  Dataset d = load_dataset(p.dataset);
  auto model = open_model(p.model);
  PrototypeDB db = mine_prototypes(d, *model, p.config);
  save_prototype_db(p.out, db);

  std::cout << "prototype db: " << p.out.string() << "\n";
  for (const ClassMiningStats& st : db.stats) {
    std::cout << "  " << db.class_names[static_cast<std::size_t>(st.class_index)] << ": filtered="
              << st.n_filtered;
    if (st.passthrough) {
      std::cout << " (passthrough)";
    } else {
      std::cout << " dims=" << st.dims << " k=" << st.k << " silhouette=" << st.silhouette;
    }
    std::cout << "\n";
  }
  std::cout << "prototypes total: " << db.entries.size() << "\n";
  return 0;
}

int cmd_explain(const ExplainParams& p) {
  require_exists(p.dataset, "dataset");
  require_exists(p.db, "prototype db");
  Dataset d = load_dataset(p.dataset);
  auto model = open_model(p.model);
  PrototypeDB db = load_prototype_db(p.db);

  auto row = d.find_record(p.record_id);
  if (!row) throw CfxError("unknown record id: " + p.record_id);

  ExplainOptions options = p.options;
  if (p.target) {
    int idx = d.class_index(*p.target);
    if (idx < 0) throw CfxError("unknown target class: " + *p.target);
    options.target = idx;
  }

  auto start = std::chrono::steady_clock::now();
  CounterfactualResult res = explain(d.records[*row], *model, db, options);
  auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);

  save_result(p.out, res);

  std::cout << "query " << res.query_id << " [" << labels_to_names(res.query_labels, d.class_names)
            << "] -> target " << res.target_name << " (prototype " << res.prototype_id << ")\n";
  for (const VariantResult& v : res.variants) {
    double margin = decision_margin(v.probs, model->thresholds(), res.target_class);
    std::printf("  %-14s valid=%d mask_fraction=%.4f margin=%+.4f\n", v.name.c_str(),
                v.valid ? 1 : 0, v.mask_fraction, margin);
  }
  if (!res.aligned_available) std::cout << "  (aligned variant unavailable)\n";
  std::printf("latency_ms=%.1f\n", elapsed.count());

  if (p.svg) {
    const VariantResult& v = res.variants.back();
    std::vector<std::pair<std::string, const Series*>> cfs = {{v.name, &v.series}};
    render_overlay(d.records[*row], cfs, &v.mask, nullptr, *p.svg);
    std::cout << "svg: " << p.svg->string() << "\n";
  }
  return 0;
}

int cmd_evaluate(const EvaluateParams& p) {
  require_exists(p.dataset, "dataset");
  require_exists(p.results, "results");
  Dataset d = load_dataset(p.dataset);
  auto model = open_model(p.model);

  std::vector<fs::path> result_dirs;
  if (fs::exists(p.results / "result.json")) result_dirs.push_back(p.results);
  for (const auto& entry : fs::directory_iterator(p.results))
    if (entry.is_directory() && fs::exists(entry.path() / "result.json"))
      result_dirs.push_back(entry.path());
  std::sort(result_dirs.begin(), result_dirs.end());
  if (result_dirs.empty())
    throw CfxError("no CounterfactualResult files under " + p.results.string());

  std::optional<int> ts_band = p.band;
  if (!ts_band && d.n_timesteps() > 256) ts_band = std::max(1, d.n_timesteps() / 10);

  std::vector<MetricsEntry> entries;
  for (const fs::path& dir : result_dirs) {
    CounterfactualResult res = load_result(dir);
    auto row = d.find_record(res.query_id);
    if (!row) throw CfxError(dir.string() + ": query " + res.query_id + " not in dataset");
    const Series& query = d.records[*row];

    LabelVec target_vec(d.class_names.size());
    target_vec.set(static_cast<std::size_t>(res.target_class));

    for (const VariantResult& v : res.variants) {
      MetricsEntry e;
      e.query_id = res.query_id;
      e.initial_class = labels_to_names(res.query_labels, d.class_names);
      e.target_class = res.target_name;
      e.variant = v.name;
      e.validity = validity(*model, query, v.series, target_vec);
      e.validity_multi = validity_multi(*model, v.series, target_vec);
      e.sparsity_ratio = sparsity_ratio(query, v.series, d.stats.sigma);
      LpSparsity lp = lp_sparsity(query, v.series);
      e.l0 = lp.l0;
      e.l1 = lp.l1;
      e.l2 = lp.l2;
      e.noise_stability = noise_stability(*model, v.series, NoiseLevels{},
                                          mix_seed(p.seed, hash_str(res.query_id + "/" + v.name)));
      e.temporal_stability = temporal_stability(v.series, ShiftSet{}, ts_band);
      ProbVec probs = model->predict_proba(v.series);
      e.decision_margin = decision_margin(probs, model->thresholds(), res.target_class);
      if (p.q_weights) e.q = composite_quality(e, *p.q_weights);
      entries.push_back(std::move(e));
    }
  }

  atomic_write(p.out, report_csv(entries));

  fs::path by_variant = p.out;
  by_variant.replace_extension("");
  fs::path by_pair = by_variant;
  by_variant += "_by_variant.csv";
  by_pair += "_by_pair.csv";
  auto var_rows = aggregate_report(entries, {GroupKey::Variant});
  atomic_write(by_variant, aggregate_csv(var_rows, {GroupKey::Variant}));
  auto pair_rows =
      aggregate_report(entries, {GroupKey::InitialClass, GroupKey::TargetClass, GroupKey::Variant});
  atomic_write(by_pair,
               aggregate_csv(pair_rows, {GroupKey::InitialClass, GroupKey::TargetClass, GroupKey::Variant}));

  std::cout << "report: " << p.out.string() << " (" << entries.size() << " rows)\n";
  for (const AggregateRow& r : var_rows)
    std::printf("  %-14s n=%zu validity_multi=%.4f sparsity_ratio=%.4f margin=%+.4f\n",
                r.variant.c_str(), r.n, r.validity_multi, r.sparsity_ratio, r.decision_margin);
  return 0;
}

int cmd_rules(const RulesParams& p) {
  require_exists(p.dataset, "dataset");
  Dataset d = load_dataset(p.dataset);
  auto model = open_model(p.model);

  AttributionTensor attr;
  if (p.attr) {
    attr = load_attribution(*p.attr);
  } else if (p.occlusion) {
    attr.n_records = static_cast<int>(d.size());
    attr.n_classes = static_cast<int>(d.class_names.size());
    attr.n_timesteps = d.n_timesteps();
    attr.n_channels = d.n_channels();
    attr.provenance = "occlusion(window=" + std::to_string(p.window) + ")";
    attr.values.resize(static_cast<std::size_t>(attr.n_records) * attr.n_classes *
                       attr.n_timesteps * attr.n_channels);
    std::size_t per_record = static_cast<std::size_t>(attr.n_classes) * attr.slice_size();
    parallel_for(d.size(), [&](std::size_t i) {
      std::vector<float> one = occlusion_attribution(*model, d.records[i], p.window);
      std::copy(one.begin(), one.end(), attr.values.begin() + static_cast<std::ptrdiff_t>(i * per_record));
    });
  } else {
    throw CfxError("rules: need --attr FILE or --occlusion");
  }

  RuleInputs inputs = make_rule_inputs(attr, d, p.config);
  std::cout << "global threshold (p" << p.config.percentile << "): " << inputs.threshold << "\n";

  std::vector<IntervalRule> rules;
  std::size_t skipped = 0, limit = p.max_records > 0 ? static_cast<std::size_t>(p.max_records) : d.size();
  for (std::size_t i = 0; i < d.size() && i < limit; ++i) {
    LabelVec pred = model->predict(d.records[i]);
    for (std::size_t cls = 0; cls < pred.size(); ++cls) {
      if (!pred.test(cls)) continue;  // rules only for positively predicted classes
      try {
        rules.push_back(extract_rule(*model, d.records[i],
                                     attr.slice(static_cast<int>(i), static_cast<int>(cls)),
                                     inputs, d, static_cast<int>(cls), p.config));
      } catch (const EmptyRuleError&) {
        ++skipped;
        log_info("rules: record " + d.records[i].record_id + " class " + d.class_names[cls] +
                 " has no features above the threshold");
      }
    }
  }
  write_rules_jsonl(p.out, rules);

  double mean_conjuncts = 0.0;
  for (const IntervalRule& r : rules) mean_conjuncts += static_cast<double>(r.conjuncts.size());
  if (!rules.empty()) mean_conjuncts /= static_cast<double>(rules.size());
  std::cout << "rules: " << rules.size() << " written to " << p.out.string() << ", "
            << skipped << " skipped (below threshold), mean conjuncts "
            << mean_conjuncts << "\n";
  return 0;
}

int cmd_render(const RenderParams& p) {
  require_exists(p.dataset, "dataset");
  require_exists(p.result_dir, "result");
  Dataset d = load_dataset(p.dataset);
  CounterfactualResult res = load_result(p.result_dir);
  auto row = d.find_record(res.query_id);
  if (!row) throw CfxError("render: query " + res.query_id + " not in dataset");

  const VariantResult* pick = nullptr;
  if (p.variant.empty()) {
    pick = &res.variants.back();
  } else {
    for (const VariantResult& v : res.variants)
      if (v.name == p.variant) pick = &v;
    if (!pick) throw CfxError("render: result has no variant named " + p.variant);
  }
  std::vector<std::pair<std::string, const Series*>> cfs = {{pick->name, &pick->series}};
  render_overlay(d.records[*row], cfs, &pick->mask, nullptr, p.out);
  std::cout << "svg: " << p.out.string() << "\n";
  return 0;
}

namespace {

void add_model_flags(CLI::App* cmd, ModelSpec& spec) {
  cmd->add_option("--model", spec.model_file, "reference classifier JSON");
  cmd->add_option("--adapter", spec.adapter, "external model adapter command");
  cmd->add_option("--thresholds", spec.thresholds,
                  "per-class decision thresholds t1,t2,... (adapter models default to 0.5)")
      ->delimiter(',');
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"sparse prototype-based counterfactual explanations for time-series classifiers"};
  app.require_subcommand(1);

  FitParams fit;
  auto* cfit = app.add_subcommand("fit", "train the reference classifier on a dataset");
  cfit->add_option("--dataset", fit.dataset, "dataset directory")->required();
  cfit->add_option("--out", fit.out, "output model JSON")->required();
  cfit->add_option("--seed", fit.config.seed, "rng seed");
  cfit->add_option("--epochs", fit.config.epochs, "training epochs");
  cfit->add_option("--lr", fit.config.learning_rate, "learning rate");
  cfit->add_option("--l2", fit.config.l2, "l2 penalty");

  MineParams mine;
  std::int64_t mine_band = -1;
  auto* cmine = app.add_subcommand("mine", "mine per-class prototypes");
  cmine->add_option("--dataset", mine.dataset, "dataset directory")->required();
  add_model_flags(cmine, mine.model);
  cmine->add_option("--out", mine.out, "prototype DB directory")->required();
  cmine->add_option("--band", mine_band, "DTW band half-width (default T/10)");
  cmine->add_option("--seed", mine.config.seed, "rng seed");
  cmine->add_option("--dim-min", mine.config.dim_min, "MDS dims sweep start");
  cmine->add_option("--dim-max", mine.config.dim_max, "MDS dims sweep end");
  cmine->add_option("--k-min", mine.config.k_min, "k sweep start");
  cmine->add_option("--k-max", mine.config.k_max, "k sweep end");
  cmine->add_option("--restarts", mine.config.kmeans_restarts, "k-means restarts");

  ExplainParams expl;
  std::int64_t expl_band = -1;
  std::string expl_target;
  std::string expl_svg;
  std::uint64_t expl_seed = 0;
  auto* cexpl = app.add_subcommand("explain", "generate a counterfactual for one record");
  cexpl->add_option("--dataset", expl.dataset, "dataset directory")->required();
  cexpl->add_option("--db", expl.db, "prototype DB directory")->required();
  add_model_flags(cexpl, expl.model);
  cexpl->add_option("--record-id", expl.record_id, "query record id")->required();
  cexpl->add_option("--target", expl_target, "target class name");
  cexpl->add_option("--out", expl.out, "output directory")->required();
  cexpl->add_option("--svg", expl_svg, "also render an overlay SVG");
  cexpl->add_option("--band", expl_band, "DTW band half-width (default T/10)");
  cexpl->add_option("--keep-ratio", expl.options.sparsify.initial_keep_ratio, "initial keep ratio");
  cexpl->add_option("--keep-step", expl.options.sparsify.keep_ratio_step, "keep ratio step");
  cexpl->add_option("--min-segment", expl.options.sparsify.min_segment_len, "min mask segment");
  cexpl->add_option("--seed", expl_seed, "rng seed (explain is deterministic)");

  EvaluateParams eval;
  std::int64_t eval_band = -1;
  std::string q_spec;
  auto* ceval = app.add_subcommand("evaluate", "score a directory of counterfactual results");
  ceval->add_option("--dataset", eval.dataset, "dataset directory")->required();
  ceval->add_option("--results", eval.results, "directory of result directories")->required();
  add_model_flags(ceval, eval.model);
  ceval->add_option("--out", eval.out, "report CSV path")->required();
  ceval->add_option("--q-weights", q_spec, "w_v,w_s,w_st,w_m for the composite Q column");
  ceval->add_option("--seed", eval.seed, "rng seed for noise stability");
  ceval->add_option("--band", eval_band, "DTW band for temporal stability");

  RulesParams rules;
  std::string rules_attr;
  std::string rules_kind = "uniform";
  auto* crules = app.add_subcommand("rules", "extract interval rules from attributions");
  crules->add_option("--dataset", rules.dataset, "dataset directory")->required();
  add_model_flags(crules, rules.model);
  crules->add_option("--attr", rules_attr, "attribution file (attr.f32 or its directory)");
  crules->add_flag("--occlusion", rules.occlusion, "compute built-in occlusion attributions");
  crules->add_option("--window", rules.window, "occlusion window length");
  crules->add_option("--percentile", rules.config.percentile, "global threshold percentile");
  crules->add_option("--n-perturb", rules.config.n_perturb, "perturbation draws per rule");
  crules->add_option("--scale", rules.config.perturb_scale, "perturbation scale");
  crules->add_option("--kind", rules_kind, "perturbation kind: uniform|gaussian");
  crules->add_option("--seed", rules.config.seed, "rng seed");
  crules->add_option("--max-records", rules.max_records, "limit records processed");
  crules->add_option("--out", rules.out, "output rules JSONL")->required();

  RenderParams render;
  auto* crender = app.add_subcommand("render", "render a result overlay SVG");
  crender->add_option("--dataset", render.dataset, "dataset directory")->required();
  crender->add_option("--result", render.result_dir, "result directory")->required();
  crender->add_option("--variant", render.variant, "variant name (default: last)");
  crender->add_option("--out", render.out, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (cfit->parsed()) return cmd_fit(fit);
    if (cmine->parsed()) {
      if (mine_band >= 0) mine.config.band = static_cast<int>(mine_band);
      return cmd_mine(mine);
    }
    if (cexpl->parsed()) {
      if (expl_band >= 0) expl.options.band = static_cast<int>(expl_band);
      if (!expl_target.empty()) expl.target = expl_target;
      if (!expl_svg.empty()) expl.svg = expl_svg;
      return cmd_explain(expl);
    }
    if (ceval->parsed()) {
      if (eval_band >= 0) eval.band = static_cast<int>(eval_band);
      if (!q_spec.empty()) {
        QWeights w;
        if (std::sscanf(q_spec.c_str(), "%lf,%lf,%lf,%lf", &w.w_v, &w.w_s, &w.w_st, &w.w_m) != 4)
          throw CfxError("--q-weights expects w_v,w_s,w_st,w_m");
        eval.q_weights = w;
      }
      return cmd_evaluate(eval);
    }
    if (crules->parsed()) {
      if (!rules_attr.empty()) rules.attr = rules_attr;
      if (rules_kind == "gaussian")
        rules.config.perturb_kind = RuleConfig::Kind::Gaussian;
      else if (rules_kind != "uniform")
        throw CfxError("--kind must be uniform or gaussian");
      return cmd_rules(rules);
    }
    if (crender->parsed()) return cmd_render(render);
  } catch (const CfxError& e) {
    log_error(e.what());
    return 2;
  } catch (const std::exception& e) {
    log_error(e.what());
    return 2;
  }
  return 0;
}

}  // namespace cfx
