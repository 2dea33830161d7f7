#include "freetopo/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace freetopo {

namespace {

using nlohmann::json;

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

void require_string(const json& j, const char* key, std::string& out, const std::string& path) {
  if (!j.contains(key) || !j[key].is_string())
    throw ParseError(path, 0, std::string("config needs string field inputs.") + key);
  out = j[key].get<std::string>();
}

const char* kind_display_name(TraceKind k) {
  switch (k) {
    case TraceKind::InsideOut: return "InsideOut";
    case TraceKind::OutsideIn: return "OutsideIn";
    case TraceKind::Mesh: return "Mesh";
  }
  return "Mesh";
}

std::ofstream open_artifact(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

int flush_warnings(const Diagnostics& diag) {
  for (const auto& w : diag.warnings()) {
    std::cerr << "warning: ";
    if (!w.file.empty()) {
      std::cerr << w.file;
      if (w.line > 0) std::cerr << ':' << w.line;
      std::cerr << ": ";
    }
    std::cerr << w.message << '\n';
  }
  return static_cast<int>(diag.warnings().size());
}

std::string category_label(Category c) { return category_name(c); }

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open config");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ParseError(path, 0, "config is not valid structured text");

  PipelineConfig cfg;
  if (!j.contains("inputs") || !j["inputs"].is_object())
    throw ParseError(path, 0, "config needs an inputs object");
  const json& inputs = j["inputs"];
  require_string(inputs, "rel_file", cfg.inputs.rel_file, path);
  require_string(inputs, "delegations", cfg.inputs.delegations, path);
  require_string(inputs, "prefix2as", cfg.inputs.prefix2as, path);
  require_string(inputs, "country_table", cfg.inputs.country_table, path);
  if (inputs.contains("ixp_prefixes")) require_string(inputs, "ixp_prefixes", cfg.inputs.ixp_prefixes, path);
  if (inputs.contains("traceroutes")) require_string(inputs, "traceroutes", cfg.inputs.traceroutes, path);

  if (j.contains("exclude")) {
    if (!j["exclude"].is_array()) throw ParseError(path, 0, "exclude must be an array");
    cfg.exclude.clear();
    for (const auto& e : j["exclude"]) {
      if (!e.is_string()) throw ParseError(path, 0, "exclude entries must be strings");
      cfg.exclude.insert(upper(e.get<std::string>()));
    }
  }

  if (j.contains("features")) {
    const json& f = j["features"];
    if (f.contains("large_node_threshold"))
      cfg.features.large_node_threshold = f["large_node_threshold"].get<int>();
    if (f.contains("removal_depth")) cfg.features.removal_depth = f["removal_depth"].get<double>();
  }

  if (j.contains("path_graph")) {
    std::string choice = j["path_graph"].get<std::string>();
    if (choice == "caida") cfg.path_graph = PathGraphChoice::Caida;
    else if (choice == "augmented") cfg.path_graph = PathGraphChoice::Augmented;
    else throw ParseError(path, 0, "path_graph must be caida or augmented");
  }

  if (j.contains("model")) {
    const json& m = j["model"];
    if (m.contains("kind")) {
      std::string kind = m["kind"].get<std::string>();
      if (kind == "all") {
        cfg.all_models = true;
      } else if (auto k = model_kind_from_name(kind)) {
        cfg.all_models = false;
        cfg.model.kind = *k;
      } else {
        throw ParseError(path, 0, "model.kind must be lr, lasso, dtla, dtlr or all");
      }
    }
    if (m.contains("min_leaf")) cfg.model.min_leaf = m["min_leaf"].get<int>();
    if (m.contains("max_depth")) cfg.model.max_depth = m["max_depth"].get<int>();
    if (m.contains("linear_leaf_min")) cfg.model.linear_leaf_min = m["linear_leaf_min"].get<int>();
    if (m.contains("lasso_grid")) cfg.model.lasso_grid = m["lasso_grid"].get<int>();
    if (m.contains("lasso_decades")) cfg.model.lasso_decades = m["lasso_decades"].get<double>();
    if (m.contains("cv_folds")) cfg.model.cv_folds = m["cv_folds"].get<int>();
    if (m.contains("seed")) cfg.model.seed = m["seed"].get<std::uint64_t>();
  }

  if (j.contains("report")) {
    const json& r = j["report"];
    if (r.contains("countries"))
      for (const auto& c : r["countries"]) cfg.report_countries.push_back(upper(c.get<std::string>()));
    if (r.contains("top_residuals")) cfg.report_top_residuals = r["top_residuals"].get<int>();
  }

  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  return cfg;
}

void PipelineConfig::validate() const {
  auto check = [](const std::string& p, const char* what, bool required) {
    if (p.empty()) {
      if (required) throw std::invalid_argument(std::string("config is missing the ") + what + " path");
      return;
    }
    if (!std::filesystem::exists(p))
      throw std::invalid_argument(std::string(what) + " path does not exist: " + p);
  };
  check(inputs.rel_file, "rel_file", true);
  check(inputs.delegations, "delegations", true);
  check(inputs.prefix2as, "prefix2as", true);
  check(inputs.country_table, "country_table", true);
  check(inputs.ixp_prefixes, "ixp_prefixes", false);
  check(inputs.traceroutes, "traceroutes", false);

  for (const auto& c : exclude)
    if (c.size() != 2 || !std::isalpha(static_cast<unsigned char>(c[0])) ||
        !std::isalpha(static_cast<unsigned char>(c[1])))
      throw std::invalid_argument("exclusion '" + c + "' is not an alpha-2 country code");

  if (features.removal_depth < 0 || features.removal_depth > 1)
    throw std::invalid_argument("features.removal_depth must lie in [0,1]");
  if (features.large_node_threshold < 0)
    throw std::invalid_argument("features.large_node_threshold must be >= 0");
  if (model.min_leaf < 1) throw std::invalid_argument("model.min_leaf must be >= 1");
  if (model.max_depth < 0) throw std::invalid_argument("model.max_depth must be >= 0");
  if (model.linear_leaf_min < 2) throw std::invalid_argument("model.linear_leaf_min must be >= 2");
  if (model.lasso_grid < 2) throw std::invalid_argument("model.lasso_grid must be >= 2");
  if (model.lasso_decades <= 0) throw std::invalid_argument("model.lasso_decades must be > 0");
  if (model.cv_folds < 2) throw std::invalid_argument("model.cv_folds must be >= 2");
  if (report_top_residuals < 0) throw std::invalid_argument("report.top_residuals must be >= 0");
  if (out_dir.empty()) throw std::invalid_argument("out_dir must not be empty");
}

PipelineData load_pipeline_data(const PipelineConfig& cfg, Diagnostics& diag) {
  PipelineData data;
  data.rels = parse_rel_file(cfg.inputs.rel_file, diag);
  data.assignments = parse_delegations(cfg.inputs.delegations, diag);
  data.prefixes = parse_prefix2as(cfg.inputs.prefix2as, diag);
  if (!cfg.inputs.ixp_prefixes.empty())
    data.ixp = parse_ixp_prefixes(cfg.inputs.ixp_prefixes, diag);
  data.country_table = parse_country_table(cfg.inputs.country_table, diag);
  data.caida = AsGraph::build(data.rels, data.assignments);

  if (cfg.inputs.traceroutes.empty()) return data;

  NormalizeResult normalized = normalize_traceroutes(cfg.inputs.traceroutes, diag);
  data.traces_skipped = normalized.skipped;
  PrefixTable table = PrefixTable::build(data.prefixes);
  for (const auto& rec : normalized.records) {
    auto p = to_as_path(rec, table, data.ixp);
    if (!p) {
      ++data.empty_paths;
      diag.warn(cfg.inputs.traceroutes, 0, "traceroute " + rec.id + " resolves to an empty path");
      continue;
    }
    data.as_paths.push_back(std::move(*p));
  }

  data.inference = infer_relationships(data.as_paths, data.caida);
  MergeResult merged = merge_edges(data.caida, data.inference.constraints);
  data.merge_report = std::move(merged.report);
  data.augmented = std::move(merged.graph);

  // First record to walk a merged edge claims it, for the per-kind and
  // per-batch accounting. Records arrive in campaign order.
  std::set<EdgeKey> mergeable;
  for (const auto& c : data.inference.constraints) mergeable.insert(c.pair);
  std::set<EdgeKey> claimed;
  std::map<int, std::int64_t> batch_counts;
  int max_batch = 0;
  for (const auto& p : data.as_paths) {
    max_batch = std::max(max_batch, p.batch);
    for (const EdgeKey& e : extract_edges(p, data.caida)) {
      if (!mergeable.count(e) || !claimed.insert(e).second) continue;
      ++data.new_edges_by_kind[kind_display_name(p.kind)];
      if (p.batch > 0) ++batch_counts[p.batch];
    }
  }
  std::vector<std::int64_t> per_batch(static_cast<std::size_t>(max_batch), 0);
  for (const auto& [batch, count] : batch_counts) per_batch[batch - 1] = count;
  data.campaign = evaluate_campaign(per_batch);
  return data;
}

FeatureRun compute_features(const PipelineConfig& cfg, const PipelineData& data,
                            Diagnostics& diag) {
  FeatureRun run;
  const AsGraph& graph = data.graph(cfg.path_graph);

  std::vector<std::string> matrix_countries;
  for (const auto& c : graph.known_countries())
    if (!graph.domestic_nodes(c).empty()) matrix_countries.push_back(c);
  run.path_matrix = country_path_matrix(graph, matrix_countries);

  CustomerCones cones = customer_cones(graph);
  std::vector<AsNum> rank = as_rank(graph, cones);

  std::vector<FeatureVector> rows;
  for (const auto& country : graph.known_countries()) {
    CountryView view = country_view(graph, country);
    if (view.domestic_nodes.empty()) {
      run.missing.emplace_back(country, "no domestic ASes in the graph");
      continue;
    }
    const CountryRecord* record = nullptr;
    for (const auto& r : data.country_table)
      if (r.country == country) {
        record = &r;
        break;
      }
    if (!record) {
      run.missing.emplace_back(country, "no country table row (fpi/population unknown)");
      continue;
    }

    FeatureVector row;
    row.country = country;
    structural_features(view, cfg.features, row);

    UGraph domestic = domestic_graph(view);
    row.values[kMaxLoadCentrality] = load_centrality_max(domestic);
    row.values[kAvgHorizImbalance] = horizontal_imbalance_avg(view, cones);

    std::vector<AsNum> domestic_rank;
    domestic_rank.reserve(view.domestic_nodes.size());
    for (AsNum asn : rank)
      if (std::binary_search(view.domestic_nodes.begin(), view.domestic_nodes.end(), asn))
        domestic_rank.push_back(asn);
    row.values[kAlgConnAuc] = robustness_auc(domestic, domestic_rank,
                                             RobustnessMetric::AlgebraicConnectivity,
                                             cfg.features.removal_depth);
    row.values[kFracConnAuc] = robustness_auc(domestic, domestic_rank,
                                              RobustnessMetric::LargestComponentFraction,
                                              cfg.features.removal_depth);

    international_features(view, run.path_matrix, row);
    ip_features(data.assignments, data.prefixes, record, row);
    routing_features(view, graph, cones, row);
    rows.push_back(std::move(row));
  }

  run.matrix = assemble_and_scale(std::move(rows), cfg.exclude, diag);
  return run;
}

Dataset make_dataset(const FeatureRun& run, std::span<const CountryRecord> table,
                     const std::set<std::string>& exclusions) {
  (void)exclusions;  // the matrix rows already carry the flags
  Dataset data;
  for (int f : run.matrix.retained) data.feature_names.push_back(kFeatureNames[f]);
  for (std::size_t i = 0; i < run.matrix.rows.size(); ++i) {
    DataRow row;
    row.country = run.matrix.rows[i].country;
    row.x = run.matrix.scaled[i];
    row.train_excluded = run.matrix.train_excluded[i];
    for (const auto& r : table)
      if (r.country == row.country) {
        row.y = 100.0 - r.fpi;
        break;
      }
    data.rows.push_back(std::move(row));
  }
  return data;
}

int run_build(const PipelineConfig& cfg) {
  Diagnostics diag;
  PipelineData data = load_pipeline_data(cfg, diag);

  {
    auto out = open_artifact(cfg.out_dir, "graph_caida.txt");
    save_edge_list(out, data.caida);
  }
  if (data.augmented) {
    auto out = open_artifact(cfg.out_dir, "graph_augmented.txt");
    save_edge_list(out, *data.augmented);
  }

  const AsGraph& graph = data.graph(cfg.path_graph);
  auto out = open_artifact(cfg.out_dir, "country_summary.csv");
  out << "country,domestic_nodes,domestic_edges,border_edges\n";
  for (const auto& country : graph.known_countries()) {
    CountryView view = country_view(graph, country);
    out << country << ',' << view.domestic_nodes.size() << ',' << view.domestic_edges.size()
        << ',' << view.border_edges.size() << '\n';
  }
  return flush_warnings(diag);
}

int run_traces(const PipelineConfig& cfg) {
  Diagnostics diag;
  PipelineData data = load_pipeline_data(cfg, diag);

  {
    auto out = open_artifact(cfg.out_dir, "new_edges_by_kind.csv");
    out << "kind,new_edges\n";
    for (TraceKind k : {TraceKind::InsideOut, TraceKind::OutsideIn, TraceKind::Mesh}) {
      auto it = data.new_edges_by_kind.find(kind_display_name(k));
      out << kind_display_name(k) << ','
          << (it == data.new_edges_by_kind.end() ? 0 : it->second) << '\n';
    }
  }
  {
    auto out = open_artifact(cfg.out_dir, "new_edges_by_country.csv");
    out << "country,new_edges\n";
    for (const auto& [country, count] : data.merge_report.new_edges_by_country)
      out << country << ',' << count << '\n';
  }
  {
    auto out = open_artifact(cfg.out_dir, "campaign.csv");
    out << "batch,batch_size,new_edges\n";
    for (std::size_t i = 0; i < data.campaign.new_edge_counts.size(); ++i)
      out << (i + 1) << ',' << data.campaign.batch_sizes[i] << ','
          << data.campaign.new_edge_counts[i] << '\n';
  }
  {
    auto out = open_artifact(cfg.out_dir, "inconsistencies.csv");
    out << "kind,detail\n";
    for (const auto& id : data.inference.report.infeasible_paths)
      out << "infeasible_path," << id << '\n';
    for (const auto& pair : data.inference.report.empty_intersections)
      out << "empty_intersection," << pair.lo << '-' << pair.hi << '\n';
    for (const auto& c : data.merge_report.conflicts)
      out << "merge_conflict," << c.pair.lo << '-' << c.pair.hi << '\n';
  }
  {
    auto out = open_artifact(cfg.out_dir, "traces_summary.txt");
    out << "records_normalized," << data.as_paths.size() + data.empty_paths << '\n';
    out << "records_skipped," << data.traces_skipped << '\n';
    out << "empty_paths," << data.empty_paths << '\n';
    out << "as_paths," << data.as_paths.size() << '\n';
    out << "new_edges," << data.merge_report.new_edges << '\n';
    out << "merge_conflicts," << data.merge_report.conflicts.size() << '\n';
    out << "infeasible_paths," << data.inference.report.infeasible_paths.size() << '\n';
    out << "empty_intersections," << data.inference.report.empty_intersections.size() << '\n';
    if (data.campaign.new_edge_counts.empty()) {
      out << "campaign,untracked\n";
    } else {
      out << "campaign," << (data.campaign.stopped ? "stopped" : "running") << '\n';
      if (data.campaign.stopped)
        out << "campaign_stopped_after_batch," << data.campaign.stopped_after + 1 << '\n';
    }
  }
  return flush_warnings(diag);
}

int run_features(const PipelineConfig& cfg) {
  Diagnostics diag;
  PipelineData data = load_pipeline_data(cfg, diag);
  FeatureRun run = compute_features(cfg, data, diag);

  {
    auto out = open_artifact(cfg.out_dir, "features.csv");
    save_feature_matrix(out, run.matrix);
  }
  {
    auto out = open_artifact(cfg.out_dir, "scaling.csv");
    save_scaling_sidecar(out, run.matrix);
  }
  {
    auto out = open_artifact(cfg.out_dir, "path_matrix.csv");
    out << "src,dst,distance\n";
    run.path_matrix.save(out);
  }
  {
    auto out = open_artifact(cfg.out_dir, "features_missing.csv");
    out << "country,reason\n";
    for (const auto& [country, reason] : run.missing) out << country << ',' << reason << '\n';
  }
  return flush_warnings(diag);
}

namespace {

void write_prediction_artifacts(const PipelineConfig& cfg, const Dataset& dataset,
                                const PredictionReport& report, const ModelSpec& spec) {
  const std::string kind = model_kind_name(report.kind);
  {
    auto out = open_artifact(cfg.out_dir, "predictions_" + kind + ".csv");
    out << "country,actual,predicted,abs_error,ratio,actual_cat,predicted_cat,"
           "train_excluded,fold_failed\n";
    for (const auto& r : report.rows) {
      out << r.country << ',' << format_double(r.actual) << ',' << format_double(r.predicted)
          << ',' << format_double(r.abs_error) << ',' << format_double(r.ratio) << ','
          << category_label(r.actual_cat) << ',' << category_label(r.predicted_cat) << ','
          << (r.train_excluded ? 1 : 0) << ',' << (r.fold_failed ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open_artifact(cfg.out_dir, "error_cdf_" + kind + ".csv");
    out << "abs_error,cumulative_fraction\n";
    std::vector<double> errors;
    errors.reserve(report.rows.size());
    for (const auto& r : report.rows) errors.push_back(r.abs_error);
    std::sort(errors.begin(), errors.end());
    for (std::size_t i = 0; i < errors.size(); ++i)
      out << format_double(errors[i]) << ','
          << format_double(static_cast<double>(i + 1) / static_cast<double>(errors.size()))
          << '\n';
  }
  {
    auto out = open_artifact(cfg.out_dir, "confusion_" + kind + ".csv");
    CategoryMetrics metrics = category_metrics(report);
    out << "actual\\predicted,NotFree,PartlyFree,Free\n";
    const char* names[3] = {"NotFree", "PartlyFree", "Free"};
    for (int a = 0; a < 3; ++a) {
      out << names[a];
      for (int p = 0; p < 3; ++p) out << ',' << metrics.confusion[a][p];
      out << '\n';
    }
    out << "accuracy3," << format_double(metrics.accuracy3) << ",,\n";
    out << "accuracy_merged," << format_double(metrics.accuracy_merged) << ",,\n";
  }
  {
    auto out = open_artifact(cfg.out_dir, "residuals_" + kind + ".csv");
    out << "rank,country,actual,predicted,abs_error\n";
    auto order = report.residual_ranking();
    std::size_t limit = std::min<std::size_t>(order.size(),
                                              static_cast<std::size_t>(cfg.report_top_residuals));
    for (std::size_t i = 0; i < limit; ++i) {
      const auto& r = report.rows[order[i]];
      out << (i + 1) << ',' << r.country << ',' << format_double(r.actual) << ','
          << format_double(r.predicted) << ',' << format_double(r.abs_error) << '\n';
    }
  }

  if (report.kind == ModelKind::DTLA || report.kind == ModelKind::DTLR) {
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    for (const auto& row : dataset.rows) {
      if (row.train_excluded) continue;
      X.push_back(row.x);
      y.push_back(row.y);
    }
    RegressionTree tree =
        RegressionTree::fit(X, y, spec, report.kind == ModelKind::DTLR);
    auto out = open_artifact(cfg.out_dir, "tree_" + kind + ".txt");
    tree.dump(out, dataset.feature_names);
    out << "\n# feature,splits,sse_reduction\n";
    for (const auto& [feature, use] : tree.feature_importance())
      out << (feature < static_cast<int>(dataset.feature_names.size())
                  ? dataset.feature_names[feature]
                  : "x" + std::to_string(feature))
          << ',' << use.splits << ',' << format_double(use.sse_reduction) << '\n';
  }
}

}  // namespace

int run_predict(const PipelineConfig& cfg) {
  Diagnostics diag;
  PipelineData data = load_pipeline_data(cfg, diag);
  FeatureRun run = compute_features(cfg, data, diag);
  Dataset dataset = make_dataset(run, data.country_table, cfg.exclude);

  std::vector<ModelKind> kinds;
  if (cfg.all_models)
    kinds = {ModelKind::LR, ModelKind::LASSO, ModelKind::DTLA, ModelKind::DTLR};
  else
    kinds = {cfg.model.kind};

  auto summary = open_artifact(cfg.out_dir, "predict_summary.csv");
  summary << "model,mean_abs_error,mean_normalized_error,accuracy3,accuracy_merged,"
             "fold_failures\n";
  for (ModelKind kind : kinds) {
    ModelSpec spec = cfg.model;
    spec.kind = kind;
    PredictionReport report = loocv(dataset, spec);
    write_prediction_artifacts(cfg, dataset, report, spec);
    summary << model_kind_name(kind) << ',' << format_double(report.mean_abs_error) << ','
            << format_double(report.mean_normalized_error) << ','
            << format_double(report.accuracy3) << ',' << format_double(report.accuracy_merged)
            << ',' << report.fold_failures << '\n';
  }
  return flush_warnings(diag);
}

int run_report(const PipelineConfig& cfg) {
  Diagnostics diag;
  PipelineData data = load_pipeline_data(cfg, diag);
  FeatureRun run = compute_features(cfg, data, diag);
  Dataset dataset = make_dataset(run, data.country_table, cfg.exclude);

  ModelSpec spec = cfg.model;
  if (cfg.all_models) spec.kind = ModelKind::DTLR;
  PredictionReport report = loocv(dataset, spec);

  std::vector<std::string> targets = cfg.report_countries;
  if (targets.empty()) {
    auto order = report.residual_ranking();
    std::size_t limit = std::min<std::size_t>(order.size(),
                                              static_cast<std::size_t>(cfg.report_top_residuals));
    for (std::size_t i = 0; i < limit; ++i) targets.push_back(report.rows[order[i]].country);
  }

  auto out = open_artifact(cfg.out_dir, "report.txt");
  out << "Per-country drill-down (" << model_kind_name(spec.kind) << " predictions)\n";
  for (const auto& country : targets) {
    out << "\n== " << country << " ==\n";
    std::size_t row_idx = run.matrix.rows.size();
    for (std::size_t i = 0; i < run.matrix.rows.size(); ++i)
      if (run.matrix.rows[i].country == country) {
        row_idx = i;
        break;
      }
    if (row_idx == run.matrix.rows.size()) {
      std::string reason = "country has no feature row";
      for (const auto& [c, r] : run.missing)
        if (c == country) reason = r;
      out << "unavailable: " << reason << '\n';
      continue;
    }

    const FeatureVector& row = run.matrix.rows[row_idx];
    const PredictionRow* pred = nullptr;
    for (const auto& r : report.rows)
      if (r.country == country) {
        pred = &r;
        break;
      }
    if (pred) {
      out << "actual " << format_double(pred->actual) << " (" << category_label(pred->actual_cat)
          << "), predicted " << format_double(pred->predicted) << " ("
          << category_label(pred->predicted_cat) << "), abs error "
          << format_double(pred->abs_error) << '\n';
      if (pred->train_excluded) out << "note: excluded from every training fold\n";
    }
    if (row.empty_graph) out << "note: empty domestic graph\n";
    if (row.all_unreachable)
      out << "note: no foreign country reachable; max_path_len is the sentinel\n";

    out << "feature,raw,scaled\n";
    for (std::size_t k = 0; k < run.matrix.retained.size(); ++k) {
      int f = run.matrix.retained[k];
      out << kFeatureNames[f] << ',' << format_double(row.values[f]) << ','
          << format_double(run.matrix.scaled[row_idx][k]) << '\n';
    }

    auto matrix_row = run.path_matrix.row(country);
    std::int32_t worst = kUnreachable;
    for (std::size_t j = 0; j < matrix_row.size(); ++j)
      if (run.path_matrix.countries()[j] != country && matrix_row[j] != kUnreachable)
        worst = std::max(worst, matrix_row[j]);
    out << "max finite policy distance to another country: ";
    if (worst == kUnreachable) out << "none reachable\n";
    else out << worst << '\n';
  }
  return flush_warnings(diag);
}

}  // namespace freetopo
