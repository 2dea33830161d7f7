// End-to-end acceptance gate. Each check prints one [PASS]/[FAIL] line; the
// process exits nonzero when any check fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "freetopo/bgpsim.hpp"
#include "freetopo/features.hpp"
#include "freetopo/ingest.hpp"
#include "freetopo/ipv4.hpp"
#include "freetopo/ml.hpp"
#include "freetopo/pipeline.hpp"
#include "freetopo/topology.hpp"
#include "freetopo/traceroute.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace freetopo;

namespace {

struct Gate {
  int failures = 0;
  int index = 0;

  void run(const std::string& name, double time_budget_s,
           const std::function<std::string()>& body) {
    ++index;
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    try {
      detail = body();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (detail.empty() && time_budget_s > 0 && elapsed > time_budget_s) {
      std::ostringstream s;
      s << "took " << elapsed << "s, budget " << time_budget_s << "s";
      detail = s.str();
    }
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(2);
    if (detail.empty()) {
      line << "[PASS] " << index << ". " << name << " (" << elapsed << "s)";
    } else {
      line << "[FAIL] " << index << ". " << name << ": " << detail;
      ++failures;
    }
    std::cout << line.str() << std::endl;
  }
};

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

AsGraph graph_of(const std::vector<RelRecord>& rels,
                 const std::vector<CountryAssignment>& countries = {}) {
  return AsGraph::build(rels, countries);
}

std::vector<CountryAssignment> all_in(const std::string& cc, std::vector<AsNum> asns) {
  std::vector<CountryAssignment> out;
  for (AsNum a : asns) out.push_back({a, cc});
  return out;
}

UGraph plain_ugraph(int n, const std::vector<std::pair<int, int>>& edges) {
  UGraph g;
  for (int i = 0; i < n; ++i) g.ids.push_back(static_cast<AsNum>(i + 1));
  g.adj.assign(n, {});
  for (auto [a, b] : edges) {
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
  }
  for (auto& row : g.adj) std::sort(row.begin(), row.end());
  return g;
}

double mean_like_impl(const std::vector<double>& ys) {
  double sum = 0;
  for (double v : ys) sum += v;
  return sum / static_cast<double>(ys.size());
}

std::string check_valley_free_enumeration() {
  oracles::Rng rng(4101);
  for (int trial = 0; trial < 200; ++trial) {
    int n = rng.uniform(2, 12);
    double p = 0.15 + 0.35 * rng.unit();
    double unknown = 0.25 * rng.unit();
    AsGraph g = oracles::random_topology(rng, n, p, unknown);
    for (AsNum src : g.nodes()) {
      std::vector<AsNum> sources{src};
      PolicyDistance got = valley_free_distances(g, sources);
      std::map<AsNum, int> want = oracles::vf_distances(g, src);
      for (AsNum node : g.nodes()) {
        auto it = want.find(node);
        int expect = it == want.end() ? kUnreachable : it->second;
        if (got.distance(node) != expect)
          return "trial " + std::to_string(trial) + ": distance " + std::to_string(src) +
                 "->" + std::to_string(node) + " got " + std::to_string(got.distance(node)) +
                 " want " + std::to_string(expect);
      }
    }
  }
  return "";
}

std::string check_customer_cones() {
  oracles::Rng rng(4102);
  for (int trial = 0; trial < 100; ++trial) {
    int n = rng.uniform(2, 15);
    double p = 0.1 + 0.4 * rng.unit();
    AsGraph g = oracles::random_p2c_digraph(rng, n, p);
    CustomerCones got = customer_cones(g);
    auto want = oracles::cones(g);
    for (AsNum node : g.nodes()) {
      auto span = got.cone(node);
      std::set<AsNum> members(span.begin(), span.end());
      if (members != want.at(node) || got.cone_size(node) != want.at(node).size())
        return "trial " + std::to_string(trial) + ": cone of " + std::to_string(node) +
               " has " + std::to_string(members.size()) + " members, want " +
               std::to_string(want.at(node).size());
    }
    if (got.cone_size(99999) != 1) return "absent ASN is not a unit cone";
  }
  return "";
}

std::string check_lasso_solver() {
  oracles::Rng rng(4103);
  for (int trial = 0; trial < 50; ++trial) {
    int n = rng.uniform(20, 40);
    int p = rng.uniform(2, 5);
    std::vector<std::vector<double>> X(n, std::vector<double>(p));
    std::vector<double> coef(p);
    for (int j = 0; j < p; ++j) coef[j] = -5 + 10 * rng.unit();
    double intercept = 20 * rng.unit();
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      y[i] = intercept + 0.5 * (rng.unit() - 0.5);
      for (int j = 0; j < p; ++j) {
        X[i][j] = rng.unit();
        y[i] += coef[j] * X[i][j];
      }
    }

    LinearModel unpenalized = fit_lasso(X, y, 0.0);
    std::vector<double> ols = oracles::ols_svd(X, y);
    if (std::fabs(unpenalized.intercept - ols[0]) > 1e-5)
      return "trial " + std::to_string(trial) + ": zero-penalty intercept off by " +
             fmt(std::fabs(unpenalized.intercept - ols[0]));
    for (int j = 0; j < p; ++j)
      if (std::fabs(unpenalized.coef[j] - ols[j + 1]) > 1e-5)
        return "trial " + std::to_string(trial) + ": zero-penalty coef " + std::to_string(j) +
               " off by " + fmt(std::fabs(unpenalized.coef[j] - ols[j + 1]));

    double lambda = lasso_lambda_max(X, y) / (2 << (trial % 4));
    std::vector<double> trace;
    LinearModel m = fit_lasso(X, y, lambda, &trace);
    for (std::size_t s = 1; s < trace.size(); ++s)
      if (trace[s] > trace[s - 1] + 1e-12)
        return "trial " + std::to_string(trial) + ": objective rose on sweep " +
               std::to_string(s);
    double kkt = oracles::lasso_kkt_violation(X, y, m.intercept, m.coef, lambda);
    if (kkt > 1e-6)
      return "trial " + std::to_string(trial) + ": KKT violation " + fmt(kkt);
  }
  return "";
}

std::string check_regression_trees() {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  std::vector<double> left{1, 2, 4}, right{10, 20, 40};
  for (double v : left) {
    X.push_back({0.0});
    y.push_back(v);
  }
  for (double v : right) {
    X.push_back({1.0});
    y.push_back(v);
  }
  ModelSpec spec;
  spec.min_leaf = 1;
  RegressionTree tree = RegressionTree::fit(X, y, spec, false);
  if (tree.predict(std::vector<double>{0.0}) != mean_like_impl(left))
    return "left leaf mean is not the exact arithmetic mean";
  if (tree.predict(std::vector<double>{1.0}) != mean_like_impl(right))
    return "right leaf mean is not the exact arithmetic mean";

  Dataset data;
  data.feature_names = {"x"};
  for (int i = 0; i < 30; ++i) {
    double x = 0.015 * i;
    data.rows.push_back({"C" + std::to_string(i), {x}, 20 + 40 * x, false});
  }
  for (int i = 0; i < 30; ++i) {
    double x = 0.55 + 0.015 * i;
    data.rows.push_back({"C" + std::to_string(30 + i), {x}, 90 - 40 * (x - 0.55), false});
  }
  ModelSpec piece;
  piece.max_depth = 1;
  piece.kind = ModelKind::DTLR;
  PredictionReport linear_leaves = loocv(data, piece);
  piece.kind = ModelKind::DTLA;
  PredictionReport mean_leaves = loocv(data, piece);
  if (!(linear_leaves.mean_abs_error < 0.5))
    return "linear-leaf LOOCV MAE " + fmt(linear_leaves.mean_abs_error) + " not under 0.5";
  if (!(linear_leaves.mean_abs_error < mean_leaves.mean_abs_error))
    return "linear leaves (" + fmt(linear_leaves.mean_abs_error) +
           ") did not beat mean leaves (" + fmt(mean_leaves.mean_abs_error) + ")";
  return "";
}

std::string check_algebraic_connectivity() {
  for (int n = 4; n <= 10; ++n) {
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) edges.push_back({a, b});
    UGraph g = plain_ugraph(n, edges);
    std::vector<int> comp(n);
    std::iota(comp.begin(), comp.end(), 0);
    double got = algebraic_connectivity(g, comp);
    if (std::fabs(got - n) > 1e-6)
      return "complete graph on " + std::to_string(n) + " nodes: got " + fmt(got);
  }
  UGraph path4 = plain_ugraph(4, {{0, 1}, {1, 2}, {2, 3}});
  std::vector<int> comp{0, 1, 2, 3};
  double got = algebraic_connectivity(path4, comp);
  double want = 2.0 - std::sqrt(2.0);
  if (std::fabs(got - want) > 1e-6) return "four-node path: got " + fmt(got);
  return "";
}

std::string check_structural_references() {
  FeatureConfig cfg;

  AsGraph triangle = graph_of({{1, 2, Relationship::PeerPeer},
                               {2, 3, Relationship::PeerPeer},
                               {1, 3, Relationship::PeerPeer}},
                              all_in("AA", {1, 2, 3}));
  FeatureVector out;
  structural_features(country_view(triangle, "AA"), cfg, out);
  if (out.values[kTransitivity] != 1.0) return "triangle transitivity != 1";
  if (out.values[kAvgClustering] != 1.0) return "triangle clustering != 1";
  if (out.values[kCliqueNumber] != 3.0) return "triangle clique number != 3";

  AsGraph path5 = graph_of({{1, 2, Relationship::ProviderCustomer},
                            {2, 3, Relationship::ProviderCustomer},
                            {3, 4, Relationship::ProviderCustomer},
                            {4, 5, Relationship::ProviderCustomer}},
                           all_in("AA", {1, 2, 3, 4, 5}));
  FeatureVector path_out;
  structural_features(country_view(path5, "AA"), cfg, path_out);
  if (path_out.values[kDiameter] != 4.0) return "five-node path diameter != 4";

  UGraph star = plain_ugraph(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  if (load_centrality_max(star) != 1.0) return "star center load centrality != 1.0";
  return "";
}

std::string check_traceroute_golden() {
  Diagnostics diag;
  auto rels = parse_rel_file(testutil::data_path("golden/rels.txt"), diag);
  auto prefixes =
      PrefixTable::build(parse_prefix2as(testutil::data_path("golden/prefix2as.txt"), diag));
  auto ixp = parse_ixp_prefixes(testutil::data_path("golden/ixp.txt"), diag);
  AsGraph g = AsGraph::build(rels, {});

  auto normalized = normalize_traceroutes(testutil::data_path("golden/traces.jsonl"), diag);
  if (normalized.records.size() != 12) return "expected 12 usable records";

  std::vector<AsPathRecord> paths;
  for (const auto& rec : normalized.records) {
    auto p = to_as_path(rec, prefixes, ixp);
    if (!p) return "record " + rec.id + " produced no path";
    paths.push_back(*p);
  }

  const std::map<std::string, std::vector<AsNum>> want_paths{
      {"g1", {1, 2, 3}},  {"g2", {3, 2, 4, 5}}, {"g3", {3, 2, 7}}, {"g4", {1, 2, 8}},
      {"g5", {6, 7}},     {"g6", {1, 3}},       {"g7", {4, 5}},    {"g8", {2, 6}},
      {"g9", {5, 7}},     {"g10", {7, 6}},      {"g11", {4, 2}},   {"g12", {5, 4}}};
  for (const auto& p : paths) {
    auto it = want_paths.find(p.source_id);
    if (it == want_paths.end()) return "unexpected record id " + p.source_id;
    if (p.as_path != it->second) return "path mismatch for " + p.source_id;
  }

  std::set<EdgeKey> new_edges;
  for (const auto& p : paths)
    for (EdgeKey k : extract_edges(p, g)) new_edges.insert(k);
  std::set<EdgeKey> want_edges{EdgeKey{2, 6}, EdgeKey{2, 7}, EdgeKey{2, 8}, EdgeKey{5, 7}};
  if (new_edges != want_edges) return "new-edge set mismatch";

  InferenceResult inf = infer_relationships(paths, g);
  if (inf.report.infeasible_paths != std::vector<std::string>{"g2"})
    return "expected exactly g2 infeasible";
  if (!inf.report.empty_intersections.empty()) return "unexpected emptied constraint";
  std::map<EdgeKey, std::uint8_t> got;
  for (const auto& c : inf.constraints) got[c.pair] = c.allowed;
  std::map<EdgeKey, std::uint8_t> want{{EdgeKey{2, 6}, kAllowAll},
                                       {EdgeKey{2, 7}, kAllowAll},
                                       {EdgeKey{2, 8}, kAllowLoProvider},
                                       {EdgeKey{5, 7}, kAllowAll}};
  if (got != want) return "constraint sets mismatch";

  int max_batch = 0;
  for (const auto& p : paths) max_batch = std::max(max_batch, p.batch);
  std::vector<std::int64_t> per_batch(max_batch, 0);
  std::set<EdgeKey> seen;
  for (const auto& p : paths)
    for (EdgeKey k : extract_edges(p, g))
      if (seen.insert(k).second && p.batch >= 1) ++per_batch[p.batch - 1];
  if (per_batch != std::vector<std::int64_t>{2, 2, 0, 0, 0})
    return "per-batch new-edge counts mismatch";
  CampaignState campaign = evaluate_campaign(per_batch);
  if (!campaign.stopped || campaign.stopped_after != 4)
    return "stopping rule did not fire on the third trailing zero";
  return "";
}

std::string check_feature_scaling() {
  auto row = [](const std::string& cc, double nodes) {
    FeatureVector v;
    v.country = cc;
    v.values[kNumNodes] = nodes;
    return v;
  };
  Diagnostics diag;
  FeatureMatrix m = assemble_and_scale({row("AA", 2), row("BB", 4), row("CC", 6)}, {}, diag);
  if (m.retained != std::vector<int>{kNumNodes}) return "only the varying feature may survive";
  if (m.scaled[0][0] != 0.0 || m.scaled[1][0] != 0.5 || m.scaled[2][0] != 1.0)
    return "scaled values are not {0, 0.5, 1}";

  oracles::Rng rng(4108);
  std::vector<FeatureVector> rows;
  for (int i = 0; i < 8; ++i) {
    FeatureVector v;
    v.country = "C" + std::to_string(i);
    for (int f = 0; f < kFeatureCount; ++f) v.values[f] = 10 * rng.unit();
    rows.push_back(v);
  }
  Diagnostics diag2;
  FeatureMatrix r = assemble_and_scale(rows, {}, diag2);
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    for (std::size_t k = 0; k < r.retained.size(); ++k) {
      const ScaleParam& sp = r.scaling[k];
      double back = sp.min + r.scaled[i][k] * (sp.max - sp.min);
      if (std::fabs(back - r.rows[i].values[r.retained[k]]) > 1e-12)
        return "de-scaled value drifted by more than 1e-12";
      if (r.scaled[i][k] < -1e-15 || r.scaled[i][k] > 1.0 + 1e-15)
        return "a non-excluded row scaled outside [0, 1]";
    }

  Diagnostics diag3;
  FeatureMatrix o = assemble_and_scale({row("AA", 2), row("BB", 4), row("US", 40)}, {"US"}, diag3);
  if (!o.train_excluded[2]) return "excluded country lost its flag";
  if (o.train_excluded[0] || o.train_excluded[1]) return "wrong row flagged";
  if (!(o.scaled[2][0] > 1.0)) return "outlier outside the training range must scale past 1";
  return "";
}

std::string check_category_bands() {
  if (categorize(30.0) != Category::NotFree) return "30 is not NotFree";
  if (categorize(31.0) != Category::PartlyFree) return "31 is not PartlyFree";
  if (categorize(61.0) != Category::Free) return "61 is not Free";
  if (categorize(0.0) != Category::NotFree || categorize(60.0) != Category::PartlyFree ||
      categorize(100.0) != Category::Free)
    return "band edges misplaced";

  oracles::Rng rng(4109);
  for (int trial = 0; trial < 1000; ++trial) {
    PredictionReport report;
    int n = rng.uniform(5, 40);
    for (int i = 0; i < n; ++i) {
      PredictionRow r;
      r.country = "C" + std::to_string(i);
      r.actual_cat = static_cast<Category>(rng.uniform(0, 2));
      r.predicted_cat = static_cast<Category>(rng.uniform(0, 2));
      report.rows.push_back(r);
    }
    CategoryMetrics m = category_metrics(report);
    int total = 0;
    for (int a = 0; a < 3; ++a)
      for (int p = 0; p < 3; ++p) total += m.confusion[a][p];
    if (total != n) return "confusion cells do not sum to the row count";
    if (m.accuracy_merged < m.accuracy3 - 1e-12)
      return "merging categories lowered accuracy on trial " + std::to_string(trial);
  }
  return "";
}

std::string check_world_determinism() {
  testutil::TempDir tmp;
  auto config_for = [&](const std::string& out_dir) {
    std::ostringstream j;
    j << "{\n  \"inputs\": {\n";
    j << "    \"rel_file\": \"" << testutil::data_path("miniworld/rels.txt") << "\",\n";
    j << "    \"delegations\": \"" << testutil::data_path("miniworld/delegations.txt")
      << "\",\n";
    j << "    \"prefix2as\": \"" << testutil::data_path("miniworld/prefix2as.txt") << "\",\n";
    j << "    \"ixp_prefixes\": \"" << testutil::data_path("miniworld/ixp.txt") << "\",\n";
    j << "    \"country_table\": \"" << testutil::data_path("miniworld/countries.csv")
      << "\",\n";
    j << "    \"traceroutes\": \"" << testutil::data_path("miniworld/traces.jsonl") << "\"\n";
    j << "  },\n  \"out_dir\": \"" << out_dir << "\"\n}\n";
    return j.str();
  };
  std::string out1 = tmp.sub("first");
  std::string out2 = tmp.sub("second");
  PipelineConfig cfg1 = PipelineConfig::load(tmp.file("cfg1.json", config_for(out1)));
  PipelineConfig cfg2 = PipelineConfig::load(tmp.file("cfg2.json", config_for(out2)));
  for (const PipelineConfig* cfg : {&cfg1, &cfg2}) {
    run_build(*cfg);
    run_traces(*cfg);
    run_features(*cfg);
    run_predict(*cfg);
    run_report(*cfg);
  }

  std::set<std::string> names1, names2;
  for (const auto& e : std::filesystem::directory_iterator(out1))
    names1.insert(e.path().filename().string());
  for (const auto& e : std::filesystem::directory_iterator(out2))
    names2.insert(e.path().filename().string());
  if (names1 != names2) return "the two runs wrote different artifact sets";
  if (names1.size() < 20)
    return "expected a full artifact set, found " + std::to_string(names1.size());
  for (const auto& name : names1) {
    std::string a = read_file(out1 + "/" + name);
    std::string b = read_file(out2 + "/" + name);
    if (a.empty()) return name + " is empty";
    if (a != b) return name + " differs between the two runs";
  }
  return "";
}

}  // namespace

int main() {
  Gate gate;
  gate.run("valley-free distances match exhaustive path enumeration", 10.0,
           check_valley_free_enumeration);
  gate.run("customer cones equal the brute-force provider closure", 0,
           check_customer_cones);
  gate.run("lasso matches least squares at zero penalty and satisfies KKT", 0,
           check_lasso_solver);
  gate.run("trees take exact leaf means; linear leaves win on piecewise data", 0,
           check_regression_trees);
  gate.run("algebraic connectivity hits closed-form references", 0,
           check_algebraic_connectivity);
  gate.run("structural metrics hit closed-form references", 0,
           check_structural_references);
  gate.run("golden traceroute fixture reproduces paths, edges and constraints", 0,
           check_traceroute_golden);
  gate.run("feature scaling round-trips and flags excluded outliers", 0,
           check_feature_scaling);
  gate.run("category bands sit on documented edges; merging never hurts", 0,
           check_category_bands);
  gate.run("five-country world runs are byte-identical", 60.0,
           check_world_determinism);

  if (gate.failures == 0) {
    std::cout << "all acceptance checks passed" << std::endl;
    return 0;
  }
  std::cout << gate.failures << " acceptance check(s) failed" << std::endl;
  return 1;
}
