#include "freetopo/features.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <stdexcept>

namespace freetopo {

const std::array<const char*, kFeatureCount> kFeatureNames = {
    "f1_num_nodes",
    "f2_num_edges",
    "f3_percentile_degree",
    "f4_diameter",
    "f5_avg_h_im",
    "f6_max_load_cen",
    "f7_avg_clustering",
    "f8_graph_clique_number",
    "f9_alg_conn",
    "f10_frac_conn",
    "f11_transitivity",
    "f12a_num_large_nodes",
    "f12b_max_path_len",
    "f13_num_intl_countries",
    "f14_num_intl_nodes",
    "f15_ip_density",
    "f16_num_announced_ip",
    "f17_num_large_providers",
    "f18_percentile_cust_cone",
    "f19_stub_ases",
    "f20_tot_peer_edges",
};

int UGraph::index_of(AsNum asn) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), asn);
  if (it == ids.end() || *it != asn) return -1;
  return static_cast<int>(it - ids.begin());
}

std::size_t UGraph::num_edges() const {
  std::size_t total = 0;
  for (const auto& a : adj) total += a.size();
  return total / 2;
}

UGraph domestic_graph(const CountryView& view) {
  UGraph g;
  g.ids = view.domestic_nodes;
  g.adj.assign(g.ids.size(), {});
  for (const auto& [key, data] : view.domestic_edges) {
    int a = g.index_of(key.lo);
    int b = g.index_of(key.hi);
    g.adj[a].push_back(b);
    g.adj[b].push_back(a);
  }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

namespace {

std::vector<std::vector<int>> connected_components(const UGraph& g) {
  const int n = static_cast<int>(g.num_nodes());
  std::vector<std::vector<int>> components;
  std::vector<bool> seen(n, false);
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<int> comp;
    std::deque<int> queue{s};
    seen[s] = true;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      comp.push_back(v);
      for (int w : g.adj[v])
        if (!seen[w]) {
          seen[w] = true;
          queue.push_back(w);
        }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

const std::vector<int>* largest_component(const std::vector<std::vector<int>>& components) {
  const std::vector<int>* best = nullptr;
  for (const auto& c : components)
    if (!best || c.size() > best->size()) best = &c;
  return best;
}

int eccentricity_max(const UGraph& g, const std::vector<int>& component) {
  int diameter = 0;
  std::vector<int> dist(g.num_nodes());
  for (int s : component) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      diameter = std::max(diameter, dist[v]);
      for (int w : g.adj[v])
        if (dist[w] == -1) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
    }
  }
  return diameter;
}

bool has_edge(const UGraph& g, int a, int b) {
  return std::binary_search(g.adj[a].begin(), g.adj[a].end(), b);
}

// Bron–Kerbosch with pivoting; exact maximum clique size.
void bron_kerbosch(const UGraph& g, std::vector<int>& r, std::vector<int> p, std::vector<int> x,
                   std::size_t& best) {
  if (p.empty() && x.empty()) {
    best = std::max(best, r.size());
    return;
  }
  if (r.size() + p.size() <= best) return;

  int pivot = -1;
  std::size_t pivot_links = 0;
  for (int candidates = 0; candidates < 2; ++candidates) {
    const auto& pool = candidates == 0 ? p : x;
    for (int u : pool) {
      std::size_t links = 0;
      for (int v : p)
        if (has_edge(g, u, v)) ++links;
      if (pivot == -1 || links > pivot_links) {
        pivot = u;
        pivot_links = links;
      }
    }
  }

  std::vector<int> ext;
  for (int v : p)
    if (pivot == -1 || !has_edge(g, pivot, v)) ext.push_back(v);

  for (int v : ext) {
    std::vector<int> p2, x2;
    for (int w : p)
      if (has_edge(g, v, w)) p2.push_back(w);
    for (int w : x)
      if (has_edge(g, v, w)) x2.push_back(w);
    r.push_back(v);
    bron_kerbosch(g, r, std::move(p2), std::move(x2), best);
    r.pop_back();
    p.erase(std::find(p.begin(), p.end(), v));
    x.push_back(v);
  }
}

std::size_t clique_number(const UGraph& g) {
  if (g.num_nodes() == 0) return 0;
  std::vector<int> r, p(g.num_nodes()), x;
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<int>(i);
  std::size_t best = 0;
  bron_kerbosch(g, r, std::move(p), std::move(x), best);
  return best;
}

// Deterministic starting vector for the Lanczos iteration.
double xorshift_unit(std::uint32_t& state) {
  state ^= state << 13;
  state ^= state >> 17;
  state ^= state << 5;
  return static_cast<double>(state) / 4294967296.0 - 0.5;
}

}  // namespace

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double h = q * static_cast<double>(values.size() - 1);
  auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

void structural_features(const CountryView& view, const FeatureConfig& cfg, FeatureVector& out) {
  UGraph g = domestic_graph(view);
  const int n = static_cast<int>(g.num_nodes());
  if (n == 0) {
    out.empty_graph = true;
    return;
  }

  out.values[kNumNodes] = n;
  out.values[kNumEdges] = static_cast<double>(g.num_edges());

  std::vector<double> degrees(n);
  for (int v = 0; v < n; ++v) degrees[v] = static_cast<double>(g.adj[v].size());
  out.values[kPercentileDegree] = percentile(degrees, 0.95);

  auto components = connected_components(g);
  out.values[kDiameter] = eccentricity_max(g, *largest_component(components));

  double clustering_sum = 0;
  std::uint64_t closed_paths = 0;  // ordered pairs of adjacent neighbors, = 2 * closed triples
  std::uint64_t paths = 0;         // 2 * connected triples
  for (int v = 0; v < n; ++v) {
    const auto& nb = g.adj[v];
    std::uint64_t deg = nb.size();
    if (deg >= 2) {
      std::uint64_t links = 0;
      for (std::size_t i = 0; i < nb.size(); ++i)
        for (std::size_t j = i + 1; j < nb.size(); ++j)
          if (has_edge(g, nb[i], nb[j])) ++links;
      clustering_sum += 2.0 * static_cast<double>(links) / (static_cast<double>(deg) * (deg - 1));
      closed_paths += 2 * links;
      paths += deg * (deg - 1);
    }
  }
  out.values[kAvgClustering] = clustering_sum / n;
  out.values[kTransitivity] =
      paths == 0 ? 0.0 : static_cast<double>(closed_paths) / static_cast<double>(paths);

  out.values[kCliqueNumber] = static_cast<double>(clique_number(g));

  int large = 0;
  for (int v = 0; v < n; ++v)
    if (static_cast<int>(g.adj[v].size()) >= cfg.large_node_threshold) ++large;
  out.values[kNumLargeNodes] = large;
}

double load_centrality_max(const UGraph& g) {
  const int n = static_cast<int>(g.num_nodes());
  if (n < 3) return 0.0;

  std::vector<double> betweenness(n, 0.0);
  std::vector<int> component_size(n, 0);
  for (const auto& comp : connected_components(g))
    for (int v : comp) component_size[v] = static_cast<int>(comp.size());

  // Brandes accumulation over ordered pairs.
  std::vector<int> dist(n), stack;
  std::vector<double> sigma(n), delta(n);
  std::vector<std::vector<int>> preds(n);
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : preds) p.clear();
    stack.clear();

    dist[s] = 0;
    sigma[s] = 1;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      stack.push_back(v);
      for (int w : g.adj[v]) {
        if (dist[w] == -1) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
      int w = *it;
      for (int v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) betweenness[w] += delta[w];
    }
  }

  double best = 0.0;
  for (int v = 0; v < n; ++v) {
    int nc = component_size[v];
    if (nc < 3) continue;
    double denom = static_cast<double>(nc - 1) * (nc - 2);  // ordered-pair normalization
    best = std::max(best, betweenness[v] / denom);
  }
  return best;
}

double horizontal_imbalance_avg(const CountryView& view, const CustomerCones& cones) {
  std::map<AsNum, std::vector<AsNum>> customers;
  for (const auto& [key, data] : view.domestic_edges) {
    if (data.rel != Relationship::ProviderCustomer) continue;
    AsNum customer = data.provider == key.lo ? key.hi : key.lo;
    customers[data.provider].push_back(customer);
  }

  double sum = 0;
  int counted = 0;
  for (const auto& [provider, custs] : customers) {
    if (custs.size() < 2) continue;
    double lo = 0, hi = 0, total = 0;
    bool first = true;
    for (AsNum c : custs) {
      double size = static_cast<double>(cones.cone_size(c));
      if (first) {
        lo = hi = size;
        first = false;
      } else {
        lo = std::min(lo, size);
        hi = std::max(hi, size);
      }
      total += size;
    }
    sum += (hi - lo) / total;
    ++counted;
  }
  return counted == 0 ? 0.0 : sum / counted;
}

double algebraic_connectivity(const UGraph& g, std::span<const int> component) {
  const int m = static_cast<int>(component.size());
  if (m <= 1) return 0.0;

  std::vector<int> local(g.num_nodes(), -1);
  for (int i = 0; i < m; ++i) local[component[i]] = i;

  // y = L x on the induced subgraph.
  auto apply = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) {
      double acc = 0;
      int deg = 0;
      for (int w : g.adj[component[i]]) {
        int j = local[w];
        if (j < 0) continue;
        acc += x[j];
        ++deg;
      }
      y[i] = deg * x[i] - acc;
    }
    return y;
  };

  const Eigen::VectorXd ones = Eigen::VectorXd::Constant(m, 1.0 / std::sqrt(double(m)));
  std::uint32_t rng = 0x9e3779b9;
  Eigen::VectorXd v(m);
  for (int i = 0; i < m; ++i) v[i] = xorshift_unit(rng);
  v -= ones.dot(v) * ones;
  double norm = v.norm();
  if (norm < 1e-12) {  // pathological start; fall back to a coordinate-ish vector
    v.setZero();
    v[0] = 1.0;
    v -= ones.dot(v) * ones;
    norm = v.norm();
  }
  v /= norm;

  const int max_iter = m - 1;
  std::vector<Eigen::VectorXd> basis{v};
  std::vector<double> alpha, beta;
  double prev_theta = 0;
  bool have_prev = false;

  for (int k = 0; k < max_iter; ++k) {
    Eigen::VectorXd w = apply(basis[k]);
    double a = basis[k].dot(w);
    alpha.push_back(a);

    w -= a * basis[k];
    if (k > 0) w -= beta[k - 1] * basis[k - 1];
    // Full reorthogonalization keeps the deflated direction and earlier
    // Lanczos vectors out of the Krylov basis.
    w -= ones.dot(w) * ones;
    for (const auto& b : basis) w -= b.dot(w) * b;

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k + 1, k + 1);
    for (int i = 0; i <= k; ++i) {
      t(i, i) = alpha[i];
      if (i > 0) t(i, i - 1) = t(i - 1, i) = beta[i - 1];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(t);
    double theta = solver.eigenvalues()[0];

    double b = w.norm();
    bool breakdown = b < 1e-12;
    bool converged = have_prev && std::abs(theta - prev_theta) < 1e-8;
    if (breakdown || converged || k + 1 == max_iter) return theta;

    prev_theta = theta;
    have_prev = true;
    beta.push_back(b);
    basis.push_back(w / b);
  }
  return prev_theta;
}

double robustness_auc(const UGraph& g, std::span<const AsNum> rank_order,
                      RobustnessMetric metric, double removal_depth) {
  const int n = static_cast<int>(g.num_nodes());
  if (n == 0) return 0.0;

  std::vector<bool> removed(n, false);
  auto measure = [&]() {
    UGraph survivor;
    std::vector<int> old_to_new(n, -1);
    for (int v = 0; v < n; ++v) {
      if (removed[v]) continue;
      old_to_new[v] = static_cast<int>(survivor.ids.size());
      survivor.ids.push_back(g.ids[v]);
    }
    survivor.adj.assign(survivor.ids.size(), {});
    for (int v = 0; v < n; ++v) {
      if (removed[v]) continue;
      for (int w : g.adj[v])
        if (!removed[w]) survivor.adj[old_to_new[v]].push_back(old_to_new[w]);
    }
    if (survivor.ids.empty()) return 0.0;
    auto components = connected_components(survivor);
    const auto* largest = largest_component(components);
    if (metric == RobustnessMetric::LargestComponentFraction)
      return static_cast<double>(largest->size()) / static_cast<double>(n);
    return algebraic_connectivity(survivor, *largest);
  };

  const int k = static_cast<int>(std::ceil(removal_depth * n - 1e-9));
  double initial = measure();
  if (initial <= 0.0) return 0.0;
  if (k <= 0) return 1.0;

  double auc = 0.0;
  double prev = 1.0;
  int steps = 0;
  for (AsNum asn : rank_order) {
    int v = g.index_of(asn);
    if (v < 0 || removed[v]) continue;
    removed[v] = true;
    double value = measure() / initial;
    auc += (prev + value) / 2.0 / k;
    prev = value;
    if (++steps == k) break;
  }
  // Ranks shorter than the removal budget leave the curve flat to the edge.
  for (; steps < k; ++steps) auc += prev / k;
  return auc;
}

void international_features(const CountryView& view, const CountryMatrix& matrix,
                            FeatureVector& out) {
  std::set<std::string> foreign;
  std::set<AsNum> gateways;
  auto domestic = [&](AsNum asn) {
    return std::binary_search(view.domestic_nodes.begin(), view.domestic_nodes.end(), asn);
  };
  for (const auto& [key, data] : view.border_edges) {
    (void)data;
    gateways.insert(domestic(key.lo) ? key.lo : key.hi);
  }
  for (const auto& [asn, country] : view.border_foreign_country) foreign.insert(country);

  out.values[kNumIntlCountries] = static_cast<double>(foreign.size());
  out.values[kNumIntlNodes] = static_cast<double>(gateways.size());

  std::int32_t best = kUnreachable;
  auto row = matrix.row(view.country);
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (matrix.countries()[j] == view.country) continue;
    if (row[j] != kUnreachable) best = std::max(best, row[j]);
  }
  if (best == kUnreachable) {
    out.values[kMaxPathLen] = static_cast<double>(matrix.max_finite() + 1);
    out.all_unreachable = true;
  } else {
    out.values[kMaxPathLen] = static_cast<double>(best);
  }
}

void ip_features(std::span<const CountryAssignment> assignments,
                 std::span<const PrefixOrigin> prefixes,
                 const CountryRecord* country_record, FeatureVector& out) {
  std::set<AsNum> domestic;
  for (const auto& a : assignments)
    if (a.country == out.country) domestic.insert(a.asn);

  std::map<Ipv4Prefix, std::set<AsNum>> merged;  // exact duplicates collapse
  for (const auto& p : prefixes)
    merged[p.prefix].insert(p.origins.begin(), p.origins.end());

  std::uint64_t addresses = 0;
  std::uint64_t count = 0;
  for (const auto& [prefix, origins] : merged) {
    bool ours = std::any_of(origins.begin(), origins.end(),
                            [&](AsNum a) { return domestic.count(a) != 0; });
    if (!ours) continue;
    ++count;
    addresses += prefix.address_count();
  }

  out.values[kNumAnnouncedPrefixes] = static_cast<double>(count);
  if (!country_record) {
    out.missing_population = true;
    return;
  }
  out.values[kIpDensity] =
      static_cast<double>(addresses) / static_cast<double>(country_record->population);
}

void routing_features(const CountryView& view, const AsGraph& g,
                      const CustomerCones& cones, FeatureVector& out) {
  int large_providers = 0;
  int stubs = 0;
  std::vector<double> cone_sizes;
  cone_sizes.reserve(view.domestic_nodes.size());
  for (AsNum asn : view.domestic_nodes) {
    std::size_t size = cones.cone_size(asn);
    cone_sizes.push_back(static_cast<double>(size));
    if (size > 100) ++large_providers;

    bool has_customer = false;
    for (AsNum nb : g.neighbors(asn)) {
      const EdgeData* e = g.edge(asn, nb);
      if (e->rel == Relationship::ProviderCustomer && e->provider == asn) {
        has_customer = true;
        break;
      }
    }
    if (!has_customer) ++stubs;
  }

  int peer_edges = 0;
  for (const auto& [key, data] : view.domestic_edges)
    if (data.rel == Relationship::PeerPeer) ++peer_edges;
  for (const auto& [key, data] : view.border_edges)
    if (data.rel == Relationship::PeerPeer) ++peer_edges;

  out.values[kNumLargeProviders] = large_providers;
  out.values[kPercentileCustCone] = percentile(cone_sizes, 0.95);
  out.values[kStubAses] = stubs;
  out.values[kTotPeerEdges] = peer_edges;
}

FeatureMatrix assemble_and_scale(std::vector<FeatureVector> rows,
                                 const std::set<std::string>& exclusions,
                                 Diagnostics& diag) {
  FeatureMatrix m;
  m.rows = std::move(rows);
  m.train_excluded.resize(m.rows.size());
  std::size_t population = 0;
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    m.train_excluded[i] = exclusions.count(m.rows[i].country) != 0;
    if (!m.train_excluded[i]) ++population;
  }
  if (population < 2)
    throw std::invalid_argument("min-max scaling needs at least 2 non-excluded countries, have " +
                                std::to_string(population));

  for (int f = 0; f < kFeatureCount; ++f) {
    double lo = 0, hi = 0;
    bool first = true;
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
      if (m.train_excluded[i]) continue;
      double v = m.rows[i].values[f];
      if (first) {
        lo = hi = v;
        first = false;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (hi <= lo) {
      m.dropped_constant.push_back(kFeatureNames[f]);
      diag.warn("feature " + std::string(kFeatureNames[f]) +
                " is constant across the scaling population; dropped");
      continue;
    }
    m.retained.push_back(f);
    m.scaling.push_back({f, lo, hi});
  }

  m.scaled.resize(m.rows.size());
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    m.scaled[i].reserve(m.retained.size());
    for (const auto& s : m.scaling)
      m.scaled[i].push_back((m.rows[i].values[s.feature] - s.min) / (s.max - s.min));
  }
  return m;
}

void save_feature_matrix(std::ostream& out, const FeatureMatrix& m) {
  out << "country";
  for (int f : m.retained) out << ',' << kFeatureNames[f];
  out << ",train_excluded\n";
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    out << m.rows[i].country;
    for (double v : m.scaled[i]) out << ',' << format_double(v);
    out << ',' << (m.train_excluded[i] ? 1 : 0) << '\n';
  }
}

void save_scaling_sidecar(std::ostream& out, const FeatureMatrix& m) {
  out << "feature,min,max\n";
  for (const auto& s : m.scaling)
    out << kFeatureNames[s.feature] << ',' << format_double(s.min) << ','
        << format_double(s.max) << '\n';
  for (const auto& name : m.dropped_constant) out << "dropped," << name << '\n';
  for (std::size_t i = 0; i < m.rows.size(); ++i)
    if (m.train_excluded[i]) out << "excluded," << m.rows[i].country << '\n';
}

}  // namespace freetopo
