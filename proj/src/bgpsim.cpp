#include "freetopo/bgpsim.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <stdexcept>

namespace freetopo {

namespace {

// Provider->customer out-edges as dense indices.
std::vector<std::vector<int>> p2c_digraph(const AsGraph& g) {
  std::vector<std::vector<int>> out(g.node_count());
  for (const auto& [key, data] : g.edges()) {
    if (data.rel != Relationship::ProviderCustomer) continue;
    AsNum customer = data.provider == key.lo ? key.hi : key.lo;
    out[g.index_of(data.provider)].push_back(g.index_of(customer));
  }
  return out;
}

// Iterative Tarjan; returns component id per node. Components are numbered
// in completion order, so every component's successors in the condensation
// carry smaller ids.
std::vector<int> tarjan_scc(const std::vector<std::vector<int>>& out, int* scc_count) {
  const int n = static_cast<int>(out.size());
  std::vector<int> index(n, -1), lowlink(n, 0), component(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int next_index = 0;
  int components = 0;

  struct Frame {
    int node;
    std::size_t edge;
  };
  std::vector<Frame> call_stack;

  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call_stack.push_back({root, 0});
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!call_stack.empty()) {
      auto& frame = call_stack.back();
      int v = frame.node;
      if (frame.edge < out[v].size()) {
        int w = out[v][frame.edge++];
        if (index[w] == -1) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call_stack.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
      } else {
        call_stack.pop_back();
        if (!call_stack.empty())
          lowlink[call_stack.back().node] = std::min(lowlink[call_stack.back().node], lowlink[v]);
        if (lowlink[v] == index[v]) {
          int id = components++;
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            component[w] = id;
            if (w == v) break;
          }
        }
      }
    }
  }
  *scc_count = components;
  return component;
}

// Matches the valley-free grammar up* peer? down*; state 0 = ascending,
// 1 = just peered, 2 = descending.
int automaton_step(int state, StepLetter letter) {
  switch (state) {
    case 0:
      if (letter == StepLetter::Up) return 0;
      if (letter == StepLetter::Peer) return 1;
      return 2;
    default:
      return letter == StepLetter::Down ? 2 : -1;
  }
}

}  // namespace

std::span<const AsNum> CustomerCones::cone(AsNum asn) const {
  auto it = by_asn_.find(asn);
  if (it != by_asn_.end()) return *it->second;
  return {};
}

std::size_t CustomerCones::cone_size(AsNum asn) const {
  auto it = by_asn_.find(asn);
  return it != by_asn_.end() ? it->second->size() : 1;
}

CustomerCones customer_cones(const AsGraph& g) {
  auto out = p2c_digraph(g);
  int scc_count = 0;
  auto component = tarjan_scc(out, &scc_count);
  const int n = static_cast<int>(g.node_count());

  std::vector<std::vector<AsNum>> members(scc_count);
  for (int v = 0; v < n; ++v) members[component[v]].push_back(g.nodes()[v]);

  std::vector<std::vector<int>> scc_children(scc_count);
  for (int v = 0; v < n; ++v)
    for (int w : out[v])
      if (component[v] != component[w]) scc_children[component[v]].push_back(component[w]);

  // Components come out of Tarjan descendants-first, so a single ascending
  // pass sees every child cone before its parents.
  std::vector<std::shared_ptr<const std::vector<AsNum>>> cones(scc_count);
  for (int c = 0; c < scc_count; ++c) {
    std::vector<AsNum> cone = members[c];
    for (int child : scc_children[c]) {
      const auto& sub = *cones[child];
      cone.insert(cone.end(), sub.begin(), sub.end());
    }
    std::sort(cone.begin(), cone.end());
    cone.erase(std::unique(cone.begin(), cone.end()), cone.end());
    cones[c] = std::make_shared<const std::vector<AsNum>>(std::move(cone));
  }

  CustomerCones result;
  for (int v = 0; v < n; ++v) result.by_asn_.emplace(g.nodes()[v], cones[component[v]]);
  return result;
}

std::vector<AsNum> as_rank(const AsGraph& g, const CustomerCones& cones) {
  std::vector<AsNum> order = g.nodes();
  std::sort(order.begin(), order.end(), [&](AsNum a, AsNum b) {
    auto ca = cones.cone_size(a), cb = cones.cone_size(b);
    if (ca != cb) return ca > cb;
    auto da = g.neighbors(a).size(), db = g.neighbors(b).size();
    if (da != db) return da > db;
    return a < b;
  });
  return order;
}

std::int32_t PolicyDistance::distance(AsNum asn) const {
  int idx = graph_ ? graph_->index_of(asn) : -1;
  return idx < 0 ? kUnreachable : dist_[idx];
}

PolicyDistance valley_free_distances(const AsGraph& g, std::span<const AsNum> sources) {
  const int n = static_cast<int>(g.node_count());
  constexpr int kStates = 3;
  std::vector<std::int32_t> state_dist(static_cast<std::size_t>(n) * kStates, kUnreachable);
  std::deque<std::pair<int, int>> queue;  // (node index, automaton state)

  for (AsNum s : sources) {
    int idx = g.index_of(s);
    if (idx < 0) throw std::invalid_argument("source AS" + std::to_string(s) + " not in graph");
    if (state_dist[idx * kStates] == kUnreachable) {
      state_dist[idx * kStates] = 0;
      queue.emplace_back(idx, 0);
    }
  }

  while (!queue.empty()) {
    auto [v, state] = queue.front();
    queue.pop_front();
    std::int32_t d = state_dist[v * kStates + state];
    AsNum v_asn = g.nodes()[v];
    for (AsNum w_asn : g.neighbors(v_asn)) {
      auto letter = g.step_letter(v_asn, w_asn);
      if (!letter) continue;
      int next = automaton_step(state, *letter);
      if (next < 0) continue;
      int w = g.index_of(w_asn);
      if (state_dist[w * kStates + next] != kUnreachable) continue;
      state_dist[w * kStates + next] = d + 1;
      queue.emplace_back(w, next);
    }
  }

  PolicyDistance result;
  result.graph_ = &g;
  result.dist_.assign(n, kUnreachable);
  for (int v = 0; v < n; ++v)
    for (int s = 0; s < kStates; ++s) {
      std::int32_t d = state_dist[v * kStates + s];
      if (d != kUnreachable && (result.dist_[v] == kUnreachable || d < result.dist_[v]))
        result.dist_[v] = d;
    }
  return result;
}

std::int32_t CountryMatrix::entry(const std::string& src, const std::string& dst) const {
  auto si = index_.find(src);
  auto di = index_.find(dst);
  if (si == index_.end() || di == index_.end())
    throw std::invalid_argument("country not in matrix");
  return dist_[si->second][di->second];
}

std::span<const std::int32_t> CountryMatrix::row(const std::string& src) const {
  auto si = index_.find(src);
  if (si == index_.end()) throw std::invalid_argument("country not in matrix");
  return dist_[si->second];
}

std::int32_t CountryMatrix::max_finite() const {
  std::int32_t best = 0;
  for (const auto& row : dist_)
    for (std::int32_t d : row)
      if (d != kUnreachable) best = std::max(best, d);
  return best;
}

void CountryMatrix::save(std::ostream& out) const {
  for (std::size_t i = 0; i < countries_.size(); ++i)
    for (std::size_t j = 0; j < countries_.size(); ++j) {
      out << countries_[i] << ',' << countries_[j] << ',';
      if (dist_[i][j] == kUnreachable) out << "UNREACHABLE";
      else out << dist_[i][j];
      out << '\n';
    }
}

CountryMatrix country_path_matrix(const AsGraph& g, std::span<const std::string> countries) {
  CountryMatrix m;
  m.countries_.assign(countries.begin(), countries.end());
  std::sort(m.countries_.begin(), m.countries_.end());
  m.countries_.erase(std::unique(m.countries_.begin(), m.countries_.end()), m.countries_.end());
  for (std::size_t i = 0; i < m.countries_.size(); ++i) m.index_[m.countries_[i]] = i;

  std::vector<std::vector<AsNum>> domestic;
  domestic.reserve(m.countries_.size());
  for (const auto& c : m.countries_) domestic.push_back(g.domestic_nodes(c));

  m.dist_.assign(m.countries_.size(),
                 std::vector<std::int32_t>(m.countries_.size(), kUnreachable));
  for (std::size_t i = 0; i < m.countries_.size(); ++i) {
    if (domestic[i].empty()) continue;
    PolicyDistance pd = valley_free_distances(g, domestic[i]);
    for (std::size_t j = 0; j < m.countries_.size(); ++j) {
      std::int32_t best = kUnreachable;
      for (AsNum b : domestic[j]) {
        std::int32_t d = pd.distance(b);
        if (d != kUnreachable && (best == kUnreachable || d < best)) best = d;
      }
      m.dist_[i][j] = best;
    }
  }
  return m;
}

}  // namespace freetopo
