#include "freetopo/topology.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace freetopo {

struct MergeOps {
  static std::map<EdgeKey, EdgeData>& edges(AsGraph& g) { return g.edges_; }
  static void add_node(AsGraph& g, AsNum asn) { g.add_node(asn); }
  static void finalize(AsGraph& g) { g.finalize(); }
};

namespace {

const std::vector<AsNum> kNoNeighbors;

std::string_view label_name(const EdgeData& e) {
  switch (e.rel) {
    case Relationship::ProviderCustomer: return "p2c";
    case Relationship::PeerPeer: return "p2p";
    case Relationship::Unknown: return "unknown";
  }
  return "unknown";
}

}  // namespace

AsGraph AsGraph::build(std::span<const RelRecord> rels,
                       std::span<const CountryAssignment> assignments) {
  AsGraph g;
  for (const auto& a : assignments) {
    g.country_.emplace(a.asn, a.country);
    g.known_countries_.insert(a.country);
  }
  for (const auto& r : rels) {
    g.add_node(r.as_a);
    g.add_node(r.as_b);
    EdgeData data;
    data.rel = r.rel;
    data.provider = r.rel == Relationship::ProviderCustomer ? r.as_a : 0;
    data.source = EdgeSource::Bgp;
    g.edges_.emplace(EdgeKey(r.as_a, r.as_b), data);  // identical duplicates collapse
  }
  g.finalize();
  return g;
}

void AsGraph::add_node(AsNum asn) { index_.emplace(asn, 0); }

void AsGraph::finalize() {
  nodes_.clear();
  nodes_.reserve(index_.size());
  for (const auto& [asn, _] : index_) nodes_.push_back(asn);
  std::sort(nodes_.begin(), nodes_.end());
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i]] = static_cast<std::uint32_t>(i);

  adjacency_.assign(nodes_.size(), {});
  for (const auto& [key, _] : edges_) {
    adjacency_[index_[key.lo]].push_back(key.hi);
    adjacency_[index_[key.hi]].push_back(key.lo);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

int AsGraph::index_of(AsNum asn) const {
  auto it = index_.find(asn);
  return it == index_.end() ? -1 : static_cast<int>(it->second);
}

const std::vector<AsNum>& AsGraph::neighbors(AsNum asn) const {
  auto it = index_.find(asn);
  return it == index_.end() ? kNoNeighbors : adjacency_[it->second];
}

const EdgeData* AsGraph::edge(AsNum a, AsNum b) const {
  auto it = edges_.find(EdgeKey(a, b));
  return it == edges_.end() ? nullptr : &it->second;
}

std::optional<StepLetter> AsGraph::step_letter(AsNum from, AsNum to) const {
  const EdgeData* e = edge(from, to);
  if (!e) return std::nullopt;
  switch (e->rel) {
    case Relationship::PeerPeer: return StepLetter::Peer;
    case Relationship::ProviderCustomer:
      return e->provider == to ? StepLetter::Up : StepLetter::Down;
    case Relationship::Unknown: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<std::string_view> AsGraph::country_of(AsNum asn) const {
  auto it = country_.find(asn);
  if (it == country_.end()) return std::nullopt;
  return std::string_view(it->second);
}

std::vector<AsNum> AsGraph::domestic_nodes(const std::string& country) const {
  std::vector<AsNum> out;
  for (AsNum asn : nodes_) {
    auto it = country_.find(asn);
    if (it != country_.end() && it->second == country) out.push_back(asn);
  }
  return out;
}

MergeResult merge_edges(const AsGraph& g, std::span<const EdgeConstraint> new_edges) {
  MergeResult result{g, {}};
  AsGraph& merged = result.graph;
  MergeReport& report = result.report;

  auto& edges = MergeOps::edges(merged);
  for (const auto& c : new_edges) {
    auto it = edges.find(c.pair);
    if (it != edges.end()) {
      const EdgeData& existing = it->second;
      std::uint8_t existing_bit = 0;
      switch (existing.rel) {
        case Relationship::PeerPeer: existing_bit = kAllowPeer; break;
        case Relationship::ProviderCustomer:
          existing_bit = existing.provider == c.pair.lo ? kAllowLoProvider : kAllowHiProvider;
          break;
        case Relationship::Unknown: existing_bit = 0; break;  // compatible with anything
      }
      if (existing_bit != 0 && (c.allowed & existing_bit) == 0) {
        report.conflicts.push_back({c.pair, existing.rel, existing.provider, c.allowed});
      }
      continue;
    }

    EdgeData data;
    data.source = EdgeSource::Traceroute;
    switch (c.allowed) {
      case kAllowLoProvider:
        data.rel = Relationship::ProviderCustomer;
        data.provider = c.pair.lo;
        break;
      case kAllowHiProvider:
        data.rel = Relationship::ProviderCustomer;
        data.provider = c.pair.hi;
        break;
      case kAllowPeer:
        data.rel = Relationship::PeerPeer;
        break;
      default:
        data.rel = Relationship::Unknown;
        break;
    }
    edges.emplace(c.pair, data);
    MergeOps::add_node(merged, c.pair.lo);
    MergeOps::add_node(merged, c.pair.hi);
    ++report.new_edges;

    auto lo_country = merged.country_of(c.pair.lo);
    auto hi_country = merged.country_of(c.pair.hi);
    if (lo_country) ++report.new_edges_by_country[std::string(*lo_country)];
    if (hi_country && hi_country != lo_country)
      ++report.new_edges_by_country[std::string(*hi_country)];
  }

  MergeOps::finalize(merged);
  return result;
}

CountryView country_view(const AsGraph& g, const std::string& country) {
  if (!g.known_countries().count(country))
    throw std::invalid_argument("unknown country code '" + country + "'");

  CountryView view;
  view.country = country;
  view.domestic_nodes = g.domestic_nodes(country);

  auto is_domestic = [&](AsNum asn) {
    auto c = g.country_of(asn);
    return c && *c == country;
  };
  for (const auto& [key, data] : g.edges()) {
    int domestic = int(is_domestic(key.lo)) + int(is_domestic(key.hi));
    if (domestic == 2) {
      view.domestic_edges.emplace_back(key, data);
    } else if (domestic == 1) {
      view.border_edges.emplace_back(key, data);
      AsNum foreign = is_domestic(key.lo) ? key.hi : key.lo;
      if (auto c = g.country_of(foreign)) view.border_foreign_country.emplace(foreign, *c);
    }
  }
  return view;
}

void save_edge_list(std::ostream& out, const AsGraph& g) {
  for (const auto& [key, data] : g.edges()) {
    AsNum first = key.lo;
    AsNum second = key.hi;
    if (data.rel == Relationship::ProviderCustomer && data.provider == key.hi)
      std::swap(first, second);
    out << first << '|' << second << '|' << label_name(data) << '|'
        << (data.source == EdgeSource::Bgp ? "bgp" : "traceroute") << '\n';
  }
}

AsGraph load_edge_list(const std::string& path,
                       std::span<const CountryAssignment> assignments,
                       Diagnostics& diag) {
  (void)diag;
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");

  AsGraph g = AsGraph::build({}, assignments);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split(t, '|');
    if (fields.size() != 4) throw ParseError(path, lineno, "expected asA|asB|label|source");
    auto a = parse_u32(fields[0]);
    auto b = parse_u32(fields[1]);
    if (!a || !b || *a == *b) throw ParseError(path, lineno, "bad AS pair");

    EdgeData data;
    auto label = trim(fields[2]);
    if (label == "p2c") {
      data.rel = Relationship::ProviderCustomer;
      data.provider = *a;
    } else if (label == "p2p") {
      data.rel = Relationship::PeerPeer;
    } else if (label == "unknown") {
      data.rel = Relationship::Unknown;
    } else {
      throw ParseError(path, lineno, "unknown label '" + std::string(label) + "'");
    }
    auto source = trim(fields[3]);
    if (source == "bgp") data.source = EdgeSource::Bgp;
    else if (source == "traceroute") data.source = EdgeSource::Traceroute;
    else throw ParseError(path, lineno, "unknown source '" + std::string(source) + "'");

    EdgeKey key(*a, *b);
    auto [it, inserted] = MergeOps::edges(g).emplace(key, data);
    if (!inserted) throw ParseError(path, lineno, "duplicate edge");
    MergeOps::add_node(g, *a);
    MergeOps::add_node(g, *b);
  }
  MergeOps::finalize(g);
  return g;
}

}  // namespace freetopo
