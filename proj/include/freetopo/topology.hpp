#ifndef FREETOPO_TOPOLOGY_HPP
#define FREETOPO_TOPOLOGY_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "freetopo/common.hpp"
#include "freetopo/ingest.hpp"

namespace freetopo {

// Unordered pair key, lo < hi.
struct EdgeKey {
  AsNum lo = 0;
  AsNum hi = 0;

  EdgeKey() = default;
  EdgeKey(AsNum a, AsNum b) : lo(a < b ? a : b), hi(a < b ? b : a) {}

  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

enum class EdgeSource { Bgp, Traceroute };

struct EdgeData {
  Relationship rel = Relationship::Unknown;
  AsNum provider = 0;  // meaningful only for ProviderCustomer
  EdgeSource source = EdgeSource::Bgp;
};

// Direction letter of one hop of a path under the standard export-policy
// grammar: a valid path reads up* peer? down*.
enum class StepLetter { Up, Peer, Down };

// Annotated global AS graph. Undirected simple graph; provider-customer
// edges keep their orientation in EdgeData. Immutable after construction;
// merges produce a new value.
class AsGraph {
 public:
  static AsGraph build(std::span<const RelRecord> rels,
                       std::span<const CountryAssignment> assignments);

  const std::vector<AsNum>& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool has_node(AsNum asn) const { return index_.count(asn) != 0; }
  int index_of(AsNum asn) const;  // -1 when absent

  // Sorted neighbor list; empty for unknown nodes.
  const std::vector<AsNum>& neighbors(AsNum asn) const;

  const EdgeData* edge(AsNum a, AsNum b) const;
  const std::map<EdgeKey, EdgeData>& edges() const { return edges_; }

  // Letter for traversing from `from` to `to`, or nullopt when the edge is
  // missing or its label is Unknown (unusable in policy routing).
  std::optional<StepLetter> step_letter(AsNum from, AsNum to) const;

  // Registration country of an AS; nullopt when unassigned. The map covers
  // every assignment given at build time, not just graph nodes, so merged-in
  // nodes resolve too.
  std::optional<std::string_view> country_of(AsNum asn) const;
  const std::set<std::string>& known_countries() const { return known_countries_; }

  // Domestic nodes of a country present in the graph, sorted.
  std::vector<AsNum> domestic_nodes(const std::string& country) const;

 private:
  friend struct MergeOps;
  void add_node(AsNum asn);
  void finalize();

  std::vector<AsNum> nodes_;  // sorted
  std::unordered_map<AsNum, std::uint32_t> index_;
  std::vector<std::vector<AsNum>> adjacency_;  // by dense index, sorted
  std::map<EdgeKey, EdgeData> edges_;
  std::unordered_map<AsNum, std::string> country_;
  std::set<std::string> known_countries_;
};

// Candidate edge from traceroute inference. `allowed` is a bitmask over the
// three labels relative to the (lo, hi) orientation of the pair.
inline constexpr std::uint8_t kAllowLoProvider = 1;  // ProviderCustomer, lo provider of hi
inline constexpr std::uint8_t kAllowHiProvider = 2;  // ProviderCustomer, hi provider of lo
inline constexpr std::uint8_t kAllowPeer = 4;
inline constexpr std::uint8_t kAllowAll = 7;

struct EdgeConstraint {
  EdgeKey pair;
  std::uint8_t allowed = kAllowAll;  // non-empty subset of the three labels
};

struct MergeConflict {
  EdgeKey pair;
  Relationship existing = Relationship::Unknown;
  AsNum existing_provider = 0;
  std::uint8_t constraint = 0;
};

struct MergeReport {
  std::uint64_t new_edges = 0;
  std::map<std::string, std::uint64_t> new_edges_by_country;
  std::vector<MergeConflict> conflicts;
};

struct MergeResult {
  AsGraph graph;
  MergeReport report;
};

// Adds edges absent from g; existing edges keep their label (BGP-derived
// labels win) and mismatches land in the report. A new edge gets the
// definite label when the constraint allows exactly one, Unknown otherwise.
// An edge counts for every country one of its endpoints is registered in.
MergeResult merge_edges(const AsGraph& g, std::span<const EdgeConstraint> new_edges);

struct CountryView {
  std::string country;
  std::vector<AsNum> domestic_nodes;  // sorted
  std::vector<std::pair<EdgeKey, EdgeData>> domestic_edges;  // both endpoints domestic
  std::vector<std::pair<EdgeKey, EdgeData>> border_edges;    // exactly one endpoint domestic
  // Registration country of each border edge's foreign endpoint, for the
  // endpoints that have one.
  std::map<AsNum, std::string> border_foreign_country;
};

// Throws std::invalid_argument for a country absent from the assignments.
CountryView country_view(const AsGraph& g, const std::string& country);

// Edge-list persistence, `asA|asB|label|source`. ProviderCustomer lines put
// the provider first. Output is canonically sorted so the round-trip is
// bit-exact.
void save_edge_list(std::ostream& out, const AsGraph& g);
AsGraph load_edge_list(const std::string& path,
                       std::span<const CountryAssignment> assignments,
                       Diagnostics& diag);

}  // namespace freetopo

#endif  // FREETOPO_TOPOLOGY_HPP
