#ifndef FREETOPO_TRACEROUTE_HPP
#define FREETOPO_TRACEROUTE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "freetopo/ipv4.hpp"
#include "freetopo/topology.hpp"

namespace freetopo {

enum class TraceKind { InsideOut, OutsideIn, Mesh };

const char* trace_kind_name(TraceKind k);
std::optional<TraceKind> trace_kind_from_name(std::string_view name);

struct Hop {
  int idx = 0;
  std::optional<std::uint32_t> ip;  // nullopt = unresponsive
};

struct TracerouteRecord {
  std::string id;
  TraceKind kind = TraceKind::Mesh;
  std::string src_country;
  std::string dst_country;
  int batch = 0;  // measurement batch index, 0 when the campaign is untracked
  std::vector<Hop> hops;  // idx strictly increasing, at least 2 hops
};

struct NormalizeResult {
  std::vector<TracerouteRecord> records;
  std::uint64_t skipped = 0;  // malformed or invariant-violating records
};

// Reads line-delimited JSON records (see README for the schema). Multiple
// replies per hop collapse to the first responding address; timeouts become
// unresponsive hops. Bad records are skipped with a warning.
NormalizeResult normalize_traceroutes(const std::string& path, Diagnostics& diag);

struct AsPathRecord {
  std::string source_id;
  TraceKind kind = TraceKind::Mesh;
  int batch = 0;
  std::vector<AsNum> as_path;  // no two consecutive equal ASNs, length >= 1
  int dropped_ixp_hops = 0;
  // Gap positions, indexed into as_path: a gap at position i means one or
  // more unresolved/unresponsive hops fell immediately before as_path[i],
  // so the pair (as_path[i-1], as_path[i]) must not become an edge. 0 marks
  // loss before the first element, as_path.size() loss after the last.
  std::vector<int> gaps;
};

// Fixed pipeline: drop IXP hops, drop private/reserved addresses, map the
// rest by longest-prefix match (multi-origin and unmatched -> unresolved),
// collapse consecutive duplicates, record gaps. Returns nullopt when no hop
// resolves to an ASN.
std::optional<AsPathRecord> to_as_path(const TracerouteRecord& t,
                                       const PrefixTable& prefixes,
                                       const IxpPrefixes& ixp);

// Adjacent pairs of the path that do not straddle a gap and are not already
// edges of g.
std::vector<EdgeKey> extract_edges(const AsPathRecord& p, const AsGraph& g);

struct InconsistencyReport {
  std::vector<std::string> infeasible_paths;  // ids of paths no labeling can make valley-free
  std::vector<EdgeKey> empty_intersections;   // edges whose cross-path constraint set emptied
};

struct InferenceResult {
  std::vector<EdgeConstraint> constraints;  // edges not in g, non-empty allowed sets
  InconsistencyReport report;
};

// Valley-free relationship inference. A label is allowed for a traversal
// when some labeling of its gap-free segment, holding g's known labels
// fixed, keeps the segment inside the up* peer? down* grammar; segments are
// constrained independently. Constraints intersect across traversals and
// across paths, so a path that walks one edge twice narrows that edge the
// same way two separate paths would.
InferenceResult infer_relationships(std::span<const AsPathRecord> paths, const AsGraph& g);

struct CampaignState {
  std::vector<int> batch_sizes;            // 5, 10, 15, ...
  std::vector<std::int64_t> new_edge_counts;
  bool stopped = false;
  int stopped_after = -1;  // index of the batch where the rule fired
};

// Progressive measurement stopping rule: stop once three consecutive batches
// add zero edges. Stopping latches; later batches never un-stop a campaign.
CampaignState evaluate_campaign(std::span<const std::int64_t> per_batch_new_edges);

}  // namespace freetopo

#endif  // FREETOPO_TRACEROUTE_HPP
