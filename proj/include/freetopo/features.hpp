#ifndef FREETOPO_FEATURES_HPP
#define FREETOPO_FEATURES_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "freetopo/bgpsim.hpp"
#include "freetopo/ingest.hpp"
#include "freetopo/topology.hpp"

namespace freetopo {

// Feature slots. The table lists two features numbered 12; they are split
// into 12a (structural) and 12b (international connectivity).
enum FeatureId : int {
  kNumNodes = 0,          // f1
  kNumEdges,              // f2
  kPercentileDegree,      // f3, 95th percentile of node degrees
  kDiameter,              // f4, on the largest connected component
  kAvgHorizImbalance,     // f5
  kMaxLoadCentrality,     // f6
  kAvgClustering,         // f7
  kCliqueNumber,          // f8
  kAlgConnAuc,            // f9
  kFracConnAuc,           // f10
  kTransitivity,          // f11
  kNumLargeNodes,         // f12a, degree >= threshold
  kMaxPathLen,            // f12b, max finite policy distance to other countries
  kNumIntlCountries,      // f13
  kNumIntlNodes,          // f14
  kIpDensity,             // f15
  kNumAnnouncedPrefixes,  // f16
  kNumLargeProviders,     // f17, customer cone size > 100
  kPercentileCustCone,    // f18
  kStubAses,              // f19
  kTotPeerEdges,          // f20
  kFeatureCount
};

extern const std::array<const char*, kFeatureCount> kFeatureNames;

struct FeatureVector {
  std::string country;
  std::array<double, kFeatureCount> values{};
  bool empty_graph = false;           // no domestic nodes; structural features zeroed
  bool missing_population = false;    // f15 not computable; row must be excluded
  bool all_unreachable = false;       // f12b fell back to the sentinel
};

struct FeatureConfig {
  int large_node_threshold = 10;  // f12a degree cutoff
  double removal_depth = 0.3;     // fraction of nodes removed for the AUC features
};

// Small undirected simple graph over dense indices, the working form for the
// structural metrics.
struct UGraph {
  std::vector<AsNum> ids;               // dense index -> ASN, sorted
  std::vector<std::vector<int>> adj;    // sorted neighbor lists

  int index_of(AsNum asn) const;
  std::size_t num_nodes() const { return ids.size(); }
  std::size_t num_edges() const;
};

UGraph domestic_graph(const CountryView& view);

// f1-f4, f7, f8, f11, f12a. f5/f6 have dedicated entry points below.
void structural_features(const CountryView& view, const FeatureConfig& cfg, FeatureVector& out);

// Linear-interpolation percentile over unsorted values; q in [0,1].
double percentile(std::vector<double> values, double q);

// Betweenness-style load centrality from shortest-path counting, computed
// per connected component and normalized by (n-1)(n-2)/2 of the component.
// Returns the maximum node value; components smaller than 3 contribute 0.
double load_centrality_max(const UGraph& g);

// Horizontal imbalance of an AS with >= 2 customers in the view's domestic
// graph: (max - min customer-cone size among its customers) / (sum of those
// cone sizes). f5 is the mean over such ASes, 0 when there are none. The
// source data gives this feature no formal definition; this one is local to
// this function so alternates can swap in.
double horizontal_imbalance_avg(const CountryView& view, const CustomerCones& cones);

// Algebraic connectivity: second-smallest Laplacian eigenvalue of a
// connected graph, by Lanczos iteration with full reorthogonalization
// against the constant vector, tolerance 1e-8.
double algebraic_connectivity(const UGraph& g, std::span<const int> component);

enum class RobustnessMetric { AlgebraicConnectivity, LargestComponentFraction };

// AUC of the metric's decay while nodes disappear in rank order, up to
// ceil(removal_depth * n) removals. The curve is normalized by its initial
// value and integrated by the trapezoid rule over the rescaled removal
// fraction. Zero removals yield 1 by convention; a zero initial metric
// yields 0.
double robustness_auc(const UGraph& g, std::span<const AsNum> rank_order,
                      RobustnessMetric metric, double removal_depth);

// f12b, f13, f14. The f12b sentinel for an all-unreachable row is the
// matrix-wide maximum finite distance plus one, and the row is flagged.
void international_features(const CountryView& view, const CountryMatrix& matrix,
                            FeatureVector& out);

// f15, f16. Prefixes whose origin set intersects the country's ASNs count;
// exact duplicates count once, overlapping prefixes of different lengths
// each count. country_record == nullptr marks the population missing.
void ip_features(std::span<const CountryAssignment> assignments,
                 std::span<const PrefixOrigin> prefixes,
                 const CountryRecord* country_record, FeatureVector& out);

// f17-f20, cones from the global graph restricted to domestic ASes. An AS
// is a stub when it has no customers anywhere in the global graph.
void routing_features(const CountryView& view, const AsGraph& g,
                      const CustomerCones& cones, FeatureVector& out);

struct ScaleParam {
  int feature = 0;  // FeatureId
  double min = 0;
  double max = 0;
};

struct FeatureMatrix {
  std::vector<int> retained;  // FeatureIds that survived the constant-drop
  std::vector<ScaleParam> scaling;
  std::vector<FeatureVector> rows;                 // raw values
  std::vector<std::vector<double>> scaled;         // per row, retained features only
  std::vector<bool> train_excluded;                // per row
  std::vector<std::string> dropped_constant;       // feature names dropped
};

// Min-max scaling, (x - min) / (max - min), with min/max taken over the
// non-excluded countries only. Excluded countries still get scaled values
// (possibly outside [0,1]) and carry the train_excluded flag. Constant
// features drop with a warning. Throws on fewer than two non-excluded rows.
FeatureMatrix assemble_and_scale(std::vector<FeatureVector> rows,
                                 const std::set<std::string>& exclusions,
                                 Diagnostics& diag);

void save_feature_matrix(std::ostream& out, const FeatureMatrix& m);
void save_scaling_sidecar(std::ostream& out, const FeatureMatrix& m);

}  // namespace freetopo

#endif  // FREETOPO_FEATURES_HPP
