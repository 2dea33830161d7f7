#ifndef FREETOPO_PIPELINE_HPP
#define FREETOPO_PIPELINE_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "freetopo/features.hpp"
#include "freetopo/ml.hpp"
#include "freetopo/traceroute.hpp"

namespace freetopo {

enum class PathGraphChoice { Caida, Augmented };

struct PipelineConfig {
  struct Inputs {
    std::string rel_file;
    std::string delegations;
    std::string prefix2as;
    std::string ixp_prefixes;
    std::string country_table;
    std::string traceroutes;  // optional, empty = none
  } inputs;

  std::set<std::string> exclude{"US", "RU", "SC", "NL"};
  FeatureConfig features;
  PathGraphChoice path_graph = PathGraphChoice::Augmented;
  ModelSpec model;
  bool all_models = true;  // run every model kind unless one was pinned
  std::vector<std::string> report_countries;
  int report_top_residuals = 10;
  std::string out_dir = "out";

  static PipelineConfig load(const std::string& path);
  // Throws std::invalid_argument when a referenced input path is missing.
  void validate() const;
};

// Shared intermediate state so subcommands stay deterministic and cheap to
// compose. Everything derives from the config's input files.
struct PipelineData {
  std::vector<RelRecord> rels;
  std::vector<CountryAssignment> assignments;
  std::vector<PrefixOrigin> prefixes;
  IxpPrefixes ixp;
  std::vector<CountryRecord> country_table;
  AsGraph caida;                    // BGP-derived graph
  std::optional<AsGraph> augmented; // after traceroute merge, when traceroutes exist
  // Traceroute pipeline products (empty without a traceroutes input):
  std::vector<AsPathRecord> as_paths;
  std::uint64_t traces_skipped = 0;
  std::uint64_t empty_paths = 0;
  InferenceResult inference;
  MergeReport merge_report;
  std::map<std::string, std::uint64_t> new_edges_by_kind;
  CampaignState campaign;

  const AsGraph& graph(PathGraphChoice choice) const {
    return choice == PathGraphChoice::Augmented && augmented ? *augmented : caida;
  }
};

PipelineData load_pipeline_data(const PipelineConfig& cfg, Diagnostics& diag);

struct FeatureRun {
  FeatureMatrix matrix;
  CountryMatrix path_matrix;
  // country -> reason, for countries that could not become rows
  std::vector<std::pair<std::string, std::string>> missing;
};

FeatureRun compute_features(const PipelineConfig& cfg, const PipelineData& data,
                            Diagnostics& diag);

Dataset make_dataset(const FeatureRun& run, std::span<const CountryRecord> table,
                     const std::set<std::string>& exclusions);

// Subcommand bodies. Each writes its artifacts under cfg.out_dir and returns
// the number of warnings emitted. All outputs are byte-deterministic for a
// fixed config and seed.
int run_build(const PipelineConfig& cfg);
int run_traces(const PipelineConfig& cfg);
int run_features(const PipelineConfig& cfg);
int run_predict(const PipelineConfig& cfg);
int run_report(const PipelineConfig& cfg);

}  // namespace freetopo

#endif  // FREETOPO_PIPELINE_HPP
