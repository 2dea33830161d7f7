#include <cctype>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "freetopo/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string exclude;
  std::string model;
  std::uint64_t seed = 0;
  std::string path_graph;
  std::string out;
};

void add_common_options(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "pipeline config file (structured text)")
      ->required();
  sub->add_option("--exclude", o.exclude,
                  "comma-separated alpha-2 codes excluded from scaling/training "
                  "(overrides the config; empty excludes nothing)");
  sub->add_option("--model", o.model, "model to run")
      ->check(CLI::IsMember({"lr", "lasso", "dtla", "dtlr", "all"}));
  sub->add_option("--seed", o.seed, "RNG seed for shuffles and start vectors");
  sub->add_option("--path-graph", o.path_graph, "graph the features run on")
      ->check(CLI::IsMember({"caida", "augmented"}));
  sub->add_option("--out", o.out, "artifact directory");
}

freetopo::PipelineConfig make_config(const CLI::App* sub, const Overrides& o) {
  freetopo::PipelineConfig cfg = freetopo::PipelineConfig::load(o.config);
  if (sub->count("--exclude")) {
    cfg.exclude.clear();
    std::string token;
    for (char c : o.exclude) {
      if (c == ',') {
        if (!token.empty()) cfg.exclude.insert(token);
        token.clear();
      } else {
        token += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      }
    }
    if (!token.empty()) cfg.exclude.insert(token);
  }
  if (sub->count("--model")) {
    if (o.model == "all") {
      cfg.all_models = true;
    } else {
      cfg.all_models = false;
      cfg.model.kind = *freetopo::model_kind_from_name(o.model);
    }
  }
  if (sub->count("--seed")) cfg.model.seed = o.seed;
  if (sub->count("--path-graph"))
    cfg.path_graph = o.path_graph == "caida" ? freetopo::PathGraphChoice::Caida
                                             : freetopo::PathGraphChoice::Augmented;
  if (sub->count("--out")) cfg.out_dir = o.out;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Country-level AS topology reconstruction and press-freedom prediction"};
  app.require_subcommand(1);
  Overrides o;

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const freetopo::PipelineConfig&);
  };
  const Command commands[] = {
      {"build", "parse inputs and build the AS graphs", freetopo::run_build},
      {"traces", "traceroute normalization, inference and merge reports",
       freetopo::run_traces},
      {"features", "compute and scale the per-country feature matrix",
       freetopo::run_features},
      {"predict", "leave-one-out predictions for the configured models",
       freetopo::run_predict},
      {"report", "per-country drill-down report", freetopo::run_report},
  };
  for (const Command& c : commands) add_common_options(app.add_subcommand(c.name, c.help), o);

  CLI11_PARSE(app, argc, argv);

  const CLI::App* sub = app.get_subcommands().front();
  try {
    freetopo::PipelineConfig cfg = make_config(sub, o);
    for (const Command& c : commands)
      if (sub->get_name() == c.name) {
        c.run(cfg);
        return 0;
      }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
