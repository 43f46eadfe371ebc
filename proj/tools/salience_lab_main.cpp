#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "salience/errors.hpp"
#include "salience/pipeline.hpp"

namespace {

using salience::pipeline::PipelineConfig;

std::vector<std::string> split_terms(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_artifacts(const std::vector<std::string>& paths) {
  for (const auto& p : paths) std::cout << "wrote " << p << "\n";
}

void print_eval(const PipelineConfig& cfg, const std::string& split) {
  std::ifstream in(cfg.out_dir + "/eval_" + split + ".csv");
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') std::cout << line << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"salience-lab: graded entity salience analytics"};
  app.require_subcommand(1);

  PipelineConfig cfg;
  std::string config_path;
  bool seed_given = false;

  app.add_option("--config", config_path,
                 "JSON config file (flags override its values)");
  app.add_option("--corpus", cfg.corpus_dir, "corpus directory (*.json)");
  app.add_option("--out", cfg.out_dir, "artifact output directory");
  app.add_option("--partitions", cfg.partitions,
                 "partitions to include (default: train dev test ood)");
  app.add_option("--relations", cfg.relations_path,
                 "coarse relation inventory JSON");
  app.add_option("--collapse", cfg.collapse_threshold,
                 "categorical collapse threshold (default 300)");
  app.add_option("--parts", cfg.dispersion_parts,
                 "dispersion partitions (default 10)");
  app.add_option("--summaries", cfg.n_summaries,
                 "summaries per document (default 5)");
  app.add_option("--seed", cfg.seed, "global seed")->each([&](const std::string&) {
    seed_given = true;
  });
  app.add_option("--threads", cfg.threads, "worker cap (default 1)");
  app.add_flag("--timestamps", cfg.timestamps,
               "include a timestamp header line in artifacts");
  app.add_option("--fit-partition", cfg.fit_partition,
                 "partition models fit on (default train)");
  app.add_option("--grad-tol", cfg.grad_tol,
                 "optimizer gradient tolerance (default 1e-6)");
  app.add_option("--max-iter", cfg.max_iter,
                 "optimizer iteration cap (default 500)");

  auto* ingest = app.add_subcommand(
      "ingest", "parse, validate and assign salience");

  std::string level = "mention";
  auto* features_cmd =
      app.add_subcommand("features", "build and encode feature tables");
  features_cmd->add_option("--level", level, "mention or entity");

  std::string analysis;
  auto* describe = app.add_subcommand(
      "describe", "descriptive reports (deprel|etype|relations|dm|centering)");
  describe->add_option("--analysis", analysis, "which analysis")->required();

  std::string terms_csv;
  std::string bb_level = "mention";
  auto* fit_bb =
      app.add_subcommand("fit-bb", "fit the beta-binomial regression");
  fit_bb->add_option("--terms", terms_csv, "comma-separated model terms")
      ->required();
  fit_bb->add_option("--level", bb_level, "mention or entity");

  std::string anova_level = "mention";
  auto* anova = app.add_subcommand(
      "anova", "single-term-deletion likelihood-ratio table");
  anova->add_option("--level", anova_level, "mention or entity");

  auto* fit_forest =
      app.add_subcommand("fit-forest", "fit the extra-trees classifier");
  fit_forest->add_option("--trees", cfg.trees, "ensemble size (default 100)");
  fit_forest->add_option("--min-leaf", cfg.min_leaf,
                         "minimum leaf size (default 1)");
  fit_forest->add_option("--k-features", cfg.k_features,
                         "candidates per node (default sqrt)");

  std::string method = "both";
  std::string split = "dev";
  auto* importance =
      app.add_subcommand("importance", "feature importance report");
  importance->add_option("--method", method, "gini, mda or both");
  importance->add_option("--split", split, "evaluation partition");
  importance->add_option("--repeats", cfg.mda_repeats,
                         "MDA shuffle repeats (default 5)");

  std::string shuffle_split = "dev";
  auto* shuffle =
      app.add_subcommand("shuffle-genre", "genre-shuffle error analysis");
  shuffle->add_option("--split", shuffle_split, "evaluation partition");
  shuffle->add_option("--top", cfg.shuffle_top_k,
                      "records per polarity (default 5)");

  std::string eval_split = "test";
  auto* eval_cmd = app.add_subcommand("eval", "evaluate saved models");
  eval_cmd->add_option("--split", eval_split, "dev, test, ood or all")
      ->required();

  std::string tsne_split = "dev";
  auto* tsne_cmd =
      app.add_subcommand("tsne", "2-D entity-profile embedding data");
  tsne_cmd->add_option("--split", tsne_split, "partition to embed");
  tsne_cmd->add_option("--perplexity", cfg.perplexity,
                       "t-SNE perplexity (default 30)");
  tsne_cmd->add_option("--iterations", cfg.tsne_iterations,
                       "t-SNE iterations (default 1000)");
  tsne_cmd->add_option("--learning-rate", cfg.learning_rate,
                       "t-SNE learning rate (default 200)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw salience::DataError(config_path + ": cannot open file");
      std::ostringstream buf;
      buf << in.rdbuf();
      PipelineConfig file_cfg = PipelineConfig::from_json(buf.str());
      // Flags win over the config file; reparse onto the loaded values.
      cfg = file_cfg;
      app.clear();
      app.parse(argc, argv);
    }
    if (!seed_given) {
      if (const char* env = std::getenv("SALIENCE_LAB_SEED")) {
        cfg.seed = std::strtoull(env, nullptr, 10);
      }
    }

    using namespace salience::pipeline;
    if (*ingest) {
      print_artifacts(run_ingest(cfg));
    } else if (*features_cmd) {
      print_artifacts(run_features(cfg, level));
    } else if (*describe) {
      print_artifacts(run_describe(cfg, analysis));
    } else if (*fit_bb) {
      print_artifacts(run_fit_bb(cfg, split_terms(terms_csv), bb_level));
    } else if (*anova) {
      print_artifacts(run_anova(cfg, anova_level));
    } else if (*fit_forest) {
      print_artifacts(run_fit_forest(cfg));
    } else if (*importance) {
      print_artifacts(run_importance(cfg, method, split));
    } else if (*shuffle) {
      print_artifacts(run_shuffle_genre(cfg, shuffle_split));
    } else if (*eval_cmd) {
      print_artifacts(run_eval(cfg, eval_split));
      print_eval(cfg, eval_split);
    } else if (*tsne_cmd) {
      print_artifacts(run_tsne(cfg, tsne_split));
    }
  } catch (const salience::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const salience::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const salience::ModelError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
