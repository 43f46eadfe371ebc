#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "salience/corpus.hpp"
#include "salience/features.hpp"

namespace salience::pipeline {

// Everything a run needs; serializable as JSON so a config file and flags
// share one dialect. The hash of the canonical serialization goes into
// every artifact's provenance header.
struct PipelineConfig {
  std::string corpus_dir;
  std::vector<std::string> partitions = {"train", "dev", "test", "ood"};
  std::string relations_path;  // optional coarse-relation inventory
  std::string out_dir = "out";
  int collapse_threshold = 300;
  int dispersion_parts = 10;
  int n_summaries = 5;
  std::uint64_t seed = 0;
  int threads = 1;
  bool timestamps = false;
  std::string fit_partition = "train";

  // model knobs
  int trees = 100;
  int min_leaf = 1;
  int k_features = 0;  // 0 = sqrt rule
  double grad_tol = 1e-6;
  int max_iter = 500;
  double perplexity = 30.0;
  int tsne_iterations = 1000;
  double learning_rate = 200.0;
  int mda_repeats = 5;
  int shuffle_top_k = 5;
  std::vector<std::string> spoken_genres = {"conversation", "court",
                                            "interview", "podcast", "speech",
                                            "vlog"};

  static PipelineConfig from_json(const std::string& text);
  std::string to_json() const;
};

std::uint64_t config_hash(const PipelineConfig& cfg);

RelationInventory load_relations(const PipelineConfig& cfg);

// Loads, validates and salience-assigns the corpus, restricted to the
// configured partitions.
std::vector<Document> load_documents(const PipelineConfig& cfg,
                                     std::vector<corpus::Violation>* violations);

// Pipeline steps. Each writes its artifacts under cfg.out_dir (with a
// provenance header) and returns the written paths. Steps that need an
// earlier step's artifact raise DataError naming the required command.
std::vector<std::string> run_ingest(const PipelineConfig& cfg);
std::vector<std::string> run_features(const PipelineConfig& cfg,
                                      const std::string& level);
std::vector<std::string> run_describe(const PipelineConfig& cfg,
                                      const std::string& analysis);
std::vector<std::string> run_fit_bb(const PipelineConfig& cfg,
                                    const std::vector<std::string>& terms,
                                    const std::string& level);
std::vector<std::string> run_anova(const PipelineConfig& cfg,
                                   const std::string& level);
std::vector<std::string> run_fit_forest(const PipelineConfig& cfg);
std::vector<std::string> run_importance(const PipelineConfig& cfg,
                                        const std::string& method,
                                        const std::string& split);
std::vector<std::string> run_shuffle_genre(const PipelineConfig& cfg,
                                           const std::string& split);
std::vector<std::string> run_eval(const PipelineConfig& cfg,
                                  const std::string& split);
std::vector<std::string> run_tsne(const PipelineConfig& cfg,
                                  const std::string& split);

// Loads a feature-table artifact written by run_features.
features::FeatureTable load_feature_table(const PipelineConfig& cfg,
                                          const std::string& level);

std::string version_string();

}  // namespace salience::pipeline
