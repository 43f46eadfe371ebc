#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "salience/features.hpp"

namespace salience::forest {

// Feature view the trees operate on. Numeric and boolean columns hold
// values directly; categorical columns hold level indices (or -1 for a
// level unseen at fit time, which fails every set test).
struct FeatureDesc {
  std::string name;
  bool categorical = false;
  std::vector<std::string> levels;
};

struct Dataset {
  std::vector<FeatureDesc> features;
  std::vector<std::vector<double>> columns;  // column-major
  std::vector<int> labels;                   // 0/1

  std::size_t rows() const { return labels.size(); }
  std::size_t n_features() const { return features.size(); }
};

// Binary target = salience > 0; feature layout from the table schema.
Dataset dataset_from_table(const features::FeatureTable& table);
// Feature values mapped against a fit-time schema (levels matched by name;
// unseen levels become -1).
Dataset dataset_for_prediction(const features::FeatureTable& table,
                               const std::vector<FeatureDesc>& schema);

struct ForestParams {
  int trees = 100;
  int min_leaf = 1;
  int k_features = 0;  // 0 = floor(sqrt(p)), the Extra-Trees default
  bool bootstrap = false;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct TreeNode {
  bool leaf = true;
  int left = -1;
  int right = -1;
  int feature = -1;
  double threshold = 0;            // numeric split: x < threshold goes left
  std::vector<std::uint8_t> in_set;  // categorical split: level in set -> left
  double count0 = 0;               // training class counts at the node
  double count1 = 0;
  double prob = 0;                 // P(salient) at a leaf
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct ExtraTreesModel {
  std::vector<FeatureDesc> schema;
  std::vector<Tree> trees;
  ForestParams params;
  bool degenerate = false;  // single-class training target
  std::string warning;
};

// Extremely randomized trees: per node, k candidate features each get one
// uniform random threshold (numeric) or one random level subset
// (categorical); the candidate with the best Gini impurity decrease splits
// the node. Trees grow to purity or min_leaf. Deterministic given
// (data, params, seed) for any thread count.
ExtraTreesModel fit_forest(const features::FeatureTable& table,
                           const ForestParams& params = {});
ExtraTreesModel fit_forest(const Dataset& data, const ForestParams& params);

// Mean of per-tree leaf probabilities, in [0, 1]. Rows with categorical
// levels unseen at fit time route through the not-in-set branch.
std::vector<double> predict_proba(const ExtraTreesModel& model,
                                  const features::FeatureTable& table);
std::vector<double> predict_proba(const ExtraTreesModel& model,
                                  const Dataset& data);

// prob > 0.5 (ties resolve to not-salient, the majority class).
std::vector<int> predict(const ExtraTreesModel& model, const Dataset& data);

double accuracy(const ExtraTreesModel& model, const Dataset& data);

// Impurity decrease summed per feature, weighted by node sample share,
// averaged over trees, normalized to sum 1.
std::map<std::string, double> gini_importance(const ExtraTreesModel& model);

// Mean decrease in accuracy over `repeats` independent shuffles of each
// feature column. Throws UsageError when repeats < 1.
std::map<std::string, double> permutation_mda(const ExtraTreesModel& model,
                                              const features::FeatureTable& table,
                                              int repeats = 5,
                                              std::uint64_t seed = 0);

struct ImportanceRow {
  std::string feature;
  double gini = 0;
  double mda = 0;
  double gini_z = 0;  // z-scores across features
  double mda_z = 0;
  double mean_z = 0;  // ranking key, as in the two-metric report
};

std::vector<ImportanceRow> importance_report(const ExtraTreesModel& model,
                                             const features::FeatureTable& table,
                                             int repeats = 5,
                                             std::uint64_t seed = 0);
std::string importance_csv(const std::vector<ImportanceRow>& rows);

struct ShuffleRecord {
  std::size_t row = 0;
  bool label = false;   // true = salient
  double p_orig = 0;
  double p_shuffled = 0;
  double delta = 0;     // |p_orig - p_shuffled|
};

// Randomizes the named column once (seeded permutation) and reports rows
// where the shuffled prediction errs although the original succeeds,
// sorted by delta descending.
std::vector<ShuffleRecord> genre_shuffle_analysis(
    const ExtraTreesModel& model, const features::FeatureTable& table,
    std::uint64_t seed, const std::string& column = "genre");
// Same analysis under an explicit permutation (identity => empty result).
std::vector<ShuffleRecord> shuffle_analysis_with_permutation(
    const ExtraTreesModel& model, const features::FeatureTable& table,
    const std::vector<std::size_t>& permutation,
    const std::string& column = "genre");

std::string shuffle_csv(const std::vector<ShuffleRecord>& records,
                        std::size_t top_k);

std::string model_to_json(const ExtraTreesModel& model);
ExtraTreesModel model_from_json(const std::string& text);
// FNV-1a fingerprint of the serialized model.
std::uint64_t model_hash(const ExtraTreesModel& model);

}  // namespace salience::forest
