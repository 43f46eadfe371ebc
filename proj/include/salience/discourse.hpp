#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "salience/types.hpp"

namespace salience::discourse {

// Per-EDU nesting depth: relation hops to the nearest root. Percentile is
// depth / max depth in the document (0 when the maximum is 0), so roots are
// 0 and the deepest unit is 1.
struct DepthTable {
  std::unordered_map<int, int> depth;
  std::unordered_map<int, double> percentile;
  int max_depth = 0;
};

// Throws DataError naming the cycle if parent edges do not form a forest.
DepthTable compute_depths(const std::vector<Edu>& edus);

struct MentionDiscourseFeatures {
  std::string relation_coarse;
  double edu_depth_percentile = 0;
  bool explicit_dm = false;
};

// Features of the EDU containing the mention's head token. Throws DataError
// if the head token is not covered by any EDU.
MentionDiscourseFeatures mention_discourse_features(const Mention& m,
                                                    const Document& doc,
                                                    const DepthTable& depths);

struct EntityDiscourseFeatures {
  double first_mention_depth_percentile = 0;
  double min_depth_percentile = 0;
  double explicit_proportion = 0;  // share of mentions in explicit-DM EDUs
};

EntityDiscourseFeatures entity_discourse_features(const EntityCluster& cluster,
                                                  const Document& doc,
                                                  const DepthTable& depths);

// One cell of a chi-squared residual analysis.
struct ResidualCell {
  double observed = 0;
  double expected = 0;
  double pearson_residual = 0;  // (observed - expected) / sqrt(expected)
  double std_residual = 0;      // adjusted standardized residual
  double p = 1;                 // two-sided normal tail of std_residual
  std::string stars;            // "***", "**", "*", or ""
};

struct ResidualTable {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<ResidualCell>> cells;  // [row][col]
  double chi2 = 0;
  int df = 0;
};

// Pearson residuals under independence for a labels x outcomes count table,
// with significance from the standardized residual normal approximation.
// Throws DataError on fewer than 2 rows or a zero marginal.
ResidualTable residual_table(const std::vector<std::string>& row_labels,
                             const std::vector<std::string>& col_labels,
                             const std::vector<std::vector<double>>& counts);

// Counts mentions per (coarse relation, salient/non-salient) and runs the
// residual analysis. Rows ordered by the inventory.
ResidualTable relation_salience_residuals(
    const std::vector<std::pair<std::string, bool>>& relation_and_salient);

std::string residual_table_csv(const ResidualTable& table);

}  // namespace salience::discourse
