#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "salience/centering.hpp"
#include "salience/discourse.hpp"
#include "salience/metrics.hpp"
#include "salience/types.hpp"

namespace salience::features {

enum class ColumnKind { Numeric, Categorical, Boolean };
enum class TableLevel { Mention, Entity };

struct ScalingStats {
  double mean = 0;
  double sd = 1;
};

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<std::string> levels;        // categorical only
  std::optional<ScalingStats> scaling;    // numeric, set once z-scaled
  std::vector<double> num;                // numeric storage
  std::vector<int> cat;                   // level indices
  std::vector<std::uint8_t> flag;         // boolean storage

  std::size_t size() const;
  const std::string& level_of(std::size_t row) const { return levels[cat[row]]; }
};

// The modeling interface: one row per mention or entity, named feature
// columns, the salience target, and per-row doc/partition metadata.
struct FeatureTable {
  TableLevel level = TableLevel::Mention;
  int n_summaries = 0;
  int collapse_threshold = 0;     // 0 until an encoder ran
  std::string fit_partition;
  std::vector<std::string> doc_ids;
  std::vector<std::string> partitions;
  std::vector<int> target;  // salience, 0..n_summaries
  std::vector<Column> features;

  std::size_t rows() const { return target.size(); }
  const Column& column(const std::string& name) const;
  const Column* find_column(const std::string& name) const;
  // Row subset with partition == name ("" = all rows).
  std::vector<std::size_t> rows_in_partition(const std::string& name) const;
  FeatureTable subset(const std::vector<std::size_t>& row_ids) const;
};

// Everything the feature builders need per document, computed once.
struct DocumentAnalysis {
  discourse::DepthTable depths;
  std::vector<centering::CenteringState> states;
  std::map<std::string, double> size_percentile;
  std::map<std::string, centering::EntityCenteringFeatures> entity_centering;
  std::map<std::string, discourse::EntityDiscourseFeatures> entity_discourse;
  std::map<std::string, metrics::EntityPrevalenceFeatures> entity_prevalence;
};

struct BuildOptions {
  metrics::DispersionConfig dispersion;
  centering::CfConfig cf;
  int n_summaries = 5;
};

DocumentAnalysis analyze_document(const Document& doc,
                                  const BuildOptions& opts = {});

// One row per mention across all documents. Throws DataError (naming the
// mention) when an upstream feature cannot be derived. Columns come out
// raw: categoricals uncollapsed, numerics unscaled.
FeatureTable build_mention_table(const std::vector<Document>& docs,
                                 const BuildOptions& opts = {});

// One row per entity; instance columns take the first mention's value,
// aggregate columns the cluster-level statistics.
FeatureTable build_entity_table(const std::vector<Document>& docs,
                                const BuildOptions& opts = {});

// Frozen fit-partition statistics: kept categorical levels and z-scaling
// constants, reapplied unchanged to dev/test/OOD rows.
struct Encoder {
  int collapse_threshold = 300;
  bool zscale = true;
  std::string fit_partition = "train";
  std::map<std::string, std::vector<std::string>> kept_levels;
  std::map<std::string, ScalingStats> scaling;
};

struct EncoderOptions {
  int collapse_threshold = 300;
  bool zscale = true;
  std::string fit_partition = "train";
};

Encoder fit_encoder(const FeatureTable& table, const EncoderOptions& opts = {});

// Collapses rare categorical levels into "other" and z-scales numerics.
FeatureTable apply_encoder(const FeatureTable& table, const Encoder& enc);

// Inverse of the stored z-scaling for one column (testing/inspection).
double unscale(const Column& column, double value);

// CSV body (doc_id, partition, features..., salience) and the sidecar
// schema carrying kinds, level sets and scaling constants.
std::string table_to_csv(const FeatureTable& table);
std::string schema_to_json(const FeatureTable& table);
FeatureTable table_from_csv(const std::string& csv_text,
                            const std::string& schema_json);

inline constexpr const char* kCollapsedLevel = "other";

}  // namespace salience::features
