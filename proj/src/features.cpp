#include "salience/features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "json.hpp"
#include "salience/csv.hpp"
#include "salience/errors.hpp"
#include "salience/stats.hpp"

namespace salience::features {

using nlohmann::json;

std::size_t Column::size() const {
  switch (kind) {
    case ColumnKind::Numeric: return num.size();
    case ColumnKind::Categorical: return cat.size();
    case ColumnKind::Boolean: return flag.size();
  }
  return 0;
}

const Column& FeatureTable::column(const std::string& name) const {
  const Column* c = find_column(name);
  if (!c) throw DataError("no feature column named \"" + name + "\"");
  return *c;
}

const Column* FeatureTable::find_column(const std::string& name) const {
  for (const auto& c : features) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<std::size_t> FeatureTable::rows_in_partition(
    const std::string& name) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows(); ++i) {
    if (name.empty() || partitions[i] == name) out.push_back(i);
  }
  return out;
}

FeatureTable FeatureTable::subset(const std::vector<std::size_t>& row_ids) const {
  FeatureTable out;
  out.level = level;
  out.n_summaries = n_summaries;
  out.collapse_threshold = collapse_threshold;
  out.fit_partition = fit_partition;
  for (std::size_t i : row_ids) {
    out.doc_ids.push_back(doc_ids[i]);
    out.partitions.push_back(partitions[i]);
    out.target.push_back(target[i]);
  }
  for (const auto& c : features) {
    Column nc;
    nc.name = c.name;
    nc.kind = c.kind;
    nc.levels = c.levels;
    nc.scaling = c.scaling;
    for (std::size_t i : row_ids) {
      switch (c.kind) {
        case ColumnKind::Numeric: nc.num.push_back(c.num[i]); break;
        case ColumnKind::Categorical: nc.cat.push_back(c.cat[i]); break;
        case ColumnKind::Boolean: nc.flag.push_back(c.flag[i]); break;
      }
    }
    out.features.push_back(std::move(nc));
  }
  return out;
}

DocumentAnalysis analyze_document(const Document& doc,
                                  const BuildOptions& opts) {
  DocumentAnalysis a;
  a.depths = discourse::compute_depths(doc.edus);
  a.states = centering::analyze_document(doc, opts.cf);
  a.size_percentile = metrics::cluster_size_percentile(doc);
  for (const auto& cluster : doc.clusters) {
    a.entity_centering[cluster.entity_id] =
        centering::entity_centering_features(a.states, doc, cluster);
    a.entity_discourse[cluster.entity_id] =
        discourse::entity_discourse_features(cluster, doc, a.depths);
    a.entity_prevalence[cluster.entity_id] =
        metrics::entity_prevalence_features(doc, cluster, opts.dispersion);
  }
  return a;
}

namespace {

// Column layout shared by both table levels.
struct TableBuilder {
  FeatureTable table;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::unordered_map<std::string, int>> level_index;

  explicit TableBuilder(TableLevel level, int n_summaries) {
    table.level = level;
    table.n_summaries = n_summaries;
    add(ColumnKind::Numeric, "position_in_sent");
    add(ColumnKind::Numeric, "position_in_doc");
    add(ColumnKind::Categorical, "deprel");
    add(ColumnKind::Categorical, "upos");
    add(ColumnKind::Boolean, "definite");
    add(ColumnKind::Boolean, "singular");
    add(ColumnKind::Categorical, "entity_type");
    add(ColumnKind::Categorical, "relation_coarse");
    add(ColumnKind::Numeric, "edu_depth_percentile");
    add(ColumnKind::Boolean, "explicit_dm");
    add(ColumnKind::Categorical, "genre");
    add(ColumnKind::Numeric, "cf_percentile");
    add(ColumnKind::Numeric, "mean_cf");
    add(ColumnKind::Numeric, "cb_proportion");
    add(ColumnKind::Numeric, "mean_transition");
    add(ColumnKind::Numeric, "min_transition");
    add(ColumnKind::Numeric, "cluster_size_percentile");
    add(ColumnKind::Numeric, "cluster_divergence");
    add(ColumnKind::Numeric, "explicit_proportion");
    add(ColumnKind::Numeric, "min_depth_percentile");
  }

  void add(ColumnKind kind, const std::string& name) {
    index[name] = table.features.size();
    Column c;
    c.name = name;
    c.kind = kind;
    table.features.push_back(std::move(c));
    level_index.emplace_back();
  }

  void num(const std::string& name, double v) {
    table.features[index.at(name)].num.push_back(v);
  }
  void boolean(const std::string& name, bool v) {
    table.features[index.at(name)].flag.push_back(v ? 1 : 0);
  }
  void cat(const std::string& name, const std::string& level) {
    const std::size_t i = index.at(name);
    auto& li = level_index[i];
    auto [it, inserted] =
        li.emplace(level, static_cast<int>(table.features[i].levels.size()));
    if (inserted) table.features[i].levels.push_back(level);
    table.features[i].cat.push_back(it->second);
  }

  void meta(const Document& doc, int salience) {
    table.doc_ids.push_back(doc.doc_id);
    table.partitions.push_back(doc.partition);
    table.target.push_back(salience);
  }
};

int cluster_salience(const Document& doc, const std::string& entity_id) {
  const auto& c = doc.cluster(entity_id);
  if (c.salience < 0)
    throw DataError("cluster \"" + entity_id +
                    "\" has no salience; run assign_salience first");
  return c.salience;
}

double cf_percentile_of(const Document& doc, const DocumentAnalysis& a,
                        const Mention& m) {
  const int si = doc.sentence_of_token(m.start).index;
  for (const auto& e : a.states[si].cf_list) {
    if (e.entity_id == m.entity_id) return e.rank_percentile;
  }
  throw DataError("mention \"" + m.mention_id +
                  "\": entity missing from its sentence's Cf list");
}

void push_entity_aggregates(TableBuilder& b, const DocumentAnalysis& a,
                            const std::string& entity_id) {
  const auto& cent = a.entity_centering.at(entity_id);
  const auto& disc = a.entity_discourse.at(entity_id);
  const auto& prev = a.entity_prevalence.at(entity_id);
  b.num("mean_cf", cent.mean_cf_percentile);
  b.num("cb_proportion", cent.cb_proportion);
  b.num("mean_transition", cent.mean_transition);
  b.num("min_transition", cent.min_transition);
  b.num("cluster_size_percentile", prev.cluster_size_percentile);
  b.num("cluster_divergence", prev.dkl_dispersion);
  b.num("explicit_proportion", disc.explicit_proportion);
  b.num("min_depth_percentile", disc.min_depth_percentile);
}

}  // namespace

FeatureTable build_mention_table(const std::vector<Document>& docs,
                                 const BuildOptions& opts) {
  TableBuilder b(TableLevel::Mention, opts.n_summaries);
  for (const auto& doc : docs) {
    const DocumentAnalysis a = analyze_document(doc, opts);
    for (const auto& m : doc.mentions) {
      const auto mdf = discourse::mention_discourse_features(m, doc, a.depths);
      b.meta(doc, cluster_salience(doc, m.entity_id));
      b.num("position_in_sent", metrics::mention_position_in_sentence(doc, m));
      b.num("position_in_doc", metrics::mention_position_in_doc(doc, m));
      b.cat("deprel", doc.token(m.head).deprel);
      b.cat("upos", doc.token(m.head).upos);
      b.boolean("definite", m.definite);
      b.boolean("singular", m.singular);
      b.cat("entity_type", m.entity_type);
      b.cat("relation_coarse", mdf.relation_coarse);
      b.num("edu_depth_percentile", mdf.edu_depth_percentile);
      b.boolean("explicit_dm", mdf.explicit_dm);
      b.cat("genre", doc.genre);
      b.num("cf_percentile", cf_percentile_of(doc, a, m));
      push_entity_aggregates(b, a, m.entity_id);
    }
  }
  return std::move(b.table);
}

FeatureTable build_entity_table(const std::vector<Document>& docs,
                                const BuildOptions& opts) {
  TableBuilder b(TableLevel::Entity, opts.n_summaries);
  for (const auto& doc : docs) {
    const DocumentAnalysis a = analyze_document(doc, opts);
    for (const auto& cluster : doc.clusters) {
      if (cluster.mention_ids.empty())
        throw DataError("cluster \"" + cluster.entity_id + "\" is empty");
      const Mention& first = doc.mention(cluster.mention_ids.front());
      const auto mdf =
          discourse::mention_discourse_features(first, doc, a.depths);
      const auto& prev = a.entity_prevalence.at(cluster.entity_id);
      b.meta(doc, cluster_salience(doc, cluster.entity_id));
      b.num("position_in_sent", prev.first_position_in_sent);
      b.num("position_in_doc", prev.position_in_doc);
      b.cat("deprel", doc.token(first.head).deprel);
      b.cat("upos", doc.token(first.head).upos);
      b.boolean("definite", first.definite);
      b.boolean("singular", first.singular);
      b.cat("entity_type", first.entity_type);
      b.cat("relation_coarse", mdf.relation_coarse);
      b.num("edu_depth_percentile", mdf.edu_depth_percentile);
      b.boolean("explicit_dm", mdf.explicit_dm);
      b.cat("genre", doc.genre);
      b.num("cf_percentile", cf_percentile_of(doc, a, first));
      push_entity_aggregates(b, a, cluster.entity_id);
    }
  }
  return std::move(b.table);
}

Encoder fit_encoder(const FeatureTable& table, const EncoderOptions& opts) {
  Encoder enc;
  enc.collapse_threshold = opts.collapse_threshold;
  enc.zscale = opts.zscale;
  enc.fit_partition = opts.fit_partition;
  const auto fit_rows = table.rows_in_partition(opts.fit_partition);
  for (const auto& c : table.features) {
    if (c.kind == ColumnKind::Categorical) {
      std::vector<std::size_t> counts(c.levels.size(), 0);
      for (std::size_t i : fit_rows) ++counts[c.cat[i]];
      std::vector<std::string> kept;
      for (std::size_t l = 0; l < c.levels.size(); ++l) {
        if (counts[l] >= static_cast<std::size_t>(opts.collapse_threshold))
          kept.push_back(c.levels[l]);
      }
      enc.kept_levels[c.name] = std::move(kept);
    } else if (c.kind == ColumnKind::Numeric && opts.zscale) {
      std::vector<double> values;
      values.reserve(fit_rows.size());
      for (std::size_t i : fit_rows) values.push_back(c.num[i]);
      ScalingStats s;
      if (values.size() >= 2) {
        s.mean = stats::mean(values);
        const double sd = stats::sample_sd(values);
        s.sd = sd > 0 ? sd : 1.0;  // constant column: center only
      } else if (values.size() == 1) {
        s.mean = values[0];
        s.sd = 1.0;
      }
      enc.scaling[c.name] = s;
    }
  }
  return enc;
}

FeatureTable apply_encoder(const FeatureTable& table, const Encoder& enc) {
  FeatureTable out = table;
  out.collapse_threshold = enc.collapse_threshold;
  out.fit_partition = enc.fit_partition;
  for (auto& c : out.features) {
    if (c.kind == ColumnKind::Categorical) {
      auto it = enc.kept_levels.find(c.name);
      if (it == enc.kept_levels.end()) continue;
      std::vector<std::string> new_levels = it->second;
      std::unordered_map<std::string, int> to_new;
      for (std::size_t i = 0; i < new_levels.size(); ++i)
        to_new[new_levels[i]] = static_cast<int>(i);
      int other = -1;
      std::vector<int> remap(c.levels.size());
      for (std::size_t l = 0; l < c.levels.size(); ++l) {
        auto found = to_new.find(c.levels[l]);
        if (found != to_new.end()) {
          remap[l] = found->second;
        } else {
          if (other < 0) {
            other = static_cast<int>(new_levels.size());
            new_levels.push_back(kCollapsedLevel);
            to_new[kCollapsedLevel] = other;
          }
          remap[l] = other;
        }
      }
      for (auto& v : c.cat) v = remap[v];
      c.levels = std::move(new_levels);
    } else if (c.kind == ColumnKind::Numeric && enc.zscale) {
      auto it = enc.scaling.find(c.name);
      if (it == enc.scaling.end()) continue;
      c.scaling = it->second;
      for (auto& v : c.num) v = (v - it->second.mean) / it->second.sd;
    }
  }
  return out;
}

double unscale(const Column& column, double value) {
  if (!column.scaling) return value;
  return value * column.scaling->sd + column.scaling->mean;
}

std::string table_to_csv(const FeatureTable& table) {
  CsvWriter w;
  w.cell("doc_id");
  w.cell("partition");
  for (const auto& c : table.features) w.cell(c.name);
  w.cell("salience");
  w.endrow();
  for (std::size_t i = 0; i < table.rows(); ++i) {
    w.cell(table.doc_ids[i]);
    w.cell(table.partitions[i]);
    for (const auto& c : table.features) {
      switch (c.kind) {
        case ColumnKind::Numeric: w.cell(c.num[i]); break;
        case ColumnKind::Categorical: w.cell(c.level_of(i)); break;
        case ColumnKind::Boolean: w.cell(c.flag[i] ? "1" : "0"); break;
      }
    }
    w.cell(table.target[i]);
    w.endrow();
  }
  return w.str();
}

std::string schema_to_json(const FeatureTable& table) {
  json root;
  root["level"] = table.level == TableLevel::Mention ? "mention" : "entity";
  root["target"] = "salience";
  root["n_summaries"] = table.n_summaries;
  root["collapse_threshold"] = table.collapse_threshold;
  root["fit_partition"] = table.fit_partition;
  auto cols = json::array();
  for (const auto& c : table.features) {
    json col;
    col["name"] = c.name;
    switch (c.kind) {
      case ColumnKind::Numeric: col["kind"] = "numeric"; break;
      case ColumnKind::Categorical: col["kind"] = "categorical"; break;
      case ColumnKind::Boolean: col["kind"] = "boolean"; break;
    }
    if (c.kind == ColumnKind::Categorical) col["levels"] = c.levels;
    if (c.scaling) {
      col["mean"] = c.scaling->mean;
      col["sd"] = c.scaling->sd;
    }
    cols.push_back(std::move(col));
  }
  root["columns"] = std::move(cols);
  return root.dump(2) + "\n";
}

FeatureTable table_from_csv(const std::string& csv_text,
                            const std::string& schema_json) {
  json schema;
  try {
    schema = json::parse(schema_json);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("schema: ") + e.what());
  }
  FeatureTable table;
  table.level = schema.at("level").get<std::string>() == "mention"
                    ? TableLevel::Mention
                    : TableLevel::Entity;
  table.n_summaries = schema.at("n_summaries").get<int>();
  table.collapse_threshold = schema.at("collapse_threshold").get<int>();
  table.fit_partition = schema.at("fit_partition").get<std::string>();
  std::vector<std::unordered_map<std::string, int>> level_index;
  for (const auto& col : schema.at("columns")) {
    Column c;
    c.name = col.at("name").get<std::string>();
    const std::string kind = col.at("kind").get<std::string>();
    if (kind == "numeric") c.kind = ColumnKind::Numeric;
    else if (kind == "categorical") c.kind = ColumnKind::Categorical;
    else if (kind == "boolean") c.kind = ColumnKind::Boolean;
    else throw DataError("schema: unknown column kind \"" + kind + "\"");
    if (col.contains("levels"))
      c.levels = col.at("levels").get<std::vector<std::string>>();
    if (col.contains("mean"))
      c.scaling = ScalingStats{col.at("mean").get<double>(),
                               col.at("sd").get<double>()};
    level_index.emplace_back();
    auto& li = level_index.back();
    for (std::size_t l = 0; l < c.levels.size(); ++l)
      li[c.levels[l]] = static_cast<int>(l);
    table.features.push_back(std::move(c));
  }

  const auto rows = parse_csv(csv_text);
  if (rows.empty()) throw DataError("feature csv: empty");
  const std::size_t expected = table.features.size() + 3;
  if (rows.front().size() != expected)
    throw DataError("feature csv: header has " +
                    std::to_string(rows.front().size()) + " columns, schema " +
                    "expects " + std::to_string(expected));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != expected)
      throw DataError("feature csv: row " + std::to_string(r) +
                      " has wrong arity");
    table.doc_ids.push_back(row[0]);
    table.partitions.push_back(row[1]);
    for (std::size_t f = 0; f < table.features.size(); ++f) {
      Column& c = table.features[f];
      const std::string& cell = row[f + 2];
      switch (c.kind) {
        case ColumnKind::Numeric: c.num.push_back(std::stod(cell)); break;
        case ColumnKind::Categorical: {
          auto it = level_index[f].find(cell);
          if (it == level_index[f].end()) {
            // Levels unseen at fit time stay representable so tree models
            // can route them through the not-in-set branch.
            const int idx = static_cast<int>(c.levels.size());
            c.levels.push_back(cell);
            level_index[f][cell] = idx;
            c.cat.push_back(idx);
          } else {
            c.cat.push_back(it->second);
          }
          break;
        }
        case ColumnKind::Boolean: c.flag.push_back(cell == "1"); break;
      }
    }
    table.target.push_back(std::stoi(row.back()));
  }
  return table;
}

}  // namespace salience::features
