#include "salience/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "salience/centering.hpp"
#include "salience/csv.hpp"
#include "salience/discourse.hpp"
#include "salience/embed.hpp"
#include "salience/errors.hpp"
#include "salience/forest.hpp"
#include "salience/metrics.hpp"
#include "salience/random.hpp"
#include "salience/regression.hpp"
#include "salience/stats.hpp"

namespace salience::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version_string() {
#ifdef SALIENCE_LAB_VERSION
  return SALIENCE_LAB_VERSION;
#else
  return "dev";
#endif
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  PipelineConfig cfg;
  auto get = [&](const char* key, auto& target) {
    if (root.contains(key)) {
      target = root.at(key).get<std::decay_t<decltype(target)>>();
    }
  };
  get("corpus_dir", cfg.corpus_dir);
  get("partitions", cfg.partitions);
  get("relations_path", cfg.relations_path);
  get("out_dir", cfg.out_dir);
  get("collapse_threshold", cfg.collapse_threshold);
  get("dispersion_parts", cfg.dispersion_parts);
  get("n_summaries", cfg.n_summaries);
  get("seed", cfg.seed);
  get("threads", cfg.threads);
  get("timestamps", cfg.timestamps);
  get("fit_partition", cfg.fit_partition);
  get("trees", cfg.trees);
  get("min_leaf", cfg.min_leaf);
  get("k_features", cfg.k_features);
  get("grad_tol", cfg.grad_tol);
  get("max_iter", cfg.max_iter);
  get("perplexity", cfg.perplexity);
  get("tsne_iterations", cfg.tsne_iterations);
  get("learning_rate", cfg.learning_rate);
  get("mda_repeats", cfg.mda_repeats);
  get("shuffle_top_k", cfg.shuffle_top_k);
  get("spoken_genres", cfg.spoken_genres);
  return cfg;
}

std::string PipelineConfig::to_json() const {
  json root;
  root["corpus_dir"] = corpus_dir;
  root["partitions"] = partitions;
  root["relations_path"] = relations_path;
  root["out_dir"] = out_dir;
  root["collapse_threshold"] = collapse_threshold;
  root["dispersion_parts"] = dispersion_parts;
  root["n_summaries"] = n_summaries;
  root["seed"] = seed;
  root["threads"] = threads;
  root["timestamps"] = timestamps;
  root["fit_partition"] = fit_partition;
  root["trees"] = trees;
  root["min_leaf"] = min_leaf;
  root["k_features"] = k_features;
  root["grad_tol"] = grad_tol;
  root["max_iter"] = max_iter;
  root["perplexity"] = perplexity;
  root["tsne_iterations"] = tsne_iterations;
  root["learning_rate"] = learning_rate;
  root["mda_repeats"] = mda_repeats;
  root["shuffle_top_k"] = shuffle_top_k;
  root["spoken_genres"] = spoken_genres;
  return root.dump(2) + "\n";
}

std::uint64_t config_hash(const PipelineConfig& cfg) {
  // The worker count and output directory do not change results.
  PipelineConfig canonical = cfg;
  canonical.threads = 1;
  canonical.out_dir.clear();
  return fnv1a(canonical.to_json());
}

RelationInventory load_relations(const PipelineConfig& cfg) {
  if (cfg.relations_path.empty()) return RelationInventory::defaults();
  std::ifstream in(cfg.relations_path);
  if (!in) throw DataError(cfg.relations_path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  json root;
  try {
    root = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw DataError(cfg.relations_path + ": " + e.what());
  }
  RelationInventory inv;
  inv.labels = root.at("labels").get<std::vector<std::string>>();
  if (inv.labels.empty())
    throw DataError(cfg.relations_path + ": empty relation inventory");
  return inv;
}

std::vector<Document> load_documents(
    const PipelineConfig& cfg, std::vector<corpus::Violation>* violations) {
  if (cfg.corpus_dir.empty()) throw UsageError("no corpus directory given");
  corpus::ParseOptions opts;
  opts.relations = load_relations(cfg);
  auto docs = corpus::load_corpus(cfg.corpus_dir, violations, opts);
  std::erase_if(docs, [&](const Document& d) {
    return std::find(cfg.partitions.begin(), cfg.partitions.end(),
                     d.partition) == cfg.partitions.end();
  });
  if (docs.empty())
    throw DataError(cfg.corpus_dir + ": no documents in the requested partitions");
  return docs;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string write_artifact(const PipelineConfig& cfg, const std::string& step,
                           const std::string& name, const std::string& source,
                           const std::string& body) {
  fs::create_directories(cfg.out_dir);
  const fs::path path = fs::path(cfg.out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot write");
  out << "# salience-lab " << version_string() << "\n";
  out << "# step=" << step << " config_hash=" << hex64(config_hash(cfg))
      << " seed=" << cfg.seed << "\n";
  if (!source.empty()) out << "# source=" << source << "\n";
  if (cfg.timestamps) {
    const auto now = std::chrono::system_clock::now();
    out << "# timestamp="
        << std::chrono::duration_cast<std::chrono::seconds>(
               now.time_since_epoch())
               .count()
        << "\n";
  }
  out << body;
  return path.string();
}

std::string read_artifact(const PipelineConfig& cfg, const std::string& name,
                          const std::string& needed_step) {
  const fs::path path = fs::path(cfg.out_dir) / name;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError(path.string() + " not found; run `" + needed_step +
                    "` first");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

features::BuildOptions build_options(const PipelineConfig& cfg) {
  features::BuildOptions opts;
  opts.dispersion.parts = cfg.dispersion_parts;
  opts.n_summaries = cfg.n_summaries;
  return opts;
}

void require_ingested(const PipelineConfig& cfg) {
  read_artifact(cfg, "validation.csv", "ingest");
}

regression::FitConfig fit_config(const PipelineConfig& cfg) {
  regression::FitConfig fc;
  fc.grad_tol = cfg.grad_tol;
  fc.max_iter = cfg.max_iter;
  return fc;
}

std::string modality_of(const PipelineConfig& cfg, const std::string& genre) {
  return std::find(cfg.spoken_genres.begin(), cfg.spoken_genres.end(),
                   genre) != cfg.spoken_genres.end()
             ? "spoken"
             : "written";
}

}  // namespace

std::vector<std::string> run_ingest(const PipelineConfig& cfg) {
  std::vector<corpus::Violation> violations;
  const auto docs = load_documents(cfg, &violations);
  CsvWriter w;
  w.row("doc_id", "rule", "subject", "detail");
  // Re-validate per document so rows carry the doc id.
  corpus::ParseOptions opts;
  opts.relations = load_relations(cfg);
  std::size_t total = 0;
  for (const auto& doc : docs) {
    for (const auto& v : corpus::validate_document(doc, opts)) {
      w.row(doc.doc_id, v.rule, v.subject, v.detail);
      ++total;
    }
  }
  CsvWriter summary;
  summary.row("doc_id", "partition", "genre", "tokens", "sentences",
              "mentions", "entities", "edus", "summaries", "violations");
  for (const auto& doc : docs) {
    std::size_t doc_violations = 0;
    for (const auto& v : corpus::validate_document(doc, opts)) {
      (void)v;
      ++doc_violations;
    }
    summary.row(doc.doc_id, doc.partition, doc.genre, doc.token_count(),
                doc.sentences.size(), doc.mentions.size(),
                doc.clusters.size(), doc.edus.size(), doc.summaries.size(),
                doc_violations);
  }
  return {
      write_artifact(cfg, "ingest", "validation.csv",
                     "corpus.validate_document", w.str()),
      write_artifact(cfg, "ingest", "corpus_summary.csv",
                     "corpus.parse_document", summary.str()),
  };
}

std::vector<std::string> run_features(const PipelineConfig& cfg,
                                      const std::string& level) {
  require_ingested(cfg);
  if (level != "mention" && level != "entity")
    throw UsageError("--level must be mention or entity");
  const auto docs = load_documents(cfg, nullptr);
  const auto opts = build_options(cfg);
  features::FeatureTable table = level == "mention"
                                     ? features::build_mention_table(docs, opts)
                                     : features::build_entity_table(docs, opts);
  features::EncoderOptions eopts;
  eopts.collapse_threshold = cfg.collapse_threshold;
  eopts.fit_partition = cfg.fit_partition;
  const auto encoder = features::fit_encoder(table, eopts);
  table = features::apply_encoder(table, encoder);
  const std::string base = "features_" + level;
  return {
      write_artifact(cfg, "features", base + ".csv",
                     "features.build_" + level + "_table",
                     features::table_to_csv(table)),
      write_artifact(cfg, "features", base + ".schema.json", "",
                     features::schema_to_json(table)),
  };
}

features::FeatureTable load_feature_table(const PipelineConfig& cfg,
                                          const std::string& level) {
  const std::string step = "features --level " + level;
  const std::string csv =
      read_artifact(cfg, "features_" + level + ".csv", step);
  const std::string schema =
      read_artifact(cfg, "features_" + level + ".schema.json", step);
  return features::table_from_csv(csv, schema);
}

namespace {

// Shared grouped-mean report: label, n, mean salience, adjusted CI, share
// of maximal salience.
void group_report(CsvWriter& w, const std::string& scope,
                  const std::map<std::string, std::vector<double>>& groups,
                  double max_value) {
  const auto report = stats::adjusted_group_cis(groups, 0.05, max_value);
  for (const auto& g : report.groups) {
    w.row(scope, g.label, g.n, g.mean, g.ci_low, g.ci_high,
          g.share_of_max_salience, "stats.adjusted_group_cis");
  }
}

}  // namespace

std::vector<std::string> run_describe(const PipelineConfig& cfg,
                                      const std::string& analysis) {
  require_ingested(cfg);
  const auto docs = load_documents(cfg, nullptr);
  const auto opts = build_options(cfg);

  if (analysis == "deprel" || analysis == "etype") {
    const auto table = features::build_mention_table(docs, opts);
    const auto& col =
        table.column(analysis == "deprel" ? "deprel" : "entity_type");
    CsvWriter w;
    w.row("scope", "label", "n", "mean_salience", "ci_low", "ci_high",
          "share_salience_max", "source");
    std::map<std::string, std::vector<double>> overall;
    for (std::size_t i = 0; i < table.rows(); ++i) {
      overall[col.level_of(i)].push_back(table.target[i]);
    }
    group_report(w, "overall", overall, cfg.n_summaries);
    std::vector<std::string> artifacts;
    if (analysis == "etype") {
      const auto& genre_col = table.column("genre");
      std::set<std::string> genres(genre_col.levels.begin(),
                                   genre_col.levels.end());
      std::map<std::string, std::map<std::string, std::vector<double>>>
          by_genre;
      for (std::size_t i = 0; i < table.rows(); ++i) {
        by_genre[genre_col.level_of(i)][col.level_of(i)].push_back(
            table.target[i]);
      }
      for (const auto& [genre, groups] : by_genre) {
        group_report(w, genre, groups, cfg.n_summaries);
      }
      // Spearman of each genre's per-type mean salience against the
      // overall ranking, over the types attested in the genre.
      CsvWriter sp;
      sp.row("genre", "n_types", "spearman_rho", "p", "source");
      std::map<std::string, double> overall_means;
      for (const auto& [etype, values] : overall) {
        overall_means[etype] = stats::mean(values);
      }
      for (const auto& [genre, groups] : by_genre) {
        std::vector<double> a, b;
        for (const auto& [etype, values] : groups) {
          a.push_back(overall_means.at(etype));
          b.push_back(stats::mean(values));
        }
        if (a.size() < 3) continue;
        try {
          const auto corr = stats::spearman(a, b);
          sp.row(genre, a.size(), corr.r, stats::format_pvalue(corr.p),
                 "stats.spearman");
        } catch (const DataError&) {
          // constant ranking in a tiny genre: skip the row
        }
      }
      artifacts.push_back(write_artifact(cfg, "describe",
                                         "describe_etype_spearman.csv", "",
                                         sp.str()));
    }
    artifacts.insert(artifacts.begin(),
                     write_artifact(cfg, "describe",
                                    "describe_" + analysis + ".csv", "",
                                    w.str()));
    return artifacts;
  }

  if (analysis == "relations" || analysis == "dm") {
    const auto table = features::build_mention_table(docs, opts);
    std::vector<std::pair<std::string, bool>> pairs;
    if (analysis == "relations") {
      const auto& col = table.column("relation_coarse");
      for (std::size_t i = 0; i < table.rows(); ++i) {
        pairs.push_back({col.level_of(i), table.target[i] > 0});
      }
    } else {
      const auto& col = table.column("explicit_dm");
      for (std::size_t i = 0; i < table.rows(); ++i) {
        pairs.push_back(
            {col.flag[i] ? "explicit" : "implicit", table.target[i] > 0});
      }
    }
    const auto residuals = discourse::relation_salience_residuals(pairs);
    return {write_artifact(cfg, "describe", "describe_" + analysis + ".csv",
                           "discourse.relation_salience_residuals",
                           discourse::residual_table_csv(residuals))};
  }

  if (analysis == "centering") {
    // Entity-level correlations of prevalence and centering metrics with
    // salience, both dispersion normalizations included.
    std::vector<double> salience;
    std::map<std::string, std::vector<double>> metrics_by_name;
    for (const auto& doc : docs) {
      const auto analysis_data = features::analyze_document(doc, opts);
      for (const auto& cluster : doc.clusters) {
        const auto& cent = analysis_data.entity_centering.at(cluster.entity_id);
        const auto& prev = analysis_data.entity_prevalence.at(cluster.entity_id);
        salience.push_back(cluster.salience);
        metrics_by_name["cluster_size"].push_back(cluster.size());
        metrics_by_name["cluster_size_percentile"].push_back(
            prev.cluster_size_percentile);
        metrics_by_name["dispersion_exp"].push_back(prev.dkl_dispersion);
        metrics_by_name["dispersion_max"].push_back(prev.dkl_dispersion_max);
        metrics_by_name["mean_cf"].push_back(cent.mean_cf_percentile);
        metrics_by_name["cb_proportion"].push_back(cent.cb_proportion);
        metrics_by_name["mean_transition"].push_back(cent.mean_transition);
        metrics_by_name["min_transition"].push_back(cent.min_transition);
      }
    }
    CsvWriter w;
    w.row("metric", "n", "pearson_r", "p", "source");
    for (const auto& [name, values] : metrics_by_name) {
      try {
        const auto corr = stats::pearson(values, salience);
        w.row(name, corr.n, corr.r, stats::format_pvalue(corr.p),
              "stats.pearson");
      } catch (const DataError&) {
        w.row(name, values.size(), "", "constant", "stats.pearson");
      }
    }
    // Per-sentence traces alongside the correlations.
    std::string trace_body;
    for (const auto& doc : docs) {
      const auto states = centering::analyze_document(doc);
      trace_body += centering::centering_trace_csv(doc, states);
    }
    return {
        write_artifact(cfg, "describe", "describe_centering.csv", "",
                       w.str()),
        write_artifact(cfg, "describe", "centering_trace.csv",
                       "centering.analyze_document", trace_body),
    };
  }

  throw UsageError("unknown analysis \"" + analysis +
                   "\" (expected deprel|etype|relations|dm|centering)");
}

std::vector<std::string> run_fit_bb(const PipelineConfig& cfg,
                                    const std::vector<std::string>& terms,
                                    const std::string& level) {
  if (terms.empty()) throw UsageError("fit-bb needs at least one term");
  const auto table = load_feature_table(cfg, level);
  const auto fit_rows = table.rows_in_partition(cfg.fit_partition);
  if (fit_rows.empty())
    throw DataError("no rows in fit partition \"" + cfg.fit_partition + "\"");
  const auto fit_table = table.subset(fit_rows);
  const auto model =
      regression::fit(fit_table, terms, cfg.n_summaries, fit_config(cfg));
  return {write_artifact(cfg, "fit-bb", "bb_model_" + level + ".json",
                         "regression.fit", regression::model_to_json(model))};
}

std::vector<std::string> run_anova(const PipelineConfig& cfg,
                                   const std::string& level) {
  const auto model_json = read_artifact(cfg, "bb_model_" + level + ".json",
                                        "fit-bb --level " + level);
  const auto model = regression::model_from_json(model_json);
  const auto table = load_feature_table(cfg, level);
  const auto fit_table = table.subset(table.rows_in_partition(cfg.fit_partition));
  const auto anova = regression::anova_single_term_deletions(
      model, fit_table, fit_config(cfg), cfg.threads);
  return {write_artifact(cfg, "anova", "anova_" + level + ".csv",
                         "regression.anova_single_term_deletions",
                         regression::anova_csv(anova))};
}

std::vector<std::string> run_fit_forest(const PipelineConfig& cfg) {
  const auto table = load_feature_table(cfg, "mention");
  const auto fit_table = table.subset(table.rows_in_partition(cfg.fit_partition));
  if (fit_table.rows() == 0)
    throw DataError("no rows in fit partition \"" + cfg.fit_partition + "\"");
  forest::ForestParams params;
  params.trees = cfg.trees;
  params.min_leaf = cfg.min_leaf;
  params.k_features = cfg.k_features;
  params.seed = cfg.seed;
  params.threads = cfg.threads;
  const auto model = forest::fit_forest(fit_table, params);
  return {write_artifact(cfg, "fit-forest", "forest_model.json",
                         "forest.fit_forest", forest::model_to_json(model))};
}

namespace {

forest::ExtraTreesModel load_forest(const PipelineConfig& cfg) {
  return forest::model_from_json(
      read_artifact(cfg, "forest_model.json", "fit-forest"));
}

features::FeatureTable split_table(const PipelineConfig& cfg,
                                   const features::FeatureTable& table,
                                   const std::string& split) {
  const auto rows = table.rows_in_partition(split == "all" ? "" : split);
  if (rows.empty())
    throw DataError("no rows in partition \"" + split + "\"");
  return table.subset(rows);
}

}  // namespace

std::vector<std::string> run_importance(const PipelineConfig& cfg,
                                        const std::string& method,
                                        const std::string& split) {
  if (method != "gini" && method != "mda" && method != "both")
    throw UsageError("--method must be gini, mda or both");
  const auto model = load_forest(cfg);
  const auto table =
      split_table(cfg, load_feature_table(cfg, "mention"), split);
  std::string body;
  if (method == "gini") {
    const auto gini = forest::gini_importance(model);
    CsvWriter w;
    w.row("feature", "gini", "source");
    for (const auto& [name, value] : gini) {
      w.row(name, value, "forest.gini_importance");
    }
    body = w.str();
  } else if (method == "mda") {
    const auto mda =
        forest::permutation_mda(model, table, cfg.mda_repeats, cfg.seed);
    CsvWriter w;
    w.row("feature", "mda", "source");
    for (const auto& [name, value] : mda) {
      w.row(name, value, "forest.permutation_mda");
    }
    body = w.str();
  } else {
    const auto rows =
        forest::importance_report(model, table, cfg.mda_repeats, cfg.seed);
    body = forest::importance_csv(rows);
  }
  return {write_artifact(cfg, "importance", "importance_" + method + ".csv",
                         "forest.gini_importance+forest.permutation_mda",
                         body)};
}

std::vector<std::string> run_shuffle_genre(const PipelineConfig& cfg,
                                           const std::string& split) {
  const auto model = load_forest(cfg);
  const auto table =
      split_table(cfg, load_feature_table(cfg, "mention"), split);
  const auto records = forest::genre_shuffle_analysis(model, table, cfg.seed);
  return {write_artifact(cfg, "shuffle-genre", "genre_shuffle.csv",
                         "forest.genre_shuffle_analysis",
                         forest::shuffle_csv(records, cfg.shuffle_top_k))};
}

std::vector<std::string> run_eval(const PipelineConfig& cfg,
                                  const std::string& split) {
  const auto table = load_feature_table(cfg, "mention");
  const auto eval_table = split_table(cfg, table, split);

  CsvWriter w;
  w.row("model", "split", "metric", "value", "source");
  bool any = false;
  const fs::path bb_path = fs::path(cfg.out_dir) / "bb_model_mention.json";
  if (fs::exists(bb_path)) {
    const auto model = regression::model_from_json(
        read_artifact(cfg, "bb_model_mention.json", "fit-bb"));
    const auto rep = regression::evaluate(model, eval_table);
    w.row("beta_binomial", split, "rmse", rep.rmse, "regression.evaluate");
    w.row("beta_binomial", split, "rmse_mean_baseline", rep.rmse_mean_baseline,
          "regression.evaluate");
    w.row("beta_binomial", split, "binary_accuracy", rep.accuracy,
          "regression.evaluate");
    w.row("beta_binomial", split, "binary_accuracy_mu_rule",
          rep.accuracy_mu_rule, "regression.evaluate");
    w.row("beta_binomial", split, "majority_baseline", rep.majority_baseline,
          "regression.evaluate");
    any = true;
  }
  const fs::path forest_path = fs::path(cfg.out_dir) / "forest_model.json";
  if (fs::exists(forest_path)) {
    const auto model = load_forest(cfg);
    const auto data = forest::dataset_for_prediction(eval_table, model.schema);
    const double acc = forest::accuracy(model, data);
    std::size_t salient = 0;
    for (int label : data.labels) salient += label;
    const double n = static_cast<double>(data.labels.size());
    const double majority = std::max(salient / n, 1.0 - salient / n);
    w.row("extra_trees", split, "binary_accuracy", acc, "forest.accuracy");
    w.row("extra_trees", split, "majority_baseline", majority,
          "forest.accuracy");
    any = true;
  }
  if (!any) {
    throw DataError("no model artifact found; run `fit-bb` or `fit-forest` "
                    "first");
  }
  return {write_artifact(cfg, "eval", "eval_" + split + ".csv", "", w.str())};
}

std::vector<std::string> run_tsne(const PipelineConfig& cfg,
                                  const std::string& split) {
  const auto table =
      split_table(cfg, load_feature_table(cfg, "mention"), split);
  // The profile plot covers the five most common entity types.
  const std::set<std::string> keep = {"person", "abstract", "organization",
                                      "object", "place"};
  const auto& etype = table.column("entity_type");
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (keep.count(etype.level_of(i))) rows.push_back(i);
  }
  if (rows.size() < 10)
    throw DataError("tsne needs at least 10 rows after the entity-type "
                    "restriction");
  const auto sub = table.subset(rows);

  // One-hot categoricals and booleans next to the (already scaled)
  // numeric columns.
  std::vector<std::vector<double>> cols;
  for (const auto& c : sub.features) {
    switch (c.kind) {
      case features::ColumnKind::Numeric:
        cols.emplace_back(c.num.begin(), c.num.end());
        break;
      case features::ColumnKind::Boolean: {
        std::vector<double> col(sub.rows());
        for (std::size_t i = 0; i < sub.rows(); ++i) col[i] = c.flag[i];
        cols.push_back(std::move(col));
        break;
      }
      case features::ColumnKind::Categorical: {
        for (std::size_t l = 0; l < c.levels.size(); ++l) {
          std::vector<double> col(sub.rows(), 0.0);
          for (std::size_t i = 0; i < sub.rows(); ++i) {
            if (c.cat[i] == static_cast<int>(l)) col[i] = 1.0;
          }
          cols.push_back(std::move(col));
        }
        break;
      }
    }
  }
  Eigen::MatrixXd X(sub.rows(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < sub.rows(); ++i) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          cols[j][i];
    }
  }

  embed::EmbedConfig ecfg;
  ecfg.perplexity = cfg.perplexity;
  ecfg.iterations = cfg.tsne_iterations;
  ecfg.learning_rate = cfg.learning_rate;
  ecfg.seed = cfg.seed;
  const auto result = embed::tsne(X, ecfg);

  const auto& sub_etype = sub.column("entity_type");
  const auto& sub_genre = sub.column("genre");
  const auto& sub_csp = sub.column("cluster_size_percentile");
  CsvWriter w;
  w.row("x", "y", "entity_type", "salient", "cluster_size_percentile",
        "modality");
  for (std::size_t i = 0; i < sub.rows(); ++i) {
    w.row(result.y(static_cast<Eigen::Index>(i), 0),
          result.y(static_cast<Eigen::Index>(i), 1), sub_etype.level_of(i),
          sub.target[i] > 0 ? "1" : "0", sub_csp.num[i],
          modality_of(cfg, sub_genre.level_of(i)));
  }
  CsvWriter trace;
  trace.row("iteration", "kl");
  for (std::size_t i = 0; i < result.kl_trace.size(); ++i) {
    trace.row(i, result.kl_trace[i]);
  }
  return {
      write_artifact(cfg, "tsne", "tsne.csv", "embed.tsne", w.str()),
      write_artifact(cfg, "tsne", "tsne_kl_trace.csv", "embed.tsne",
                     trace.str()),
  };
}

}  // namespace salience::pipeline
