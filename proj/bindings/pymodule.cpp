#include <pybind11/pybind11.h>
#include <pybind11/eigen.h>
#include <pybind11/stl.h>

#include <memory>

#include "salience/centering.hpp"
#include "salience/corpus.hpp"
#include "salience/discourse.hpp"
#include "salience/embed.hpp"
#include "salience/errors.hpp"
#include "salience/features.hpp"
#include "salience/forest.hpp"
#include "salience/metrics.hpp"
#include "salience/regression.hpp"
#include "salience/stats.hpp"

namespace py = pybind11;
using namespace salience;

namespace {

features::FeatureTable table_from_docs(const std::vector<Document>& docs,
                                       const std::string& level,
                                       int n_summaries) {
  features::BuildOptions opts;
  opts.n_summaries = n_summaries;
  return level == "entity" ? features::build_entity_table(docs, opts)
                           : features::build_mention_table(docs, opts);
}

py::dict table_columns(const features::FeatureTable& t) {
  py::dict out;
  out["doc_id"] = t.doc_ids;
  out["partition"] = t.partitions;
  out["salience"] = t.target;
  for (const auto& c : t.features) {
    switch (c.kind) {
      case features::ColumnKind::Numeric: out[c.name.c_str()] = c.num; break;
      case features::ColumnKind::Boolean: {
        std::vector<bool> v(c.flag.begin(), c.flag.end());
        out[c.name.c_str()] = v;
        break;
      }
      case features::ColumnKind::Categorical: {
        std::vector<std::string> v;
        v.reserve(c.cat.size());
        for (std::size_t i = 0; i < c.cat.size(); ++i)
          v.push_back(c.level_of(i));
        out[c.name.c_str()] = v;
        break;
      }
    }
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Graded entity salience analytics over multilayer-annotated "
            "documents";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_RuntimeError);

  py::class_<Document>(m, "Document")
      .def_readonly("doc_id", &Document::doc_id)
      .def_readonly("genre", &Document::genre)
      .def_readonly("partition", &Document::partition)
      .def_property_readonly("n_tokens", &Document::token_count)
      .def_property_readonly("n_sentences",
                             [](const Document& d) {
                               return d.sentences.size();
                             })
      .def_property_readonly("n_mentions",
                             [](const Document& d) {
                               return d.mentions.size();
                             })
      .def("salience",
           [](const Document& d) {
             py::dict out;
             for (const auto& c : d.clusters) {
               out[c.entity_id.c_str()] = c.salience;
             }
             return out;
           })
      .def("to_json", [](const Document& d) {
        return corpus::serialize_document(d);
      });

  m.def("parse_document",
        [](const std::string& text) { return corpus::parse_document(text); },
        py::arg("json_text"));
  m.def("parse_document_file",
        [](const std::string& path) {
          return corpus::parse_document_file(path);
        },
        py::arg("path"));
  m.def("validate_document", [](const Document& d) {
    py::list out;
    for (const auto& v : corpus::validate_document(d)) {
      out.append(py::make_tuple(v.rule, v.subject, v.detail));
    }
    return out;
  });
  m.def("assign_salience",
        [](const Document& d) { return corpus::assign_salience(d); });

  m.def("centering_states", [](const Document& d) {
    py::list out;
    for (const auto& s : centering::analyze_document(d)) {
      py::dict state;
      state["sentence"] = s.sentence_index;
      state["cb"] = s.cb ? py::cast(*s.cb) : py::none();
      state["transition"] = centering::transition_name(s.transition);
      py::list cf;
      for (const auto& e : s.cf_list) {
        cf.append(py::make_tuple(e.entity_id, e.rank, e.rank_percentile));
      }
      state["cf"] = cf;
      out.append(state);
    }
    return out;
  });

  m.def("edu_depths", [](const Document& d) {
    const auto table = discourse::compute_depths(d.edus);
    py::dict out;
    for (const auto& [id, depth] : table.depth) {
      out[py::int_(id)] =
          py::make_tuple(depth, table.percentile.at(id));
    }
    return out;
  });

  m.def(
      "kl_dispersion",
      [](const std::vector<int>& positions, int doc_length, int parts,
         const std::string& normalization) {
        metrics::DispersionConfig cfg;
        cfg.parts = parts;
        cfg.normalization = normalization == "max"
                                ? metrics::DispersionNormalization::Max
                                : metrics::DispersionNormalization::Exp;
        return metrics::kl_dispersion(positions, doc_length, cfg);
      },
      py::arg("positions"), py::arg("doc_length"), py::arg("parts") = 10,
      py::arg("normalization") = "exp");
  m.def("cohen_kappa", [](const std::vector<bool>& a,
                          const std::vector<bool>& b) {
    // std::vector<bool> is packed; span<const bool> needs real bools.
    std::unique_ptr<bool[]> pa(new bool[a.size()]);
    std::unique_ptr<bool[]> pb(new bool[b.size()]);
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) pb[i] = b[i];
    return metrics::cohen_kappa({pa.get(), a.size()}, {pb.get(), b.size()});
  });

  m.def("pearson", [](const std::vector<double>& x,
                      const std::vector<double>& y) {
    const auto c = stats::pearson(x, y);
    return py::make_tuple(c.r, c.p);
  });
  m.def("spearman", [](const std::vector<double>& x,
                       const std::vector<double>& y) {
    const auto c = stats::spearman(x, y);
    return py::make_tuple(c.r, c.p);
  });
  m.def("welch_t_hedges", [](const std::vector<double>& x0,
                             const std::vector<double>& x1) {
    const auto r = stats::welch_t_hedges(x0, x1);
    return py::make_tuple(r.t, r.p, r.g);
  });

  py::class_<features::FeatureTable>(m, "FeatureTable")
      .def_property_readonly("n_rows", &features::FeatureTable::rows)
      .def_property_readonly("level",
                             [](const features::FeatureTable& t) {
                               return t.level == features::TableLevel::Mention
                                          ? "mention"
                                          : "entity";
                             })
      .def("columns", &table_columns)
      .def("to_csv", &features::table_to_csv)
      .def("schema_json", &features::schema_to_json);

  m.def("build_feature_table", &table_from_docs, py::arg("documents"),
        py::arg("level") = "mention", py::arg("n_summaries") = 5);
  m.def(
      "encode_table",
      [](const features::FeatureTable& t, int collapse_threshold, bool zscale,
         const std::string& fit_partition) {
        features::EncoderOptions opts;
        opts.collapse_threshold = collapse_threshold;
        opts.zscale = zscale;
        opts.fit_partition = fit_partition;
        return features::apply_encoder(t, features::fit_encoder(t, opts));
      },
      py::arg("table"), py::arg("collapse_threshold") = 300,
      py::arg("zscale") = true, py::arg("fit_partition") = "train");

  py::class_<regression::BetaBinomialModel>(m, "BetaBinomialModel")
      .def_readonly("phi", &regression::BetaBinomialModel::phi)
      .def_readonly("trials", &regression::BetaBinomialModel::trials)
      .def_readonly("loglik", &regression::BetaBinomialModel::loglik)
      .def_readonly("aic", &regression::BetaBinomialModel::aic)
      .def_readonly("iterations", &regression::BetaBinomialModel::iterations)
      .def_property_readonly("coefficients",
                             [](const regression::BetaBinomialModel& mdl) {
                               py::dict out;
                               for (std::size_t i = 0;
                                    i < mdl.design.col_names.size(); ++i) {
                                 out[mdl.design.col_names[i].c_str()] =
                                     mdl.coef[static_cast<Eigen::Index>(i)];
                               }
                               return out;
                             })
      .def("to_json", &regression::model_to_json);

  m.def("fit_beta_binomial", &regression::fit, py::arg("table"),
        py::arg("terms"), py::arg("trials") = 5,
        py::arg("config") = regression::FitConfig{});
  py::class_<regression::FitConfig>(m, "FitConfig")
      .def(py::init<>())
      .def_readwrite("grad_tol", &regression::FitConfig::grad_tol)
      .def_readwrite("max_iter", &regression::FitConfig::max_iter);
  m.def("anova_single_term_deletions",
        [](const regression::BetaBinomialModel& model,
           const features::FeatureTable& table) {
          py::list out;
          for (const auto& row :
               regression::anova_single_term_deletions(model, table).rows) {
            py::dict r;
            r["term"] = row.term;
            r["df"] = row.df;
            r["aic"] = row.aic;
            r["lrt"] = row.lrt;
            r["p"] = row.p;
            out.append(r);
          }
          return out;
        });
  m.def("evaluate_beta_binomial",
        [](const regression::BetaBinomialModel& model,
           const features::FeatureTable& table) {
          const auto rep = regression::evaluate(model, table);
          py::dict out;
          out["n"] = rep.n;
          out["rmse"] = rep.rmse;
          out["rmse_mean_baseline"] = rep.rmse_mean_baseline;
          out["binary_accuracy"] = rep.accuracy;
          out["binary_accuracy_mu_rule"] = rep.accuracy_mu_rule;
          out["majority_baseline"] = rep.majority_baseline;
          return out;
        });

  py::class_<forest::ExtraTreesModel>(m, "ExtraTreesModel")
      .def_property_readonly("n_trees",
                             [](const forest::ExtraTreesModel& mdl) {
                               return mdl.trees.size();
                             })
      .def_readonly("degenerate", &forest::ExtraTreesModel::degenerate)
      .def("hash", &forest::model_hash)
      .def("to_json", &forest::model_to_json);
  m.def(
      "fit_forest",
      [](const features::FeatureTable& table, int trees, int min_leaf,
         int k_features, std::uint64_t seed, int threads) {
        forest::ForestParams params;
        params.trees = trees;
        params.min_leaf = min_leaf;
        params.k_features = k_features;
        params.seed = seed;
        params.threads = threads;
        return forest::fit_forest(table, params);
      },
      py::arg("table"), py::arg("trees") = 100, py::arg("min_leaf") = 1,
      py::arg("k_features") = 0, py::arg("seed") = 0, py::arg("threads") = 1);
  m.def("predict_proba",
        [](const forest::ExtraTreesModel& model,
           const features::FeatureTable& table) {
          return forest::predict_proba(model, table);
        });
  m.def("gini_importance", &forest::gini_importance);
  m.def("permutation_mda", &forest::permutation_mda, py::arg("model"),
        py::arg("table"), py::arg("repeats") = 5, py::arg("seed") = 0);

  m.def(
      "tsne",
      [](const Eigen::MatrixXd& X, double perplexity, int iterations,
         double learning_rate, std::uint64_t seed) {
        embed::EmbedConfig cfg;
        cfg.perplexity = perplexity;
        cfg.iterations = iterations;
        cfg.learning_rate = learning_rate;
        cfg.seed = seed;
        const auto result = embed::tsne(X, cfg);
        return py::make_tuple(result.y, result.kl_trace);
      },
      py::arg("X"), py::arg("perplexity") = 30.0,
      py::arg("iterations") = 1000, py::arg("learning_rate") = 200.0,
      py::arg("seed") = 0);

#ifdef SALIENCE_LAB_VERSION
  m.attr("__version__") = SALIENCE_LAB_VERSION;
#else
  m.attr("__version__") = "dev";
#endif
}
