#include "salience/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "json.hpp"
#include "salience/csv.hpp"
#include "salience/errors.hpp"
#include "salience/random.hpp"
#include "salience/stats.hpp"

namespace salience::forest {

using features::Column;
using features::ColumnKind;
using features::FeatureTable;
using nlohmann::json;

Dataset dataset_from_table(const FeatureTable& table) {
  Dataset data;
  for (const auto& c : table.features) {
    FeatureDesc desc;
    desc.name = c.name;
    desc.categorical = c.kind == ColumnKind::Categorical;
    if (desc.categorical) desc.levels = c.levels;
    data.features.push_back(std::move(desc));
    std::vector<double> col(table.rows());
    for (std::size_t i = 0; i < table.rows(); ++i) {
      switch (c.kind) {
        case ColumnKind::Numeric: col[i] = c.num[i]; break;
        case ColumnKind::Categorical: col[i] = c.cat[i]; break;
        case ColumnKind::Boolean: col[i] = c.flag[i]; break;
      }
    }
    data.columns.push_back(std::move(col));
  }
  data.labels.resize(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    data.labels[i] = table.target[i] > 0 ? 1 : 0;
  }
  return data;
}

Dataset dataset_for_prediction(const FeatureTable& table,
                               const std::vector<FeatureDesc>& schema) {
  Dataset data;
  data.features = schema;
  for (const auto& desc : schema) {
    const Column& c = table.column(desc.name);
    if (desc.categorical != (c.kind == ColumnKind::Categorical))
      throw DataError("schema mismatch: column \"" + desc.name +
                      "\" changed kind");
    std::vector<double> col(table.rows());
    if (desc.categorical) {
      // Map by level name; unseen levels get -1 and fail every set test.
      std::map<std::string, int> to_fit;
      for (std::size_t l = 0; l < desc.levels.size(); ++l)
        to_fit[desc.levels[l]] = static_cast<int>(l);
      for (std::size_t i = 0; i < table.rows(); ++i) {
        auto it = to_fit.find(c.level_of(i));
        col[i] = it == to_fit.end() ? -1.0 : it->second;
      }
    } else {
      for (std::size_t i = 0; i < table.rows(); ++i) {
        col[i] = c.kind == ColumnKind::Numeric ? c.num[i]
                                               : static_cast<double>(c.flag[i]);
      }
    }
    data.columns.push_back(std::move(col));
  }
  data.labels.resize(table.rows());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    data.labels[i] = table.target[i] > 0 ? 1 : 0;
  }
  return data;
}

namespace {

struct SplitCandidate {
  bool valid = false;
  int feature = -1;
  double threshold = 0;
  std::vector<std::uint8_t> in_set;
  double decrease = 0;
  std::size_t n_left = 0;
};

inline double gini(double c0, double c1) {
  const double n = c0 + c1;
  if (n <= 0) return 0;
  const double p0 = c0 / n, p1 = c1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

inline bool goes_left(const TreeNode& node, double value) {
  if (node.in_set.empty()) return value < node.threshold;
  const int level = static_cast<int>(value);
  return level >= 0 && level < static_cast<int>(node.in_set.size()) &&
         node.in_set[level] != 0;
}

// One uniform random test for a candidate feature at a node (the
// Extra-Trees rule); invalid when the feature is constant there.
SplitCandidate draw_candidate(const Dataset& data, int feature,
                              const std::vector<std::size_t>& rows,
                              std::size_t begin, std::size_t end,
                              int min_leaf, RandomStream& rng) {
  SplitCandidate cand;
  cand.feature = feature;
  const auto& col = data.columns[feature];
  const FeatureDesc& desc = data.features[feature];

  TreeNode test;
  test.feature = feature;
  if (desc.categorical) {
    std::vector<std::uint8_t> present(desc.levels.size(), 0);
    int distinct = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const int level = static_cast<int>(col[rows[i]]);
      if (level >= 0 && !present[level]) {
        present[level] = 1;
        ++distinct;
      }
    }
    if (distinct < 2) return cand;
    // Random non-empty proper subset of the levels present at the node.
    std::vector<std::uint8_t> in_set(desc.levels.size(), 0);
    for (int attempt = 0; attempt < 16; ++attempt) {
      int picked = 0;
      for (std::size_t l = 0; l < present.size(); ++l) {
        in_set[l] = present[l] && rng.coin() ? 1 : 0;
        picked += in_set[l];
      }
      if (picked > 0 && picked < distinct) break;
      if (attempt == 15) return cand;
    }
    test.in_set = in_set;
    cand.in_set = std::move(in_set);
  } else {
    double lo = col[rows[begin]], hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      lo = std::min(lo, col[rows[i]]);
      hi = std::max(hi, col[rows[i]]);
    }
    if (!(hi > lo)) return cand;
    test.threshold = rng.uniform(lo, hi);
    cand.threshold = test.threshold;
  }

  double l0 = 0, l1 = 0, r0 = 0, r1 = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const std::size_t row = rows[i];
    const bool left = goes_left(test, col[row]);
    if (data.labels[row]) {
      left ? ++l1 : ++r1;
    } else {
      left ? ++l0 : ++r0;
    }
  }
  const double nl = l0 + l1, nr = r0 + r1, n = nl + nr;
  if (nl < min_leaf || nr < min_leaf) return cand;
  cand.decrease =
      gini(l0 + r0, l1 + r1) - (nl / n) * gini(l0, l1) - (nr / n) * gini(r0, r1);
  cand.n_left = static_cast<std::size_t>(nl);
  cand.valid = true;
  return cand;
}

Tree grow_tree(const Dataset& data, const ForestParams& params,
               RandomStream rng) {
  Tree tree;
  const std::size_t n = data.rows();
  std::vector<std::size_t> rows;
  rows.reserve(n);
  if (params.bootstrap) {
    for (std::size_t i = 0; i < n; ++i)
      rows.push_back(rng.below(n));
  } else {
    for (std::size_t i = 0; i < n; ++i) rows.push_back(i);
  }

  const int p = static_cast<int>(data.n_features());
  const int k = params.k_features > 0
                    ? std::min(params.k_features, p)
                    : std::max(1, static_cast<int>(std::sqrt(
                                      static_cast<double>(p))));

  struct Work {
    int node;
    std::size_t begin, end;
  };
  std::vector<Work> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, 0, rows.size()});
  std::vector<int> feature_order(p);

  while (!stack.empty()) {
    const Work work = stack.back();
    stack.pop_back();
    TreeNode& node_ref = tree.nodes[work.node];
    double c0 = 0, c1 = 0;
    for (std::size_t i = work.begin; i < work.end; ++i) {
      data.labels[rows[i]] ? ++c1 : ++c0;
    }
    node_ref.count0 = c0;
    node_ref.count1 = c1;
    node_ref.prob = (c0 + c1) > 0 ? c1 / (c0 + c1) : 0.0;

    const std::size_t size = work.end - work.begin;
    const bool pure = c0 == 0 || c1 == 0;
    if (pure || size < 2 * static_cast<std::size_t>(params.min_leaf) ||
        size < 2) {
      continue;
    }

    // Scan features in shuffled order; the first k valid candidates
    // compete, and when all k draws fail the scan keeps going so nodes
    // split whenever any feature still varies.
    std::iota(feature_order.begin(), feature_order.end(), 0);
    rng.shuffle(feature_order);
    SplitCandidate best;
    int valid_seen = 0;
    for (int f : feature_order) {
      SplitCandidate cand = draw_candidate(data, f, rows, work.begin,
                                           work.end, params.min_leaf, rng);
      if (!cand.valid) continue;
      ++valid_seen;
      if (!best.valid || cand.decrease > best.decrease) best = std::move(cand);
      if (valid_seen >= k) break;
    }
    if (!best.valid) continue;

    TreeNode split_node;
    split_node.leaf = false;
    split_node.feature = best.feature;
    split_node.threshold = best.threshold;
    split_node.in_set = best.in_set;
    split_node.count0 = c0;
    split_node.count1 = c1;
    split_node.prob = tree.nodes[work.node].prob;

    const auto& col = data.columns[best.feature];
    auto mid = std::stable_partition(
        rows.begin() + work.begin, rows.begin() + work.end,
        [&](std::size_t row) { return goes_left(split_node, col[row]); });
    const std::size_t split_at =
        static_cast<std::size_t>(mid - rows.begin());

    split_node.left = static_cast<int>(tree.nodes.size());
    split_node.right = split_node.left + 1;
    tree.nodes[work.node] = std::move(split_node);
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    // Right first so the left child is processed next (deterministic
    // depth-first, left-to-right RNG consumption).
    stack.push_back({tree.nodes[work.node].right, split_at, work.end});
    stack.push_back({tree.nodes[work.node].left, work.begin, split_at});
  }
  return tree;
}

double tree_predict(const Tree& tree, const Dataset& data, std::size_t row) {
  int node = 0;
  while (!tree.nodes[node].leaf) {
    const TreeNode& nd = tree.nodes[node];
    node = goes_left(nd, data.columns[nd.feature][row]) ? nd.left : nd.right;
  }
  return tree.nodes[node].prob;
}

}  // namespace

ExtraTreesModel fit_forest(const FeatureTable& table,
                           const ForestParams& params) {
  return fit_forest(dataset_from_table(table), params);
}

ExtraTreesModel fit_forest(const Dataset& data, const ForestParams& params) {
  if (data.rows() == 0) throw DataError("empty table");
  if (params.trees < 1) throw UsageError("trees must be >= 1");
  if (params.min_leaf < 1) throw UsageError("min_leaf must be >= 1");

  ExtraTreesModel model;
  model.schema = data.features;
  model.params = params;
  const bool any0 = std::any_of(data.labels.begin(), data.labels.end(),
                                [](int v) { return v == 0; });
  const bool any1 = std::any_of(data.labels.begin(), data.labels.end(),
                                [](int v) { return v == 1; });
  if (!any0 || !any1) {
    model.degenerate = true;
    model.warning = "single-class target; returning a degenerate model";
  }

  model.trees.resize(params.trees);
  const int threads = std::max(1, params.threads);
  // Per-tree derived streams make results independent of the schedule.
  auto train_range = [&](int first, int last) {
    for (int t = first; t < last; ++t) {
      model.trees[t] =
          grow_tree(data, params, RandomStream::derive(params.seed, t));
    }
  };
  if (threads == 1) {
    train_range(0, params.trees);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (params.trees + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const int first = w * chunk;
      const int last = std::min(params.trees, first + chunk);
      if (first >= last) break;
      pool.emplace_back(train_range, first, last);
    }
    for (auto& th : pool) th.join();
  }
  return model;
}

std::vector<double> predict_proba(const ExtraTreesModel& model,
                                  const Dataset& data) {
  std::vector<double> out(data.rows(), 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    double sum = 0;
    for (const auto& tree : model.trees) {
      sum += tree_predict(tree, data, i);
    }
    out[i] = sum / static_cast<double>(model.trees.size());
  }
  return out;
}

std::vector<double> predict_proba(const ExtraTreesModel& model,
                                  const FeatureTable& table) {
  return predict_proba(model, dataset_for_prediction(table, model.schema));
}

std::vector<int> predict(const ExtraTreesModel& model, const Dataset& data) {
  const auto probs = predict_proba(model, data);
  std::vector<int> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] > 0.5;
  return out;
}

double accuracy(const ExtraTreesModel& model, const Dataset& data) {
  const auto preds = predict(model, data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

std::map<std::string, double> gini_importance(const ExtraTreesModel& model) {
  std::map<std::string, double> acc;
  for (const auto& desc : model.schema) acc[desc.name] = 0.0;
  for (const auto& tree : model.trees) {
    const double total = tree.nodes[0].count0 + tree.nodes[0].count1;
    if (total <= 0) continue;
    for (const auto& node : tree.nodes) {
      if (node.leaf) continue;
      const auto& l = tree.nodes[node.left];
      const auto& r = tree.nodes[node.right];
      const double n = node.count0 + node.count1;
      const double nl = l.count0 + l.count1;
      const double nr = r.count0 + r.count1;
      const double decrease = gini(node.count0, node.count1) -
                              (nl / n) * gini(l.count0, l.count1) -
                              (nr / n) * gini(r.count0, r.count1);
      acc[model.schema[node.feature].name] += (n / total) * decrease;
    }
  }
  double sum = 0;
  for (auto& [name, v] : acc) {
    v /= static_cast<double>(model.trees.size());
    sum += v;
  }
  if (sum > 0) {
    for (auto& [name, v] : acc) v /= sum;
  }
  return acc;
}

std::map<std::string, double> permutation_mda(const ExtraTreesModel& model,
                                              const FeatureTable& table,
                                              int repeats,
                                              std::uint64_t seed) {
  if (repeats < 1) throw UsageError("permutation repeats must be >= 1");
  Dataset data = dataset_for_prediction(table, model.schema);
  const double baseline = accuracy(model, data);
  std::map<std::string, double> out;
  for (std::size_t f = 0; f < data.n_features(); ++f) {
    const std::vector<double> original = data.columns[f];
    double mean_shuffled = 0;
    for (int r = 0; r < repeats; ++r) {
      auto rng = RandomStream::derive(seed, f, r);
      const auto perm = rng.permutation(data.rows());
      for (std::size_t i = 0; i < data.rows(); ++i) {
        data.columns[f][i] = original[perm[i]];
      }
      mean_shuffled += accuracy(model, data);
    }
    data.columns[f] = original;
    out[model.schema[f].name] = baseline - mean_shuffled / repeats;
  }
  return out;
}

std::vector<ImportanceRow> importance_report(const ExtraTreesModel& model,
                                             const FeatureTable& table,
                                             int repeats, std::uint64_t seed) {
  const auto gini_map = gini_importance(model);
  const auto mda_map = permutation_mda(model, table, repeats, seed);
  std::vector<ImportanceRow> rows;
  for (const auto& desc : model.schema) {
    ImportanceRow row;
    row.feature = desc.name;
    row.gini = gini_map.at(desc.name);
    row.mda = mda_map.at(desc.name);
    rows.push_back(row);
  }
  auto zscores = [&](auto getter, auto setter) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(getter(r));
    const double m = stats::mean(v);
    const double sd = v.size() > 1 ? stats::sample_sd(v) : 1.0;
    for (auto& r : rows) setter(r, sd > 0 ? (getter(r) - m) / sd : 0.0);
  };
  zscores([](const ImportanceRow& r) { return r.gini; },
          [](ImportanceRow& r, double z) { r.gini_z = z; });
  zscores([](const ImportanceRow& r) { return r.mda; },
          [](ImportanceRow& r, double z) { r.mda_z = z; });
  for (auto& r : rows) r.mean_z = (r.gini_z + r.mda_z) / 2.0;
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ImportanceRow& a, const ImportanceRow& b) {
                     return a.mean_z > b.mean_z;
                   });
  return rows;
}

std::string importance_csv(const std::vector<ImportanceRow>& rows) {
  CsvWriter w;
  w.row("feature", "gini", "mda", "gini_z", "mda_z", "mean_z");
  for (const auto& r : rows) {
    w.row(r.feature, r.gini, r.mda, r.gini_z, r.mda_z, r.mean_z);
  }
  return w.str();
}

std::vector<ShuffleRecord> shuffle_analysis_with_permutation(
    const ExtraTreesModel& model, const FeatureTable& table,
    const std::vector<std::size_t>& permutation, const std::string& column) {
  Dataset data = dataset_for_prediction(table, model.schema);
  std::size_t col_idx = data.n_features();
  for (std::size_t f = 0; f < data.n_features(); ++f) {
    if (model.schema[f].name == column) col_idx = f;
  }
  if (col_idx == data.n_features())
    throw DataError("no column named \"" + column + "\"");
  if (permutation.size() != data.rows())
    throw DataError("permutation length mismatch");

  const auto p_orig = predict_proba(model, data);
  const std::vector<double> original = data.columns[col_idx];
  for (std::size_t i = 0; i < data.rows(); ++i) {
    data.columns[col_idx][i] = original[permutation[i]];
  }
  const auto p_shuf = predict_proba(model, data);

  std::vector<ShuffleRecord> out;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const bool label = data.labels[i] == 1;
    const bool orig_ok = (p_orig[i] > 0.5) == label;
    const bool shuf_ok = (p_shuf[i] > 0.5) == label;
    if (orig_ok && !shuf_ok) {
      out.push_back({i, label, p_orig[i], p_shuf[i],
                     std::abs(p_orig[i] - p_shuf[i])});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ShuffleRecord& a, const ShuffleRecord& b) {
                     return a.delta > b.delta;
                   });
  return out;
}

std::vector<ShuffleRecord> genre_shuffle_analysis(
    const ExtraTreesModel& model, const FeatureTable& table,
    std::uint64_t seed, const std::string& column) {
  auto rng = RandomStream::derive(seed, fnv1a(column));
  return shuffle_analysis_with_permutation(
      model, table, rng.permutation(table.rows()), column);
}

std::string shuffle_csv(const std::vector<ShuffleRecord>& records,
                        std::size_t top_k) {
  CsvWriter w;
  w.row("polarity", "row", "label", "p_orig", "p_shuffled", "delta");
  std::size_t pos = 0, neg = 0;
  for (const auto& r : records) {
    if (r.label && pos < top_k) {
      ++pos;
      w.row("positive", r.row, "salient", r.p_orig, r.p_shuffled, r.delta);
    } else if (!r.label && neg < top_k) {
      ++neg;
      w.row("negative", r.row, "non_salient", r.p_orig, r.p_shuffled, r.delta);
    }
  }
  return w.str();
}

std::string model_to_json(const ExtraTreesModel& model) {
  json root;
  root["model"] = "extra_trees";
  root["seed"] = model.params.seed;
  root["trees_param"] = model.params.trees;
  root["min_leaf"] = model.params.min_leaf;
  root["k_features"] = model.params.k_features;
  root["bootstrap"] = model.params.bootstrap;
  root["degenerate"] = model.degenerate;
  root["warning"] = model.warning;
  auto schema = json::array();
  for (const auto& desc : model.schema) {
    schema.push_back({{"name", desc.name},
                      {"categorical", desc.categorical},
                      {"levels", desc.levels}});
  }
  root["schema"] = std::move(schema);
  auto trees = json::array();
  for (const auto& tree : model.trees) {
    auto nodes = json::array();
    for (const auto& nd : tree.nodes) {
      json jn;
      jn["leaf"] = nd.leaf;
      jn["c0"] = nd.count0;
      jn["c1"] = nd.count1;
      jn["prob"] = nd.prob;
      if (!nd.leaf) {
        jn["feature"] = nd.feature;
        jn["left"] = nd.left;
        jn["right"] = nd.right;
        if (nd.in_set.empty()) {
          jn["threshold"] = nd.threshold;
        } else {
          std::vector<int> set;
          for (std::size_t l = 0; l < nd.in_set.size(); ++l) {
            if (nd.in_set[l]) set.push_back(static_cast<int>(l));
          }
          jn["in_set"] = set;
          jn["set_size"] = nd.in_set.size();
        }
      }
      nodes.push_back(std::move(jn));
    }
    trees.push_back(std::move(nodes));
  }
  root["trees"] = std::move(trees);
  return root.dump() + "\n";
}

ExtraTreesModel model_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model json: ") + e.what());
  }
  if (root.value("model", "") != "extra_trees")
    throw DataError("model json: not an extra_trees model");
  ExtraTreesModel model;
  model.params.seed = root.at("seed").get<std::uint64_t>();
  model.params.trees = root.at("trees_param").get<int>();
  model.params.min_leaf = root.at("min_leaf").get<int>();
  model.params.k_features = root.at("k_features").get<int>();
  model.params.bootstrap = root.at("bootstrap").get<bool>();
  model.degenerate = root.at("degenerate").get<bool>();
  model.warning = root.at("warning").get<std::string>();
  for (const auto& jd : root.at("schema")) {
    FeatureDesc desc;
    desc.name = jd.at("name").get<std::string>();
    desc.categorical = jd.at("categorical").get<bool>();
    desc.levels = jd.at("levels").get<std::vector<std::string>>();
    model.schema.push_back(std::move(desc));
  }
  for (const auto& jt : root.at("trees")) {
    Tree tree;
    for (const auto& jn : jt) {
      TreeNode nd;
      nd.leaf = jn.at("leaf").get<bool>();
      nd.count0 = jn.at("c0").get<double>();
      nd.count1 = jn.at("c1").get<double>();
      nd.prob = jn.at("prob").get<double>();
      if (!nd.leaf) {
        nd.feature = jn.at("feature").get<int>();
        nd.left = jn.at("left").get<int>();
        nd.right = jn.at("right").get<int>();
        if (jn.contains("in_set")) {
          nd.in_set.assign(jn.at("set_size").get<std::size_t>(), 0);
          for (int l : jn.at("in_set").get<std::vector<int>>()) {
            nd.in_set[l] = 1;
          }
        } else {
          nd.threshold = jn.at("threshold").get<double>();
        }
      }
      tree.nodes.push_back(std::move(nd));
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

std::uint64_t model_hash(const ExtraTreesModel& model) {
  return fnv1a(model_to_json(model));
}

}  // namespace salience::forest
