#include "salience/discourse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "salience/csv.hpp"
#include "salience/errors.hpp"
#include "salience/stats.hpp"

namespace salience::discourse {

DepthTable compute_depths(const std::vector<Edu>& edus) {
  std::unordered_map<int, const Edu*> by_id;
  for (const auto& e : edus) by_id.emplace(e.id, &e);

  DepthTable table;
  for (const auto& e : edus) {
    if (table.depth.count(e.id)) continue;
    // Walk up with memoization; a revisit within one walk is a cycle.
    std::vector<int> path;
    std::unordered_set<int> on_path;
    const Edu* cur = &e;
    int base = 0;
    while (true) {
      if (auto it = table.depth.find(cur->id); it != table.depth.end()) {
        base = it->second;
        break;
      }
      if (!on_path.insert(cur->id).second) {
        std::string cycle;
        for (int id : path) cycle += std::to_string(id) + "->";
        cycle += std::to_string(cur->id);
        throw DataError("cycle in edu parent edges: " + cycle);
      }
      path.push_back(cur->id);
      if (!cur->parent) {
        table.depth[cur->id] = 0;
        base = 0;
        path.pop_back();
        break;
      }
      auto it = by_id.find(*cur->parent);
      if (it == by_id.end()) {
        throw DataError("edu " + std::to_string(cur->id) +
                        " references missing parent " +
                        std::to_string(*cur->parent));
      }
      cur = it->second;
    }
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
      table.depth[*it] = ++base;
    }
  }
  for (const auto& [id, d] : table.depth) {
    table.max_depth = std::max(table.max_depth, d);
  }
  for (const auto& [id, d] : table.depth) {
    table.percentile[id] =
        table.max_depth == 0
            ? 0.0
            : static_cast<double>(d) / static_cast<double>(table.max_depth);
  }
  return table;
}

MentionDiscourseFeatures mention_discourse_features(const Mention& m,
                                                    const Document& doc,
                                                    const DepthTable& depths) {
  const Edu* edu = doc.edu_of_token(m.head);
  if (!edu) {
    throw DataError("mention \"" + m.mention_id + "\" head token " +
                    std::to_string(m.head) + " is outside all edus");
  }
  return {edu->relation_coarse, depths.percentile.at(edu->id),
          edu->explicit_dm};
}

EntityDiscourseFeatures entity_discourse_features(const EntityCluster& cluster,
                                                  const Document& doc,
                                                  const DepthTable& depths) {
  if (cluster.mention_ids.empty()) {
    throw DataError("cluster \"" + cluster.entity_id + "\" has no mentions");
  }
  EntityDiscourseFeatures out;
  out.min_depth_percentile = 1.0;
  int explicit_count = 0;
  bool first = true;
  for (const auto& mid : cluster.mention_ids) {
    const auto f =
        mention_discourse_features(doc.mention(mid), doc, depths);
    if (first) {
      out.first_mention_depth_percentile = f.edu_depth_percentile;
      first = false;
    }
    out.min_depth_percentile =
        std::min(out.min_depth_percentile, f.edu_depth_percentile);
    if (f.explicit_dm) ++explicit_count;
  }
  out.explicit_proportion =
      static_cast<double>(explicit_count) /
      static_cast<double>(cluster.mention_ids.size());
  return out;
}

ResidualTable residual_table(const std::vector<std::string>& row_labels,
                             const std::vector<std::string>& col_labels,
                             const std::vector<std::vector<double>>& counts) {
  const std::size_t rows = counts.size();
  if (rows < 2) throw DataError("residual table needs at least 2 rows");
  const std::size_t cols = col_labels.size();

  std::vector<double> row_tot(rows, 0), col_tot(cols, 0);
  double total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (counts[r].size() != cols)
      throw DataError("ragged residual table row " + row_labels[r]);
    for (std::size_t c = 0; c < cols; ++c) {
      if (counts[r][c] < 0) throw DataError("negative count in table");
      row_tot[r] += counts[r][c];
      col_tot[c] += counts[r][c];
      total += counts[r][c];
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_tot[r] == 0)
      throw DataError("zero marginal for row \"" + row_labels[r] + "\"");
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (col_tot[c] == 0)
      throw DataError("zero marginal for column \"" + col_labels[c] + "\"");
  }

  ResidualTable out;
  out.row_labels = row_labels;
  out.col_labels = col_labels;
  out.df = static_cast<int>((rows - 1) * (cols - 1));
  out.cells.assign(rows, std::vector<ResidualCell>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      ResidualCell& cell = out.cells[r][c];
      cell.observed = counts[r][c];
      cell.expected = row_tot[r] * col_tot[c] / total;
      cell.pearson_residual =
          (cell.observed - cell.expected) / std::sqrt(cell.expected);
      const double adj =
          (1.0 - row_tot[r] / total) * (1.0 - col_tot[c] / total);
      cell.std_residual = adj > 0
                              ? (cell.observed - cell.expected) /
                                    std::sqrt(cell.expected * adj)
                              : 0.0;
      cell.p = stats::normal_two_sided_p(cell.std_residual);
      cell.stars = stats::significance_stars(cell.p);
      out.chi2 += cell.pearson_residual * cell.pearson_residual;
    }
  }
  return out;
}

ResidualTable relation_salience_residuals(
    const std::vector<std::pair<std::string, bool>>& relation_and_salient) {
  std::map<std::string, std::array<double, 2>> counts;
  for (const auto& [rel, salient] : relation_and_salient) {
    counts[rel][salient ? 0 : 1] += 1;
  }
  std::vector<std::string> rows;
  std::vector<std::vector<double>> matrix;
  for (const auto& [rel, pair] : counts) {
    rows.push_back(rel);
    matrix.push_back({pair[0], pair[1]});
  }
  return residual_table(rows, {"salient", "non_salient"}, matrix);
}

std::string residual_table_csv(const ResidualTable& table) {
  CsvWriter w;
  w.row("label", "outcome", "observed", "expected", "pearson_residual",
        "std_residual", "p", "signif");
  for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
    for (std::size_t c = 0; c < table.col_labels.size(); ++c) {
      const auto& cell = table.cells[r][c];
      w.row(table.row_labels[r], table.col_labels[c], cell.observed,
            cell.expected, cell.pearson_residual, cell.std_residual,
            stats::format_pvalue(cell.p), cell.stars);
    }
  }
  return w.str();
}

}  // namespace salience::discourse
