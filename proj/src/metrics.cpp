#include "salience/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "salience/errors.hpp"
#include "salience/stats.hpp"

namespace salience::metrics {

namespace {

// Bin index of a 1-based token position.
inline int bin_of(int position, int bin_size) {
  return (position - 1) / bin_size;
}

}  // namespace

double kl_divergence(std::span<const int> mention_positions, int doc_length,
                     const DispersionConfig& cfg) {
  if (doc_length < 1) throw DataError("kl_divergence: empty document");
  if (cfg.parts < 2) throw DataError("kl_divergence: parts must be >= 2");
  if (mention_positions.empty())
    throw DataError("kl_divergence: no mention positions");
  for (int p : mention_positions) {
    if (p < 1 || p > doc_length)
      throw DataError("kl_divergence: position " + std::to_string(p) +
                      " outside [1, " + std::to_string(doc_length) + "]");
  }
  const int bin_size = (doc_length + cfg.parts - 1) / cfg.parts;
  const int bins = (doc_length + bin_size - 1) / bin_size;
  std::vector<double> expected(bins, 0.0), observed(bins, 0.0);
  for (int b = 0; b < bins; ++b) {
    const int first = b * bin_size + 1;
    const int last = std::min(doc_length, (b + 1) * bin_size);
    expected[b] = static_cast<double>(last - first + 1) /
                  static_cast<double>(doc_length);
  }
  const double share = 1.0 / static_cast<double>(mention_positions.size());
  for (int p : mention_positions) observed[bin_of(p, bin_size)] += share;

  double dkl = 0;
  for (int b = 0; b < bins; ++b) {
    if (observed[b] > 0) dkl += observed[b] * std::log(observed[b] / expected[b]);
  }
  return std::max(0.0, dkl);
}

double kl_dispersion(std::span<const int> mention_positions, int doc_length,
                     const DispersionConfig& cfg) {
  const double dkl = kl_divergence(mention_positions, doc_length, cfg);
  switch (cfg.normalization) {
    case DispersionNormalization::Exp:
      return 1.0 - std::exp(-dkl);
    case DispersionNormalization::Max:
      return dkl / std::log(static_cast<double>(cfg.parts));
  }
  return 0;
}

std::map<std::string, double> cluster_size_percentile(const Document& doc) {
  std::vector<double> sizes;
  sizes.reserve(doc.clusters.size());
  for (const auto& c : doc.clusters) {
    sizes.push_back(static_cast<double>(c.size()));
  }
  const auto ranks = stats::fractional_ranks(sizes);
  std::map<std::string, double> out;
  const double n = static_cast<double>(doc.clusters.size());
  for (std::size_t i = 0; i < doc.clusters.size(); ++i) {
    out[doc.clusters[i].entity_id] = ranks[i] / n;
  }
  return out;
}

double cohen_kappa(std::span<const bool> a, std::span<const bool> b) {
  if (a.size() != b.size() || a.empty())
    throw DataError("cohen_kappa: sequences must have equal non-zero length");
  const double n = static_cast<double>(a.size());
  double agree = 0, a_true = 0, b_true = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) ++agree;
    if (a[i]) ++a_true;
    if (b[i]) ++b_true;
  }
  const double po = agree / n;
  const double pa = a_true / n, pb = b_true / n;
  const double pe = pa * pb + (1.0 - pa) * (1.0 - pb);
  if (pe >= 1.0) {
    if (po == 1.0) return 1.0;
    throw DataError("cohen_kappa: degenerate chance agreement");
  }
  return (po - pe) / (1.0 - pe);
}

double mention_position_in_doc(const Document& doc, const Mention& m) {
  return static_cast<double>(m.start - doc.tokens.front().id) /
         static_cast<double>(doc.token_count());
}

double mention_position_in_sentence(const Document& doc, const Mention& m) {
  const Sentence& s = doc.sentence_of_token(m.start);
  return static_cast<double>(m.start - s.first_token) /
         static_cast<double>(s.length());
}

EntityPrevalenceFeatures entity_prevalence_features(
    const Document& doc, const EntityCluster& cluster,
    const DispersionConfig& cfg) {
  if (cluster.mention_ids.empty())
    throw DataError("cluster \"" + cluster.entity_id + "\" has no mentions");
  EntityPrevalenceFeatures out;
  out.cluster_size = cluster.size();
  out.cluster_size_percentile =
      cluster_size_percentile(doc).at(cluster.entity_id);

  std::vector<int> positions;
  double sum_sent_pos = 0;
  bool first = true;
  for (const auto& mid : cluster.mention_ids) {
    const Mention& m = doc.mention(mid);
    positions.push_back(m.start);
    const double sent_pos = mention_position_in_sentence(doc, m);
    sum_sent_pos += sent_pos;
    if (first) {
      out.position_in_doc = mention_position_in_doc(doc, m);
      out.first_position_in_sent = sent_pos;
      first = false;
    }
  }
  out.mean_position_in_sent =
      sum_sent_pos / static_cast<double>(cluster.mention_ids.size());

  DispersionConfig exp_cfg = cfg;
  exp_cfg.normalization = DispersionNormalization::Exp;
  out.dkl_dispersion = kl_dispersion(positions, doc.token_count(), exp_cfg);
  DispersionConfig max_cfg = cfg;
  max_cfg.normalization = DispersionNormalization::Max;
  out.dkl_dispersion_max =
      kl_dispersion(positions, doc.token_count(), max_cfg);
  return out;
}

}  // namespace salience::metrics
