#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "salience/types.hpp"

namespace salience::metrics {

enum class DispersionNormalization {
  Exp,  // 1 - e^{-DKL}
  Max,  // DKL / ln(parts)
};

struct DispersionConfig {
  int parts = 10;  // deciles by default
  DispersionNormalization normalization = DispersionNormalization::Exp;
};

// Raw Kullback-Leibler divergence of mention positions against the
// document's token distribution over `parts` contiguous bins of
// ceil(len/parts) tokens (the final bin may be short; documents shorter
// than `parts` simply produce fewer bins). 0 = perfectly even spread.
double kl_divergence(std::span<const int> mention_positions, int doc_length,
                     const DispersionConfig& cfg = {});

// Scaled divergence per the configured normalization.
double kl_dispersion(std::span<const int> mention_positions, int doc_length,
                     const DispersionConfig& cfg = {});

// Fractional-rank percentile of each cluster's size (ties share the mean
// rank; the largest cluster maps to 1.0).
std::map<std::string, double> cluster_size_percentile(const Document& doc);

// Cohen's kappa over paired binary judgments. Both raters constant and
// identical is defined as 1.0; a degenerate chance agreement of 1 with
// disagreements raises DataError.
double cohen_kappa(std::span<const bool> a, std::span<const bool> b);

struct EntityPrevalenceFeatures {
  int cluster_size = 0;
  double cluster_size_percentile = 0;  // (0, 1]
  double dkl_dispersion = 0;           // exp-normalized, [0, 1)
  double dkl_dispersion_max = 0;       // max-normalized companion value
  double position_in_doc = 0;          // first-mention start / doc length
  double first_position_in_sent = 0;
  double mean_position_in_sent = 0;
};

EntityPrevalenceFeatures entity_prevalence_features(
    const Document& doc, const EntityCluster& cluster,
    const DispersionConfig& cfg = {});

// Instance-level positions, both in [0, 1).
double mention_position_in_doc(const Document& doc, const Mention& m);
double mention_position_in_sentence(const Document& doc, const Mention& m);

}  // namespace salience::metrics
