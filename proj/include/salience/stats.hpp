#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace salience::stats {

// Two-sided tail probability of a standard normal.
double normal_two_sided_p(double z);
// Upper-tail chi-squared probability.
double chi2_sf(double x, double df);
// Quantile of the standard normal.
double normal_quantile(double p);

// "***" p<0.001, "**" p<0.01, "*" p<0.05, "." p<0.1, "" otherwise.
std::string significance_stars(double p);

// Values below 1e-16 print as "<2.2e-16", mirroring common table output.
std::string format_pvalue(double p);

// Fractional ranks, 1-based; ties share the mean rank.
std::vector<double> fractional_ranks(std::span<const double> x);

struct Correlation {
  double r = 0;
  double p = 1;
  std::size_t n = 0;
};

// Product-moment correlation; p from a t distribution with n-2 df.
// Throws DataError on length mismatch, n < 3, or constant input.
Correlation pearson(std::span<const double> x, std::span<const double> y);

// Pearson over fractional ranks.
Correlation spearman(std::span<const double> x, std::span<const double> y);

struct WelchResult {
  double t = 0;   // sign of mean(x1) - mean(x0)
  double df = 0;  // Welch-Satterthwaite
  double p = 1;
  double g = 0;   // Hedges' g, bias-corrected, pooled sd
};

// Welch's unequal-variance t test plus the Hedges' g effect size.
// Throws DataError when either group has n < 2 or pooled variance is zero.
WelchResult welch_t_hedges(std::span<const double> x0,
                           std::span<const double> x1);

struct GroupSummary {
  std::string label;
  std::size_t n = 0;
  double mean = 0;
  double ci_low = 0;
  double ci_high = 0;
  double share_of_max_salience = 0;  // fraction of values at the maximum
};

struct GroupCiReport {
  std::vector<GroupSummary> groups;
  std::vector<std::string> warnings;  // dropped empty groups
  double adjusted_alpha = 0;          // alpha / number of groups
};

// Normal-approximation confidence intervals at the Bonferroni-adjusted
// level alpha/m for m groups. `max_value` defines share_of_max_salience.
GroupCiReport adjusted_group_cis(
    const std::map<std::string, std::vector<double>>& groups,
    double alpha = 0.05, double max_value = 5.0);

double mean(std::span<const double> x);
double sample_sd(std::span<const double> x);  // n-1 denominator

}  // namespace salience::stats
