#include "salience/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "salience/csv.hpp"
#include "salience/errors.hpp"

namespace salience::stats {

namespace {
const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);
}

double normal_two_sided_p(double z) {
  return 2.0 * boost::math::cdf(kStdNormal, -std::abs(z));
}

double chi2_sf(double x, double df) {
  if (x <= 0) return 1.0;
  boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

double normal_quantile(double p) {
  return boost::math::quantile(kStdNormal, p);
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return "";
}

std::string format_pvalue(double p) {
  if (p < 1e-16) return "<2.2e-16";
  return format_double(p);
}

double mean(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) /
         static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  const double m = mean(x);
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

std::vector<double> fractional_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double shared = (static_cast<double>(i) + static_cast<double>(j)) /
                              2.0 +
                          1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

namespace {

double two_sided_t_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  boost::math::students_t_distribution<double> dist(df);
  return 2.0 * boost::math::cdf(dist, -std::abs(t));
}

}  // namespace

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw DataError("pearson: need at least 3 observations");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) throw DataError("pearson: constant input");
  double r = sxy / std::sqrt(sxx * syy);
  r = std::clamp(r, -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  double p = 0.0;
  if (std::abs(r) < 1.0) {
    const double t = r * std::sqrt(df / (1.0 - r * r));
    p = two_sided_t_p(t, df);
  }
  return {r, p, n};
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("spearman: length mismatch");
  const auto rx = fractional_ranks(x);
  const auto ry = fractional_ranks(y);
  return pearson(rx, ry);
}

WelchResult welch_t_hedges(std::span<const double> x0,
                           std::span<const double> x1) {
  const std::size_t n0 = x0.size(), n1 = x1.size();
  if (n0 < 2 || n1 < 2) throw DataError("welch: both groups need n >= 2");
  const double m0 = mean(x0), m1 = mean(x1);
  const double s0 = sample_sd(x0), s1 = sample_sd(x1);
  const double v0 = s0 * s0 / static_cast<double>(n0);
  const double v1 = s1 * s1 / static_cast<double>(n1);
  const double pooled_df = static_cast<double>(n0 + n1 - 2);
  const double pooled_var =
      ((n0 - 1) * s0 * s0 + (n1 - 1) * s1 * s1) / pooled_df;
  if (pooled_var == 0) throw DataError("welch: zero pooled variance");

  WelchResult out;
  const double diff = m1 - m0;
  if (v0 + v1 == 0) {
    // Identical constant groups with nonzero pooled variance cannot occur;
    // equal-mean groups with zero within-group variance do.
    out.t = 0;
    out.df = pooled_df;
    out.p = 1.0;
  } else {
    out.t = diff / std::sqrt(v0 + v1);
    out.df = (v0 + v1) * (v0 + v1) /
             (v0 * v0 / static_cast<double>(n0 - 1) +
              v1 * v1 / static_cast<double>(n1 - 1));
    out.p = two_sided_t_p(out.t, out.df);
  }
  const double correction = 1.0 - 3.0 / (4.0 * pooled_df - 1.0);
  out.g = correction * diff / std::sqrt(pooled_var);
  return out;
}

GroupCiReport adjusted_group_cis(
    const std::map<std::string, std::vector<double>>& groups, double alpha,
    double max_value) {
  if (groups.empty()) throw DataError("adjusted_group_cis: no groups");
  GroupCiReport out;
  std::size_t m = 0;
  for (const auto& [label, values] : groups) {
    if (!values.empty()) ++m;
  }
  if (m == 0) throw DataError("adjusted_group_cis: all groups empty");
  out.adjusted_alpha = alpha / static_cast<double>(m);
  const double z = normal_quantile(1.0 - out.adjusted_alpha / 2.0);
  for (const auto& [label, values] : groups) {
    if (values.empty()) {
      out.warnings.push_back("group \"" + label + "\" has no observations");
      continue;
    }
    GroupSummary s;
    s.label = label;
    s.n = values.size();
    s.mean = mean(values);
    const double sd = values.size() > 1 ? sample_sd(values) : 0.0;
    const double half = z * sd / std::sqrt(static_cast<double>(values.size()));
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
    std::size_t at_max = 0;
    for (double v : values) {
      if (v == max_value) ++at_max;
    }
    s.share_of_max_salience =
        static_cast<double>(at_max) / static_cast<double>(values.size());
    out.groups.push_back(std::move(s));
  }
  return out;
}

}  // namespace salience::stats
