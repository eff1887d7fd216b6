#pragma once

// User grouping for uplink NOMA: one-dimensional k-means over channel gains
// in dB, elbow selection of the cluster count, a one-way ANOVA diagnostic and
// proportional subcarrier allocation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "triad/channel.hpp"
#include "triad/special_functions.hpp"

namespace triad {

/// 64-bit finalizer used for all seed derivation in the library.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct KMeansResult {
  std::vector<std::size_t> assignment; ///< cluster index per point, in [0, k)
  std::vector<double> centroids;
  double wcss = 0.0;
  std::size_t iterations = 0;
};

/// Sum of squared distances from each point to the mean of its cluster.
inline double within_cluster_ss(std::span<const double> features, std::span<const std::size_t> assignment,
                                std::size_t k) {
  std::vector<double> sum(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < features.size(); ++i) {
    sum[assignment[i]] += features[i];
    ++count[assignment[i]];
  }
  double wcss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const std::size_t c = assignment[i];
    const double diff = features[i] - sum[c] / static_cast<double>(count[c]);
    wcss += diff * diff;
  }
  return wcss;
}

namespace detail {

inline std::vector<double> cluster_means(std::span<const double> x, std::span<const std::size_t> assignment,
                                         std::size_t k, std::vector<std::size_t>& counts) {
  std::vector<double> sum(k, 0.0);
  counts.assign(k, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum[assignment[i]] += x[i];
    ++counts[assignment[i]];
  }
  for (std::size_t c = 0; c < k; ++c)
    if (counts[c] > 0)
      sum[c] /= static_cast<double>(counts[c]);
  return sum;
}

// Farthest-point seeding starting from the (lower) median. Equidistant
// candidates are ordered by a seed-dependent hash of their index.
inline std::vector<double> seed_centroids(std::span<const double> x, std::size_t k, std::uint64_t seed) {
  std::vector<double> sorted(x.begin(), x.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>((sorted.size() - 1) / 2),
                   sorted.end());
  std::vector<double> centroids{sorted[(sorted.size() - 1) / 2]};

  std::vector<double> nearest(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    nearest[i] = std::abs(x[i] - centroids[0]);

  while (centroids.size() < k) {
    std::size_t pick = 0;
    std::uint64_t pick_key = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::uint64_t key = splitmix64(seed ^ static_cast<std::uint64_t>(i));
      if (i == 0 || nearest[i] > nearest[pick] || (nearest[i] == nearest[pick] && key < pick_key)) {
        pick = i;
        pick_key = key;
      }
    }
    centroids.push_back(x[pick]);
    for (std::size_t i = 0; i < x.size(); ++i)
      nearest[i] = std::min(nearest[i], std::abs(x[i] - x[pick]));
  }
  return centroids;
}

// Moves the point farthest from its own centroid (taken from a cluster with
// at least two members) into each empty cluster.
inline void repair_empty_clusters(std::span<const double> x, std::vector<std::size_t>& assignment,
                                  std::vector<double>& centroids, std::vector<std::size_t>& counts) {
  for (std::size_t empty = 0; empty < centroids.size(); ++empty) {
    if (counts[empty] != 0)
      continue;
    std::optional<std::size_t> far;
    double far_dist = -1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (counts[assignment[i]] < 2)
        continue;
      const double d = std::abs(x[i] - centroids[assignment[i]]);
      if (d > far_dist) {
        far_dist = d;
        far = i;
      }
    }
    if (!far)
      throw std::logic_error("kmeans: cannot repair empty cluster");
    --counts[assignment[*far]];
    assignment[*far] = empty;
    counts[empty] = 1;
    centroids[empty] = x[*far];
  }
}

} // namespace detail

/// Lloyd's algorithm with deterministic seeding, followed by single-point
/// transfers until no move lowers the WCSS. The result has no empty clusters.
inline KMeansResult kmeans(std::span<const double> features, std::size_t k, std::uint64_t seed,
                           std::size_t max_iters = 300) {
  const std::size_t n = features.size();
  if (n == 0)
    throw std::invalid_argument("kmeans: empty feature vector");
  if (k == 0 || k > n)
    throw std::invalid_argument("kmeans: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  if (max_iters == 0)
    throw std::invalid_argument("kmeans: max_iters must be >= 1");

  KMeansResult result;
  result.centroids = detail::seed_centroids(features, k, seed);
  result.assignment.assign(n, 0);
  std::vector<std::size_t> counts(k, 0);

  // Lloyd phase.
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    const std::vector<std::size_t> previous = result.assignment;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::abs(features[i] - result.centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = std::abs(features[i] - result.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      result.assignment[i] = best;
    }
    // Centroids of empty clusters keep a stale value until repaired.
    result.centroids = detail::cluster_means(features, result.assignment, k, counts);
    detail::repair_empty_clusters(features, result.assignment, result.centroids, counts);
    result.centroids = detail::cluster_means(features, result.assignment, k, counts);
    ++result.iterations;
    if (iter > 0 && result.assignment == previous)
      break;
  }

  // Transfer phase: move x from A to B when
  //   n_B/(n_B+1) (x-c_B)^2 < n_A/(n_A-1) (x-c_A)^2.
  for (std::size_t pass = 0; pass < max_iters; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t from = result.assignment[i];
      if (counts[from] < 2)
        continue;
      const double x = features[i];
      const double na = static_cast<double>(counts[from]);
      const double removal_gain = na / (na - 1.0) * (x - result.centroids[from]) * (x - result.centroids[from]);
      std::size_t to = from;
      double best_cost = removal_gain;
      for (std::size_t c = 0; c < k; ++c) {
        if (c == from)
          continue;
        const double nb = static_cast<double>(counts[c]);
        const double cost = nb / (nb + 1.0) * (x - result.centroids[c]) * (x - result.centroids[c]);
        if (cost < best_cost) {
          best_cost = cost;
          to = c;
        }
      }
      // Strict improvement beyond rounding noise, otherwise transfers can cycle.
      if (to != from && best_cost < removal_gain - 1e-12 * (1.0 + removal_gain)) {
        result.assignment[i] = to;
        result.centroids = detail::cluster_means(features, result.assignment, k, counts);
        moved = true;
      }
    }
    ++result.iterations;
    if (!moved)
      break;
  }

  result.wcss = within_cluster_ss(features, result.assignment, k);
  return result;
}

/// Picks the cluster count at the largest discrete second difference of the
/// WCSS curve (wcss_curve[0] is k = 1). Returns 1 for k_max < 3 or a flat curve.
inline std::size_t elbow_select_k(std::span<const double> wcss_curve, std::size_t k_max) {
  if (wcss_curve.empty())
    throw std::invalid_argument("elbow_select_k: empty WCSS curve");
  if (k_max == 0 || k_max > wcss_curve.size())
    throw std::invalid_argument("elbow_select_k: k_max must lie in [1, curve length]");
  if (k_max < 3)
    return 1;

  double max_step = 0.0;
  for (std::size_t i = 1; i < k_max; ++i)
    max_step = std::max(max_step, std::abs(wcss_curve[i] - wcss_curve[i - 1]));
  if (max_step <= 1e-12 * wcss_curve[0])
    return 1;

  std::size_t best_k = 2;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k <= k_max - 1; ++k) {
    const double second = wcss_curve[k - 2] - 2.0 * wcss_curve[k - 1] + wcss_curve[k];
    if (second > best) {
      best = second;
      best_k = k;
    }
  }
  return best_k;
}

struct AnovaResult {
  double f_statistic = 0.0;
  double p_value = 1.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  std::size_t df_between = 0;
  std::size_t df_within = 0;
};

/// One-way ANOVA of features grouped by assignment. SSW = 0 with distinct
/// group means yields F = +inf, p = 0; equal group means yield F = 0, p = 1.
inline AnovaResult anova_f_test(std::span<const double> features, std::span<const std::size_t> assignment) {
  if (features.size() != assignment.size())
    throw std::invalid_argument("anova_f_test: features and assignment differ in length");
  if (features.empty())
    throw std::invalid_argument("anova_f_test: no observations");
  const std::size_t k = *std::max_element(assignment.begin(), assignment.end()) + 1;
  if (k < 2)
    throw std::invalid_argument("anova_f_test: need at least two groups");

  std::vector<std::size_t> counts;
  const std::vector<double> means = detail::cluster_means(features, assignment, k, counts);
  for (std::size_t c = 0; c < k; ++c)
    if (counts[c] == 0)
      throw std::invalid_argument("anova_f_test: group " + std::to_string(c) + " is empty");
  const std::size_t n = features.size();
  if (n < k + 1)
    throw std::invalid_argument("anova_f_test: need more observations than groups");

  const double grand = std::accumulate(features.begin(), features.end(), 0.0) / static_cast<double>(n);
  AnovaResult r;
  for (std::size_t c = 0; c < k; ++c)
    r.ss_between += static_cast<double>(counts[c]) * (means[c] - grand) * (means[c] - grand);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = features[i] - means[assignment[i]];
    r.ss_within += d * d;
  }
  r.df_between = k - 1;
  r.df_within = n - k;

  if (r.ss_between == 0.0) {
    r.f_statistic = 0.0;
    r.p_value = 1.0;
  } else if (r.ss_within == 0.0) {
    r.f_statistic = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
  } else {
    r.f_statistic = (r.ss_between / static_cast<double>(r.df_between)) /
                    (r.ss_within / static_cast<double>(r.df_within));
    r.p_value = special::f_distribution_sf(r.f_statistic, static_cast<double>(r.df_between),
                                           static_cast<double>(r.df_within));
  }
  return r;
}

/// Splits n_subcarriers across clusters in proportion to their sizes using
/// largest remainders. Remainder ties go to the larger cluster, then the
/// lower index. Every cluster gets at least one subcarrier.
inline std::vector<std::size_t> allocate_subcarriers(std::span<const std::size_t> cluster_sizes,
                                                     std::size_t n_subcarriers) {
  const std::size_t k = cluster_sizes.size();
  if (k == 0)
    throw std::invalid_argument("allocate_subcarriers: no clusters");
  if (k > n_subcarriers)
    throw std::invalid_argument("allocate_subcarriers: " + std::to_string(k) + " clusters exceed " +
                                std::to_string(n_subcarriers) + " subcarriers");
  std::size_t total = 0;
  for (std::size_t s : cluster_sizes) {
    if (s == 0)
      throw std::invalid_argument("allocate_subcarriers: cluster sizes must be >= 1");
    total += s;
  }

  std::vector<std::size_t> share(k);
  std::vector<std::size_t> remainder(k);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t numerator = n_subcarriers * cluster_sizes[c];
    share[c] = numerator / total;
    remainder[c] = numerator % total;
    assigned += share[c];
  }

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (remainder[a] != remainder[b])
      return remainder[a] > remainder[b];
    if (cluster_sizes[a] != cluster_sizes[b])
      return cluster_sizes[a] > cluster_sizes[b];
    return a < b;
  });
  for (std::size_t i = 0; assigned < n_subcarriers; ++i, ++assigned)
    ++share[order[i]];

  for (std::size_t c = 0; c < k; ++c) {
    if (share[c] != 0)
      continue;
    const auto donor = std::max_element(share.begin(), share.end());
    --*donor;
    share[c] = 1;
  }
  return share;
}

/// Grouping result for one channel realization.
struct ClusterPlan {
  std::size_t k = 1;
  std::vector<std::size_t> assignment;
  std::vector<double> centroids; ///< dB
  std::vector<double> wcss_curve; ///< index 0 is k = 1
  std::optional<double> f_statistic; ///< absent when k = 1; +inf when within-cluster variance is 0
  std::optional<double> f_pvalue; ///< absent when k = 1 or within-cluster variance is 0
  std::vector<std::size_t> subcarriers_per_cluster;

  std::vector<std::vector<std::size_t>> members() const {
    std::vector<std::vector<std::size_t>> out(k);
    for (std::size_t i = 0; i < assignment.size(); ++i)
      out[assignment[i]].push_back(i);
    return out;
  }

  std::vector<std::size_t> cluster_sizes() const {
    std::vector<std::size_t> out(k, 0);
    for (std::size_t c : assignment)
      ++out[c];
    return out;
  }

  friend bool operator==(const ClusterPlan&, const ClusterPlan&) = default;
};

/// Feature vector used for grouping: effective channel gain in dB.
inline std::vector<double> gain_features_db(const ChannelState& channel) {
  std::vector<double> features;
  features.reserve(channel.size());
  for (double g : channel.effective_gain)
    features.push_back(linear_to_db(g));
  return features;
}

/// Full grouping pipeline. k_max is capped at the number of UEs; the ANOVA
/// result is recorded but does not influence the chosen k.
inline ClusterPlan group_users(std::span<const double> features, std::size_t k_max, std::uint64_t seed,
                               std::size_t n_subcarriers, std::size_t max_iters = 300) {
  if (features.empty())
    throw std::invalid_argument("group_users: no UEs");
  if (k_max == 0)
    throw std::invalid_argument("group_users: k_max must be >= 1");
  const std::size_t k_cap = std::min({k_max, features.size(), n_subcarriers});

  ClusterPlan plan;
  std::vector<KMeansResult> runs;
  runs.reserve(k_cap);
  for (std::size_t k = 1; k <= k_cap; ++k) {
    runs.push_back(kmeans(features, k, seed, max_iters));
    plan.wcss_curve.push_back(runs.back().wcss);
  }
  plan.k = elbow_select_k(plan.wcss_curve, k_cap);
  KMeansResult& chosen = runs[plan.k - 1];
  plan.assignment = std::move(chosen.assignment);
  plan.centroids = std::move(chosen.centroids);

  if (plan.k >= 2) {
    const AnovaResult anova = anova_f_test(features, plan.assignment);
    plan.f_statistic = anova.f_statistic;
    if (anova.ss_within > 0.0)
      plan.f_pvalue = anova.p_value;
  }
  plan.subcarriers_per_cluster = allocate_subcarriers(plan.cluster_sizes(), n_subcarriers);
  return plan;
}

inline ClusterPlan group_users(const ChannelState& channel, std::size_t k_max, std::uint64_t seed,
                               std::size_t n_subcarriers, std::size_t max_iters = 300) {
  const std::vector<double> features = gain_features_db(channel);
  return group_users(features, k_max, seed, n_subcarriers, max_iters);
}

} // namespace triad
