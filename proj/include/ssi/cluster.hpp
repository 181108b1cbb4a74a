// Copyright 2026 The ssi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ssi/dataset.hpp"
#include "ssi/errors.hpp"
#include "ssi/rng.hpp"

namespace ssi {

/// Result of one k-means run. Assignments always index a nearest centroid
/// (ties broken by lowest cluster index); inertia is the sum of squared
/// Euclidean distances to assigned centroids. inertia_history holds the
/// post-update inertia of every Lloyd iteration, which is non-increasing.
struct ClusterModel {
    std::size_t k = 0;
    std::vector<FeatureVector> centroids;
    std::vector<std::size_t> assignments;
    double inertia = 0.0;
    std::size_t iterations_run = 0;
    std::vector<double> inertia_history;
};

inline double squared_distance(const FeatureVector& a, const FeatureVector& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

namespace detail {

inline std::size_t nearest_centroid(const FeatureVector& x, const std::vector<FeatureVector>& centroids) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        double d = squared_distance(x, centroids[c]);
        if (d < best_d) {  // strict: ties keep the lowest index
            best_d = d;
            best = c;
        }
    }
    return best;
}

inline std::vector<std::size_t> assign_all(const std::vector<FeatureVector>& points,
                                           const std::vector<FeatureVector>& centroids) {
    std::vector<std::size_t> a(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) a[i] = nearest_centroid(points[i], centroids);
    return a;
}

/// Gives every empty cluster one point: the point currently farthest from
/// its assigned centroid (ties by lowest index). Points already stolen and
/// sole members of their cluster are skipped so no new empties appear.
inline void repair_empty_clusters(std::vector<std::size_t>& assignments,
                                  const std::vector<FeatureVector>& centroids,
                                  const std::vector<FeatureVector>& points, std::size_t k) {
    std::vector<std::size_t> counts(k, 0);
    for (auto a : assignments) ++counts[a];
    std::vector<bool> stolen(points.size(), false);
    for (std::size_t empty = 0; empty < k; ++empty) {
        if (counts[empty] != 0) continue;
        std::size_t victim = points.size();
        double worst = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (stolen[i] || counts[assignments[i]] <= 1) continue;
            double d = squared_distance(points[i], centroids[assignments[i]]);
            if (d > worst) {
                worst = d;
                victim = i;
            }
        }
        if (victim == points.size()) continue;  // nothing stealable
        --counts[assignments[victim]];
        assignments[victim] = empty;
        ++counts[empty];
        stolen[victim] = true;
    }
}

inline std::vector<FeatureVector> centroid_means(const std::vector<FeatureVector>& points,
                                                 const std::vector<std::size_t>& assignments,
                                                 std::size_t k, std::size_t dim,
                                                 const std::vector<FeatureVector>& fallback) {
    std::vector<FeatureVector> means(k, FeatureVector(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::size_t c = assignments[i];
        ++counts[c];
        for (std::size_t j = 0; j < dim; ++j) means[c][j] += points[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            means[c] = fallback[c];  // keep a stale centroid rather than NaN
            continue;
        }
        for (std::size_t j = 0; j < dim; ++j) means[c][j] /= static_cast<double>(counts[c]);
    }
    return means;
}

inline double total_inertia(const std::vector<FeatureVector>& points,
                            const std::vector<std::size_t>& assignments,
                            const std::vector<FeatureVector>& centroids) {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) s += squared_distance(points[i], centroids[assignments[i]]);
    return s;
}

/// k-means++ seeding driven by the given generator.
inline std::vector<FeatureVector> kmeanspp_init(const std::vector<FeatureVector>& points, std::size_t k,
                                                Pcg32& rng) {
    std::vector<FeatureVector> centroids;
    centroids.reserve(k);
    centroids.push_back(points[rng.next_below(points.size())]);
    std::vector<double> d2(points.size());
    while (centroids.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            double best = squared_distance(points[i], centroids[0]);
            for (std::size_t c = 1; c < centroids.size(); ++c)
                best = std::min(best, squared_distance(points[i], centroids[c]));
            d2[i] = best;
            total += best;
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.next_below(points.size());  // all points coincide with centroids
        } else {
            double r = rng.next_double() * total;
            double cum = 0.0;
            pick = points.size() - 1;
            for (std::size_t i = 0; i < points.size(); ++i) {
                cum += d2[i];
                if (r < cum) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back(points[pick]);
    }
    return centroids;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Deterministic given
/// (point order, k, seed). Stops when assignments are stable, when the
/// relative inertia improvement drops below 1e-6, or after 100 iterations;
/// empty clusters are repaired by stealing the point farthest from its
/// centroid.
inline ClusterModel kmeans(const std::vector<FeatureVector>& points, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw ConfigError("kmeans: k must be >= 1");
    if (k > points.size())
        throw ConfigError("kmeans: k=" + std::to_string(k) + " exceeds number of points (" +
                          std::to_string(points.size()) + ")");
    const std::size_t dim = points[0].size();
    for (const auto& p : points)
        if (p.size() != dim) throw DataError("kmeans: points have mixed dimensions");

    constexpr double kRelTolerance = 1e-6;
    constexpr std::size_t kMaxIterations = 100;

    Pcg32 rng(seed);
    ClusterModel model;
    model.k = k;
    model.centroids = detail::kmeanspp_init(points, k, rng);

    std::vector<std::size_t> assignments;
    double prev_inertia = std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < kMaxIterations; ++it) {
        auto next = detail::assign_all(points, model.centroids);
        detail::repair_empty_clusters(next, model.centroids, points, k);
        bool stable = it > 0 && next == assignments;
        assignments = std::move(next);
        model.centroids = detail::centroid_means(points, assignments, k, dim, model.centroids);
        double inertia = detail::total_inertia(points, assignments, model.centroids);
        model.inertia_history.push_back(inertia);
        model.iterations_run = it + 1;
        if (stable) break;
        if (prev_inertia - inertia < kRelTolerance * prev_inertia) break;
        prev_inertia = inertia;
    }

    // Canonical final pass: assignments are pure nearest-centroid against the
    // final centroids, so re-running assignment is a fixed point.
    auto final_assign = detail::assign_all(points, model.centroids);
    double final_inertia = detail::total_inertia(points, final_assign, model.centroids);
    if (final_assign != assignments) model.inertia_history.push_back(final_inertia);
    model.assignments = std::move(final_assign);
    model.inertia = final_inertia;
    return model;
}

/// Per-cluster instance counts split by label: (size, P_j, N_j).
struct ClusterCounts {
    std::size_t size = 0;
    std::size_t positives = 0;  // P_j
    std::size_t negatives = 0;  // N_j
};

inline std::vector<ClusterCounts> cluster_stats(const ClusterModel& model, const std::vector<Label>& labels) {
    if (labels.size() != model.assignments.size())
        throw DataError("cluster_stats: labels length " + std::to_string(labels.size()) +
                        " != assignments length " + std::to_string(model.assignments.size()));
    std::vector<ClusterCounts> stats(model.k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ClusterCounts& c = stats[model.assignments[i]];
        ++c.size;
        if (labels[i] == Label::positive)
            ++c.positives;
        else
            ++c.negatives;
    }
    return stats;
}

}  // namespace ssi
