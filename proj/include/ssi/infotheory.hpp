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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ssi/dataset.hpp"
#include "ssi/errors.hpp"

namespace ssi {

/// Joint count table for two discrete variables.
struct ContingencyTable {
    std::vector<std::vector<std::uint64_t>> counts;  // R x C
    std::uint64_t total = 0;

    static ContingencyTable from_counts(std::vector<std::vector<std::uint64_t>> counts) {
        ContingencyTable t;
        t.counts = std::move(counts);
        for (const auto& row : t.counts)
            for (auto c : row) t.total += c;
        return t;
    }
};

/// Equal-width histogram over [min, max] of the values it is fit on.
struct BinningSpec {
    std::size_t n_bins = 10;

    void validate() const {
        if (n_bins < 2) throw ConfigError("binning: n_bins must be >= 2");
    }
};

/// Plug-in (maximum likelihood) mutual information of the table, in bits.
/// Zero-count cells contribute nothing; cells whose joint probability
/// factorizes exactly are skipped via integer arithmetic, so independent
/// tables give exactly 0.
inline double mutual_information(const ContingencyTable& table) {
    if (table.total == 0) throw DataError("mutual_information: empty table");
    const std::size_t rows = table.counts.size();
    std::vector<std::uint64_t> row_sum(rows, 0);
    std::size_t cols = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        cols = std::max(cols, table.counts[r].size());
        for (auto c : table.counts[r]) row_sum[r] += c;
    }
    std::vector<std::uint64_t> col_sum(cols, 0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < table.counts[r].size(); ++c) col_sum[c] += table.counts[r][c];

    const double total = static_cast<double>(table.total);
    double mi = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < table.counts[r].size(); ++c) {
            std::uint64_t joint = table.counts[r][c];
            if (joint == 0) continue;
            // p(r,c)/(p(r)p(c)) == joint*total/(row*col); equality checked in
            // integers so factorizing cells contribute exactly zero.
            if (joint * table.total == row_sum[r] * col_sum[c]) continue;
            double p = static_cast<double>(joint) / total;
            double ratio = (static_cast<double>(joint) * total) /
                           (static_cast<double>(row_sum[r]) * static_cast<double>(col_sum[c]));
            mi += p * std::log2(ratio);
        }
    }
    return mi < 0.0 ? 0.0 : mi;  // plug-in MI is nonnegative; clear float dust
}

/// Equal-width bin index per value. The max value maps to the last bin;
/// constant input maps everything to bin 0.
inline std::vector<std::size_t> discretize(const std::vector<double>& values, const BinningSpec& spec) {
    spec.validate();
    if (values.empty()) throw DataError("discretize: empty input");
    for (double v : values)
        if (!std::isfinite(v)) throw DataError("discretize: non-finite value");
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it, hi = *hi_it;
    std::vector<std::size_t> bins(values.size(), 0);
    if (hi <= lo) return bins;  // constant input
    const double width = (hi - lo) / static_cast<double>(spec.n_bins);
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto b = static_cast<std::size_t>((values[i] - lo) / width);
        bins[i] = std::min(b, spec.n_bins - 1);
    }
    return bins;
}

namespace detail {

/// MI between one discretized feature and group membership. Bin edges are
/// fit on the pooled values so both groups share a scale.
inline double feature_membership_mi(const std::vector<FeatureVector>& group_a,
                                    const std::vector<FeatureVector>& group_b, std::size_t feature,
                                    const BinningSpec& spec) {
    std::vector<double> pooled;
    pooled.reserve(group_a.size() + group_b.size());
    for (const auto& x : group_a) pooled.push_back(x[feature]);
    for (const auto& x : group_b) pooled.push_back(x[feature]);
    auto bins = discretize(pooled, spec);
    std::vector<std::vector<std::uint64_t>> counts(spec.n_bins, std::vector<std::uint64_t>(2, 0));
    for (std::size_t i = 0; i < bins.size(); ++i) counts[bins[i]][i < group_a.size() ? 0 : 1]++;
    return mutual_information(ContingencyTable::from_counts(std::move(counts)));
}

inline void check_groups(const std::vector<FeatureVector>& cluster_positives,
                         const std::vector<FeatureVector>& negatives) {
    if (cluster_positives.empty() || negatives.empty())
        throw DataError("separability: both instance sets must be non-empty");
    const std::size_t d = cluster_positives[0].size();
    for (const auto& x : cluster_positives)
        if (x.size() != d) throw DataError("separability: mixed dimensions");
    for (const auto& x : negatives)
        if (x.size() != d) throw DataError("separability: mixed dimensions");
}

}  // namespace detail

/// Diagnostic separability score of a candidate partition: the best
/// single-feature mutual information between the discretized feature and
/// membership (cluster-positive vs negative), in bits.
inline double partition_separability(const std::vector<FeatureVector>& cluster_positives,
                                     const std::vector<FeatureVector>& negatives, const BinningSpec& spec) {
    detail::check_groups(cluster_positives, negatives);
    const std::size_t d = cluster_positives[0].size();
    double best = 0.0;
    for (std::size_t j = 0; j < d; ++j)
        best = std::max(best, detail::feature_membership_mi(cluster_positives, negatives, j, spec));
    return best;
}

/// Top-m features by mutual information with membership, descending score,
/// ties broken by the lower feature index.
inline std::vector<std::size_t> select_features(const std::vector<FeatureVector>& cluster_positives,
                                                const std::vector<FeatureVector>& negatives, std::size_t m,
                                                const BinningSpec& spec) {
    detail::check_groups(cluster_positives, negatives);
    const std::size_t d = cluster_positives[0].size();
    if (m == 0) throw ConfigError("select_features: m must be >= 1");
    if (m > d)
        throw ConfigError("select_features: m=" + std::to_string(m) + " exceeds dimensionality " +
                          std::to_string(d));
    std::vector<double> score(d);
    for (std::size_t j = 0; j < d; ++j)
        score[j] = detail::feature_membership_mi(cluster_positives, negatives, j, spec);
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });
    order.resize(m);
    return order;
}

}  // namespace ssi
