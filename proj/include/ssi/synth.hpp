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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "ssi/dataset.hpp"
#include "ssi/errors.hpp"
#include "ssi/format.hpp"
#include "ssi/rng.hpp"

namespace ssi {

/// Configuration for the synthetic partially-separable scenario: a shared
/// background distribution for negatives and inseparable positives, plus K
/// well-separated positive subgroups.
struct SynthConfig {
    std::size_t dim = 2;
    std::size_t n_neg_subjects = 20;
    std::size_t n_pos_subjects = 20;
    std::size_t instances_per_subject = 10;
    std::size_t n_subgroups = 2;               // K; 0 means no separable structure
    double subgroup_offset = 6.0;              // distance of subgroup centers from origin
    double subgroup_sigma = 0.5;               // subgroup spread
    double separable_fraction = 0.3;           // of a separable subject's instances
    double inseparable_subject_fraction = 0.2; // positive subjects with no separable instance
    std::uint64_t seed = 0;

    void validate() const {
        if (dim < 1) throw ConfigError("synth: dim must be >= 1");
        if (n_neg_subjects < 1) throw ConfigError("synth: n_neg_subjects must be >= 1");
        if (n_pos_subjects < 1) throw ConfigError("synth: n_pos_subjects must be >= 1");
        if (instances_per_subject < 1) throw ConfigError("synth: instances_per_subject must be >= 1");
        if (!(subgroup_offset > 0.0)) throw ConfigError("synth: subgroup_offset must be > 0");
        if (!(subgroup_sigma > 0.0)) throw ConfigError("synth: subgroup_sigma must be > 0");
        if (separable_fraction < 0.0 || separable_fraction > 1.0)
            throw ConfigError("synth: separable_fraction must be in [0,1]");
        if (inseparable_subject_fraction < 0.0 || inseparable_subject_fraction > 1.0)
            throw ConfigError("synth: inseparable_subject_fraction must be in [0,1]");
        if (n_subgroups > 2 * dim && dim < 2)
            throw ConfigError("synth: more than 2*dim subgroups requires dim >= 2");
    }
};

/// The hidden partition made observable for diagnostics: per-instance
/// subgroup id (0 = inseparable background, 1..K = subgroup) and the derived
/// per-subject separability flag.
struct GroundTruth {
    std::vector<int> subgroup_of_instance;
    std::vector<std::string> subject_ids;          // dataset order of first appearance
    std::vector<std::uint8_t> subject_separable;   // aligned with subject_ids

    bool has_separable_instance(std::size_t subject_index) const {
        return subject_separable[subject_index] != 0;
    }
};

/// Deterministic subgroup center directions: up to 2*dim subgroups use the
/// +/- axis unit vectors (+e1..+ed then -e1..-ed); beyond that, directions
/// are evenly spaced on the circle in the first two coordinates.
inline std::vector<FeatureVector> subgroup_centers(const SynthConfig& cfg) {
    std::vector<FeatureVector> centers;
    centers.reserve(cfg.n_subgroups);
    for (std::size_t k = 0; k < cfg.n_subgroups; ++k) {
        FeatureVector c(cfg.dim, 0.0);
        if (cfg.n_subgroups <= 2 * cfg.dim) {
            std::size_t axis = k % cfg.dim;
            double sign = k < cfg.dim ? 1.0 : -1.0;
            c[axis] = sign * cfg.subgroup_offset;
        } else {
            double angle = 6.283185307179586476925286766559 * static_cast<double>(k) /
                           static_cast<double>(cfg.n_subgroups);
            c[0] = cfg.subgroup_offset * std::cos(angle);
            c[1] = cfg.subgroup_offset * std::sin(angle);
        }
        centers.push_back(std::move(c));
    }
    return centers;
}

/// Generates the synthetic dataset plus its ground truth. Negatives and
/// inseparable positive instances are drawn from the same standard normal
/// background N(0, I); subgroup instances from N(mu_k, sigma^2 I). The
/// leading ceil(inseparable_subject_fraction * n_pos_subjects) positive
/// subjects carry only background instances; the rest are assigned a
/// subgroup round-robin and draw their leading
/// ceil(separable_fraction * instances_per_subject) instances from it.
/// Fully deterministic given the seed.
inline std::pair<Dataset, GroundTruth> generate(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t k_groups = cfg.n_subgroups;
    const double insep_fraction = k_groups == 0 ? 1.0 : cfg.inseparable_subject_fraction;
    const std::size_t n_insep =
        static_cast<std::size_t>(std::ceil(insep_fraction * static_cast<double>(cfg.n_pos_subjects)));
    const std::size_t n_sep_inst = static_cast<std::size_t>(
        std::ceil(cfg.separable_fraction * static_cast<double>(cfg.instances_per_subject)));
    const auto centers = subgroup_centers(cfg);

    Pcg32 rng(cfg.seed);
    Dataset data;
    data.dim = cfg.dim;
    for (std::size_t j = 0; j < cfg.dim; ++j) data.feature_names.push_back("f" + std::to_string(j + 1));

    GroundTruth truth;
    const std::size_t total =
        (cfg.n_neg_subjects + cfg.n_pos_subjects) * cfg.instances_per_subject;
    data.instances.reserve(total);
    truth.subgroup_of_instance.reserve(total);

    auto draw = [&](const FeatureVector* center, double sigma) {
        FeatureVector x(cfg.dim);
        for (std::size_t j = 0; j < cfg.dim; ++j) {
            double mu = center ? (*center)[j] : 0.0;
            x[j] = mu + sigma * rng.next_normal();
        }
        return x;
    };

    for (std::size_t s = 0; s < cfg.n_neg_subjects; ++s) {
        std::string id = "neg" + std::to_string(s + 1);
        truth.subject_ids.push_back(id);
        truth.subject_separable.push_back(0);
        for (std::size_t i = 0; i < cfg.instances_per_subject; ++i) {
            data.instances.push_back({id, Label::negative, draw(nullptr, 1.0)});
            truth.subgroup_of_instance.push_back(0);
        }
    }
    std::size_t separable_rank = 0;  // round-robin position among separable subjects
    for (std::size_t s = 0; s < cfg.n_pos_subjects; ++s) {
        std::string id = "pos" + std::to_string(s + 1);
        bool separable = s >= n_insep && k_groups > 0;
        int subgroup = 0;
        if (separable) {
            subgroup = static_cast<int>(separable_rank % k_groups) + 1;
            ++separable_rank;
        }
        truth.subject_ids.push_back(id);
        truth.subject_separable.push_back(separable && n_sep_inst > 0 ? 1 : 0);
        for (std::size_t i = 0; i < cfg.instances_per_subject; ++i) {
            bool from_subgroup = separable && i < n_sep_inst;
            if (from_subgroup) {
                data.instances.push_back(
                    {id, Label::positive, draw(&centers[static_cast<std::size_t>(subgroup - 1)], cfg.subgroup_sigma)});
                truth.subgroup_of_instance.push_back(subgroup);
            } else {
                data.instances.push_back({id, Label::positive, draw(nullptr, 1.0)});
                truth.subgroup_of_instance.push_back(0);
            }
        }
    }
    return {std::move(data), std::move(truth)};
}

/// Sidecar ground-truth file: `instance_index,subgroup_id`, one row per
/// instance in dataset order.
inline void write_truth_csv(const GroundTruth& truth, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot open file for writing");
    out << "instance_index,subgroup_id\n";
    for (std::size_t i = 0; i < truth.subgroup_of_instance.size(); ++i)
        out << i << ',' << truth.subgroup_of_instance[i] << '\n';
    if (!out) throw DataError(path + ": write failed");
}

}  // namespace ssi
