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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssi/classify.hpp"
#include "ssi/cluster.hpp"
#include "ssi/dataset.hpp"
#include "ssi/errors.hpp"
#include "ssi/format.hpp"
#include "ssi/infotheory.hpp"
#include "ssi/rng.hpp"

namespace ssi {

/// Cluster-size stop threshold. `count` is an absolute size; `fraction`
/// resolves against the current remaining instance total each round;
/// `auto_default` resolves to max(2*(s+1), ceil(0.05 * total)).
struct RhoSpec {
    enum class Kind { auto_default, count, fraction };
    Kind kind = Kind::auto_default;
    double value = 0.0;

    std::size_t resolve(std::size_t current_total, std::size_t min_positives) const {
        switch (kind) {
            case Kind::count:
                return static_cast<std::size_t>(value);
            case Kind::fraction:
                return std::max<std::size_t>(
                    1, static_cast<std::size_t>(std::ceil(value * static_cast<double>(current_total))));
            case Kind::auto_default:
            default:
                return std::max<std::size_t>(
                    2 * (min_positives + 1),
                    static_cast<std::size_t>(std::ceil(0.05 * static_cast<double>(current_total))));
        }
    }

    /// Parses "25" as an absolute count, "0.05" (any value in (0,1), or any
    /// string containing '.') as a fraction, "auto" as the default rule.
    static RhoSpec parse(const std::string& text) {
        if (text == "auto") return {};
        double v = 0.0;
        if (!parse_double(text, v) || !(v > 0.0)) throw ConfigError("rho: expected a positive number or \"auto\"");
        RhoSpec spec;
        if (v < 1.0 || text.find('.') != std::string::npos) {
            if (v >= 1.0) throw ConfigError("rho: a fractional threshold must be < 1");
            spec.kind = Kind::fraction;
        } else {
            spec.kind = Kind::count;
        }
        spec.value = v;
        return spec;
    }

    std::string to_string() const {
        switch (kind) {
            case Kind::count:
                return format_double(value);
            case Kind::fraction:
                return format_double(value);
            case Kind::auto_default:
            default:
                return "auto";
        }
    }
};

/// Parameters of the iterative exclusive-cluster training loop. Zero in
/// min_positives / k_max means "resolve from the data" (s = max(5,
/// ceil(0.01*|P|)), k_max = min(50, |P union N|)).
struct SSIConfig {
    RhoSpec rho;
    std::size_t min_positives = 0;       // s
    double neg_tolerance = 0.2;          // t
    double min_sensitivity = 0.9;        // st
    std::size_t k_max = 0;
    ClassifierSpec classifier;
    bool standardize = true;
    std::uint64_t seed = 0;
    bool remove_only_if_accepted = false;
    double gate_holdout_fraction = 0.0;
    std::size_t feature_select = 0;      // top-m features per detector; 0 = off
    BinningSpec binning;

    void validate() const {
        if (neg_tolerance < 0.0) throw ConfigError("ssi: neg_tolerance must be >= 0");
        if (min_sensitivity < 0.0 || min_sensitivity > 1.0)
            throw ConfigError("ssi: min_sensitivity must be in [0,1]");
        if (gate_holdout_fraction < 0.0 || gate_holdout_fraction >= 1.0)
            throw ConfigError("ssi: gate_holdout_fraction must be in [0,1)");
        if (k_max == 1) throw ConfigError("ssi: k_max must be >= 2 (or 0 for auto)");
        if (rho.kind == RhoSpec::Kind::count && rho.value < 1.0)
            throw ConfigError("ssi: rho must be >= 1 when given as a count");
        classifier.validate();
        binning.validate();
    }

    std::size_t resolve_min_positives(std::size_t n_positives) const {
        if (min_positives > 0) return min_positives;
        return std::max<std::size_t>(
            5, static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(n_positives))));
    }

    std::size_t resolve_k_max(std::size_t n_total) const {
        if (k_max > 0) return k_max;
        return std::min<std::size_t>(50, n_total);
    }
};

/// A cluster that passed the size and negative-tolerance gates:
/// N_j/P_j < t and P_j > s, both strict. Member indices refer to the
/// original dataset.
struct ExclusiveCluster {
    std::vector<std::size_t> positive_members;
    std::vector<std::size_t> negative_members;
    FeatureVector centroid;
    std::size_t discovered_round = 0;
    std::size_t n_used = 0;

    std::size_t p_count() const { return positive_members.size(); }
    std::size_t n_count() const { return negative_members.size(); }
};

/// A trained classifier bound to the exclusive cluster that produced it.
struct Detector {
    TrainedClassifier classifier;
    ExclusiveCluster source;
    std::vector<std::size_t> selected_features;  // empty = all features
    double gate_sensitivity = 0.0;
    bool accepted = false;
};

/// The OR-ensemble: ordered accepted detectors plus preprocessing state.
/// Prediction depends only on accepted detectors; an empty ensemble flags
/// nothing.
struct EnsembleModel {
    std::vector<Detector> detectors;  // accepted only
    bool standardize = true;
    StandardizationParams standardizer;
    double decision_threshold = 0.5;
    std::size_t dim = 0;
    std::uint64_t creation_seed = 0;
    std::vector<std::pair<std::string, std::string>> config_echo;
};

/// One line of the fit trace.
struct TraceEvent {
    enum class Kind { round, cluster, detector, removal, reset, warning, done };
    Kind kind = Kind::round;
    std::size_t round = 0;
    std::size_t n = 0;
    std::size_t cluster = 0;
    std::size_t size = 0;
    std::size_t p_count = 0;
    std::size_t n_count = 0;
    double gate_sensitivity = 0.0;
    double feature_score = 0.0;       // separability score when feature selection runs
    std::string decision;             // exclusive / not_exclusive / accepted / rejected / ...
    std::vector<std::size_t> indices; // removed positives for removal events

    std::string to_line() const {
        std::string line = "round=" + std::to_string(round) + " n=" + std::to_string(n);
        switch (kind) {
            case Kind::round:
                line += " event=round total=" + std::to_string(size) + " remaining_P=" +
                        std::to_string(p_count) + " rho=" + std::to_string(cluster);
                break;
            case Kind::cluster:
                line += " event=cluster cluster=" + std::to_string(cluster) + " size=" +
                        std::to_string(size) + " P_j=" + std::to_string(p_count) + " N_j=" +
                        std::to_string(n_count) + " decision=" + decision;
                break;
            case Kind::detector:
                line += " event=detector cluster=" + std::to_string(cluster) + " P_j=" +
                        std::to_string(p_count) + " N_j=" + std::to_string(n_count) +
                        " gate_sensitivity=" + format_double(gate_sensitivity) + " decision=" + decision;
                if (!indices.empty()) {
                    line += " selected_features=";
                    for (std::size_t i = 0; i < indices.size(); ++i) {
                        if (i) line += ',';
                        line += std::to_string(indices[i]);
                    }
                    line += " separability=" + format_double(feature_score);
                }
                break;
            case Kind::removal: {
                line += " event=remove cluster=" + std::to_string(cluster) + " count=" +
                        std::to_string(indices.size()) + " indices=";
                for (std::size_t i = 0; i < indices.size(); ++i) {
                    if (i) line += ',';
                    line += std::to_string(indices[i]);
                }
                break;
            }
            case Kind::reset:
                line += " event=reset";
                break;
            case Kind::warning:
                line += " event=warning reason=" + decision;
                break;
            case Kind::done:
                line += " event=done detectors=" + std::to_string(size) + " remaining_P=" +
                        std::to_string(p_count);
                break;
        }
        return line;
    }
};

/// Ordered audit log of one fit: every cluster evaluation, gate outcome and
/// removal, in execution order.
struct FitTrace {
    std::vector<TraceEvent> events;
    std::vector<std::size_t> initial_positives;
    std::vector<std::size_t> final_remaining_positives;

    std::vector<std::string> to_lines() const {
        std::vector<std::string> lines;
        lines.reserve(events.size());
        for (const auto& e : events) lines.push_back(e.to_line());
        return lines;
    }

    /// All removal events in order; their concatenation is the set of
    /// positives consumed by the loop.
    std::vector<std::vector<std::size_t>> removals() const {
        std::vector<std::vector<std::size_t>> out;
        for (const auto& e : events)
            if (e.kind == TraceEvent::Kind::removal) out.push_back(e.indices);
        return out;
    }
};

/// Line 4 of the training loop: clusters with P_j > 0, N_j/P_j < t and
/// P_j > s (both strict), in ascending cluster index order.
inline std::vector<std::size_t> find_exclusive_clusters(const std::vector<ClusterCounts>& stats,
                                                        double neg_tolerance, std::size_t min_positives) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < stats.size(); ++j) {
        const auto& c = stats[j];
        if (c.positives == 0) continue;
        double ratio = static_cast<double>(c.negatives) / static_cast<double>(c.positives);
        if (ratio < neg_tolerance && c.positives > min_positives) out.push_back(j);
    }
    return out;
}

namespace detail {

inline FeatureVector project_features(const FeatureVector& x, const std::vector<std::size_t>& selected) {
    if (selected.empty()) return x;
    FeatureVector out;
    out.reserve(selected.size());
    for (auto j : selected) out.push_back(x[j]);
    return out;
}

}  // namespace detail

/// OR over the accepted detectors: the instance is flagged when any detector
/// assigns probability >= the decision threshold. Also returns every
/// detector's probability.
inline std::pair<bool, std::vector<double>> predict_instance(const EnsembleModel& model,
                                                             const FeatureVector& x) {
    if (x.size() != model.dim)
        throw DataError("predict: input dimension " + std::to_string(x.size()) + " != model dimension " +
                        std::to_string(model.dim));
    FeatureVector z = model.standardize ? standardize_vector(x, model.standardizer) : x;
    std::vector<double> probas;
    probas.reserve(model.detectors.size());
    bool flag = false;
    for (const auto& det : model.detectors) {
        double p = det.classifier.predict_proba(detail::project_features(z, det.selected_features));
        probas.push_back(p);
        flag = flag || p >= model.decision_threshold;
    }
    return {flag, std::move(probas)};
}

/// Bag-level rule: positive iff at least one instance is flagged.
inline bool predict_subject(const EnsembleModel& model, const std::vector<FeatureVector>& bag) {
    if (bag.empty()) throw DataError("predict_subject: empty bag");
    for (const auto& x : bag)
        if (predict_instance(model, x).first) return true;
    return false;
}

namespace detail {

inline std::vector<std::pair<std::string, std::string>> config_echo_from(const SSIConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> echo;
    echo.emplace_back("rho", cfg.rho.to_string());
    echo.emplace_back("min-positives", std::to_string(cfg.min_positives));
    echo.emplace_back("neg-tolerance", format_double(cfg.neg_tolerance));
    echo.emplace_back("min-sensitivity", format_double(cfg.min_sensitivity));
    echo.emplace_back("kmax", std::to_string(cfg.k_max));
    echo.emplace_back("classifier", cfg.classifier.kind == ClassifierKind::linear ? "linear" : "rbf");
    echo.emplace_back("l2", format_double(cfg.classifier.l2_lambda));
    echo.emplace_back("gamma", format_double(cfg.classifier.rbf_gamma));
    echo.emplace_back("learning-rate", format_double(cfg.classifier.learning_rate));
    echo.emplace_back("max-epochs", std::to_string(cfg.classifier.max_epochs));
    echo.emplace_back("gd-tolerance", format_double(cfg.classifier.tolerance));
    echo.emplace_back("class-weighting",
                      cfg.classifier.class_weighting == ClassWeighting::balanced ? "balanced" : "none");
    echo.emplace_back("standardize", cfg.standardize ? "true" : "false");
    echo.emplace_back("seed", std::to_string(cfg.seed));
    echo.emplace_back("remove-only-if-accepted", cfg.remove_only_if_accepted ? "true" : "false");
    echo.emplace_back("gate-holdout-fraction", format_double(cfg.gate_holdout_fraction));
    echo.emplace_back("feature-select", std::to_string(cfg.feature_select));
    echo.emplace_back("bins", std::to_string(cfg.binning.n_bins));
    return echo;
}

}  // namespace detail

/// The training loop. Starting from all data as one cluster, the cluster
/// count n grows until a cluster of almost-only positives appears
/// (N_j/P_j < t, P_j > s). Each such cluster trains a classifier on its
/// positives against all negatives; the classifier joins the ensemble when
/// its sensitivity on the cluster's own positives beats st. The cluster's
/// positives are then removed and n resets to 1. The loop exits when every
/// cluster is at most rho instances (and n > 1), or when n reaches k_max.
inline std::pair<EnsembleModel, FitTrace> fit(const Dataset& data, const SSIConfig& cfg) {
    cfg.validate();
    auto labeled = split_by_label(data);
    if (labeled.positives.empty()) throw DataError("fit: dataset has no positive instances");
    if (labeled.negatives.empty()) throw DataError("fit: dataset has no negative instances");

    EnsembleModel model;
    model.standardize = cfg.standardize;
    model.decision_threshold = 0.5;
    model.dim = data.dim;
    model.creation_seed = cfg.seed;
    model.config_echo = detail::config_echo_from(cfg);

    Dataset work;
    if (cfg.standardize) {
        model.standardizer = fit_standardizer(data);
        work = apply_standardizer(data, model.standardizer);
    } else {
        work = data;
    }

    FitTrace trace;
    trace.initial_positives = labeled.positives;

    const std::size_t s = cfg.resolve_min_positives(labeled.positives.size());
    const std::size_t k_max = cfg.resolve_k_max(data.size());

    std::vector<std::size_t> remaining_p = labeled.positives;  // ascending
    const std::vector<std::size_t>& all_n = labeled.negatives;

    std::vector<FeatureVector> negative_points;
    negative_points.reserve(all_n.size());
    for (auto i : all_n) negative_points.push_back(work.instances[i].features);

    std::size_t n = 1;
    std::size_t round_no = 0;
    // Cluster sizes from the latest clustering; a single whole-data cluster
    // initially and after every reset.
    std::vector<std::size_t> current_sizes = {remaining_p.size() + all_n.size()};

    while (true) {
        ++round_no;
        const std::size_t total = remaining_p.size() + all_n.size();
        const std::size_t rho = cfg.rho.resolve(total, s);

        bool exists_big = false;
        for (auto sz : current_sizes) exists_big = exists_big || sz > rho;
        if (!(exists_big || n == 1)) break;

        const std::size_t k_cap = std::min(k_max, total);
        if (n + 1 > k_cap) {
            TraceEvent w;
            w.kind = TraceEvent::Kind::warning;
            w.round = round_no;
            w.n = n;
            w.decision = "k_max_reached";
            trace.events.push_back(w);
            break;
        }
        ++n;

        TraceEvent rb;
        rb.kind = TraceEvent::Kind::round;
        rb.round = round_no;
        rb.n = n;
        rb.size = total;
        rb.p_count = remaining_p.size();
        rb.cluster = rho;  // rho rides in the cluster field for round events
        trace.events.push_back(rb);

        // Cluster remaining positives plus all negatives, in ascending
        // dataset-index order.
        std::vector<std::size_t> pool;
        pool.reserve(total);
        {
            std::size_t pi = 0, ni = 0;
            while (pi < remaining_p.size() || ni < all_n.size()) {
                if (ni == all_n.size() || (pi < remaining_p.size() && remaining_p[pi] < all_n[ni]))
                    pool.push_back(remaining_p[pi++]);
                else
                    pool.push_back(all_n[ni++]);
            }
        }
        std::vector<FeatureVector> points;
        points.reserve(total);
        std::vector<Label> labels;
        labels.reserve(total);
        for (auto i : pool) {
            points.push_back(work.instances[i].features);
            labels.push_back(data.instances[i].label);
        }

        ClusterModel clustering = kmeans(points, n, derive_seed(cfg.seed, round_no));
        auto stats = cluster_stats(clustering, labels);
        current_sizes.clear();
        for (const auto& st : stats) current_sizes.push_back(st.size);

        auto exclusive = find_exclusive_clusters(stats, cfg.neg_tolerance, s);
        for (std::size_t j = 0; j < stats.size(); ++j) {
            TraceEvent e;
            e.kind = TraceEvent::Kind::cluster;
            e.round = round_no;
            e.n = n;
            e.cluster = j;
            e.size = stats[j].size;
            e.p_count = stats[j].positives;
            e.n_count = stats[j].negatives;
            e.decision = std::binary_search(exclusive.begin(), exclusive.end(), j) ? "exclusive"
                                                                                   : "not_exclusive";
            trace.events.push_back(e);
        }

        if (exclusive.empty()) continue;

        bool removed_any = false;
        for (auto j : exclusive) {
            ExclusiveCluster ec;
            ec.centroid = clustering.centroids[j];
            ec.discovered_round = round_no;
            ec.n_used = n;
            for (std::size_t i = 0; i < pool.size(); ++i) {
                if (clustering.assignments[i] != j) continue;
                if (labels[i] == Label::positive)
                    ec.positive_members.push_back(pool[i]);
                else
                    ec.negative_members.push_back(pool[i]);
            }

            std::vector<FeatureVector> cluster_pos;
            cluster_pos.reserve(ec.positive_members.size());
            for (auto i : ec.positive_members) cluster_pos.push_back(work.instances[i].features);

            Detector det;
            det.source = ec;

            double separability = 0.0;
            if (cfg.feature_select > 0 && cfg.feature_select < data.dim) {
                det.selected_features =
                    select_features(cluster_pos, negative_points, cfg.feature_select, cfg.binning);
                std::sort(det.selected_features.begin(), det.selected_features.end());
                separability = partition_separability(cluster_pos, negative_points, cfg.binning);
            }

            auto project_all = [&](const std::vector<FeatureVector>& rows) {
                if (det.selected_features.empty()) return rows;
                std::vector<FeatureVector> out;
                out.reserve(rows.size());
                for (const auto& r : rows) out.push_back(detail::project_features(r, det.selected_features));
                return out;
            };
            std::vector<FeatureVector> train_pos = project_all(cluster_pos);
            std::vector<FeatureVector> train_neg = project_all(negative_points);

            // Optional holdout for the sensitivity gate; default gates on the
            // classifier's own training positives.
            std::vector<FeatureVector> gate_pos;
            if (cfg.gate_holdout_fraction > 0.0 && train_pos.size() >= 2) {
                std::size_t held = static_cast<std::size_t>(
                    std::floor(cfg.gate_holdout_fraction * static_cast<double>(train_pos.size())));
                held = std::min(held, train_pos.size() - 1);
                if (held > 0) {
                    Pcg32 shuffle_rng(derive_seed(cfg.seed, (round_no << 16) ^ j));
                    std::vector<std::size_t> order(train_pos.size());
                    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
                    for (std::size_t i = order.size(); i > 1; --i)
                        std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
                    std::vector<FeatureVector> kept;
                    for (std::size_t i = 0; i < order.size(); ++i) {
                        if (i < held)
                            gate_pos.push_back(train_pos[order[i]]);
                        else
                            kept.push_back(train_pos[order[i]]);
                    }
                    train_pos = std::move(kept);
                }
            }

            det.classifier = train(train_pos, train_neg, cfg.classifier);
            det.gate_sensitivity = sensitivity_on(det.classifier, gate_pos.empty() ? train_pos : gate_pos,
                                                  model.decision_threshold);
            det.accepted = det.gate_sensitivity > cfg.min_sensitivity;

            TraceEvent de;
            de.kind = TraceEvent::Kind::detector;
            de.round = round_no;
            de.n = n;
            de.cluster = j;
            de.p_count = ec.p_count();
            de.n_count = ec.n_count();
            de.gate_sensitivity = det.gate_sensitivity;
            de.decision = det.accepted ? "accepted" : "rejected";
            de.indices = det.selected_features;
            de.feature_score = separability;
            trace.events.push_back(de);

            bool remove = det.accepted || !cfg.remove_only_if_accepted;
            if (remove) {
                TraceEvent re;
                re.kind = TraceEvent::Kind::removal;
                re.round = round_no;
                re.n = n;
                re.cluster = j;
                re.indices = ec.positive_members;
                trace.events.push_back(re);
                std::vector<std::size_t> next_p;
                next_p.reserve(remaining_p.size());
                std::set_difference(remaining_p.begin(), remaining_p.end(), ec.positive_members.begin(),
                                    ec.positive_members.end(), std::back_inserter(next_p));
                remaining_p = std::move(next_p);
                removed_any = true;
            }

            if (det.accepted) model.detectors.push_back(std::move(det));
        }

        // Reset only when the round made progress; otherwise (possible only
        // under remove_only_if_accepted with every gate rejecting) keep
        // growing n so the loop still terminates.
        if (removed_any) {
            n = 1;
            current_sizes = {remaining_p.size() + all_n.size()};
            TraceEvent rs;
            rs.kind = TraceEvent::Kind::reset;
            rs.round = round_no;
            rs.n = n;
            trace.events.push_back(rs);
        }

        if (remaining_p.empty()) {
            // No positive instance left: no further cluster can qualify.
            break;
        }
    }

    TraceEvent done;
    done.kind = TraceEvent::Kind::done;
    done.round = round_no;
    done.n = n;
    done.size = model.detectors.size();
    done.p_count = remaining_p.size();
    trace.events.push_back(done);
    trace.final_remaining_positives = remaining_p;
    return {std::move(model), std::move(trace)};
}

}  // namespace ssi
