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
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ssi/dataset.hpp"
#include "ssi/errors.hpp"

namespace ssi {

enum class ClassifierKind { linear, rbf };
enum class ClassWeighting { balanced, none };

/// Hyperparameters for one base classifier. The rbf kind maps inputs through
/// the kernel feature map k(x, r_i) = exp(-gamma * ||x - r_i||^2) against the
/// training points before the logistic layer.
struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::rbf;
    double l2_lambda = 1e-3;
    double rbf_gamma = 0.5;
    double learning_rate = 0.1;
    std::size_t max_epochs = 2000;
    double tolerance = 1e-6;
    ClassWeighting class_weighting = ClassWeighting::none;
    std::uint64_t seed = 0;

    void validate() const {
        if (l2_lambda < 0.0) throw ConfigError("classifier: l2_lambda must be >= 0");
        if (kind == ClassifierKind::rbf && !(rbf_gamma > 0.0))
            throw ConfigError("classifier: rbf_gamma must be > 0 for the rbf kind");
        if (!(learning_rate > 0.0)) throw ConfigError("classifier: learning_rate must be > 0");
        if (max_epochs < 1) throw ConfigError("classifier: max_epochs must be >= 1");
        if (!(tolerance > 0.0)) throw ConfigError("classifier: tolerance must be > 0");
    }
};

/// Numerically stable logistic, exact over the full double range.
inline double sigmoid(double z) {
    if (z >= 0.0) {
        double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + e^t) without overflow.
inline double softplus(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

/// Kernel feature row for x against the reference points.
inline std::vector<double> kernel_features(const FeatureVector& x,
                                           const std::vector<FeatureVector>& references, double gamma) {
    std::vector<double> phi(references.size());
    for (std::size_t i = 0; i < references.size(); ++i)
        phi[i] = std::exp(-gamma * squared_distance(x, references[i]));
    return phi;
}

/// Class-weighted L2-regularized logistic loss over a fixed feature matrix:
///   L(theta, b) = (1/W) * sum_i w_i * softplus(-y~_i (theta.phi_i + b))
///                 + (lambda/2) ||theta||^2
/// with y~ in {-1,+1}, w_i the per-class weight, W the total weight. The
/// bias is not regularized. Exposed so the gradients can be checked against
/// finite differences.
class LogisticObjective {
public:
    LogisticObjective(std::vector<std::vector<double>> rows, std::vector<int> labels01, double weight_pos,
                      double weight_neg, double l2_lambda)
        : rows_(std::move(rows)),
          labels_(std::move(labels01)),
          weight_pos_(weight_pos),
          weight_neg_(weight_neg),
          l2_lambda_(l2_lambda) {
        if (rows_.empty() || rows_.size() != labels_.size())
            throw DataError("logistic objective: rows/labels size mismatch");
        dim_ = rows_[0].size();
        total_weight_ = 0.0;
        for (int y : labels_) total_weight_ += y == 1 ? weight_pos_ : weight_neg_;
    }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return rows_.size(); }
    double total_weight() const { return total_weight_; }

    double loss(const std::vector<double>& theta, double bias) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            double z = bias;
            for (std::size_t j = 0; j < dim_; ++j) z += theta[j] * rows_[i][j];
            double w = labels_[i] == 1 ? weight_pos_ : weight_neg_;
            acc += w * softplus(labels_[i] == 1 ? -z : z);
        }
        double reg = 0.0;
        for (double t : theta) reg += t * t;
        return acc / total_weight_ + 0.5 * l2_lambda_ * reg;
    }

    /// Analytic gradient; returns the gradient infinity norm over
    /// (theta, bias).
    double gradient(const std::vector<double>& theta, double bias, std::vector<double>& grad_theta,
                    double& grad_bias) const {
        grad_theta.assign(dim_, 0.0);
        grad_bias = 0.0;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            double z = bias;
            for (std::size_t j = 0; j < dim_; ++j) z += theta[j] * rows_[i][j];
            double w = labels_[i] == 1 ? weight_pos_ : weight_neg_;
            double residual = w * (sigmoid(z) - static_cast<double>(labels_[i]));
            for (std::size_t j = 0; j < dim_; ++j) grad_theta[j] += residual * rows_[i][j];
            grad_bias += residual;
        }
        double inf_norm = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) {
            grad_theta[j] = grad_theta[j] / total_weight_ + l2_lambda_ * theta[j];
            inf_norm = std::max(inf_norm, std::abs(grad_theta[j]));
        }
        grad_bias /= total_weight_;
        inf_norm = std::max(inf_norm, std::abs(grad_bias));
        return inf_norm;
    }

private:
    std::vector<std::vector<double>> rows_;
    std::vector<int> labels_;
    double weight_pos_;
    double weight_neg_;
    double l2_lambda_;
    double total_weight_;
    std::size_t dim_ = 0;
};

/// Per-class weights: "balanced" gives both classes equal total weight
/// (w_c = total / (2 * n_c)), "none" weighs every instance 1.
inline std::pair<double, double> class_weights(ClassWeighting weighting, std::size_t n_pos,
                                               std::size_t n_neg) {
    if (weighting == ClassWeighting::none) return {1.0, 1.0};
    double total = static_cast<double>(n_pos + n_neg);
    return {total / (2.0 * static_cast<double>(std::max<std::size_t>(1, n_pos))),
            total / (2.0 * static_cast<double>(std::max<std::size_t>(1, n_neg)))};
}

struct TrainingReport {
    double final_loss = 0.0;
    std::size_t epochs = 0;
    double train_sensitivity = 0.0;  // on the classifier's own positives at 0.5
    std::vector<double> loss_history;
};

/// A trained binary classifier with probability outputs in the open (0,1).
class TrainedClassifier {
public:
    TrainedClassifier() = default;

    static TrainedClassifier linear(std::vector<double> weights, double bias, TrainingReport report = {}) {
        TrainedClassifier m;
        m.kind_ = ClassifierKind::linear;
        m.weights_ = std::move(weights);
        m.bias_ = bias;
        m.report_ = std::move(report);
        return m;
    }

    static TrainedClassifier rbf(std::vector<FeatureVector> references, std::vector<double> coefficients,
                                 double gamma, double bias, TrainingReport report = {}) {
        if (references.size() != coefficients.size())
            throw InternalError("rbf classifier: references/coefficients size mismatch");
        TrainedClassifier m;
        m.kind_ = ClassifierKind::rbf;
        m.references_ = std::move(references);
        m.weights_ = std::move(coefficients);
        m.gamma_ = gamma;
        m.bias_ = bias;
        m.report_ = std::move(report);
        return m;
    }

    ClassifierKind kind() const { return kind_; }
    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }
    double gamma() const { return gamma_; }
    const std::vector<FeatureVector>& references() const { return references_; }
    const TrainingReport& report() const { return report_; }
    void set_report(TrainingReport r) { report_ = std::move(r); }

    std::size_t input_dim() const {
        if (kind_ == ClassifierKind::linear) return weights_.size();
        return references_.empty() ? 0 : references_[0].size();
    }

    /// Raw logit.
    double score(const FeatureVector& x) const {
        if (x.size() != input_dim())
            throw DataError("classifier: input dimension " + std::to_string(x.size()) + " != expected " +
                            std::to_string(input_dim()));
        double z = bias_;
        if (kind_ == ClassifierKind::linear) {
            for (std::size_t j = 0; j < weights_.size(); ++j) z += weights_[j] * x[j];
        } else {
            for (std::size_t i = 0; i < references_.size(); ++i)
                z += weights_[i] * std::exp(-gamma_ * squared_distance(x, references_[i]));
        }
        return z;
    }

    /// Probability of the positive class, clamped into the open interval.
    double predict_proba(const FeatureVector& x) const {
        double p = sigmoid(score(x));
        constexpr double lo = std::numeric_limits<double>::min();
        constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon();
        return p < lo ? lo : (p > hi ? hi : p);
    }

    bool decide(const FeatureVector& x, double threshold = 0.5) const { return predict_proba(x) >= threshold; }

private:
    ClassifierKind kind_ = ClassifierKind::linear;
    std::vector<double> weights_;  // linear weights, or dual coefficients per reference
    double bias_ = 0.0;
    double gamma_ = 0.0;
    std::vector<FeatureVector> references_;
    TrainingReport report_;
};

/// Fraction of `pos` the model flags at the threshold.
inline double sensitivity_on(const TrainedClassifier& model, const std::vector<FeatureVector>& pos,
                             double threshold) {
    if (pos.empty()) throw DataError("sensitivity_on: empty positive set");
    std::size_t hits = 0;
    for (const auto& x : pos)
        if (model.predict_proba(x) >= threshold) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pos.size());
}

/// Full-batch gradient descent on the class-weighted logistic loss, from
/// zero initialization. Stops when the gradient infinity norm drops below
/// the tolerance or after max_epochs. A loss increase beyond 1e-12 rejects
/// the configured learning rate.
inline TrainedClassifier train(const std::vector<FeatureVector>& pos, const std::vector<FeatureVector>& neg,
                               const ClassifierSpec& spec) {
    spec.validate();
    if (pos.empty()) throw DataError("train: empty positive class");
    if (neg.empty()) throw DataError("train: empty negative class");
    const std::size_t d = pos[0].size();
    for (const auto& x : pos)
        if (x.size() != d) throw DataError("train: mixed dimensions in positive class");
    for (const auto& x : neg)
        if (x.size() != d) throw DataError("train: mixed dimensions in negative class");

    std::vector<FeatureVector> inputs;
    inputs.reserve(pos.size() + neg.size());
    inputs.insert(inputs.end(), pos.begin(), pos.end());
    inputs.insert(inputs.end(), neg.begin(), neg.end());
    std::vector<int> labels(inputs.size(), 0);
    for (std::size_t i = 0; i < pos.size(); ++i) labels[i] = 1;

    std::vector<std::vector<double>> rows;
    rows.reserve(inputs.size());
    if (spec.kind == ClassifierKind::linear) {
        for (const auto& x : inputs) rows.push_back(x);
    } else {
        for (const auto& x : inputs) rows.push_back(kernel_features(x, inputs, spec.rbf_gamma));
    }

    auto [w_pos, w_neg] = class_weights(spec.class_weighting, pos.size(), neg.size());
    LogisticObjective objective(std::move(rows), std::move(labels), w_pos, w_neg, spec.l2_lambda);

    std::vector<double> theta(objective.dim(), 0.0);
    double bias = 0.0;
    std::vector<double> grad_theta;
    double grad_bias = 0.0;

    TrainingReport report;
    report.loss_history.reserve(std::min<std::size_t>(spec.max_epochs, 4096));
    double prev_loss = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 0; epoch < spec.max_epochs; ++epoch) {
        double loss = objective.loss(theta, bias);
        if (!std::isfinite(loss))
            throw ConfigError("train: loss became non-finite (learning rate " +
                              std::to_string(spec.learning_rate) + " diverged)");
        if (loss > prev_loss + 1e-12)
            throw ConfigError("train: loss increased at epoch " + std::to_string(epoch) +
                              "; learning rate " + std::to_string(spec.learning_rate) + " rejected");
        report.loss_history.push_back(loss);
        prev_loss = loss;
        double inf_norm = objective.gradient(theta, bias, grad_theta, grad_bias);
        if (inf_norm < spec.tolerance) break;
        for (std::size_t j = 0; j < theta.size(); ++j) theta[j] -= spec.learning_rate * grad_theta[j];
        bias -= spec.learning_rate * grad_bias;
        report.epochs = epoch + 1;
    }
    report.final_loss = objective.loss(theta, bias);
    if (!std::isfinite(report.final_loss))
        throw ConfigError("train: loss became non-finite (learning rate diverged)");

    TrainedClassifier model = spec.kind == ClassifierKind::linear
                                  ? TrainedClassifier::linear(std::move(theta), bias)
                                  : TrainedClassifier::rbf(std::move(inputs), std::move(theta),
                                                           spec.rbf_gamma, bias);
    report.train_sensitivity = sensitivity_on(model, pos, 0.5);
    model.set_report(std::move(report));
    return model;
}

}  // namespace ssi
