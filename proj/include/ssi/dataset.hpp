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
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ssi/errors.hpp"
#include "ssi/format.hpp"

namespace ssi {

enum class Label : int { negative = 0, positive = 1 };

using FeatureVector = std::vector<double>;

/// One labeled instance, keyed to the subject (bag) it belongs to.
struct Instance {
    std::string subject_id;
    Label label = Label::negative;
    FeatureVector features;
};

/// Labeled instance data. Instance order is stable: the index into
/// `instances` is the canonical identity used everywhere downstream.
struct Dataset {
    std::vector<Instance> instances;
    std::size_t dim = 0;
    std::vector<std::string> feature_names;

    std::size_t size() const { return instances.size(); }

    std::vector<Label> labels() const {
        std::vector<Label> out;
        out.reserve(instances.size());
        for (const auto& inst : instances) out.push_back(inst.label);
        return out;
    }
};

/// Per-feature z-scoring parameters. Stddev entries are floored so constant
/// features do not divide by zero.
struct StandardizationParams {
    std::vector<double> mean;
    std::vector<double> stddev;
};

inline constexpr double kStddevFloor = 1e-12;

namespace detail {

inline bool parse_finite_cell(std::string_view cell, double& out) {
    return parse_double(trim(cell), out);
}

[[noreturn]] inline void csv_error(const std::string& path, std::size_t row,
                                   const std::string& column, const std::string& what) {
    throw DataError(path + ": row " + std::to_string(row) + ", column \"" + column + "\": " + what);
}

}  // namespace detail

/// Loads a dataset from a comma-separated file with header
/// `subject_id,label,<name1>,...`. Labels are 1 (positive) or 0 (negative).
/// Row order is preserved; rows are numbered from 1 (the header is row 0)
/// in error messages.
inline Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open file");

    std::string line;
    std::size_t row = 0;
    // Header.
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    auto header = split(trim(line), ',');
    if (header.size() < 3)
        throw DataError(path + ": header must be subject_id,label,<features...> (got " +
                        std::to_string(header.size()) + " columns)");
    if (trim(header[0]) != "subject_id")
        detail::csv_error(path, 0, "subject_id", "first header column must be \"subject_id\"");
    if (trim(header[1]) != "label")
        detail::csv_error(path, 0, "label", "second header column must be \"label\"");

    Dataset data;
    data.dim = header.size() - 2;
    for (std::size_t j = 2; j < header.size(); ++j) {
        std::string name(trim(header[j]));
        if (name.empty()) detail::csv_error(path, 0, "column " + std::to_string(j + 1), "empty feature name");
        if (std::find(data.feature_names.begin(), data.feature_names.end(), name) != data.feature_names.end())
            detail::csv_error(path, 0, name, "duplicate column name");
        data.feature_names.push_back(std::move(name));
    }

    while (std::getline(in, line)) {
        ++row;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        auto cells = split(sv, ',');
        if (cells.size() != header.size())
            throw DataError(path + ": row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " columns, got " + std::to_string(cells.size()));
        Instance inst;
        inst.subject_id = std::string(trim(cells[0]));
        if (inst.subject_id.empty()) detail::csv_error(path, row, "subject_id", "empty subject id");
        std::string_view label_cell = trim(cells[1]);
        if (label_cell == "1") {
            inst.label = Label::positive;
        } else if (label_cell == "0") {
            inst.label = Label::negative;
        } else {
            detail::csv_error(path, row, "label", "label must be 0 or 1, got \"" + std::string(label_cell) + "\"");
        }
        inst.features.resize(data.dim);
        for (std::size_t j = 0; j < data.dim; ++j) {
            if (!detail::parse_finite_cell(cells[j + 2], inst.features[j]))
                detail::csv_error(path, row, data.feature_names[j],
                                  "feature value must be a finite number, got \"" +
                                      std::string(trim(cells[j + 2])) + "\"");
        }
        data.instances.push_back(std::move(inst));
    }
    if (data.instances.empty()) throw DataError(path + ": no data rows");
    return data;
}

/// Writes a dataset in the same format load_csv reads. Numbers use shortest
/// round-trip formatting, so write/load is lossless.
inline void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(path + ": cannot open file for writing");
    out << "subject_id,label";
    for (const auto& name : data.feature_names) out << ',' << name;
    out << '\n';
    for (const auto& inst : data.instances) {
        out << inst.subject_id << ',' << (inst.label == Label::positive ? '1' : '0');
        for (double v : inst.features) out << ',' << format_double(v);
        out << '\n';
    }
    if (!out) throw DataError(path + ": write failed");
}

/// Per-feature mean and population standard deviation over the whole dataset.
inline StandardizationParams fit_standardizer(const Dataset& data) {
    if (data.instances.empty()) throw DataError("fit_standardizer: empty dataset");
    const std::size_t d = data.dim;
    const double n = static_cast<double>(data.instances.size());
    StandardizationParams p;
    p.mean.assign(d, 0.0);
    p.stddev.assign(d, 0.0);
    for (const auto& inst : data.instances)
        for (std::size_t j = 0; j < d; ++j) p.mean[j] += inst.features[j];
    for (std::size_t j = 0; j < d; ++j) p.mean[j] /= n;
    for (const auto& inst : data.instances)
        for (std::size_t j = 0; j < d; ++j) {
            double c = inst.features[j] - p.mean[j];
            p.stddev[j] += c * c;
        }
    for (std::size_t j = 0; j < d; ++j)
        p.stddev[j] = std::max(std::sqrt(p.stddev[j] / n), kStddevFloor);
    return p;
}

inline FeatureVector standardize_vector(const FeatureVector& x, const StandardizationParams& p) {
    if (x.size() != p.mean.size())
        throw DataError("standardize: dimension mismatch (vector " + std::to_string(x.size()) +
                        ", params " + std::to_string(p.mean.size()) + ")");
    FeatureVector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - p.mean[j]) / p.stddev[j];
    return out;
}

/// Returns a copy of the dataset with every feature z-scored. Order, labels
/// and subject ids are unchanged.
inline Dataset apply_standardizer(const Dataset& data, const StandardizationParams& p) {
    if (data.dim != p.mean.size() || data.dim != p.stddev.size())
        throw DataError("apply_standardizer: dimension mismatch (data " + std::to_string(data.dim) +
                        ", params " + std::to_string(p.mean.size()) + ")");
    Dataset out = data;
    for (auto& inst : out.instances)
        for (std::size_t j = 0; j < data.dim; ++j)
            inst.features[j] = (inst.features[j] - p.mean[j]) / p.stddev[j];
    return out;
}

/// Disjoint index sets of positive and negative instances, order-preserving.
struct LabelSplit {
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
};

inline LabelSplit split_by_label(const Dataset& data) {
    LabelSplit s;
    for (std::size_t i = 0; i < data.instances.size(); ++i) {
        if (data.instances[i].label == Label::positive)
            s.positives.push_back(i);
        else
            s.negatives.push_back(i);
    }
    return s;
}

/// A subject (bag) and the indices of its instances, within-group order
/// preserved.
struct SubjectGroup {
    std::string subject_id;
    Label label = Label::negative;
    std::vector<std::size_t> indices;
};

/// Groups instances by subject in order of first appearance. A subject whose
/// instances carry mixed labels is an error: a subject has one diagnosis.
inline std::vector<SubjectGroup> group_by_subject(const Dataset& data) {
    std::vector<SubjectGroup> groups;
    std::unordered_map<std::string, std::size_t> pos_of;
    pos_of.reserve(data.instances.size());
    for (std::size_t i = 0; i < data.instances.size(); ++i) {
        const auto& inst = data.instances[i];
        auto it = pos_of.find(inst.subject_id);
        if (it == pos_of.end()) {
            pos_of.emplace(inst.subject_id, groups.size());
            groups.push_back({inst.subject_id, inst.label, {i}});
        } else {
            SubjectGroup& g = groups[it->second];
            if (g.label != inst.label)
                throw DataError("subject \"" + inst.subject_id + "\" has mixed labels (instance " +
                                std::to_string(i) + ")");
            g.indices.push_back(i);
        }
    }
    return groups;
}

}  // namespace ssi
