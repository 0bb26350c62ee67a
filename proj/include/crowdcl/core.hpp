/*
 * Copyright 2026 The crowdcl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CROWDCL_CORE_HPP
#define CROWDCL_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "crowdcl/error.hpp"

namespace crowdcl {

enum class LabelKind { categorical, ordinal };

/// Describes the set of valid label values: a fixed list of named classes, or
/// an ordinal scale with integer levels 1..L. Real-valued scores inside the
/// ordinal range are accepted as well, so consensus values can be fed back in.
class LabelSpace {
public:
    static LabelSpace categorical(std::vector<std::string> class_names) {
        if (class_names.empty())
            throw DomainError("categorical label space needs at least one class");
        std::unordered_set<std::string> seen;
        for (const auto& name : class_names)
            if (!seen.insert(name).second)
                throw DomainError("duplicate class name '" + name + "'");
        LabelSpace s;
        s.kind_ = LabelKind::categorical;
        s.class_names_ = std::move(class_names);
        return s;
    }

    static LabelSpace ordinal(int num_levels) {
        if (num_levels < 2)
            throw DomainError("ordinal label space needs at least 2 levels");
        LabelSpace s;
        s.kind_ = LabelKind::ordinal;
        s.num_levels_ = num_levels;
        return s;
    }

    LabelKind kind() const { return kind_; }
    bool is_numeric() const { return kind_ == LabelKind::ordinal; }

    int num_classes() const {
        return kind_ == LabelKind::categorical ? static_cast<int>(class_names_.size())
                                               : num_levels_;
    }
    const std::vector<std::string>& class_names() const { return class_names_; }
    int num_levels() const { return num_levels_; }

    bool contains(double value) const {
        if (!std::isfinite(value)) return false;
        if (kind_ == LabelKind::categorical)
            return value == std::floor(value) && value >= 0.0 &&
                   value < static_cast<double>(class_names_.size());
        return value >= 1.0 && value <= static_cast<double>(num_levels_);
    }

    /// Dense class index of a label value: the class index itself for
    /// categorical spaces, the nearest level minus one for ordinal ones.
    int class_of(double value) const {
        if (kind_ == LabelKind::categorical) return static_cast<int>(value);
        int level = static_cast<int>(std::lround(value));
        level = std::clamp(level, 1, num_levels_);
        return level - 1;
    }

private:
    LabelSpace() = default;
    LabelKind kind_ = LabelKind::ordinal;
    std::vector<std::string> class_names_;
    int num_levels_ = 0;
};

struct AnnotationRecord {
    std::string item_id;
    std::string worker_id;
    double value = 0.0;
};

/// Sparse item-by-worker label matrix. Items and workers get dense indices in
/// first-appearance order; the object is immutable after construction.
class AnnotationSet {
public:
    struct Entry {
        int worker;
        double value;
    };
    struct Flat {
        int item;
        int worker;
        double value;
    };

    AnnotationSet(LabelSpace space, const std::vector<AnnotationRecord>& records)
        : space_(std::move(space)) {
        std::unordered_set<std::string> pairs;
        pairs.reserve(records.size());
        for (const auto& rec : records) {
            if (!space_.contains(rec.value))
                throw DomainError("label " + std::to_string(rec.value) +
                                  " is not valid for item '" + rec.item_id + "'");
            std::string key = rec.item_id + '\x1f' + rec.worker_id;
            if (!pairs.insert(std::move(key)).second)
                throw DuplicateError("duplicate annotation for item '" + rec.item_id +
                                     "' by worker '" + rec.worker_id + "'");
            int item = intern(rec.item_id, item_ids_, item_index_);
            int worker = intern(rec.worker_id, worker_ids_, worker_index_);
            records_.push_back({item, worker, rec.value});
        }
        by_item_.resize(item_ids_.size());
        for (const auto& rec : records_)
            by_item_[static_cast<std::size_t>(rec.item)].push_back({rec.worker, rec.value});
    }

    const LabelSpace& label_space() const { return space_; }
    int num_items() const { return static_cast<int>(item_ids_.size()); }
    int num_workers() const { return static_cast<int>(worker_ids_.size()); }
    std::size_t num_records() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    const std::vector<std::string>& item_ids() const { return item_ids_; }
    const std::vector<std::string>& worker_ids() const { return worker_ids_; }
    const std::vector<Flat>& records() const { return records_; }

    int item_index(const std::string& id) const {
        auto it = item_index_.find(id);
        return it == item_index_.end() ? -1 : it->second;
    }
    int worker_index(const std::string& id) const {
        auto it = worker_index_.find(id);
        return it == worker_index_.end() ? -1 : it->second;
    }

    const std::vector<Entry>& annotations_of(int item) const {
        return by_item_[static_cast<std::size_t>(item)];
    }
    /// N_i: number of annotations available for an item.
    int annotation_count(int item) const {
        return static_cast<int>(by_item_[static_cast<std::size_t>(item)].size());
    }

    /// Copy restricted to the given items (order of appearance preserved).
    AnnotationSet restrict_to(const std::unordered_set<std::string>& items) const {
        std::vector<AnnotationRecord> kept;
        for (const auto& rec : records_) {
            const std::string& id = item_ids_[static_cast<std::size_t>(rec.item)];
            if (items.count(id))
                kept.push_back({id, worker_ids_[static_cast<std::size_t>(rec.worker)], rec.value});
        }
        return AnnotationSet(space_, kept);
    }

private:
    static int intern(const std::string& id, std::vector<std::string>& ids,
                      std::unordered_map<std::string, int>& index) {
        auto it = index.find(id);
        if (it != index.end()) return it->second;
        int next = static_cast<int>(ids.size());
        ids.push_back(id);
        index.emplace(id, next);
        return next;
    }

    LabelSpace space_;
    std::vector<std::string> item_ids_;
    std::vector<std::string> worker_ids_;
    std::unordered_map<std::string, int> item_index_;
    std::unordered_map<std::string, int> worker_index_;
    std::vector<Flat> records_;
    std::vector<std::vector<Entry>> by_item_;
};

/// Dense per-item feature rows, one row per item id.
class FeatureMatrix {
public:
    FeatureMatrix(std::vector<std::string> item_ids, Eigen::MatrixXd rows)
        : item_ids_(std::move(item_ids)), rows_(std::move(rows)) {
        if (static_cast<Eigen::Index>(item_ids_.size()) != rows_.rows())
            throw DomainError("feature matrix row count does not match item id count");
        if (rows_.cols() < 1) throw DomainError("feature matrix needs at least one column");
        if (!rows_.allFinite()) throw DomainError("feature matrix contains non-finite entries");
        for (std::size_t i = 0; i < item_ids_.size(); ++i)
            if (!index_.emplace(item_ids_[i], static_cast<int>(i)).second)
                throw DuplicateError("duplicate item id '" + item_ids_[i] + "' in feature matrix");
    }

    int size() const { return static_cast<int>(item_ids_.size()); }
    int dim() const { return static_cast<int>(rows_.cols()); }
    const std::vector<std::string>& item_ids() const { return item_ids_; }
    const Eigen::MatrixXd& rows() const { return rows_; }

    int index_of(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? -1 : it->second;
    }

    /// Rows for the given ids, in the given order. Missing ids are an error.
    Eigen::MatrixXd gather(const std::vector<std::string>& ids) const {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(ids.size()), rows_.cols());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            int r = index_of(ids[i]);
            if (r < 0) throw DomainError("no feature row for item '" + ids[i] + "'");
            out.row(static_cast<Eigen::Index>(i)) = rows_.row(r);
        }
        return out;
    }

private:
    std::vector<std::string> item_ids_;
    Eigen::MatrixXd rows_;
    std::unordered_map<std::string, int> index_;
};

/// Train/dev/test partition. Id lists are kept sorted.
struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> dev;
    std::vector<std::string> test;

    void validate() const {
        std::unordered_set<std::string> seen;
        for (const auto* part : {&train, &dev, &test})
            for (const auto& id : *part)
                if (!seen.insert(id).second)
                    throw DomainError("item '" + id + "' appears in more than one split");
    }
};

struct SplitFractions {
    double train = 0.6;
    double dev = 0.2;
    double test = 0.2;
};

/// Deterministic random partition. Sizes are floor-rounded for dev and test,
/// with the remainder assigned to train.
inline DatasetSplit random_split(std::vector<std::string> item_ids, const SplitFractions& fractions,
                                 std::uint64_t seed) {
    const double sum = fractions.train + fractions.dev + fractions.test;
    if (fractions.train <= 0.0 || fractions.dev <= 0.0 || fractions.test <= 0.0)
        throw DomainError("split fractions must be positive");
    if (std::abs(sum - 1.0) > 1e-9)
        throw DomainError("split fractions must sum to 1");

    std::sort(item_ids.begin(), item_ids.end());
    const auto n = item_ids.size();
    std::mt19937_64 rng(seed);
    std::shuffle(item_ids.begin(), item_ids.end(), rng);

    const auto n_dev = static_cast<std::size_t>(std::floor(fractions.dev * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::floor(fractions.test * static_cast<double>(n)));
    if (n_dev + n_test > n) throw DomainError("split fractions leave no training items");
    const auto n_train = n - n_dev - n_test;
    if (n_train == 0 || n_dev == 0 || n_test == 0)
        throw DomainError("requested split leaves an empty partition");

    DatasetSplit split;
    split.train.assign(item_ids.begin(), item_ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.dev.assign(item_ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                     item_ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_dev));
    split.test.assign(item_ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_dev),
                      item_ids.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.dev.begin(), split.dev.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

} // namespace crowdcl

#endif
