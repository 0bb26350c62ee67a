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

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "crowdcl/core.hpp"
#include "crowdcl/error.hpp"
#include "crowdcl/io.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace crowdcl;
using testutil::TempDir;

namespace {

AnnotationSet small_categorical() {
    const LabelSpace space = LabelSpace::categorical({"neutral", "happy", "sad"});
    return AnnotationSet(space, {{"a", "w1", 0},
                                 {"a", "w2", 0},
                                 {"a", "w3", 1},
                                 {"b", "w1", 1},
                                 {"b", "w2", 2}});
}

} // namespace

TEST(LabelSpace, CategoricalFactoryValidates) {
    EXPECT_THROW(LabelSpace::categorical({}), DomainError);
    EXPECT_THROW(LabelSpace::categorical({"a", "a"}), DomainError);
    const LabelSpace s = LabelSpace::categorical({"x", "y", "z"});
    EXPECT_EQ(s.num_classes(), 3);
    EXPECT_FALSE(s.is_numeric());
    EXPECT_TRUE(s.contains(0));
    EXPECT_TRUE(s.contains(2));
    EXPECT_FALSE(s.contains(3));
    EXPECT_FALSE(s.contains(-1));
    EXPECT_FALSE(s.contains(0.5));
    EXPECT_EQ(s.class_of(2.0), 2);
}

TEST(LabelSpace, OrdinalFactoryValidates) {
    EXPECT_THROW(LabelSpace::ordinal(1), DomainError);
    const LabelSpace s = LabelSpace::ordinal(7);
    EXPECT_EQ(s.num_levels(), 7);
    EXPECT_EQ(s.num_classes(), 7);
    EXPECT_TRUE(s.is_numeric());
    EXPECT_TRUE(s.contains(1));
    EXPECT_TRUE(s.contains(7));
    EXPECT_TRUE(s.contains(3.5));
    EXPECT_FALSE(s.contains(0.5));
    EXPECT_FALSE(s.contains(7.5));
    EXPECT_EQ(s.class_of(1.0), 0);
    EXPECT_EQ(s.class_of(7.0), 6);
    EXPECT_EQ(s.class_of(3.4), 2); // nearest level
}

TEST(AnnotationSet, CountsPerItem) {
    const AnnotationSet ann = small_categorical();
    EXPECT_EQ(ann.num_items(), 2);
    EXPECT_EQ(ann.num_workers(), 3);
    EXPECT_EQ(ann.num_records(), 5u);
    EXPECT_EQ(ann.annotation_count(ann.item_index("a")), 3);
    EXPECT_EQ(ann.annotation_count(ann.item_index("b")), 2);
}

TEST(AnnotationSet, RejectsInvalidLabel) {
    const LabelSpace space = LabelSpace::ordinal(7);
    EXPECT_THROW(AnnotationSet(space, {{"a", "w1", 9}}), DomainError);
}

TEST(AnnotationSet, RejectsDuplicatePair) {
    const LabelSpace space = LabelSpace::categorical({"x", "y"});
    EXPECT_THROW(AnnotationSet(space, {{"a", "w1", 0}, {"a", "w1", 1}}), DuplicateError);
}

TEST(AnnotationSet, FirstAppearanceIndexing) {
    const AnnotationSet ann = small_categorical();
    EXPECT_EQ(ann.item_ids()[0], "a");
    EXPECT_EQ(ann.item_ids()[1], "b");
    EXPECT_EQ(ann.worker_ids()[0], "w1");
    EXPECT_EQ(ann.item_index("missing"), -1);
    EXPECT_EQ(ann.worker_index("w3"), 2);
}

TEST(AnnotationSet, RestrictToSubset) {
    const AnnotationSet ann = small_categorical();
    const AnnotationSet sub = ann.restrict_to({"b"});
    EXPECT_EQ(sub.num_items(), 1);
    EXPECT_EQ(sub.item_ids()[0], "b");
    EXPECT_EQ(sub.num_records(), 2u);
}

TEST(FeatureMatrix, ValidatesShapeAndIds) {
    Eigen::MatrixXd rows(2, 3);
    rows << 1, 2, 3, 4, 5, 6;
    const FeatureMatrix fm({"a", "b"}, rows);
    EXPECT_EQ(fm.size(), 2);
    EXPECT_EQ(fm.dim(), 3);
    EXPECT_EQ(fm.index_of("b"), 1);
    EXPECT_EQ(fm.index_of("zzz"), -1);

    EXPECT_THROW(FeatureMatrix({"a"}, rows), DomainError);
    EXPECT_THROW(FeatureMatrix({"a", "a"}, rows), DuplicateError);
    Eigen::MatrixXd bad = rows;
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(FeatureMatrix({"a", "b"}, bad), DomainError);
}

TEST(FeatureMatrix, GatherReordersRows) {
    Eigen::MatrixXd rows(3, 2);
    rows << 1, 2, 3, 4, 5, 6;
    const FeatureMatrix fm({"a", "b", "c"}, rows);
    const Eigen::MatrixXd sub = fm.gather({"c", "a"});
    EXPECT_DOUBLE_EQ(sub(0, 0), 5);
    EXPECT_DOUBLE_EQ(sub(1, 0), 1);
    EXPECT_THROW(fm.gather({"nope"}), DomainError);
}

TEST(RandomSplit, SizesAreFloorRoundedWithRemainderToTrain) {
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("x" + std::to_string(i));
    const DatasetSplit split = random_split(ids, {0.6, 0.2, 0.2}, 1);
    EXPECT_EQ(split.train.size(), 6u);
    EXPECT_EQ(split.dev.size(), 2u);
    EXPECT_EQ(split.test.size(), 2u);
}

TEST(RandomSplit, DeterministicAndPartitioning) {
    std::vector<std::string> ids;
    for (int i = 0; i < 37; ++i) ids.push_back("x" + std::to_string(i));
    const DatasetSplit s1 = random_split(ids, {0.6, 0.2, 0.2}, 42);
    const DatasetSplit s2 = random_split(ids, {0.6, 0.2, 0.2}, 42);
    EXPECT_EQ(s1.train, s2.train);
    EXPECT_EQ(s1.dev, s2.dev);
    EXPECT_EQ(s1.test, s2.test);

    std::vector<std::string> all = s1.train;
    all.insert(all.end(), s1.dev.begin(), s1.dev.end());
    all.insert(all.end(), s1.test.begin(), s1.test.end());
    std::sort(all.begin(), all.end());
    std::vector<std::string> sorted_ids = ids;
    std::sort(sorted_ids.begin(), sorted_ids.end());
    EXPECT_EQ(all, sorted_ids);
    EXPECT_NO_THROW(s1.validate());
}

TEST(RandomSplit, EmptyPartRejected) {
    std::vector<std::string> ids = {"a", "b", "c", "d"};
    EXPECT_THROW(random_split(ids, {0.5, 0.5, 0.0}, 1), DomainError);
    EXPECT_THROW(random_split(ids, {0.4, 0.4, 0.4}, 1), DomainError);
}

TEST(AnnotationsIo, RoundTrip) {
    TempDir tmp;
    const AnnotationSet ann = small_categorical();
    save_annotations(tmp.path("ann.csv"), ann);
    const AnnotationSet back =
        load_annotations(tmp.path("ann.csv"), LabelSpace::categorical({"neutral", "happy", "sad"}));
    EXPECT_EQ(back.num_items(), ann.num_items());
    EXPECT_EQ(back.num_workers(), ann.num_workers());
    EXPECT_EQ(back.num_records(), ann.num_records());
    for (std::size_t r = 0; r < ann.records().size(); ++r) {
        EXPECT_EQ(back.records()[r].item, ann.records()[r].item);
        EXPECT_EQ(back.records()[r].worker, ann.records()[r].worker);
        EXPECT_DOUBLE_EQ(back.records()[r].value, ann.records()[r].value);
    }
}

TEST(AnnotationsIo, ParseErrorsCarryLineNumbers) {
    TempDir tmp;
    {
        std::ofstream os(tmp.path("bad_header.csv"));
        os << "wrong,header,names\na,w1,0\n";
    }
    EXPECT_THROW(load_annotations(tmp.path("bad_header.csv"), LabelSpace::ordinal(7)), ParseError);
    {
        std::ofstream os(tmp.path("bad_row.csv"));
        os << "item_id,worker_id,label\na,w1\n";
    }
    try {
        load_annotations(tmp.path("bad_row.csv"), LabelSpace::ordinal(7));
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    {
        std::ofstream os(tmp.path("bad_label.csv"));
        os << "item_id,worker_id,label\na,w1,9\n";
    }
    EXPECT_THROW(load_annotations(tmp.path("bad_label.csv"), LabelSpace::ordinal(7)), DomainError);
}

TEST(FeaturesIo, CsvRoundTrip) {
    TempDir tmp;
    Eigen::MatrixXd rows(2, 3);
    rows << 0.25, -1.5, 3.125, 4.0, 5.5, -6.75;
    const FeatureMatrix fm({"a", "b"}, rows);
    save_features_csv(tmp.path("f.csv"), fm);
    const FeatureMatrix back = load_features(tmp.path("f.csv"));
    EXPECT_EQ(back.item_ids(), fm.item_ids());
    EXPECT_TRUE(back.rows().isApprox(fm.rows(), 0));
}

TEST(FeaturesIo, BinaryRoundTripAndSniffing) {
    TempDir tmp;
    Eigen::MatrixXd rows(3, 2);
    rows << 1.5, 2.25, -3.0, 0.0625, 1e-17, 12345.678901234567;
    const FeatureMatrix fm({"p", "q", "r"}, rows);
    save_features_binary(tmp.path("f.bin"), fm);
    const FeatureMatrix back = load_features(tmp.path("f.bin"));
    EXPECT_EQ(back.item_ids(), fm.item_ids());
    EXPECT_TRUE(back.rows().isApprox(fm.rows(), 0)); // bit-exact doubles
}

TEST(SplitIo, JsonRoundTrip) {
    TempDir tmp;
    DatasetSplit split;
    split.train = {"a", "b", "c"};
    split.dev = {"d"};
    split.test = {"e", "f"};
    save_split(tmp.path("s.json"), split);
    const DatasetSplit back = load_split(tmp.path("s.json"));
    EXPECT_EQ(back.train, split.train);
    EXPECT_EQ(back.dev, split.dev);
    EXPECT_EQ(back.test, split.test);
}

TEST(SplitIo, OverlapRejected) {
    DatasetSplit split;
    split.train = {"a", "b"};
    split.dev = {"b"};
    split.test = {"c"};
    EXPECT_THROW(split.validate(), DomainError);
}
