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

#ifndef CROWDCL_IO_HPP
#define CROWDCL_IO_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdcl/core.hpp"
#include "crowdcl/error.hpp"

namespace crowdcl {

static_assert(std::endian::native == std::endian::little,
              "binary file formats assume a little-endian host");

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

inline double parse_double(const std::string& text, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ParseError("cannot parse number '" + text + "'", line_no);
    }
}

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = {}) {
    std::ofstream out(path, mode);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << std::setprecision(17);
    return out;
}

inline std::ifstream open_in(const std::string& path, std::ios::openmode mode = {}) {
    std::ifstream in(path, mode);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    return in;
}

} // namespace detail

// -------------------------------------------------------------------------
// Annotations CSV: header "item_id,worker_id,label".
// -------------------------------------------------------------------------

inline AnnotationSet load_annotations(const std::string& path, const LabelSpace& space) {
    auto in = detail::open_in(path);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty annotations file", 1);
    ++line_no;
    if (detail::strip_cr(line) != "item_id,worker_id,label")
        throw ParseError("expected header 'item_id,worker_id,label'", line_no);

    std::vector<AnnotationRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 3)
            throw ParseError("expected 3 fields, got " + std::to_string(fields.size()), line_no);
        if (fields[0].empty() || fields[1].empty())
            throw ParseError("empty item or worker id", line_no);
        double value = detail::parse_double(fields[2], line_no);
        records.push_back({fields[0], fields[1], value});
    }
    return AnnotationSet(space, records);
}

inline void save_annotations(const std::string& path, const AnnotationSet& ann) {
    auto out = detail::open_out(path);
    out << "item_id,worker_id,label\n";
    for (const auto& rec : ann.records())
        out << ann.item_ids()[static_cast<std::size_t>(rec.item)] << ','
            << ann.worker_ids()[static_cast<std::size_t>(rec.worker)] << ',' << rec.value << '\n';
}

// -------------------------------------------------------------------------
// Features: CSV with header "item_id,f0,...,f{D-1}", or binary "CFM1".
// The binary layout is magic 'CFM1', u32 N, u32 D (little endian), then N*D
// doubles row-major. Item ids travel in a "<path>.ids" sidecar, one per line.
// -------------------------------------------------------------------------

inline FeatureMatrix load_features_csv(const std::string& path) {
    auto in = detail::open_in(path);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty features file", 1);
    ++line_no;
    auto header = detail::split_csv_line(detail::strip_cr(line));
    if (header.size() < 2 || header[0] != "item_id")
        throw ParseError("expected header 'item_id,f0,...'", line_no);
    for (std::size_t d = 1; d < header.size(); ++d)
        if (header[d] != "f" + std::to_string(d - 1))
            throw ParseError("expected feature column 'f" + std::to_string(d - 1) + "'", line_no);
    const auto dim = header.size() - 1;

    std::vector<std::string> ids;
    std::vector<double> data;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != dim + 1)
            throw ParseError("expected " + std::to_string(dim + 1) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        ids.push_back(fields[0]);
        for (std::size_t d = 1; d < fields.size(); ++d)
            data.push_back(detail::parse_double(fields[d], line_no));
    }
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t d = 0; d < dim; ++d)
            rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = data[i * dim + d];
    return FeatureMatrix(std::move(ids), std::move(rows));
}

inline void save_features_csv(const std::string& path, const FeatureMatrix& features) {
    auto out = detail::open_out(path);
    out << "item_id";
    for (int d = 0; d < features.dim(); ++d) out << ",f" << d;
    out << '\n';
    for (int i = 0; i < features.size(); ++i) {
        out << features.item_ids()[static_cast<std::size_t>(i)];
        for (int d = 0; d < features.dim(); ++d) out << ',' << features.rows()(i, d);
        out << '\n';
    }
}

inline void save_features_binary(const std::string& path, const FeatureMatrix& features) {
    auto out = detail::open_out(path, std::ios::binary);
    out.write("CFM1", 4);
    const auto n = static_cast<std::uint32_t>(features.size());
    const auto d = static_cast<std::uint32_t>(features.dim());
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&d), 4);
    for (int i = 0; i < features.size(); ++i)
        for (int c = 0; c < features.dim(); ++c) {
            double v = features.rows()(i, c);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
    auto ids = detail::open_out(path + ".ids");
    for (const auto& id : features.item_ids()) ids << id << '\n';
}

inline FeatureMatrix load_features_binary(const std::string& path, std::vector<std::string> item_ids) {
    auto in = detail::open_in(path, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "CFM1", 4) != 0)
        throw ParseError("bad magic bytes, expected CFM1", 1);
    std::uint32_t n = 0, d = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&d), 4);
    if (!in) throw ParseError("truncated feature header", 1);
    if (item_ids.size() != n)
        throw DomainError("feature file has " + std::to_string(n) + " rows but " +
                          std::to_string(item_ids.size()) + " item ids were supplied");
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t c = 0; c < d; ++c) {
            double v;
            in.read(reinterpret_cast<char*>(&v), 8);
            if (!in) throw ParseError("truncated feature data", 1);
            rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
        }
    return FeatureMatrix(std::move(item_ids), std::move(rows));
}

/// Auto-detecting loader: CFM1 magic selects the binary reader (ids from the
/// "<path>.ids" sidecar), anything else is parsed as CSV.
inline FeatureMatrix load_features(const std::string& path) {
    {
        auto in = detail::open_in(path, std::ios::binary);
        char magic[4] = {0, 0, 0, 0};
        in.read(magic, 4);
        if (in && std::memcmp(magic, "CFM1", 4) == 0) {
            auto ids_in = detail::open_in(path + ".ids");
            std::vector<std::string> ids;
            std::string line;
            while (std::getline(ids_in, line)) {
                line = detail::strip_cr(line);
                if (!line.empty()) ids.push_back(line);
            }
            return load_features_binary(path, std::move(ids));
        }
    }
    return load_features_csv(path);
}

// -------------------------------------------------------------------------
// Splits JSON: {"train": [...], "dev": [...], "test": [...]}.
// -------------------------------------------------------------------------

inline DatasetSplit load_split(const std::string& path) {
    auto in = detail::open_in(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid split JSON: ") + e.what(), 1);
    }
    DatasetSplit split;
    for (auto [key, target] :
         {std::pair{"train", &split.train}, {"dev", &split.dev}, {"test", &split.test}}) {
        if (!j.contains(key) || !j[key].is_array())
            throw ParseError(std::string("split JSON needs an array under '") + key + "'", 1);
        for (const auto& v : j[key]) target->push_back(v.get<std::string>());
        std::sort(target->begin(), target->end());
    }
    split.validate();
    return split;
}

inline void save_split(const std::string& path, const DatasetSplit& split) {
    nlohmann::json j;
    j["train"] = split.train;
    j["dev"] = split.dev;
    j["test"] = split.test;
    auto out = detail::open_out(path);
    out << j.dump(2) << '\n';
}

} // namespace crowdcl

#endif
