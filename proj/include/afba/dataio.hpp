#pragma once

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "afba/errors.hpp"

namespace afba {

struct SparseFeature {
    std::int64_t index = 0;  // 1-based
    double value = 0.0;
};

struct SparseSample {
    int label = 0;  // -1 or +1 after mapping
    std::vector<SparseFeature> features;
};

// Sparse labeled dataset in the usual "label idx:val idx:val ..." form.
// num_features is the largest feature index seen (or inherited from a
// parent set when this is one side of a split).
struct SparseDataset {
    std::vector<SparseSample> samples;
    std::int64_t num_features = 0;
};

namespace detail {

inline bool parse_full_double(const char* s, double& out) {
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s, &end);
    return end != s && *end == '\0' && errno != ERANGE && std::isfinite(out);
}

inline bool parse_full_int(const char* s, std::int64_t& out) {
    errno = 0;
    char* end = nullptr;
    out = std::strtoll(s, &end, 10);
    return end != s && *end == '\0' && errno != ERANGE;
}

}  // namespace detail

// Parses the stream; empty lines are skipped, a trailing '\r' is stripped
// so CRLF files work. Raw labels may be any finite numbers as long as at
// most two distinct values appear; the smaller maps to -1 and the larger
// to +1, which leaves files already using -1/+1 unchanged. Malformed
// tokens, feature indices below 1, and indices that fail to increase
// within a line all raise ParseError with the offending line number.
inline SparseDataset parse_libsvm(std::istream& in) {
    SparseDataset ds;
    std::vector<double> raw_labels;
    std::vector<double> distinct;
    std::string line, token;
    long long line_no = 0;
    long long first_sample_line = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (first_sample_line == 0) first_sample_line = line_no;

        std::istringstream fields(line);
        fields >> token;
        double raw = 0.0;
        if (!detail::parse_full_double(token.c_str(), raw))
            throw ParseError(line_no, "bad label '" + token + "'");
        if (std::find(distinct.begin(), distinct.end(), raw) == distinct.end()) {
            distinct.push_back(raw);
            if (distinct.size() > 2)
                throw ParseError(line_no, "more than two distinct labels in the file");
        }
        raw_labels.push_back(raw);

        SparseSample sample;
        std::int64_t prev_index = 0;
        while (fields >> token) {
            const std::size_t colon = token.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == token.size())
                throw ParseError(line_no, "bad feature token '" + token + "'");
            std::int64_t index = 0;
            double value = 0.0;
            if (!detail::parse_full_int(token.substr(0, colon).c_str(), index))
                throw ParseError(line_no, "bad feature index in '" + token + "'");
            if (!detail::parse_full_double(token.substr(colon + 1).c_str(), value))
                throw ParseError(line_no, "bad feature value in '" + token + "'");
            if (index < 1)
                throw ParseError(line_no, "feature index must be >= 1, got " + std::to_string(index));
            if (index <= prev_index)
                throw ParseError(line_no, "feature indices must increase, got " +
                                              std::to_string(index) + " after " +
                                              std::to_string(prev_index));
            prev_index = index;
            sample.features.push_back(SparseFeature{index, value});
            ds.num_features = std::max(ds.num_features, index);
        }
        ds.samples.push_back(std::move(sample));
    }

    // Map raw labels onto -1/+1. A single distinct value is accepted only
    // if it already is -1 or +1.
    std::sort(distinct.begin(), distinct.end());
    if (distinct.size() == 1 && distinct[0] != -1.0 && distinct[0] != 1.0)
        throw ParseError(first_sample_line,
                         "single label value is neither -1 nor +1; cannot infer classes");
    for (std::size_t i = 0; i < raw_labels.size(); ++i)
        ds.samples[i].label = (distinct.size() == 2 && raw_labels[i] == distinct[0]) ||
                                      (distinct.size() == 1 && raw_labels[i] == -1.0)
                                  ? -1
                                  : 1;
    return ds;
}

inline SparseDataset parse_libsvm_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);
    return parse_libsvm(in);
}

// Inverse of the parser up to formatting: "%.17g" keeps every value
// bit-exact through a round trip.
inline void write_libsvm(std::ostream& out, const SparseDataset& ds) {
    char buf[48];
    for (const SparseSample& s : ds.samples) {
        out << (s.label < 0 ? "-1" : "+1");
        for (const SparseFeature& f : s.features) {
            std::snprintf(buf, sizeof buf, " %lld:%.17g", static_cast<long long>(f.index),
                          f.value);
            out << buf;
        }
        out << '\n';
    }
}

// Deterministic train/test split. Seed 0 keeps file order (first
// train_count lines become the training set); any other seed shuffles
// with an explicit Fisher-Yates pass so the permutation is reproducible
// across standard libraries. Both halves inherit num_features from the
// parent, so feature dimensions stay consistent even when the test half
// happens to contain the largest index.
inline std::pair<SparseDataset, SparseDataset> split(const SparseDataset& ds,
                                                     std::int64_t train_count,
                                                     std::uint64_t seed) {
    const std::int64_t n = static_cast<std::int64_t>(ds.samples.size());
    if (train_count <= 0 || train_count >= n)
        throw std::invalid_argument("split: train_count must lie strictly between 0 and " +
                                    std::to_string(n));
    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), std::int64_t{0});
    if (seed != 0) {
        std::mt19937_64 gen(seed);
        for (std::int64_t i = n - 1; i > 0; --i) {
            const std::int64_t j = static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(i + 1));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
    }
    SparseDataset train, test;
    train.num_features = test.num_features = ds.num_features;
    train.samples.reserve(static_cast<std::size_t>(train_count));
    test.samples.reserve(static_cast<std::size_t>(n - train_count));
    for (std::int64_t i = 0; i < n; ++i) {
        const SparseSample& s = ds.samples[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        (i < train_count ? train : test).samples.push_back(s);
    }
    return {std::move(train), std::move(test)};
}

}  // namespace afba
