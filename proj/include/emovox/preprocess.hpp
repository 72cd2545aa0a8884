#pragma once

#include "emovox/common.hpp"
#include "emovox/ravdess.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace emovox {

/// Sorted class names; a label is an index into `classes`.
struct LabelCodec {
    std::vector<std::string> classes;

    int encode(const std::string& name) const;
    const std::string& decode(int label) const;
    int size() const { return static_cast<int>(classes.size()); }

    bool operator==(const LabelCodec&) const = default;
};

std::pair<LabelCodec, std::vector<int>> encode_labels(const std::vector<std::string>& labels);

/// Feature rows with aligned integer labels and clip metadata.
struct LabeledDataset {
    Matrix X;
    std::vector<int> y;
    std::vector<ClipMetadata> meta;
    LabelCodec codec;

    std::size_t rows() const { return y.size(); }
    int n_classes() const { return codec.size(); }
    std::vector<std::size_t> class_counts() const;
};

LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> rows);

/// Builds a dataset labelled by emotion name, the codec sorted lexicographically.
LabeledDataset make_emotion_dataset(Matrix X, std::vector<ClipMetadata> meta);

/// features.csv: header `path,channel,emotion,actor,f000..fNNN`, one row per clip.
void write_features_csv(const std::filesystem::path& path, const Matrix& X, const std::vector<ClipMetadata>& meta);
std::pair<Matrix, std::vector<ClipMetadata>> read_features_csv(const std::filesystem::path& path);

enum class ScalerKind { none, standard, minmax };

std::string_view to_string(ScalerKind kind);
ScalerKind scaler_from_string(std::string_view s);

/// Per-column statistics: standard stores (mean, population std), minmax (min, max).
struct ScalerParams {
    ScalerKind kind = ScalerKind::none;
    std::vector<double> first;
    std::vector<double> second;

    bool operator==(const ScalerParams&) const = default;
};

ScalerParams fit_scaler(const Matrix& X, ScalerKind kind);

/// Degenerate columns (zero std, or max == min) map to 0.
Matrix apply_scaler(const ScalerParams& params, const Matrix& X);
Matrix invert_scaler(const ScalerParams& params, const Matrix& X);

/// Stratified partition with per-class test counts chosen by largest
/// remainder so the total is round(n * test_fraction). Rows keep input order.
std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& ds, double test_fraction,
                                                           std::uint64_t seed);

/// Row indices of the test side of stratified_split (sorted).
std::vector<std::size_t> stratified_test_rows(std::span<const int> y, int n_classes, double test_fraction,
                                              std::uint64_t seed);

/// Oversamples every class to the majority count by interpolating towards one
/// of min(k, count-1) same-class nearest neighbours. Originals come first.
LabeledDataset smote(const LabeledDataset& ds, int k, std::uint64_t seed);

}  // namespace emovox
