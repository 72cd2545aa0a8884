#pragma once

#include "emovox/augment.hpp"
#include "emovox/corpus.hpp"
#include "emovox/features.hpp"
#include "emovox/model.hpp"
#include "emovox/model_select.hpp"
#include "emovox/preprocess.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace emovox {

enum class Stage { scaling_comparison = 1, optimized = 2, augmented_smote = 3, channel_split = 4 };

std::string_view to_string(Stage stage);
Stage stage_from_int(int n);

struct ExperimentConfig {
    std::uint64_t seed = 42;
    int sample_rate = kDefaultSampleRate;
    int n_fft = 2048;
    int hop = 512;
    int n_mels = 128;
    int n_mfcc = 40;
    ScalerKind scaler = ScalerKind::standard;  // stages 2-4
    int search_n_iter = 10;
    int search_k = 3;
    double test_fraction = 0.2;
    std::vector<AugmentSpec> augment = default_augment_specs();
    bool smote = true;
    int smote_k = 5;
    std::optional<VocalChannel> channel;  // empty: all
    bool paper_faithful = false;
    int mlp_max_epochs = 200;
    std::vector<double> learning_curve_fractions = default_learning_curve_fractions();

    void validate() const;
    FeatureConfig feature_config() const;
    bool operator==(const ExperimentConfig&) const = default;
};

/// Search budget used for runs on the full corpus.
ExperimentConfig full_preset();

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Extracts one feature row per clip, in corpus order.
std::pair<Matrix, std::vector<ClipMetadata>> extract_corpus_features(const Corpus& corpus, const FeatureConfig& config,
                                                                     int jobs = 1);

struct StageInputs {
    LabeledDataset dataset;
    /// Feature rows of augmented copies; each source_path is "<original path>#<tag>".
    std::optional<LabeledDataset> augmented;
};

struct ModelRecord {
    std::string name;
    int stage = 0;
    ModelKind kind = ModelKind::svm;
    std::string scaler;
    std::string channel;  // all, speech or song
    bool augmented = false;
    bool smote = false;
    ModelParams params;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double cv_mean = 0.0;
    bool converged = true;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    std::map<std::string, std::string> artifacts;  // relative to the run directory
};

struct SearchRecord {
    std::string name;
    int stage = 0;
    ModelKind kind = ModelKind::svm;
    int n_iter = 0;
    int k = 0;
    std::size_t best_index = 0;
    double best_mean = 0.0;
    ModelParams best_params;
    std::map<std::string, std::string> artifacts;
};

struct RunManifest {
    ExperimentConfig config;
    std::vector<ModelRecord> models;
    std::vector<SearchRecord> searches;
    std::map<std::string, double> timings;  // seconds, kept out of manifest.json

    bool all_converged() const;
    void append(RunManifest other);
};

/// Trains, evaluates and writes every model of one stage under out_dir.
/// Input problems (schema, missing augmented rows, channel filters) are reported before training.
RunManifest run_stage(Stage stage, const ExperimentConfig& config, const StageInputs& inputs,
                      const std::filesystem::path& out_dir, int jobs = 1);

nlohmann::json manifest_to_json(const RunManifest& manifest);
/// manifest.json (deterministic) and timings.json.
void write_run_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest);

}  // namespace emovox
