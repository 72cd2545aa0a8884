#pragma once

#include "emovox/mlp.hpp"
#include "emovox/preprocess.hpp"
#include "emovox/svm.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace emovox {

enum class ModelKind { svm, mlp };

std::string_view to_string(ModelKind kind);

/// SVM hyperparameters. gamma_scale replaces kernel.gamma with
/// 1 / (n_features * var(X)) computed on the training data at fit time.
struct SvmParams {
    double C = 1.0;
    KernelSpec kernel;
    bool gamma_scale = false;

    bool operator==(const SvmParams&) const = default;
};

using ModelParams = std::variant<SvmParams, MlpConfig>;

ModelKind kind_of(const ModelParams& params);
nlohmann::json params_to_json(const ModelParams& params);
ModelParams params_from_json(const nlohmann::json& j);
std::string describe(const ModelParams& params);

struct Prediction {
    std::vector<int> labels;
    Matrix scores;  // n x classes; SVM summed pairwise decisions, MLP probabilities
};

/// A trained classifier together with the scaler it expects and its label codec.
struct TrainedModel {
    ScalerParams scaler;
    std::variant<SvmMulticlassModel, MlpModel> model;
    LabelCodec codec;

    ModelKind kind() const { return model.index() == 0 ? ModelKind::svm : ModelKind::mlp; }
    Prediction predict(const Matrix& X) const;
    bool converged = true;
};

/// Fits scaler (on X) then the classifier. Seeds SMO pair selection or MLP
/// initialisation/shuffling.
TrainedModel fit_model(const ModelParams& params, ScalerKind scaler, const Matrix& X, std::span<const int> y,
                       const LabelCodec& codec, std::uint64_t seed, int jobs = 1);

/// Default gamma for gamma_scale: 1 / (d * var(X)), 1 when X is constant.
double scale_gamma(const Matrix& X);

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j, std::optional<ModelKind> expect = std::nullopt);

void save_model(const std::filesystem::path& path, const TrainedModel& model);
/// Throws InputError on unreadable/corrupt files, version mismatch, or a kind other than `expect`.
TrainedModel load_model(const std::filesystem::path& path, std::optional<ModelKind> expect = std::nullopt);

nlohmann::json scaler_to_json(const ScalerParams& s);
ScalerParams scaler_from_json(const nlohmann::json& j);

}  // namespace emovox
