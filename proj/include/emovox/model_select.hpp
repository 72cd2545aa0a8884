#pragma once

#include "emovox/model.hpp"
#include "emovox/preprocess.hpp"
#include "emovox/random.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace emovox {

/// A fitted classifier as seen by cross-validation: features in, labels out.
using Predictor = std::function<std::vector<int>(const Matrix& X)>;
/// Fits on (X, y) and returns a predictor. seed lets each fit draw its own stream.
using Trainer = std::function<Predictor(const Matrix& X, std::span<const int> y, int n_classes, std::uint64_t seed)>;

/// Trainer wrapping fit_model; the scaler is refit on every training slice.
Trainer make_model_trainer(const ModelParams& params, ScalerKind scaler, const LabelCodec& codec, int jobs = 1);

/// k disjoint test folds covering every index; per-class fold sizes differ by at most one.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> y, int n_classes, int k, std::uint64_t seed);

/// Held-out accuracy of each fold.
std::vector<double> cross_val_score(const Trainer& trainer, const LabeledDataset& ds, int k, std::uint64_t seed);

struct SvmSearchSpace {
    double C_low = 2.0;
    double C_high = 50.0;
    double gamma_low = 0.01;
    double gamma_high = 1.0;
    std::vector<KernelKind> kernels{KernelKind::rbf, KernelKind::poly, KernelKind::linear};
};

struct MlpSearchSpace {
    std::vector<std::vector<int>> hidden_layers{{8}, {180}, {300}, {100, 50}, {10, 10, 10}};
    std::vector<Activation> activations{Activation::tanh, Activation::relu, Activation::logistic};
    std::vector<Solver> solvers{Solver::sgd, Solver::adam};
    std::vector<double> alphas{0.0001, 0.001, 0.01};
    std::vector<double> epsilons{1e-8, 0.1};
    std::vector<LearningRateMode> learning_rates{LearningRateMode::adaptive, LearningRateMode::constant};
    MlpConfig base;  // fields not searched
};

using ParamSpace = std::variant<SvmSearchSpace, MlpSearchSpace>;

void validate(const ParamSpace& space);

/// Draws one parameter set: continuous by seeded uniform, discrete by seeded choice.
ModelParams sample_params(const ParamSpace& space, Rng& rng);

struct SearchCandidate {
    ModelParams params;
    std::vector<double> fold_scores;
    double mean = 0.0;
    double stddev = 0.0;
    double fit_seconds = 0.0;
    std::string error;  // non-empty when the candidate failed; mean is then -inf
};

struct SearchResult {
    std::vector<SearchCandidate> candidates;
    std::size_t best_index = 0;
    double total_seconds = 0.0;

    const SearchCandidate& best() const { return candidates.at(best_index); }
};

struct SearchOptions {
    int n_iter = 10;
    int k = 3;
    std::uint64_t seed = 0;
    ScalerKind scaler = ScalerKind::standard;  // refit inside each fold
    int jobs = 1;
};

/// Candidate i draws parameters and fit seeds from stream (seed, i), so a
/// search with n_iter = n is a prefix of one with n + 1.
SearchResult randomized_search(const ParamSpace& space, const LabeledDataset& ds, const SearchOptions& options);

/// search.csv (one row per candidate) and search_surface.csv (C, gamma, mean) for SVM searches.
void write_search_csv(const std::filesystem::path& path, const SearchResult& result, int k);
void write_search_surface_csv(const std::filesystem::path& path, const SearchResult& result);

struct LearningCurvePoint {
    double fraction = 0.0;
    std::size_t train_size = 0;  // mean rows used per fold
    double train_score = 0.0;
    double cv_score = 0.0;
};

std::vector<double> default_learning_curve_fractions();

/// For each fraction and fold: fit on a stratified prefix (>= 1 row per class)
/// of the training folds, score it and the held-out fold; average over folds.
std::vector<LearningCurvePoint> learning_curve(const Trainer& trainer, const LabeledDataset& ds,
                                               std::span<const double> fractions, int k, std::uint64_t seed);

double accuracy_score(std::span<const int> y_true, std::span<const int> y_pred);

}  // namespace emovox
