#pragma once

#include "emovox/common.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace emovox {

enum class Activation { relu, tanh, logistic };
enum class Solver { sgd, adam };
enum class LearningRateMode { constant, adaptive };

std::string_view to_string(Activation a);
std::string_view to_string(Solver s);
std::string_view to_string(LearningRateMode m);
Activation activation_from_string(std::string_view s);
Solver solver_from_string(std::string_view s);
LearningRateMode learning_rate_from_string(std::string_view s);

struct MlpConfig {
    std::vector<int> hidden_layers{100};
    Activation activation = Activation::relu;
    Solver solver = Solver::adam;
    double alpha = 1e-4;  // L2 penalty
    LearningRateMode learning_rate_mode = LearningRateMode::constant;
    double initial_lr = 1e-3;
    double epsilon = 1e-8;  // adam denominator
    int batch_size = 0;     // <= 0: min(200, n)
    int max_epochs = 200;
    bool early_stopping = false;
    double validation_fraction = 0.1;
    int n_iter_no_change = 10;
    double tol = 1e-4;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const MlpConfig&) const = default;
};

/// Dense layers; weights[l] is fan_in x fan_out and the output layer is softmax.
struct MlpModel {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    Activation activation = Activation::relu;

    Eigen::Index input_dim() const { return weights.empty() ? 0 : weights.front().rows(); }
    int n_classes() const { return weights.empty() ? 0 : static_cast<int>(weights.back().cols()); }
};

/// Glorot-uniform weights within +-sqrt(6 / (fan_in + fan_out)), zero biases.
MlpModel init_weights(const MlpConfig& config, Eigen::Index d_in, int n_classes, std::uint64_t seed);

struct ForwardPass {
    Matrix probs;
    std::vector<Matrix> activations;  // input, then every hidden layer output
};

ForwardPass forward(const MlpModel& model, const Matrix& X);

struct MlpGradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

struct LossAndGradients {
    double loss = 0.0;
    MlpGradients grads;
};

/// Mean cross-entropy plus (alpha / (2 * penalty_rows)) * sum |W|^2.
/// penalty_rows defaults to the batch size; training passes the training-set size.
LossAndGradients loss_and_gradients(const MlpModel& model, const Matrix& X, const Matrix& y_onehot, double alpha,
                                    Eigen::Index penalty_rows = 0);

double mlp_loss(const MlpModel& model, const Matrix& X, const Matrix& y_onehot, double alpha,
                Eigen::Index penalty_rows = 0);

Matrix one_hot(std::span<const int> y, int n_classes);

struct AdamState {
    std::vector<Matrix> m_w;
    std::vector<Matrix> v_w;
    std::vector<Vector> m_b;
    std::vector<Vector> v_b;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
};

AdamState make_adam_state(const MlpModel& model);

/// Bias-corrected adam: p -= lr * m_hat / (sqrt(v_hat) + epsilon).
void adam_update(MlpModel& model, const MlpGradients& grads, AdamState& state, double lr, double epsilon);
void sgd_update(MlpModel& model, const MlpGradients& grads, double lr);

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_accuracy;  // empty without early stopping
    int best_epoch = -1;               // 0-based epoch whose weights were kept
    bool converged = false;
    double final_lr = 0.0;
};

struct MlpTrainResult {
    MlpModel model;
    TrainHistory history;
};

MlpTrainResult train_mlp(const MlpConfig& config, const Matrix& X, std::span<const int> y, int n_classes);

Matrix predict_proba(const MlpModel& model, const Matrix& X);
std::vector<int> predict_labels(const MlpModel& model, const Matrix& X);

/// Row argmax; ties go to the lower index.
std::vector<int> argmax_rows(const Matrix& scores);

}  // namespace emovox
