#include "emovox/mlp.hpp"

#include "emovox/preprocess.hpp"
#include "emovox/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace emovox {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::logistic: return "logistic";
    }
    return "relu";
}

std::string_view to_string(Solver s) { return s == Solver::adam ? "adam" : "sgd"; }
std::string_view to_string(LearningRateMode m) { return m == LearningRateMode::adaptive ? "adaptive" : "constant"; }

Activation activation_from_string(std::string_view s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "logistic") return Activation::logistic;
    throw InputError("unknown activation '" + std::string(s) + "'");
}

Solver solver_from_string(std::string_view s) {
    if (s == "adam") return Solver::adam;
    if (s == "sgd") return Solver::sgd;
    throw InputError("unknown solver '" + std::string(s) + "'");
}

LearningRateMode learning_rate_from_string(std::string_view s) {
    if (s == "constant") return LearningRateMode::constant;
    if (s == "adaptive") return LearningRateMode::adaptive;
    throw InputError("unknown learning rate mode '" + std::string(s) + "'");
}

void MlpConfig::validate() const {
    for (int h : hidden_layers) {
        if (h < 1) throw InputError("mlp: hidden layer sizes must be at least 1");
    }
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw InputError("mlp: validation_fraction must be in (0, 1)");
    }
    if (!(epsilon > 0.0)) throw InputError("mlp: epsilon must be positive");
    if (!(alpha >= 0.0)) throw InputError("mlp: alpha must be non-negative");
    if (!(initial_lr > 0.0)) throw InputError("mlp: learning rate must be positive");
    if (max_epochs < 1) throw InputError("mlp: max_epochs must be at least 1");
    if (n_iter_no_change < 1) throw InputError("mlp: n_iter_no_change must be at least 1");
}

namespace {

void activate(Activation a, Matrix& z) {
    switch (a) {
        case Activation::relu: z = z.cwiseMax(0.0); break;
        case Activation::tanh: z = z.array().tanh().matrix(); break;
        case Activation::logistic: z = (1.0 / (1.0 + (-z.array()).exp())).matrix(); break;
    }
}

// Multiplies delta by the activation derivative, expressed through the output.
void scale_by_derivative(Activation a, const Matrix& out, Matrix& delta) {
    switch (a) {
        case Activation::relu: delta = (out.array() > 0.0).select(delta, 0.0); break;
        case Activation::tanh: delta.array() *= 1.0 - out.array().square(); break;
        case Activation::logistic: delta.array() *= out.array() * (1.0 - out.array()); break;
    }
}

void softmax_rows(Matrix& z) {
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        auto row = z.row(r);
        row.array() -= row.maxCoeff();
        row = row.array().exp().matrix();
        row /= row.sum();
    }
}

double cross_entropy(const Matrix& probs, const Matrix& y_onehot) {
    constexpr double kFloor = 1e-15;
    double total = 0.0;
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            if (y_onehot(r, c) != 0.0) total -= y_onehot(r, c) * std::log(std::clamp(probs(r, c), kFloor, 1.0));
        }
    }
    return total / static_cast<double>(probs.rows());
}

double weight_penalty(const MlpModel& model, double alpha, Eigen::Index rows) {
    double sq = 0.0;
    for (const auto& w : model.weights) sq += w.squaredNorm();
    return alpha / (2.0 * static_cast<double>(rows)) * sq;
}

double accuracy(const std::vector<int>& pred, std::span<const int> y) {
    std::size_t hit = 0;
    for (std::size_t i = 0; i < y.size(); ++i) hit += pred[i] == y[i] ? 1 : 0;
    return y.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(y.size());
}

Matrix gather_rows(const Matrix& X, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

}  // namespace

MlpModel init_weights(const MlpConfig& config, Eigen::Index d_in, int n_classes, std::uint64_t seed) {
    if (d_in < 1 || n_classes < 1) throw InputError("mlp: input dimension and class count must be positive");
    config.validate();
    std::vector<Eigen::Index> sizes{d_in};
    for (int h : config.hidden_layers) sizes.push_back(h);
    sizes.push_back(n_classes);

    Rng rng(seed);
    MlpModel model;
    model.activation = config.activation;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const double bound = std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
        Matrix w(sizes[l], sizes[l + 1]);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
        model.weights.push_back(std::move(w));
        model.biases.push_back(Vector::Zero(sizes[l + 1]));
    }
    return model;
}

ForwardPass forward(const MlpModel& model, const Matrix& X) {
    if (X.cols() != model.input_dim()) {
        throw InputError("mlp: input dimension " + std::to_string(X.cols()) + " does not match model (" +
                         std::to_string(model.input_dim()) + ")");
    }
    ForwardPass pass;
    pass.activations.push_back(X);
    const std::size_t layers = model.weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        Matrix z = pass.activations.back() * model.weights[l];
        z.rowwise() += model.biases[l].transpose();
        if (l + 1 < layers) {
            activate(model.activation, z);
            pass.activations.push_back(std::move(z));
        } else {
            softmax_rows(z);
            pass.probs = std::move(z);
        }
    }
    return pass;
}

Matrix one_hot(std::span<const int> y, int n_classes) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(y.size()), n_classes);
    for (std::size_t i = 0; i < y.size(); ++i) out(static_cast<Eigen::Index>(i), y[i]) = 1.0;
    return out;
}

double mlp_loss(const MlpModel& model, const Matrix& X, const Matrix& y_onehot, double alpha, Eigen::Index penalty_rows) {
    if (penalty_rows <= 0) penalty_rows = X.rows();
    return cross_entropy(forward(model, X).probs, y_onehot) + weight_penalty(model, alpha, penalty_rows);
}

LossAndGradients loss_and_gradients(const MlpModel& model, const Matrix& X, const Matrix& y_onehot, double alpha,
                                    Eigen::Index penalty_rows) {
    if (X.rows() == 0) throw InputError("mlp: empty batch");
    if (penalty_rows <= 0) penalty_rows = X.rows();
    const ForwardPass pass = forward(model, X);
    const double n = static_cast<double>(X.rows());
    const double reg = alpha / static_cast<double>(penalty_rows);

    LossAndGradients out;
    out.loss = cross_entropy(pass.probs, y_onehot) + weight_penalty(model, alpha, penalty_rows);
    const std::size_t layers = model.weights.size();
    out.grads.weights.resize(layers);
    out.grads.biases.resize(layers);

    Matrix delta = (pass.probs - y_onehot) / n;
    for (std::size_t l = layers; l-- > 0;) {
        out.grads.weights[l] = pass.activations[l].transpose() * delta + reg * model.weights[l];
        out.grads.biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            Matrix next = delta * model.weights[l].transpose();
            scale_by_derivative(model.activation, pass.activations[l], next);
            delta = std::move(next);
        }
    }
    return out;
}

AdamState make_adam_state(const MlpModel& model) {
    AdamState s;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        s.m_w.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
        s.v_w.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
        s.m_b.push_back(Vector::Zero(model.biases[l].size()));
        s.v_b.push_back(Vector::Zero(model.biases[l].size()));
    }
    return s;
}

void adam_update(MlpModel& model, const MlpGradients& grads, AdamState& state, double lr, double epsilon) {
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const auto step = [&](auto& param, const auto& g, auto& m, auto& v) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseAbs2();
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + epsilon);
    };
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        step(model.weights[l], grads.weights[l], state.m_w[l], state.v_w[l]);
        step(model.biases[l], grads.biases[l], state.m_b[l], state.v_b[l]);
    }
}

void sgd_update(MlpModel& model, const MlpGradients& grads, double lr) {
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        model.weights[l] -= lr * grads.weights[l];
        model.biases[l] -= lr * grads.biases[l];
    }
}

MlpTrainResult train_mlp(const MlpConfig& config, const Matrix& X, std::span<const int> y, int n_classes) {
    config.validate();
    if (n_classes < 2) throw InputError("mlp: need at least 2 classes");
    if (static_cast<std::size_t>(X.rows()) != y.size() || y.empty()) throw InputError("mlp: rows and labels differ");

    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> val_rows;
    if (config.early_stopping) {
        std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
        for (int label : y) ++counts[static_cast<std::size_t>(label)];
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (counts[c] == 1) throw InputError("mlp: early stopping needs at least 2 rows in every class");
        }
        val_rows = stratified_test_rows(y, n_classes, config.validation_fraction, Rng::derive(config.seed, 1).next());
        std::size_t v = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (v < val_rows.size() && val_rows[v] == i) ++v;
            else train_rows.push_back(i);
        }
        if (val_rows.empty()) throw InputError("mlp: validation split is empty; dataset too small for early stopping");
    } else {
        train_rows.resize(y.size());
        std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
    }

    const Matrix X_train = gather_rows(X, train_rows);
    std::vector<int> y_train;
    for (std::size_t r : train_rows) y_train.push_back(y[r]);
    const Matrix Y_train = one_hot(y_train, n_classes);
    const Matrix X_val = gather_rows(X, val_rows);
    std::vector<int> y_val;
    for (std::size_t r : val_rows) y_val.push_back(y[r]);

    const auto n = static_cast<std::size_t>(X_train.rows());
    const std::size_t batch =
        config.batch_size > 0 ? std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n) : std::min<std::size_t>(200, n);

    MlpTrainResult result;
    result.model = init_weights(config, X.cols(), n_classes, Rng::derive(config.seed, 0).next());
    AdamState adam = make_adam_state(result.model);
    Rng shuffle_rng = Rng::derive(config.seed, 2);
    double lr = config.initial_lr;

    double best_loss = std::numeric_limits<double>::infinity();
    double best_val = -std::numeric_limits<double>::infinity();
    MlpModel best_model;
    int no_improvement = 0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Matrix xb;
    Matrix yb;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            const auto rows = std::span<const std::size_t>(order).subspan(start, stop - start);
            xb = gather_rows(X_train, rows);
            yb = gather_rows(Y_train, rows);
            auto lg = loss_and_gradients(result.model, xb, yb, config.alpha, X_train.rows());
            epoch_loss += lg.loss * static_cast<double>(rows.size());
            if (config.solver == Solver::adam) adam_update(result.model, lg.grads, adam, lr, config.epsilon);
            else sgd_update(result.model, lg.grads, lr);
        }
        epoch_loss /= static_cast<double>(n);
        result.history.train_loss.push_back(epoch_loss);

        if (!std::isfinite(epoch_loss)) {
            warn("mlp: training loss diverged at epoch " + std::to_string(epoch + 1));
            break;
        }

        bool improved = false;
        if (config.early_stopping) {
            const double score = accuracy(predict_labels(result.model, X_val), y_val);
            result.history.val_accuracy.push_back(score);
            improved = score > best_val + config.tol;
            if (score > best_val) {
                best_val = score;
                best_model = result.model;
                result.history.best_epoch = epoch;
            }
        } else {
            improved = epoch_loss < best_loss - config.tol;
            best_loss = std::min(best_loss, epoch_loss);
            result.history.best_epoch = epoch;
        }
        no_improvement = improved ? 0 : no_improvement + 1;

        if (no_improvement >= config.n_iter_no_change) {
            if (config.learning_rate_mode == LearningRateMode::adaptive && lr / 5.0 >= 1e-6) {
                lr /= 5.0;
                no_improvement = 0;
            } else {
                result.history.converged = true;
                break;
            }
        }
    }
    if (config.early_stopping && !best_model.weights.empty()) result.model = std::move(best_model);
    result.history.final_lr = lr;
    return result;
}

Matrix predict_proba(const MlpModel& model, const Matrix& X) { return forward(model, X).probs; }

std::vector<int> argmax_rows(const Matrix& scores) {
    std::vector<int> labels(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        int best = 0;
        for (Eigen::Index c = 1; c < scores.cols(); ++c) {
            if (scores(r, c) > scores(r, best)) best = static_cast<int>(c);
        }
        labels[static_cast<std::size_t>(r)] = best;
    }
    return labels;
}

std::vector<int> predict_labels(const MlpModel& model, const Matrix& X) { return argmax_rows(predict_proba(model, X)); }

}  // namespace emovox
