#include <doctest.h>

#include "emovox/mlp.hpp"
#include "support.hpp"

#include <cmath>

using namespace emovox;

namespace {

MlpConfig small_config(std::vector<int> hidden, Activation act) {
    MlpConfig c;
    c.hidden_layers = std::move(hidden);
    c.activation = act;
    return c;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
    return m;
}

double max_rel_error(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

// Smallest distance from any hidden pre-activation to the relu kink.
double min_kink_distance(const MlpModel& model, const Matrix& X) {
    double best = std::numeric_limits<double>::infinity();
    Matrix a = X;
    for (std::size_t l = 0; l + 1 < model.weights.size(); ++l) {
        Matrix z = (a * model.weights[l]).rowwise() + model.biases[l].transpose();
        best = std::min(best, z.cwiseAbs().minCoeff());
        a = z.cwiseMax(0.0);
    }
    return best;
}

}  // namespace

TEST_CASE("weight initialisation shapes, bounds and determinism") {
    const auto cfg = small_config({100, 50}, Activation::relu);
    const auto m = init_weights(cfg, 193, 6, 9);
    REQUIRE(m.weights.size() == 3);
    CHECK(m.weights[0].rows() == 193);
    CHECK(m.weights[0].cols() == 100);
    CHECK(m.weights[1].rows() == 100);
    CHECK(m.weights[1].cols() == 50);
    CHECK(m.weights[2].rows() == 50);
    CHECK(m.weights[2].cols() == 6);
    for (const auto& w : m.weights) {
        const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
        CHECK(w.cwiseAbs().maxCoeff() <= bound);
    }
    for (const auto& b : m.biases) CHECK(b.cwiseAbs().maxCoeff() == 0.0);
    const auto again = init_weights(cfg, 193, 6, 9);
    for (std::size_t l = 0; l < 3; ++l) CHECK(again.weights[l] == m.weights[l]);
    CHECK(init_weights(cfg, 193, 6, 10).weights[0] != m.weights[0]);
}

TEST_CASE("forward pass on zero weights") {
    auto m = init_weights(small_config({4}, Activation::logistic), 3, 6, 1);
    for (auto& w : m.weights) w.setZero();
    Rng rng(2);
    const Matrix X = random_matrix(5, 3, rng);
    const auto pass = forward(m, X);
    CHECK((pass.probs.array() - 1.0 / 6.0).abs().maxCoeff() < 1e-15);
    CHECK((pass.activations[1].array() - 0.5).abs().maxCoeff() == 0.0);
    const Matrix Y = one_hot(std::vector<int>{0, 1, 2, 3, 4}, 6);
    CHECK(loss_and_gradients(m, X, Y, 0.0).loss == doctest::Approx(std::log(6.0)).epsilon(1e-12));
    CHECK_THROWS_AS(forward(m, Matrix::Zero(2, 4)), InputError);
}

TEST_CASE("softmax rows sum to one and predictions are row-wise") {
    Rng rng(3);
    const auto m = init_weights(small_config({7, 5}, Activation::tanh), 4, 3, 4);
    const Matrix X = random_matrix(20, 4, rng, 3.0);
    const Matrix P = predict_proba(m, X);
    for (Eigen::Index i = 0; i < P.rows(); ++i) CHECK(std::abs(P.row(i).sum() - 1.0) < 1e-9);
    Matrix Xr = X;
    std::vector<std::size_t> perm(20);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    for (std::size_t i = 0; i < 20; ++i) Xr.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(perm[i]));
    const Matrix Pr = predict_proba(m, Xr);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK((Pr.row(static_cast<Eigen::Index>(i)) - P.row(static_cast<Eigen::Index>(perm[i]))).cwiseAbs().maxCoeff() < 1e-14);
    }

    Matrix huge(1, 3);
    huge << 1000.0, 1000.0, -1000.0;
    CHECK(argmax_rows(huge) == std::vector<int>{0});
}

TEST_CASE("backpropagation matches central finite differences") {
    Rng rng(5);
    int checked = 0;
    for (int trial = 0; trial < 24; ++trial) {
        const Activation act = static_cast<Activation>(trial % 3);
        const int d = 1 + static_cast<int>(rng.below(8));
        const int n = 2 + static_cast<int>(rng.below(15));
        const int k = 2 + static_cast<int>(rng.below(3));
        std::vector<int> hidden{1 + static_cast<int>(rng.below(6))};
        if (rng.below(2) == 1) hidden.push_back(1 + static_cast<int>(rng.below(6)));
        auto model = init_weights(small_config(hidden, act), d, k, rng.next());
        for (auto& b : model.biases)
            for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.1 * rng.normal();
        const Matrix X = random_matrix(n, d, rng);
        std::vector<int> y(static_cast<std::size_t>(n));
        for (auto& v : y) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
        const Matrix Y = one_hot(y, k);
        const double alpha = trial % 2 == 0 ? 0.0 : 0.05;
        if (act == Activation::relu && min_kink_distance(model, X) < 1e-3) continue;

        const auto lg = loss_and_gradients(model, X, Y, alpha, 3 * n);
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            for (Eigen::Index i = 0; i < model.weights[l].size(); ++i) {
                const double fd = testing::richardson_derivative([&](double e) {
                    auto shifted = model;
                    shifted.weights[l].data()[i] += e;
                    return mlp_loss(shifted, X, Y, alpha, 3 * n);
                });
                CHECK(max_rel_error(fd, lg.grads.weights[l].data()[i]) < 1e-5);
            }
            for (Eigen::Index i = 0; i < model.biases[l].size(); ++i) {
                const double fd = testing::richardson_derivative([&](double e) {
                    auto shifted = model;
                    shifted.biases[l][i] += e;
                    return mlp_loss(shifted, X, Y, alpha, 3 * n);
                });
                CHECK(max_rel_error(fd, lg.grads.biases[l][i]) < 1e-5);
            }
        }
        ++checked;
    }
    CHECK(checked >= 12);
}

TEST_CASE("the L2 term adds alpha * W / n to the weight gradients") {
    Rng rng(6);
    const auto model = init_weights(small_config({5}, Activation::tanh), 3, 3, 7);
    const Matrix X = random_matrix(8, 3, rng);
    const Matrix Y = one_hot(std::vector<int>{0, 1, 2, 0, 1, 2, 0, 1}, 3);
    const double a = 0.3;
    const auto g0 = loss_and_gradients(model, X, Y, 0.0, 20);
    const auto ga = loss_and_gradients(model, X, Y, a, 20);
    double sq = 0.0;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        CHECK(((ga.grads.weights[l] - g0.grads.weights[l]) - (a / 20.0) * model.weights[l]).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(ga.grads.biases[l] == g0.grads.biases[l]);
        sq += model.weights[l].squaredNorm();
    }
    CHECK(ga.loss - g0.loss == doctest::Approx(a / 40.0 * sq).epsilon(1e-12));
}

TEST_CASE("first adam step and sgd step") {
    const auto base = init_weights(small_config({2}, Activation::relu), 2, 2, 1);
    MlpGradients g;
    for (std::size_t l = 0; l < base.weights.size(); ++l) {
        g.weights.push_back(Matrix::Constant(base.weights[l].rows(), base.weights[l].cols(), 0.0));
        g.biases.push_back(Vector::Constant(base.biases[l].size(), -0.5));
        for (Eigen::Index i = 0; i < g.weights[l].size(); ++i) g.weights[l].data()[i] = 0.01 * static_cast<double>(i + 1) - 0.02;
    }
    const double lr = 0.001;
    for (double eps : {1e-8, 0.1}) {
        auto m = base;
        auto state = make_adam_state(m);
        adam_update(m, g, state, lr, eps);
        for (std::size_t l = 0; l < m.weights.size(); ++l) {
            for (Eigen::Index i = 0; i < g.weights[l].size(); ++i) {
                const double gi = g.weights[l].data()[i];
                const double expected = -lr * gi / (std::abs(gi) + eps);
                CHECK(m.weights[l].data()[i] - base.weights[l].data()[i] == doctest::Approx(expected).epsilon(1e-9));
            }
            for (Eigen::Index i = 0; i < g.biases[l].size(); ++i) {
                CHECK(m.biases[l][i] == doctest::Approx(lr * 0.5 / (0.5 + eps)).epsilon(1e-9));
            }
        }
    }
    auto s = base;
    sgd_update(s, g, 0.1);
    CHECK((s.weights[0] - (base.weights[0] - 0.1 * g.weights[0])).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("XOR is learned") {
    Matrix X(4, 2);
    X << 0, 0, 1, 1, 0, 1, 1, 0;
    const std::vector<int> y{0, 0, 1, 1};
    bool solved = false;
    for (std::uint64_t seed = 0; seed < 3 && !solved; ++seed) {
        auto cfg = small_config({10, 10}, Activation::tanh);
        cfg.max_epochs = 500;
        cfg.initial_lr = 0.01;
        cfg.alpha = 0.0;
        cfg.tol = 0.0;
        cfg.seed = seed;
        const auto result = train_mlp(cfg, X, y, 2);
        solved = predict_labels(result.model, X) == y;
    }
    CHECK(solved);
}

TEST_CASE("training loss falls on separable data and training is deterministic") {
    const auto ds = testing::blobs(3, 30, 4, 0.5, 11);
    for (Solver solver : {Solver::adam, Solver::sgd}) {
        auto cfg = small_config({16}, Activation::relu);
        cfg.solver = solver;
        cfg.initial_lr = solver == Solver::adam ? 0.01 : 0.1;
        cfg.max_epochs = 30;
        cfg.batch_size = 16;
        cfg.seed = 4;
        const auto a = train_mlp(cfg, ds.X, ds.y, 3);
        REQUIRE(a.history.train_loss.size() >= 5);
        for (int e = 1; e < 5; ++e) CHECK(a.history.train_loss[static_cast<std::size_t>(e)] < a.history.train_loss[static_cast<std::size_t>(e - 1)]);
        const auto b = train_mlp(cfg, ds.X, ds.y, 3);
        CHECK(a.history.train_loss == b.history.train_loss);
        for (std::size_t l = 0; l < a.model.weights.size(); ++l) CHECK(a.model.weights[l] == b.model.weights[l]);
    }
}

TEST_CASE("adaptive learning rate divides by five on plateaus") {
    const auto ds = testing::blobs(2, 10, 2, 0.1, 3);
    auto cfg = small_config({4}, Activation::relu);
    cfg.learning_rate_mode = LearningRateMode::adaptive;
    cfg.tol = 10.0;  // no epoch ever counts as an improvement
    cfg.n_iter_no_change = 2;
    cfg.max_epochs = 5;
    const auto r = train_mlp(cfg, ds.X, ds.y, 2);
    CHECK(r.history.final_lr == doctest::Approx(cfg.initial_lr / 25.0));
    cfg.learning_rate_mode = LearningRateMode::constant;
    const auto c = train_mlp(cfg, ds.X, ds.y, 2);
    CHECK(c.history.train_loss.size() == 3);  // epoch 1 always improves on +inf
    CHECK(c.history.converged);
}

TEST_CASE("early stopping on a flat validation score") {
    const auto ds = testing::blobs(3, 20, 3, 0.5, 5);
    auto cfg = small_config({4}, Activation::relu);
    cfg.early_stopping = true;
    cfg.initial_lr = 1e-12;
    cfg.max_epochs = 200;
    const auto r = train_mlp(cfg, ds.X, ds.y, 3);
    CHECK(r.history.train_loss.size() <= static_cast<std::size_t>(cfg.n_iter_no_change + 1));
    CHECK(r.history.val_accuracy.size() == r.history.train_loss.size());
}

TEST_CASE("early stopping keeps the best validation weights bit for bit") {
    const auto ds = testing::blobs(3, 40, 4, 2.5, 21);
    auto cfg = small_config({12}, Activation::tanh);
    cfg.early_stopping = true;
    cfg.initial_lr = 0.01;
    cfg.max_epochs = 80;
    cfg.n_iter_no_change = 5;
    cfg.seed = 8;
    const auto full = train_mlp(cfg, ds.X, ds.y, 3);
    REQUIRE(full.history.best_epoch >= 0);
    const auto& va = full.history.val_accuracy;
    CHECK(va[static_cast<std::size_t>(full.history.best_epoch)] == *std::max_element(va.begin(), va.end()));
    cfg.max_epochs = full.history.best_epoch + 1;
    const auto cut = train_mlp(cfg, ds.X, ds.y, 3);
    for (std::size_t l = 0; l < full.model.weights.size(); ++l) {
        CHECK(cut.model.weights[l] == full.model.weights[l]);
        CHECK(cut.model.biases[l] == full.model.biases[l]);
    }
}

TEST_CASE("training preconditions") {
    const auto ds = testing::blobs(2, 5, 2, 0.1, 1);
    auto cfg = small_config({3}, Activation::relu);
    CHECK_THROWS_AS(train_mlp(cfg, ds.X, ds.y, 1), InputError);
    cfg.epsilon = 0.0;
    CHECK_THROWS_AS(train_mlp(cfg, ds.X, ds.y, 2), InputError);
    cfg.epsilon = 1e-8;
    cfg.hidden_layers = {0};
    CHECK_THROWS_AS(train_mlp(cfg, ds.X, ds.y, 2), InputError);
    cfg.hidden_layers = {3};
    cfg.early_stopping = true;
    std::vector<int> y = ds.y;
    y[0] = 1;
    for (std::size_t i = 1; i < y.size(); ++i) y[i] = 0;
    CHECK_THROWS_AS(train_mlp(cfg, ds.X, y, 2), InputError);
}
