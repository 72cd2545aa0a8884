#include "emovox/svm.hpp"

#include "emovox/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <string>

namespace emovox {

std::string_view to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::linear: return "linear";
        case KernelKind::rbf: return "rbf";
        case KernelKind::poly: return "poly";
    }
    return "rbf";
}

KernelKind kernel_from_string(std::string_view s) {
    if (s == "linear") return KernelKind::linear;
    if (s == "rbf") return KernelKind::rbf;
    if (s == "poly") return KernelKind::poly;
    throw InputError("unknown kernel '" + std::string(s) + "'");
}

void KernelSpec::validate() const {
    if (kind != KernelKind::linear && !(gamma > 0.0)) throw InputError("kernel: gamma must be positive");
    if (kind == KernelKind::poly && degree < 1) throw InputError("kernel: degree must be at least 1");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> z) {
    if (x.size() != z.size()) {
        throw InputError("kernel: dimension mismatch (" + std::to_string(x.size()) + " vs " + std::to_string(z.size()) + ")");
    }
    double dot = 0.0;
    double dist = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += x[i] * z[i];
        const double d = x[i] - z[i];
        dist += d * d;
    }
    switch (spec.kind) {
        case KernelKind::linear: return dot;
        case KernelKind::rbf: return std::exp(-spec.gamma * dist);
        case KernelKind::poly: return std::pow(spec.gamma * dot + spec.coef0, spec.degree);
    }
    return 0.0;
}

Vector kernel_column(const KernelSpec& spec, const Matrix& A, const Vector& a_sq_norms, const Eigen::Ref<const Vector>& z) {
    Vector dots = A * z;
    switch (spec.kind) {
        case KernelKind::linear: return dots;
        case KernelKind::rbf: {
            const double zz = z.squaredNorm();
            return (-spec.gamma * (a_sq_norms.array() + zz - 2.0 * dots.array()).cwiseMax(0.0)).exp().matrix();
        }
        case KernelKind::poly:
            return (spec.gamma * dots.array() + spec.coef0).pow(static_cast<double>(spec.degree)).matrix();
    }
    return dots;
}

double SvmBinaryModel::decision(std::span<const double> x) const {
    if (static_cast<Eigen::Index>(x.size()) != support_vectors.cols()) throw InputError("svm: dimension mismatch");
    double f = bias;
    for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
        const auto row = support_vectors.row(i);
        f += dual_coefs[static_cast<std::size_t>(i)] * kernel_eval(kernel, std::span<const double>(row.data(), row.size()), x);
    }
    return f;
}

Vector SvmBinaryModel::decision(const Matrix& X) const {
    if (X.cols() != support_vectors.cols()) {
        throw InputError("svm: feature dimension " + std::to_string(X.cols()) + " does not match model (" +
                         std::to_string(support_vectors.cols()) + ")");
    }
    const Vector x_norms = X.rowwise().squaredNorm();
    Vector f = Vector::Constant(X.rows(), bias);
    for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
        f += dual_coefs[static_cast<std::size_t>(i)] * kernel_column(kernel, X, x_norms, support_vectors.row(i).transpose());
    }
    return f;
}

namespace {

// LRU cache of kernel rows K(x_i, .) over the training set.
class KernelRows {
public:
    KernelRows(const Matrix& X, const KernelSpec& spec, std::size_t budget_bytes)
        : X_(X), spec_(spec), norms_(X.rowwise().squaredNorm()), rows_(static_cast<std::size_t>(X.rows())),
          where_(rows_.size()) {
        const std::size_t row_bytes = std::max<std::size_t>(1, rows_.size() * sizeof(double));
        capacity_ = std::max<std::size_t>(2, budget_bytes / row_bytes);
        diagonal_.resize(rows_.size());
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const auto r = X.row(static_cast<Eigen::Index>(i));
            diagonal_[i] = kernel_eval(spec, std::span<const double>(r.data(), r.size()),
                                       std::span<const double>(r.data(), r.size()));
        }
    }

    const Vector& row(std::size_t i) {
        if (rows_[i].size() > 0) {
            lru_.splice(lru_.begin(), lru_, where_[i]);
            return rows_[i];
        }
        if (lru_.size() >= capacity_) {
            const std::size_t victim = lru_.back();
            lru_.pop_back();
            rows_[victim] = Vector();
        }
        rows_[i] = kernel_column(spec_, X_, norms_, X_.row(static_cast<Eigen::Index>(i)).transpose());
        lru_.push_front(i);
        where_[i] = lru_.begin();
        return rows_[i];
    }

    double diagonal(std::size_t i) const { return diagonal_[i]; }

private:
    const Matrix& X_;
    KernelSpec spec_;
    Vector norms_;
    std::vector<Vector> rows_;
    std::vector<std::list<std::size_t>::iterator> where_;
    std::list<std::size_t> lru_;
    std::vector<double> diagonal_;
    std::size_t capacity_ = 2;
};

double dual_value(const std::vector<double>& alpha, const std::vector<double>& grad) {
    // Maximised dual: sum(alpha) - 1/2 alpha'Q alpha, with grad = Q alpha - 1.
    double v = 0.0;
    for (std::size_t t = 0; t < alpha.size(); ++t) v -= 0.5 * alpha[t] * (grad[t] - 1.0);
    return v;
}

}  // namespace

SvmTrainTrace train_binary_traced(const Matrix& X, std::span<const int> y, const SvmOptions& options) {
    options.kernel.validate();
    if (!(options.C > 0.0)) throw InputError("svm: C must be positive");
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw InputError("svm: rows and labels differ");
    bool has_pos = false;
    bool has_neg = false;
    for (int label : y) {
        if (label == 1) has_pos = true;
        else if (label == -1) has_neg = true;
        else throw InputError("svm: binary labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw InputError("svm: training data must contain both classes");

    const std::size_t n = y.size();
    const double C = options.C;
    const long max_iter = options.max_iterations > 0 ? options.max_iterations
                                                     : std::max<long>(10'000'000, 100 * static_cast<long>(n));
    constexpr double kTau = 1e-12;

    KernelRows kernel(X, options.kernel, options.cache_bytes);
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    const auto yd = [&](std::size_t t) { return static_cast<double>(y[t]); };
    const auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0); };
    const auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C); };

    SvmTrainTrace trace;
    Rng rng(options.seed);
    long iter = 0;
    bool converged = false;
    bool stalled = false;
    while (iter < max_iter) {
        std::size_t i = n;
        std::size_t j = n;
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -yd(t) * grad[t];
            if (in_up(t) && v > m_up) {
                m_up = v;
                i = t;
            }
            if (in_low(t) && v < m_low) {
                m_low = v;
                j = t;
            }
        }
        if (i == n || j == n || m_up - m_low <= options.tol) {
            converged = true;
            break;
        }
        if (stalled) {
            // The last maximal pair made no progress: take a random violating partner.
            std::vector<std::size_t> candidates;
            for (std::size_t t = 0; t < n; ++t) {
                if (t != i && in_low(t) && -yd(t) * grad[t] < m_up - options.tol) candidates.push_back(t);
            }
            if (!candidates.empty()) j = candidates[rng.below(candidates.size())];
        }

        const Vector& Ki = kernel.row(i);
        const Vector& Kj = kernel.row(j);
        const double Kij = Ki(static_cast<Eigen::Index>(j));
        const double old_i = alpha[i];
        const double old_j = alpha[j];

        if (y[i] != y[j]) {
            double quad = kernel.diagonal(i) + kernel.diagonal(j) - 2.0 * Kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = kernel.diagonal(i) + kernel.diagonal(j) - 2.0 * Kij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        const double di = alpha[i] - old_i;
        const double dj = alpha[j] - old_j;
        stalled = di == 0.0 && dj == 0.0;
        if (!stalled) {
            // grad_t += Q_ti di + Q_tj dj with Q_ts = y_t y_s K_ts.
            const double si = yd(i) * di;
            const double sj = yd(j) * dj;
            for (std::size_t t = 0; t < n; ++t) {
                const auto e = static_cast<Eigen::Index>(t);
                grad[t] += yd(t) * (si * Ki(e) + sj * Kj(e));
            }
        }
        ++iter;
        if (options.record_objective) trace.dual_objective.push_back(dual_value(alpha, grad));
    }

    // Bias from free support vectors, or the midpoint of the feasible interval.
    double bias_sum = 0.0;
    std::size_t free_count = 0;
    double upper = std::numeric_limits<double>::infinity();
    double lower = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const double v = -yd(t) * grad[t];
        if (alpha[t] > 0.0 && alpha[t] < C) {
            bias_sum += v;
            ++free_count;
        } else if ((y[t] == 1 && alpha[t] >= C) || (y[t] == -1 && alpha[t] <= 0.0)) {
            upper = std::min(upper, v);  // only in the low set: bias <= v
        } else {
            lower = std::max(lower, v);  // only in the up set: bias >= v
        }
    }
    double bias = 0.0;
    if (free_count > 0) bias = bias_sum / static_cast<double>(free_count);
    else if (std::isfinite(upper) && std::isfinite(lower)) bias = 0.5 * (upper + lower);
    else if (std::isfinite(upper)) bias = upper;
    else if (std::isfinite(lower)) bias = lower;

    SvmBinaryModel& model = trace.model;
    model.kernel = options.kernel;
    model.C = C;
    model.bias = bias;
    model.converged = converged;
    model.iterations = iter;
    std::vector<std::size_t> sv;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 1e-8) sv.push_back(t);
    }
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
    for (std::size_t s = 0; s < sv.size(); ++s) {
        model.support_vectors.row(static_cast<Eigen::Index>(s)) = X.row(static_cast<Eigen::Index>(sv[s]));
        model.dual_coefs.push_back(alpha[sv[s]] * yd(sv[s]));
    }
    trace.alpha = std::move(alpha);
    return trace;
}

SvmBinaryModel train_binary(const Matrix& X, std::span<const int> y, const SvmOptions& options) {
    return train_binary_traced(X, y, options).model;
}

double max_kkt_violation(const SvmTrainTrace& trace, const Matrix& X, std::span<const int> y) {
    const Vector f = trace.model.decision(X);
    const double C = trace.model.C;
    double worst = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double margin = y[t] * f(static_cast<Eigen::Index>(t));
        const double a = trace.alpha[t];
        double r = 0.0;
        if (a <= 1e-8) r = std::max(0.0, 1.0 - margin);
        else if (a >= C - 1e-8) r = std::max(0.0, margin - 1.0);
        else r = std::abs(margin - 1.0);
        worst = std::max(worst, r);
    }
    return worst;
}

bool SvmMulticlassModel::converged() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const SvmPair& p) { return p.model.converged; });
}

SvmMulticlassModel train_multiclass(const Matrix& X, std::span<const int> y, int n_classes, const SvmOptions& options,
                                    int jobs) {
    if (n_classes < 2) throw InputError("svm: need at least 2 classes");
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw InputError("svm: rows and labels differ");
    std::vector<std::pair<int, int>> pair_ids;
    for (int a = 0; a < n_classes; ++a) {
        for (int b = a + 1; b < n_classes; ++b) pair_ids.emplace_back(a, b);
    }
    SvmMulticlassModel model;
    model.class_count = n_classes;
    model.pairs.resize(pair_ids.size());
    parallel_for(pair_ids.size(), jobs, [&](std::size_t p) {
        const auto [a, b] = pair_ids[p];
        std::vector<Eigen::Index> rows;
        std::vector<int> labels;
        for (std::size_t t = 0; t < y.size(); ++t) {
            if (y[t] == a || y[t] == b) {
                rows.push_back(static_cast<Eigen::Index>(t));
                labels.push_back(y[t] == a ? 1 : -1);
            }
        }
        Matrix sub(static_cast<Eigen::Index>(rows.size()), X.cols());
        for (std::size_t r = 0; r < rows.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = X.row(rows[r]);
        SvmOptions pair_options = options;
        pair_options.seed = Rng::derive(options.seed, p).next();
        try {
            model.pairs[p] = {a, b, train_binary(sub, labels, pair_options)};
        } catch (const InputError& e) {
            throw InputError("svm pair (" + std::to_string(a) + ", " + std::to_string(b) + "): " + e.what());
        }
    });
    return model;
}

SvmPrediction combine_pairwise(const Matrix& decisions, const std::vector<std::pair<int, int>>& pairs, int class_count) {
    const auto n = decisions.rows();
    SvmPrediction out;
    out.scores = Matrix::Zero(n, class_count);
    out.labels.resize(static_cast<std::size_t>(n));
    out.votes.assign(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(class_count), 0));
    for (Eigen::Index r = 0; r < n; ++r) {
        auto& votes = out.votes[static_cast<std::size_t>(r)];
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto [a, b] = pairs[p];
            const double f = decisions(r, static_cast<Eigen::Index>(p));
            out.scores(r, a) += f;
            out.scores(r, b) -= f;
            ++votes[static_cast<std::size_t>(f > 0.0 ? a : b)];
        }
        int best = 0;
        for (int c = 1; c < class_count; ++c) {
            const auto uc = static_cast<std::size_t>(c);
            const auto ub = static_cast<std::size_t>(best);
            if (votes[uc] > votes[ub] || (votes[uc] == votes[ub] && out.scores(r, c) > out.scores(r, best))) best = c;
        }
        out.labels[static_cast<std::size_t>(r)] = best;
    }
    return out;
}

SvmPrediction predict_with_scores(const SvmMulticlassModel& model, const Matrix& X) {
    Matrix decisions(X.rows(), static_cast<Eigen::Index>(model.pairs.size()));
    std::vector<std::pair<int, int>> ids;
    for (std::size_t p = 0; p < model.pairs.size(); ++p) {
        decisions.col(static_cast<Eigen::Index>(p)) = model.pairs[p].model.decision(X);
        ids.emplace_back(model.pairs[p].positive, model.pairs[p].negative);
    }
    return combine_pairwise(decisions, ids, model.class_count);
}

}  // namespace emovox
