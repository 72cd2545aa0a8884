#include "emovox/model_select.hpp"

#include "emovox/csv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

namespace emovox {

double accuracy_score(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) throw InputError("accuracy: length mismatch");
    if (y_true.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) hit += y_true[i] == y_pred[i] ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(y_true.size());
}

Trainer make_model_trainer(const ModelParams& params, ScalerKind scaler, const LabelCodec& codec, int jobs) {
    return [params, scaler, codec, jobs](const Matrix& X, std::span<const int> y, int, std::uint64_t seed) -> Predictor {
        auto model = std::make_shared<TrainedModel>(fit_model(params, scaler, X, y, codec, seed, jobs));
        return [model](const Matrix& Xq) { return model->predict(Xq).labels; };
    };
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> y, int n_classes, int k, std::uint64_t seed) {
    if (k < 2) throw InputError("kfold: k must be at least 2");
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || y[i] >= n_classes) throw InputError("kfold: label out of range");
        by_class[static_cast<std::size_t>(y[i])].push_back(i);
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (!by_class[c].empty() && by_class[c].size() < static_cast<std::size_t>(k)) {
            throw InputError("kfold: class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                             " rows, fewer than k=" + std::to_string(k));
        }
    }
    Rng rng(seed);
    const auto uk = static_cast<std::size_t>(k);
    std::vector<std::vector<std::size_t>> folds(uk);
    std::size_t offset = 0;  // rotates so leftover rows spread across folds
    for (auto& rows : by_class) {
        rng.shuffle(std::span<std::size_t>(rows));
        for (std::size_t i = 0; i < rows.size(); ++i) folds[(offset + i) % uk].push_back(rows[i]);
        offset = (offset + rows.size()) % uk;
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

namespace {

std::vector<std::size_t> complement(const std::vector<std::size_t>& test, std::size_t n) {
    std::vector<std::size_t> train;
    train.reserve(n - test.size());
    std::size_t t = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (t < test.size() && test[t] == i) ++t;
        else train.push_back(i);
    }
    return train;
}

}  // namespace

std::vector<double> cross_val_score(const Trainer& trainer, const LabeledDataset& ds, int k, std::uint64_t seed) {
    const auto folds = stratified_kfold(ds.y, ds.n_classes(), k, seed);
    std::vector<double> scores;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto train = subset(ds, complement(folds[f], ds.rows()));
        const auto test = subset(ds, folds[f]);
        const Predictor predict = trainer(train.X, train.y, ds.n_classes(), Rng::derive(seed, 100 + f).next());
        scores.push_back(accuracy_score(test.y, predict(test.X)));
    }
    return scores;
}

void validate(const ParamSpace& space) {
    if (const auto* s = std::get_if<SvmSearchSpace>(&space)) {
        if (!(s->C_low < s->C_high) || !(s->gamma_low < s->gamma_high)) throw InputError("search: bounds must satisfy low < high");
        if (s->kernels.empty()) throw InputError("search: kernel list is empty");
        return;
    }
    const auto& m = std::get<MlpSearchSpace>(space);
    if (m.hidden_layers.empty() || m.activations.empty() || m.solvers.empty() || m.alphas.empty() ||
        m.epsilons.empty() || m.learning_rates.empty()) {
        throw InputError("search: every MLP choice list must be non-empty");
    }
}

ModelParams sample_params(const ParamSpace& space, Rng& rng) {
    if (const auto* s = std::get_if<SvmSearchSpace>(&space)) {
        SvmParams p;
        p.C = rng.uniform(s->C_low, s->C_high);
        p.kernel.gamma = rng.uniform(s->gamma_low, s->gamma_high);
        p.kernel.kind = s->kernels[rng.below(s->kernels.size())];
        return p;
    }
    const auto& m = std::get<MlpSearchSpace>(space);
    MlpConfig c = m.base;
    c.hidden_layers = m.hidden_layers[rng.below(m.hidden_layers.size())];
    c.activation = m.activations[rng.below(m.activations.size())];
    c.solver = m.solvers[rng.below(m.solvers.size())];
    c.alpha = m.alphas[rng.below(m.alphas.size())];
    c.epsilon = m.epsilons[rng.below(m.epsilons.size())];
    c.learning_rate_mode = m.learning_rates[rng.below(m.learning_rates.size())];
    return c;
}

SearchResult randomized_search(const ParamSpace& space, const LabeledDataset& ds, const SearchOptions& options) {
    if (options.n_iter < 1) throw InputError("search: n_iter must be at least 1");
    validate(space);
    const auto started = std::chrono::steady_clock::now();

    SearchResult result;
    result.candidates.resize(static_cast<std::size_t>(options.n_iter));
    for (std::size_t i = 0; i < result.candidates.size(); ++i) {
        Rng rng = Rng::derive(options.seed, i);
        result.candidates[i].params = sample_params(space, rng);
    }

    // Folds are shared by every candidate so their scores are comparable.
    const std::uint64_t fold_seed = Rng::derive(options.seed, 0xF01D).next();
    parallel_for(result.candidates.size(), options.jobs, [&](std::size_t i) {
        auto& cand = result.candidates[i];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const Trainer trainer = make_model_trainer(cand.params, options.scaler, ds.codec);
            const auto folds = stratified_kfold(ds.y, ds.n_classes(), options.k, fold_seed);
            for (std::size_t f = 0; f < folds.size(); ++f) {
                const auto train = subset(ds, complement(folds[f], ds.rows()));
                const auto test = subset(ds, folds[f]);
                const Predictor predict = trainer(train.X, train.y, ds.n_classes(), Rng::derive(options.seed, 1000 * (i + 1) + f).next());
                cand.fold_scores.push_back(accuracy_score(test.y, predict(test.X)));
            }
            cand.mean = std::accumulate(cand.fold_scores.begin(), cand.fold_scores.end(), 0.0) /
                        static_cast<double>(cand.fold_scores.size());
            double var = 0.0;
            for (double s : cand.fold_scores) var += (s - cand.mean) * (s - cand.mean);
            cand.stddev = std::sqrt(var / static_cast<double>(cand.fold_scores.size()));
        } catch (const Error& e) {
            cand.error = e.what();
            cand.fold_scores.clear();
            cand.mean = -std::numeric_limits<double>::infinity();
            warn("search: candidate " + std::to_string(i) + " failed: " + e.what());
        }
        cand.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });

    for (std::size_t i = 1; i < result.candidates.size(); ++i) {
        if (result.candidates[i].mean > result.candidates[result.best_index].mean) result.best_index = i;
    }
    result.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

void write_search_csv(const std::filesystem::path& path, const SearchResult& result, int k) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "index,params";
    for (int f = 0; f < k; ++f) out << ",fold" << f;
    out << ",mean,std,seconds,error\n";
    for (std::size_t i = 0; i < result.candidates.size(); ++i) {
        const auto& c = result.candidates[i];
        out << i << ',' << csv::escape(describe(c.params));
        for (int f = 0; f < k; ++f) {
            out << ',';
            if (static_cast<std::size_t>(f) < c.fold_scores.size()) out << csv::format_double(c.fold_scores[static_cast<std::size_t>(f)]);
        }
        out << ',' << csv::format_double(c.mean) << ',' << csv::format_double(c.stddev) << ','
            << csv::format_double(c.fit_seconds) << ',' << csv::escape(c.error) << '\n';
    }
}

void write_search_surface_csv(const std::filesystem::path& path, const SearchResult& result) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "C,gamma,kernel,mean\n";
    for (const auto& c : result.candidates) {
        if (const auto* s = std::get_if<SvmParams>(&c.params)) {
            out << csv::format_double(s->C) << ',' << csv::format_double(s->kernel.gamma) << ','
                << to_string(s->kernel.kind) << ',' << csv::format_double(c.mean) << '\n';
        }
    }
}

std::vector<double> default_learning_curve_fractions() {
    std::vector<double> f;
    for (int i = 1; i <= 10; ++i) f.push_back(i / 10.0);
    return f;
}

std::vector<LearningCurvePoint> learning_curve(const Trainer& trainer, const LabeledDataset& ds,
                                               std::span<const double> fractions, int k, std::uint64_t seed) {
    for (double f : fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw InputError("learning curve: fractions must be in (0, 1]");
    }
    const auto folds = stratified_kfold(ds.y, ds.n_classes(), k, seed);
    std::vector<LearningCurvePoint> points;
    for (double fraction : fractions) {
        LearningCurvePoint point;
        point.fraction = fraction;
        double rows = 0.0;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            const auto train_rows = complement(folds[f], ds.rows());
            const auto train_full = subset(ds, train_rows);
            // Stratified prefix: the first max(1, round(count * fraction)) rows of each class.
            std::vector<std::size_t> keep;
            std::vector<std::size_t> taken(static_cast<std::size_t>(ds.n_classes()), 0);
            const auto counts = train_full.class_counts();
            for (std::size_t i = 0; i < train_full.rows(); ++i) {
                const auto c = static_cast<std::size_t>(train_full.y[i]);
                const auto quota = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(counts[c]) * fraction)));
                if (taken[c] < quota) {
                    keep.push_back(i);
                    ++taken[c];
                }
            }
            const auto train = subset(train_full, keep);
            const auto test = subset(ds, folds[f]);
            const Predictor predict = trainer(train.X, train.y, ds.n_classes(), Rng::derive(seed, 500 + f).next());
            point.train_score += accuracy_score(train.y, predict(train.X));
            point.cv_score += accuracy_score(test.y, predict(test.X));
            rows += static_cast<double>(train.rows());
        }
        const double nf = static_cast<double>(folds.size());
        point.train_score /= nf;
        point.cv_score /= nf;
        point.train_size = static_cast<std::size_t>(std::llround(rows / nf));
        points.push_back(point);
    }
    return points;
}

}  // namespace emovox
