#include "emovox/experiment.hpp"

#include "emovox/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>

namespace emovox {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::scaling_comparison: return "scaling_comparison";
        case Stage::optimized: return "optimized";
        case Stage::augmented_smote: return "augmented_smote";
        case Stage::channel_split: return "channel_split";
    }
    return "unknown";
}

Stage stage_from_int(int n) {
    if (n < 1 || n > 4) throw InputError("stage must be 1, 2, 3 or 4 (got " + std::to_string(n) + ")");
    return static_cast<Stage>(n);
}

void ExperimentConfig::validate() const {
    auto positive = [](int v, const char* name) {
        if (v <= 0) throw InputError(std::string("config: ") + name + " must be positive");
    };
    positive(sample_rate, "sample_rate");
    positive(n_fft, "n_fft");
    positive(hop, "hop");
    positive(n_mels, "n_mels");
    positive(n_mfcc, "n_mfcc");
    positive(search_n_iter, "search_n_iter");
    positive(smote_k, "smote_k");
    positive(mlp_max_epochs, "mlp_max_epochs");
    if (search_k < 2) throw InputError("config: search_k must be at least 2");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InputError("config: test_fraction must be in (0, 1)");
    if (n_mfcc > n_mels) throw InputError("config: n_mfcc cannot exceed n_mels");
    for (const auto& spec : augment) {
        if (spec.kind == AugmentKind::fade_in_out && !(spec.fade_seconds >= 0.0)) throw InputError("config: fade seconds must be >= 0");
        if (spec.kind == AugmentKind::change_tone && !(spec.tone_factor > 0.0)) throw InputError("config: tone factor must be > 0");
    }
    if (learning_curve_fractions.empty()) throw InputError("config: learning_curve_fractions is empty");
    for (double f : learning_curve_fractions) {
        if (!(f > 0.0 && f <= 1.0)) throw InputError("config: learning curve fractions must be in (0, 1]");
    }
}

FeatureConfig ExperimentConfig::feature_config() const {
    FeatureConfig f;
    f.n_fft = n_fft;
    f.hop = hop;
    f.n_mels = n_mels;
    f.n_mfcc = n_mfcc;
    return f;
}

ExperimentConfig full_preset() {
    ExperimentConfig c;
    c.search_n_iter = 50;
    return c;
}

namespace {

json augment_to_json(const AugmentSpec& s) {
    if (s.kind == AugmentKind::fade_in_out) return json{{"kind", "fade_in_out"}, {"fade_seconds", s.fade_seconds}};
    return json{{"kind", "change_tone"}, {"tone_factor", s.tone_factor}};
}

AugmentSpec augment_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "fade_in_out") return AugmentSpec::fade(j.at("fade_seconds").get<double>());
    if (kind == "change_tone") return AugmentSpec::tone(j.at("tone_factor").get<double>());
    throw InputError("config: unknown augmentation kind '" + kind + "'");
}

}  // namespace

json config_to_json(const ExperimentConfig& c) {
    json augment = json::array();
    for (const auto& s : c.augment) augment.push_back(augment_to_json(s));
    return json{{"seed", c.seed},
                {"sample_rate", c.sample_rate},
                {"n_fft", c.n_fft},
                {"hop", c.hop},
                {"n_mels", c.n_mels},
                {"n_mfcc", c.n_mfcc},
                {"scaler", to_string(c.scaler)},
                {"search_n_iter", c.search_n_iter},
                {"search_k", c.search_k},
                {"test_fraction", c.test_fraction},
                {"augment", augment},
                {"smote", c.smote},
                {"smote_k", c.smote_k},
                {"channel", c.channel ? std::string(to_string(*c.channel)) : std::string("all")},
                {"paper_faithful", c.paper_faithful},
                {"mlp_max_epochs", c.mlp_max_epochs},
                {"learning_curve_fractions", c.learning_curve_fractions}};
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
    if (!j.is_object()) throw InputError("config: expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "sample_rate") c.sample_rate = value.get<int>();
            else if (key == "n_fft") c.n_fft = value.get<int>();
            else if (key == "hop") c.hop = value.get<int>();
            else if (key == "n_mels") c.n_mels = value.get<int>();
            else if (key == "n_mfcc") c.n_mfcc = value.get<int>();
            else if (key == "scaler") c.scaler = scaler_from_string(value.get<std::string>());
            else if (key == "search_n_iter") c.search_n_iter = value.get<int>();
            else if (key == "search_k") c.search_k = value.get<int>();
            else if (key == "test_fraction") c.test_fraction = value.get<double>();
            else if (key == "smote") c.smote = value.get<bool>();
            else if (key == "smote_k") c.smote_k = value.get<int>();
            else if (key == "paper_faithful") c.paper_faithful = value.get<bool>();
            else if (key == "mlp_max_epochs") c.mlp_max_epochs = value.get<int>();
            else if (key == "learning_curve_fractions") c.learning_curve_fractions = value.get<std::vector<double>>();
            else if (key == "augment") {
                c.augment.clear();
                for (const auto& s : value) c.augment.push_back(augment_from_json(s));
            } else if (key == "channel") {
                const auto name = value.get<std::string>();
                if (name == "all") c.channel.reset();
                else if (auto ch = channel_from_string(name)) c.channel = *ch;
                else throw InputError("unknown channel '" + name + "'");
            } else {
                throw InputError("unknown key");
            }
        } catch (const json::exception& e) {
            throw InputError("config: field '" + key + "': " + e.what());
        } catch (const InputError& e) {
            throw InputError("config: field '" + key + "': " + e.what());
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InputError("config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::pair<Matrix, std::vector<ClipMetadata>> extract_corpus_features(const Corpus& corpus, const FeatureConfig& config, int jobs) {
    const auto n = corpus.clips.size();
    std::vector<std::vector<double>> rows(n);
    parallel_for(n, jobs, [&](std::size_t i) {
        try {
            rows[i] = extract_feature_vector(corpus.clips[i].clip, config).values;
        } catch (const Error& e) {
            throw InputError(corpus.clips[i].meta.source_path + ": " + e.what());
        }
    });
    const auto dim = feature_layout(config).size;
    Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    std::vector<ClipMetadata> meta;
    meta.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < dim; ++c) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
        meta.push_back(corpus.clips[i].meta);
    }
    return {std::move(X), std::move(meta)};
}

bool RunManifest::all_converged() const {
    return std::all_of(models.begin(), models.end(), [](const ModelRecord& m) { return m.converged; });
}

void RunManifest::append(RunManifest other) {
    for (auto& m : other.models) models.push_back(std::move(m));
    for (auto& s : other.searches) searches.push_back(std::move(s));
    for (auto& [k, v] : other.timings) timings[k] = v;
}

namespace {

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Leak-free runs refit the scaler inside every fit; the literal pipeline fits
// it once on the whole dataset up front.
struct Scaling {
    ScalerKind kind = ScalerKind::standard;
    std::optional<ScalerParams> prefit;

    ScalerKind inner() const { return prefit ? ScalerKind::none : kind; }

    LabeledDataset apply(const LabeledDataset& ds) const {
        if (!prefit) return ds;
        LabeledDataset out = ds;
        out.X = apply_scaler(*prefit, ds.X);
        return out;
    }
};

Scaling make_scaling(ScalerKind kind, const LabeledDataset& full, bool paper_faithful) {
    Scaling s;
    s.kind = kind;
    if (paper_faithful) s.prefit = fit_scaler(full.X, kind);
    return s;
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
    if (a.X.cols() != b.X.cols()) throw InputError("datasets have different feature counts");
    LabeledDataset out;
    out.codec = a.codec;
    out.X.resize(a.X.rows() + b.X.rows(), a.X.cols());
    out.X.topRows(a.X.rows()) = a.X;
    out.X.bottomRows(b.X.rows()) = b.X;
    out.y = a.y;
    out.y.insert(out.y.end(), b.y.begin(), b.y.end());
    out.meta = a.meta;
    out.meta.insert(out.meta.end(), b.meta.begin(), b.meta.end());
    return out;
}

LabeledDataset select_channel(const LabeledDataset& ds, VocalChannel channel) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (ds.meta[i].vocal_channel == channel) rows.push_back(i);
    }
    return subset(ds, rows);
}

// Augmented rows whose original clip is among `originals`, relabelled with `codec`.
LabeledDataset matching_augmented(const LabeledDataset& augmented, const LabeledDataset& originals) {
    std::set<std::string> paths;
    for (const auto& m : originals.meta) paths.insert(m.source_path);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < augmented.rows(); ++i) {
        const auto& p = augmented.meta[i].source_path;
        const auto hash = p.rfind('#');
        if (hash != std::string::npos && paths.count(p.substr(0, hash))) rows.push_back(i);
    }
    LabeledDataset out = subset(augmented, rows);
    for (auto& label : out.y) label = originals.codec.encode(augmented.codec.decode(label));
    out.codec = originals.codec;
    return out;
}

void check_classes(const LabeledDataset& ds, std::size_t minimum, const std::string& what) {
    const auto counts = ds.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] < minimum) {
            throw InputError(what + ": class '" + ds.codec.classes[c] + "' has " + std::to_string(counts[c]) + " rows, need at least " +
                             std::to_string(minimum));
        }
    }
}

struct ModelJob {
    std::string name;
    ModelParams params;
    Scaling scaling;
    LabeledDataset train;
    LabeledDataset test;
    std::string channel = "all";
    bool augmented = false;
    bool smote = false;
    std::optional<double> cv_mean;  // from a search; otherwise cross-validated here
    bool learning_curve = false;
};

class StageRunner {
public:
    StageRunner(Stage stage, const ExperimentConfig& config, fs::path run_dir, int jobs)
        : stage_(stage), config_(config), run_dir_(std::move(run_dir)), jobs_(jobs) {
        manifest_.config = config;
    }

    std::string stage_prefix() const { return "stage" + std::to_string(static_cast<int>(stage_)); }

    std::uint64_t seed(std::uint64_t stream) const { return Rng::derive(config_.seed, stream).next(); }

    MlpConfig default_mlp() const {
        MlpConfig c;
        c.max_epochs = config_.mlp_max_epochs;
        return c;
    }

    ModelParams search(const std::string& name, ModelKind kind, const LabeledDataset& train, const Scaling& scaling, std::uint64_t stream) {
        const std::string rel = stage_prefix() + "/search_" + name;
        fs::create_directories(run_dir_ / rel);
        ParamSpace space;
        if (kind == ModelKind::svm) {
            space = SvmSearchSpace{};
        } else {
            MlpSearchSpace mlp;
            mlp.base = default_mlp();
            space = mlp;
        }
        SearchOptions options;
        options.n_iter = config_.search_n_iter;
        options.k = config_.search_k;
        options.seed = seed(stream);
        options.scaler = scaling.inner();
        options.jobs = jobs_;
        const SearchResult result = randomized_search(space, scaling.apply(train), options);
        if (!std::isfinite(result.best().mean)) throw Error("search " + name + ": every candidate failed");

        SearchRecord rec;
        rec.name = name;
        rec.stage = static_cast<int>(stage_);
        rec.kind = kind;
        rec.n_iter = options.n_iter;
        rec.k = options.k;
        rec.best_index = result.best_index;
        rec.best_mean = result.best().mean;
        rec.best_params = result.best().params;
        write_search_csv(run_dir_ / rel / "search.csv", result, options.k);
        rec.artifacts["search"] = rel + "/search.csv";
        if (kind == ModelKind::svm) {
            write_search_surface_csv(run_dir_ / rel / "search_surface.csv", result);
            rec.artifacts["surface"] = rel + "/search_surface.csv";
        }
        manifest_.timings[rel] = result.total_seconds;
        manifest_.searches.push_back(rec);
        last_search_mean_ = rec.best_mean;
        return rec.best_params;
    }

    void train(ModelJob job) {
        const std::string rel = stage_prefix() + "/" + job.name;
        fs::create_directories(run_dir_ / rel);
        const std::uint64_t fit_seed = seed(1000 * static_cast<std::uint64_t>(stage_) + manifest_.models.size());

        Stopwatch fit_clock;
        const LabeledDataset train_scaled = job.scaling.apply(job.train);
        TrainedModel model = fit_model(job.params, job.scaling.inner(), train_scaled.X, train_scaled.y, job.train.codec, fit_seed, jobs_);
        if (job.scaling.prefit) model.scaler = *job.scaling.prefit;
        manifest_.timings[rel + "/fit"] = fit_clock.seconds();
        save_model(run_dir_ / rel / "model.json", model);

        const Trainer trainer = make_model_trainer(job.params, job.scaling.inner(), job.train.codec);
        double cv_mean = 0.0;
        if (job.cv_mean) {
            cv_mean = *job.cv_mean;
        } else {
            const auto scores = cross_val_score(trainer, train_scaled, config_.search_k, seed(2000 + manifest_.models.size()));
            for (double s : scores) cv_mean += s;
            cv_mean /= static_cast<double>(scores.size());
        }

        ReportBundle train_bundle{job.train.codec.classes, job.train.y, {}, {}, {}};
        Prediction p = model.predict(job.train.X);
        train_bundle.y_pred = p.labels;
        train_bundle.scores = std::move(p.scores);
        const Evaluation train_ev = render_report(train_bundle, run_dir_ / rel / "train");

        ReportBundle test_bundle{job.test.codec.classes, job.test.y, {}, {}, {}};
        p = model.predict(job.test.X);
        test_bundle.y_pred = p.labels;
        test_bundle.scores = std::move(p.scores);
        if (job.learning_curve) {
            Stopwatch lc_clock;
            test_bundle.learning_curve = learning_curve(trainer, train_scaled, config_.learning_curve_fractions, config_.search_k,
                                                        seed(3000 + manifest_.models.size()));
            manifest_.timings[rel + "/learning_curve"] = lc_clock.seconds();
        }
        const Evaluation test_ev = render_report(test_bundle, run_dir_ / rel / "test");

        ModelRecord rec;
        rec.name = job.name;
        rec.stage = static_cast<int>(stage_);
        rec.kind = kind_of(job.params);
        rec.scaler = std::string(to_string(job.scaling.kind)) + (job.scaling.prefit ? " (fit before split)" : "");
        rec.channel = job.channel;
        rec.augmented = job.augmented;
        rec.smote = job.smote;
        rec.params = job.params;
        rec.train_accuracy = train_ev.report.accuracy;
        rec.test_accuracy = test_ev.report.accuracy;
        rec.cv_mean = cv_mean;
        rec.converged = model.converged;
        rec.train_rows = job.train.rows();
        rec.test_rows = job.test.rows();
        rec.artifacts["model"] = rel + "/model.json";
        rec.artifacts["train_report"] = rel + "/train/report.json";
        rec.artifacts["test_report"] = rel + "/test/report.json";
        if (job.learning_curve) rec.artifacts["learning_curve"] = rel + "/test/learning_curve.csv";
        if (!model.converged) warn(rel + ": training stopped before convergence");
        manifest_.models.push_back(std::move(rec));
    }

    // Search both algorithms on `train`, then fit and report the winners.
    void optimize_pair(const std::string& suffix, const LabeledDataset& train_ds, const LabeledDataset& test_ds, const Scaling& scaling,
                       std::uint64_t stream, const std::string& channel, bool augmented, bool smoted) {
        for (ModelKind kind : {ModelKind::svm, ModelKind::mlp}) {
            const std::string name = std::string(to_string(kind)) + "_" + suffix;
            ModelJob job;
            job.name = name;
            job.params = search(name, kind, train_ds, scaling, stream + (kind == ModelKind::svm ? 0 : 1));
            job.scaling = scaling;
            job.train = train_ds;
            job.test = test_ds;
            job.channel = channel;
            job.augmented = augmented;
            job.smote = smoted;
            job.cv_mean = last_search_mean_;
            job.learning_curve = true;
            train(std::move(job));
        }
    }

    RunManifest finish() { return std::move(manifest_); }

private:
    Stage stage_;
    ExperimentConfig config_;
    fs::path run_dir_;
    int jobs_;
    RunManifest manifest_;
    double last_search_mean_ = 0.0;
};

}  // namespace

RunManifest run_stage(Stage stage, const ExperimentConfig& config, const StageInputs& inputs, const fs::path& out_dir, int jobs) {
    config.validate();
    const auto expected = feature_layout(config.feature_config()).size;
    if (static_cast<std::size_t>(inputs.dataset.X.cols()) != expected) {
        throw InputError("features have " + std::to_string(inputs.dataset.X.cols()) + " columns, expected " + std::to_string(expected));
    }
    if (inputs.augmented && static_cast<std::size_t>(inputs.augmented->X.cols()) != expected) {
        throw InputError("augmented features have " + std::to_string(inputs.augmented->X.cols()) + " columns, expected " +
                         std::to_string(expected));
    }

    LabeledDataset ds = config.channel ? select_channel(inputs.dataset, *config.channel) : inputs.dataset;
    if (ds.rows() == 0) throw InputError("no feature rows left after the channel filter");
    check_classes(ds, 2, "dataset");

    StageRunner runner(stage, config, out_dir, jobs);
    const std::uint64_t split_seed = runner.seed(1);
    const std::string channel_name = config.channel ? std::string(to_string(*config.channel)) : "all";
    Stopwatch stage_clock;

    switch (stage) {
        case Stage::scaling_comparison: {
            const auto [train, test] = stratified_split(ds, config.test_fraction, split_seed);
            check_classes(train, static_cast<std::size_t>(config.search_k), "training split");
            const ScalerKind kinds[] = {ScalerKind::none, ScalerKind::standard, ScalerKind::minmax};
            std::vector<ModelJob> jobs_list;
            for (ModelKind kind : {ModelKind::svm, ModelKind::mlp}) {
                for (ScalerKind sk : kinds) {
                    ModelJob job;
                    job.name = std::string(to_string(kind)) + "_" + std::string(to_string(sk));
                    if (kind == ModelKind::svm) {
                        SvmParams p;
                        p.gamma_scale = true;
                        job.params = p;
                    } else {
                        job.params = runner.default_mlp();
                    }
                    job.scaling = make_scaling(sk, ds, config.paper_faithful);
                    job.train = train;
                    job.test = test;
                    job.channel = channel_name;
                    jobs_list.push_back(std::move(job));
                }
            }
            ModelJob es;
            es.name = "mlp_standard_early_stopping";
            MlpConfig c = runner.default_mlp();
            c.early_stopping = true;
            es.params = c;
            es.scaling = make_scaling(ScalerKind::standard, ds, config.paper_faithful);
            es.train = train;
            es.test = test;
            es.channel = channel_name;
            jobs_list.push_back(std::move(es));
            for (auto& job : jobs_list) runner.train(std::move(job));
            break;
        }
        case Stage::optimized: {
            const auto [train, test] = stratified_split(ds, config.test_fraction, split_seed);
            check_classes(train, static_cast<std::size_t>(config.search_k), "training split");
            runner.optimize_pair("optimized", train, test, make_scaling(config.scaler, ds, config.paper_faithful), 20, channel_name, false, false);
            break;
        }
        case Stage::augmented_smote: {
            const bool augmenting = !config.augment.empty();
            if (augmenting && !inputs.augmented) throw InputError("stage 3 needs augmented features (none were supplied)");
            LabeledDataset train, test;
            if (config.paper_faithful) {
                // Literal ordering: balance the whole dataset, then split, then augment the training originals.
                const LabeledDataset balanced = config.smote ? smote(ds, config.smote_k, runner.seed(31)) : ds;
                std::tie(train, test) = stratified_split(balanced, config.test_fraction, split_seed);
                if (augmenting) train = concat(train, matching_augmented(*inputs.augmented, train));
            } else {
                std::tie(train, test) = stratified_split(ds, config.test_fraction, split_seed);
                if (augmenting) train = concat(train, matching_augmented(*inputs.augmented, train));
                if (config.smote) train = smote(train, config.smote_k, runner.seed(31));
            }
            check_classes(train, static_cast<std::size_t>(config.search_k), "training split");
            runner.optimize_pair("augmented_smote", train, test, make_scaling(config.scaler, ds, config.paper_faithful), 30, channel_name,
                                 augmenting, config.smote);
            break;
        }
        case Stage::channel_split: {
            if (config.channel) throw InputError("stage 4 splits by channel itself; run it with channel 'all'");
            std::vector<std::pair<VocalChannel, std::pair<LabeledDataset, LabeledDataset>>> parts;
            for (VocalChannel ch : {VocalChannel::speech, VocalChannel::song}) {
                const LabeledDataset sub = select_channel(ds, ch);
                const std::string what = std::string(to_string(ch)) + " subset";
                if (sub.rows() == 0) throw InputError(what + " is empty");
                check_classes(sub, 2, what);
                auto split = stratified_split(sub, config.test_fraction, runner.seed(40 + static_cast<std::uint64_t>(ch)));
                check_classes(split.first, static_cast<std::size_t>(config.search_k), what + " training split");
                parts.emplace_back(ch, std::move(split));
            }
            for (const auto& [ch, split] : parts) {
                const LabeledDataset sub = select_channel(ds, ch);
                runner.optimize_pair(std::string(to_string(ch)), split.first, split.second, make_scaling(config.scaler, sub, config.paper_faithful),
                                     50 + 10 * static_cast<std::uint64_t>(ch), std::string(to_string(ch)), false, false);
            }
            break;
        }
    }
    RunManifest manifest = runner.finish();
    manifest.timings[runner.stage_prefix()] = stage_clock.seconds();
    return manifest;
}

json manifest_to_json(const RunManifest& manifest) {
    json models = json::array();
    for (const auto& m : manifest.models) {
        models.push_back({{"name", m.name},
                          {"stage", m.stage},
                          {"kind", to_string(m.kind)},
                          {"scaler", m.scaler},
                          {"channel", m.channel},
                          {"augmented", m.augmented},
                          {"smote", m.smote},
                          {"params", params_to_json(m.params)},
                          {"train_accuracy", m.train_accuracy},
                          {"test_accuracy", m.test_accuracy},
                          {"cv_mean", m.cv_mean},
                          {"converged", m.converged},
                          {"train_rows", m.train_rows},
                          {"test_rows", m.test_rows},
                          {"artifacts", m.artifacts}});
    }
    json searches = json::array();
    for (const auto& s : manifest.searches) {
        searches.push_back({{"name", s.name},
                            {"stage", s.stage},
                            {"kind", to_string(s.kind)},
                            {"n_iter", s.n_iter},
                            {"k", s.k},
                            {"best_index", s.best_index},
                            {"best_mean", s.best_mean},
                            {"best_params", params_to_json(s.best_params)},
                            {"artifacts", s.artifacts}});
    }
    return json{{"format", "emovox-run"},
                {"version", 1},
                {"config", config_to_json(manifest.config)},
                {"models", models},
                {"searches", searches},
                {"all_converged", manifest.all_converged()}};
}

void write_run_manifest(const fs::path& out_dir, const RunManifest& manifest) {
    fs::create_directories(out_dir);
    for (const auto& m : manifest.models) {
        for (const auto& [key, rel] : m.artifacts) {
            if (!fs::exists(out_dir / rel)) throw Error("manifest: missing artifact " + (out_dir / rel).string());
        }
    }
    for (const auto& s : manifest.searches) {
        for (const auto& [key, rel] : s.artifacts) {
            if (!fs::exists(out_dir / rel)) throw Error("manifest: missing artifact " + (out_dir / rel).string());
        }
    }
    {
        std::ofstream out(out_dir / "manifest.json", std::ios::binary);
        if (!out) throw Error("cannot write " + (out_dir / "manifest.json").string());
        out << manifest_to_json(manifest).dump(2) << '\n';
    }
    std::ofstream out(out_dir / "timings.json", std::ios::binary);
    if (!out) throw Error("cannot write " + (out_dir / "timings.json").string());
    out << json(manifest.timings).dump(2) << '\n';
}

}  // namespace emovox
