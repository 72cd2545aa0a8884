#include "emovox/augment.hpp"
#include "emovox/corpus.hpp"
#include "emovox/demo_corpus.hpp"
#include "emovox/evaluation.hpp"
#include "emovox/experiment.hpp"
#include "emovox/model.hpp"
#include "emovox/model_select.hpp"
#include "emovox/preprocess.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace emovox;

namespace {

constexpr const char* kRootEnv = "EMOVOX_DATASET_ROOT";
constexpr int kExitConvergence = 3;

std::optional<VocalChannel> parse_channel(const std::string& s) {
    if (s.empty() || s == "all") return std::nullopt;
    if (auto c = channel_from_string(s)) return c;
    throw InputError("channel must be speech, song or all (got '" + s + "')");
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

LabeledDataset load_dataset(const fs::path& path) {
    auto [X, meta] = read_features_csv(path);
    if (meta.empty()) throw InputError(path.string() + ": no rows");
    return make_emotion_dataset(std::move(X), std::move(meta));
}

/// Labels of `path` encoded with an existing codec (e.g. a trained model's).
LabeledDataset load_dataset(const fs::path& path, const LabelCodec& codec) {
    LabeledDataset ds = load_dataset(path);
    for (auto& y : ds.y) y = codec.encode(ds.codec.decode(y));
    ds.codec = codec;
    return ds;
}

ModelKind parse_algorithm(const std::string& s) {
    if (s == "svm") return ModelKind::svm;
    if (s == "mlp") return ModelKind::mlp;
    throw InputError("algorithm must be svm or mlp");
}

ModelParams default_params(ModelKind kind) {
    if (kind == ModelKind::mlp) return MlpConfig{};
    SvmParams p;
    p.gamma_scale = true;
    return p;
}

std::vector<AugmentSpec> specs_from_flags(const std::vector<double>& fades, const std::vector<double>& tones) {
    std::vector<AugmentSpec> specs;
    for (double f : fades) specs.push_back(AugmentSpec::fade(f));
    for (double t : tones) specs.push_back(AugmentSpec::tone(t));
    return specs.empty() ? default_augment_specs() : specs;
}

Corpus corpus_from(const std::string& manifest, const std::string& root, int sample_rate, std::optional<VocalChannel> channel, int jobs) {
    if (!manifest.empty()) return load_manifest_audio(read_manifest(manifest), jobs);
    if (root.empty()) throw InputError(std::string("no dataset: pass --root, --manifest or --features, or set ") + kRootEnv);
    CorpusOptions options;
    options.sample_rate = sample_rate;
    options.channel = channel;
    options.jobs = jobs;
    return load_corpus(root, options);
}

Corpus augmented_only(const Corpus& corpus, const std::vector<AugmentSpec>& specs, std::uint64_t seed, int jobs) {
    Corpus all = augment_corpus(corpus, specs, seed, jobs);
    Corpus out;
    for (auto& c : all.clips) {
        if (c.meta.source_path.find('#') != std::string::npos) out.clips.push_back(std::move(c));
    }
    return out;
}

void print_summary(const RunManifest& m) {
    std::printf("%-32s %5s %-4s %10s %10s %8s %s\n", "model", "stage", "kind", "train_acc", "test_acc", "cv_mean", "converged");
    for (const auto& r : m.models) {
        std::printf("%-32s %5d %-4s %10.4f %10.4f %8.4f %s\n", r.name.c_str(), r.stage, std::string(to_string(r.kind)).c_str(),
                    r.train_accuracy, r.test_accuracy, r.cv_mean, r.converged ? "yes" : "no");
    }
    std::printf("%zu models, %zu searches\n", m.models.size(), m.searches.size());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vocal emotion recognition: features, classifiers and evaluation over RAVDESS-style corpora"};
    app.require_subcommand(1);
    int jobs = 1;
    app.add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Scan a corpus directory and write a JSON manifest");
    std::string root, channel_flag, out;
    int sample_rate = kDefaultSampleRate;
    ingest->add_option("--root", root, "Corpus root")->envname(kRootEnv);
    ingest->add_option("--channel", channel_flag, "speech, song or all");
    ingest->add_option("--sample-rate", sample_rate, "Analysis sample rate")->check(CLI::PositiveNumber);
    ingest->add_option("--out", out, "Manifest path")->required();

    // extract
    auto* extract = app.add_subcommand("extract", "Extract 193-dimensional feature rows for every manifest clip");
    std::string manifest_path;
    FeatureConfig feature_config;
    extract->add_option("--manifest", manifest_path)->required();
    extract->add_option("--out", out, "features.csv path")->required();
    extract->add_option("--n-fft", feature_config.n_fft)->check(CLI::PositiveNumber);
    extract->add_option("--hop", feature_config.hop)->check(CLI::PositiveNumber);
    extract->add_option("--n-mels", feature_config.n_mels)->check(CLI::PositiveNumber);
    extract->add_option("--n-mfcc", feature_config.n_mfcc)->check(CLI::PositiveNumber);

    // augment
    auto* augment = app.add_subcommand("augment", "Write fade/tone augmented copies of every manifest clip");
    std::vector<double> fades, tones;
    std::string out_dir;
    std::uint64_t seed = 42;
    augment->add_option("--manifest", manifest_path)->required();
    augment->add_option("--fade", fades, "Fade length in seconds (repeatable)");
    augment->add_option("--tone", tones, "Pitch factor (repeatable)");
    augment->add_option("--out-dir", out_dir)->required();
    augment->add_option("--seed", seed);

    // preprocess
    auto* prep = app.add_subcommand("preprocess", "Split, balance and scale a features file");
    std::string features_path, scaler_name = "standard";
    double test_frac = 0.2;
    bool use_smote = false;
    int smote_k = 5;
    prep->add_option("--features", features_path)->required();
    prep->add_option("--scaler", scaler_name, "standard, minmax or none");
    prep->add_option("--test-frac", test_frac);
    prep->add_flag("--smote", use_smote, "Oversample the training split");
    prep->add_option("--smote-k", smote_k)->check(CLI::PositiveNumber);
    prep->add_option("--seed", seed);
    prep->add_option("--out-dir", out_dir)->required();

    // search
    auto* search = app.add_subcommand("search", "Randomized hyperparameter search with stratified k-fold CV");
    std::string train_path, algorithm = "svm";
    int n_iter = 10, k = 3;
    search->add_option("--train", train_path)->required();
    search->add_option("--algorithm", algorithm, "svm or mlp");
    search->add_option("--n-iter", n_iter)->check(CLI::PositiveNumber);
    search->add_option("--k", k)->check(CLI::Range(2, 100));
    search->add_option("--scaler", scaler_name, "Scaler refit inside each fold");
    search->add_option("--seed", seed);
    search->add_option("--out-dir", out_dir)->required();

    // train
    auto* train = app.add_subcommand("train", "Fit one classifier and save it");
    std::string params_path;
    train->add_option("--train", train_path)->required();
    train->add_option("--algorithm", algorithm, "svm or mlp (ignored with --params)");
    train->add_option("--params", params_path, "Parameter JSON, e.g. best_params.json from search");
    train->add_option("--scaler", scaler_name);
    train->add_option("--seed", seed);
    train->add_option("--out", out, "Model file")->required();

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a saved model and write the evaluation report");
    std::string model_path, data_path;
    evaluate_cmd->add_option("--model", model_path)->required();
    evaluate_cmd->add_option("--data", data_path, "Labelled features to score")->required();
    evaluate_cmd->add_option("--out-dir", out_dir)->required();
    evaluate_cmd->add_option("--train", train_path, "Training features for a learning curve (needs --params)");
    evaluate_cmd->add_option("--params", params_path);
    evaluate_cmd->add_option("--scaler", scaler_name);
    evaluate_cmd->add_option("--k", k)->check(CLI::Range(2, 100));
    evaluate_cmd->add_option("--seed", seed);

    // reproduce
    auto* reproduce = app.add_subcommand("reproduce", "Run the four-stage study and write manifest.json");
    std::string stage_flag = "all", config_path, preset = "default", augmented_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> n_iter_override;
    bool paper_faithful = false;
    reproduce->add_option("--stage", stage_flag, "1, 2, 3, 4 or all");
    reproduce->add_option("--root", root, "Corpus root")->envname(kRootEnv);
    reproduce->add_option("--manifest", manifest_path, "Corpus manifest from ingest");
    reproduce->add_option("--features", features_path, "Precomputed features.csv");
    reproduce->add_option("--augmented-features", augmented_path, "Precomputed features of augmented clips");
    reproduce->add_option("--config", config_path, "Experiment config JSON");
    reproduce->add_option("--preset", preset, "default or full");
    reproduce->add_option("--seed", seed_override);
    reproduce->add_option("--n-iter", n_iter_override);
    reproduce->add_option("--channel", channel_flag, "Restrict stages 1-3 to speech or song");
    reproduce->add_flag("--paper-faithful", paper_faithful, "Scale before CV and SMOTE before the split");
    reproduce->add_option("--out-dir", out_dir)->required();

    // demo-corpus
    auto* demo = app.add_subcommand("demo-corpus", "Write a small synthetic RAVDESS-style corpus");
    DemoCorpusOptions demo_options;
    std::uint64_t demo_seed = 7;
    demo->add_option("--out-dir", out_dir)->required();
    demo->add_option("--seed", demo_seed);
    demo->add_option("--actors", demo_options.actors)->check(CLI::Range(1, 24));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*ingest) {
            CorpusOptions options;
            options.sample_rate = sample_rate;
            options.channel = parse_channel(channel_flag);
            options.jobs = jobs;
            if (root.empty()) throw InputError(std::string("pass --root or set ") + kRootEnv);
            const Corpus corpus = load_corpus(root, options);
            write_manifest(out, make_manifest(corpus, sample_rate));
            std::printf("%zu clips (%zu skipped) -> %s\n", corpus.clips.size(), corpus.skipped, out.c_str());
        } else if (*extract) {
            const Corpus corpus = load_manifest_audio(read_manifest(manifest_path), jobs);
            auto [X, meta] = extract_corpus_features(corpus, feature_config, jobs);
            write_features_csv(out, X, meta);
            std::printf("%zu rows x %ld features -> %s\n", meta.size(), static_cast<long>(X.cols()), out.c_str());
        } else if (*augment) {
            const CorpusManifest manifest = read_manifest(manifest_path);
            const Corpus corpus = load_manifest_audio(manifest, jobs);
            const Corpus all = augment_corpus(corpus, specs_from_flags(fades, tones), seed, jobs);
            fs::create_directories(out_dir);
            CorpusManifest updated = make_manifest(all, manifest.sample_rate);
            for (std::size_t i = 0; i < all.clips.size(); ++i) {
                const auto& source = all.clips[i].meta.source_path;
                const auto hash = source.rfind('#');
                if (hash == std::string::npos) continue;
                const fs::path file = fs::path(out_dir) / (fs::path(source.substr(0, hash)).stem().string() + "_" + source.substr(hash + 1) + ".wav");
                write_wav(file, all.clips[i].clip, WavEncoding::float32);
                updated.entries[i].path = file.string();
            }
            write_manifest(fs::path(out_dir) / "corpus.json", updated);
            std::printf("%zu clips (%zu new) -> %s\n", all.clips.size(), all.clips.size() - corpus.clips.size(),
                        (fs::path(out_dir) / "corpus.json").string().c_str());
        } else if (*prep) {
            const LabeledDataset ds = load_dataset(features_path);
            auto [tr, te] = stratified_split(ds, test_frac, seed);
            if (use_smote) tr = smote(tr, smote_k, Rng::derive(seed, 1).next());
            const ScalerParams scaler = fit_scaler(tr.X, scaler_from_string(scaler_name));
            fs::create_directories(out_dir);
            write_features_csv(fs::path(out_dir) / "train.csv", apply_scaler(scaler, tr.X), tr.meta);
            write_features_csv(fs::path(out_dir) / "test.csv", apply_scaler(scaler, te.X), te.meta);
            write_json(fs::path(out_dir) / "scaler.json", scaler_to_json(scaler));
            write_json(fs::path(out_dir) / "labels.json", json{{"classes", ds.codec.classes}});
            std::printf("train %zu rows, test %zu rows -> %s\n", tr.rows(), te.rows(), out_dir.c_str());
        } else if (*search) {
            const LabeledDataset ds = load_dataset(train_path);
            const ModelKind kind = parse_algorithm(algorithm);
            ParamSpace space = kind == ModelKind::svm ? ParamSpace(SvmSearchSpace{}) : ParamSpace(MlpSearchSpace{});
            SearchOptions options;
            options.n_iter = n_iter;
            options.k = k;
            options.seed = seed;
            options.scaler = scaler_from_string(scaler_name);
            options.jobs = jobs;
            const SearchResult result = randomized_search(space, ds, options);
            fs::create_directories(out_dir);
            write_search_csv(fs::path(out_dir) / "search.csv", result, k);
            if (kind == ModelKind::svm) write_search_surface_csv(fs::path(out_dir) / "search_surface.csv", result);
            write_json(fs::path(out_dir) / "best_params.json", params_to_json(result.best().params));
            std::printf("best #%zu mean %.4f (%s) in %.1fs\n", result.best_index, result.best().mean, describe(result.best().params).c_str(),
                        result.total_seconds);
        } else if (*train) {
            const LabeledDataset ds = load_dataset(train_path);
            const ModelParams params = params_path.empty() ? default_params(parse_algorithm(algorithm)) : params_from_json(read_json(params_path));
            const TrainedModel model = fit_model(params, scaler_from_string(scaler_name), ds.X, ds.y, ds.codec, seed, jobs);
            save_model(out, model);
            const double acc = accuracy_score(ds.y, model.predict(ds.X).labels);
            std::printf("%s train accuracy %.4f -> %s\n", describe(params).c_str(), acc, out.c_str());
            if (!model.converged) {
                warn("training stopped before convergence");
                return kExitConvergence;
            }
        } else if (*evaluate_cmd) {
            const TrainedModel model = load_model(model_path);
            const LabeledDataset ds = load_dataset(data_path, model.codec);
            ReportBundle bundle{model.codec.classes, ds.y, {}, {}, {}};
            Prediction p = model.predict(ds.X);
            bundle.y_pred = std::move(p.labels);
            bundle.scores = std::move(p.scores);
            if (!train_path.empty()) {
                if (params_path.empty()) throw InputError("--train needs --params to refit models for the learning curve");
                const LabeledDataset tr = load_dataset(train_path, model.codec);
                const Trainer trainer = make_model_trainer(params_from_json(read_json(params_path)), scaler_from_string(scaler_name), model.codec, jobs);
                bundle.learning_curve = learning_curve(trainer, tr, default_learning_curve_fractions(), k, seed);
            }
            const Evaluation ev = render_report(bundle, out_dir);
            std::printf("accuracy %.4f, macro f1 %.4f -> %s\n", ev.report.accuracy, ev.report.macro_f1, out_dir.c_str());
        } else if (*reproduce) {
            ExperimentConfig config;
            if (preset == "full") config = full_preset();
            else if (preset != "default") throw InputError("preset must be default or full");
            if (!config_path.empty()) config = config_from_json(read_json(config_path), config);
            if (seed_override) config.seed = *seed_override;
            if (n_iter_override) config.search_n_iter = *n_iter_override;
            if (paper_faithful) config.paper_faithful = true;
            if (!channel_flag.empty()) config.channel = parse_channel(channel_flag);
            config.validate();

            std::vector<Stage> stages;
            if (stage_flag == "all") stages = {Stage::scaling_comparison, Stage::optimized, Stage::augmented_smote, Stage::channel_split};
            else {
                int n = 0;
                try {
                    n = std::stoi(stage_flag);
                } catch (const std::exception&) {
                    throw InputError("--stage must be 1, 2, 3, 4 or all");
                }
                stages = {stage_from_int(n)};
            }
            const bool needs_augmented =
                !config.augment.empty() && std::find(stages.begin(), stages.end(), Stage::augmented_smote) != stages.end();

            fs::create_directories(out_dir);
            StageInputs inputs;
            std::optional<Corpus> corpus;
            if (!features_path.empty()) {
                inputs.dataset = load_dataset(features_path);
            } else {
                corpus = corpus_from(manifest_path, root, config.sample_rate, std::nullopt, jobs);
                auto [X, meta] = extract_corpus_features(*corpus, config.feature_config(), jobs);
                write_features_csv(fs::path(out_dir) / "features.csv", X, meta);
                inputs.dataset = make_emotion_dataset(std::move(X), std::move(meta));
                std::printf("extracted %zu feature rows\n", inputs.dataset.rows());
            }
            if (needs_augmented) {
                if (!augmented_path.empty()) {
                    inputs.augmented = load_dataset(augmented_path);
                } else {
                    if (!corpus) throw InputError("stage 3 needs audio or --augmented-features when starting from --features");
                    const Corpus aug = augmented_only(*corpus, config.augment, config.seed, jobs);
                    auto [X, meta] = extract_corpus_features(aug, config.feature_config(), jobs);
                    write_features_csv(fs::path(out_dir) / "augmented_features.csv", X, meta);
                    inputs.augmented = make_emotion_dataset(std::move(X), std::move(meta));
                    std::printf("extracted %zu augmented feature rows\n", inputs.augmented->rows());
                }
            }
            RunManifest manifest;
            manifest.config = config;
            for (Stage stage : stages) {
                std::printf("stage %d (%s)\n", static_cast<int>(stage), std::string(to_string(stage)).c_str());
                std::fflush(stdout);
                manifest.append(run_stage(stage, config, inputs, out_dir, jobs));
            }
            write_run_manifest(out_dir, manifest);
            print_summary(manifest);
            if (!manifest.all_converged()) {
                warn("at least one model stopped before convergence");
                return kExitConvergence;
            }
        } else if (*demo) {
            const auto files = write_demo_corpus(out_dir, demo_seed, demo_options);
            std::printf("%zu clips -> %s\n", files.size(), out_dir.c_str());
        }
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
