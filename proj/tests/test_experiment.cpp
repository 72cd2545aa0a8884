#include <doctest.h>

#include "emovox/demo_corpus.hpp"
#include "emovox/experiment.hpp"
#include "emovox/ravdess.hpp"
#include "support.hpp"

#include <fstream>
#include <map>
#include <set>

using namespace emovox;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// Six separable classes in the full feature layout, alternating vocal channels.
StageInputs synthetic_inputs(int per_class, bool with_augmented) {
    StageInputs in;
    in.dataset = testing::blobs(6, per_class, static_cast<int>(kFeatureDim), 0.6, 17);
    in.dataset.codec.classes = {"angry", "calm", "fearful", "happy", "neutral", "sad"};
    for (std::size_t i = 0; i < in.dataset.meta.size(); ++i) {
        in.dataset.meta[i].vocal_channel = i % 2 == 0 ? VocalChannel::speech : VocalChannel::song;
        in.dataset.meta[i].actor = static_cast<int>(i % 24) + 1;
    }
    if (with_augmented) {
        LabeledDataset aug = in.dataset;
        aug.X.array() += 0.05;
        for (auto& m : aug.meta) m.source_path += "#fade0.5";
        in.augmented = aug;
    }
    return in;
}

ExperimentConfig quick_config() {
    ExperimentConfig c;
    c.search_n_iter = 2;
    c.mlp_max_epochs = 30;
    c.learning_curve_fractions = {0.5, 1.0};
    return c;
}

}  // namespace

TEST_CASE("config json round trip and validation") {
    ExperimentConfig c = full_preset();
    c.seed = 7;
    c.channel = VocalChannel::song;
    c.paper_faithful = true;
    c.scaler = ScalerKind::minmax;
    c.augment = {AugmentSpec::tone(0.8)};
    CHECK(config_from_json(config_to_json(c)) == c);
    CHECK(c.search_n_iter == 50);

    CHECK(config_from_json(nlohmann::json::object()) == ExperimentConfig{});
    try {
        config_from_json(nlohmann::json{{"sead", 1}});
        FAIL("unknown key accepted");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("sead") != std::string::npos);
    }
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"n_fft", -1}}).validate(), InputError);
    ExperimentConfig bad;
    bad.n_mfcc = 200;
    CHECK_THROWS_AS(bad.validate(), InputError);
    CHECK(stage_from_int(4) == Stage::channel_split);
    CHECK_THROWS_AS(stage_from_int(5), InputError);
}

TEST_CASE("demo corpus is parseable and reproducible") {
    testing::TempDir tmp("demo");
    DemoCorpusOptions opt;
    opt.actors = 2;
    opt.seconds = 0.6;
    const auto a = write_demo_corpus(tmp.path() / "a", 5, opt);
    const auto b = write_demo_corpus(tmp.path() / "b", 5, opt);
    CHECK(a.size() == 24);
    std::map<std::string, int> per_emotion;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto meta = parse_ravdess_filename(a[i].filename().string());
        ++per_emotion[std::string(to_string(meta.emotion))];
        CHECK(a[i].parent_path().filename().string().rfind("Actor_", 0) == 0);
        CHECK(slurp(a[i]) == slurp(b[i]));
    }
    CHECK(per_emotion.size() == 6);
    const auto c = write_demo_corpus(tmp.path() / "c", 6, opt);
    CHECK(slurp(c[0]) != slurp(a[0]));
    CHECK(DemoCorpusOptions{}.actors * 12 == 120);
}

TEST_CASE("stage 1 trains seven models and writes their artifacts") {
    testing::TempDir tmp("stage1");
    const auto manifest = run_stage(Stage::scaling_comparison, quick_config(), synthetic_inputs(10, false), tmp.path(), 2);
    CHECK(manifest.models.size() == 7);
    CHECK(manifest.searches.empty());
    int svm = 0;
    for (const auto& m : manifest.models) {
        svm += m.kind == ModelKind::svm;
        for (const auto& [key, rel] : m.artifacts) CHECK(std::filesystem::exists(tmp.path() / rel));
        const auto report = nlohmann::json::parse(slurp(tmp.path() / m.artifacts.at("test_report")));
        CHECK(report.at("accuracy").get<double>() == m.test_accuracy);
    }
    CHECK(svm == 3);
}

TEST_CASE("stage runs are deterministic and independent of the job count") {
    testing::TempDir tmp("determinism");
    const auto inputs = synthetic_inputs(8, false);
    const auto config = quick_config();
    const auto a = run_stage(Stage::optimized, config, inputs, tmp.path() / "a", 1);
    const auto b = run_stage(Stage::optimized, config, inputs, tmp.path() / "b", 3);
    write_run_manifest(tmp.path() / "a", a);
    write_run_manifest(tmp.path() / "b", b);
    CHECK(a.models.size() == 2);
    CHECK(a.searches.size() == 2);
    CHECK(slurp(tmp.path() / "a" / "manifest.json") == slurp(tmp.path() / "b" / "manifest.json"));
    for (const auto& m : a.models) {
        const auto rel = m.artifacts.at("model");
        CHECK(slurp(tmp.path() / "a" / rel) == slurp(tmp.path() / "b" / rel));
    }
    CHECK(std::filesystem::exists(tmp.path() / "a" / "timings.json"));
    CHECK_FALSE(manifest_to_json(a).contains("timings"));
    CHECK(manifest_to_json(a).dump().find("fit_seconds") == std::string::npos);
}

TEST_CASE("stages 3 and 4 produce their model counts") {
    testing::TempDir tmp("stage34");
    const auto config = quick_config();
    const auto s3 = run_stage(Stage::augmented_smote, config, synthetic_inputs(8, true), tmp.path(), 2);
    CHECK(s3.models.size() == 2);
    for (const auto& m : s3.models) {
        CHECK(m.augmented);
        CHECK(m.smote);
    }
    const auto s4 = run_stage(Stage::channel_split, config, synthetic_inputs(12, false), tmp.path(), 2);
    CHECK(s4.models.size() == 4);
    CHECK(s4.searches.size() == 4);
    std::set<std::string> channels;
    for (const auto& m : s4.models) channels.insert(m.channel);
    CHECK(channels == std::set<std::string>{"song", "speech"});

    ExperimentConfig faithful = config;
    faithful.paper_faithful = true;
    CHECK(run_stage(Stage::augmented_smote, faithful, synthetic_inputs(8, true), tmp.path() / "pf", 2).models.size() == 2);
}

TEST_CASE("input problems are reported before training") {
    testing::TempDir tmp("preflight");
    const auto config = quick_config();
    StageInputs narrow;
    narrow.dataset = testing::blobs(6, 6, 10, 0.5, 1);
    CHECK_THROWS_AS(run_stage(Stage::scaling_comparison, config, narrow, tmp.path()), InputError);
    CHECK_THROWS_AS(run_stage(Stage::augmented_smote, config, synthetic_inputs(6, false), tmp.path()), InputError);
    ExperimentConfig speech = config;
    speech.channel = VocalChannel::speech;
    CHECK_THROWS_AS(run_stage(Stage::channel_split, speech, synthetic_inputs(6, false), tmp.path()), InputError);
    CHECK_FALSE(std::filesystem::exists(tmp.path() / "stage1"));
}
