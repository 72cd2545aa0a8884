#include <doctest.h>

#include "emovox/model.hpp"
#include "support.hpp"

#include <fstream>

using namespace emovox;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

TrainedModel svm_model(const LabeledDataset& ds) {
    SvmParams p;
    p.C = 5.0;
    p.kernel.gamma = 0.2;
    return fit_model(p, ScalerKind::standard, ds.X, ds.y, ds.codec, 3);
}

TrainedModel mlp_model(const LabeledDataset& ds) {
    MlpConfig c;
    c.hidden_layers = {8, 6};
    c.activation = Activation::logistic;
    c.max_epochs = 20;
    return fit_model(c, ScalerKind::minmax, ds.X, ds.y, ds.codec, 3);
}

}  // namespace

TEST_CASE("saved models reload with bit-identical predictions") {
    testing::TempDir tmp("model");
    const auto ds = testing::blobs(3, 34, 5, 1.5, 2);  // 102 rows
    for (const auto& model : {svm_model(ds), mlp_model(ds)}) {
        const auto path = tmp.path() / (std::string(to_string(model.kind())) + ".json");
        save_model(path, model);
        const auto loaded = load_model(path, model.kind());
        CHECK(loaded.codec.classes == ds.codec.classes);
        CHECK(loaded.scaler.kind == model.scaler.kind);
        const auto a = model.predict(ds.X);
        const auto b = loaded.predict(ds.X);
        CHECK(a.labels == b.labels);
        CHECK(a.scores == b.scores);
        save_model(tmp.path() / "again.json", loaded);
        CHECK(slurp(path) == slurp(tmp.path() / "again.json"));
    }
}

TEST_CASE("corrupt, truncated and mismatched files are rejected") {
    testing::TempDir tmp("model_bad");
    const auto ds = testing::blobs(2, 6, 2, 0.5, 1);
    const auto path = tmp.path() / "m.json";
    save_model(path, svm_model(ds));
    const std::string text = slurp(path);

    CHECK_THROWS_AS(load_model(path, ModelKind::mlp), InputError);
    CHECK_NOTHROW(load_model(path, ModelKind::svm));
    CHECK_NOTHROW(load_model(path));

    std::ofstream(tmp.path() / "trunc.json") << text.substr(0, text.size() / 2);
    CHECK_THROWS_AS(load_model(tmp.path() / "trunc.json"), InputError);
    CHECK_THROWS_AS(load_model(tmp.path() / "missing.json"), InputError);

    auto j = nlohmann::json::parse(text);
    j["version"] = 99;
    std::ofstream(tmp.path() / "v.json") << j.dump();
    CHECK_THROWS_AS(load_model(tmp.path() / "v.json"), InputError);

    j = nlohmann::json::parse(text);
    j.erase("classes");
    std::ofstream(tmp.path() / "c.json") << j.dump();
    CHECK_THROWS_AS(load_model(tmp.path() / "c.json"), InputError);
}

TEST_CASE("parameters round-trip through json") {
    SvmParams s;
    s.C = 41.8;
    s.kernel = {KernelKind::poly, 0.03, 3, 0.0};
    CHECK(std::get<SvmParams>(params_from_json(params_to_json(s))) == s);
    MlpConfig m;
    m.hidden_layers = {100, 50};
    m.solver = Solver::sgd;
    m.epsilon = 0.1;
    m.learning_rate_mode = LearningRateMode::adaptive;
    CHECK(std::get<MlpConfig>(params_from_json(params_to_json(m))) == m);
    CHECK(kind_of(ModelParams{m}) == ModelKind::mlp);
}

TEST_CASE("fit_model applies the scaler and gamma scale") {
    const auto ds = testing::blobs(2, 10, 3, 1.0, 4);
    SvmParams p;
    p.gamma_scale = true;
    const auto model = fit_model(p, ScalerKind::none, ds.X, ds.y, ds.codec, 1);
    const auto& svm = std::get<SvmMulticlassModel>(model.model);
    const double var = (ds.X.array() - ds.X.mean()).square().mean();
    CHECK(svm.pairs[0].model.kernel.gamma == doctest::Approx(1.0 / (3.0 * var)));
    CHECK(scale_gamma(Matrix::Constant(4, 2, 3.0)) == 1.0);
    CHECK_THROWS_AS(model.predict(Matrix::Zero(2, 4)), InputError);
}
