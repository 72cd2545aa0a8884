#include "emovox/model.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace emovox {

using nlohmann::json;

std::string_view to_string(ModelKind kind) { return kind == ModelKind::svm ? "svm" : "mlp"; }

ModelKind kind_of(const ModelParams& params) {
    return std::holds_alternative<SvmParams>(params) ? ModelKind::svm : ModelKind::mlp;
}

json params_to_json(const ModelParams& params) {
    if (const auto* s = std::get_if<SvmParams>(&params)) {
        return json{{"kind", "svm"},
                    {"C", s->C},
                    {"kernel", to_string(s->kernel.kind)},
                    {"gamma", s->gamma_scale ? json("scale") : json(s->kernel.gamma)},
                    {"degree", s->kernel.degree},
                    {"coef0", s->kernel.coef0}};
    }
    const auto& m = std::get<MlpConfig>(params);
    return json{{"kind", "mlp"},
                {"hidden_layers", m.hidden_layers},
                {"activation", to_string(m.activation)},
                {"solver", to_string(m.solver)},
                {"alpha", m.alpha},
                {"learning_rate", to_string(m.learning_rate_mode)},
                {"initial_lr", m.initial_lr},
                {"epsilon", m.epsilon},
                {"batch_size", m.batch_size},
                {"max_epochs", m.max_epochs},
                {"early_stopping", m.early_stopping},
                {"validation_fraction", m.validation_fraction},
                {"n_iter_no_change", m.n_iter_no_change},
                {"tol", m.tol},
                {"seed", m.seed}};
}

ModelParams params_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "svm") {
        SvmParams p;
        p.C = j.at("C").get<double>();
        p.kernel.kind = kernel_from_string(j.at("kernel").get<std::string>());
        if (j.at("gamma").is_string()) p.gamma_scale = true;
        else p.kernel.gamma = j.at("gamma").get<double>();
        p.kernel.degree = j.value("degree", 3);
        p.kernel.coef0 = j.value("coef0", 0.0);
        return p;
    }
    if (kind != "mlp") throw InputError("params: unknown model kind '" + kind + "'");
    MlpConfig m;
    m.hidden_layers = j.at("hidden_layers").get<std::vector<int>>();
    m.activation = activation_from_string(j.at("activation").get<std::string>());
    m.solver = solver_from_string(j.at("solver").get<std::string>());
    m.alpha = j.at("alpha").get<double>();
    m.learning_rate_mode = learning_rate_from_string(j.at("learning_rate").get<std::string>());
    m.initial_lr = j.value("initial_lr", m.initial_lr);
    m.epsilon = j.at("epsilon").get<double>();
    m.batch_size = j.value("batch_size", m.batch_size);
    m.max_epochs = j.value("max_epochs", m.max_epochs);
    m.early_stopping = j.value("early_stopping", m.early_stopping);
    m.validation_fraction = j.value("validation_fraction", m.validation_fraction);
    m.n_iter_no_change = j.value("n_iter_no_change", m.n_iter_no_change);
    m.tol = j.value("tol", m.tol);
    m.seed = j.value("seed", m.seed);
    return m;
}

std::string describe(const ModelParams& params) {
    std::ostringstream os;
    if (const auto* s = std::get_if<SvmParams>(&params)) {
        os << "svm kernel=" << to_string(s->kernel.kind) << " C=" << s->C << " gamma=";
        if (s->gamma_scale) os << "scale";
        else os << s->kernel.gamma;
        return os.str();
    }
    const auto& m = std::get<MlpConfig>(params);
    os << "mlp hidden=(";
    for (std::size_t i = 0; i < m.hidden_layers.size(); ++i) os << (i ? "," : "") << m.hidden_layers[i];
    os << ") activation=" << to_string(m.activation) << " solver=" << to_string(m.solver) << " alpha=" << m.alpha
       << " epsilon=" << m.epsilon << " lr=" << to_string(m.learning_rate_mode)
       << (m.early_stopping ? " early_stopping" : "");
    return os.str();
}

double scale_gamma(const Matrix& X) {
    if (X.size() == 0) return 1.0;
    const double mean = X.mean();
    const double var = (X.array() - mean).square().mean();
    return var > 0.0 ? 1.0 / (static_cast<double>(X.cols()) * var) : 1.0;
}

Prediction TrainedModel::predict(const Matrix& X) const {
    const Matrix scaled = apply_scaler(scaler, X);
    if (const auto* svm = std::get_if<SvmMulticlassModel>(&model)) {
        auto p = predict_with_scores(*svm, scaled);
        return {std::move(p.labels), std::move(p.scores)};
    }
    const auto& mlp = std::get<MlpModel>(model);
    Matrix probs = predict_proba(mlp, scaled);
    auto labels = argmax_rows(probs);
    return {std::move(labels), std::move(probs)};
}

TrainedModel fit_model(const ModelParams& params, ScalerKind scaler, const Matrix& X, std::span<const int> y,
                       const LabelCodec& codec, std::uint64_t seed, int jobs) {
    TrainedModel out;
    out.codec = codec;
    out.scaler = fit_scaler(X, scaler);
    const Matrix scaled = apply_scaler(out.scaler, X);
    if (const auto* s = std::get_if<SvmParams>(&params)) {
        SvmOptions options;
        options.C = s->C;
        options.kernel = s->kernel;
        if (s->gamma_scale) options.kernel.gamma = scale_gamma(scaled);
        options.seed = seed;
        auto svm = train_multiclass(scaled, y, codec.size(), options, jobs);
        out.converged = svm.converged();
        out.model = std::move(svm);
    } else {
        MlpConfig config = std::get<MlpConfig>(params);
        config.seed = seed;
        auto trained = train_mlp(config, scaled, y, codec.size());
        out.converged = trained.history.converged;
        out.model = std::move(trained.model);
    }
    return out;
}

json scaler_to_json(const ScalerParams& s) {
    return json{{"kind", to_string(s.kind)}, {"first", s.first}, {"second", s.second}};
}

ScalerParams scaler_from_json(const json& j) {
    ScalerParams s;
    s.kind = scaler_from_string(j.at("kind").get<std::string>());
    s.first = j.at("first").get<std::vector<double>>();
    s.second = j.at("second").get<std::vector<double>>();
    if (s.first.size() != s.second.size()) throw InputError("scaler: statistic vectors differ in length");
    return s;
}

namespace {

json matrix_to_json(const Matrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
        throw InputError("matrix: data length does not match shape");
    }
    Matrix m(rows, cols);
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

json kernel_to_json(const KernelSpec& k) {
    return json{{"kind", to_string(k.kind)}, {"gamma", k.gamma}, {"degree", k.degree}, {"coef0", k.coef0}};
}

KernelSpec kernel_from_json(const json& j) {
    KernelSpec k;
    k.kind = kernel_from_string(j.at("kind").get<std::string>());
    k.gamma = j.at("gamma").get<double>();
    k.degree = j.at("degree").get<int>();
    k.coef0 = j.at("coef0").get<double>();
    return k;
}

}  // namespace

json model_to_json(const TrainedModel& model) {
    json j{{"format", "emovox-model"},
           {"version", kModelFormatVersion},
           {"kind", to_string(model.kind())},
           {"classes", model.codec.classes},
           {"scaler", scaler_to_json(model.scaler)},
           {"converged", model.converged}};
    if (const auto* svm = std::get_if<SvmMulticlassModel>(&model.model)) {
        json pairs = json::array();
        for (const auto& p : svm->pairs) {
            pairs.push_back({{"positive", p.positive},
                             {"negative", p.negative},
                             {"kernel", kernel_to_json(p.model.kernel)},
                             {"C", p.model.C},
                             {"bias", p.model.bias},
                             {"dual_coefs", p.model.dual_coefs},
                             {"support_vectors", matrix_to_json(p.model.support_vectors)},
                             {"converged", p.model.converged},
                             {"iterations", p.model.iterations}});
        }
        j["svm"] = {{"class_count", svm->class_count}, {"pairs", pairs}};
    } else {
        const auto& mlp = std::get<MlpModel>(model.model);
        json layers = json::array();
        for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
            layers.push_back({{"weights", matrix_to_json(mlp.weights[l])},
                              {"biases", std::vector<double>(mlp.biases[l].data(), mlp.biases[l].data() + mlp.biases[l].size())}});
        }
        j["mlp"] = {{"activation", to_string(mlp.activation)}, {"layers", layers}};
    }
    return j;
}

TrainedModel model_from_json(const json& j, std::optional<ModelKind> expect) {
    const auto field = [](const json& obj, const char* key) -> const json& {
        if (!obj.is_object() || !obj.contains(key)) throw InputError(std::string("model: missing field '") + key + "'");
        return obj.at(key);
    };
    try {
        if (field(j, "format").get<std::string>() != "emovox-model") throw InputError("model: field 'format' is not emovox-model");
        const int version = field(j, "version").get<int>();
        if (version != kModelFormatVersion) {
            throw InputError("model: field 'version' " + std::to_string(version) + " is not supported (expected " +
                             std::to_string(kModelFormatVersion) + ")");
        }
        const auto kind_name = field(j, "kind").get<std::string>();
        if (kind_name != "svm" && kind_name != "mlp") throw InputError("model: field 'kind' has unknown value '" + kind_name + "'");
        const ModelKind kind = kind_name == "svm" ? ModelKind::svm : ModelKind::mlp;
        if (expect && *expect != kind) {
            throw InputError("model: kind mismatch, file holds " + kind_name + " but " +
                             std::string(to_string(*expect)) + " was requested");
        }

        TrainedModel model;
        model.codec.classes = field(j, "classes").get<std::vector<std::string>>();
        model.scaler = scaler_from_json(field(j, "scaler"));
        model.converged = j.value("converged", true);
        if (kind == ModelKind::svm) {
            const auto& s = field(j, "svm");
            SvmMulticlassModel svm;
            svm.class_count = field(s, "class_count").get<int>();
            for (const auto& p : field(s, "pairs")) {
                SvmPair pair;
                pair.positive = field(p, "positive").get<int>();
                pair.negative = field(p, "negative").get<int>();
                pair.model.kernel = kernel_from_json(field(p, "kernel"));
                pair.model.C = field(p, "C").get<double>();
                pair.model.bias = field(p, "bias").get<double>();
                pair.model.dual_coefs = field(p, "dual_coefs").get<std::vector<double>>();
                pair.model.support_vectors = matrix_from_json(field(p, "support_vectors"));
                pair.model.converged = p.value("converged", true);
                pair.model.iterations = p.value("iterations", 0L);
                if (static_cast<std::size_t>(pair.model.support_vectors.rows()) != pair.model.dual_coefs.size()) {
                    throw InputError("model: field 'dual_coefs' does not match support vector count");
                }
                svm.pairs.push_back(std::move(pair));
            }
            if (svm.pairs.size() != static_cast<std::size_t>(svm.class_count * (svm.class_count - 1) / 2)) {
                throw InputError("model: field 'pairs' count does not match class_count");
            }
            model.model = std::move(svm);
        } else {
            const auto& m = field(j, "mlp");
            MlpModel mlp;
            mlp.activation = activation_from_string(field(m, "activation").get<std::string>());
            for (const auto& layer : field(m, "layers")) {
                mlp.weights.push_back(matrix_from_json(field(layer, "weights")));
                const auto b = field(layer, "biases").get<std::vector<double>>();
                mlp.biases.push_back(Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size())));
                if (mlp.biases.back().size() != mlp.weights.back().cols()) throw InputError("model: field 'biases' shape mismatch");
                if (mlp.weights.size() > 1 && mlp.weights[mlp.weights.size() - 2].cols() != mlp.weights.back().rows()) {
                    throw InputError("model: field 'layers' shapes do not chain");
                }
            }
            if (mlp.weights.empty()) throw InputError("model: field 'layers' is empty");
            model.model = std::move(mlp);
        }
        return model;
    } catch (const json::exception& e) {
        throw InputError(std::string("model: schema error: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model " + path.string());
    out << model_to_json(model).dump() << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path, std::optional<ModelKind> expect) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("model " + path.string() + ": corrupt or truncated file: " + e.what());
    }
    try {
        return model_from_json(j, expect);
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

}  // namespace emovox
