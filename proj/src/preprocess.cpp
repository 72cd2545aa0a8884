#include "emovox/preprocess.hpp"

#include "emovox/csv.hpp"
#include "emovox/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace emovox {

int LabelCodec::encode(const std::string& name) const {
    const auto it = std::lower_bound(classes.begin(), classes.end(), name);
    if (it == classes.end() || *it != name) throw InputError("label codec: unknown class '" + name + "'");
    return static_cast<int>(it - classes.begin());
}

const std::string& LabelCodec::decode(int label) const {
    if (label < 0 || label >= size()) throw InputError("label codec: label out of range");
    return classes[static_cast<std::size_t>(label)];
}

std::pair<LabelCodec, std::vector<int>> encode_labels(const std::vector<std::string>& labels) {
    if (labels.empty()) throw InputError("encode_labels: no labels");
    const std::set<std::string> unique(labels.begin(), labels.end());
    LabelCodec codec{{unique.begin(), unique.end()}};
    std::vector<int> codes;
    codes.reserve(labels.size());
    for (const auto& l : labels) codes.push_back(codec.encode(l));
    return {std::move(codec), std::move(codes)};
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes()), 0);
    for (int label : y) ++counts[static_cast<std::size_t>(label)];
    return counts;
}

LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> rows) {
    LabeledDataset out;
    out.codec = ds.codec;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), ds.X.cols());
    out.y.reserve(rows.size());
    out.meta.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.X.row(static_cast<Eigen::Index>(i)) = ds.X.row(static_cast<Eigen::Index>(rows[i]));
        out.y.push_back(ds.y[rows[i]]);
        if (!ds.meta.empty()) out.meta.push_back(ds.meta[rows[i]]);
    }
    return out;
}

LabeledDataset make_emotion_dataset(Matrix X, std::vector<ClipMetadata> meta) {
    if (static_cast<std::size_t>(X.rows()) != meta.size()) throw InputError("dataset: rows and metadata differ");
    std::vector<std::string> names;
    names.reserve(meta.size());
    for (const auto& m : meta) names.emplace_back(to_string(m.emotion));
    auto [codec, codes] = encode_labels(names);
    return {std::move(X), std::move(codes), std::move(meta), std::move(codec)};
}

void write_features_csv(const std::filesystem::path& path, const Matrix& X, const std::vector<ClipMetadata>& meta) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "path,channel,emotion,actor";
    char name[32];
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        std::snprintf(name, sizeof name, ",f%03ld", static_cast<long>(j));
        out << name;
    }
    out << '\n';
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto& m = meta[static_cast<std::size_t>(i)];
        out << csv::escape(m.source_path) << ',' << to_string(m.vocal_channel) << ',' << to_string(m.emotion) << ','
            << m.actor;
        for (Eigen::Index j = 0; j < X.cols(); ++j) out << ',' << csv::format_double(X(i, j));
        out << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

std::pair<Matrix, std::vector<ClipMetadata>> read_features_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open features file " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw InputError(path.string() + ": empty features file");
    const auto header = csv::split_line(line);
    if (header.size() < 5 || header[0] != "path" || header[1] != "channel" || header[2] != "emotion" ||
        header[3] != "actor" || header[4] != "f000") {
        throw InputError(path.string() + ": header must start with path,channel,emotion,actor,f000");
    }
    const std::size_t dim = header.size() - 4;

    std::vector<std::vector<double>> rows;
    std::vector<ClipMetadata> meta;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = csv::split_line(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (fields.size() != header.size()) throw InputError(where + ": expected " + std::to_string(header.size()) + " fields");
        ClipMetadata m;
        m.source_path = fields[0];
        const auto channel = channel_from_string(fields[1]);
        const auto emotion = emotion_from_string(fields[2]);
        if (!channel) throw InputError(where + ": bad channel '" + fields[1] + "'");
        if (!emotion) throw InputError(where + ": bad emotion '" + fields[2] + "'");
        m.vocal_channel = *channel;
        m.emotion = *emotion;
        try {
            m.actor = std::stoi(fields[3]);
            std::vector<double> values(dim);
            for (std::size_t j = 0; j < dim; ++j) values[j] = csv::parse_double(fields[4 + j]);
            rows.push_back(std::move(values));
        } catch (const std::exception& e) {
            throw InputError(where + ": " + e.what());
        }
        meta.push_back(std::move(m));
    }
    Matrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < dim; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return {std::move(X), std::move(meta)};
}

std::string_view to_string(ScalerKind kind) {
    switch (kind) {
        case ScalerKind::none: return "none";
        case ScalerKind::standard: return "standard";
        case ScalerKind::minmax: return "minmax";
    }
    return "none";
}

ScalerKind scaler_from_string(std::string_view s) {
    if (s == "none") return ScalerKind::none;
    if (s == "standard") return ScalerKind::standard;
    if (s == "minmax") return ScalerKind::minmax;
    throw InputError("unknown scaler '" + std::string(s) + "'");
}

ScalerParams fit_scaler(const Matrix& X, ScalerKind kind) {
    if (X.rows() < 1) throw InputError("fit_scaler: no rows");
    ScalerParams p;
    p.kind = kind;
    const auto d = static_cast<std::size_t>(X.cols());
    if (kind == ScalerKind::none) return p;
    p.first.resize(d);
    p.second.resize(d);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const auto col = X.col(j);
        const auto u = static_cast<std::size_t>(j);
        if (kind == ScalerKind::standard) {
            const double mean = col.mean();
            p.first[u] = mean;
            p.second[u] = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(X.rows()));
        } else {
            p.first[u] = col.minCoeff();
            p.second[u] = col.maxCoeff();
        }
    }
    return p;
}

Matrix apply_scaler(const ScalerParams& params, const Matrix& X) {
    if (params.kind == ScalerKind::none) return X;
    if (static_cast<std::size_t>(X.cols()) != params.first.size()) {
        throw InputError("apply_scaler: column count " + std::to_string(X.cols()) + " does not match scaler (" +
                         std::to_string(params.first.size()) + ")");
    }
    Matrix out(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const auto u = static_cast<std::size_t>(j);
        const double offset = params.first[u];
        const double span =
            params.kind == ScalerKind::standard ? params.second[u] : params.second[u] - params.first[u];
        if (span > 0.0) out.col(j) = (X.col(j).array() - offset) / span;
        else out.col(j).setZero();
    }
    return out;
}

Matrix invert_scaler(const ScalerParams& params, const Matrix& X) {
    if (params.kind == ScalerKind::none) return X;
    if (static_cast<std::size_t>(X.cols()) != params.first.size()) throw InputError("invert_scaler: column mismatch");
    Matrix out(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const auto u = static_cast<std::size_t>(j);
        const double span =
            params.kind == ScalerKind::standard ? params.second[u] : params.second[u] - params.first[u];
        out.col(j) = X.col(j).array() * span + params.first[u];
    }
    return out;
}

std::vector<std::size_t> stratified_test_rows(std::span<const int> y, int n_classes, double test_fraction,
                                              std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InputError("split: test fraction must be in (0, 1)");
    const auto k = static_cast<std::size_t>(n_classes);
    std::vector<std::vector<std::size_t>> by_class(k);
    for (std::size_t i = 0; i < y.size(); ++i) by_class[static_cast<std::size_t>(y[i])].push_back(i);
    for (std::size_t c = 0; c < k; ++c) {
        if (!by_class[c].empty() && by_class[c].size() < 2) {
            throw InputError("split: class " + std::to_string(c) + " has fewer than 2 rows");
        }
    }

    // Largest-remainder apportionment of round(n * f) test rows.
    const auto total = static_cast<std::size_t>(std::llround(static_cast<double>(y.size()) * test_fraction));
    std::vector<std::size_t> take(k);
    std::vector<double> remainder(k);
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double exact = static_cast<double>(by_class[c].size()) * test_fraction;
        const std::size_t room = by_class[c].empty() ? 0 : by_class[c].size() - 1;
        take[c] = std::min(static_cast<std::size_t>(std::floor(exact)), room);
        remainder[c] = exact - static_cast<double>(take[c]);
        assigned += take[c];
    }
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    // First pass lifts classes to ceil(count * f) by largest remainder; later
    // passes only run when the count - 1 cap blocked the first.
    bool progressed = true;
    while (assigned < total && progressed) {
        progressed = false;
        for (std::size_t c : order) {
            if (assigned >= total) break;
            if (take[c] + 1 < by_class[c].size()) {
                ++take[c];
                ++assigned;
                progressed = true;
            }
        }
    }

    Rng rng(seed);
    std::vector<std::size_t> test;
    for (std::size_t c = 0; c < k; ++c) {
        auto rows = by_class[c];
        rng.shuffle(std::span<std::size_t>(rows));
        test.insert(test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take[c]));
    }
    std::sort(test.begin(), test.end());
    return test;
}

std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& ds, double test_fraction,
                                                           std::uint64_t seed) {
    const auto test = stratified_test_rows(ds.y, ds.n_classes(), test_fraction, seed);
    std::vector<std::size_t> train;
    train.reserve(ds.rows() - test.size());
    std::size_t t = 0;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        if (t < test.size() && test[t] == i) ++t;
        else train.push_back(i);
    }
    return {subset(ds, train), subset(ds, test)};
}

LabeledDataset smote(const LabeledDataset& ds, int k, std::uint64_t seed) {
    if (k < 1) throw InputError("smote: k must be at least 1");
    const auto counts = ds.class_counts();
    std::vector<std::vector<std::size_t>> by_class(counts.size());
    for (std::size_t i = 0; i < ds.rows(); ++i) by_class[static_cast<std::size_t>(ds.y[i])].push_back(i);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 1) {
            throw InputError("smote: class '" + ds.codec.decode(static_cast<int>(c)) +
                             "' has a single row, no neighbour to interpolate");
        }
    }
    const std::size_t target = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());

    std::size_t extra = 0;
    for (std::size_t c : counts) extra += c > 0 ? target - c : 0;

    LabeledDataset out = ds;
    out.X.conservativeResize(static_cast<Eigen::Index>(ds.rows() + extra), Eigen::NoChange);
    std::size_t next = ds.rows();

    Rng rng(seed);
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const auto& members = by_class[c];
        if (members.empty() || members.size() >= target) continue;
        const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), members.size() - 1);

        // Neighbour lists within the class; ties go to the lower row index.
        std::vector<std::vector<std::size_t>> neighbours(members.size());
        for (std::size_t a = 0; a < members.size(); ++a) {
            std::vector<std::pair<double, std::size_t>> dist;
            dist.reserve(members.size() - 1);
            for (std::size_t b = 0; b < members.size(); ++b) {
                if (a == b) continue;
                const double d = (ds.X.row(static_cast<Eigen::Index>(members[a])) -
                                  ds.X.row(static_cast<Eigen::Index>(members[b])))
                                     .squaredNorm();
                dist.emplace_back(d, members[b]);
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_eff), dist.end());
            for (std::size_t n = 0; n < k_eff; ++n) neighbours[a].push_back(dist[n].second);
        }

        for (std::size_t s = members.size(); s < target; ++s) {
            const std::size_t a = rng.below(members.size());
            const std::size_t nn = neighbours[a][rng.below(k_eff)];
            const double u = rng.uniform();
            const auto base = ds.X.row(static_cast<Eigen::Index>(members[a]));
            out.X.row(static_cast<Eigen::Index>(next)) = base + u * (ds.X.row(static_cast<Eigen::Index>(nn)) - base);
            out.y.push_back(static_cast<int>(c));
            if (!ds.meta.empty()) {
                ClipMetadata m = ds.meta[members[a]];
                m.source_path = "smote:" + m.source_path;
                out.meta.push_back(std::move(m));
            }
            ++next;
        }
    }
    return out;
}

}  // namespace emovox
