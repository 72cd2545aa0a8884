#include <doctest.h>

#include "emovox/preprocess.hpp"
#include "support.hpp"

#include <map>
#include <set>

using namespace emovox;

TEST_CASE("standard scaler uses the population deviation") {
    Matrix X(3, 1);
    X << 1, 2, 3;
    const auto p = fit_scaler(X, ScalerKind::standard);
    CHECK(p.first[0] == doctest::Approx(2.0));
    CHECK(p.second[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));
    Matrix one(1, 2);
    one << 4, 5;
    const auto q = fit_scaler(one, ScalerKind::standard);
    CHECK(q.second[0] == 0.0);
    CHECK(q.second[1] == 0.0);
}

TEST_CASE("minmax scaler maps onto [0, 1]") {
    Matrix X(3, 1);
    X << 2, 4, 6;
    const auto p = fit_scaler(X, ScalerKind::minmax);
    CHECK(p.first[0] == 2.0);
    CHECK(p.second[0] == 6.0);
    const Matrix Y = apply_scaler(p, X);
    CHECK(Y(0, 0) == 0.0);
    CHECK(Y(1, 0) == doctest::Approx(0.5));
    CHECK(Y(2, 0) == 1.0);
}

TEST_CASE("scaled columns have zero mean and unit variance; constants become zero") {
    emovox::Rng rng(2);
    Matrix X(50, 4);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = 5.0 + 3.0 * rng.normal();
    X.col(3).setConstant(7.0);
    const Matrix Z = apply_scaler(fit_scaler(X, ScalerKind::standard), X);
    for (Eigen::Index j = 0; j < 3; ++j) {
        const double mean = Z.col(j).mean();
        const double var = (Z.col(j).array() - mean).square().mean();
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(var - 1.0) < 1e-9);
    }
    CHECK(Z.col(3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(apply_scaler(fit_scaler(X, ScalerKind::minmax), X).col(3).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(apply_scaler(fit_scaler(X, ScalerKind::standard), Matrix::Zero(2, 3)), InputError);
}

TEST_CASE("scaler inversion round-trips non-degenerate columns") {
    emovox::Rng rng(8);
    Matrix X(20, 5);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-10.0, 10.0);
    for (ScalerKind kind : {ScalerKind::standard, ScalerKind::minmax, ScalerKind::none}) {
        const auto p = fit_scaler(X, kind);
        CHECK((invert_scaler(p, apply_scaler(p, X)) - X).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("label encoding sorts class names") {
    const auto [codec, codes] = encode_labels({"neutral", "calm", "happy", "sad", "angry", "fearful"});
    const std::vector<std::string> expected{"angry", "calm", "fearful", "happy", "neutral", "sad"};
    CHECK(codec.classes == expected);
    CHECK(codes == std::vector<int>{4, 1, 3, 5, 0, 2});
    const auto [c2, y2] = encode_labels({"b", "a", "b"});
    CHECK(c2.classes == std::vector<std::string>{"a", "b"});
    CHECK(y2 == std::vector<int>{1, 0, 1});
    const auto [c3, y3] = encode_labels({"x", "x"});
    CHECK(y3 == std::vector<int>{0, 0});
    for (int i = 0; i < codec.size(); ++i) CHECK(codec.encode(codec.decode(i)) == i);
}

TEST_CASE("stratified split counts") {
    auto ds = testing::blobs(2, 5, 3, 0.1, 1);
    auto [train, test] = stratified_split(ds, 0.2, 4);
    CHECK(test.class_counts() == std::vector<std::size_t>{1, 1});
    CHECK(train.rows() == 8);

    auto ds2 = testing::blobs(2, 4, 3, 0.1, 1);
    auto [tr2, te2] = stratified_split(ds2, 0.5, 4);
    CHECK(te2.class_counts() == std::vector<std::size_t>{2, 2});

    auto again = stratified_split(ds, 0.2, 4);
    CHECK(again.second.meta == test.meta);
}

TEST_CASE("stratified split property over random class sizes") {
    emovox::Rng rng(77);
    for (int trial = 0; trial < 40; ++trial) {
        LabeledDataset ds;
        const int classes = 2 + static_cast<int>(rng.below(5));
        for (int c = 0; c < classes; ++c) ds.codec.classes.push_back("k" + std::to_string(c));
        const double frac = rng.uniform(0.1, 0.5);
        for (int c = 0; c < classes; ++c) {
            const int count = 2 + static_cast<int>(rng.below(30));
            for (int i = 0; i < count; ++i) {
                ds.y.push_back(c);
                ClipMetadata m;
                m.source_path = std::to_string(ds.y.size());
                ds.meta.push_back(m);
            }
        }
        ds.X = Matrix::Zero(static_cast<Eigen::Index>(ds.y.size()), 1);
        const auto [train, test] = stratified_split(ds, frac, rng.next());
        const auto all = ds.class_counts();
        const auto tc = test.class_counts();
        for (int c = 0; c < classes; ++c) {
            CHECK(std::abs(static_cast<double>(tc[static_cast<std::size_t>(c)]) - all[static_cast<std::size_t>(c)] * frac) <= 1.0);
        }
        CHECK(static_cast<long>(test.rows()) == std::lround(static_cast<double>(ds.rows()) * frac));
        std::set<std::string> seen;
        for (const auto& m : train.meta) seen.insert(m.source_path);
        for (const auto& m : test.meta) CHECK(seen.insert(m.source_path).second);
        CHECK(seen.size() == ds.rows());
    }
}

TEST_CASE("split rejects singleton classes and bad fractions") {
    auto ds = testing::blobs(2, 3, 2, 0.1, 1);
    CHECK_THROWS_AS(stratified_split(ds, 0.0, 1), InputError);
    CHECK_THROWS_AS(stratified_split(ds, 1.0, 1), InputError);
    const std::vector<std::size_t> rows{0, 1, 2, 3};
    CHECK_THROWS_AS(stratified_split(subset(ds, rows), 0.2, 1), InputError);
}

TEST_CASE("smote leaves balanced data unchanged") {
    const auto ds = testing::blobs(3, 10, 4, 0.5, 3);
    const auto out = smote(ds, 5, 1);
    CHECK(out.rows() == 30);
    CHECK(out.X == ds.X);
}

namespace {

// True when row s lies on the segment between two rows of `pool`.
bool on_some_segment(const Vector& s, const std::vector<Vector>& pool) {
    for (std::size_t a = 0; a < pool.size(); ++a) {
        for (std::size_t b = 0; b < pool.size(); ++b) {
            if (a == b) continue;
            const Vector d = pool[b] - pool[a];
            const double len2 = d.squaredNorm();
            const double u = len2 > 0 ? (s - pool[a]).dot(d) / len2 : 0.0;
            if (u < -1e-12 || u > 1 + 1e-12) continue;
            if ((pool[a] + u * d - s).cwiseAbs().maxCoeff() < 1e-9) return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("smote balances classes with convex combinations of same-class rows") {
    auto big = testing::blobs(2, 10, 3, 1.0, 5);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < 10; ++i) rows.push_back(i);
    for (std::size_t i = 10; i < 15; ++i) rows.push_back(i);
    const auto ds = subset(big, rows);  // classes {10, 5}
    const auto out = smote(ds, 5, 9);
    CHECK(out.class_counts() == std::vector<std::size_t>{10, 10});
    CHECK(out.X.topRows(15) == ds.X);
    std::vector<Vector> minority;
    for (Eigen::Index i = 10; i < 15; ++i) minority.push_back(ds.X.row(i).transpose());
    for (Eigen::Index i = 15; i < 20; ++i) {
        CHECK(out.y[static_cast<std::size_t>(i)] == 1);
        CHECK(on_some_segment(out.X.row(i).transpose(), minority));
        CHECK(out.meta[static_cast<std::size_t>(i)].source_path.rfind("smote:", 0) == 0);
    }
    const auto again = smote(ds, 5, 9);
    CHECK(again.X == out.X);
}

TEST_CASE("smote on duplicated rows and singleton classes") {
    LabeledDataset ds;
    ds.codec.classes = {"a", "b"};
    ds.X.resize(6, 2);
    ds.X << 0, 0, 1, 1, 2, 2, 3, 3, 5, 6, 5, 6;
    ds.y = {0, 0, 0, 0, 1, 1};
    ds.meta.resize(6);
    const auto out = smote(ds, 5, 2);
    for (Eigen::Index i = 6; i < out.X.rows(); ++i) {
        CHECK(out.X(i, 0) == 5.0);
        CHECK(out.X(i, 1) == 6.0);
    }
    ds.y = {0, 0, 0, 0, 0, 1};
    CHECK_THROWS_AS(smote(ds, 5, 2), InputError);
}

TEST_CASE("features csv round-trips") {
    testing::TempDir tmp("features_csv");
    auto ds = testing::blobs(2, 3, 193, 1.0, 1);
    for (auto& m : ds.meta) m.emotion = Emotion::sad;
    ds.meta[1].source_path = "dir with, comma/x.wav";
    write_features_csv(tmp.path() / "f.csv", ds.X, ds.meta);
    const auto [X, meta] = read_features_csv(tmp.path() / "f.csv");
    CHECK(X == ds.X);
    CHECK(meta[1].source_path == ds.meta[1].source_path);
    CHECK(meta[0].emotion == Emotion::sad);
}
