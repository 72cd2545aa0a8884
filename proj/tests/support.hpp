#pragma once

#include "emovox/audio.hpp"
#include "emovox/common.hpp"
#include "emovox/preprocess.hpp"
#include "emovox/random.hpp"

#include <cmath>
#include <complex>
#include <unistd.h>
#include <filesystem>
#include <string>
#include <vector>

namespace testing {

inline constexpr double kPi = 3.141592653589793;

inline emovox::AudioClip sine(double freq, int rate, std::size_t n, double amp = 0.5) {
    emovox::AudioClip clip;
    clip.sample_rate = rate;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) clip.samples[i] = amp * std::sin(2.0 * kPi * freq * static_cast<double>(i) / rate);
    return clip;
}

inline emovox::AudioClip noise(int rate, std::size_t n, std::uint64_t seed, double amp = 0.3) {
    emovox::Rng rng(seed);
    emovox::AudioClip clip;
    clip.sample_rate = rate;
    clip.samples.resize(n);
    for (auto& s : clip.samples) s = amp * rng.uniform(-1.0, 1.0);
    return clip;
}

/// O(n^2) DFT used as an independent reference for the FFT path.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double angle = -2.0 * kPi * static_cast<double>(k * t % n) / static_cast<double>(n);
            acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out[k] = acc;
    }
    return out;
}

/// Frequency (Hz) of the largest |DFT| bin, via a zero-padded power-of-two FFT-free scan.
inline double peak_frequency(const std::vector<double>& x, int rate) {
    const std::size_t n = x.size();
    double best = -1.0;
    std::size_t best_k = 0;
    for (std::size_t k = 1; k < n / 2; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double angle = -2.0 * kPi * static_cast<double>(k * t % n) / static_cast<double>(n);
            acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        if (std::abs(acc) > best) {
            best = std::abs(acc);
            best_k = k;
        }
    }
    return static_cast<double>(best_k) * rate / static_cast<double>(n);
}

/// Richardson-extrapolated central difference of f at 0: O(h^4) truncation
/// error, so h can stay large enough to keep roundoff far below 1e-10.
template <class F>
double richardson_derivative(const F& f, double h = 1e-4) {
    const double d1 = (f(h) - f(-h)) / (2.0 * h);
    const double d2 = (f(h / 2) - f(-h / 2)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("emovox_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Gaussian blobs: `per_class` rows per class around well-separated centres.
inline emovox::LabeledDataset blobs(int n_classes, int per_class, int dim, double spread, std::uint64_t seed) {
    emovox::Rng rng(seed);
    emovox::LabeledDataset ds;
    for (int c = 0; c < n_classes; ++c) ds.codec.classes.push_back("c" + std::to_string(c));
    ds.X.resize(n_classes * per_class, dim);
    int row = 0;
    for (int c = 0; c < n_classes; ++c) {
        for (int i = 0; i < per_class; ++i, ++row) {
            for (int j = 0; j < dim; ++j) ds.X(row, j) = (j % n_classes == c ? 3.0 : 0.0) + spread * rng.normal();
            ds.y.push_back(c);
            emovox::ClipMetadata m;
            m.source_path = "row" + std::to_string(row);
            ds.meta.push_back(m);
        }
    }
    return ds;
}

}  // namespace testing
