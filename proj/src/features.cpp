#include "emovox/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace emovox {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Index into a signal reflected about its end points (numpy "reflect").
std::size_t reflect_index(long i, long n) {
    if (n == 1) return 0;
    const long period = 2 * (n - 1);
    long m = i % period;
    if (m < 0) m += period;
    return static_cast<std::size_t>(m < n ? m : period - m);
}

Vector row_means(const Matrix& m) {
    if (m.cols() == 0) return Vector::Zero(m.rows());
    return m.rowwise().mean();
}

}  // namespace

void fft(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw InputError("fft: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::size_t half = len / 2;
        for (std::size_t k = 0; k < half; ++k) {
            const std::complex<double> w(std::cos(angle * static_cast<double>(k)),
                                         std::sin(angle * static_cast<double>(k)));
            for (std::size_t i = k; i < n; i += len) {
                const auto u = a[i];
                const auto v = a[i + half] * w;
                a[i] = u + v;
                a[i + half] = u - v;
            }
        }
    }
}

Spectrogram stft(const AudioClip& clip, int n_fft, int hop) {
    if (!is_power_of_two(n_fft)) throw InputError("stft: n_fft must be a power of two");
    if (hop <= 0) throw InputError("stft: hop must be positive");
    if (clip.samples.size() < 2) throw InputError("stft: clip shorter than 2 samples");
    if (clip.sample_rate <= 0) throw InputError("stft: clip has no sample rate");

    const long len = static_cast<long>(clip.samples.size());
    const long pad = n_fft / 2;
    const long frames = 1 + len / hop;
    const int bins = n_fft / 2 + 1;

    std::vector<double> window(static_cast<std::size_t>(n_fft));
    for (int i = 0; i < n_fft; ++i) {
        window[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n_fft);
    }

    Spectrogram spec;
    spec.n_fft = n_fft;
    spec.hop = hop;
    spec.sample_rate = clip.sample_rate;
    spec.magnitudes.resize(bins, frames);

    std::vector<std::complex<double>> buf(static_cast<std::size_t>(n_fft));
    for (long f = 0; f < frames; ++f) {
        const long start = f * hop - pad;
        for (int i = 0; i < n_fft; ++i) {
            const double x = clip.samples[reflect_index(start + i, len)];
            buf[static_cast<std::size_t>(i)] = {x * window[static_cast<std::size_t>(i)], 0.0};
        }
        fft(buf);
        for (int k = 0; k < bins; ++k) spec.magnitudes(k, f) = std::abs(buf[static_cast<std::size_t>(k)]);
    }
    return spec;
}

double hz_to_mel(double hz) {
    constexpr double f_sp = 200.0 / 3.0;
    constexpr double min_log_hz = 1000.0;
    constexpr double min_log_mel = min_log_hz / f_sp;
    const double logstep = std::log(6.4) / 27.0;
    if (hz >= min_log_hz) return min_log_mel + std::log(hz / min_log_hz) / logstep;
    return hz / f_sp;
}

double mel_to_hz(double mel) {
    constexpr double f_sp = 200.0 / 3.0;
    constexpr double min_log_hz = 1000.0;
    constexpr double min_log_mel = min_log_hz / f_sp;
    const double logstep = std::log(6.4) / 27.0;
    if (mel >= min_log_mel) return min_log_hz * std::exp(logstep * (mel - min_log_mel));
    return f_sp * mel;
}

MelFilterbank mel_filterbank(int sample_rate, int n_fft, int n_mels, double fmin, double fmax) {
    if (n_mels < 1) throw InputError("mel: n_mels must be at least 1");
    if (fmax < 0.0) fmax = sample_rate / 2.0;
    const int bins = n_fft / 2 + 1;

    std::vector<double> fft_freqs(static_cast<std::size_t>(bins));
    for (int k = 0; k < bins; ++k) fft_freqs[static_cast<std::size_t>(k)] = k * (sample_rate / 2.0) / (bins - 1);

    const double mel_lo = hz_to_mel(fmin);
    const double mel_hi = hz_to_mel(fmax);
    std::vector<double> edges(static_cast<std::size_t>(n_mels + 2));
    for (int i = 0; i < n_mels + 2; ++i) {
        edges[static_cast<std::size_t>(i)] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));
    }

    MelFilterbank bank;
    bank.n_mels = n_mels;
    bank.fmin = fmin;
    bank.fmax = fmax;
    bank.weights = Matrix::Zero(n_mels, bins);
    for (int m = 0; m < n_mels; ++m) {
        const double lo = edges[static_cast<std::size_t>(m)];
        const double mid = edges[static_cast<std::size_t>(m + 1)];
        const double hi = edges[static_cast<std::size_t>(m + 2)];
        const double norm = 2.0 / (hi - lo);
        bool any = false;
        for (int k = 0; k < bins; ++k) {
            const double f = fft_freqs[static_cast<std::size_t>(k)];
            const double rising = (f - lo) / (mid - lo);
            const double falling = (hi - f) / (hi - mid);
            const double w = std::max(0.0, std::min(rising, falling));
            bank.weights(m, k) = w * norm;
            any = any || w > 0.0;
        }
        if (!any) {
            throw InputError("mel: filter " + std::to_string(m) + " covers no FFT bin; reduce n_mels or raise n_fft");
        }
    }
    return bank;
}

Matrix mel_spectrogram(const Spectrogram& spec, const MelFilterbank& bank) {
    if (bank.weights.cols() != spec.bins()) throw InputError("mel: filterbank does not match spectrogram bins");
    return bank.weights * spec.magnitudes.cwiseAbs2();
}

Matrix mel_spectrogram(const Spectrogram& spec, int n_mels) {
    return mel_spectrogram(spec, mel_filterbank(spec.sample_rate, spec.n_fft, n_mels));
}

Matrix power_to_db(const Matrix& power, double amin, double top_db) {
    Matrix db = power.unaryExpr([amin](double v) { return 10.0 * std::log10(std::max(v, amin)); });
    if (top_db >= 0.0 && db.size() > 0) {
        const double floor = db.maxCoeff() - top_db;
        db = db.cwiseMax(floor);
    }
    return db;
}

Matrix dct_ortho(const Matrix& columns, int n_out) {
    const auto n = columns.rows();
    if (n_out < 1 || n_out > n) throw InputError("dct: coefficient count must be in [1, rows]");
    Matrix basis(n_out, n);
    for (int k = 0; k < n_out; ++k) {
        const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            basis(k, i) = scale * std::cos(std::numbers::pi * k * (2.0 * static_cast<double>(i) + 1.0) /
                                           (2.0 * static_cast<double>(n)));
        }
    }
    return basis * columns;
}

Matrix mfcc_from_mel(const Matrix& mel_power, int n_mfcc) {
    if (n_mfcc > mel_power.rows()) throw InputError("mfcc: n_mfcc exceeds n_mels");
    return dct_ortho(power_to_db(mel_power), n_mfcc);
}

Matrix mfcc(const AudioClip& clip, int n_mfcc, const FeatureConfig& config) {
    if (n_mfcc > config.n_mels) throw InputError("mfcc: n_mfcc exceeds n_mels");
    const auto spec = stft(clip, config.n_fft, config.hop);
    return mfcc_from_mel(mel_spectrogram(spec, config.n_mels), n_mfcc);
}

Matrix chromagram(const Spectrogram& spec) {
    Matrix chroma = Matrix::Zero(12, spec.frames());
    for (Eigen::Index k = 1; k < spec.bins(); ++k) {
        const double f = spec.bin_frequency(k);
        const long pitch = std::lround(12.0 * std::log2(f / 440.0) + 69.0);
        const auto pc = static_cast<Eigen::Index>(((pitch % 12) + 12) % 12);
        chroma.row(pc) += spec.magnitudes.row(k).cwiseAbs2();
    }
    for (Eigen::Index f = 0; f < chroma.cols(); ++f) {
        const double peak = chroma.col(f).maxCoeff();
        if (peak > 0.0) chroma.col(f) /= peak;
    }
    return chroma;
}

Matrix spectral_contrast(const Spectrogram& spec, int n_bands, double fmin, double alpha) {
    if (n_bands < 1) throw InputError("contrast: n_bands must be at least 1");
    if (!(fmin > 0.0)) throw InputError("contrast: fmin must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("contrast: alpha must be in (0, 1]");
    const double nyquist = spec.sample_rate / 2.0;
    if (fmin * std::pow(2.0, n_bands - 1) >= nyquist) {
        throw InputError("contrast: top band starts above Nyquist; reduce fmin or n_bands");
    }

    // Band 0 is everything below fmin; band b >= 1 is one octave starting at
    // fmin * 2^(b-1); the top band runs to Nyquist.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> ranges;
    Eigen::Index k = 0;
    for (int b = 0; b <= n_bands; ++b) {
        const double upper = b == n_bands ? std::numeric_limits<double>::infinity() : fmin * std::pow(2.0, b);
        const Eigen::Index first = k;
        while (k < spec.bins() && spec.bin_frequency(k) < upper) ++k;
        if (k == first) throw InputError("contrast: band " + std::to_string(b) + " contains no FFT bins");
        ranges.emplace_back(first, k);
    }

    const auto db = [](double p) { return 10.0 * std::log10(std::max(p, 1e-10)); };
    Matrix out(n_bands + 1, spec.frames());
    std::vector<double> band;
    for (Eigen::Index f = 0; f < spec.frames(); ++f) {
        for (int b = 0; b <= n_bands; ++b) {
            const auto [first, last] = ranges[static_cast<std::size_t>(b)];
            band.clear();
            for (Eigen::Index i = first; i < last; ++i) band.push_back(spec.magnitudes(i, f) * spec.magnitudes(i, f));
            std::sort(band.begin(), band.end());
            const auto q = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(band.size())));
            double valley = 0.0;
            double peak = 0.0;
            for (std::size_t i = 0; i < q; ++i) {
                valley += band[i];
                peak += band[band.size() - 1 - i];
            }
            out(b, f) = db(peak / static_cast<double>(q)) - db(valley / static_cast<double>(q));
        }
    }
    return out;
}

Matrix tonnetz(const Matrix& chroma) {
    if (chroma.rows() != 12) throw InputError("tonnetz: chroma must have 12 rows");
    Matrix basis(6, 12);
    for (int l = 0; l < 12; ++l) {
        const double fifths = l * 7.0 * std::numbers::pi / 6.0;
        const double minor = l * 3.0 * std::numbers::pi / 2.0;
        const double major = l * 2.0 * std::numbers::pi / 3.0;
        basis(0, l) = std::sin(fifths);
        basis(1, l) = std::cos(fifths);
        basis(2, l) = std::sin(minor);
        basis(3, l) = std::cos(minor);
        basis(4, l) = 0.5 * std::sin(major);
        basis(5, l) = 0.5 * std::cos(major);
    }
    Matrix normalized = chroma;
    for (Eigen::Index f = 0; f < normalized.cols(); ++f) {
        const double total = normalized.col(f).cwiseAbs().sum();
        if (total > 0.0) normalized.col(f) /= total;
    }
    return basis * normalized;
}

FeatureLayout feature_layout(const FeatureConfig& config) {
    FeatureLayout layout;
    layout.mfcc = 0;
    layout.chroma = layout.mfcc + static_cast<std::size_t>(config.n_mfcc);
    layout.mel = layout.chroma + 12;
    layout.contrast = layout.mel + static_cast<std::size_t>(config.n_mels);
    layout.tonnetz = layout.contrast + static_cast<std::size_t>(config.contrast_bands + 1);
    layout.size = layout.tonnetz + 6;
    return layout;
}

FeatureVector extract_feature_vector(const AudioClip& clip, const FeatureConfig& config) {
    if (config.n_mfcc > config.n_mels) throw InputError("features: n_mfcc exceeds n_mels");
    const auto spec = stft(clip, config.n_fft, config.hop);
    const Matrix mel = mel_spectrogram(spec, config.n_mels);
    const Matrix cepstra = mfcc_from_mel(mel, config.n_mfcc);
    const Matrix chroma = chromagram(spec);
    const Matrix contrast =
        spectral_contrast(spec, config.contrast_bands, config.contrast_fmin, config.contrast_alpha);
    const Matrix tonal = tonnetz(chroma);

    const auto layout = feature_layout(config);
    FeatureVector fv;
    fv.values.resize(layout.size);
    const auto put = [&](std::size_t offset, const Matrix& m) {
        const Vector means = row_means(m);
        for (Eigen::Index i = 0; i < means.size(); ++i) fv.values[offset + static_cast<std::size_t>(i)] = means(i);
    };
    put(layout.mfcc, cepstra);
    put(layout.chroma, chroma);
    put(layout.mel, mel);
    put(layout.contrast, contrast);
    put(layout.tonnetz, tonal);
    for (double v : fv.values) {
        if (!std::isfinite(v)) throw Error("features: non-finite value in feature vector");
    }
    return fv;
}

}  // namespace emovox
