#pragma once

#include "emovox/audio.hpp"
#include "emovox/common.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace emovox {

/// Magnitude STFT: rows are frequency bins (n_fft/2 + 1), columns are frames.
struct Spectrogram {
    Matrix magnitudes;
    int n_fft = 0;
    int hop = 0;
    int sample_rate = 0;

    Eigen::Index bins() const { return magnitudes.rows(); }
    Eigen::Index frames() const { return magnitudes.cols(); }
    double bin_frequency(Eigen::Index k) const { return static_cast<double>(k) * sample_rate / n_fft; }
};

/// Triangular mel filters on the Slaney scale, area-normalized.
struct MelFilterbank {
    Matrix weights;  // n_mels x bins
    int n_mels = 0;
    double fmin = 0.0;
    double fmax = 0.0;
};

struct FeatureConfig {
    int n_fft = 2048;
    int hop = 512;
    int n_mels = 128;
    int n_mfcc = 40;
    int contrast_bands = 6;
    double contrast_fmin = 200.0;
    double contrast_alpha = 0.02;
};

/// Offsets of each feature family inside a FeatureVector.
/// Default layout: [0,40) mfcc | [40,52) chroma | [52,180) mel | [180,187) contrast | [187,193) tonnetz.
struct FeatureLayout {
    std::size_t mfcc = 0;
    std::size_t chroma = 0;
    std::size_t mel = 0;
    std::size_t contrast = 0;
    std::size_t tonnetz = 0;
    std::size_t size = 0;
};

inline constexpr std::size_t kFeatureDim = 193;

FeatureLayout feature_layout(const FeatureConfig& config = {});

/// Per-clip features: time-averaged rows of every family, concatenated.
struct FeatureVector {
    std::vector<double> values;
};

/// Hann-windowed, reflect-padded (n_fft/2 per side) magnitude STFT with
/// 1 + floor(len/hop) frames.
Spectrogram stft(const AudioClip& clip, int n_fft = 2048, int hop = 512);

/// In-place radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data);

MelFilterbank mel_filterbank(int sample_rate, int n_fft, int n_mels = 128, double fmin = 0.0, double fmax = -1.0);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Mel power spectrogram (n_mels x frames) from |S|^2.
Matrix mel_spectrogram(const Spectrogram& spec, int n_mels = 128);
Matrix mel_spectrogram(const Spectrogram& spec, const MelFilterbank& bank);

/// 10*log10(max(S, amin)), floored at (max - top_db) over the whole matrix.
Matrix power_to_db(const Matrix& power, double amin = 1e-10, double top_db = 80.0);

/// Orthonormal DCT-II of each column, first n_out rows kept.
Matrix dct_ortho(const Matrix& columns, int n_out);

Matrix mfcc_from_mel(const Matrix& mel_power, int n_mfcc = 40);
Matrix mfcc(const AudioClip& clip, int n_mfcc = 40, const FeatureConfig& config = {});

/// Pitch-class energy (12 x frames), each frame scaled so its maximum is 1.
Matrix chromagram(const Spectrogram& spec);

Matrix spectral_contrast(const Spectrogram& spec, int n_bands = 6, double fmin = 200.0, double alpha = 0.02);

/// Tonal centroid projection (6 x frames) of an L1-normalized chromagram.
Matrix tonnetz(const Matrix& chroma);

FeatureVector extract_feature_vector(const AudioClip& clip, const FeatureConfig& config = {});

}  // namespace emovox
