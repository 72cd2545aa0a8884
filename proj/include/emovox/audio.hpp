#pragma once

#include "emovox/common.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace emovox {

/// Mono PCM samples at a fixed rate. Nominal amplitude range is [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 0;

    double duration_seconds() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

/// Decodes a RIFF/WAVE container holding 16/24/32-bit integer PCM or 32-bit
/// float, mono or stereo. Stereo is averaged to mono. Throws DecodeError.
AudioClip decode_wav(std::span<const std::byte> bytes);
AudioClip read_wav(const std::filesystem::path& path);

enum class WavEncoding { pcm16, float32 };

std::vector<std::byte> encode_wav(const AudioClip& clip, WavEncoding encoding = WavEncoding::pcm16);
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding = WavEncoding::pcm16);

/// Band-limited windowed-sinc resampling to target_rate. Output length is
/// round(len * target / source); equal rates return the input unchanged.
AudioClip resample(const AudioClip& clip, int target_rate);

/// Resamples the raw sequence by `ratio` (output samples per input sample).
/// Low-pass cutoff follows min(1, ratio) so downsampling stays alias-free.
std::vector<double> resample_by_ratio(std::span<const double> input, double ratio);

}  // namespace emovox
