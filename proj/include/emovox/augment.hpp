#pragma once

#include "emovox/audio.hpp"
#include "emovox/corpus.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace emovox {

enum class AugmentKind { fade_in_out, change_tone };

struct AugmentSpec {
    AugmentKind kind = AugmentKind::fade_in_out;
    double fade_seconds = 0.5;
    double tone_factor = 1.0;

    static AugmentSpec fade(double seconds) { return {AugmentKind::fade_in_out, seconds, 1.0}; }
    static AugmentSpec tone(double factor) { return {AugmentKind::change_tone, 0.0, factor}; }

    /// Short tag appended to augmented source paths, e.g. "fade0.5" or "tone1.1".
    std::string tag() const;

    bool operator==(const AugmentSpec&) const = default;
};

/// fade 0.5 s, tone 0.9, tone 1.1.
std::vector<AugmentSpec> default_augment_specs();

/// Linear ramps over the first and last round(fade_seconds * rate) samples.
AudioClip fade_in_out(const AudioClip& clip, double fade_seconds);

/// Pitch shift by resampling with ratio 1/tone_factor while keeping the
/// sample rate label: frequencies scale by tone_factor, duration by 1/tone_factor.
AudioClip change_tone(const AudioClip& clip, double tone_factor);

AudioClip apply_augment(const AudioClip& clip, const AugmentSpec& spec);

/// Originals followed, per clip, by one transformed copy per spec. Failed
/// transforms are skipped with a warning.
Corpus augment_corpus(const Corpus& corpus, const std::vector<AugmentSpec>& specs, std::uint64_t seed,
                      int jobs = 1);

}  // namespace emovox
