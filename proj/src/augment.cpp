#include "emovox/augment.hpp"

#include <cmath>
#include <cstdio>
#include <optional>

namespace emovox {

std::string AugmentSpec::tag() const {
    char buf[48];
    if (kind == AugmentKind::fade_in_out) std::snprintf(buf, sizeof buf, "fade%g", fade_seconds);
    else std::snprintf(buf, sizeof buf, "tone%g", tone_factor);
    return buf;
}

std::vector<AugmentSpec> default_augment_specs() {
    return {AugmentSpec::fade(0.5), AugmentSpec::tone(0.9), AugmentSpec::tone(1.1)};
}

AudioClip fade_in_out(const AudioClip& clip, double fade_seconds) {
    if (!(fade_seconds >= 0.0)) throw InputError("fade: fade_seconds must be non-negative");
    const auto n = static_cast<std::size_t>(std::llround(fade_seconds * clip.sample_rate));
    if (2 * n > clip.samples.size()) throw InputError("fade: fade window longer than half the clip");
    AudioClip out = clip;
    if (n == 0) return out;
    const std::size_t len = out.samples.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double gain = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        out.samples[i] *= gain;
        out.samples[len - 1 - i] *= gain;
    }
    return out;
}

AudioClip change_tone(const AudioClip& clip, double tone_factor) {
    if (!(tone_factor > 0.0)) throw InputError("tone: tone_factor must be positive");
    AudioClip out;
    out.sample_rate = clip.sample_rate;
    out.samples = resample_by_ratio(clip.samples, 1.0 / tone_factor);
    return out;
}

AudioClip apply_augment(const AudioClip& clip, const AugmentSpec& spec) {
    return spec.kind == AugmentKind::fade_in_out ? fade_in_out(clip, spec.fade_seconds)
                                                 : change_tone(clip, spec.tone_factor);
}

Corpus augment_corpus(const Corpus& corpus, const std::vector<AugmentSpec>& specs, std::uint64_t seed, int jobs) {
    if (specs.empty()) throw InputError("augment: at least one augmentation spec is required");
    // Both transforms are deterministic; the seed is part of the contract so
    // stochastic transforms can be added without changing call sites.
    (void)seed;

    const std::size_t per_clip = specs.size();
    std::vector<std::optional<CorpusClip>> made(corpus.clips.size() * per_clip);
    parallel_for(made.size(), jobs, [&](std::size_t idx) {
        const auto& src = corpus.clips[idx / per_clip];
        const auto& spec = specs[idx % per_clip];
        try {
            CorpusClip copy{apply_augment(src.clip, spec), src.meta};
            copy.meta.source_path += "#" + spec.tag();
            made[idx] = std::move(copy);
        } catch (const Error& e) {
            warn("augment: skipping " + src.meta.source_path + " (" + spec.tag() + "): " + e.what());
        }
    });

    Corpus out;
    out.skipped = corpus.skipped;
    out.clips.reserve(corpus.clips.size() * (1 + per_clip));
    for (std::size_t c = 0; c < corpus.clips.size(); ++c) {
        out.clips.push_back(corpus.clips[c]);
        for (std::size_t s = 0; s < per_clip; ++s) {
            auto& m = made[c * per_clip + s];
            if (m) out.clips.push_back(std::move(*m));
            else ++out.skipped;
        }
    }
    return out;
}

}  // namespace emovox
