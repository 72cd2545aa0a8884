#include "emovox/demo_corpus.hpp"

#include "emovox/audio.hpp"
#include "emovox/common.hpp"
#include "emovox/random.hpp"
#include "emovox/ravdess.hpp"

#include <cmath>
#include <cstdio>

namespace emovox {

namespace {

struct Profile {
    Emotion emotion;
    double f0;           // Hz
    double vibrato_hz;
    double vibrato_depth;  // fraction of f0
    double tremolo_hz;
    double noise;        // std of additive noise relative to the tone
    int harmonics;
};

// One voice profile per kept emotion; pitches sit at least ~20% apart.
constexpr Profile kProfiles[] = {
    {Emotion::neutral, 150.0, 0.0, 0.0, 0.0, 0.02, 3},
    {Emotion::calm, 200.0, 3.0, 0.01, 1.0, 0.01, 2},
    {Emotion::happy, 290.0, 6.0, 0.03, 4.0, 0.03, 4},
    {Emotion::sad, 115.0, 2.0, 0.01, 0.5, 0.005, 2},
    {Emotion::angry, 240.0, 0.0, 0.0, 8.0, 0.15, 6},
    {Emotion::fearful, 420.0, 9.0, 0.05, 6.0, 0.06, 3},
};

constexpr double kTwoPi = 6.283185307179586;

AudioClip synthesize(const Profile& p, bool song, Rng& rng, const DemoCorpusOptions& options) {
    const double rate = options.sample_rate;
    const auto n = static_cast<std::size_t>(std::llround(options.seconds * rate));
    const double f0 = p.f0 * (1.0 + 0.03 * rng.uniform(-1.0, 1.0));
    const int harmonics = p.harmonics + (song ? 1 : 0);
    const double noise = p.noise * (song ? 0.5 : 1.0);
    const double vibrato_hz = song ? p.vibrato_hz * 0.5 + 1.0 : p.vibrato_hz;

    std::vector<double> phases(static_cast<std::size_t>(harmonics));
    for (auto& ph : phases) ph = rng.uniform(0.0, kTwoPi);

    AudioClip clip;
    clip.sample_rate = options.sample_rate;
    clip.samples.resize(n);
    const auto edge = static_cast<std::size_t>(0.02 * rate);
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / rate;
        const double f = f0 * (1.0 + p.vibrato_depth * std::sin(kTwoPi * vibrato_hz * t));
        phase += kTwoPi * f / rate;
        double v = 0.0;
        for (int h = 1; h <= harmonics; ++h) v += std::sin(h * phase + phases[static_cast<std::size_t>(h - 1)]) / h;
        const double tremolo = p.tremolo_hz > 0.0 ? 0.75 + 0.25 * std::sin(kTwoPi * p.tremolo_hz * t) : 1.0;
        double env = 1.0;
        if (i < edge) env = static_cast<double>(i) / static_cast<double>(edge);
        else if (n - i <= edge) env = static_cast<double>(n - i - 1) / static_cast<double>(edge);
        clip.samples[i] = static_cast<float>(0.25 * env * (tremolo * v + noise * rng.normal()));
    }
    return clip;
}

}  // namespace

std::vector<std::filesystem::path> write_demo_corpus(const std::filesystem::path& out_dir, std::uint64_t seed,
                                                     const DemoCorpusOptions& options) {
    if (options.actors < 1 || options.actors > 24) throw InputError("demo corpus: actors must be in [1, 24]");
    if (options.sample_rate <= 0 || !(options.seconds > 0.0)) throw InputError("demo corpus: bad rate or duration");
    std::vector<std::filesystem::path> written;
    std::uint64_t index = 0;
    for (int actor = 1; actor <= options.actors; ++actor) {
        char dir[32];
        std::snprintf(dir, sizeof dir, "Actor_%02d", actor);
        const auto actor_dir = out_dir / dir;
        std::filesystem::create_directories(actor_dir);
        for (VocalChannel channel : {VocalChannel::speech, VocalChannel::song}) {
            for (const Profile& p : kProfiles) {
                Rng rng = Rng::derive(seed, index++);
                ClipMetadata meta;
                meta.modality = Modality::audio_only;
                meta.vocal_channel = channel;
                meta.emotion = p.emotion;
                meta.intensity = (p.emotion == Emotion::neutral || actor % 2 == 1) ? Intensity::normal : Intensity::strong;
                meta.statement = 1 + actor % 2;
                meta.repetition = 1;
                meta.actor = actor;
                const auto path = actor_dir / format_ravdess_filename(meta);
                write_wav(path, synthesize(p, channel == VocalChannel::song, rng, options), WavEncoding::pcm16);
                written.push_back(path);
            }
        }
    }
    return written;
}

}  // namespace emovox
