#include <doctest.h>

#include "emovox/augment.hpp"
#include "support.hpp"

#include <map>

using namespace emovox;

namespace {

double rms(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s / static_cast<double>(x.size()));
}

Corpus small_corpus(int n) {
    Corpus c;
    for (int i = 0; i < n; ++i) {
        CorpusClip clip;
        clip.clip = testing::sine(200.0 + 20 * i, 8000, 8000);
        clip.meta.emotion = kKeptEmotions[static_cast<std::size_t>(i % 6)];
        clip.meta.actor = 1 + i;
        clip.meta.source_path = "clip" + std::to_string(i) + ".wav";
        c.clips.push_back(std::move(clip));
    }
    return c;
}

}  // namespace

TEST_CASE("zero-length fade is the identity") {
    const auto clip = testing::noise(8000, 1000, 1);
    CHECK(fade_in_out(clip, 0.0).samples == clip.samples);
}

TEST_CASE("fade ramps on a constant signal") {
    AudioClip clip;
    clip.sample_rate = 4;
    clip.samples.assign(12, 1.0);
    const auto out = fade_in_out(clip, 1.0);  // n = 4
    const double head[] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
    for (int i = 0; i < 4; ++i) {
        CHECK(out.samples[static_cast<std::size_t>(i)] == doctest::Approx(head[i]));
        CHECK(out.samples[11 - static_cast<std::size_t>(i)] == doctest::Approx(head[i]));
    }
    for (std::size_t i = 4; i < 8; ++i) CHECK(out.samples[i] == 1.0);
    CHECK(out.samples.size() == 12);
    CHECK_THROWS_AS(fade_in_out(clip, 2.0), InputError);
}

TEST_CASE("fading never raises RMS") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto clip = testing::noise(8000, 8000, seed);
        CHECK(rms(fade_in_out(clip, 0.1 + 0.02 * static_cast<double>(seed)).samples) <= rms(clip.samples));
    }
}

TEST_CASE("tone factor 1 is the identity within resampler tolerance") {
    const auto clip = testing::sine(300.0, 22050, 22050);
    const auto out = change_tone(clip, 1.0);
    REQUIRE(out.samples.size() == clip.samples.size());
    for (std::size_t i = 0; i < clip.samples.size(); ++i) CHECK(std::abs(out.samples[i] - clip.samples[i]) < 1e-3);
}

TEST_CASE("tone factor 0.9 moves 440 Hz to 396 Hz") {
    const auto out = change_tone(testing::sine(440.0, 22050, 22050), 0.9);
    CHECK(out.sample_rate == 22050);
    std::vector<double> window(out.samples.begin() + 4000, out.samples.begin() + 4000 + 8192);
    const double bin = 22050.0 / 8192.0;
    CHECK(std::abs(testing::peak_frequency(window, 22050) - 396.0) <= bin);
}

TEST_CASE("tone factor 1.1 shortens the clip") {
    const auto out = change_tone(testing::sine(440.0, 22050, 22050), 1.1);
    CHECK(std::llabs(static_cast<long long>(out.samples.size()) - 20045) <= 1);
}

TEST_CASE("augment_corpus appends one tagged copy per spec") {
    const Corpus corpus = small_corpus(10);
    const std::vector<AugmentSpec> specs{AugmentSpec::fade(0.25), AugmentSpec::tone(1.1)};
    const Corpus out = augment_corpus(corpus, specs, 5);
    REQUIRE(out.clips.size() == 30);
    std::map<Emotion, int> before, after;
    for (const auto& c : corpus.clips) ++before[c.meta.emotion];
    for (const auto& c : out.clips) ++after[c.meta.emotion];
    for (const auto& [e, n] : before) CHECK(after[e] == 3 * n);
    for (std::size_t i = 0; i < 10; ++i) {
        const auto& orig = corpus.clips[i].meta;
        const auto& a = out.clips[3 * i].meta;
        const auto& f = out.clips[3 * i + 1].meta;
        const auto& t = out.clips[3 * i + 2].meta;
        CHECK(a == orig);
        CHECK(f.source_path == orig.source_path + "#fade0.25");
        CHECK(t.source_path == orig.source_path + "#tone1.1");
        for (const auto* m : {&f, &t}) {
            CHECK(m->emotion == orig.emotion);
            CHECK(m->actor == orig.actor);
            CHECK(m->vocal_channel == orig.vocal_channel);
        }
    }
    const Corpus again = augment_corpus(corpus, specs, 5, 3);
    for (std::size_t i = 0; i < out.clips.size(); ++i) CHECK(again.clips[i].clip.samples == out.clips[i].clip.samples);
    CHECK_THROWS_AS(augment_corpus(corpus, {}, 5), InputError);
}

TEST_CASE("a transform that fails on one clip is skipped") {
    Corpus corpus = small_corpus(2);
    corpus.clips[1].clip.samples.resize(100);  // too short for a 0.25 s fade at 8 kHz
    const Corpus out = augment_corpus(corpus, {AugmentSpec::fade(0.25)}, 1);
    CHECK(out.clips.size() == 3);
}
