#include <doctest.h>

#include "emovox/corpus.hpp"
#include "support.hpp"

#include <fstream>

using namespace emovox;
namespace fs = std::filesystem;

namespace {

void write_clip(const fs::path& dir, int channel, int emotion, int actor, int rate = 16000) {
    ClipMetadata m;
    m.vocal_channel = static_cast<VocalChannel>(channel);
    m.emotion = static_cast<Emotion>(emotion);
    m.actor = actor;
    fs::create_directories(dir);
    write_wav(dir / format_ravdess_filename(m), testing::sine(200.0 + 50 * emotion, rate, static_cast<std::size_t>(rate / 4)));
}

}  // namespace

TEST_CASE("corpus loading filters emotions, skips junk and sorts by path") {
    testing::TempDir tmp("corpus");
    for (int actor : {2, 1}) {
        const auto dir = tmp.path() / ("Actor_0" + std::to_string(actor));
        for (int emotion = 1; emotion <= 8; ++emotion) write_clip(dir, 1, emotion, actor);
        write_clip(dir, 2, 3, actor);
    }
    // Actor 18 has no song recordings; that is not an error.
    write_clip(tmp.path() / "Actor_18", 1, 5, 18);
    std::ofstream(tmp.path() / "readme.wav") << "not audio";
    std::ofstream(tmp.path() / "03-01-05-01-01-01-03.wav") << "RIFF garbage";
    std::ofstream(tmp.path() / "notes.txt") << "ignored";

    CorpusOptions options;
    options.sample_rate = 8000;
    const Corpus corpus = load_corpus(tmp.path(), options);
    CHECK(corpus.clips.size() == 2 * 7 + 1);  // 6 kept speech emotions + 1 song per actor, plus actor 18
    CHECK(corpus.skipped == 2);
    for (const auto& c : corpus.clips) {
        CHECK(is_kept_emotion(c.meta.emotion));
        CHECK(c.clip.sample_rate == 8000);
        CHECK(c.clip.samples.size() == 2000);
    }
    for (std::size_t i = 1; i < corpus.clips.size(); ++i) CHECK(corpus.clips[i - 1].meta.source_path < corpus.clips[i].meta.source_path);

    options.channel = VocalChannel::song;
    const Corpus song = load_corpus(tmp.path(), options);
    CHECK(song.clips.size() == 2);
    for (const auto& c : song.clips) CHECK(c.meta.vocal_channel == VocalChannel::song);
}

TEST_CASE("parallel loading gives the same corpus") {
    testing::TempDir tmp("corpus_jobs");
    for (int emotion = 1; emotion <= 6; ++emotion) write_clip(tmp.path(), 1, emotion, 4);
    CorpusOptions one, four;
    four.jobs = 4;
    const auto a = load_corpus(tmp.path(), one);
    const auto b = load_corpus(tmp.path(), four);
    REQUIRE(a.clips.size() == b.clips.size());
    for (std::size_t i = 0; i < a.clips.size(); ++i) {
        CHECK(a.clips[i].meta == b.clips[i].meta);
        CHECK(a.clips[i].clip.samples == b.clips[i].clip.samples);
    }
}

TEST_CASE("empty directory is an explicit error") {
    testing::TempDir tmp("corpus_empty");
    CHECK_THROWS_AS(load_corpus(tmp.path()), InputError);
    CHECK_THROWS_AS(load_corpus(tmp.path() / "missing"), InputError);
}

TEST_CASE("manifest round-trips and reloads audio") {
    testing::TempDir tmp("manifest");
    for (int emotion = 1; emotion <= 3; ++emotion) write_clip(tmp.path() / "a", 1, emotion, 7);
    CorpusOptions options;
    options.sample_rate = 8000;
    const Corpus corpus = load_corpus(tmp.path() / "a", options);
    const auto manifest = make_manifest(corpus, 8000);
    write_manifest(tmp.path() / "corpus.json", manifest);
    const auto back = read_manifest(tmp.path() / "corpus.json");
    REQUIRE(back.entries.size() == manifest.entries.size());
    CHECK(back.sample_rate == 8000);
    for (std::size_t i = 0; i < back.entries.size(); ++i) {
        CHECK(back.entries[i].meta == manifest.entries[i].meta);
        CHECK(back.entries[i].path == manifest.entries[i].path);
        CHECK(back.entries[i].sample_count == 2000);
        CHECK(back.entries[i].duration == doctest::Approx(0.25));
    }
    const Corpus reloaded = load_manifest_audio(back);
    REQUIRE(reloaded.clips.size() == corpus.clips.size());
    for (std::size_t i = 0; i < corpus.clips.size(); ++i) CHECK(reloaded.clips[i].clip.samples == corpus.clips[i].clip.samples);
}
