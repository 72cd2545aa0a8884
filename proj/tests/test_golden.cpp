#include <doctest.h>

#include "golden_support.hpp"

#include <cstdio>

TEST_CASE("mel, MFCC and full feature vectors match the reference data") {
    for (const char* name : testing::kGoldenClips) {
        CAPTURE(name);
        const auto e = testing::golden_errors(EMOVOX_GOLDEN_DIR, name);
        std::printf("%-8s mel %.3e  mfcc %.3e  features %.3e\n", name, e.mel, e.mfcc, e.features);
        CHECK(e.mel < 1e-3);
        CHECK(e.mfcc < 1e-3);
        CHECK(e.features < 1e-3);
    }
}

TEST_CASE("golden clips decode to the reference length") {
    const auto clip = emovox::read_wav(std::string(EMOVOX_GOLDEN_DIR) + "/tone440.wav");
    CHECK(clip.sample_rate == 22050);
    CHECK(clip.samples.size() == 16537);
    CHECK(emovox::stft(clip).frames() == 33);
}
