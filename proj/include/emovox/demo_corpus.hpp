#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace emovox {

struct DemoCorpusOptions {
    int actors = 10;  // clips per (emotion, channel)
    int sample_rate = 48000;
    double seconds = 1.5;
};

/// Writes a small synthetic corpus of 16-bit WAVs with RAVDESS-style names:
/// every kept emotion x both vocal channels x `actors`. Each emotion has its own
/// pitch, vibrato and noise profile. Returns the written paths in order.
std::vector<std::filesystem::path> write_demo_corpus(const std::filesystem::path& out_dir, std::uint64_t seed,
                                                     const DemoCorpusOptions& options = {});

}  // namespace emovox
