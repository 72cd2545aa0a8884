#pragma once

#include "emovox/audio.hpp"
#include "emovox/ravdess.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace emovox {

inline constexpr int kDefaultSampleRate = 22050;

struct CorpusClip {
    AudioClip clip;
    ClipMetadata meta;
};

struct Corpus {
    std::vector<CorpusClip> clips;
    std::size_t skipped = 0;  // unreadable or non-RAVDESS files
};

struct CorpusOptions {
    int sample_rate = kDefaultSampleRate;
    std::optional<VocalChannel> channel;
    int jobs = 1;
};

/// Loads every RAVDESS-named .wav under root, resampled to the analysis rate,
/// with disgust/surprised dropped. Ordered lexicographically by path.
/// Unreadable files are skipped with a warning; an empty result throws InputError.
Corpus load_corpus(const std::filesystem::path& root, const CorpusOptions& options = {});

/// One row of the JSON corpus manifest.
struct ManifestEntry {
    std::string path;
    ClipMetadata meta;
    double duration = 0.0;
    std::size_t sample_count = 0;
};

struct CorpusManifest {
    int sample_rate = kDefaultSampleRate;
    std::vector<ManifestEntry> entries;
    std::size_t skipped = 0;
};

CorpusManifest make_manifest(const Corpus& corpus, int sample_rate);
void write_manifest(const std::filesystem::path& path, const CorpusManifest& manifest);
CorpusManifest read_manifest(const std::filesystem::path& path);

/// Re-reads the audio named by a manifest. Metadata comes from the manifest,
/// so augmented files with non-RAVDESS names load too.
Corpus load_manifest_audio(const CorpusManifest& manifest, int jobs = 1);

}  // namespace emovox
