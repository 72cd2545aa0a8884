#include "emovox/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

namespace emovox {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json metadata_to_json(const ClipMetadata& m) {
    return json{{"modality", to_string(m.modality)},
                {"vocal_channel", to_string(m.vocal_channel)},
                {"emotion", to_string(m.emotion)},
                {"intensity", to_string(m.intensity)},
                {"statement", m.statement},
                {"repetition", m.repetition},
                {"actor", m.actor},
                {"gender", m.gender() == Gender::male ? "male" : "female"},
                {"source_path", m.source_path}};
}

ClipMetadata metadata_from_json(const json& j) {
    ClipMetadata m;
    const auto field = [&](const char* key) -> const json& {
        if (!j.contains(key)) throw InputError(std::string("manifest: missing metadata field '") + key + "'");
        return j.at(key);
    };
    const auto modality = field("modality").get<std::string>();
    if (modality == "audio_only") m.modality = Modality::audio_only;
    else if (modality == "audio_video") m.modality = Modality::audio_video;
    else if (modality == "video_only") m.modality = Modality::video_only;
    else throw InputError("manifest: bad modality '" + modality + "'");
    const auto channel = channel_from_string(field("vocal_channel").get<std::string>());
    if (!channel) throw InputError("manifest: bad vocal_channel");
    m.vocal_channel = *channel;
    const auto emotion = emotion_from_string(field("emotion").get<std::string>());
    if (!emotion) throw InputError("manifest: bad emotion");
    m.emotion = *emotion;
    m.intensity = field("intensity").get<std::string>() == "strong" ? Intensity::strong : Intensity::normal;
    m.statement = field("statement").get<int>();
    m.repetition = field("repetition").get<int>();
    m.actor = field("actor").get<int>();
    m.source_path = field("source_path").get<std::string>();
    return m;
}

}  // namespace

Corpus load_corpus(const fs::path& root, const CorpusOptions& options) {
    if (!fs::is_directory(root)) throw InputError("corpus root is not a directory: " + root.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".wav") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    Corpus corpus;
    std::vector<CorpusClip> selected;
    for (const auto& path : files) {
        ClipMetadata meta;
        try {
            meta = parse_ravdess_filename(path.string());
        } catch (const ParseError& e) {
            warn(std::string("skipping ") + e.what());
            ++corpus.skipped;
            continue;
        }
        if (!is_kept_emotion(meta.emotion)) continue;
        if (options.channel && meta.vocal_channel != *options.channel) continue;
        selected.push_back({{}, std::move(meta)});
    }

    std::vector<char> ok(selected.size(), 0);
    parallel_for(selected.size(), options.jobs, [&](std::size_t i) {
        try {
            selected[i].clip = resample(read_wav(selected[i].meta.source_path), options.sample_rate);
            ok[i] = 1;
        } catch (const Error& e) {
            warn(std::string("skipping unreadable file: ") + e.what());
        }
    });

    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (ok[i]) corpus.clips.push_back(std::move(selected[i]));
        else ++corpus.skipped;
    }
    if (corpus.skipped > 0) warn(std::to_string(corpus.skipped) + " file(s) skipped under " + root.string());
    if (corpus.clips.empty()) throw InputError("empty corpus: no usable RAVDESS clips under " + root.string());
    return corpus;
}

CorpusManifest make_manifest(const Corpus& corpus, int sample_rate) {
    CorpusManifest manifest;
    manifest.sample_rate = sample_rate;
    manifest.skipped = corpus.skipped;
    for (const auto& c : corpus.clips) {
        manifest.entries.push_back({c.meta.source_path, c.meta, c.clip.duration_seconds(), c.clip.samples.size()});
    }
    return manifest;
}

void write_manifest(const fs::path& path, const CorpusManifest& manifest) {
    json clips = json::array();
    for (const auto& e : manifest.entries) {
        clips.push_back({{"path", e.path},
                         {"metadata", metadata_to_json(e.meta)},
                         {"duration", e.duration},
                         {"sample_count", e.sample_count}});
    }
    const json doc{{"version", 1},
                   {"sample_rate", manifest.sample_rate},
                   {"skipped", manifest.skipped},
                   {"clip_count", manifest.entries.size()},
                   {"clips", clips}};
    std::ofstream out(path);
    if (!out) throw Error("cannot write manifest " + path.string());
    out << doc.dump(2) << '\n';
}

CorpusManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("manifest " + path.string() + ": " + e.what());
    }
    CorpusManifest manifest;
    try {
        if (doc.at("version").get<int>() != 1) throw InputError("manifest: unsupported version");
        manifest.sample_rate = doc.at("sample_rate").get<int>();
        manifest.skipped = doc.value("skipped", std::size_t{0});
        for (const auto& c : doc.at("clips")) {
            manifest.entries.push_back({c.at("path").get<std::string>(), metadata_from_json(c.at("metadata")),
                                        c.at("duration").get<double>(), c.at("sample_count").get<std::size_t>()});
        }
    } catch (const json::exception& e) {
        throw InputError("manifest " + path.string() + ": " + e.what());
    }
    return manifest;
}

Corpus load_manifest_audio(const CorpusManifest& manifest, int jobs) {
    Corpus corpus;
    std::vector<CorpusClip> clips(manifest.entries.size());
    std::vector<char> ok(clips.size(), 0);
    parallel_for(clips.size(), jobs, [&](std::size_t i) {
        const auto& e = manifest.entries[i];
        try {
            clips[i].clip = resample(read_wav(e.path), manifest.sample_rate);
            clips[i].meta = e.meta;
            ok[i] = 1;
        } catch (const Error& err) {
            warn(std::string("skipping unreadable file: ") + err.what());
        }
    });
    for (std::size_t i = 0; i < clips.size(); ++i) {
        if (ok[i]) corpus.clips.push_back(std::move(clips[i]));
        else ++corpus.skipped;
    }
    if (corpus.clips.empty()) throw InputError("empty corpus: manifest lists no readable clips");
    return corpus;
}

}  // namespace emovox
