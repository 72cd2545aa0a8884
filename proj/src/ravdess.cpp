#include "emovox/ravdess.hpp"

#include "emovox/common.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <vector>

namespace emovox {

namespace {

constexpr std::array<const char*, 7> kFieldNames = {"modality",   "vocal channel", "emotion", "intensity",
                                                    "statement", "repetition",    "actor"};

int parse_field(std::string_view token, std::size_t index) {
    const char* name = kFieldNames[index];
    if (token.size() != 2) {
        throw ParseError("ravdess: field " + std::to_string(index + 1) + " (" + name + ") must be two digits, got '" +
                         std::string(token) + "'");
    }
    int value = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || end != token.data() + token.size()) {
        throw ParseError("ravdess: field " + std::to_string(index + 1) + " (" + name + ") is not numeric: '" +
                         std::string(token) + "'");
    }
    return value;
}

[[noreturn]] void out_of_range(std::size_t index, int value) {
    throw ParseError("ravdess: field " + std::to_string(index + 1) + " (" + kFieldNames[index] +
                     ") code out of range: " + std::to_string(value));
}

}  // namespace

ClipMetadata parse_ravdess_filename(std::string_view name) {
    const auto slash = name.find_last_of("/\\");
    std::string_view base = slash == std::string_view::npos ? name : name.substr(slash + 1);
    const std::string_view suffix = ".wav";
    if (base.size() < suffix.size() || base.substr(base.size() - suffix.size()) != suffix) {
        throw ParseError("ravdess: '" + std::string(base) + "' lacks the .wav suffix");
    }
    base.remove_suffix(suffix.size());

    std::vector<std::string_view> tokens;
    std::size_t start = 0;
    while (true) {
        const auto dash = base.find('-', start);
        tokens.push_back(base.substr(start, dash == std::string_view::npos ? base.npos : dash - start));
        if (dash == std::string_view::npos) break;
        start = dash + 1;
    }
    if (tokens.size() != 7) {
        throw ParseError("ravdess: expected 7 hyphen-separated fields (field count), got " +
                         std::to_string(tokens.size()) + " in '" + std::string(name) + "'");
    }

    std::array<int, 7> v{};
    for (std::size_t i = 0; i < 7; ++i) v[i] = parse_field(tokens[i], i);

    if (v[0] < 1 || v[0] > 3) out_of_range(0, v[0]);
    if (v[1] < 1 || v[1] > 2) out_of_range(1, v[1]);
    if (v[2] < 1 || v[2] > 8) out_of_range(2, v[2]);
    if (v[3] < 1 || v[3] > 2) out_of_range(3, v[3]);
    if (v[4] < 1 || v[4] > 2) out_of_range(4, v[4]);
    if (v[5] < 1 || v[5] > 2) out_of_range(5, v[5]);
    if (v[6] < 1 || v[6] > 24) out_of_range(6, v[6]);
    if (v[2] == 1 && v[3] != 1) {
        throw ParseError("ravdess: field 4 (intensity) must be normal for neutral clips");
    }

    ClipMetadata meta;
    meta.modality = static_cast<Modality>(v[0]);
    meta.vocal_channel = static_cast<VocalChannel>(v[1]);
    meta.emotion = static_cast<Emotion>(v[2]);
    meta.intensity = static_cast<Intensity>(v[3]);
    meta.statement = v[4];
    meta.repetition = v[5];
    meta.actor = v[6];
    meta.source_path = std::string(name);
    return meta;
}

std::string format_ravdess_filename(const ClipMetadata& meta) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02d-%02d-%02d-%02d-%02d-%02d-%02d.wav", static_cast<int>(meta.modality),
                  static_cast<int>(meta.vocal_channel), static_cast<int>(meta.emotion),
                  static_cast<int>(meta.intensity), meta.statement, meta.repetition, meta.actor);
    return buf;
}

std::string_view to_string(Emotion e) {
    switch (e) {
        case Emotion::neutral: return "neutral";
        case Emotion::calm: return "calm";
        case Emotion::happy: return "happy";
        case Emotion::sad: return "sad";
        case Emotion::angry: return "angry";
        case Emotion::fearful: return "fearful";
        case Emotion::disgust: return "disgust";
        case Emotion::surprised: return "surprised";
    }
    return "unknown";
}

std::string_view to_string(VocalChannel c) { return c == VocalChannel::speech ? "speech" : "song"; }

std::string_view to_string(Modality m) {
    switch (m) {
        case Modality::audio_video: return "audio_video";
        case Modality::video_only: return "video_only";
        case Modality::audio_only: return "audio_only";
    }
    return "unknown";
}

std::string_view to_string(Intensity i) { return i == Intensity::normal ? "normal" : "strong"; }

std::optional<Emotion> emotion_from_string(std::string_view s) {
    for (int code = 1; code <= 8; ++code) {
        const auto e = static_cast<Emotion>(code);
        if (to_string(e) == s) return e;
    }
    return std::nullopt;
}

std::optional<VocalChannel> channel_from_string(std::string_view s) {
    if (s == "speech") return VocalChannel::speech;
    if (s == "song") return VocalChannel::song;
    return std::nullopt;
}

}  // namespace emovox
