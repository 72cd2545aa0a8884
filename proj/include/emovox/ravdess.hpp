#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace emovox {

enum class Modality { audio_video = 1, video_only = 2, audio_only = 3 };
enum class VocalChannel { speech = 1, song = 2 };
enum class Emotion { neutral = 1, calm, happy, sad, angry, fearful, disgust, surprised };
enum class Intensity { normal = 1, strong = 2 };
enum class Gender { male, female };

/// Identity of one RAVDESS recording, decoded from its file name
/// "MM-VV-EE-II-SS-RR-AA.wav".
struct ClipMetadata {
    Modality modality = Modality::audio_only;
    VocalChannel vocal_channel = VocalChannel::speech;
    Emotion emotion = Emotion::neutral;
    Intensity intensity = Intensity::normal;
    int statement = 1;
    int repetition = 1;
    int actor = 1;
    std::string source_path;

    /// Odd actor ids are male, even female.
    Gender gender() const { return actor % 2 == 1 ? Gender::male : Gender::female; }

    bool operator==(const ClipMetadata&) const = default;
};

/// Parses a RAVDESS file name (directories are ignored). Throws ParseError
/// naming the offending field.
ClipMetadata parse_ravdess_filename(std::string_view name);

/// Inverse of parse_ravdess_filename on the identity fields (basename only).
std::string format_ravdess_filename(const ClipMetadata& meta);

std::string_view to_string(Emotion e);
std::string_view to_string(VocalChannel c);
std::string_view to_string(Modality m);
std::string_view to_string(Intensity i);

std::optional<Emotion> emotion_from_string(std::string_view s);
std::optional<VocalChannel> channel_from_string(std::string_view s);

/// The six emotions kept after dropping disgust and surprised.
inline constexpr std::array<Emotion, 6> kKeptEmotions = {
    Emotion::neutral, Emotion::calm, Emotion::happy, Emotion::sad, Emotion::angry, Emotion::fearful};

inline bool is_kept_emotion(Emotion e) { return e != Emotion::disgust && e != Emotion::surprised; }

}  // namespace emovox
