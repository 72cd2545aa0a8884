#include "emovox/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

namespace emovox {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(std::span<const std::byte> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::byte> b, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<std::uint16_t>(b[at]) |
                                      (static_cast<std::uint16_t>(b[at + 1]) << 8));
}

bool tag_is(std::span<const std::byte> b, std::size_t at, const char* tag) {
    return std::memcmp(b.data() + at, tag, 4) == 0;
}

double decode_sample(std::span<const std::byte> b, std::size_t at, std::uint16_t format, int bits) {
    if (format == kFormatFloat) {
        float f;
        const std::uint32_t raw = read_u32(b, at);
        std::memcpy(&f, &raw, sizeof f);
        return static_cast<double>(f);
    }
    switch (bits) {
        case 16: {
            const auto v = static_cast<std::int16_t>(read_u16(b, at));
            return v / 32768.0;
        }
        case 24: {
            std::int32_t v = static_cast<std::int32_t>(static_cast<std::uint32_t>(b[at]) |
                                                       (static_cast<std::uint32_t>(b[at + 1]) << 8) |
                                                       (static_cast<std::uint32_t>(b[at + 2]) << 16));
            if (v & 0x800000) v -= 0x1000000;
            return v / 8388608.0;
        }
        default: {
            const auto v = static_cast<std::int32_t>(read_u32(b, at));
            return v / 2147483648.0;
        }
    }
}

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::vector<std::byte>& out, std::uint16_t v) {
    out.push_back(static_cast<std::byte>(v & 0xFF));
    out.push_back(static_cast<std::byte>(v >> 8));
}

void put_tag(std::vector<std::byte>& out, const char* tag) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>(tag[i]));
}

double bessel_i0(double x) {
    double sum = 1.0;
    double term = 1.0;
    const double half = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half / k) * (half / k);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

// Kaiser-windowed sinc tabulated over [0, kZeroCrossings] zero crossings.
constexpr int kZeroCrossings = 32;
constexpr int kTableDensity = 512;

const std::vector<double>& sinc_kernel() {
    static const std::vector<double> table = [] {
        constexpr double kBeta = 8.6;
        const double i0_beta = bessel_i0(kBeta);
        std::vector<double> t(kZeroCrossings * kTableDensity + 1);
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double z = static_cast<double>(k) / kTableDensity;
            const double u = z / kZeroCrossings;
            const double w = bessel_i0(kBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) / i0_beta;
            const double arg = std::numbers::pi * z;
            t[k] = (k == 0 ? 1.0 : std::sin(arg) / arg) * w;
        }
        t.back() = 0.0;
        return t;
    }();
    return table;
}

}  // namespace

AudioClip decode_wav(std::span<const std::byte> bytes) {
    if (bytes.size() < 12) throw DecodeError("wav: file too short for a RIFF header");
    if (!tag_is(bytes, 0, "RIFF")) throw DecodeError("wav: bad magic, expected RIFF");
    if (!tag_is(bytes, 8, "WAVE")) throw DecodeError("wav: bad magic, expected WAVE");

    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
    bool have_fmt = false;
    std::size_t data_at = 0;
    std::size_t data_size = 0;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::size_t size = read_u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (tag_is(bytes, pos, "fmt ")) {
            if (size < 16 || body + 16 > bytes.size()) throw DecodeError("wav: truncated fmt chunk");
            format = read_u16(bytes, body);
            channels = read_u16(bytes, body + 2);
            rate = read_u32(bytes, body + 4);
            bits = read_u16(bytes, body + 14);
            if (format == kFormatExtensible) {
                if (size < 40 || body + 40 > bytes.size()) throw DecodeError("wav: truncated extensible fmt");
                format = read_u16(bytes, body + 24);
            }
            have_fmt = true;
        } else if (tag_is(bytes, pos, "data")) {
            data_at = body;
            data_size = size;
            have_data = true;
            if (body + size > bytes.size()) throw DecodeError("wav: truncated data chunk");
            break;
        }
        pos = body + size + (size & 1);
    }

    if (!have_fmt) throw DecodeError("wav: missing fmt chunk");
    if (!have_data) throw DecodeError("wav: missing data chunk");
    const bool int_ok = format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32);
    const bool float_ok = format == kFormatFloat && bits == 32;
    if (!int_ok && !float_ok) {
        throw DecodeError("wav: unsupported codec (format " + std::to_string(format) + ", " +
                          std::to_string(bits) + " bits)");
    }
    if (channels != 1 && channels != 2) {
        throw DecodeError("wav: unsupported channel count " + std::to_string(channels));
    }
    if (rate == 0) throw DecodeError("wav: sample rate is zero");

    const std::size_t sample_bytes = bits / 8;
    const std::size_t frame_bytes = sample_bytes * channels;
    if (data_size % frame_bytes != 0) throw DecodeError("wav: truncated data chunk (partial frame)");
    const std::size_t frames = data_size / frame_bytes;
    if (frames == 0) throw DecodeError("wav: no samples");

    AudioClip clip;
    clip.sample_rate = static_cast<int>(rate);
    clip.samples.resize(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t at = data_at + f * frame_bytes;
        double v = decode_sample(bytes, at, format, bits);
        if (channels == 2) v = 0.5 * (v + decode_sample(bytes, at + sample_bytes, format, bits));
        if (!std::isfinite(v)) throw DecodeError("wav: non-finite sample at frame " + std::to_string(f));
        clip.samples[f] = std::clamp(v, -1.0, 1.0);
    }
    return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DecodeError("cannot open " + path.string());
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_wav(std::as_bytes(std::span<const char>(raw)));
    } catch (const DecodeError& e) {
        throw DecodeError(path.string() + ": " + e.what());
    }
}

std::vector<std::byte> encode_wav(const AudioClip& clip, WavEncoding encoding) {
    const bool is_float = encoding == WavEncoding::float32;
    const std::uint16_t bits = is_float ? 32 : 16;
    const std::uint32_t data_size = static_cast<std::uint32_t>(clip.samples.size() * (bits / 8));

    std::vector<std::byte> out;
    out.reserve(44 + data_size);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_size);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, is_float ? kFormatFloat : kFormatPcm);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * (bits / 8));
    put_u16(out, bits / 8);
    put_u16(out, bits);
    put_tag(out, "data");
    put_u32(out, data_size);
    for (double s : clip.samples) {
        const double v = std::clamp(s, -1.0, 1.0);
        if (is_float) {
            const float f = static_cast<float>(v);
            std::uint32_t raw;
            std::memcpy(&raw, &f, sizeof raw);
            put_u32(out, raw);
        } else {
            const long q = std::lround(v * 32768.0);
            put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
        }
    }
    return out;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip, WavEncoding encoding) {
    const auto bytes = encode_wav(clip, encoding);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + path.string());
}

std::vector<double> resample_by_ratio(std::span<const double> input, double ratio) {
    if (!(ratio > 0.0)) throw InputError("resample: ratio must be positive");
    if (ratio == 1.0) return {input.begin(), input.end()};

    const auto& kernel = sinc_kernel();
    constexpr double kRolloff = 0.95;
    const double cutoff = std::min(1.0, ratio) * kRolloff;
    const double half_width = kZeroCrossings / cutoff;

    const auto n_in = static_cast<long>(input.size());
    const auto n_out = static_cast<long>(std::lround(static_cast<double>(input.size()) * ratio));
    std::vector<double> out(static_cast<std::size_t>(std::max(0L, n_out)));

    for (long j = 0; j < n_out; ++j) {
        const double t = static_cast<double>(j) / ratio;
        const long lo = std::max(0L, static_cast<long>(std::ceil(t - half_width)));
        const long hi = std::min(n_in - 1, static_cast<long>(std::floor(t + half_width)));
        double acc = 0.0;
        for (long i = lo; i <= hi; ++i) {
            const double z = std::abs(t - static_cast<double>(i)) * cutoff * kTableDensity;
            const auto k = static_cast<std::size_t>(z);
            if (k + 1 >= kernel.size()) continue;
            const double frac = z - static_cast<double>(k);
            acc += input[static_cast<std::size_t>(i)] * (kernel[k] + frac * (kernel[k + 1] - kernel[k]));
        }
        out[static_cast<std::size_t>(j)] = acc * cutoff;
    }
    return out;
}

AudioClip resample(const AudioClip& clip, int target_rate) {
    if (target_rate <= 0) throw InputError("resample: target rate must be positive");
    if (clip.sample_rate <= 0) throw InputError("resample: clip has no sample rate");
    if (target_rate == clip.sample_rate) return clip;
    AudioClip out;
    out.sample_rate = target_rate;
    out.samples = resample_by_ratio(clip.samples, static_cast<double>(target_rate) / clip.sample_rate);
    return out;
}

}  // namespace emovox
