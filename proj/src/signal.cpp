#include "ahpc/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ahpc/errors.hpp"

namespace ahpc {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t le32(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
}

std::uint16_t le16(const std::uint8_t* p) { return std::uint16_t(p[0] | p[1] << 8); }

struct WavData {
    int sample_rate = 8000;
    int bits = 16;
    std::vector<std::int32_t> samples;
};

// Minimal RIFF/WAVE reader: PCM format code 1, mono, 8/16/24/32-bit
// integer samples (8-bit is unsigned per the format).
WavData read_wav(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        fail(Errc::format, "malformed wav header in " + path.string());

    WavData wav;
    bool have_fmt = false, have_data = false;
    std::size_t pos = 12;
    std::size_t data_off = 0, data_len = 0;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t chunk_len = le32(bytes.data() + pos + 4);
        const std::uint8_t* chunk = bytes.data() + pos + 8;
        if (pos + 8 + chunk_len > bytes.size())
            fail(Errc::format, "truncated wav chunk in " + path.string());
        if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
            if (chunk_len < 16) fail(Errc::format, "short fmt chunk");
            const int format_code = le16(chunk);
            const int channels = le16(chunk + 2);
            wav.sample_rate = static_cast<int>(le32(chunk + 4));
            wav.bits = le16(chunk + 14);
            if (format_code != 1) fail(Errc::format, "wav is not integer PCM (format code 1)");
            if (channels != 1) fail(Errc::format, "multi-channel wav rejected, want mono");
            if (wav.bits != 8 && wav.bits != 16 && wav.bits != 24 && wav.bits != 32)
                fail(Errc::format, "unsupported wav bits per sample");
            have_fmt = true;
        } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
            data_off = pos + 8;
            data_len = chunk_len;
            have_data = true;
        }
        pos += 8 + chunk_len + (chunk_len & 1); // chunks are word-aligned
    }
    if (!have_fmt || !have_data) fail(Errc::format, "wav missing fmt or data chunk");

    const int bytes_per = wav.bits / 8;
    const std::size_t n = data_len / static_cast<std::size_t>(bytes_per);
    wav.samples.resize(n);
    const std::uint8_t* d = bytes.data() + data_off;
    for (std::size_t i = 0; i < n; ++i, d += bytes_per) {
        std::int32_t v = 0;
        switch (wav.bits) {
            case 8: v = static_cast<std::int32_t>(d[0]) - 128; break;
            case 16: v = static_cast<std::int16_t>(le16(d)); break;
            case 24: {
                std::uint32_t u = std::uint32_t(d[0]) | std::uint32_t(d[1]) << 8 |
                                  std::uint32_t(d[2]) << 16;
                if (u & 0x800000u) u |= 0xff000000u;
                v = static_cast<std::int32_t>(u);
                break;
            }
            case 32: v = static_cast<std::int32_t>(le32(d)); break;
        }
        wav.samples[i] = v;
    }
    return wav;
}

std::vector<double> normalize(const std::vector<std::int32_t>& raw, int depth) {
    const double scale = std::ldexp(1.0, -(depth - 1)); // 1 / 2^(depth-1)
    const double hi = 1.0 - scale;                      // largest representable
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        out[i] = std::clamp(raw[i] * scale, -1.0, hi);
    return out;
}

} // namespace

SignalBuffer load_pcm(const std::filesystem::path& path, PcmFormat format, int source_bit_depth) {
    if (!std::filesystem::exists(path)) fail(Errc::io, "missing file " + path.string());
    SignalBuffer signal;
    if (format == PcmFormat::raw16le) {
        const auto bytes = read_file(path);
        if (bytes.size() % 2 != 0)
            fail(Errc::format, "raw16le file has odd byte length: " + path.string());
        std::vector<std::int32_t> raw(bytes.size() / 2);
        for (std::size_t i = 0; i < raw.size(); ++i)
            raw[i] = static_cast<std::int16_t>(le16(bytes.data() + 2 * i));
        const int depth = source_bit_depth > 0 ? source_bit_depth : 16;
        signal.samples = normalize(raw, depth);
        signal.source_bit_depth = depth;
    } else {
        const WavData wav = read_wav(path);
        const int depth = source_bit_depth > 0 ? source_bit_depth : wav.bits;
        signal.samples = normalize(wav.samples, depth);
        signal.source_bit_depth = depth;
        signal.sample_rate_hz = wav.sample_rate;
    }
    return signal;
}

void save_pcm(const SignalBuffer& signal, const std::filesystem::path& path, PcmFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::io, "cannot write " + path.string());

    std::vector<std::uint8_t> data(signal.samples.size() * 2);
    for (std::size_t i = 0; i < signal.samples.size(); ++i) {
        const double scaled = std::round(signal.samples[i] * 32768.0);
        const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        data[2 * i] = static_cast<std::uint8_t>(v & 0xff);
        data[2 * i + 1] = static_cast<std::uint8_t>((v >> 8) & 0xff);
    }

    if (format == PcmFormat::wav) {
        const std::uint32_t data_len = static_cast<std::uint32_t>(data.size());
        const std::uint32_t rate = static_cast<std::uint32_t>(signal.sample_rate_hz);
        std::uint8_t h[44] = {'R', 'I', 'F', 'F', 0, 0, 0, 0, 'W', 'A', 'V', 'E',
                              'f', 'm', 't', ' ', 16, 0, 0, 0};
        auto put32 = [&](std::size_t off, std::uint32_t v) {
            h[off] = v & 0xff; h[off + 1] = (v >> 8) & 0xff;
            h[off + 2] = (v >> 16) & 0xff; h[off + 3] = (v >> 24) & 0xff;
        };
        auto put16 = [&](std::size_t off, std::uint16_t v) {
            h[off] = v & 0xff; h[off + 1] = (v >> 8) & 0xff;
        };
        put32(4, 36 + data_len);
        put16(20, 1);  // PCM
        put16(22, 1);  // mono
        put32(24, rate);
        put32(28, rate * 2); // byte rate
        put16(32, 2);  // block align
        put16(34, 16); // bits per sample
        h[36] = 'd'; h[37] = 'a'; h[38] = 't'; h[39] = 'a';
        put32(40, data_len);
        out.write(reinterpret_cast<const char*>(h), sizeof h);
    }
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) fail(Errc::io, "write failed: " + path.string());
}

std::vector<double> FrameView::history(std::size_t order) const {
    std::vector<double> h(order, 0.0);
    const std::size_t have = std::min(order, offset);
    for (std::size_t i = 0; i < have; ++i)
        h[order - have + i] = parent[offset - have + i];
    return h;
}

std::vector<FrameView> frames(std::span<const double> x, std::size_t frame_len) {
    if (frame_len < 1) fail(Errc::args, "frame_len must be >= 1");
    std::vector<FrameView> out;
    out.reserve(frame_count(x.size(), frame_len));
    for (std::size_t off = 0, idx = 0; off < x.size(); off += frame_len, ++idx) {
        const std::size_t len = std::min(frame_len, x.size() - off);
        out.push_back(FrameView{idx, off, x.subspan(off, len), x});
    }
    return out;
}

std::vector<double> segment_snrs(std::span<const double> original,
                                 std::span<const double> decoded,
                                 std::size_t segment_len,
                                 std::pair<double, double> clamp_db) {
    if (original.size() != decoded.size())
        fail(Errc::args, "segsnr length mismatch");
    if (segment_len < 1 || original.size() < segment_len)
        fail(Errc::short_input, "signal shorter than one segment");

    std::vector<double> snrs;
    snrs.reserve(original.size() / segment_len);
    for (std::size_t off = 0; off + segment_len <= original.size(); off += segment_len) {
        double sig = 0.0, err = 0.0;
        for (std::size_t i = 0; i < segment_len; ++i) {
            const double x = original[off + i];
            const double d = x - decoded[off + i];
            sig += x * x;
            err += d * d;
        }
        double snr;
        if (err <= 0.0)
            snr = clamp_db.second; // perfectly coded segment
        else if (sig <= 0.0)
            snr = clamp_db.first; // silent segment with noise
        else
            snr = 10.0 * std::log10(sig / err);
        snrs.push_back(std::clamp(snr, clamp_db.first, clamp_db.second));
    }
    return snrs;
}

SegSnrReport segsnr(std::span<const double> original, std::span<const double> decoded,
                    std::size_t segment_len, std::pair<double, double> clamp_db) {
    const auto snrs = segment_snrs(original, decoded, segment_len, clamp_db);
    SegSnrReport report;
    report.segment_len = segment_len;
    report.clamp_db = clamp_db;
    report.segment_count = snrs.size();
    double mean = 0.0;
    for (double s : snrs) mean += s;
    mean /= static_cast<double>(snrs.size());
    double var = 0.0;
    for (double s : snrs) var += (s - mean) * (s - mean);
    var /= static_cast<double>(snrs.size());
    report.segsnr_db = mean;
    report.std_db = std::sqrt(var);
    return report;
}

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::io: return "E_IO";
        case Errc::format: return "E_FORMAT";
        case Errc::args: return "E_ARGS";
        case Errc::bad_magic: return "E_BAD_MAGIC";
        case Errc::bad_version: return "E_BAD_VERSION";
        case Errc::digest_mismatch: return "E_DIGEST_MISMATCH";
        case Errc::truncated: return "E_TRUNCATED";
        case Errc::short_input: return "E_SHORT_INPUT";
    }
    return "E_UNKNOWN";
}

} // namespace ahpc
