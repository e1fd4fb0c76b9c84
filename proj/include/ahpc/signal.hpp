#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace ahpc {

enum class PcmFormat { raw16le, wav };

// Mono waveform normalized into [-1, 1). source_bit_depth records the
// precision of the original PCM so quantizer step bounds keep a fixed
// meaning across a corpus.
struct SignalBuffer {
    std::vector<double> samples;
    int sample_rate_hz = 8000;
    int source_bit_depth = 12;
};

// Reads little-endian signed 16-bit raw PCM or a mono integer-PCM WAV file
// and scales by 1/2^(source_bit_depth-1). source_bit_depth == 0 means "use
// the container width" (16 for raw). Out-of-range samples are clipped to
// the representable range of the stated depth.
SignalBuffer load_pcm(const std::filesystem::path& path, PcmFormat format, int source_bit_depth = 0);

// Writes 16-bit PCM (raw little-endian or WAV). Values are rounded to the
// nearest 16-bit integer and clipped to [-32768, 32767].
void save_pcm(const SignalBuffer& signal, const std::filesystem::path& path, PcmFormat format);

// Non-overlapping frame over a parent signal. The trailing partial frame
// is kept at its actual length.
struct FrameView {
    std::size_t index = 0;
    std::size_t offset = 0;
    std::span<const double> samples;
    std::span<const double> parent;

    // The `order` samples preceding this frame, newest last, zeros before
    // the signal start.
    std::vector<double> history(std::size_t order) const;
};

std::vector<FrameView> frames(std::span<const double> x, std::size_t frame_len);

inline std::size_t frame_count(std::size_t n, std::size_t frame_len) {
    return (n + frame_len - 1) / frame_len;
}

struct SegSnrReport {
    double segsnr_db = 0.0; // mean of per-segment SNRs
    double std_db = 0.0;    // population std across segments
    std::size_t segment_count = 0;
    std::size_t segment_len = 200;
    std::pair<double, double> clamp_db{0.0, 80.0};
};

// Per-segment SNRs, 10*log10(sum x^2 / sum (x - xhat)^2), clamped into
// clamp_db. A zero-error segment clamps to the ceiling, a silent segment
// with nonzero error to the floor. The trailing partial segment is dropped.
std::vector<double> segment_snrs(std::span<const double> original,
                                 std::span<const double> decoded,
                                 std::size_t segment_len = 200,
                                 std::pair<double, double> clamp_db = {0.0, 80.0});

SegSnrReport segsnr(std::span<const double> original,
                    std::span<const double> decoded,
                    std::size_t segment_len = 200,
                    std::pair<double, double> clamp_db = {0.0, 80.0});

inline SegSnrReport segsnr(const SignalBuffer& original, const SignalBuffer& decoded,
                           std::size_t segment_len = 200,
                           std::pair<double, double> clamp_db = {0.0, 80.0}) {
    return segsnr(std::span<const double>(original.samples),
                  std::span<const double>(decoded.samples), segment_len, clamp_db);
}

} // namespace ahpc
