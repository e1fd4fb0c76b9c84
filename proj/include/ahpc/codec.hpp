#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ahpc/mlp.hpp"
#include "ahpc/quant.hpp"
#include "ahpc/signal.hpp"

namespace ahpc {

enum class Mode : std::uint8_t { backward = 0, forward = 1 };
enum class PredictorKind : std::uint8_t { lpc_only = 0, mlp_only = 1, hybrid = 2 };

const char* to_string(Mode m);
const char* to_string(PredictorKind p);

struct CodecConfig {
    Mode mode = Mode::backward;
    PredictorKind predictor = PredictorKind::hybrid;
    int lpc_order = 10; // 25 for the LPC-25 comparison runs
    int frame_len = 100;
    int nq = 4;
    QuantState quant = default_quant_state(4);
    TrainConfig train;
    std::uint64_t seed = 0;
    bool parallel_starts = true;
};

// Throws Errc::args on an invalid combination (hybrid requires lpc_order
// 10, frame_len >= 10, nq in 2..5, quantizer table mismatching nq, ...).
void validate(const CodecConfig& cfg);

// Canonical textual serialization of every tunable that both ends must
// agree on but that is not carried in the header: quantizer table, step
// bounds and initial step, and the training schedule. Hashed with FNV-1a
// so decode fails loudly on configuration drift.
std::string tunables_text(const QuantState& quant, const TrainConfig& train);
std::uint64_t tunables_digest(const QuantState& quant, const TrainConfig& train);

// 37-byte header, all integers little-endian.
struct StreamHeader {
    static constexpr std::array<std::uint8_t, 4> kMagic{'A', 'H', 'P', 'C'};
    static constexpr std::uint16_t kVersion = 1;

    std::uint16_t version = kVersion;
    Mode mode = Mode::backward;
    PredictorKind predictor = PredictorKind::hybrid;
    std::uint8_t nq = 4;
    std::uint8_t lpc_order = 10;
    std::uint16_t frame_len = 100;
    std::uint64_t seed = 0;
    std::uint64_t sample_count = 0;
    std::uint8_t source_bit_depth = 12;
    std::uint64_t tunables_digest = 0;
};

inline constexpr std::size_t kHeaderBytes = 37;

// Exact payload size implied by a header: per frame an optional selection
// bit (hybrid), the forward-mode parameter block (64-bit reals), and
// len_f * nq code bits; the trailing partial frame is coded at its
// actual length.
std::size_t expected_payload_bits(const StreamHeader& h);

struct EncodedStream {
    StreamHeader header;
    std::vector<std::uint8_t> payload; // bit-packed, zero-padded to a byte at the end only
    std::size_t payload_bits = 0;

    std::vector<std::uint8_t> serialize() const;
    // Throws bad_magic / bad_version / truncated.
    static EncodedStream parse(std::span<const std::uint8_t> bytes);
};

void write_stream(const EncodedStream& s, const std::string& path);
EncodedStream read_stream(const std::string& path);

// Per-frame encode diagnostics. err_* are in-loop squared reconstruction
// errors of the two hybrid trials (NaN when a trial did not run).
struct FrameStat {
    std::uint32_t index = 0;
    std::uint8_t selection = 0; // 0 = LPC, 1 = MLP
    double err_lpc = 0.0;
    double err_mlp = 0.0;
    double err_committed = 0.0;
    std::uint64_t entry_digest = 0;  // loop-state digest before the frame
    bool zero_substituted = false;   // a non-finite prediction occurred
};

struct EncodeResult {
    EncodedStream stream;
    std::vector<double> reconstruction; // the decoder must match this bit-exactly
    std::vector<FrameStat> frames;
    std::vector<std::uint32_t> codes; // packed nq-bit codes, one per sample
    double mlp_usage = 0.0;           // fraction of frames coded with the MLP
    double bits_per_sample = 0.0;     // payload bits / sample count
};

struct DecodeResult {
    SignalBuffer signal;
    StreamHeader header;
    std::vector<std::uint64_t> frame_digests; // entry digests, mirror of FrameStat
};

EncodeResult encode(const SignalBuffer& signal, const CodecConfig& cfg);

// tunables supplies the quantizer template and training schedule (mode,
// predictor, nq, frame_len, lpc_order and seed come from the header).
// Throws digest_mismatch when they disagree with what the encoder used.
DecodeResult decode(const EncodedStream& stream, const CodecConfig& tunables);

// Decode against the built-in defaults for the stream's nq.
DecodeResult decode(const EncodedStream& stream);

} // namespace ahpc
