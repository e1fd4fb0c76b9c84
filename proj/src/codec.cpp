#include "ahpc/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "ahpc/bitstream.hpp"
#include "ahpc/errors.hpp"
#include "ahpc/lpc.hpp"
#include "ahpc/predictor.hpp"

namespace ahpc {

namespace {

constexpr double kDomainLo = -1.0;
// Largest double below 1.0; reconstruction is clamped back into the
// signal domain so backward training always sees in-range samples.
const double kDomainHi = std::nextafter(1.0, 0.0);

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct LoopOutput {
    std::vector<std::uint32_t> codes; // packed nq-bit values
    std::vector<double> rec;
    double sq_err = 0.0;
    bool zero_substituted = false;
    QuantState quant;
};

// The closed loop both ends share: predict from reconstructed history,
// quantize the residual, reconstruct, adapt the step. A non-finite
// prediction switches to the zero predictor for the rest of the frame;
// the decoder reproduces the same switch.
template <class Predictor>
LoopOutput encode_loop(const Predictor& pred, std::span<const double> frame,
                       std::span<const double> entry_hist, QuantState q) {
    const std::size_t pad = entry_hist.size();
    LoopOutput out;
    out.codes.reserve(frame.size());
    out.rec.reserve(frame.size());
    std::vector<double> buf(entry_hist.begin(), entry_hist.end());
    buf.reserve(pad + frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const std::span<const double> hist(buf.data() + i, pad);
        double xhat = out.zero_substituted ? 0.0 : pred.predict(hist);
        if (!std::isfinite(xhat)) {
            out.zero_substituted = true;
            xhat = 0.0;
        }
        const Code c = quantize(frame[i] - xhat, q);
        const double xr = std::clamp(xhat + dequantize(c, q), kDomainLo, kDomainHi);
        q = adapt(q, c);
        out.codes.push_back(pack_code(c, q.nq));
        out.rec.push_back(xr);
        buf.push_back(xr);
        const double d = frame[i] - xr;
        out.sq_err += d * d;
    }
    out.quant = std::move(q);
    return out;
}

template <class Predictor>
std::pair<std::vector<double>, QuantState> decode_loop(const Predictor& pred, BitReader& reader,
                                                       std::size_t len,
                                                       std::span<const double> entry_hist,
                                                       QuantState q) {
    const std::size_t pad = entry_hist.size();
    std::vector<double> rec;
    rec.reserve(len);
    std::vector<double> buf(entry_hist.begin(), entry_hist.end());
    buf.reserve(pad + len);
    bool zero_sub = false;
    for (std::size_t i = 0; i < len; ++i) {
        const std::span<const double> hist(buf.data() + i, pad);
        double xhat = zero_sub ? 0.0 : pred.predict(hist);
        if (!std::isfinite(xhat)) {
            zero_sub = true;
            xhat = 0.0;
        }
        const Code c = unpack_code(static_cast<std::uint32_t>(reader.get(q.nq)), q.nq);
        const double xr = std::clamp(xhat + dequantize(c, q), kDomainLo, kDomainHi);
        q = adapt(q, c);
        rec.push_back(xr);
        buf.push_back(xr);
    }
    return {std::move(rec), std::move(q)};
}

std::uint64_t state_digest(std::span<const double> recon_tail, double step, const LpcModel& lpc) {
    std::string bytes;
    bytes.reserve((recon_tail.size() + 1 + lpc.coeffs.size()) * sizeof(double));
    auto put = [&bytes](double v) {
        char b[sizeof(double)];
        std::memcpy(b, &v, sizeof b);
        bytes.append(b, sizeof b);
    };
    for (double v : recon_tail) put(v);
    put(step);
    for (double v : lpc.coeffs) put(v);
    return fnv1a64(bytes);
}

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(v & 0xff);
    b.push_back((v >> 8) & 0xff);
}

void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back((v >> (8 * i)) & 0xff);
}

std::uint16_t get_u16(const std::uint8_t* p) { return std::uint16_t(p[0] | p[1] << 8); }

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

} // namespace

const char* to_string(Mode m) { return m == Mode::backward ? "backward" : "forward"; }

const char* to_string(PredictorKind p) {
    switch (p) {
        case PredictorKind::lpc_only: return "lpc";
        case PredictorKind::mlp_only: return "mlp";
        case PredictorKind::hybrid: return "hybrid";
    }
    return "?";
}

void validate(const CodecConfig& cfg) {
    if (cfg.nq < 2 || cfg.nq > 5) fail(Errc::args, "nq must be in 2..5");
    if (cfg.quant.nq != cfg.nq) fail(Errc::args, "quantizer template nq mismatches cfg.nq");
    validate(cfg.quant);
    if (cfg.lpc_order < 1 || cfg.lpc_order > 255) fail(Errc::args, "lpc_order must be in 1..255");
    if (cfg.frame_len < kMlpInputs || cfg.frame_len > 65535)
        fail(Errc::args, "frame_len must be in 10..65535");
    if (cfg.predictor == PredictorKind::hybrid && cfg.lpc_order != 10)
        fail(Errc::args, "hybrid pairs the MLP 10x2x1 with LPC-10; lpc_order must be 10");
    const TrainConfig& t = cfg.train;
    if (t.epochs < 1 || t.n_starts < 1) fail(Errc::args, "epochs and n_starts must be >= 1");
    if (!(t.lambda_down < 1.0 && 1.0 < t.lambda_up))
        fail(Errc::args, "need lambda_down < 1 < lambda_up");
    if (!(t.lambda_init > 0.0) || !(t.lambda_max > 0.0) || !(t.init_scale > 0.0))
        fail(Errc::args, "lambda_init, lambda_max, init_scale must be positive");
    if (t.max_retries < 0) fail(Errc::args, "max_retries must be >= 0");
}

std::string tunables_text(const QuantState& quant, const TrainConfig& train) {
    std::string s = "quant:nq=" + std::to_string(quant.nq);
    s += ";step=" + fmt_g17(quant.step);
    s += ";min=" + fmt_g17(quant.step_min);
    s += ";max=" + fmt_g17(quant.step_max);
    s += ";mult=";
    for (std::size_t i = 0; i < quant.multipliers.size(); ++i) {
        if (i) s += ',';
        s += fmt_g17(quant.multipliers[i]);
    }
    s += "|train:epochs=" + std::to_string(train.epochs);
    s += ";starts=" + std::to_string(train.n_starts);
    s += ";li=" + fmt_g17(train.lambda_init);
    s += ";lu=" + fmt_g17(train.lambda_up);
    s += ";ld=" + fmt_g17(train.lambda_down);
    s += ";lmax=" + fmt_g17(train.lambda_max);
    s += ";retries=" + std::to_string(train.max_retries);
    s += ";scale=" + fmt_g17(train.init_scale);
    return s;
}

std::uint64_t tunables_digest(const QuantState& quant, const TrainConfig& train) {
    return fnv1a64(tunables_text(quant, train));
}

std::size_t expected_payload_bits(const StreamHeader& h) {
    if (h.sample_count == 0) return 0;
    std::size_t bits = 0;
    const std::size_t sel = h.predictor == PredictorKind::hybrid ? 1 : 0;
    std::size_t params = 0;
    if (h.mode == Mode::forward) {
        if (h.predictor != PredictorKind::mlp_only) params += 64u * h.lpc_order;
        if (h.predictor != PredictorKind::lpc_only) params += 64u * kMlpParams;
    }
    std::uint64_t remaining = h.sample_count;
    while (remaining > 0) {
        const std::uint64_t len = std::min<std::uint64_t>(remaining, h.frame_len);
        bits += sel + params + static_cast<std::size_t>(len) * h.nq;
        remaining -= len;
    }
    return bits;
}

std::vector<std::uint8_t> EncodedStream::serialize() const {
    std::vector<std::uint8_t> b;
    b.reserve(kHeaderBytes + payload.size());
    b.insert(b.end(), StreamHeader::kMagic.begin(), StreamHeader::kMagic.end());
    put_u16(b, header.version);
    b.push_back(static_cast<std::uint8_t>(header.mode));
    b.push_back(static_cast<std::uint8_t>(header.predictor));
    b.push_back(header.nq);
    b.push_back(header.lpc_order);
    put_u16(b, header.frame_len);
    put_u64(b, header.seed);
    put_u64(b, header.sample_count);
    b.push_back(header.source_bit_depth);
    put_u64(b, header.tunables_digest);
    b.insert(b.end(), payload.begin(), payload.end());
    return b;
}

EncodedStream EncodedStream::parse(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || !std::equal(StreamHeader::kMagic.begin(), StreamHeader::kMagic.end(),
                                        bytes.begin()))
        fail(Errc::bad_magic, "not an AHPC stream");
    if (bytes.size() < kHeaderBytes) fail(Errc::truncated, "truncated header");

    EncodedStream s;
    StreamHeader& h = s.header;
    const std::uint8_t* p = bytes.data();
    h.version = get_u16(p + 4);
    if (h.version != StreamHeader::kVersion)
        fail(Errc::bad_version, "unsupported stream version " + std::to_string(h.version));
    if (p[6] > 1) fail(Errc::format, "bad mode field");
    h.mode = static_cast<Mode>(p[6]);
    if (p[7] > 2) fail(Errc::format, "bad predictor field");
    h.predictor = static_cast<PredictorKind>(p[7]);
    h.nq = p[8];
    if (h.nq < 2 || h.nq > 5) fail(Errc::format, "bad nq field");
    h.lpc_order = p[9];
    if (h.lpc_order < 1) fail(Errc::format, "bad lpc_order field");
    h.frame_len = get_u16(p + 10);
    if (h.frame_len < 1) fail(Errc::format, "bad frame_len field");
    h.seed = get_u64(p + 12);
    h.sample_count = get_u64(p + 20);
    h.source_bit_depth = p[28];
    h.tunables_digest = get_u64(p + 29);

    s.payload_bits = expected_payload_bits(h);
    const std::size_t expected_bytes = (s.payload_bits + 7) / 8;
    const std::size_t actual = bytes.size() - kHeaderBytes;
    if (actual < expected_bytes) fail(Errc::truncated, "truncated payload");
    if (actual > expected_bytes) fail(Errc::truncated, "payload size mismatch (trailing bytes)");
    s.payload.assign(bytes.begin() + kHeaderBytes, bytes.end());
    return s;
}

void write_stream(const EncodedStream& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::io, "cannot write " + path);
    const auto bytes = s.serialize();
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::io, "write failed: " + path);
}

EncodedStream read_stream(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io, "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return EncodedStream::parse(bytes);
}

EncodeResult encode(const SignalBuffer& signal, const CodecConfig& cfg_in) {
    CodecConfig cfg = cfg_in;
    cfg.train.seed = cfg.seed; // the stream seed governs training draws
    validate(cfg);
    if (signal.samples.empty()) fail(Errc::args, "empty signal");

    const std::size_t n = signal.samples.size();
    const std::size_t pad = static_cast<std::size_t>(std::max(cfg.lpc_order, kMlpInputs));
    const bool hybrid = cfg.predictor == PredictorKind::hybrid;
    const bool wants_mlp = cfg.predictor != PredictorKind::lpc_only;
    const bool forward = cfg.mode == Mode::forward;

    std::vector<double> recon(pad, 0.0);
    recon.reserve(pad + n);
    std::vector<double> raw;
    if (forward) {
        raw.assign(pad, 0.0);
        raw.insert(raw.end(), signal.samples.begin(), signal.samples.end());
    }

    EncodeResult res;
    res.stream.header.mode = cfg.mode;
    res.stream.header.predictor = cfg.predictor;
    res.stream.header.nq = static_cast<std::uint8_t>(cfg.nq);
    res.stream.header.lpc_order = static_cast<std::uint8_t>(cfg.lpc_order);
    res.stream.header.frame_len = static_cast<std::uint16_t>(cfg.frame_len);
    res.stream.header.seed = cfg.seed;
    res.stream.header.sample_count = n;
    res.stream.header.source_bit_depth = static_cast<std::uint8_t>(signal.source_bit_depth);
    res.stream.header.tunables_digest = tunables_digest(cfg.quant, cfg.train);

    BitWriter writer;
    QuantState q = cfg.quant;
    LpcModel cur_lpc = LpcModel::zero(cfg.lpc_order);
    std::optional<MlpModel> cur_mlp;
    std::size_t mlp_frames = 0;

    const auto views = frames(std::span<const double>(signal.samples),
                              static_cast<std::size_t>(cfg.frame_len));
    res.frames.reserve(views.size());
    res.codes.reserve(n);

    for (const FrameView& fv : views) {
        const std::size_t f = fv.index;

        // Coefficient adaptation. The first frame keeps the zero LPC
        // predictor and no MLP in both modes so the decoder needs no side
        // information to bootstrap.
        if (f == 0) {
            cur_lpc = LpcModel::zero(cfg.lpc_order);
            cur_mlp.reset();
        } else {
            std::span<const double> train_frame;
            std::span<const double> train_ctx;
            if (forward) {
                train_frame = std::span<const double>(raw.data() + pad + fv.offset, fv.samples.size());
                train_ctx = std::span<const double>(raw.data() + pad + fv.offset - kMlpInputs,
                                                    kMlpInputs);
            } else {
                const std::size_t prev_off = (f - 1) * static_cast<std::size_t>(cfg.frame_len);
                const std::size_t prev_len = fv.offset - prev_off;
                train_frame = std::span<const double>(recon.data() + pad + prev_off, prev_len);
                train_ctx = std::span<const double>(recon.data() + pad + prev_off - kMlpInputs,
                                                    kMlpInputs);
            }
            // Degenerate frames keep the previous frame's LPC model. In
            // forward mlp-only streams no LPC is fit on either side (the
            // failure fallback there is the zero network, not LPC).
            if (!forward || cfg.predictor != PredictorKind::mlp_only) {
                const auto r = autocorrelation(train_frame, cfg.lpc_order);
                if (auto ld = levinson_durbin(r, cfg.lpc_order)) cur_lpc = std::move(*ld);
            }
            cur_mlp.reset();
            if (wants_mlp) {
                if (auto ms = multistart_train(train_ctx, train_frame, cfg.train, f,
                                               cfg.parallel_starts))
                    cur_mlp = ms->model;
            }
        }

        FrameStat stat;
        stat.index = static_cast<std::uint32_t>(f);
        stat.err_lpc = kNan;
        stat.err_mlp = kNan;
        const std::span<const double> entry_hist(recon.data() + recon.size() - pad, pad);
        stat.entry_digest = state_digest(entry_hist, q.step, cur_lpc);

        // Forward mode conveys the coefficients; a failed MLP training
        // embeds the zero network (which predicts 0, like the zero LPC).
        const MlpModel fwd_mlp = cur_mlp.value_or(MlpModel{});

        LoopOutput committed;
        std::uint8_t selection = 0;
        if (hybrid && cur_mlp) {
            // Both trials branch from the same entry state; only the
            // winner's exit state persists.
            LoopOutput t_lpc = encode_loop(LpcPredictor{&cur_lpc}, fv.samples, entry_hist, q);
            LoopOutput t_mlp = encode_loop(MlpPredictor{&*cur_mlp}, fv.samples, entry_hist, q);
            stat.err_lpc = t_lpc.sq_err;
            stat.err_mlp = t_mlp.sq_err;
            selection = t_mlp.sq_err < t_lpc.sq_err ? 1 : 0; // tie goes to LPC
            committed = selection ? std::move(t_mlp) : std::move(t_lpc);
        } else if (cfg.predictor == PredictorKind::mlp_only && (cur_mlp || forward)) {
            if (forward) {
                committed = encode_loop(MlpPredictor{&fwd_mlp}, fv.samples, entry_hist, q);
                selection = cur_mlp ? 1 : 0;
            } else {
                committed = encode_loop(MlpPredictor{&*cur_mlp}, fv.samples, entry_hist, q);
                selection = 1;
            }
            stat.err_mlp = committed.sq_err;
        } else {
            // lpc_only, the first hybrid/mlp frame, or a backward MLP
            // training failure: code with the current LPC model.
            committed = encode_loop(LpcPredictor{&cur_lpc}, fv.samples, entry_hist, q);
            stat.err_lpc = committed.sq_err;
        }
        stat.selection = selection;
        stat.err_committed = committed.sq_err;
        stat.zero_substituted = committed.zero_substituted;
        if (selection) ++mlp_frames;

        if (hybrid) writer.put(selection, 1);
        if (forward) {
            if (cfg.predictor != PredictorKind::mlp_only)
                for (double c : cur_lpc.coeffs) writer.put_f64(c);
            if (cfg.predictor != PredictorKind::lpc_only)
                for (double v : fwd_mlp.p) writer.put_f64(v);
        }
        for (std::uint32_t code : committed.codes) writer.put(code, cfg.nq);

        recon.insert(recon.end(), committed.rec.begin(), committed.rec.end());
        res.codes.insert(res.codes.end(), committed.codes.begin(), committed.codes.end());
        q = std::move(committed.quant);
        res.frames.push_back(stat);
    }

    res.stream.payload_bits = writer.bit_count();
    res.stream.payload = writer.finish();
    res.reconstruction.assign(recon.begin() + static_cast<std::ptrdiff_t>(pad), recon.end());
    res.mlp_usage = views.empty() ? 0.0
                                  : static_cast<double>(mlp_frames) / static_cast<double>(views.size());
    res.bits_per_sample = static_cast<double>(res.stream.payload_bits) / static_cast<double>(n);
    return res;
}

DecodeResult decode(const EncodedStream& stream, const CodecConfig& tunables) {
    const StreamHeader& h = stream.header;
    CodecConfig cfg = tunables;
    cfg.mode = h.mode;
    cfg.predictor = h.predictor;
    cfg.nq = h.nq;
    cfg.lpc_order = h.lpc_order;
    cfg.frame_len = h.frame_len;
    cfg.seed = h.seed;
    cfg.train.seed = h.seed;
    if (cfg.quant.nq != h.nq)
        fail(Errc::args, "quantizer template nq mismatches the stream header");
    validate(cfg.quant);
    if (tunables_digest(cfg.quant, cfg.train) != h.tunables_digest)
        fail(Errc::digest_mismatch,
             "stream tunables digest mismatch: decoder quantizer/training parameters differ "
             "from the encoder's");

    DecodeResult res;
    res.header = h;
    res.signal.source_bit_depth = h.source_bit_depth;

    const std::size_t n = static_cast<std::size_t>(h.sample_count);
    const std::size_t pad = std::max<std::size_t>(h.lpc_order, kMlpInputs);
    const bool hybrid = h.predictor == PredictorKind::hybrid;
    const bool forward = h.mode == Mode::forward;

    std::vector<double> recon(pad, 0.0);
    recon.reserve(pad + n);

    BitReader reader(stream.payload, stream.payload_bits);
    QuantState q = cfg.quant;
    LpcModel cur_lpc = LpcModel::zero(cfg.lpc_order);
    std::optional<MlpModel> cur_mlp;

    const std::size_t frame_total = frame_count(n, h.frame_len);
    res.frame_digests.reserve(frame_total);

    for (std::size_t f = 0; f < frame_total; ++f) {
        const std::size_t offset = f * h.frame_len;
        const std::size_t len = std::min<std::size_t>(h.frame_len, n - offset);

        std::uint8_t selection = 0;
        if (hybrid) selection = static_cast<std::uint8_t>(reader.get(1));

        cur_mlp.reset();
        if (forward) {
            if (h.predictor != PredictorKind::mlp_only) {
                LpcModel m = LpcModel::zero(cfg.lpc_order);
                for (double& c : m.coeffs) c = reader.get_f64();
                cur_lpc = std::move(m);
            }
            if (h.predictor != PredictorKind::lpc_only) {
                MlpModel m;
                for (double& v : m.p) v = reader.get_f64();
                cur_mlp = m;
            }
        } else if (f > 0) {
            const std::size_t prev_off = (f - 1) * h.frame_len;
            const std::size_t prev_len = offset - prev_off;
            const std::span<const double> prev_rec(recon.data() + pad + prev_off, prev_len);
            const auto r = autocorrelation(prev_rec, cfg.lpc_order);
            if (auto ld = levinson_durbin(r, cfg.lpc_order)) cur_lpc = std::move(*ld);
            // The MLP is retrained only when this frame actually uses it;
            // the counter-based seeding makes skipping safe.
            const bool need_mlp =
                h.predictor == PredictorKind::mlp_only || (hybrid && selection == 1);
            if (need_mlp) {
                const std::span<const double> ctx(recon.data() + pad + prev_off - kMlpInputs,
                                                  kMlpInputs);
                if (auto ms = multistart_train(ctx, prev_rec, cfg.train, f, cfg.parallel_starts))
                    cur_mlp = ms->model;
            }
        }

        const std::span<const double> entry_hist(recon.data() + recon.size() - pad, pad);
        res.frame_digests.push_back(state_digest(entry_hist, q.step, cur_lpc));

        std::pair<std::vector<double>, QuantState> out;
        const bool use_mlp = (hybrid && selection == 1 && cur_mlp) ||
                             (h.predictor == PredictorKind::mlp_only && (cur_mlp || forward));
        if (use_mlp) {
            const MlpModel m = cur_mlp.value_or(MlpModel{});
            out = decode_loop(MlpPredictor{&m}, reader, len, entry_hist, q);
        } else {
            out = decode_loop(LpcPredictor{&cur_lpc}, reader, len, entry_hist, q);
        }
        recon.insert(recon.end(), out.first.begin(), out.first.end());
        q = std::move(out.second);
    }

    res.signal.samples.assign(recon.begin() + static_cast<std::ptrdiff_t>(pad), recon.end());
    return res;
}

DecodeResult decode(const EncodedStream& stream) {
    CodecConfig tunables;
    tunables.nq = stream.header.nq;
    tunables.quant = default_quant_state(stream.header.nq);
    return decode(stream, tunables);
}

} // namespace ahpc
