// ahpc: adaptive hybrid-predictor ADPCM codec front end.
//
// Subcommands: synth, encode, decode, eval, sweep-framelen. Every error
// path exits nonzero with a single "ahpc: error: E_XXX: ..." line.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ahpc/codec.hpp"
#include "ahpc/errors.hpp"
#include "ahpc/eval.hpp"
#include "ahpc/signal.hpp"
#include "ahpc/synth.hpp"

using namespace ahpc;
namespace fs = std::filesystem;

namespace {

PcmFormat pick_format(const std::string& flag, const fs::path& path) {
    if (flag == "wav") return PcmFormat::wav;
    if (flag == "raw16le") return PcmFormat::raw16le;
    return path.extension() == ".wav" ? PcmFormat::wav : PcmFormat::raw16le;
}

// Optional JSON override for the quantizer tunables:
//   {"step_init": .., "step_min": .., "step_max": ..,
//    "multipliers": {"2": [..], .., "5": [..]}}
QuantState quant_template(const std::string& config_path, int nq) {
    QuantState q = default_quant_state(nq);
    if (config_path.empty()) return q;
    std::ifstream in(config_path);
    if (!in) fail(Errc::io, "cannot open quantizer config " + config_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::format, std::string("bad quantizer config: ") + e.what());
    }
    if (j.contains("step_init")) q.step = j["step_init"].get<double>();
    if (j.contains("step_min")) q.step_min = j["step_min"].get<double>();
    if (j.contains("step_max")) q.step_max = j["step_max"].get<double>();
    if (j.contains("multipliers")) {
        const auto key = std::to_string(nq);
        if (j["multipliers"].contains(key))
            q.multipliers = j["multipliers"][key].get<std::vector<double>>();
    }
    validate(q);
    return q;
}

struct CommonFlags {
    std::string mode = "backward";
    std::string predictor = "hybrid";
    int nq = 4;
    int frame_len = 100;
    int lpc_order = 10;
    std::uint64_t seed = 0;
    int epochs = 6;
    int starts = 5;
    double lambda_init = 1e-2;
    double init_scale = 0.2;
    bool serial = false;
    std::string quant_config;
    int segment_len = 200;
    double snr_floor = 0.0;
    double snr_ceil = 80.0;
};

void add_codec_flags(CLI::App* cmd, CommonFlags& f, bool with_mode_pred = true) {
    if (with_mode_pred) {
        cmd->add_option("--mode", f.mode, "adaptation mode")
            ->check(CLI::IsMember({"backward", "forward"}));
        cmd->add_option("--predictor", f.predictor, "predictor kind")
            ->check(CLI::IsMember({"lpc", "mlp", "hybrid"}));
    }
    cmd->add_option("--nq", f.nq, "quantizer bits per sample")->check(CLI::Range(2, 5));
    cmd->add_option("--frame-len", f.frame_len, "samples per frame")->check(CLI::Range(10, 65535));
    cmd->add_option("--lpc-order", f.lpc_order, "linear predictor order")
        ->check(CLI::IsMember({10, 25}));
    cmd->add_option("--seed", f.seed, "stream seed for the multistart draws");
    cmd->add_option("--epochs", f.epochs, "LM epochs per training")->check(CLI::Range(1, 1000));
    cmd->add_option("--starts", f.starts, "multistart count")->check(CLI::Range(1, 100));
    cmd->add_option("--lambda-init", f.lambda_init, "initial LM damping");
    cmd->add_option("--init-scale", f.init_scale, "weight init range");
    cmd->add_flag("--serial", f.serial, "disable parallel multistart training");
    cmd->add_option("--quant-config", f.quant_config, "JSON quantizer tunables");
    cmd->add_option("--segment-len", f.segment_len, "SEGSNR window")->check(CLI::Range(1, 1 << 20));
    cmd->add_option("--snr-floor", f.snr_floor, "per-segment SNR floor, dB");
    cmd->add_option("--snr-ceil", f.snr_ceil, "per-segment SNR ceiling, dB");
}

CodecConfig make_config(const CommonFlags& f) {
    CodecConfig cfg;
    cfg.mode = f.mode == "forward" ? Mode::forward : Mode::backward;
    cfg.predictor = f.predictor == "lpc"   ? PredictorKind::lpc_only
                    : f.predictor == "mlp" ? PredictorKind::mlp_only
                                           : PredictorKind::hybrid;
    cfg.nq = f.nq;
    cfg.frame_len = f.frame_len;
    cfg.lpc_order = f.lpc_order;
    cfg.seed = f.seed;
    cfg.quant = quant_template(f.quant_config, f.nq);
    cfg.train.epochs = f.epochs;
    cfg.train.n_starts = f.starts;
    cfg.train.lambda_init = f.lambda_init;
    cfg.train.init_scale = f.init_scale;
    cfg.parallel_starts = !f.serial;
    return cfg;
}

int cmd_synth(const std::string& kind, double seconds, int rate, std::uint64_t seed, double gain,
              double noise_rms, double pitch, const std::string& out,
              const std::string& format_flag) {
    const auto n = static_cast<std::size_t>(seconds * rate);
    if (n == 0) fail(Errc::args, "zero-length signal requested");
    SignalBuffer s;
    s.sample_rate_hz = rate;
    s.source_bit_depth = 16;
    if (kind == "noise")
        s.samples = synth::white_noise(n, seed);
    else if (kind == "ar")
        s.samples = synth::speech_like_ar(n, seed);
    else if (kind == "sat-ar")
        s.samples = synth::saturated_ar(n, seed, gain, noise_rms);
    else
        s.samples = synth::voiced(n, seed, pitch, rate);
    save_pcm(s, out, pick_format(format_flag, out));
    std::printf("wrote %zu samples (%s, seed %llu) to %s\n", n, kind.c_str(),
                static_cast<unsigned long long>(seed), out.c_str());
    return 0;
}

int cmd_encode(const std::string& in, const std::string& out, const CommonFlags& f,
               const std::string& format_flag, int bit_depth) {
    const PcmFormat format = pick_format(format_flag, in);
    const SignalBuffer signal = load_pcm(in, format, bit_depth);
    const CodecConfig cfg = make_config(f);
    const EncodeResult enc = encode(signal, cfg);
    write_stream(enc.stream, out);

    std::printf("encoded %llu samples: %zu frames, %.4f bits/sample, stream %zu bytes\n",
                static_cast<unsigned long long>(enc.stream.header.sample_count),
                enc.frames.size(), enc.bits_per_sample, enc.stream.serialize().size());
    if (cfg.predictor == PredictorKind::hybrid)
        std::printf("predictor usage: lpc %.2f%%, mlp %.2f%%\n", 100.0 * (1.0 - enc.mlp_usage),
                    100.0 * enc.mlp_usage);
    if (signal.samples.size() >= static_cast<std::size_t>(f.segment_len)) {
        const auto rep = segsnr(signal.samples, enc.reconstruction,
                                static_cast<std::size_t>(f.segment_len),
                                {f.snr_floor, f.snr_ceil});
        std::printf("segsnr vs input: %.2f dB (std %.2f, %zu segments of %d)\n", rep.segsnr_db,
                    rep.std_db, rep.segment_count, f.segment_len);
    } else {
        std::printf("segsnr vs input: n/a (signal shorter than one segment)\n");
    }
    return 0;
}

int cmd_decode(const std::string& in, const std::string& out, const CommonFlags& f, int rate,
               const std::string& format_flag) {
    const EncodedStream stream = read_stream(in);
    CodecConfig tunables;
    tunables.nq = stream.header.nq;
    tunables.quant = quant_template(f.quant_config, stream.header.nq);
    tunables.train.epochs = f.epochs;
    tunables.train.n_starts = f.starts;
    tunables.train.lambda_init = f.lambda_init;
    tunables.train.init_scale = f.init_scale;
    tunables.parallel_starts = !f.serial;
    const DecodeResult dec = decode(stream, tunables);

    SignalBuffer signal = dec.signal;
    signal.sample_rate_hz = rate;
    save_pcm(signal, out, pick_format(format_flag, out));

    const StreamHeader& h = dec.header;
    std::printf("stream: v%u %s/%s nq=%u frame_len=%u lpc_order=%u seed=%llu samples=%llu "
                "bit_depth=%u digest=%016llx\n",
                h.version, to_string(h.mode), to_string(h.predictor), h.nq, h.frame_len,
                h.lpc_order, static_cast<unsigned long long>(h.seed),
                static_cast<unsigned long long>(h.sample_count), h.source_bit_depth,
                static_cast<unsigned long long>(h.tunables_digest));
    std::printf("decoded %zu samples to %s\n", signal.samples.size(), out.c_str());
    return 0;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

int cmd_eval(const std::string& manifest_path, const std::string& out, const CommonFlags& f,
             const std::string& modes, const std::string& predictors, const std::string& nqs,
             const std::string& frame_lens, int jobs) {
    const CorpusManifest manifest = load_manifest(manifest_path);
    EvalGrid grid;
    for (const auto& m : split_list(modes)) {
        if (m == "backward")
            grid.modes.push_back(Mode::backward);
        else if (m == "forward")
            grid.modes.push_back(Mode::forward);
        else
            fail(Errc::args, "unknown mode '" + m + "'");
    }
    for (const auto& p : split_list(predictors)) {
        if (p == "lpc")
            grid.predictors.push_back(PredictorKind::lpc_only);
        else if (p == "mlp")
            grid.predictors.push_back(PredictorKind::mlp_only);
        else if (p == "hybrid")
            grid.predictors.push_back(PredictorKind::hybrid);
        else
            fail(Errc::args, "unknown predictor '" + p + "'");
    }
    for (const auto& s : split_list(nqs)) {
        const int nq = std::stoi(s);
        if (nq < 2 || nq > 5) fail(Errc::args, "nq out of range: " + s);
        grid.nqs.push_back(nq);
    }
    for (const auto& s : split_list(frame_lens)) grid.frame_lens.push_back(std::stoi(s));

    EvalOptions opts;
    opts.segment_len = f.segment_len;
    opts.clamp_db = {f.snr_floor, f.snr_ceil};
    opts.jobs = jobs;
    for (int nq : grid.nqs) opts.quant_overrides.emplace(nq, quant_template(f.quant_config, nq));

    const auto rows = run_eval(manifest, grid, make_config(f), opts);
    std::ofstream os(out);
    if (!os) fail(Errc::io, "cannot write " + out);
    write_eval_csv(os, rows);
    std::printf("wrote %zu rows to %s\n", rows.size(), out.c_str());
    return 0;
}

int cmd_sweep(const std::string& in, const std::string& out, const CommonFlags& f,
              const std::string& format_flag, int bit_depth, int min_len, int max_len, int step,
              int jobs) {
    const SignalBuffer signal = load_pcm(in, pick_format(format_flag, in), bit_depth);
    std::vector<int> lengths;
    for (int len = min_len; len <= max_len; len += step) lengths.push_back(len);

    EvalOptions opts;
    opts.segment_len = f.segment_len;
    opts.clamp_db = {f.snr_floor, f.snr_ceil};
    opts.jobs = jobs;
    opts.quant_overrides.emplace(f.nq, quant_template(f.quant_config, f.nq));

    const auto rows = sweep_framelen(signal, make_config(f), lengths, opts);
    std::ofstream os(out);
    if (!os) fail(Errc::io, "cannot write " + out);
    write_sweep_csv(os, rows);
    std::printf("wrote %zu frame lengths to %s\n", rows.size(), out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive hybrid-predictor ADPCM speech codec"};
    app.require_subcommand(1);

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic test signal");
    std::string synth_kind = "ar", synth_out, synth_format = "auto";
    double synth_seconds = 2.0, synth_gain = 3.5, synth_noise = 0.12, synth_pitch = 110.0;
    int synth_rate = 8000;
    std::uint64_t synth_seed = 1;
    synth_cmd->add_option("--kind", synth_kind, "signal family")
        ->check(CLI::IsMember({"noise", "ar", "sat-ar", "voiced"}));
    synth_cmd->add_option("--seconds", synth_seconds, "duration");
    synth_cmd->add_option("--rate", synth_rate, "sample rate");
    synth_cmd->add_option("--seed", synth_seed, "generator seed");
    synth_cmd->add_option("--gain", synth_gain, "saturation gain (sat-ar)");
    synth_cmd->add_option("--noise-rms", synth_noise, "drive noise level (sat-ar)");
    synth_cmd->add_option("--pitch", synth_pitch, "pitch in Hz (voiced)");
    synth_cmd->add_option("--format", synth_format)->check(CLI::IsMember({"auto", "wav", "raw16le"}));
    synth_cmd->add_option("--out", synth_out, "output file")->required();

    // encode
    auto* encode_cmd = app.add_subcommand("encode", "encode PCM to an AHPC stream");
    std::string enc_in, enc_out, enc_format = "auto";
    int enc_depth = 0;
    CommonFlags enc_flags;
    encode_cmd->add_option("input", enc_in, "input PCM file")->required();
    encode_cmd->add_option("output", enc_out, "output stream file")->required();
    encode_cmd->add_option("--format", enc_format, "input container")
        ->check(CLI::IsMember({"auto", "wav", "raw16le"}));
    encode_cmd->add_option("--bit-depth", enc_depth, "source bit depth (0 = container width)")
        ->check(CLI::Range(0, 32));
    add_codec_flags(encode_cmd, enc_flags);

    // decode
    auto* decode_cmd = app.add_subcommand("decode", "decode an AHPC stream to PCM");
    std::string dec_in, dec_out, dec_format = "auto";
    int dec_rate = 8000;
    CommonFlags dec_flags;
    decode_cmd->add_option("input", dec_in, "input stream file")->required();
    decode_cmd->add_option("output", dec_out, "output PCM file")->required();
    decode_cmd->add_option("--rate", dec_rate, "output sample rate");
    decode_cmd->add_option("--format", dec_format, "output container")
        ->check(CLI::IsMember({"auto", "wav", "raw16le"}));
    add_codec_flags(decode_cmd, dec_flags, false);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "SEGSNR report over a corpus and config grid");
    std::string eval_manifest, eval_out, eval_modes = "backward",
                eval_predictors = "lpc,mlp,hybrid", eval_nqs = "2,3,4,5", eval_frames = "100";
    int eval_jobs = 0;
    CommonFlags eval_flags;
    eval_cmd->add_option("--manifest", eval_manifest, "corpus manifest")->required();
    eval_cmd->add_option("--out", eval_out, "output CSV")->required();
    eval_cmd->add_option("--modes", eval_modes, "comma list of modes");
    eval_cmd->add_option("--predictors", eval_predictors, "comma list of predictors");
    eval_cmd->add_option("--nqs", eval_nqs, "comma list of quantizer bits");
    eval_cmd->add_option("--frame-lens", eval_frames, "comma list of frame lengths");
    eval_cmd->add_option("--jobs", eval_jobs, "worker threads (0 = all cores)");
    add_codec_flags(eval_cmd, eval_flags, false);

    // sweep-framelen
    auto* sweep_cmd = app.add_subcommand("sweep-framelen",
                                         "SEGSNR vs frame length for all three predictors");
    std::string sweep_in, sweep_out, sweep_format = "auto";
    int sweep_depth = 0, sweep_min = 10, sweep_max = 300, sweep_step = 10, sweep_jobs = 0;
    CommonFlags sweep_flags;
    sweep_cmd->add_option("input", sweep_in, "input PCM file")->required();
    sweep_cmd->add_option("--out", sweep_out, "output CSV")->required();
    sweep_cmd->add_option("--format", sweep_format)->check(CLI::IsMember({"auto", "wav", "raw16le"}));
    sweep_cmd->add_option("--bit-depth", sweep_depth)->check(CLI::Range(0, 32));
    sweep_cmd->add_option("--min-len", sweep_min)->check(CLI::Range(10, 65535));
    sweep_cmd->add_option("--max-len", sweep_max)->check(CLI::Range(10, 65535));
    sweep_cmd->add_option("--step", sweep_step)->check(CLI::Range(1, 65535));
    sweep_cmd->add_option("--jobs", sweep_jobs, "worker threads (0 = all cores)");
    add_codec_flags(sweep_cmd, sweep_flags);

    try {
        app.parse(argc, argv);
        if (synth_cmd->parsed())
            return cmd_synth(synth_kind, synth_seconds, synth_rate, synth_seed, synth_gain,
                             synth_noise, synth_pitch, synth_out, synth_format);
        if (encode_cmd->parsed()) return cmd_encode(enc_in, enc_out, enc_flags, enc_format, enc_depth);
        if (decode_cmd->parsed()) return cmd_decode(dec_in, dec_out, dec_flags, dec_rate, dec_format);
        if (eval_cmd->parsed())
            return cmd_eval(eval_manifest, eval_out, eval_flags, eval_modes, eval_predictors,
                            eval_nqs, eval_frames, eval_jobs);
        if (sweep_cmd->parsed())
            return cmd_sweep(sweep_in, sweep_out, sweep_flags, sweep_format, sweep_depth,
                             sweep_min, sweep_max, sweep_step, sweep_jobs);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "ahpc: error: E_ARGS: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "ahpc: error: %s: %s\n", errc_name(e.code()), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ahpc: error: E_UNKNOWN: %s\n", e.what());
        return 1;
    }
    return 0;
}
