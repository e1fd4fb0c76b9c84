#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ahpc/codec.hpp"
#include "ahpc/signal.hpp"

namespace ahpc {

struct ManifestEntry {
    std::filesystem::path path;
    PcmFormat format = PcmFormat::wav;
    int bit_depth = 0; // 0 = container width
    std::string label;
};

struct CorpusManifest {
    std::filesystem::path root;
    std::vector<ManifestEntry> entries;
};

// One entry per line: "path,format,bit_depth,label". Relative paths are
// resolved against the manifest directory; blank lines and '#' comments
// are skipped. Every referenced file must exist.
CorpusManifest load_manifest(const std::filesystem::path& path);

struct EvalGrid {
    std::vector<Mode> modes;
    std::vector<PredictorKind> predictors;
    std::vector<int> nqs;
    std::vector<int> frame_lens;
};

struct EvalRow {
    std::string file;  // path, or "(mean-of-files)" / "(pooled-segments)" aggregates
    std::string label;
    Mode mode = Mode::backward;
    PredictorKind predictor = PredictorKind::hybrid;
    int nq = 0;
    int frame_len = 0;
    double segsnr_db = 0.0;
    double std_db = 0.0;
    double mlp_usage = 0.0;
    double wall_s = 0.0;
    std::string status = "ok";
};

struct EvalOptions {
    int segment_len = 200;
    std::pair<double, double> clamp_db{0.0, 80.0};
    int jobs = 0; // 0 = hardware concurrency
    // Replacement quantizer templates per nq (e.g. from a config file);
    // cells fall back to default_quant_state(nq).
    std::map<int, QuantState> quant_overrides;
};

// Runs the full grid over the corpus, one row per file x config plus, per
// config, a mean-over-files aggregate (std across files) and a
// pooled-segments aggregate (std across all segments). Per-file failures
// land in the status column and the run continues. Rows are sorted; only
// the wall_s column is timing-dependent.
std::vector<EvalRow> run_eval(const CorpusManifest& manifest, const EvalGrid& grid,
                              const CodecConfig& base, const EvalOptions& opts = {});

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows);

struct SweepRow {
    int frame_len = 0;
    double lpc_db = 0.0;
    double mlp_db = 0.0;
    double hybrid_db = 0.0;
};

// SEGSNR of the three predictors at each frame length. The signal must be
// at least max(lengths) samples long.
std::vector<SweepRow> sweep_framelen(const SignalBuffer& signal, const CodecConfig& base,
                                     const std::vector<int>& lengths,
                                     const EvalOptions& opts = {});

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

} // namespace ahpc
