#include "ahpc/eval.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>
#include <tuple>

#include "ahpc/errors.hpp"

namespace ahpc {

namespace {

std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

CodecConfig cell_config(const CodecConfig& base, Mode mode, PredictorKind pred, int nq,
                        int frame_len, const EvalOptions& opts) {
    CodecConfig cfg = base;
    cfg.mode = mode;
    cfg.predictor = pred;
    cfg.nq = nq;
    cfg.frame_len = frame_len;
    const auto it = opts.quant_overrides.find(nq);
    cfg.quant = it != opts.quant_overrides.end() ? it->second : default_quant_state(nq);
    return cfg;
}

struct CellKey {
    Mode mode;
    PredictorKind pred;
    int nq;
    int frame_len;
    bool operator<(const CellKey& o) const {
        return std::tie(mode, pred, nq, frame_len) < std::tie(o.mode, o.pred, o.nq, o.frame_len);
    }
};

} // namespace

CorpusManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io, "cannot open manifest " + path.string());
    CorpusManifest manifest;
    manifest.root = path.parent_path();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::array<std::string, 4> field;
        std::size_t start = 0;
        for (int i = 0; i < 3; ++i) {
            const auto comma = line.find(',', start);
            if (comma == std::string::npos)
                fail(Errc::format, "manifest line " + std::to_string(lineno) +
                                       ": want path,format,bit_depth,label");
            field[static_cast<std::size_t>(i)] = trim(line.substr(start, comma - start));
            start = comma + 1;
        }
        field[3] = trim(line.substr(start));

        ManifestEntry e;
        e.path = field[0];
        if (e.path.is_relative()) e.path = manifest.root / e.path;
        if (field[1] == "raw16le")
            e.format = PcmFormat::raw16le;
        else if (field[1] == "wav")
            e.format = PcmFormat::wav;
        else
            fail(Errc::format, "manifest line " + std::to_string(lineno) + ": unknown format '" +
                                   field[1] + "'");
        e.bit_depth = std::stoi(field[2]);
        e.label = field[3];
        if (!std::filesystem::exists(e.path))
            fail(Errc::io, "manifest references missing file " + e.path.string());
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

std::vector<EvalRow> run_eval(const CorpusManifest& manifest, const EvalGrid& grid,
                              const CodecConfig& base, const EvalOptions& opts) {
    struct Task {
        std::size_t entry;
        CellKey key;
    };
    std::vector<Task> tasks;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i)
        for (Mode mode : grid.modes)
            for (PredictorKind pred : grid.predictors)
                for (int nq : grid.nqs)
                    for (int frame_len : grid.frame_lens)
                        tasks.push_back({i, {mode, pred, nq, frame_len}});

    struct CellResult {
        EvalRow row;
        std::vector<double> segments; // per-segment SNRs for pooled aggregates
        std::size_t frames = 0;
        std::size_t mlp_frames = 0;
        bool ok = false;
    };

    auto run_task = [&](const Task& t) {
        const ManifestEntry& e = manifest.entries[t.entry];
        CellResult r;
        r.row.file = e.path.string();
        r.row.label = e.label;
        r.row.mode = t.key.mode;
        r.row.predictor = t.key.pred;
        r.row.nq = t.key.nq;
        r.row.frame_len = t.key.frame_len;
        try {
            const SignalBuffer signal = load_pcm(e.path, e.format, e.bit_depth);
            const CodecConfig cfg =
                cell_config(base, t.key.mode, t.key.pred, t.key.nq, t.key.frame_len, opts);
            const auto t0 = std::chrono::steady_clock::now();
            const EncodeResult enc = encode(signal, cfg);
            r.row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            r.segments = segment_snrs(signal.samples, enc.reconstruction,
                                      static_cast<std::size_t>(opts.segment_len), opts.clamp_db);
            const SegSnrReport rep = segsnr(signal.samples, enc.reconstruction,
                                            static_cast<std::size_t>(opts.segment_len),
                                            opts.clamp_db);
            r.row.segsnr_db = rep.segsnr_db;
            r.row.std_db = rep.std_db;
            r.row.mlp_usage = enc.mlp_usage;
            r.frames = enc.frames.size();
            for (const auto& fs : enc.frames) r.mlp_frames += fs.selection;
            r.ok = true;
        } catch (const Error& err) {
            r.row.status = errc_name(err.code());
        } catch (const std::exception&) {
            r.row.status = "E_UNKNOWN";
        }
        return r;
    };

    // File x config cells are independent; farm them out and reassemble in
    // deterministic order.
    const unsigned jobs = opts.jobs > 0 ? static_cast<unsigned>(opts.jobs)
                                        : std::max(1u, std::thread::hardware_concurrency());
    std::vector<CellResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const unsigned nworkers = std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size()) ? static_cast<unsigned>(tasks.size()) : 1u);
    for (unsigned w = 0; w < nworkers; ++w)
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size()) return;
                results[i] = run_task(tasks[i]);
            }
        });
    for (auto& w : workers) w.join();

    std::vector<EvalRow> rows;
    rows.reserve(results.size());
    std::map<CellKey, std::vector<const CellResult*>> by_cell;
    for (const auto& r : results) rows.push_back(r.row);
    for (std::size_t i = 0; i < results.size(); ++i)
        by_cell[tasks[i].key].push_back(&results[i]);

    // Two aggregate flavors per config: mean over files (std across files)
    // and pooled segments (std across every segment of the corpus).
    for (const auto& [key, cells] : by_cell) {
        std::vector<double> file_means;
        std::vector<double> pooled;
        std::size_t frames = 0, mlp_frames = 0;
        double wall = 0.0;
        for (const CellResult* c : cells) {
            if (!c->ok) continue;
            file_means.push_back(c->row.segsnr_db);
            pooled.insert(pooled.end(), c->segments.begin(), c->segments.end());
            frames += c->frames;
            mlp_frames += c->mlp_frames;
            wall += c->row.wall_s;
        }
        if (file_means.empty()) continue;
        auto mean_std = [](const std::vector<double>& v) {
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            double var = 0.0;
            for (double x : v) var += (x - mean) * (x - mean);
            var /= static_cast<double>(v.size());
            return std::pair<double, double>(mean, std::sqrt(var));
        };
        const double usage = frames ? static_cast<double>(mlp_frames) / static_cast<double>(frames) : 0.0;
        EvalRow agg;
        agg.label = "all";
        agg.mode = key.mode;
        agg.predictor = key.pred;
        agg.nq = key.nq;
        agg.frame_len = key.frame_len;
        agg.mlp_usage = usage;
        agg.wall_s = wall;

        agg.file = "(mean-of-files)";
        std::tie(agg.segsnr_db, agg.std_db) = mean_std(file_means);
        rows.push_back(agg);

        agg.file = "(pooled-segments)";
        std::tie(agg.segsnr_db, agg.std_db) = mean_std(pooled);
        rows.push_back(agg);
    }

    std::sort(rows.begin(), rows.end(), [](const EvalRow& a, const EvalRow& b) {
        return std::tie(a.file, a.label, a.mode, a.predictor, a.nq, a.frame_len) <
               std::tie(b.file, b.label, b.mode, b.predictor, b.nq, b.frame_len);
    });
    return rows;
}

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows) {
    out << "file,label,mode,predictor,nq,frame_len,segsnr_db,std_db,mlp_usage,encode_wall_s,status\n";
    for (const EvalRow& r : rows) {
        out << r.file << ',' << r.label << ',' << to_string(r.mode) << ',' << to_string(r.predictor)
            << ',' << r.nq << ',' << r.frame_len << ',' << csv_num(r.segsnr_db) << ','
            << csv_num(r.std_db) << ',' << csv_num(r.mlp_usage) << ',' << csv_num(r.wall_s) << ','
            << r.status << '\n';
    }
}

std::vector<SweepRow> sweep_framelen(const SignalBuffer& signal, const CodecConfig& base,
                                     const std::vector<int>& lengths, const EvalOptions& opts) {
    if (lengths.empty()) fail(Errc::args, "empty frame-length list");
    const int longest = *std::max_element(lengths.begin(), lengths.end());
    if (signal.samples.size() < static_cast<std::size_t>(longest))
        fail(Errc::short_input, "signal shorter than the largest frame length");

    struct Cell {
        int length;
        PredictorKind pred;
    };
    const PredictorKind preds[] = {PredictorKind::lpc_only, PredictorKind::mlp_only,
                                   PredictorKind::hybrid};
    std::vector<Cell> cells;
    for (int len : lengths)
        for (PredictorKind p : preds) cells.push_back({len, p});

    std::vector<double> snr(cells.size(), 0.0);
    const unsigned jobs = opts.jobs > 0 ? static_cast<unsigned>(opts.jobs)
                                        : std::max(1u, std::thread::hardware_concurrency());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < std::min<unsigned>(jobs, static_cast<unsigned>(cells.size())); ++w)
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) return;
                CodecConfig cfg = cell_config(base, base.mode, cells[i].pred, base.nq,
                                              cells[i].length, opts);
                const EncodeResult enc = encode(signal, cfg);
                snr[i] = segsnr(signal.samples, enc.reconstruction,
                                static_cast<std::size_t>(opts.segment_len), opts.clamp_db)
                             .segsnr_db;
            }
        });
    for (auto& w : workers) w.join();

    std::vector<SweepRow> rows;
    rows.reserve(lengths.size());
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        SweepRow row;
        row.frame_len = lengths[i];
        row.lpc_db = snr[i * 3];
        row.mlp_db = snr[i * 3 + 1];
        row.hybrid_db = snr[i * 3 + 2];
        rows.push_back(row);
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "frame_len,segsnr_lpc_db,segsnr_mlp_db,segsnr_hybrid_db\n";
    for (const SweepRow& r : rows)
        out << r.frame_len << ',' << csv_num(r.lpc_db) << ',' << csv_num(r.mlp_db) << ','
            << csv_num(r.hybrid_db) << '\n';
}

} // namespace ahpc
