#include "ahpc/mlp.hpp"

#include <cmath>
#include <future>
#include <limits>

#include "ahpc/errors.hpp"
#include "ahpc/predictor.hpp"
#include "ahpc/rng.hpp"

namespace ahpc {

namespace {

constexpr int kN = kMlpParams;

struct HiddenActivations {
    double h[kMlpHidden];
};

// Forward pass returning the hidden activations so a jacobian row can be
// filled without recomputing the tanh.
double forward_with_hidden(const MlpModel& m, const double* in, HiddenActivations& act) {
    double out = m.p[kN - 1]; // b_out
    for (int j = 0; j < kMlpHidden; ++j) {
        double z = m.p[kMlpInputs * kMlpHidden + j]; // b_hidden[j]
        const double* w = m.p.data() + static_cast<std::size_t>(j) * kMlpInputs;
        for (int i = 0; i < kMlpInputs; ++i) z += w[i] * in[i];
        const double h = std::tanh(z);
        act.h[j] = h;
        out += m.p[kMlpInputs * kMlpHidden + kMlpHidden + j] * h; // w_out[j]
    }
    return out;
}

const double* tail10(std::span<const double> input) {
    if (input.size() < kMlpInputs) fail(Errc::args, "mlp input shorter than 10");
    return input.data() + input.size() - kMlpInputs;
}

// Cholesky solve of the SPD system A x = b, A given as a dense kN x kN
// lower triangle. Fixed loop order; this is part of the encoder/decoder
// determinism contract.
bool cholesky_solve(double a[kN][kN], const double b[kN], double x[kN]) {
    for (int i = 0; i < kN; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i][j];
            for (int k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
            if (i == j) {
                if (!(s > 0.0)) return false;
                a[i][i] = std::sqrt(s);
            } else {
                a[i][j] = s / a[j][j];
            }
        }
    }
    double y[kN];
    for (int i = 0; i < kN; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= a[i][k] * y[k];
        y[i] = s / a[i][i];
    }
    for (int i = kN - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < kN; ++k) s -= a[k][i] * x[k];
        x[i] = s / a[i][i];
    }
    return true;
}

double sse_on(const MlpModel& m, const TrainSet& data) {
    double sse = 0.0;
    HiddenActivations act;
    for (std::size_t n = 0; n < data.size(); ++n) {
        const double e = data.targets[n] - forward_with_hidden(m, data.inputs.data() + n * kMlpInputs, act);
        sse += e * e;
    }
    return sse;
}

MlpModel seeded_init(const TrainConfig& cfg, std::uint64_t frame_index, int start) {
    SplitMix64 rng(derive_key(cfg.seed, frame_index, static_cast<std::uint64_t>(start)));
    MlpModel m;
    for (double& v : m.p) v = rng.next_symmetric(cfg.init_scale);
    return m;
}

} // namespace

double mlp_forward(const MlpModel& model, std::span<const double> input) {
    HiddenActivations act;
    return forward_with_hidden(model, tail10(input), act);
}

void mlp_jacobian_row(const MlpModel& model, std::span<const double> input,
                      std::span<double> out) {
    if (out.size() < kMlpParams) fail(Errc::args, "jacobian row needs 25 slots");
    const double* in = tail10(input);
    HiddenActivations act;
    forward_with_hidden(model, in, act);
    for (int j = 0; j < kMlpHidden; ++j) {
        const double dh = (1.0 - act.h[j] * act.h[j]) *
                          model.p[kMlpInputs * kMlpHidden + kMlpHidden + j]; // w_out[j] * tanh'
        for (int i = 0; i < kMlpInputs; ++i)
            out[static_cast<std::size_t>(j) * kMlpInputs + i] = dh * in[i];
        out[kMlpInputs * kMlpHidden + j] = dh;                    // d/d b_hidden[j]
        out[kMlpInputs * kMlpHidden + kMlpHidden + j] = act.h[j]; // d/d w_out[j]
    }
    out[kMlpParams - 1] = 1.0; // d/d b_out
}

TrainSet build_train_set(std::span<const double> context, std::span<const double> frame) {
    if (context.size() != kMlpInputs) fail(Errc::args, "training context must be 10 samples");
    const std::size_t n = frame.size();
    TrainSet set;
    set.inputs.resize(n * kMlpInputs);
    set.targets.resize(n);
    std::vector<double> window(context.begin(), context.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < kMlpInputs; ++k) set.inputs[i * kMlpInputs + k] = window[k];
        set.targets[i] = frame[i];
        for (int k = 0; k + 1 < kMlpInputs; ++k) window[k] = window[k + 1];
        window[kMlpInputs - 1] = frame[i];
    }
    return set;
}

std::optional<TrainResult> lm_train(const MlpModel& init, const TrainSet& data,
                                    const TrainConfig& cfg) {
    if (data.size() == 0) fail(Errc::args, "empty training set");

    MlpModel model = init;
    const std::size_t n = data.size();
    double sse = sse_on(model, data);
    if (!std::isfinite(sse)) return std::nullopt;

    double lambda = cfg.lambda_init;
    std::vector<double> jac(n * kN); // row per sample
    double row[kN];
    HiddenActivations act;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Jacobian and residuals at the current weights.
        double jtj[kN][kN] = {};
        double jte[kN] = {};
        for (std::size_t s = 0; s < n; ++s) {
            const double* in = data.inputs.data() + s * kMlpInputs;
            const double out = forward_with_hidden(model, in, act);
            mlp_jacobian_row(model, std::span<const double>(in, kMlpInputs),
                             std::span<double>(row, kN));
            const double e = data.targets[s] - out;
            for (int i = 0; i < kN; ++i) {
                jac[s * kN + i] = row[i];
                jte[i] += row[i] * e;
            }
        }
        for (std::size_t s = 0; s < n; ++s) {
            const double* r = jac.data() + s * kN;
            for (int i = 0; i < kN; ++i)
                for (int j = 0; j <= i; ++j) jtj[i][j] += r[i] * r[j];
        }

        for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
            double a[kN][kN];
            for (int i = 0; i < kN; ++i) {
                for (int j = 0; j <= i; ++j) a[i][j] = jtj[i][j];
                a[i][i] += lambda;
            }
            double delta[kN];
            bool solved = cholesky_solve(a, jte, delta);

            MlpModel candidate = model;
            double cand_sse = std::numeric_limits<double>::infinity();
            if (solved) {
                for (int i = 0; i < kN; ++i) candidate.p[i] = model.p[i] + delta[i];
                cand_sse = sse_on(candidate, data);
            }
            if (std::isfinite(cand_sse) && cand_sse < sse) {
                model = candidate;
                sse = cand_sse;
                lambda = std::max(lambda * cfg.lambda_down, 1e-300);
                break; // epoch accepted
            }
            lambda = std::min(lambda * cfg.lambda_up, cfg.lambda_max);
            // Retry exhaustion keeps the current weights for this epoch.
        }
    }
    if (!std::isfinite(sse)) return std::nullopt;
    return TrainResult{model, sse / static_cast<double>(n)};
}

std::optional<MultistartResult> multistart_train(std::span<const double> context,
                                                 std::span<const double> frame,
                                                 const TrainConfig& cfg,
                                                 std::uint64_t frame_index,
                                                 bool parallel) {
    if (frame.empty()) fail(Errc::args, "empty training frame");
    const TrainSet data = build_train_set(context, frame);

    struct StartOutcome {
        bool ok = false;
        MlpModel model;
        double gain = 0.0;
        double mse = 0.0;
    };

    auto run_start = [&](int s) {
        StartOutcome out;
        const MlpModel init = seeded_init(cfg, frame_index, s);
        if (auto trained = lm_train(init, data, cfg)) {
            out.ok = true;
            out.model = trained->model;
            out.mse = trained->mse;
            out.gain = prediction_gain(MlpPredictor{&out.model}, frame, context);
        }
        return out;
    };

    std::vector<StartOutcome> outcomes(static_cast<std::size_t>(cfg.n_starts));
    if (parallel && cfg.n_starts > 1) {
        std::vector<std::future<StartOutcome>> futures;
        futures.reserve(static_cast<std::size_t>(cfg.n_starts));
        for (int s = 0; s < cfg.n_starts; ++s)
            futures.push_back(std::async(std::launch::async, run_start, s));
        for (int s = 0; s < cfg.n_starts; ++s)
            outcomes[static_cast<std::size_t>(s)] = futures[static_cast<std::size_t>(s)].get();
    } else {
        for (int s = 0; s < cfg.n_starts; ++s) outcomes[static_cast<std::size_t>(s)] = run_start(s);
    }

    // Deterministic argmax by gain, ties to the lowest start index.
    int best = -1;
    for (int s = 0; s < cfg.n_starts; ++s) {
        const auto& o = outcomes[static_cast<std::size_t>(s)];
        if (!o.ok || !std::isfinite(o.gain)) continue;
        if (best < 0 || o.gain > outcomes[static_cast<std::size_t>(best)].gain) best = s;
    }
    if (best < 0) return std::nullopt;
    const auto& o = outcomes[static_cast<std::size_t>(best)];
    return MultistartResult{o.model, o.gain, o.mse, best};
}

} // namespace ahpc
