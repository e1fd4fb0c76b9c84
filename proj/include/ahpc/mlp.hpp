#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ahpc {

inline constexpr int kMlpInputs = 10;
inline constexpr int kMlpHidden = 2;
inline constexpr int kMlpParams = kMlpInputs * kMlpHidden + kMlpHidden + kMlpHidden + 1; // 25

// 10x2x1 perceptron, tanh hidden units, linear output.
//
// Canonical parameter order (used by jacobian rows, the LM update, the
// seeded initialization and the forward-mode bitstream):
//   p[j*10 + i] = w_hidden[j][i]   j in 0..1, i in 0..9
//   p[20 + j]   = b_hidden[j]
//   p[22 + j]   = w_out[j]
//   p[24]       = b_out
struct MlpModel {
    std::array<double, kMlpParams> p{};

    double w_hidden(int j, int i) const { return p[static_cast<std::size_t>(j) * kMlpInputs + i]; }
    double b_hidden(int j) const { return p[kMlpInputs * kMlpHidden + j]; }
    double w_out(int j) const { return p[kMlpInputs * kMlpHidden + kMlpHidden + j]; }
    double b_out() const { return p[kMlpParams - 1]; }
};

// input holds at least 10 samples, newest last; the last 10 are used.
double mlp_forward(const MlpModel& model, std::span<const double> input);

// Analytic d(output)/d(p_k) in the canonical parameter order.
void mlp_jacobian_row(const MlpModel& model, std::span<const double> input,
                      std::span<double> out);

struct TrainConfig {
    int epochs = 6;
    int n_starts = 5;
    double lambda_init = 1e-2;
    double lambda_up = 10.0;
    double lambda_down = 0.1;
    double lambda_max = 1e10;
    int max_retries = 10; // rejected steps per epoch before giving up
    double init_scale = 0.2;
    std::uint64_t seed = 0;
};

// One regression row per frame sample: input = the 10 samples preceding
// it (newest last), target = the sample itself.
struct TrainSet {
    std::vector<double> inputs; // N x 10, row-major
    std::vector<double> targets;

    std::size_t size() const { return targets.size(); }
    std::span<const double> input(std::size_t n) const {
        return {inputs.data() + n * kMlpInputs, kMlpInputs};
    }
};

// context = the 10 samples immediately preceding the frame, newest last.
TrainSet build_train_set(std::span<const double> context, std::span<const double> frame);

struct TrainResult {
    MlpModel model;
    double mse = 0.0;
};

// Levenberg-Marquardt with identity damping: exactly cfg.epochs epochs,
// each solving (J'J + lambda I) delta = J'e at the current weights and
// accepting the step only if the SSE decreases. Returns nullopt on a
// non-finite loss.
std::optional<TrainResult> lm_train(const MlpModel& init, const TrainSet& data,
                                    const TrainConfig& cfg);

struct MultistartResult {
    MlpModel model;
    double gain_db = 0.0; // open-loop prediction gain on the training frame
    double mse = 0.0;
    int start_index = 0;
};

// n_starts seeded initializations, weights i.i.d. uniform in
// [-init_scale, +init_scale) drawn from a counter-based stream keyed by
// (cfg.seed, frame_index, start). Picks the start with the highest
// open-loop prediction gain on the training frame, ties to the lowest
// start index. Bit-reproducible given (seed, frame_index); with
// parallel == true the starts run concurrently, the result is identical.
// Returns nullopt when every start ends with a non-finite loss.
std::optional<MultistartResult> multistart_train(std::span<const double> context,
                                                 std::span<const double> frame,
                                                 const TrainConfig& cfg,
                                                 std::uint64_t frame_index,
                                                 bool parallel = false);

} // namespace ahpc
