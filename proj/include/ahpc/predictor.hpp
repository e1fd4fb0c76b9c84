#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "ahpc/lpc.hpp"
#include "ahpc/mlp.hpp"

namespace ahpc {

inline constexpr double kGainCeilingDb = 80.0;

// Lightweight predictor adapters for the coding loop and for open-loop
// gain measurement. Each reads the last order() entries of the history
// span (newest last).
struct LpcPredictor {
    const LpcModel* model;
    int order() const { return model->order; }
    double predict(std::span<const double> history) const { return lpc_predict(*model, history); }
};

struct MlpPredictor {
    const MlpModel* model;
    int order() const { return kMlpInputs; }
    double predict(std::span<const double> history) const { return mlp_forward(*model, history); }
};

// Open-loop prediction gain in dB over a frame: true past samples feed the
// predictor, 10*log10(sum x^2 / sum (x - xhat)^2). Zero-energy frames give
// 0 dB, a zero residual clamps to +80 dB (same ceiling as segsnr).
template <class Predictor>
double prediction_gain(const Predictor& predictor, std::span<const double> frame,
                       std::span<const double> history) {
    const std::size_t p = static_cast<std::size_t>(predictor.order());
    std::vector<double> window(p, 0.0);
    const std::size_t have = std::min(history.size(), p);
    std::copy(history.end() - have, history.end(), window.end() - have);

    double signal = 0.0;
    double residual = 0.0;
    for (double x : frame) {
        const double xhat = predictor.predict(window);
        const double e = x - xhat;
        signal += x * x;
        residual += e * e;
        if (p > 0) {
            std::copy(window.begin() + 1, window.end(), window.begin());
            window.back() = x;
        }
    }
    if (signal <= 0.0) return 0.0;
    if (residual <= 0.0) return kGainCeilingDb;
    return std::min(10.0 * std::log10(signal / residual), kGainCeilingDb);
}

} // namespace ahpc
