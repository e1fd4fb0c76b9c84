#pragma once

#include <optional>
#include <span>
#include <vector>

namespace ahpc {

// Order-p linear predictor, xhat(n) = sum_{i=1..p} coeffs[i-1] * x(n-i).
struct LpcModel {
    int order = 0;
    std::vector<double> coeffs;     // a_1..a_p
    std::vector<double> reflection; // k_1..k_p
    double residual_energy = 0.0;   // E_p = r(0) * prod(1 - k_i^2)

    static LpcModel zero(int order);
};

// Biased autocorrelation, r(k) = sum_{n=k}^{N-1} x(n) x(n-k). Rectangular
// frame, no windowing.
std::vector<double> autocorrelation(std::span<const double> frame, int max_lag);

// Solves the order-p Toeplitz normal equations. r(0) == 0 yields the
// all-zero predictor with residual 0. Returns nullopt when the recursion
// degenerates (non-finite reflection or negative prediction error from a
// numerically inconsistent r); the caller keeps its previous model.
std::optional<LpcModel> levinson_durbin(std::span<const double> r, int order);

// history holds at least `order` samples, newest last; the last `order`
// entries are used.
double lpc_predict(const LpcModel& model, std::span<const double> history);

} // namespace ahpc
