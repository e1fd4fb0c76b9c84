#include "ahpc/lpc.hpp"

#include <cmath>

#include "ahpc/errors.hpp"

namespace ahpc {

LpcModel LpcModel::zero(int order) {
    LpcModel m;
    m.order = order;
    m.coeffs.assign(static_cast<std::size_t>(order), 0.0);
    m.reflection.assign(static_cast<std::size_t>(order), 0.0);
    m.residual_energy = 0.0;
    return m;
}

std::vector<double> autocorrelation(std::span<const double> frame, int max_lag) {
    if (frame.empty()) fail(Errc::args, "autocorrelation of an empty frame");
    if (max_lag < 0) fail(Errc::args, "negative max_lag");
    const std::size_t n = frame.size();
    std::vector<double> r(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int k = 0; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::size_t i = static_cast<std::size_t>(k); i < n; ++i)
            acc += frame[i] * frame[i - static_cast<std::size_t>(k)];
        r[static_cast<std::size_t>(k)] = acc;
    }
    return r;
}

std::optional<LpcModel> levinson_durbin(std::span<const double> r, int order) {
    if (order < 1) fail(Errc::args, "lpc order must be >= 1");
    if (r.size() < static_cast<std::size_t>(order) + 1)
        fail(Errc::args, "autocorrelation shorter than order+1");
    if (r[0] < 0.0) fail(Errc::args, "negative r(0)");

    LpcModel m;
    m.order = order;
    m.coeffs.assign(static_cast<std::size_t>(order), 0.0);
    m.reflection.assign(static_cast<std::size_t>(order), 0.0);

    if (r[0] == 0.0) {
        // All-zero frame: silence is common, return the zero predictor.
        m.residual_energy = 0.0;
        return m;
    }

    double energy = r[0];
    std::vector<double> prev(static_cast<std::size_t>(order), 0.0);
    for (int i = 0; i < order; ++i) {
        double acc = r[static_cast<std::size_t>(i) + 1];
        for (int j = 0; j < i; ++j)
            acc -= m.coeffs[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(i - j)];
        const double k = acc / energy;
        if (!std::isfinite(k)) return std::nullopt;

        prev = m.coeffs;
        m.coeffs[static_cast<std::size_t>(i)] = k;
        for (int j = 0; j < i; ++j)
            m.coeffs[static_cast<std::size_t>(j)] =
                prev[static_cast<std::size_t>(j)] - k * prev[static_cast<std::size_t>(i - 1 - j)];
        m.reflection[static_cast<std::size_t>(i)] = k;

        energy *= 1.0 - k * k;
        if (energy < 0.0 || !std::isfinite(energy)) return std::nullopt;
    }
    m.residual_energy = energy;
    return m;
}

double lpc_predict(const LpcModel& model, std::span<const double> history) {
    const auto p = static_cast<std::size_t>(model.order);
    if (history.size() < p) fail(Errc::args, "history shorter than predictor order");
    const double* newest = history.data() + history.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < p; ++i) acc += model.coeffs[i] * newest[-1 - static_cast<long>(i)];
    return acc;
}

} // namespace ahpc
