#include "ahpc/synth.hpp"

#include <algorithm>
#include <cmath>

#include "ahpc/rng.hpp"

namespace ahpc::synth {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void peak_normalize(std::vector<double>& x, double peak) {
    double maxabs = 0.0;
    for (double v : x) maxabs = std::max(maxabs, std::fabs(v));
    if (maxabs <= 0.0) return;
    const double s = peak / maxabs;
    for (double& v : x) v *= s;
}

// x(n) = sum a_i x(n-i) + drive(n), order = coeffs.size().
std::vector<double> run_ar(std::size_t n, std::span<const double> coeffs,
                           const std::vector<double>& drive) {
    const std::size_t p = coeffs.size();
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = drive[i];
        for (std::size_t k = 0; k < p && k < i; ++k) acc += coeffs[k] * x[i - 1 - k];
        x[i] = acc;
    }
    return x;
}

} // namespace

std::vector<double> resonator_ar_coeffs(std::span<const double> freqs_hz,
                                        std::span<const double> radii,
                                        double sample_rate_hz) {
    // 1 - sum a_i z^-i = prod_m (1 - 2 r cos(w) z^-1 + r^2 z^-2)
    std::vector<double> poly{1.0};
    for (std::size_t m = 0; m < freqs_hz.size(); ++m) {
        const double w = kTwoPi * freqs_hz[m] / sample_rate_hz;
        const double r = radii[m];
        const double b1 = -2.0 * r * std::cos(w);
        const double b2 = r * r;
        std::vector<double> next(poly.size() + 2, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + 1] += poly[i] * b1;
            next[i + 2] += poly[i] * b2;
        }
        poly = std::move(next);
    }
    std::vector<double> coeffs(poly.size() - 1);
    for (std::size_t i = 1; i < poly.size(); ++i) coeffs[i - 1] = -poly[i];
    return coeffs;
}

std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(derive_key(seed, 0x6e6f6973, 0));
    std::vector<double> x(n);
    for (double& v : x) v = rng.next_gaussian();
    peak_normalize(x, 0.95);
    return x;
}

std::vector<double> ar_process(std::size_t n, std::span<const double> coeffs,
                               double noise_rms, std::uint64_t seed) {
    SplitMix64 rng(derive_key(seed, 0x617270, 1));
    std::vector<double> drive(n);
    for (double& v : drive) v = noise_rms * rng.next_gaussian();
    auto x = run_ar(n, coeffs, drive);
    peak_normalize(x, 0.95);
    return x;
}

std::vector<double> speech_like_ar(std::size_t n, std::uint64_t seed) {
    const double freqs[] = {730.0, 1090.0, 2440.0, 3200.0, 3700.0};
    const double radii[] = {0.97, 0.96, 0.95, 0.93, 0.92};
    const auto coeffs = resonator_ar_coeffs(freqs, radii, 8000.0);
    return ar_process(n, coeffs, 0.02, seed);
}

std::vector<double> saturated_ar(std::size_t n, std::uint64_t seed, double gain,
                                 double noise_rms) {
    // Mild resonances; the tanh keeps the recurrence bounded whatever the
    // gain, so no normalization is applied.
    const double freqs[] = {500.0, 1150.0, 1900.0, 2700.0, 3400.0};
    const double radii[] = {0.94, 0.92, 0.90, 0.88, 0.85};
    const auto coeffs = resonator_ar_coeffs(freqs, radii, 8000.0);
    SplitMix64 rng(derive_key(seed, 0x736174, 2));

    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < coeffs.size() && k < i; ++k)
            acc += coeffs[k] * x[i - 1 - k];
        x[i] = std::tanh(gain * acc + noise_rms * rng.next_gaussian());
    }
    return x;
}

std::vector<double> voiced(std::size_t n, std::uint64_t seed, double pitch_hz,
                           double sample_rate_hz) {
    SplitMix64 rng(derive_key(seed, 0x766f69, 3));

    // Drifting formants: each resonator frequency wanders a few percent
    // over the course of seconds, recomputed every 10 ms block.
    const double base_freqs[] = {660.0, 1200.0, 2500.0, 3100.0, 3650.0};
    const double radii[] = {0.96, 0.95, 0.94, 0.92, 0.90};
    const std::size_t block = static_cast<std::size_t>(sample_rate_hz / 100.0);

    std::vector<double> x(n, 0.0);
    std::vector<double> coeffs;
    double phase = 1.0; // fire a pulse at n = 0
    for (std::size_t i = 0; i < n; ++i) {
        if (i % block == 0) {
            const double t = static_cast<double>(i) / sample_rate_hz;
            double freqs[5];
            for (int m = 0; m < 5; ++m)
                freqs[m] = base_freqs[m] * (1.0 + 0.06 * std::sin(kTwoPi * (0.4 + 0.13 * m) * t));
            coeffs = resonator_ar_coeffs(freqs, radii, sample_rate_hz);
        }
        // Pitch pulse train with vibrato plus breath noise.
        const double t = static_cast<double>(i) / sample_rate_hz;
        const double f0 = pitch_hz * (1.0 + 0.03 * std::sin(kTwoPi * 5.0 * t));
        phase += f0 / sample_rate_hz;
        double drive = 0.003 * rng.next_gaussian();
        if (phase >= 1.0) {
            phase -= 1.0;
            drive += 0.12 * (1.0 + 0.3 * std::sin(kTwoPi * 0.9 * t)); // slow amplitude envelope
        }
        double acc = drive;
        for (std::size_t k = 0; k < coeffs.size() && k < i; ++k)
            acc += coeffs[k] * x[i - 1 - k];
        x[i] = acc;
    }
    peak_normalize(x, 0.95);
    return x;
}

} // namespace ahpc::synth
