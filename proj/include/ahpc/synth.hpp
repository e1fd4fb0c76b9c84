#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ahpc::synth {

// Expands a cascade of two-pole resonators (freq in Hz, radius < 1) into
// direct-form AR coefficients a_1..a_2m, x(n) = sum a_i x(n-i) + e(n).
std::vector<double> resonator_ar_coeffs(std::span<const double> freqs_hz,
                                        std::span<const double> radii,
                                        double sample_rate_hz);

std::vector<double> white_noise(std::size_t n, std::uint64_t seed);

// Gaussian-driven AR process, peak-normalized to 0.95.
std::vector<double> ar_process(std::size_t n, std::span<const double> coeffs,
                               double noise_rms, std::uint64_t seed);

// Five-resonator AR(10) with fixed formant-like poles; linear reference
// signal for the codec tests.
std::vector<double> speech_like_ar(std::size_t n, std::uint64_t seed);

// Saturating order-10 recurrence x(n) = tanh(gain * sum a_i x(n-i) + w(n)).
// Bounded in (-1, 1) by construction; the saturation is what a linear
// predictor cannot capture.
std::vector<double> saturated_ar(std::size_t n, std::uint64_t seed,
                                 double gain = 3.5, double noise_rms = 0.12);

// Pitch-pulse excitation through slowly drifting formant resonators plus
// breath noise; deliberately non-stationary.
std::vector<double> voiced(std::size_t n, std::uint64_t seed, double pitch_hz = 110.0,
                           double sample_rate_hz = 8000.0);

} // namespace ahpc::synth
