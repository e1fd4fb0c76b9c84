#pragma once

#include <cstdint>
#include <vector>

namespace ahpc {

// Adaptive uniform mid-rise quantizer state. The multiplier table has one
// entry per magnitude level (2^(nq-1) entries): inner levels shrink or
// hold the step, outer levels grow it.
struct QuantState {
    int nq = 4;                // bits per code, 2..5
    double step = 0x1p-7;      // current step
    double step_min = 0x1p-15;
    double step_max = 0.5;
    std::vector<double> multipliers;

    int levels() const { return 1 << (nq - 1); }
};

// Jayant multiplier tables per bit count plus the default step bounds.
QuantState default_quant_state(int nq);

// Throws Errc::args on a malformed state (bad nq, table size, bounds or a
// decreasing multiplier table).
void validate(const QuantState& state);

struct Code {
    int sign = 1;      // +1 or -1; a zero residual maps to +1
    int magnitude = 0; // 0 .. 2^(nq-1)-1
};

// Mid-rise, saturating: magnitude = min(floor(|e|/step), levels-1).
Code quantize(double e, const QuantState& state);

// Reconstruction level sign * (magnitude + 0.5) * step.
double dequantize(Code code, const QuantState& state);

// step' = clamp(step * multipliers[magnitude], step_min, step_max).
// Sign-independent.
QuantState adapt(QuantState state, Code code);

// Wire layout of one code: sign bit (1 = negative) then magnitude bits,
// most significant first, nq bits total.
std::uint32_t pack_code(Code code, int nq);
Code unpack_code(std::uint32_t bits, int nq);

} // namespace ahpc
