#include "ahpc/quant.hpp"

#include <algorithm>
#include <cmath>

#include "ahpc/errors.hpp"

namespace ahpc {

QuantState default_quant_state(int nq) {
    QuantState q;
    q.nq = nq;
    switch (nq) {
        case 2: q.multipliers = {0.8, 1.6}; break;
        case 3: q.multipliers = {0.9, 0.9, 1.25, 1.75}; break;
        case 4: q.multipliers = {0.9, 0.9, 0.9, 0.9, 1.2, 1.6, 2.0, 2.4}; break;
        case 5:
            q.multipliers = {0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9,
                             1.2, 1.2, 1.6, 1.6, 2.0, 2.0, 2.4, 2.4};
            break;
        default: fail(Errc::args, "nq must be in 2..5");
    }
    return q;
}

void validate(const QuantState& q) {
    if (q.nq < 2 || q.nq > 5) fail(Errc::args, "nq must be in 2..5");
    if (q.multipliers.size() != static_cast<std::size_t>(q.levels()))
        fail(Errc::args, "multiplier table must have 2^(nq-1) entries");
    if (!(q.step_min > 0.0) || !(q.step_max >= q.step_min))
        fail(Errc::args, "need 0 < step_min <= step_max");
    if (!(q.step >= q.step_min) || !(q.step <= q.step_max))
        fail(Errc::args, "step outside [step_min, step_max]");
    double prev = 0.0;
    for (double m : q.multipliers) {
        if (!(m > 0.0)) fail(Errc::args, "multipliers must be positive");
        if (m < prev) fail(Errc::args, "multipliers must be non-decreasing");
        prev = m;
    }
}

Code quantize(double e, const QuantState& state) {
    Code c;
    c.sign = e < 0.0 ? -1 : 1;
    const double level = std::floor(std::fabs(e) / state.step);
    const double top = static_cast<double>(state.levels() - 1);
    c.magnitude = static_cast<int>(std::min(level, top));
    return c;
}

double dequantize(Code code, const QuantState& state) {
    return static_cast<double>(code.sign) * (static_cast<double>(code.magnitude) + 0.5) *
           state.step;
}

QuantState adapt(QuantState state, Code code) {
    state.step = std::clamp(state.step * state.multipliers[static_cast<std::size_t>(code.magnitude)],
                            state.step_min, state.step_max);
    return state;
}

std::uint32_t pack_code(Code code, int nq) {
    const std::uint32_t sign_bit = code.sign < 0 ? 1u : 0u;
    return (sign_bit << (nq - 1)) | static_cast<std::uint32_t>(code.magnitude);
}

Code unpack_code(std::uint32_t bits, int nq) {
    Code c;
    c.sign = (bits >> (nq - 1)) & 1u ? -1 : 1;
    c.magnitude = static_cast<int>(bits & ((1u << (nq - 1)) - 1u));
    return c;
}

} // namespace ahpc
