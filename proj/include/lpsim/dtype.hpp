#pragma once

#include <cstdint>

namespace lpsim {

// Element storage width of a latent tensor. Values are held in doubles but
// snapped to the chosen precision after every engine operation, so a tensor
// always contains exactly what a real buffer of that width would.
enum class Dtype : int {
    F16 = 2,
    F32 = 4,
    F64 = 8,
};

inline int dtype_bytes(Dtype d) { return static_cast<int>(d); }

// Returns the Dtype for a byte width of 2, 4 or 8; throws otherwise.
Dtype dtype_from_bytes(int bytes);

// IEEE binary16 conversions (round to nearest even). Out-of-range values
// saturate at +-65504 rather than producing Inf.
std::uint16_t f16_encode(double v);
double f16_decode(std::uint16_t bits);

// Rounds v to the nearest value representable in the given storage width.
double quantize(double v, Dtype d);

}  // namespace lpsim
