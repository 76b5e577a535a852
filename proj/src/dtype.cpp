#include "lpsim/dtype.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include "lpsim/errors.hpp"

namespace lpsim {

namespace {

constexpr double kF16Max = 65504.0;

float bits_float(std::uint32_t u) {
    float f;
    std::memcpy(&f, &u, sizeof(f));
    return f;
}

}  // namespace

Dtype dtype_from_bytes(int bytes) {
    switch (bytes) {
        case 2: return Dtype::F16;
        case 4: return Dtype::F32;
        case 8: return Dtype::F64;
        default:
            fail(ErrorKind::InvalidArgument,
                 "dtype_bytes must be 2, 4 or 8, got " + std::to_string(bytes));
    }
}

std::uint16_t f16_encode(double v) {
    if (std::isnan(v)) {
        return 0x7e00;
    }
    if (v > kF16Max) v = kF16Max;
    if (v < -kF16Max) v = -kF16Max;

    // Round straight from the double representation; a float intermediate
    // would double-round on values near a binary16 tie.
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof(u));
    const std::uint16_t sign = static_cast<std::uint16_t>((u >> 48) & 0x8000u);
    const int exp = static_cast<int>((u >> 52) & 0x7ffu) - 1023;
    std::uint64_t mant = u & 0xfffffffffffffull;

    if ((u & 0x7fffffffffffffffull) == 0 || exp < -25) {
        return sign;  // zero, or below half the smallest subnormal
    }
    mant |= 1ull << 52;  // implicit bit: the clamp leaves only normal doubles

    // Normal halves keep 10 mantissa bits; subnormals lose one more bit per
    // exponent step below -14.
    int shift = 42;
    std::uint16_t half;
    if (exp >= -14) {
        half = static_cast<std::uint16_t>(((exp + 15) << 10) | ((mant >> shift) & 0x3ffu));
    } else {
        shift += -14 - exp;
        half = static_cast<std::uint16_t>(mant >> shift);
    }
    const std::uint64_t rem = mant & ((1ull << shift) - 1);
    const std::uint64_t halfway = 1ull << (shift - 1);
    if (rem > halfway || (rem == halfway && (half & 1))) {
        half += 1;  // a mantissa carry rolls into the exponent, as it should
    }
    if ((half & 0x7fffu) >= 0x7c00u) {
        half = 0x7bffu;  // saturate instead of rounding up to Inf
    }
    return static_cast<std::uint16_t>(sign | half);
}

double f16_decode(std::uint16_t bits) {
    const std::uint32_t sign = (bits & 0x8000u) << 16;
    const std::uint32_t exp = (bits >> 10) & 0x1f;
    const std::uint32_t mant = bits & 0x3ffu;

    std::uint32_t u;
    if (exp == 0) {
        if (mant == 0) {
            u = sign;
        } else {
            // Normalize the subnormal.
            int e = -1;
            std::uint32_t m = mant;
            do {
                m <<= 1;
                e += 1;
            } while (!(m & 0x400u));
            u = sign | ((127 - 15 - e) << 23) | ((m & 0x3ffu) << 13);
        }
    } else if (exp == 31) {
        u = sign | 0x7f800000u | (mant << 13);
    } else {
        u = sign | ((exp - 15 + 127) << 23) | (mant << 13);
    }
    return static_cast<double>(bits_float(u));
}

double quantize(double v, Dtype d) {
    switch (d) {
        case Dtype::F64:
            return v;
        case Dtype::F32: {
            const double lim = std::numeric_limits<float>::max();
            if (v > lim) return lim;
            if (v < -lim) return -lim;
            return static_cast<double>(static_cast<float>(v));
        }
        case Dtype::F16:
            return f16_decode(f16_encode(v));
    }
    fail(ErrorKind::InvalidArgument, "unknown dtype");
}

}  // namespace lpsim
