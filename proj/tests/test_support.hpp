#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lpsim/denoise.hpp"
#include "lpsim/latent.hpp"
#include "lpsim/partition.hpp"
#include "lpsim/reconstruct.hpp"

namespace lpsim::testing {

inline LatentTensor random_tensor(std::mt19937_64& rng, const Shape& shape, Dtype dtype,
                                  double lo = -2.0, double hi = 2.0) {
    std::vector<double> values(static_cast<size_t>(shape.volume()));
    for (double& v : values) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v = lo + (hi - lo) * u;
    }
    return LatentTensor::from_doubles(shape, dtype, std::move(values));
}

// Tensor whose value at (c,t,h,w) is the coordinate along `axis`; handy for
// slice and box-mean oracles.
inline LatentTensor coordinate_tensor(const Shape& shape, Axis axis, Dtype dtype = Dtype::F64) {
    std::vector<double> values(static_cast<size_t>(shape.volume()));
    i64 idx = 0;
    for (i64 c = 0; c < shape.c; ++c) {
        for (i64 t = 0; t < shape.t; ++t) {
            for (i64 h = 0; h < shape.h; ++h) {
                for (i64 w = 0; w < shape.w; ++w, ++idx) {
                    switch (axis) {
                        case Axis::Temporal: values[static_cast<size_t>(idx)] = static_cast<double>(t); break;
                        case Axis::Height: values[static_cast<size_t>(idx)] = static_cast<double>(h); break;
                        case Axis::Width: values[static_cast<size_t>(idx)] = static_cast<double>(w); break;
                    }
                }
            }
        }
    }
    return LatentTensor::from_doubles(shape, dtype, std::move(values));
}

// Straight-line scalar evaluation of the position-weighted blend along one
// axis, independent of the reconstruction implementation. Predictions and
// the result are per-axis-position scalars.
inline std::vector<double> scalar_blend_oracle(const PartitionPlan& plan,
                                               const std::vector<std::vector<double>>& axis_predictions) {
    const i64 d = plan.axis_extent;
    std::vector<double> out(static_cast<size_t>(d), 0.0);
    for (i64 x = 0; x < d; ++x) {
        double acc = 0.0;
        double weight_sum = 0.0;
        for (size_t k = 0; k < plan.entries.size(); ++k) {
            const PartitionEntry& e = plan.entries[k];
            if (x < e.latent.begin || x >= e.latent.end) continue;
            const i64 j = x - e.latent.begin;
            const i64 len = e.latent.length();
            double weight = 1.0;
            if (j < e.delta_start) {
                weight = static_cast<double>(j) / static_cast<double>(e.delta_start);
            } else if (j >= len - e.delta_end) {
                weight = static_cast<double>(len - j) / static_cast<double>(e.delta_end);
            }
            acc += weight * axis_predictions[k][static_cast<size_t>(j)];
            weight_sum += weight;
        }
        out[static_cast<size_t>(x)] = acc / weight_sum;
    }
    return out;
}

}  // namespace lpsim::testing
