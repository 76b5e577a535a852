#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lpsim/dtype.hpp"

namespace lpsim {

using i64 = std::int64_t;

// The partitionable spatio-temporal axes. The channel axis is never
// partitioned and is not part of this enum. The declaration order defines
// the rotation order Temporal < Height < Width.
enum class Axis : int {
    Temporal = 0,
    Height = 1,
    Width = 2,
};

inline constexpr std::array<Axis, 3> kAllAxes = {Axis::Temporal, Axis::Height, Axis::Width};

const char* axis_name(Axis a);
std::optional<Axis> axis_from_name(const std::string& name);

// Extents of a latent tensor, channel outermost.
struct Shape {
    i64 c = 0;
    i64 t = 0;
    i64 h = 0;
    i64 w = 0;

    i64 extent(Axis a) const {
        switch (a) {
            case Axis::Temporal: return t;
            case Axis::Height: return h;
            case Axis::Width: return w;
        }
        return 0;
    }

    Shape with_extent(Axis a, i64 value) const;

    i64 volume() const { return c * t * h * w; }

    bool operator==(const Shape&) const = default;

    std::string str() const;
};

// Per-axis patch sizes (the atomic token units along T, H, W).
struct PatchGeometry {
    i64 p_t = 1;
    i64 p_h = 1;
    i64 p_w = 1;

    i64 at(Axis a) const {
        switch (a) {
            case Axis::Temporal: return p_t;
            case Axis::Height: return p_h;
            case Axis::Width: return p_w;
        }
        return 1;
    }

    bool operator==(const PatchGeometry&) const = default;
};

// Dense row-major (c, t, h, w) tensor. Values live in doubles but are
// snapped to the storage dtype on every construction path, so the contents
// are always exactly representable at the declared width.
class LatentTensor {
public:
    LatentTensor() = default;

    static LatentTensor zeros(const Shape& shape, Dtype dtype);
    static LatentTensor filled(const Shape& shape, Dtype dtype, double value);
    // Takes ownership of `values` (row-major, length == shape.volume()),
    // quantizes to `dtype` and rejects non-finite elements.
    static LatentTensor from_doubles(const Shape& shape, Dtype dtype, std::vector<double> values);

    const Shape& shape() const { return shape_; }
    Dtype dtype() const { return dtype_; }
    i64 size() const { return static_cast<i64>(data_.size()); }
    i64 extent(Axis a) const { return shape_.extent(a); }

    i64 index(i64 c, i64 t, i64 h, i64 w) const {
        return ((c * shape_.t + t) * shape_.h + h) * shape_.w + w;
    }

    double at(i64 c, i64 t, i64 h, i64 w) const { return data_[index(c, t, h, w)]; }
    double operator[](i64 i) const { return data_[i]; }

    const std::vector<double>& data() const { return data_; }

    bool same_layout(const LatentTensor& other) const {
        return shape_ == other.shape_ && dtype_ == other.dtype_;
    }

private:
    LatentTensor(const Shape& shape, Dtype dtype, std::vector<double> data)
        : shape_(shape), dtype_(dtype), data_(std::move(data)) {}

    Shape shape_;
    Dtype dtype_ = Dtype::F32;
    std::vector<double> data_;
};

// Copies the [start, end) range of `axis` into a fresh tensor; all other
// extents are unchanged. Half-open, latent units.
LatentTensor slice_axis(const LatentTensor& z, Axis axis, i64 start, i64 end);

// Joins tensors along `axis`; inverse of slicing into adjacent ranges.
LatentTensor concat_axis(const std::vector<LatentTensor>& parts, Axis axis);

// floor(D_axis / p_axis); errors with DegenerateAxis when D_axis < p_axis.
i64 patch_count(const Shape& shape, const PatchGeometry& g, Axis axis);
i64 patch_count(const LatentTensor& z, const PatchGeometry& g, Axis axis);

// Total token count N_T * N_H * N_W.
i64 total_patches(const Shape& shape, const PatchGeometry& g);

double max_abs_diff(const LatentTensor& a, const LatentTensor& b);
double rms_diff(const LatentTensor& a, const LatentTensor& b);

// Named serving profile used by the communication accounting: activation
// token width and the wire width of one element.
struct ModelPreset {
    std::string name;
    i64 hidden_dim = 1;
    int dtype_bytes = 4;
    std::string description;
};

const std::vector<ModelPreset>& builtin_presets();
std::optional<ModelPreset> find_preset(const std::string& name);

}  // namespace lpsim
