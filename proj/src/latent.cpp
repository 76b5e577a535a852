#include "lpsim/latent.hpp"

#include <cmath>
#include <sstream>

#include "lpsim/errors.hpp"

namespace lpsim {

namespace {

void validate_shape(const Shape& s) {
    if (s.c < 1 || s.t < 1 || s.h < 1 || s.w < 1) {
        fail(ErrorKind::InvalidArgument, "shape extents must be >= 1, got " + s.str());
    }
}

}  // namespace

const char* axis_name(Axis a) {
    switch (a) {
        case Axis::Temporal: return "temporal";
        case Axis::Height: return "height";
        case Axis::Width: return "width";
    }
    return "?";
}

std::optional<Axis> axis_from_name(const std::string& name) {
    for (Axis a : kAllAxes) {
        if (name == axis_name(a)) return a;
    }
    return std::nullopt;
}

Shape Shape::with_extent(Axis a, i64 value) const {
    Shape s = *this;
    switch (a) {
        case Axis::Temporal: s.t = value; break;
        case Axis::Height: s.h = value; break;
        case Axis::Width: s.w = value; break;
    }
    return s;
}

std::string Shape::str() const {
    std::ostringstream os;
    os << "(" << c << "," << t << "," << h << "," << w << ")";
    return os.str();
}

LatentTensor LatentTensor::zeros(const Shape& shape, Dtype dtype) {
    validate_shape(shape);
    return LatentTensor(shape, dtype, std::vector<double>(static_cast<size_t>(shape.volume()), 0.0));
}

LatentTensor LatentTensor::filled(const Shape& shape, Dtype dtype, double value) {
    validate_shape(shape);
    const double q = quantize(value, dtype);
    if (!std::isfinite(q)) {
        fail(ErrorKind::NonFinite, "fill value is not finite");
    }
    return LatentTensor(shape, dtype, std::vector<double>(static_cast<size_t>(shape.volume()), q));
}

LatentTensor LatentTensor::from_doubles(const Shape& shape, Dtype dtype, std::vector<double> values) {
    validate_shape(shape);
    if (static_cast<i64>(values.size()) != shape.volume()) {
        fail(ErrorKind::ShapeMismatch,
             "value count " + std::to_string(values.size()) + " does not match shape " + shape.str());
    }
    for (double& v : values) {
        v = quantize(v, dtype);
        if (!std::isfinite(v)) {
            fail(ErrorKind::NonFinite, "tensor element is not finite");
        }
    }
    return LatentTensor(shape, dtype, std::move(values));
}

LatentTensor slice_axis(const LatentTensor& z, Axis axis, i64 start, i64 end) {
    const i64 d = z.extent(axis);
    if (start == end) {
        fail(ErrorKind::EmptyRange, "empty slice [" + std::to_string(start) + "," + std::to_string(end) +
                                        ") on axis " + axis_name(axis));
    }
    if (start < 0 || end > d || start > end) {
        fail(ErrorKind::OutOfBounds, "slice [" + std::to_string(start) + "," + std::to_string(end) +
                                         ") outside [0," + std::to_string(d) + ") on axis " + axis_name(axis));
    }

    const Shape& s = z.shape();
    const Shape out_shape = s.with_extent(axis, end - start);
    std::vector<double> out(static_cast<size_t>(out_shape.volume()));

    // View the tensor as outer x axis x inner and copy contiguous inner runs.
    i64 outer = s.c, inner = 1;
    switch (axis) {
        case Axis::Temporal: outer = s.c; inner = s.h * s.w; break;
        case Axis::Height: outer = s.c * s.t; inner = s.w; break;
        case Axis::Width: outer = s.c * s.t * s.h; inner = 1; break;
    }
    const i64 len = end - start;
    const std::vector<double>& src = z.data();
    for (i64 o = 0; o < outer; ++o) {
        const double* sp = src.data() + (o * d + start) * inner;
        double* dp = out.data() + o * len * inner;
        std::copy(sp, sp + len * inner, dp);
    }
    return LatentTensor::from_doubles(out_shape, z.dtype(), std::move(out));
}

LatentTensor concat_axis(const std::vector<LatentTensor>& parts, Axis axis) {
    if (parts.empty()) {
        fail(ErrorKind::InvalidArgument, "concat of zero tensors");
    }
    i64 total = 0;
    for (const LatentTensor& p : parts) {
        if (p.shape().with_extent(axis, 0) != parts[0].shape().with_extent(axis, 0) ||
            p.dtype() != parts[0].dtype()) {
            fail(ErrorKind::ShapeMismatch, "concat parts disagree off the concat axis");
        }
        total += p.extent(axis);
    }

    const Shape out_shape = parts[0].shape().with_extent(axis, total);
    std::vector<double> out(static_cast<size_t>(out_shape.volume()));

    i64 outer = 1, inner = 1;
    switch (axis) {
        case Axis::Temporal: outer = out_shape.c; inner = out_shape.h * out_shape.w; break;
        case Axis::Height: outer = out_shape.c * out_shape.t; inner = out_shape.w; break;
        case Axis::Width: outer = out_shape.c * out_shape.t * out_shape.h; inner = 1; break;
    }
    i64 offset = 0;
    for (const LatentTensor& p : parts) {
        const i64 len = p.extent(axis);
        for (i64 o = 0; o < outer; ++o) {
            const double* sp = p.data().data() + o * len * inner;
            double* dp = out.data() + (o * total + offset) * inner;
            std::copy(sp, sp + len * inner, dp);
        }
        offset += len;
    }
    return LatentTensor::from_doubles(out_shape, parts[0].dtype(), std::move(out));
}

i64 patch_count(const Shape& shape, const PatchGeometry& g, Axis axis) {
    const i64 d = shape.extent(axis);
    const i64 p = g.at(axis);
    if (p < 1) {
        fail(ErrorKind::InvalidArgument, "patch size must be >= 1");
    }
    if (d < p) {
        fail(ErrorKind::DegenerateAxis, std::string("axis ") + axis_name(axis) + " has extent " +
                                            std::to_string(d) + " < patch size " + std::to_string(p));
    }
    return d / p;
}

i64 patch_count(const LatentTensor& z, const PatchGeometry& g, Axis axis) {
    return patch_count(z.shape(), g, axis);
}

i64 total_patches(const Shape& shape, const PatchGeometry& g) {
    i64 n = 1;
    for (Axis a : kAllAxes) {
        n *= patch_count(shape, g, a);
    }
    return n;
}

double max_abs_diff(const LatentTensor& a, const LatentTensor& b) {
    if (a.shape() != b.shape()) {
        fail(ErrorKind::ShapeMismatch, "max_abs_diff: shapes differ");
    }
    double m = 0.0;
    for (i64 i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

double rms_diff(const LatentTensor& a, const LatentTensor& b) {
    if (a.shape() != b.shape()) {
        fail(ErrorKind::ShapeMismatch, "rms_diff: shapes differ");
    }
    if (a.size() == 0) return 0.0;
    double acc = 0.0;
    for (i64 i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

const std::vector<ModelPreset>& builtin_presets() {
    static const std::vector<ModelPreset> presets = {
        {"wan21-like", 1536, 2,
         "WAN2.1-1.3B-like serving profile: 1536-wide tokens, 2-byte activations. "
         "Reference latent 16x13x60x104 with patch (1,2,2) corresponds to a 49-frame 480p run."},
        {"fp32-small", 256, 4, "Small fp32 debug profile for desk-scale experiments."},
    };
    return presets;
}

std::optional<ModelPreset> find_preset(const std::string& name) {
    for (const ModelPreset& p : builtin_presets()) {
        if (p.name == name) return p;
    }
    return std::nullopt;
}

}  // namespace lpsim
