#include "lpsim/denoise.hpp"

#include <algorithm>
#include <string>

#include "lpsim/errors.hpp"

namespace lpsim {

ConditioningVector ConditioningVector::null_like(const ConditioningVector& c) {
    ConditioningVector n;
    n.values.assign(c.values.size(), 0.0);
    n.is_null = true;
    return n;
}

double ConditioningVector::mean() const {
    if (values.empty()) return 0.0;
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc / static_cast<double>(values.size());
}

LatentTensor cfg_predict(const Denoiser& f, const LatentTensor& z, int timestep,
                         const ConditioningVector& cond, double guidance_scale) {
    if (cond.is_null) {
        fail(ErrorKind::InvalidArgument, "cfg_predict requires a non-null conditioning vector");
    }
    const LatentTensor uncond = f.predict(z, timestep, ConditioningVector::null_like(cond));
    const LatentTensor conditioned = f.predict(z, timestep, cond);
    if (!uncond.same_layout(z) || !conditioned.same_layout(z)) {
        fail(ErrorKind::ShapeMismatch, "denoiser changed the tensor layout");
    }
    std::vector<double> out(static_cast<size_t>(z.size()));
    for (i64 i = 0; i < z.size(); ++i) {
        out[static_cast<size_t>(i)] = uncond[i] + guidance_scale * (conditioned[i] - uncond[i]);
    }
    return LatentTensor::from_doubles(z.shape(), z.dtype(), std::move(out));
}

LatentTensor sampler_step(const LatentTensor& z, const LatentTensor& eps_hat, int /*timestep*/,
                          const SamplerConfig& cfg) {
    if (!z.same_layout(eps_hat)) {
        fail(ErrorKind::ShapeMismatch, "sampler_step: latent " + z.shape().str() +
                                           " vs prediction " + eps_hat.shape().str());
    }
    std::vector<double> out(static_cast<size_t>(z.size()));
    for (i64 i = 0; i < z.size(); ++i) {
        out[static_cast<size_t>(i)] = z[i] - cfg.step_size * eps_hat[i];
    }
    return LatentTensor::from_doubles(z.shape(), z.dtype(), std::move(out));
}

namespace {

class BoxDenoiser final : public Denoiser {
public:
    BoxDenoiser(std::array<i64, 3> radius, double t_coeff, double cond_coeff)
        : radius_(radius), t_coeff_(t_coeff), cond_coeff_(cond_coeff) {
        for (i64 r : radius_) {
            if (r < 0) fail(ErrorKind::InvalidArgument, "box radius must be >= 0");
        }
    }

    LatentTensor predict(const LatentTensor& z, int timestep, const ConditioningVector& cond) const override {
        const Shape& s = z.shape();
        const double affine = t_coeff_ * timestep + cond_coeff_ * cond.mean();
        std::vector<double> out(static_cast<size_t>(z.size()));
        for (i64 c = 0; c < s.c; ++c) {
            for (i64 t = 0; t < s.t; ++t) {
                const i64 t0 = std::max<i64>(0, t - radius_[0]);
                const i64 t1 = std::min(s.t - 1, t + radius_[0]);
                for (i64 h = 0; h < s.h; ++h) {
                    const i64 h0 = std::max<i64>(0, h - radius_[1]);
                    const i64 h1 = std::min(s.h - 1, h + radius_[1]);
                    for (i64 w = 0; w < s.w; ++w) {
                        const i64 w0 = std::max<i64>(0, w - radius_[2]);
                        const i64 w1 = std::min(s.w - 1, w + radius_[2]);
                        // Neighborhoods shrink at the edges; no padding.
                        double acc = 0.0;
                        for (i64 tt = t0; tt <= t1; ++tt) {
                            for (i64 hh = h0; hh <= h1; ++hh) {
                                for (i64 ww = w0; ww <= w1; ++ww) {
                                    acc += z.at(c, tt, hh, ww);
                                }
                            }
                        }
                        const i64 n = (t1 - t0 + 1) * (h1 - h0 + 1) * (w1 - w0 + 1);
                        out[static_cast<size_t>(z.index(c, t, h, w))] =
                            acc / static_cast<double>(n) + affine;
                    }
                }
            }
        }
        return LatentTensor::from_doubles(s, z.dtype(), std::move(out));
    }

    ReceptiveRadius receptive_radius() const override { return radius_; }

private:
    std::array<i64, 3> radius_;
    double t_coeff_;
    double cond_coeff_;
};

class GlobalMixDenoiser final : public Denoiser {
public:
    GlobalMixDenoiser(double t_coeff, double cond_coeff) : t_coeff_(t_coeff), cond_coeff_(cond_coeff) {}

    LatentTensor predict(const LatentTensor& z, int timestep, const ConditioningVector& cond) const override {
        const Shape& s = z.shape();
        const double affine = t_coeff_ * timestep + cond_coeff_ * cond.mean();
        const i64 per_channel = s.t * s.h * s.w;
        std::vector<double> out(static_cast<size_t>(z.size()));
        for (i64 c = 0; c < s.c; ++c) {
            double acc = 0.0;
            for (i64 i = 0; i < per_channel; ++i) {
                acc += z[c * per_channel + i];
            }
            const double mean = acc / static_cast<double>(per_channel);
            for (i64 i = 0; i < per_channel; ++i) {
                out[static_cast<size_t>(c * per_channel + i)] = 0.5 * z[c * per_channel + i] + 0.5 * mean + affine;
            }
        }
        return LatentTensor::from_doubles(s, z.dtype(), std::move(out));
    }

    ReceptiveRadius receptive_radius() const override { return std::nullopt; }

private:
    double t_coeff_;
    double cond_coeff_;
};

class IdentityDenoiser final : public Denoiser {
public:
    LatentTensor predict(const LatentTensor& z, int /*timestep*/, const ConditioningVector& /*cond*/) const override {
        return z;
    }

    ReceptiveRadius receptive_radius() const override { return std::array<i64, 3>{0, 0, 0}; }
};

}  // namespace

std::unique_ptr<Denoiser> make_box_denoiser(std::array<i64, 3> radius, double t_coeff, double cond_coeff) {
    return std::make_unique<BoxDenoiser>(radius, t_coeff, cond_coeff);
}

std::unique_ptr<Denoiser> make_global_mix_denoiser(double t_coeff, double cond_coeff) {
    return std::make_unique<GlobalMixDenoiser>(t_coeff, cond_coeff);
}

std::unique_ptr<Denoiser> make_identity_denoiser() {
    return std::make_unique<IdentityDenoiser>();
}

DenoiseResult run_centralized(const Denoiser& f, const LatentTensor& z_init, const SamplerConfig& cfg,
                              const ConditioningVector& cond) {
    if (cfg.total_steps < 1) {
        fail(ErrorKind::InvalidArgument, "total_steps must be >= 1");
    }
    DenoiseResult result;
    result.trace.reserve(static_cast<size_t>(cfg.total_steps));
    LatentTensor z = z_init;
    for (int i = 1; i <= cfg.total_steps; ++i) {
        const int t = cfg.total_steps + 1 - i;
        const LatentTensor eps = cfg_predict(f, z, t, cond, cfg.guidance_scale);
        z = sampler_step(z, eps, t, cfg);
        result.trace.push_back(z);
    }
    result.final_latent = std::move(z);
    return result;
}

}  // namespace lpsim
