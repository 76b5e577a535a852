#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "lpsim/latent.hpp"

namespace lpsim {

// Opaque prompt embedding. A null vector is all zeros.
struct ConditioningVector {
    std::vector<double> values;
    bool is_null = false;

    static ConditioningVector null_like(const ConditioningVector& c);
    double mean() const;
};

struct SamplerConfig {
    int total_steps = 1;       // T
    double step_size = 0.1;    // eta of the explicit-Euler update
    double guidance_scale = 1; // w
};

// Per-axis reach of a denoiser's output at one position; nullopt = the whole
// tensor (global receptive field).
using ReceptiveRadius = std::optional<std::array<i64, 3>>;

class Denoiser {
public:
    virtual ~Denoiser() = default;

    // Shape-preserving, deterministic noise prediction.
    virtual LatentTensor predict(const LatentTensor& z, int timestep, const ConditioningVector& cond) const = 0;

    virtual ReceptiveRadius receptive_radius() const = 0;
};

// uncond + w * (cond - uncond); exactly two predict calls.
LatentTensor cfg_predict(const Denoiser& f, const LatentTensor& z, int timestep,
                         const ConditioningVector& cond, double guidance_scale);

// Explicit-Euler update z - eta * eps_hat.
LatentTensor sampler_step(const LatentTensor& z, const LatentTensor& eps_hat, int timestep,
                          const SamplerConfig& cfg);

// Per-channel mean over the clipped box of the given radius, plus a fixed
// affine term in (t, mean(cond)) so conditioning and timestep matter.
std::unique_ptr<Denoiser> make_box_denoiser(std::array<i64, 3> radius, double t_coeff = 0.01,
                                            double cond_coeff = 0.1);

// 0.5 * z + 0.5 * per-channel mean + affine(t, mean(cond)); unbounded reach.
std::unique_ptr<Denoiser> make_global_mix_denoiser(double t_coeff = 0.01, double cond_coeff = 0.1);

// Predicts the input unchanged. Useful as the cheapest consistent predictor.
std::unique_ptr<Denoiser> make_identity_denoiser();

struct DenoiseResult {
    LatentTensor final_latent;              // z_0
    std::vector<LatentTensor> trace;        // z after each step, length T
};

// Runs the full T-step loop on one context: cfg_predict then sampler_step,
// with t = T, T-1, ..., 1.
DenoiseResult run_centralized(const Denoiser& f, const LatentTensor& z_init, const SamplerConfig& cfg,
                              const ConditioningVector& cond);

}  // namespace lpsim
