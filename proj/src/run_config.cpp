#include "lpsim/run_config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "lpsim/errors.hpp"

namespace lpsim {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& message) {
    fail(ErrorKind::Config, message);
}

const json& require_object(const json& doc, const std::string& name) {
    if (!doc.is_object()) {
        config_fail("'" + name + "' must be a JSON object");
    }
    return doc;
}

void reject_unknown_keys(const json& obj, const std::string& name, const std::set<std::string>& allowed) {
    for (const auto& item : obj.items()) {
        if (!allowed.contains(item.key())) {
            config_fail("unknown key '" + item.key() + "' in '" + name + "'");
        }
    }
}

i64 get_count(const json& obj, const std::string& name, const std::string& key, i64 min_value) {
    if (!obj.contains(key)) {
        config_fail("'" + name + "' is missing required key '" + key + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        config_fail("'" + name + "." + key + "' must be an integer");
    }
    const i64 value = v.get<i64>();
    if (value < min_value) {
        config_fail("'" + name + "." + key + "' must be >= " + std::to_string(min_value));
    }
    return value;
}

double get_number(const json& obj, const std::string& name, const std::string& key) {
    if (!obj.contains(key)) {
        config_fail("'" + name + "' is missing required key '" + key + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        config_fail("'" + name + "." + key + "' must be a number");
    }
    return v.get<double>();
}

}  // namespace

ClusterConfig RunConfig::cluster_config() const {
    ClusterConfig c;
    c.workers = workers;
    c.overlap_ratio = overlap_ratio;
    c.geometry = patch;
    c.preset = preset;
    return c;
}

CostInputs RunConfig::cost_inputs() const {
    CostInputs in;
    in.steps = sampler.total_steps;
    in.workers = workers;
    in.overlap_ratio = overlap_ratio;
    in.shape = latent;
    in.geometry = patch;
    in.preset = preset;
    in.hybrid = hybrid;
    return in;
}

RunConfig parse_run_config(const nlohmann::json& doc) {
    require_object(doc, "config");
    reject_unknown_keys(doc, "config",
                        {"latent", "patch", "sampler", "denoiser", "cluster", "preset", "hybrid", "output"});

    RunConfig cfg;

    if (!doc.contains("latent")) config_fail("config is missing 'latent'");
    const json& latent = require_object(doc.at("latent"), "latent");
    reject_unknown_keys(latent, "latent", {"C", "T", "H", "W", "dtype_bytes"});
    cfg.latent.c = get_count(latent, "latent", "C", 1);
    cfg.latent.t = get_count(latent, "latent", "T", 1);
    cfg.latent.h = get_count(latent, "latent", "H", 1);
    cfg.latent.w = get_count(latent, "latent", "W", 1);
    if (latent.contains("dtype_bytes")) {
        const i64 b = get_count(latent, "latent", "dtype_bytes", 2);
        if (b != 2 && b != 4 && b != 8) config_fail("'latent.dtype_bytes' must be 2, 4 or 8");
        cfg.latent_dtype = dtype_from_bytes(static_cast<int>(b));
    }

    if (!doc.contains("patch")) config_fail("config is missing 'patch'");
    const json& patch = require_object(doc.at("patch"), "patch");
    reject_unknown_keys(patch, "patch", {"p_T", "p_H", "p_W"});
    cfg.patch.p_t = get_count(patch, "patch", "p_T", 1);
    cfg.patch.p_h = get_count(patch, "patch", "p_H", 1);
    cfg.patch.p_w = get_count(patch, "patch", "p_W", 1);
    for (Axis a : kAllAxes) {
        if (cfg.latent.extent(a) < cfg.patch.at(a)) {
            config_fail(std::string("latent axis ") + axis_name(a) + " is smaller than its patch size");
        }
    }

    if (!doc.contains("sampler")) config_fail("config is missing 'sampler'");
    const json& sampler = require_object(doc.at("sampler"), "sampler");
    reject_unknown_keys(sampler, "sampler", {"steps", "eta", "guidance_w"});
    cfg.sampler.total_steps = static_cast<int>(get_count(sampler, "sampler", "steps", 1));
    cfg.sampler.step_size = get_number(sampler, "sampler", "eta");
    if (!(cfg.sampler.step_size > 0.0)) config_fail("'sampler.eta' must be > 0");
    cfg.sampler.guidance_scale = get_number(sampler, "sampler", "guidance_w");

    if (!doc.contains("denoiser")) config_fail("config is missing 'denoiser'");
    const json& denoiser = require_object(doc.at("denoiser"), "denoiser");
    reject_unknown_keys(denoiser, "denoiser", {"kind", "radius", "seed"});
    if (!denoiser.contains("kind") || !denoiser.at("kind").is_string()) {
        config_fail("'denoiser.kind' must be a string");
    }
    cfg.denoiser.kind = denoiser.at("kind").get<std::string>();
    if (cfg.denoiser.kind != "box" && cfg.denoiser.kind != "global" && cfg.denoiser.kind != "identity") {
        config_fail("'denoiser.kind' must be one of box, global, identity");
    }
    if (denoiser.contains("radius")) {
        const json& radius = denoiser.at("radius");
        if (radius.is_number_integer() || radius.is_number_unsigned()) {
            const i64 r = radius.get<i64>();
            if (r < 0) config_fail("'denoiser.radius' must be >= 0");
            cfg.denoiser.radius = {r, r, r};
        } else if (radius.is_array() && radius.size() == 3) {
            for (size_t i = 0; i < 3; ++i) {
                if (!radius[i].is_number_integer() && !radius[i].is_number_unsigned()) {
                    config_fail("'denoiser.radius' entries must be integers");
                }
                cfg.denoiser.radius[i] = radius[i].get<i64>();
                if (cfg.denoiser.radius[i] < 0) config_fail("'denoiser.radius' must be >= 0");
            }
        } else {
            config_fail("'denoiser.radius' must be an integer or an array of three integers");
        }
    }
    if (denoiser.contains("seed")) {
        const json& seed = denoiser.at("seed");
        if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
            config_fail("'denoiser.seed' must be a non-negative integer");
        }
        if (seed.is_number_integer() && seed.get<i64>() < 0) {
            config_fail("'denoiser.seed' must be a non-negative integer");
        }
        cfg.denoiser.seed = seed.get<std::uint64_t>();
    }

    if (!doc.contains("cluster")) config_fail("config is missing 'cluster'");
    const json& cluster = require_object(doc.at("cluster"), "cluster");
    reject_unknown_keys(cluster, "cluster", {"K", "r"});
    cfg.workers = static_cast<int>(get_count(cluster, "cluster", "K", 1));
    cfg.overlap_ratio = get_number(cluster, "cluster", "r");
    if (!(cfg.overlap_ratio >= 0.0 && cfg.overlap_ratio <= static_cast<double>(cfg.workers - 1))) {
        config_fail("'cluster.r' must lie in [0, K-1]");
    }

    std::string preset_name = "wan21-like";
    if (doc.contains("preset")) {
        if (!doc.at("preset").is_string()) config_fail("'preset' must be a string");
        preset_name = doc.at("preset").get<std::string>();
    }
    const std::optional<ModelPreset> preset = find_preset(preset_name);
    if (!preset.has_value()) {
        config_fail("unknown preset '" + preset_name + "'");
    }
    cfg.preset = *preset;

    if (doc.contains("hybrid")) {
        const json& hybrid = require_object(doc.at("hybrid"), "hybrid");
        reject_unknown_keys(hybrid, "hybrid", {"M", "group_sizes"});
        HybridSpec spec;
        spec.groups = static_cast<int>(get_count(hybrid, "hybrid", "M", 1));
        if (!hybrid.contains("group_sizes") || !hybrid.at("group_sizes").is_array()) {
            config_fail("'hybrid.group_sizes' must be an array");
        }
        int total = 0;
        for (const json& v : hybrid.at("group_sizes")) {
            if (!v.is_number_integer() && !v.is_number_unsigned()) {
                config_fail("'hybrid.group_sizes' entries must be integers");
            }
            const int k = v.get<int>();
            if (k < 1) config_fail("'hybrid.group_sizes' entries must be >= 1");
            spec.group_sizes.push_back(k);
            total += k;
        }
        if (static_cast<int>(spec.group_sizes.size()) != spec.groups) {
            config_fail("'hybrid.M' does not match the number of group sizes");
        }
        if (total != cfg.workers) {
            config_fail("'hybrid.group_sizes' must sum to cluster.K");
        }
        cfg.hybrid = spec;
    }

    if (doc.contains("output")) {
        const json& output = require_object(doc.at("output"), "output");
        reject_unknown_keys(output, "output", {"dir", "formats"});
        if (output.contains("dir")) {
            if (!output.at("dir").is_string()) config_fail("'output.dir' must be a string");
            cfg.output.dir = output.at("dir").get<std::string>();
        }
        if (output.contains("formats")) {
            if (!output.at("formats").is_array()) config_fail("'output.formats' must be an array");
            cfg.output.json = cfg.output.csv = cfg.output.bin = false;
            for (const json& v : output.at("formats")) {
                if (!v.is_string()) config_fail("'output.formats' entries must be strings");
                const std::string f = v.get<std::string>();
                if (f == "json") cfg.output.json = true;
                else if (f == "csv") cfg.output.csv = true;
                else if (f == "bin") cfg.output.bin = true;
                else config_fail("unknown output format '" + f + "'");
            }
        }
    }

    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::Config, "cannot open config file '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(doc);
}

std::unique_ptr<Denoiser> make_denoiser(const DenoiserConfig& cfg) {
    if (cfg.kind == "box") return make_box_denoiser(cfg.radius);
    if (cfg.kind == "global") return make_global_mix_denoiser();
    if (cfg.kind == "identity") return make_identity_denoiser();
    fail(ErrorKind::Config, "unknown denoiser kind '" + cfg.kind + "'");
}

namespace {

// Standard normal draws from raw engine words; distribution code is pinned
// here rather than taken from <random>, whose distributions vary across
// standard libraries.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;          // [0, 1)
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = kTwoPi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace

SyntheticInputs synthetic_inputs(const Shape& shape, Dtype dtype, std::uint64_t seed) {
    NormalSampler sampler(seed);
    std::vector<double> values(static_cast<size_t>(shape.volume()));
    for (double& v : values) {
        v = sampler.next();
    }
    SyntheticInputs out{LatentTensor::from_doubles(shape, dtype, std::move(values)), {}};
    out.cond.values.resize(8);
    for (double& v : out.cond.values) {
        v = sampler.next();
    }
    out.cond.is_null = false;
    return out;
}

}  // namespace lpsim
