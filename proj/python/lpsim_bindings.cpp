#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lpsim/cluster.hpp"
#include "lpsim/commands.hpp"
#include "lpsim/completeness.hpp"
#include "lpsim/cost.hpp"
#include "lpsim/denoise.hpp"
#include "lpsim/errors.hpp"
#include "lpsim/io.hpp"
#include "lpsim/partition.hpp"
#include "lpsim/reconstruct.hpp"
#include "lpsim/run_config.hpp"

namespace py = pybind11;
using namespace lpsim;

namespace {

Shape shape_from_tuple(const std::array<i64, 4>& dims) {
    return Shape{dims[0], dims[1], dims[2], dims[3]};
}

LatentTensor tensor_from_numpy(py::array_t<double, py::array::c_style | py::array::forcecast> arr,
                               int dtype_bytes_) {
    if (arr.ndim() != 4) {
        throw py::value_error("expected a 4-d array (C, T, H, W)");
    }
    const Shape shape{arr.shape(0), arr.shape(1), arr.shape(2), arr.shape(3)};
    std::vector<double> values(arr.data(), arr.data() + arr.size());
    return LatentTensor::from_doubles(shape, dtype_from_bytes(dtype_bytes_), std::move(values));
}

py::array_t<double> tensor_to_numpy(const LatentTensor& z) {
    const Shape& s = z.shape();
    py::array_t<double> out({s.c, s.t, s.h, s.w});
    std::copy(z.data().begin(), z.data().end(), out.mutable_data());
    return out;
}

ConditioningVector cond_from_list(const std::vector<double>& values) {
    ConditioningVector c;
    c.values = values;
    c.is_null = false;
    return c;
}

py::dict plan_to_dict(const PartitionPlan& plan) {
    py::dict d;
    d["axis"] = axis_name(plan.axis);
    d["step"] = plan.step_index;
    d["L"] = plan.patches_per_core;
    d["O"] = plan.overlap_patches;
    d["N"] = plan.axis_patches;
    d["D"] = plan.axis_extent;
    d["p"] = plan.patch_size;
    py::list entries;
    for (const PartitionEntry& e : plan.entries) {
        py::dict ed;
        ed["k"] = e.worker_id;
        ed["core"] = py::make_tuple(e.core_patches.begin, e.core_patches.end);
        ed["ext"] = py::make_tuple(e.ext_patches.begin, e.ext_patches.end);
        ed["latent"] = py::make_tuple(e.latent.begin, e.latent.end);
        ed["delta"] = py::make_tuple(e.delta_start, e.delta_end);
        entries.append(ed);
    }
    d["entries"] = entries;
    return d;
}

py::dict cost_to_dict(const CostReport& r) {
    py::dict d;
    d["S_z"] = r.latent_bytes;
    d["S_H"] = r.activation_bytes;
    d["gamma"] = r.gamma;
    d["C_NMP"] = r.nmp_bytes;
    d["C_PP"] = r.pp_bytes;
    d["C_LP_exact"] = r.lp_exact_bytes;
    d["C_LP_approx"] = r.lp_approx_bytes;
    d["ratio_exact"] = r.ratio_exact;
    d["ratio_approx"] = r.ratio_approx;
    d["Sz_over_SH"] = r.latent_activation_ratio;
    if (r.hybrid.has_value()) {
        py::dict h;
        h["C_inter"] = r.hybrid->inter_bytes;
        h["C_intra_total"] = r.hybrid->intra_bytes;
        h["C_hyb"] = r.hybrid->total_bytes;
        h["ratio_vs_NMP"] = r.hybrid->ratio_vs_nmp;
        h["bound"] = r.hybrid->bound;
        h["within_bound"] = r.hybrid->within_bound;
        d["hybrid"] = h;
    }
    return d;
}

CostInputs cost_inputs_from_args(int steps, int workers, double overlap_ratio, const std::array<i64, 4>& dims,
                                 const std::array<i64, 3>& patch, const std::string& preset_name,
                                 std::optional<std::pair<int, std::vector<int>>> hybrid) {
    CostInputs in;
    in.steps = steps;
    in.workers = workers;
    in.overlap_ratio = overlap_ratio;
    in.shape = shape_from_tuple(dims);
    in.geometry = PatchGeometry{patch[0], patch[1], patch[2]};
    const std::optional<ModelPreset> preset = find_preset(preset_name);
    if (!preset.has_value()) {
        throw py::value_error("unknown preset '" + preset_name + "'");
    }
    in.preset = *preset;
    if (hybrid.has_value()) {
        in.hybrid = HybridSpec{hybrid->first, hybrid->second};
    }
    return in;
}

}  // namespace

PYBIND11_MODULE(_lpsim, m) {
    m.doc() = "Latent-partitioned diffusion serving simulator";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "LpsimError");

    py::enum_<Axis>(m, "Axis")
        .value("temporal", Axis::Temporal)
        .value("height", Axis::Height)
        .value("width", Axis::Width);

    py::class_<LatentTensor>(m, "LatentTensor")
        .def_static("from_numpy", &tensor_from_numpy, py::arg("array"), py::arg("dtype_bytes") = 4)
        .def("to_numpy", &tensor_to_numpy)
        .def_property_readonly("dtype_bytes", [](const LatentTensor& z) { return dtype_bytes(z.dtype()); })
        .def_property_readonly("shape", [](const LatentTensor& z) {
            const Shape& s = z.shape();
            return py::make_tuple(s.c, s.t, s.h, s.w);
        });

    py::class_<PartitionPlan>(m, "PartitionPlan")
        .def("to_dict", &plan_to_dict)
        .def_property_readonly("axis", [](const PartitionPlan& p) { return std::string(axis_name(p.axis)); })
        .def_property_readonly("workers", &PartitionPlan::workers);

    m.def("rotation_axis", &rotation_axis, py::arg("step_index"),
          "Partitioned axis of a denoising step (temporal, height, width cycle).");

    m.def(
        "build_plan",
        [](const std::array<i64, 4>& dims, const std::array<i64, 3>& patch, int step, int workers, double r) {
            return build_plan_for_shape(shape_from_tuple(dims), PatchGeometry{patch[0], patch[1], patch[2]},
                                        step, workers, r);
        },
        py::arg("dims"), py::arg("patch"), py::arg("step"), py::arg("workers"), py::arg("overlap_ratio"),
        "Patch-aligned overlapping partition of one step.");

    m.def(
        "weight_profile",
        [](const PartitionPlan& plan, int entry) {
            if (entry < 0 || entry >= plan.workers()) {
                throw py::index_error("entry out of range");
            }
            return build_weight_mask(plan.entries[static_cast<size_t>(entry)]).axis_profile;
        },
        py::arg("plan"), py::arg("entry"), "Blend weights of one partition along its axis.");

    m.def(
        "reconstruct",
        [](const std::vector<LatentTensor>& predictions, const PartitionPlan& plan,
           const std::array<i64, 4>& dims) {
            return reconstruct(predictions, plan, shape_from_tuple(dims));
        },
        py::arg("predictions"), py::arg("plan"), py::arg("full_dims"),
        "Normalized position-weighted blend of per-partition predictions.");

    m.def(
        "synthetic_latent",
        [](const std::array<i64, 4>& dims, int dtype_bytes_, std::uint64_t seed) {
            SyntheticInputs in = synthetic_inputs(shape_from_tuple(dims), dtype_from_bytes(dtype_bytes_), seed);
            return py::make_tuple(in.latent, in.cond.values);
        },
        py::arg("dims"), py::arg("dtype_bytes"), py::arg("seed"),
        "Deterministic standard-normal latent plus conditioning values.");

    m.def(
        "run_centralized",
        [](const std::string& denoiser_kind, const std::array<i64, 3>& radius, const LatentTensor& z,
           int steps, double eta, double guidance, const std::vector<double>& cond) {
            DenoiserConfig dc;
            dc.kind = denoiser_kind;
            dc.radius = radius;
            const std::unique_ptr<Denoiser> f = make_denoiser(dc);
            const SamplerConfig cfg{steps, eta, guidance};
            DenoiseResult r = run_centralized(*f, z, cfg, cond_from_list(cond));
            return r.final_latent;
        },
        py::arg("denoiser"), py::arg("radius"), py::arg("z"), py::arg("steps"), py::arg("eta"),
        py::arg("guidance"), py::arg("cond"), "Single-context denoising loop; returns the final latent.");

    m.def(
        "run_lp",
        [](const std::string& denoiser_kind, const std::array<i64, 3>& radius, const LatentTensor& z,
           int steps, double eta, double guidance, const std::vector<double>& cond,
           const std::array<i64, 3>& patch, int workers, double overlap_ratio,
           const std::string& preset_name) {
            DenoiserConfig dc;
            dc.kind = denoiser_kind;
            dc.radius = radius;
            const std::unique_ptr<Denoiser> f = make_denoiser(dc);
            const SamplerConfig cfg{steps, eta, guidance};
            ClusterConfig cluster;
            cluster.workers = workers;
            cluster.overlap_ratio = overlap_ratio;
            cluster.geometry = PatchGeometry{patch[0], patch[1], patch[2]};
            const std::optional<ModelPreset> preset = find_preset(preset_name);
            if (!preset.has_value()) {
                throw py::value_error("unknown preset '" + preset_name + "'");
            }
            cluster.preset = *preset;
            LpRunResult r = run_lp(*f, z, cfg, cond_from_list(cond), cluster);
            py::dict ledger;
            ledger["grand_total"] = r.ledger.grand_total();
            py::dict per_worker;
            for (const auto& [worker, bytes] : r.ledger.per_worker_totals()) {
                per_worker[py::str(std::to_string(worker))] = bytes;
            }
            ledger["per_worker_totals"] = per_worker;
            return py::make_tuple(r.final_latent, ledger);
        },
        py::arg("denoiser"), py::arg("radius"), py::arg("z"), py::arg("steps"), py::arg("eta"),
        py::arg("guidance"), py::arg("cond"), py::arg("patch"), py::arg("workers"),
        py::arg("overlap_ratio"), py::arg("preset") = "wan21-like",
        "Multi-worker loop; returns (final latent, ledger summary).");

    m.def(
        "cost_report",
        [](int steps, int workers, double overlap_ratio, const std::array<i64, 4>& dims,
           const std::array<i64, 3>& patch, const std::string& preset_name,
           std::optional<std::pair<int, std::vector<int>>> hybrid) {
            return cost_to_dict(
                cost_report(cost_inputs_from_args(steps, workers, overlap_ratio, dims, patch, preset_name,
                                                  std::move(hybrid))));
        },
        py::arg("steps"), py::arg("workers"), py::arg("overlap_ratio"), py::arg("dims"), py::arg("patch"),
        py::arg("preset") = "wan21-like", py::arg("hybrid") = py::none(),
        "Analytic communication volumes and ratios.");

    m.def(
        "verify_n_complete",
        [](const std::array<i64, 3>& grid_dims, int workers, double overlap_ratio,
           const std::string& schedule_name, int budget) {
            const GridDims grid{grid_dims[0], grid_dims[1], grid_dims[2]};
            std::vector<Axis> schedule;
            if (schedule_name == "rotating") {
                schedule = rotating_schedule(budget);
            } else {
                const std::optional<Axis> axis = axis_from_name(schedule_name);
                if (!axis.has_value()) {
                    throw py::value_error("unknown schedule '" + schedule_name + "'");
                }
                schedule = constant_schedule(*axis, budget);
            }
            const CompletenessResult r = verify_n_complete(grid, workers, overlap_ratio, schedule, budget);
            py::dict d;
            d["complete"] = r.complete;
            d["complete_at"] = r.complete ? py::cast(r.complete_at) : py::none();
            d["worst_position"] = py::make_tuple(r.worst.t, r.worst.h, r.worst.w);
            d["min_steps"] = r.min_steps;
            return d;
        },
        py::arg("grid"), py::arg("workers"), py::arg("overlap_ratio"), py::arg("schedule") = "rotating",
        py::arg("budget") = 8, "Receptive-field coverage verdict for a patch grid.");

    m.def("save_latent", &write_latent_dump, py::arg("path"), py::arg("tensor"),
          "Write a tensor as a binary latent dump (LPLT header + payload).");
    m.def("load_latent", &read_latent_dump, py::arg("path"), "Read a binary latent dump.");

    m.def("presets", []() {
        py::list out;
        for (const ModelPreset& p : builtin_presets()) {
            py::dict d;
            d["name"] = p.name;
            d["hidden_dim"] = p.hidden_dim;
            d["dtype_bytes"] = p.dtype_bytes;
            d["description"] = p.description;
            out.append(d);
        }
        return out;
    });
}
