#include "lpsim/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lpsim/errors.hpp"

namespace lpsim {

namespace {

constexpr char kMagic[4] = {'L', 'P', 'L', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    buf.append(b, 4);
}

std::uint32_t take_u32(const char* p) {
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

// NaN has no JSON representation; undefined ratios (K=1) become null.
nlohmann::json number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

}  // namespace

void write_latent_dump(const std::string& path, const LatentTensor& z) {
    std::string buf;
    buf.reserve(32 + static_cast<size_t>(z.size()) * static_cast<size_t>(dtype_bytes(z.dtype())));
    buf.append(kMagic, 4);
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(dtype_bytes(z.dtype())));
    put_u32(buf, static_cast<std::uint32_t>(z.shape().c));
    put_u32(buf, static_cast<std::uint32_t>(z.shape().t));
    put_u32(buf, static_cast<std::uint32_t>(z.shape().h));
    put_u32(buf, static_cast<std::uint32_t>(z.shape().w));
    put_u32(buf, 0);  // reserved

    switch (z.dtype()) {
        case Dtype::F16:
            for (i64 i = 0; i < z.size(); ++i) {
                const std::uint16_t h = f16_encode(z[i]);
                char b[2];
                std::memcpy(b, &h, 2);
                buf.append(b, 2);
            }
            break;
        case Dtype::F32:
            for (i64 i = 0; i < z.size(); ++i) {
                const float f = static_cast<float>(z[i]);
                char b[4];
                std::memcpy(b, &f, 4);
                buf.append(b, 4);
            }
            break;
        case Dtype::F64:
            for (i64 i = 0; i < z.size(); ++i) {
                const double d = z[i];
                char b[8];
                std::memcpy(b, &d, 8);
                buf.append(b, 8);
            }
            break;
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(buf.data(), static_cast<std::streamsize>(buf.size()))) {
        fail(ErrorKind::Io, "cannot write latent dump '" + path + "'");
    }
}

LatentTensor read_latent_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorKind::Io, "cannot open latent dump '" + path + "'");
    }
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 32 || std::memcmp(buf.data(), kMagic, 4) != 0) {
        fail(ErrorKind::Io, "'" + path + "' is not a latent dump");
    }
    if (take_u32(buf.data() + 4) != kVersion) {
        fail(ErrorKind::Io, "unsupported latent dump version");
    }
    const Dtype dtype = dtype_from_bytes(static_cast<int>(take_u32(buf.data() + 8)));
    Shape shape;
    shape.c = take_u32(buf.data() + 12);
    shape.t = take_u32(buf.data() + 16);
    shape.h = take_u32(buf.data() + 20);
    shape.w = take_u32(buf.data() + 24);

    const size_t expect = 32 + static_cast<size_t>(shape.volume()) * static_cast<size_t>(dtype_bytes(dtype));
    if (buf.size() != expect) {
        fail(ErrorKind::Io, "latent dump payload size mismatch");
    }

    std::vector<double> values(static_cast<size_t>(shape.volume()));
    const char* p = buf.data() + 32;
    switch (dtype) {
        case Dtype::F16:
            for (double& v : values) {
                std::uint16_t h;
                std::memcpy(&h, p, 2);
                p += 2;
                v = f16_decode(h);
            }
            break;
        case Dtype::F32:
            for (double& v : values) {
                float f;
                std::memcpy(&f, p, 4);
                p += 4;
                v = static_cast<double>(f);
            }
            break;
        case Dtype::F64:
            for (double& v : values) {
                double d;
                std::memcpy(&d, p, 8);
                p += 8;
                v = d;
            }
            break;
    }
    return LatentTensor::from_doubles(shape, dtype, std::move(values));
}

std::string ledger_csv(const CommLedger& ledger) {
    std::ostringstream os;
    os << "step,pass,kind,src,dst,bytes\n";
    for (const CommRecord& r : ledger.records()) {
        os << r.step << ',' << pass_name(r.pass) << ',' << transfer_kind_name(r.kind) << ',' << r.src << ','
           << r.dst << ',' << r.bytes << '\n';
    }
    return os.str();
}

std::string weight_profile_csv(const PartitionPlan& plan) {
    std::ostringstream os;
    os << "position,worker_id,weight\n";
    for (const PartitionEntry& e : plan.entries) {
        const WeightMask mask = build_weight_mask(e);
        for (i64 j = 0; j < mask.length; ++j) {
            os << (e.latent.begin + j) << ',' << e.worker_id << ',' << mask.axis_profile[static_cast<size_t>(j)]
               << '\n';
        }
    }
    return os.str();
}

nlohmann::json plan_json(const PartitionPlan& plan) {
    nlohmann::json entries = nlohmann::json::array();
    for (const PartitionEntry& e : plan.entries) {
        entries.push_back({
            {"k", e.worker_id},
            {"core", {e.core_patches.begin, e.core_patches.end}},
            {"ext", {e.ext_patches.begin, e.ext_patches.end}},
            {"latent", {e.latent.begin, e.latent.end}},
            {"delta", {e.delta_start, e.delta_end}},
        });
    }
    return {
        {"axis", axis_name(plan.axis)},
        {"step", plan.step_index},
        {"L", plan.patches_per_core},
        {"O", plan.overlap_patches},
        {"entries", entries},
    };
}

nlohmann::json ledger_summary_json(const CommLedger& ledger) {
    nlohmann::json per_worker = nlohmann::json::object();
    for (const auto& [worker, bytes] : ledger.per_worker_totals()) {
        per_worker[std::to_string(worker)] = bytes;
    }
    return {
        {"grand_total", ledger.grand_total()},
        {"per_worker_totals", per_worker},
    };
}

nlohmann::json cost_report_json(const CostReport& report) {
    nlohmann::json doc = {
        {"S_z", report.latent_bytes},
        {"S_H", report.activation_bytes},
        {"S_ext", report.ext_bytes_mean},
        {"gamma", report.gamma},
        {"gamma_per_axis",
         {report.gamma_per_axis[0], report.gamma_per_axis[1], report.gamma_per_axis[2]}},
        {"C_NMP", report.nmp_bytes},
        {"C_PP", report.pp_bytes},
        {"C_LP_exact", report.lp_exact_bytes},
        {"C_LP_approx", report.lp_approx_bytes},
        {"ratio_exact", number_or_null(report.ratio_exact)},
        {"ratio_approx", number_or_null(report.ratio_approx)},
        {"Sz_over_SH", report.latent_activation_ratio},
    };
    if (report.hybrid.has_value()) {
        doc["hybrid"] = {
            {"C_inter", report.hybrid->inter_bytes},
            {"C_intra_total", report.hybrid->intra_bytes},
            {"C_hyb", report.hybrid->total_bytes},
            {"ratio_vs_NMP", number_or_null(report.hybrid->ratio_vs_nmp)},
            {"bound", number_or_null(report.hybrid->bound)},
            {"within_bound", report.hybrid->within_bound},
        };
    }
    return doc;
}

std::string cost_report_csv(const CostInputs& in, const CostReport& report) {
    std::ostringstream os;
    os << "T,K,r,C,D_T,D_H,D_W,p_T,p_H,p_W,preset,hidden_dim,dtype_bytes,S_z,S_H,gamma,"
          "C_NMP,C_PP,C_LP_exact,C_LP_approx,ratio_exact,ratio_approx\n";
    os << in.steps << ',' << in.workers << ',' << in.overlap_ratio << ',' << in.shape.c << ',' << in.shape.t
       << ',' << in.shape.h << ',' << in.shape.w << ',' << in.geometry.p_t << ',' << in.geometry.p_h << ','
       << in.geometry.p_w << ',' << in.preset.name << ',' << in.preset.hidden_dim << ','
       << in.preset.dtype_bytes << ',' << report.latent_bytes << ',' << report.activation_bytes << ','
       << report.gamma << ',' << report.nmp_bytes << ',' << report.pp_bytes << ',' << report.lp_exact_bytes
       << ',' << report.lp_approx_bytes << ',' << report.ratio_exact << ',' << report.ratio_approx << '\n';
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !out.write(content.data(), static_cast<std::streamsize>(content.size()))) {
        fail(ErrorKind::Io, "cannot write '" + path + "'");
    }
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

}  // namespace lpsim
