#include "lpsim/cluster.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include "lpsim/errors.hpp"
#include "lpsim/reconstruct.hpp"

namespace lpsim {

const char* pass_name(Pass p) {
    return p == Pass::Cond ? "cond" : "uncond";
}

const char* transfer_kind_name(TransferKind k) {
    switch (k) {
        case TransferKind::Scatter: return "scatter";
        case TransferKind::Gather: return "gather";
        case TransferKind::Activation: return "activation";
    }
    return "?";
}

void CommLedger::add(int step, Pass pass, TransferKind kind, int src, int dst, std::uint64_t elements) {
    CommRecord rec;
    rec.step = step;
    rec.pass = pass;
    rec.kind = kind;
    rec.src = src;
    rec.dst = dst;
    rec.elements = elements;
    rec.bytes = elements * static_cast<std::uint64_t>(dtype_bytes_);
    records_.push_back(rec);
}

std::uint64_t CommLedger::grand_total() const {
    std::uint64_t total = 0;
    for (const CommRecord& r : records_) total += r.bytes;
    return total;
}

std::map<int, std::uint64_t> CommLedger::per_worker_totals() const {
    std::map<int, std::uint64_t> totals;
    for (const CommRecord& r : records_) {
        totals[r.src] += r.bytes;
        totals[r.dst] += r.bytes;
    }
    return totals;
}

std::map<int, std::uint64_t> CommLedger::per_step_totals() const {
    std::map<int, std::uint64_t> totals;
    for (const CommRecord& r : records_) {
        totals[r.step] += r.bytes;
    }
    return totals;
}

void CommLedger::validate() const {
    std::uint64_t total = 0;
    for (const CommRecord& r : records_) {
        if (r.bytes != r.elements * static_cast<std::uint64_t>(dtype_bytes_)) {
            fail(ErrorKind::InvalidArgument, "ledger record bytes do not equal elements * dtype_bytes");
        }
        total += r.bytes;
    }
    if (total != grand_total()) {
        fail(ErrorKind::InvalidArgument, "ledger totals drifted from the record sum");
    }
}

GatherMessage SimWorker::process(const ScatterMessage& msg) const {
    GatherMessage out;
    out.worker_id = id_;
    out.step = msg.step;
    out.prediction = cfg_predict(*f_, msg.sub_latent, msg.timestep, msg.cond, msg.guidance_scale);
    return out;
}

int worker_thread_cap() {
    const char* env = std::getenv("LPSIM_THREADS");
    if (env == nullptr || *env == '\0') {
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0) {
        emit_warning(std::string("ignoring invalid LPSIM_THREADS value '") + env + "'");
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }
    return v == 0 ? 1 : static_cast<int>(v);
}

namespace {

void validate_cluster(const ClusterConfig& cluster) {
    if (cluster.workers < 1) {
        fail(ErrorKind::InvalidArgument, "cluster needs at least one worker");
    }
    if (cluster.master_id != 1) {
        fail(ErrorKind::InvalidArgument, "worker 1 is the master orchestrator");
    }
    if (cluster.preset.dtype_bytes != 2 && cluster.preset.dtype_bytes != 4 && cluster.preset.dtype_bytes != 8) {
        fail(ErrorKind::InvalidArgument, "preset dtype_bytes must be 2, 4 or 8");
    }
}

// Runs one job per plan entry on up to `cap` threads. Any thrown exception
// is reported for the lowest failing worker id.
void run_workers(const std::vector<SimWorker>& workers, const std::vector<ScatterMessage>& inbox,
                 std::vector<GatherMessage>& outbox, int cap, int step) {
    const int n = static_cast<int>(workers.size());
    std::vector<std::exception_ptr> failures(static_cast<size_t>(n));

    const int threads = std::min(cap, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) {
            try {
                outbox[static_cast<size_t>(i)] = workers[static_cast<size_t>(i)].process(inbox[static_cast<size_t>(i)]);
            } catch (...) {
                failures[static_cast<size_t>(i)] = std::current_exception();
            }
        }
    } else {
        std::atomic<int> next{0};
        auto body = [&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    outbox[static_cast<size_t>(i)] =
                        workers[static_cast<size_t>(i)].process(inbox[static_cast<size_t>(i)]);
                } catch (...) {
                    failures[static_cast<size_t>(i)] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(body);
        for (std::thread& th : pool) th.join();
    }

    for (int i = 0; i < n; ++i) {
        if (failures[static_cast<size_t>(i)]) {
            std::string detail = "unknown error";
            try {
                std::rethrow_exception(failures[static_cast<size_t>(i)]);
            } catch (const std::exception& e) {
                detail = e.what();
            } catch (...) {
            }
            fail(ErrorKind::WorkerFailure, "worker " + std::to_string(workers[static_cast<size_t>(i)].id()) +
                                               " failed at step " + std::to_string(step) + ": " + detail);
        }
    }
}

}  // namespace

LpRunResult run_lp(const Denoiser& f, const LatentTensor& z_init, const SamplerConfig& cfg,
                   const ConditioningVector& cond, const ClusterConfig& cluster) {
    validate_cluster(cluster);
    if (cfg.total_steps < 1) {
        fail(ErrorKind::InvalidArgument, "total_steps must be >= 1");
    }

    const int cap = worker_thread_cap();
    LpRunResult result{LatentTensor(), CommLedger(cluster.preset.dtype_bytes), {}};
    result.trace.reserve(static_cast<size_t>(cfg.total_steps));

    LatentTensor z = z_init;
    for (int i = 1; i <= cfg.total_steps; ++i) {
        const int t = cfg.total_steps + 1 - i;
        const PartitionPlan plan = build_plan(z, cluster.geometry, i, cluster.workers, cluster.overlap_ratio);
        const std::vector<LatentTensor> subs = extract_sublatents(z, plan);
        const int k_eff = plan.workers();

        // Each CFG pass needs the sub-latent on the worker, so the scatter is
        // metered once per pass. The master keeps partition 1 for itself.
        for (Pass pass : {Pass::Cond, Pass::Uncond}) {
            for (int k = 2; k <= k_eff; ++k) {
                result.ledger.add(i, pass, TransferKind::Scatter, 1, k,
                                  static_cast<std::uint64_t>(subs[static_cast<size_t>(k - 1)].size()));
            }
        }

        std::vector<SimWorker> workers;
        std::vector<ScatterMessage> inbox;
        workers.reserve(static_cast<size_t>(k_eff));
        inbox.reserve(static_cast<size_t>(k_eff));
        for (int k = 1; k <= k_eff; ++k) {
            workers.emplace_back(k, f);
            inbox.push_back(ScatterMessage{i, t, subs[static_cast<size_t>(k - 1)], cond, cfg.guidance_scale});
        }
        std::vector<GatherMessage> outbox(static_cast<size_t>(k_eff));
        run_workers(workers, inbox, outbox, cap, i);

        for (Pass pass : {Pass::Cond, Pass::Uncond}) {
            for (int k = 2; k <= k_eff; ++k) {
                result.ledger.add(i, pass, TransferKind::Gather, k, 1,
                                  static_cast<std::uint64_t>(outbox[static_cast<size_t>(k - 1)].prediction.size()));
            }
        }

        // Contributions are ordered by worker id, never by arrival.
        std::vector<LatentTensor> predictions;
        predictions.reserve(static_cast<size_t>(k_eff));
        for (int k = 1; k <= k_eff; ++k) {
            predictions.push_back(std::move(outbox[static_cast<size_t>(k - 1)].prediction));
        }
        const LatentTensor eps = reconstruct(predictions, plan, z.shape());
        z = sampler_step(z, eps, t, cfg);
        result.trace.push_back(z);
    }

    result.final_latent = std::move(z);
    result.ledger.validate();
    return result;
}

namespace {

CommLedger run_boundary_emulation(int layers, const Shape& latent_shape, const SamplerConfig& cfg,
                                  const ClusterConfig& cluster, bool interleave_passes) {
    validate_cluster(cluster);
    if (layers < cluster.workers || layers % cluster.workers != 0) {
        fail(ErrorKind::InvalidArgument, "layer count " + std::to_string(layers) +
                                             " is not divisible across " + std::to_string(cluster.workers) +
                                             " workers");
    }
    const std::uint64_t tokens = static_cast<std::uint64_t>(total_patches(latent_shape, cluster.geometry));
    const std::uint64_t activation_elements = tokens * static_cast<std::uint64_t>(cluster.preset.hidden_dim);

    CommLedger ledger(cluster.preset.dtype_bytes);
    for (int i = 1; i <= cfg.total_steps; ++i) {
        if (interleave_passes) {
            // Micro-batched pipeline: both passes cross each boundary back to back.
            for (int b = 1; b < cluster.workers; ++b) {
                ledger.add(i, Pass::Cond, TransferKind::Activation, b, b + 1, activation_elements);
                ledger.add(i, Pass::Uncond, TransferKind::Activation, b, b + 1, activation_elements);
            }
        } else {
            for (Pass pass : {Pass::Cond, Pass::Uncond}) {
                for (int b = 1; b < cluster.workers; ++b) {
                    ledger.add(i, pass, TransferKind::Activation, b, b + 1, activation_elements);
                }
            }
        }
    }
    ledger.validate();
    return ledger;
}

}  // namespace

CommLedger run_nmp_emulation(int layers, const Shape& latent_shape, const SamplerConfig& cfg,
                             const ClusterConfig& cluster) {
    return run_boundary_emulation(layers, latent_shape, cfg, cluster, /*interleave_passes=*/false);
}

CommLedger run_pp_emulation(int layers, const Shape& latent_shape, const SamplerConfig& cfg,
                            const ClusterConfig& cluster) {
    return run_boundary_emulation(layers, latent_shape, cfg, cluster, /*interleave_passes=*/true);
}

CommLedger run_nmp_emulation(int layers, const LatentTensor& z, const SamplerConfig& cfg,
                             const ClusterConfig& cluster) {
    return run_nmp_emulation(layers, z.shape(), cfg, cluster);
}

CommLedger run_pp_emulation(int layers, const LatentTensor& z, const SamplerConfig& cfg,
                            const ClusterConfig& cluster) {
    return run_pp_emulation(layers, z.shape(), cfg, cluster);
}

}  // namespace lpsim
