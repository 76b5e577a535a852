#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "lpsim/denoise.hpp"
#include "lpsim/partition.hpp"

namespace lpsim {

enum class Pass { Cond, Uncond };
enum class TransferKind { Scatter, Gather, Activation };

const char* pass_name(Pass p);
const char* transfer_kind_name(TransferKind k);

// One inter-worker transfer. Payload bytes count tensor data only; headers
// and metadata are excluded.
struct CommRecord {
    int step = 0;
    Pass pass = Pass::Cond;
    TransferKind kind = TransferKind::Scatter;
    int src = 0;
    int dst = 0;
    std::uint64_t elements = 0;
    std::uint64_t bytes = 0;
};

class CommLedger {
public:
    explicit CommLedger(int dtype_bytes) : dtype_bytes_(dtype_bytes) {}

    void add(int step, Pass pass, TransferKind kind, int src, int dst, std::uint64_t elements);

    const std::vector<CommRecord>& records() const { return records_; }
    int dtype_bytes() const { return dtype_bytes_; }

    std::uint64_t grand_total() const;
    // Each transfer counts toward both endpoints.
    std::map<int, std::uint64_t> per_worker_totals() const;
    std::map<int, std::uint64_t> per_step_totals() const;

    // Rechecks bytes == elements * dtype_bytes on every record.
    void validate() const;

private:
    int dtype_bytes_;
    std::vector<CommRecord> records_;
};

// Simulated cluster: K workers, worker 1 is the master orchestrator and owns
// partition k=1. The geometry drives the per-step partitioner; the preset
// fixes the wire width of every transfer.
struct ClusterConfig {
    int workers = 1;             // K
    double overlap_ratio = 0.0;  // r
    PatchGeometry geometry;
    ModelPreset preset;
    int master_id = 1;
};

// Typed messages between master and workers; workers see nothing else.
struct ScatterMessage {
    int step = 0;
    int timestep = 0;
    LatentTensor sub_latent;
    ConditioningVector cond;
    double guidance_scale = 1.0;
};

struct GatherMessage {
    int worker_id = 0;
    int step = 0;
    LatentTensor prediction;
};

class SimWorker {
public:
    SimWorker(int id, const Denoiser& f) : id_(id), f_(&f) {}

    int id() const { return id_; }

    // Runs both CFG passes locally on the received sub-latent.
    GatherMessage process(const ScatterMessage& msg) const;

private:
    int id_;
    const Denoiser* f_;
};

struct LpRunResult {
    LatentTensor final_latent;
    CommLedger ledger;
    std::vector<LatentTensor> trace;
};

// Full LP loop: per step, build the rotated plan, scatter sub-latents to
// workers 2..K, denoise all partitions in parallel, gather, reconstruct,
// advance the sampler. Scatter and gather are each metered once per CFG
// pass. Results are identical regardless of worker completion order.
LpRunResult run_lp(const Denoiser& f, const LatentTensor& z_init, const SamplerConfig& cfg,
                   const ConditioningVector& cond, const ClusterConfig& cluster);

// Counter-level emulations of layer-split model serving: per CFG pass one
// full activation tensor crosses each of the K-1 stage boundaries. No
// computation is performed. NMP orders records pass-major; PP interleaves
// the two passes through each boundary as micro-batches. Totals are equal.
CommLedger run_nmp_emulation(int layers, const Shape& latent_shape, const SamplerConfig& cfg,
                             const ClusterConfig& cluster);
CommLedger run_pp_emulation(int layers, const Shape& latent_shape, const SamplerConfig& cfg,
                            const ClusterConfig& cluster);
CommLedger run_nmp_emulation(int layers, const LatentTensor& z, const SamplerConfig& cfg,
                             const ClusterConfig& cluster);
CommLedger run_pp_emulation(int layers, const LatentTensor& z, const SamplerConfig& cfg,
                            const ClusterConfig& cluster);

// Worker-parallelism cap from LPSIM_THREADS: 0 = serial reference mode,
// unset = hardware concurrency.
int worker_thread_cap();

}  // namespace lpsim
