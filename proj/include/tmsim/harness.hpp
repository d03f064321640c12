#ifndef TMSIM_HARNESS_HPP
#define TMSIM_HARNESS_HPP

#include <filesystem>

#include "json.hpp"
#include "tmsim/engine.hpp"
#include "tmsim/metrics.hpp"

namespace tmsim {

struct PolicyOverride {
    AdmissionPolicy policy;
    std::optional<Alpha> alpha;  // fills queues without an explicit alpha
    std::string tag;             // directory-friendly, e.g. "dt-a1"
};

struct OutputSel {
    bool trace = true;
    bool flow_csv = true;
    bool summary_csv = true;
    bool queue_trace = false;
    uint64_t queue_trace_interval_ns = 1000;
};

struct ScenarioSpec {
    std::string name;
    EngineConfig engine;               // normalized, base policy applied
    std::vector<bool> alpha_explicit;  // per queue: alpha pinned in the file
    WorkloadSpec workload;
    std::vector<PolicyOverride> policy_sweep;  // never empty
    std::vector<uint64_t> seeds;               // never empty
    OutputSel outputs;
    nlohmann::json raw;  // scenario file contents, verbatim
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Default alpha a policy applies to queues that do not pin one.
Alpha default_alpha_for(PolicyKind kind);

/// Parses and normalizes a scenario: defaults applied (cell 200B, MTU 1500,
/// RTO 5ms, DT alpha 1 / Occamy alpha 8, 5.12KB-per-port-per-Gbps sizing
/// when capacity_cells is absent), unknown keys and contradictory sizing
/// rejected with the offending field path.
ScenarioSpec parse_scenario(const nlohmann::json& j, const std::filesystem::path& base_dir);
ScenarioSpec load_scenario_file(const std::filesystem::path& path);

/// Engine config for one (policy, seed) run of the sweep.
EngineConfig materialize(const ScenarioSpec& spec, const PolicyOverride& po, uint64_t seed);

uint64_t fnv1a64(std::string_view data);

struct RunResult {
    std::filesystem::path dir;
    std::string policy_tag;
    uint64_t seed = 0;
};

/// Executes |policies| x |seeds| runs; each run writes its requested
/// outputs plus manifest.json into its own subdirectory of out_root/name.
std::vector<RunResult> run_scenario(const ScenarioSpec& spec,
                                    const std::filesystem::path& out_root);

/// Flow/query tables the metrics layer consumes, pulled from a finished
/// engine's transport.
std::vector<FlowRecord> flow_table(const Traffic& traffic);
std::vector<QueryRecord> query_table(const Traffic& traffic);

WorkloadSpec parse_workload(const nlohmann::json& j, const std::filesystem::path& base_dir,
                            const std::string& path_prefix, size_t queue_count,
                            uint32_t mtu_bytes);

}  // namespace tmsim

#endif
