#ifndef TMSIM_ENGINE_HPP
#define TMSIM_ENGINE_HPP

#include <iosfwd>
#include <memory>
#include <vector>

#include "tmsim/admission.hpp"
#include "tmsim/core.hpp"
#include "tmsim/expulsion.hpp"
#include "tmsim/scheduling.hpp"
#include "tmsim/traffic.hpp"

namespace tmsim {

enum class EventKind { Arrival, Admit, TailDrop, HeadDrop, DequeueStart, DequeueComplete, PushoutExpel };

const char* event_kind_name(EventKind k);
std::optional<EventKind> event_kind_from_name(const std::string& name);

struct EventRecord {
    SimTime time;
    EventKind kind = EventKind::Arrival;
    QueueId queue_id = 0;
    FlowId flow_id = 0;
    uint32_t length_cells = 0;
    bool operator==(const EventRecord&) const = default;
};

// Line-oriented trace: time_ns \t kind \t queue_id \t flow_id \t length_cells
void write_trace(std::ostream& out, std::span<const EventRecord> events);
std::vector<EventRecord> read_trace(std::istream& in);

struct QueueCfg {
    QueueId queue_id = 0;
    PortId port_id = 0;
    Alpha alpha{1, 1};
    uint32_t priority_rank = 0;  // StrictPriority: lower = higher priority
};

struct ExpulsionCfg {
    bool enabled = false;
    uint32_t attempts_per_slot = 1;
    std::optional<int64_t> burst_cap_tokens;  // default max(ports, mtu cells)
};

struct TransportCfg {
    uint32_t window_packets = 43;
    SimTime rto{5'000'000};
};

struct EngineConfig {
    std::string name = "run";
    CellGeometry geometry{200};
    uint32_t mtu_bytes = 1500;
    uint32_t capacity_cells = 0;
    uint64_t aggregate_bps = 0;  // 0 = sum of port line rates
    std::vector<PortSpec> ports;
    std::vector<QueueCfg> queues;
    AdmissionPolicy policy;
    ExpulsionCfg expulsion;
    TransportCfg transport;
    uint64_t drr_quantum_bytes = 1500;
    uint64_t random_seed = 1;
    SimTime sim_duration{0};
    bool check_conservation_each_slot = true;
};

/// Length of one cell-slot of the aggregate fabric as the exact rational
/// num_ns / den (= cell bits * 1e9 / aggregate_bps, reduced).
struct SlotLength {
    uint64_t num_ns = 20;
    uint64_t den = 1;
    uint64_t time_of_slot(uint64_t slot) const {
        return static_cast<uint64_t>(static_cast<unsigned __int128>(slot) * num_ns / den);
    }
};

SlotLength slot_length(const EngineConfig& cfg);

/// Deterministic cell-slot event loop binding arrivals, admission,
/// scheduling, and head-drop expulsion. One instance runs one simulation;
/// instances share nothing.
class Engine {
  public:
    explicit Engine(EngineConfig cfg);  // throws std::invalid_argument on bad config

    // Runs to sim_duration and returns the complete time-ordered event
    // stream. Call once per instance.
    std::vector<EventRecord> run(const WorkloadSpec& workload);

    const SharedBufferState& buffer() const { return buf_; }
    const Traffic& traffic() const { return *traffic_; }
    const EngineConfig& config() const { return cfg_; }
    const TokenBucket& bucket() const { return bucket_; }

  private:
    struct PortRuntime {
        PortSpec spec;
        SchedulerState sched;
        uint64_t credit_units = 0;    // 1 byte = 8e9 units
        uint64_t inflight_units = 0;  // remainder of the packet on the wire
        FlowId inflight_flow = 0;
        QueueId inflight_queue = 0;
        uint32_t inflight_cells = 0;
        uint64_t inflight_seq = 0;
    };

    void validate();
    void emit(SimTime t, EventKind k, QueueId q, FlowId f, uint32_t cells);
    void process_arrivals(SimTime now);
    void serve_ports(SimTime now, uint64_t dt_ns);
    void run_expulsion(SimTime now);

    EngineConfig cfg_;
    SlotLength slot_;
    SharedBufferState buf_;
    std::vector<PortRuntime> ports_;
    TokenBucket bucket_;
    OverAllocationBitmap bitmap_;
    std::vector<uint64_t> threshold_scratch_;
    RoundRobinPointer rr_ptr_;
    std::unique_ptr<Traffic> traffic_;
    std::vector<EventRecord> events_;
    std::vector<InjectedPacket> arrivals_scratch_;
    std::optional<ArbiterRequest> sched_req_;  // set when any port fetched this slot
    bool ran_ = false;
};

}  // namespace tmsim

#endif
