#ifndef TMSIM_TRAFFIC_HPP
#define TMSIM_TRAFFIC_HPP

#include <deque>
#include <iosfwd>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "tmsim/core.hpp"

namespace tmsim {

/// Empirical flow-size distribution: (size_bytes, cumulative_probability)
/// points, strictly increasing in both columns, ending at 1.0. Sampling is
/// a discrete inverse transform: the first point whose cumulative
/// probability covers u.
struct Cdf {
    std::vector<std::pair<uint64_t, double>> points;

    static Cdf parse(std::istream& in, const std::string& origin);
    static Cdf load_file(const std::string& path);

    uint64_t sample(double u) const;
    double mean_bytes() const;
};

struct PoissonFlowsSpec {
    double flows_per_sec = 0;
    Cdf sizes;
    std::vector<QueueId> dst_queues;
    uint8_t priority_class = 0;
    uint64_t ingress_rate_bps = 0;  // 0 = uncapped
};

struct IncastQuerySpec {
    uint32_t fan_in = 1;
    uint64_t query_size_bytes = 0;
    SimTime first_query{0};
    double queries_per_sec = 0;  // 0 = a single query at first_query
    QueueId target_queue = 0;
    uint8_t priority_class = 0;
    uint64_t ingress_rate_bps = 0;
};

struct LongLivedSpec {
    uint32_t flow_count = 1;
    std::vector<QueueId> dst_queues;  // assigned round-robin
    uint8_t priority_class = 0;
    uint64_t ingress_rate_bps = 0;
};

/// Transport-less packet source: burst_size_bytes of packet_size_bytes
/// packets into one queue, materializing at rate_bps (0 = the whole burst
/// arrives in the start slot).
struct RawBurstSpec {
    SimTime start_time{0};
    uint64_t burst_size_bytes = 0;
    uint32_t packet_size_bytes = 1500;
    QueueId target_queue = 0;
    uint64_t rate_bps = 0;
    uint8_t priority_class = 0;
};

using GeneratorSpec = std::variant<PoissonFlowsSpec, IncastQuerySpec, LongLivedSpec, RawBurstSpec>;

struct WorkloadSpec {
    std::vector<GeneratorSpec> generators;
};

/// Fixed-window go-back-N sender state. Sequence numbers are MTU-sized
/// chunks; the window slides on cumulative in-order delivery, and an RTO on
/// the oldest outstanding packet rewinds next_seq to base.
struct FlowState {
    FlowId flow_id = 0;
    QueueId queue = 0;
    uint8_t priority_class = 0;
    bool raw = false;  // raw packets bypass the transport entirely

    uint64_t total_bytes = 0;
    uint64_t packet_count = 0;
    uint64_t acked_bytes = 0;

    uint64_t base = 0;        // first unacked seq
    uint64_t next_seq = 0;    // next seq to (re)send
    uint64_t high_water = 0;  // one past the furthest seq ever sent
    std::vector<uint64_t> delivered_ahead;  // out-of-order deliveries >= base

    SimTime start_time{0};
    std::optional<SimTime> finish_time;
    SimTime rto_deadline{0};
    std::optional<uint64_t> query_index;
};

struct QueryState {
    uint64_t query_id = 0;
    std::vector<FlowId> flow_ids;
    SimTime issue_time{0};
    std::optional<SimTime> completion_time;
};

struct TrafficParams {
    uint32_t mtu_bytes = 1500;
    CellGeometry geometry;
    uint32_t window_packets = 43;
    SimTime rto{5'000'000};
    uint64_t seed = 1;
};

struct InjectedPacket {
    QueueId queue = 0;
    PacketDescriptor pd;
};

/// All workload generators plus the transport, driven once per cell-slot.
/// Owned by a single engine instance; everything is deterministic given
/// the seed.
class Traffic {
  public:
    Traffic(const WorkloadSpec& spec, const TrafficParams& params);

    // Emits this slot's arrivals in deterministic order: staged (rate-
    // capped) packets first, then freshly generated ones.
    void on_slot(SimTime now, uint64_t slot_dt_ns, std::vector<InjectedPacket>& out);

    void on_delivery(FlowId flow, uint64_t seq, SimTime now);
    void on_drop(FlowId flow, uint64_t seq, SimTime now);

    const std::vector<FlowState>& flows() const { return flows_; }
    const std::vector<QueryState>& queries() const { return queries_; }

    // Inter-arrival sampler used by the Poisson process, exposed for the
    // law-of-large-numbers check.
    double sample_exponential(double rate_per_sec);
    double uniform01();

  private:
    struct Staging {
        uint64_t rate_bps = 0;
        uint64_t credit_units = 0;  // 1 byte = 8e9 units
        std::vector<std::deque<InjectedPacket>> lanes;
        size_t rr_cursor = 0;
        size_t lane_of(FlowId flow);
        std::vector<FlowId> lane_flows;
        bool empty() const;
    };

    struct PoissonRt {
        size_t spec_index;
        double next_arrival_ns;
    };
    struct IncastRt {
        size_t spec_index;
        double next_query_ns;
        bool single_done = false;
    };
    struct RawRt {
        size_t spec_index;
        FlowId flow_id;
        uint64_t remaining_bytes = 0;
        uint64_t seq = 0;
        bool started = false;
    };

    FlowId new_flow(QueueId queue, uint64_t bytes, uint8_t cls, SimTime now,
                    std::optional<uint64_t> query_index, bool raw);
    void emit_packet(size_t gen_index, FlowState& f, uint64_t seq, SimTime now,
                     std::vector<InjectedPacket>& out);
    void pump_flow_windows(size_t gen_index, std::vector<FlowId>& flow_list, SimTime now,
                           std::vector<InjectedPacket>& out);
    PacketDescriptor make_pd(const FlowState& f, uint64_t seq, SimTime now) const;
    uint32_t packet_bytes(const FlowState& f, uint64_t seq) const;

    TrafficParams params_;
    std::vector<GeneratorSpec> specs_;
    std::vector<Staging> staging_;  // one per generator
    std::vector<PoissonRt> poisson_;
    std::vector<IncastRt> incast_;
    std::vector<RawRt> raw_;
    std::vector<std::vector<FlowId>> gen_flows_;  // transport flows per generator
    std::vector<FlowState> flows_;
    std::vector<QueryState> queries_;
    std::mt19937_64 rng_;
};

}  // namespace tmsim

#endif
