#ifndef TMSIM_METRICS_HPP
#define TMSIM_METRICS_HPP

#include <functional>
#include <map>

#include "tmsim/engine.hpp"

namespace tmsim {

struct FlowRecord {
    FlowId flow_id = 0;
    uint8_t priority_class = 0;
    uint64_t bytes = 0;
    SimTime start{0};
    std::optional<SimTime> finish;
    std::optional<uint64_t> fct_ns() const {
        if (!finish) return std::nullopt;
        return finish->ns - start.ns;
    }
};

struct QueryRecord {
    uint64_t query_id = 0;
    SimTime issue{0};
    std::optional<SimTime> completion;
    std::optional<uint64_t> qct_ns() const {
        if (!completion) return std::nullopt;
        return completion->ns - issue.ns;
    }
};

struct QueueDropCount {
    uint64_t tail_pkts = 0;
    uint64_t head_pkts = 0;  // head drops + pushout expulsions
    uint64_t tail_cells = 0;
    uint64_t head_cells = 0;
};

struct RunSummary {
    std::vector<FlowRecord> flows;
    std::vector<QueryRecord> queries;
    std::map<QueueId, QueueDropCount> drops_by_queue;
    std::map<uint8_t, QueueDropCount> drops_by_class;
    std::map<QueueId, uint32_t> max_queue_cells;
    std::map<QueueId, double> mean_queue_cells;  // time-weighted
    std::vector<double> buffer_utilization_at_drop;
    std::vector<double> bandwidth_utilization_at_drop;
    double measured_expulsion_rate_cells_per_sec = 0;

    uint64_t admitted_cells = 0;
    uint64_t delivered_cells = 0;
    uint64_t head_dropped_cells = 0;  // incl. pushout expulsions
    uint64_t residual_cells = 0;
};

struct SummaryConfig {
    uint32_t capacity_cells = 0;
    SlotLength slot;                      // for bandwidth capacity per window
    uint64_t bandwidth_window_ns = 1000;  // sliding window ending at each drop
    SimTime run_duration{0};
    // flow_id -> (class, total bytes, start, finish); from the transport
    std::vector<FlowRecord> flow_table;
    std::vector<QueryRecord> query_table;
};

/// One-pass fold over a complete, time-ordered event stream. Out-of-order
/// streams are an error. Buffer utilization is sampled at every
/// TailDrop/HeadDrop as (B - free)/B; bandwidth utilization over the
/// trailing window as dequeued cells / slot capacity.
RunSummary summarize(std::span<const EventRecord> events, const SummaryConfig& cfg);

/// actual / ideal; ideal of zero is an error.
double slowdown(double actual, double ideal);

/// Nearest-rank percentile of an unsorted list, p in (0, 100].
uint64_t percentile_nearest_rank(std::vector<uint64_t> values, double p);

/// Runs the scenario at a given burst size and reports whether any packet
/// of the burst class was dropped.
using BurstProbe = std::function<bool(uint64_t burst_bytes)>;

/// Largest burst (bytes) absorbed with zero burst-class drops, found by
/// binary search to one MTU; 0 when even the smallest probe drops.
uint64_t burst_absorption_capacity(const BurstProbe& drops_at, uint64_t hi_bytes,
                                   uint32_t mtu_bytes);

/// True when any TailDrop/HeadDrop/PushoutExpel in `events` hits a flow of
/// `cls`; the burst-probe building block.
bool class_suffered_drops(std::span<const EventRecord> events,
                          const std::vector<FlowRecord>& flow_table, uint8_t cls);

// CSV emitters; column orders are part of the interface.
// flows.csv:   flow_id,class,bytes,fct_ns        (fct_ns empty if unfinished)
// queries.csv: query_id,qct_ns                   (qct_ns empty if incomplete)
// summary.csv: metric,value
void write_flow_csv(std::ostream& out, const RunSummary& s);
void write_query_csv(std::ostream& out, const RunSummary& s);
void write_summary_csv(std::ostream& out, const RunSummary& s);

/// Queue occupancy over time reconstructed from the trace, sampled every
/// interval_ns: lines of "time_ns\tqueue_id\toccupancy_cells".
void write_queue_trace(std::ostream& out, std::span<const EventRecord> events,
                       size_t queue_count, uint64_t interval_ns, SimTime run_duration);

}  // namespace tmsim

#endif
