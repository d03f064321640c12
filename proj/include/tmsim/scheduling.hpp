#ifndef TMSIM_SCHEDULING_HPP
#define TMSIM_SCHEDULING_HPP

#include <optional>
#include <vector>

#include "tmsim/core.hpp"

namespace tmsim {

/// Per-port output scheduler state. Queue positions index into the port's
/// queue_ids list. pick_next() returns the queue whose head packet the
/// caller will transmit; for DRR the head's bytes are deducted from the
/// deficit at selection time, so the caller must dequeue exactly that head.
struct SchedulerState {
    SchedKind kind = SchedKind::RoundRobin;

    // RoundRobin
    uint32_t rr_pointer = 0;
    bool rr_started = false;

    // DRR
    std::vector<uint64_t> drr_deficit_bytes;
    uint64_t drr_quantum_bytes = 1500;
    uint32_t drr_current = 0;
    bool drr_visit_open = false;

    // StrictPriority: rank per queue position, lower = higher priority
    std::vector<uint32_t> priority_rank;

    static SchedulerState make(const PortSpec& port, uint64_t quantum_bytes,
                               std::vector<uint32_t> ranks);

    // Deficit of an empty queue resets to 0; the engine calls this after a
    // dequeue empties the queue.
    void on_queue_emptied(uint32_t pos) {
        if (kind == SchedKind::DRR && pos < drr_deficit_bytes.size()) drr_deficit_bytes[pos] = 0;
    }
};

/// Next queue of the port to transmit from, or nullopt when every queue on
/// the port is empty (work conservation).
std::optional<QueueId> pick_next(const PortSpec& port, SchedulerState& sched,
                                 const SharedBufferState& buf);

}  // namespace tmsim

#endif
