#include "tmsim/scheduling.hpp"

namespace tmsim {

SchedulerState SchedulerState::make(const PortSpec& port, uint64_t quantum_bytes,
                                    std::vector<uint32_t> ranks) {
    SchedulerState s;
    s.kind = port.scheduler_kind;
    s.drr_quantum_bytes = quantum_bytes == 0 ? 1 : quantum_bytes;
    s.drr_deficit_bytes.assign(port.queue_ids.size(), 0);
    if (ranks.size() == port.queue_ids.size()) {
        s.priority_rank = std::move(ranks);
    } else {
        s.priority_rank.resize(port.queue_ids.size());
        for (uint32_t i = 0; i < s.priority_rank.size(); ++i) s.priority_rank[i] = i;
    }
    return s;
}

namespace {

std::optional<QueueId> pick_round_robin(const PortSpec& port, SchedulerState& s,
                                        const SharedBufferState& buf) {
    size_t n = port.queue_ids.size();
    size_t start = s.rr_started ? (s.rr_pointer + 1) % n : 0;
    for (size_t k = 0; k < n; ++k) {
        size_t pos = (start + k) % n;
        if (!buf.queue(port.queue_ids[pos]).empty()) {
            s.rr_pointer = static_cast<uint32_t>(pos);
            s.rr_started = true;
            return port.queue_ids[pos];
        }
    }
    return std::nullopt;
}

std::optional<QueueId> pick_strict_priority(const PortSpec& port, const SchedulerState& s,
                                            const SharedBufferState& buf) {
    std::optional<size_t> best;
    for (size_t pos = 0; pos < port.queue_ids.size(); ++pos) {
        if (buf.queue(port.queue_ids[pos]).empty()) continue;
        if (!best || s.priority_rank[pos] < s.priority_rank[*best]) best = pos;
    }
    if (!best) return std::nullopt;
    return port.queue_ids[*best];
}

std::optional<QueueId> pick_drr(const PortSpec& port, SchedulerState& s,
                                const SharedBufferState& buf) {
    size_t n = port.queue_ids.size();
    bool any = false;
    for (QueueId id : port.queue_ids)
        if (!buf.queue(id).empty()) any = true;
    if (!any) return std::nullopt;

    for (;;) {
        size_t pos = s.drr_current;
        const QueueState& q = buf.queue(port.queue_ids[pos]);
        if (q.empty()) {
            s.drr_deficit_bytes[pos] = 0;
            s.drr_current = static_cast<uint32_t>((pos + 1) % n);
            s.drr_visit_open = false;
            continue;
        }
        if (!s.drr_visit_open) {
            s.drr_deficit_bytes[pos] += s.drr_quantum_bytes;
            s.drr_visit_open = true;
        }
        if (s.drr_deficit_bytes[pos] >= q.head().length_bytes) {
            s.drr_deficit_bytes[pos] -= q.head().length_bytes;
            return port.queue_ids[pos];
        }
        // deficit carries to the next round
        s.drr_current = static_cast<uint32_t>((pos + 1) % n);
        s.drr_visit_open = false;
    }
}

}  // namespace

std::optional<QueueId> pick_next(const PortSpec& port, SchedulerState& sched,
                                 const SharedBufferState& buf) {
    if (port.queue_ids.empty()) return std::nullopt;
    switch (sched.kind) {
        case SchedKind::RoundRobin: return pick_round_robin(port, sched, buf);
        case SchedKind::StrictPriority: return pick_strict_priority(port, sched, buf);
        case SchedKind::DRR: return pick_drr(port, sched, buf);
    }
    return std::nullopt;
}

}  // namespace tmsim
