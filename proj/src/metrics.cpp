#include "tmsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

namespace tmsim {

RunSummary summarize(std::span<const EventRecord> events, const SummaryConfig& cfg) {
    RunSummary s;
    s.flows = cfg.flow_table;
    s.queries = cfg.query_table;

    std::map<FlowId, uint8_t> cls_of;
    for (const FlowRecord& f : cfg.flow_table) cls_of[f.flow_id] = f.priority_class;

    std::map<QueueId, uint32_t> occ;
    std::map<QueueId, uint64_t> occ_time_weighted_num;  // cells * ns
    std::map<QueueId, uint64_t> last_change;
    uint32_t free_cells = cfg.capacity_cells;
    uint64_t expelled_cells = 0;
    uint64_t last_time = 0;

    // trailing dequeue history for the bandwidth window
    std::deque<std::pair<uint64_t, uint32_t>> recent_dequeues;
    uint64_t recent_cells = 0;
    const double window_capacity_cells =
        static_cast<double>(cfg.bandwidth_window_ns) * static_cast<double>(cfg.slot.den) /
        static_cast<double>(cfg.slot.num_ns);

    auto account = [&](QueueId q, uint64_t now, int64_t delta) {
        uint64_t dt = now - last_change[q];
        occ_time_weighted_num[q] += static_cast<uint64_t>(occ[q]) * dt;
        last_change[q] = now;
        occ[q] = static_cast<uint32_t>(static_cast<int64_t>(occ[q]) + delta);
        auto& mx = s.max_queue_cells[q];
        mx = std::max(mx, occ[q]);
    };

    auto drop_sample = [&](uint64_t now) {
        s.buffer_utilization_at_drop.push_back(
            static_cast<double>(cfg.capacity_cells - free_cells) /
            static_cast<double>(cfg.capacity_cells));
        while (!recent_dequeues.empty() &&
               recent_dequeues.front().first + cfg.bandwidth_window_ns <= now) {
            recent_cells -= recent_dequeues.front().second;
            recent_dequeues.pop_front();
        }
        s.bandwidth_utilization_at_drop.push_back(
            std::min(1.0, static_cast<double>(recent_cells) / window_capacity_cells));
    };

    for (const EventRecord& e : events) {
        if (e.time.ns < last_time) throw std::runtime_error("summarize: out-of-order event stream");
        last_time = e.time.ns;
        switch (e.kind) {
            case EventKind::Arrival:
                break;
            case EventKind::Admit:
                account(e.queue_id, e.time.ns, e.length_cells);
                free_cells -= e.length_cells;
                s.admitted_cells += e.length_cells;
                break;
            case EventKind::DequeueStart:
                account(e.queue_id, e.time.ns, -static_cast<int64_t>(e.length_cells));
                free_cells += e.length_cells;
                s.delivered_cells += e.length_cells;
                recent_dequeues.emplace_back(e.time.ns, e.length_cells);
                recent_cells += e.length_cells;
                break;
            case EventKind::DequeueComplete:
                break;
            case EventKind::TailDrop: {
                drop_sample(e.time.ns);
                auto& dq = s.drops_by_queue[e.queue_id];
                dq.tail_pkts++;
                dq.tail_cells += e.length_cells;
                auto& dc = s.drops_by_class[cls_of.count(e.flow_id) ? cls_of[e.flow_id] : 0];
                dc.tail_pkts++;
                dc.tail_cells += e.length_cells;
                break;
            }
            case EventKind::HeadDrop:
            case EventKind::PushoutExpel: {
                if (e.kind == EventKind::HeadDrop) drop_sample(e.time.ns);
                account(e.queue_id, e.time.ns, -static_cast<int64_t>(e.length_cells));
                free_cells += e.length_cells;
                s.head_dropped_cells += e.length_cells;
                expelled_cells += e.length_cells;
                auto& dq = s.drops_by_queue[e.queue_id];
                dq.head_pkts++;
                dq.head_cells += e.length_cells;
                auto& dc = s.drops_by_class[cls_of.count(e.flow_id) ? cls_of[e.flow_id] : 0];
                dc.head_pkts++;
                dc.head_cells += e.length_cells;
                break;
            }
        }
    }
    s.residual_cells = cfg.capacity_cells - free_cells;

    uint64_t duration = cfg.run_duration.ns ? cfg.run_duration.ns : last_time;
    for (auto& [q, num] : occ_time_weighted_num) {
        uint64_t dt = duration - last_change[q];
        num += static_cast<uint64_t>(occ[q]) * dt;
        s.mean_queue_cells[q] = duration ? static_cast<double>(num) / duration : 0.0;
    }
    if (duration > 0)
        s.measured_expulsion_rate_cells_per_sec =
            static_cast<double>(expelled_cells) * 1e9 / static_cast<double>(duration);
    return s;
}

double slowdown(double actual, double ideal) {
    if (ideal <= 0) throw std::invalid_argument("slowdown: ideal must be > 0");
    return actual / ideal;
}

uint64_t percentile_nearest_rank(std::vector<uint64_t> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile of empty list");
    if (p <= 0 || p > 100) throw std::invalid_argument("percentile p out of (0,100]");
    std::sort(values.begin(), values.end());
    size_t rank = static_cast<size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
    return values[rank - 1];
}

bool class_suffered_drops(std::span<const EventRecord> events,
                          const std::vector<FlowRecord>& flow_table, uint8_t cls) {
    std::map<FlowId, uint8_t> cls_of;
    for (const FlowRecord& f : flow_table) cls_of[f.flow_id] = f.priority_class;
    for (const EventRecord& e : events) {
        if (e.kind != EventKind::TailDrop && e.kind != EventKind::HeadDrop &&
            e.kind != EventKind::PushoutExpel)
            continue;
        auto it = cls_of.find(e.flow_id);
        if (it != cls_of.end() && it->second == cls) return true;
    }
    return false;
}

uint64_t burst_absorption_capacity(const BurstProbe& drops_at, uint64_t hi_bytes,
                                   uint32_t mtu_bytes) {
    if (drops_at(mtu_bytes)) return 0;
    if (!drops_at(hi_bytes)) return hi_bytes;
    uint64_t lo = mtu_bytes;  // absorbs
    uint64_t hi = hi_bytes;   // drops
    while (hi - lo > mtu_bytes) {
        uint64_t mid = lo + (hi - lo) / 2;
        if (drops_at(mid))
            hi = mid;
        else
            lo = mid;
    }
    return lo;
}

void write_flow_csv(std::ostream& out, const RunSummary& s) {
    out << "flow_id,class,bytes,fct_ns\n";
    for (const FlowRecord& f : s.flows) {
        out << f.flow_id << ',' << static_cast<int>(f.priority_class) << ',' << f.bytes << ',';
        if (auto fct = f.fct_ns()) out << *fct;
        out << '\n';
    }
}

void write_query_csv(std::ostream& out, const RunSummary& s) {
    out << "query_id,qct_ns\n";
    for (const QueryRecord& q : s.queries) {
        out << q.query_id << ',';
        if (auto qct = q.qct_ns()) out << *qct;
        out << '\n';
    }
}

void write_summary_csv(std::ostream& out, const RunSummary& s) {
    out << "metric,value\n";
    out << "admitted_cells," << s.admitted_cells << '\n';
    out << "delivered_cells," << s.delivered_cells << '\n';
    out << "head_dropped_cells," << s.head_dropped_cells << '\n';
    out << "residual_cells," << s.residual_cells << '\n';
    uint64_t tail_pkts = 0, head_pkts = 0;
    for (const auto& [q, d] : s.drops_by_queue) {
        tail_pkts += d.tail_pkts;
        head_pkts += d.head_pkts;
    }
    out << "tail_dropped_pkts," << tail_pkts << '\n';
    out << "head_dropped_pkts," << head_pkts << '\n';
    out << "expulsion_rate_cells_per_sec," << s.measured_expulsion_rate_cells_per_sec << '\n';
    std::vector<uint64_t> fcts;
    for (const FlowRecord& f : s.flows)
        if (auto fct = f.fct_ns()) fcts.push_back(*fct);
    std::vector<uint64_t> qcts;
    for (const QueryRecord& q : s.queries)
        if (auto qct = q.qct_ns()) qcts.push_back(*qct);
    out << "finished_flows," << fcts.size() << '\n';
    out << "completed_queries," << qcts.size() << '\n';
    if (!fcts.empty()) {
        out << "fct_p50_ns," << percentile_nearest_rank(fcts, 50) << '\n';
        out << "fct_p99_ns," << percentile_nearest_rank(fcts, 99) << '\n';
    }
    if (!qcts.empty()) {
        out << "qct_p50_ns," << percentile_nearest_rank(qcts, 50) << '\n';
        out << "qct_p99_ns," << percentile_nearest_rank(qcts, 99) << '\n';
    }
}

void write_queue_trace(std::ostream& out, std::span<const EventRecord> events, size_t queue_count,
                       uint64_t interval_ns, SimTime run_duration) {
    std::vector<uint32_t> occ(queue_count, 0);
    uint64_t next_sample = 0;
    auto flush_until = [&](uint64_t t) {
        while (next_sample <= t) {
            for (size_t q = 0; q < queue_count; ++q)
                out << next_sample << '\t' << q << '\t' << occ[q] << '\n';
            next_sample += interval_ns;
        }
    };
    for (const EventRecord& e : events) {
        if (e.time.ns > 0) flush_until(e.time.ns - 1);
        switch (e.kind) {
            case EventKind::Admit: occ[e.queue_id] += e.length_cells; break;
            case EventKind::DequeueStart:
            case EventKind::HeadDrop:
            case EventKind::PushoutExpel: occ[e.queue_id] -= e.length_cells; break;
            default: break;
        }
    }
    if (run_duration.ns > 0) flush_until(run_duration.ns - 1);
}

}  // namespace tmsim
