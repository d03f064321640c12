#include "tmsim/engine.hpp"

#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tmsim/kernels.hpp"

namespace tmsim {

namespace {
constexpr uint64_t kUnitsPerByte = 8ull * 1'000'000'000ull;
}

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Arrival: return "Arrival";
        case EventKind::Admit: return "Admit";
        case EventKind::TailDrop: return "TailDrop";
        case EventKind::HeadDrop: return "HeadDrop";
        case EventKind::DequeueStart: return "DequeueStart";
        case EventKind::DequeueComplete: return "DequeueComplete";
        case EventKind::PushoutExpel: return "PushoutExpel";
    }
    return "?";
}

std::optional<EventKind> event_kind_from_name(const std::string& name) {
    static const std::pair<const char*, EventKind> table[] = {
        {"Arrival", EventKind::Arrival},
        {"Admit", EventKind::Admit},
        {"TailDrop", EventKind::TailDrop},
        {"HeadDrop", EventKind::HeadDrop},
        {"DequeueStart", EventKind::DequeueStart},
        {"DequeueComplete", EventKind::DequeueComplete},
        {"PushoutExpel", EventKind::PushoutExpel},
    };
    for (const auto& [n, k] : table)
        if (name == n) return k;
    return std::nullopt;
}

void write_trace(std::ostream& out, std::span<const EventRecord> events) {
    for (const EventRecord& e : events) {
        out << e.time.ns << '\t' << event_kind_name(e.kind) << '\t' << e.queue_id << '\t'
            << e.flow_id << '\t' << e.length_cells << '\n';
    }
}

std::vector<EventRecord> read_trace(std::istream& in) {
    std::vector<EventRecord> events;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        EventRecord e;
        std::string kind;
        if (!(ls >> e.time.ns >> kind >> e.queue_id >> e.flow_id >> e.length_cells))
            throw std::runtime_error("trace line " + std::to_string(lineno) + ": malformed");
        auto k = event_kind_from_name(kind);
        if (!k) throw std::runtime_error("trace line " + std::to_string(lineno) +
                                         ": unknown event kind '" + kind + "'");
        e.kind = *k;
        events.push_back(e);
    }
    return events;
}

SlotLength slot_length(const EngineConfig& cfg) {
    uint64_t aggregate = cfg.aggregate_bps;
    if (aggregate == 0) {
        for (const PortSpec& p : cfg.ports) aggregate += p.line_rate_bits_per_sec;
    }
    if (aggregate == 0) throw std::invalid_argument("aggregate capacity is zero");
    uint64_t num = static_cast<uint64_t>(cfg.geometry.cell_size_bytes) * 8ull * 1'000'000'000ull;
    uint64_t den = aggregate;
    uint64_t g = std::gcd(num, den);
    return SlotLength{num / g, den / g};
}

Engine::Engine(EngineConfig cfg) : cfg_(std::move(cfg)) {
    validate();
    slot_ = slot_length(cfg_);

    std::vector<QueueState> queues(cfg_.queues.size());
    for (const QueueCfg& qc : cfg_.queues) {
        QueueState& q = queues.at(qc.queue_id);
        q.queue_id = qc.queue_id;
        q.port_id = qc.port_id;
        q.alpha = qc.alpha;
    }
    buf_ = SharedBufferState(cfg_.capacity_cells, std::move(queues));

    for (const PortSpec& p : cfg_.ports) {
        std::vector<uint32_t> ranks;
        for (QueueId id : p.queue_ids) ranks.push_back(cfg_.queues[id].priority_rank);
        PortRuntime rt;
        rt.spec = p;
        rt.sched = SchedulerState::make(p, cfg_.drr_quantum_bytes, std::move(ranks));
        ports_.push_back(std::move(rt));
    }

    uint32_t mtu_cells = cfg_.geometry.cells_for(cfg_.mtu_bytes);
    int64_t cap = cfg_.expulsion.burst_cap_tokens.value_or(
        static_cast<int64_t>(std::max<uint64_t>(cfg_.ports.size(), mtu_cells)));
    bucket_ = TokenBucket(slot_.num_ns, slot_.den, cap);
    bitmap_ = OverAllocationBitmap(cfg_.queues.size());
}

void Engine::validate() {
    auto bad = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
    if (cfg_.geometry.cell_size_bytes == 0) bad("cell_size_bytes must be > 0");
    if (cfg_.mtu_bytes == 0) bad("mtu_bytes must be > 0");
    if (cfg_.ports.empty()) bad("at least one port required");
    if (cfg_.queues.empty()) bad("at least one queue required");
    if (cfg_.capacity_cells < cfg_.geometry.cells_for(cfg_.mtu_bytes))
        bad("capacity_cells must hold at least one MTU packet");
    if (cfg_.expulsion.attempts_per_slot == 0) bad("expulsion.attempts_per_slot must be >= 1");
    if (cfg_.transport.window_packets == 0) bad("transport.window_packets must be >= 1");

    std::vector<int> owner(cfg_.queues.size(), -1);
    for (size_t i = 0; i < cfg_.queues.size(); ++i) {
        if (cfg_.queues[i].queue_id != i) bad("queue ids must be dense 0..n-1");
        if (cfg_.queues[i].alpha.num == 0 || cfg_.queues[i].alpha.den == 0)
            bad("alpha must be positive");
    }
    for (size_t pi = 0; pi < cfg_.ports.size(); ++pi) {
        const PortSpec& p = cfg_.ports[pi];
        if (p.port_id != pi) bad("port ids must be dense 0..n-1");
        if (p.line_rate_bits_per_sec == 0)
            bad("port " + std::to_string(p.port_id) + ": line rate must be > 0");
        if (p.queue_ids.empty()) bad("port " + std::to_string(p.port_id) + ": no queues");
        for (QueueId q : p.queue_ids) {
            if (q >= cfg_.queues.size()) bad("port references unknown queue " + std::to_string(q));
            if (owner[q] != -1) bad("queue " + std::to_string(q) + " mapped to two ports");
            if (cfg_.queues[q].port_id != p.port_id)
                bad("queue " + std::to_string(q) + " port_id mismatch");
            owner[q] = static_cast<int>(pi);
        }
    }
    for (size_t q = 0; q < owner.size(); ++q)
        if (owner[q] == -1) bad("queue " + std::to_string(q) + " not mapped to any port");
    if (cfg_.policy.kind == PolicyKind::StaticThreshold && !cfg_.policy.static_limit_cells)
        bad("StaticThreshold requires static_limit_cells");
}

void Engine::emit(SimTime t, EventKind k, QueueId q, FlowId f, uint32_t cells) {
    events_.push_back(EventRecord{t, k, q, f, cells});
}

void Engine::process_arrivals(SimTime now) {
    for (const InjectedPacket& pkt : arrivals_scratch_) {
        const PacketDescriptor& pd = pkt.pd;
        if (pd.length_bytes == 0 || pd.length_bytes > cfg_.mtu_bytes)
            throw std::invalid_argument("arriving packet of " + std::to_string(pd.length_bytes) +
                                        " bytes violates [1, MTU]");
        QueueState& q = buf_.queue(pkt.queue);
        emit(now, EventKind::Arrival, pkt.queue, pd.flow_id, pd.length_cells);
        AdmissionVerdict v = admit(cfg_.policy, q, pd, buf_);
        switch (v.decision) {
            case Decision::Accept:
                buf_.enqueue(pkt.queue, pd);
                emit(now, EventKind::Admit, pkt.queue, pd.flow_id, pd.length_cells);
                break;
            case Decision::TailDrop:
                q.stats.tail_dropped_pkts++;
                q.stats.tail_dropped_cells += pd.length_cells;
                emit(now, EventKind::TailDrop, pkt.queue, pd.flow_id, pd.length_cells);
                traffic_->on_drop(pd.flow_id, pd.seq, now);
                break;
            case Decision::AcceptAfterPushout: {
                // expel whole packets from the (re-evaluated) longest queue
                // until the arrival fits; a unique longest arriving queue
                // aborts to a tail drop
                bool admitted = false;
                while (buf_.free_cells() < pd.length_cells) {
                    std::optional<QueueId> victim = pushout_victim(buf_, pkt.queue);
                    if (!victim) break;
                    std::optional<PacketDescriptor> expelled = buf_.expel_head(*victim);
                    if (!expelled) break;
                    emit(now, EventKind::PushoutExpel, *victim, expelled->flow_id,
                         expelled->length_cells);
                    traffic_->on_drop(expelled->flow_id, expelled->seq, now);
                }
                if (buf_.free_cells() >= pd.length_cells) {
                    buf_.enqueue(pkt.queue, pd);
                    emit(now, EventKind::Admit, pkt.queue, pd.flow_id, pd.length_cells);
                    admitted = true;
                }
                if (!admitted) {
                    q.stats.tail_dropped_pkts++;
                    q.stats.tail_dropped_cells += pd.length_cells;
                    emit(now, EventKind::TailDrop, pkt.queue, pd.flow_id, pd.length_cells);
                    traffic_->on_drop(pd.flow_id, pd.seq, now);
                }
                break;
            }
        }
    }
}

void Engine::serve_ports(SimTime now, uint64_t dt_ns) {
    for (PortRuntime& p : ports_) {
        p.credit_units += p.spec.line_rate_bits_per_sec * dt_ns;
        while (p.credit_units > 0) {
            if (p.inflight_units == 0) {
                std::optional<QueueId> pick = pick_next(p.spec, p.sched, buf_);
                if (!pick) {
                    p.credit_units = 0;  // idle ports do not hoard line credit
                    break;
                }
                std::optional<PacketDescriptor> pd = buf_.dequeue_head(*pick);
                if (!pd) throw std::logic_error("scheduler picked an empty queue");
                if (buf_.queue(*pick).empty()) {
                    for (size_t pos = 0; pos < p.spec.queue_ids.size(); ++pos)
                        if (p.spec.queue_ids[pos] == *pick)
                            p.sched.on_queue_emptied(static_cast<uint32_t>(pos));
                }
                emit(now, EventKind::DequeueStart, *pick, pd->flow_id, pd->length_cells);
                bucket_.withdraw(pd->length_cells, TokenSource::TX);
                sched_req_ = ArbiterRequest{ArbSource::OutputScheduler, *pick};
                p.inflight_units = static_cast<uint64_t>(pd->length_bytes) * kUnitsPerByte;
                p.inflight_flow = pd->flow_id;
                p.inflight_queue = *pick;
                p.inflight_cells = pd->length_cells;
                p.inflight_seq = pd->seq;
            }
            uint64_t take = std::min(p.inflight_units, p.credit_units);
            p.inflight_units -= take;
            p.credit_units -= take;
            if (p.inflight_units == 0) {
                emit(now, EventKind::DequeueComplete, p.inflight_queue, p.inflight_flow,
                     p.inflight_cells);
                traffic_->on_delivery(p.inflight_flow, p.inflight_seq, now);
            }
        }
    }
}

void Engine::run_expulsion(SimTime now) {
    for (uint32_t attempt = 0; attempt < cfg_.expulsion.attempts_per_slot; ++attempt) {
        if (attempt > 0) refresh_bitmap(buf_, bitmap_, threshold_scratch_);
        // the head-drop selector only runs in slots the scheduler left free
        if (sched_req_) break;
        std::optional<uint32_t> victim = rr_next(bitmap_, rr_ptr_);
        if (!victim) break;
        const QueueState& vq = buf_.queue(*victim);
        if (vq.empty()) break;  // stale selection; re-select next slot
        uint32_t cells = vq.head().length_cells;
        ArbiterRequest dreq{ArbSource::HeadDropSelector, *victim};
        ArbGrant grant = arbitrate(sched_req_, dreq, bucket_, cells);
        if (grant != ArbGrant::GrantHeadDrop) break;
        bucket_.withdraw(cells, TokenSource::Expulsion);
        std::optional<PacketDescriptor> pd = buf_.expel_head(*victim);
        if (!pd) throw std::logic_error("head drop on empty queue");
        emit(now, EventKind::HeadDrop, *victim, pd->flow_id, pd->length_cells);
        traffic_->on_drop(pd->flow_id, pd->seq, now);
    }
}

std::vector<EventRecord> Engine::run(const WorkloadSpec& workload) {
    if (ran_) throw std::logic_error("Engine::run called twice");
    ran_ = true;

    TrafficParams tp;
    tp.mtu_bytes = cfg_.mtu_bytes;
    tp.geometry = cfg_.geometry;
    tp.window_packets = cfg_.transport.window_packets;
    tp.rto = cfg_.transport.rto;
    tp.seed = cfg_.random_seed;
    traffic_ = std::make_unique<Traffic>(workload, tp);

    for (uint64_t slot = 0;; ++slot) {
        uint64_t t_ns = slot_.time_of_slot(slot);
        if (t_ns >= cfg_.sim_duration.ns) break;
        SimTime now{t_ns};
        uint64_t dt_ns = slot_.time_of_slot(slot + 1) - t_ns;
        sched_req_.reset();

        bucket_.refill(now);

        arrivals_scratch_.clear();
        traffic_->on_slot(now, dt_ns, arrivals_scratch_);
        process_arrivals(now);

        serve_ports(now, dt_ns);

        refresh_bitmap(buf_, bitmap_, threshold_scratch_);
        if (cfg_.expulsion.enabled) run_expulsion(now);

        if (cfg_.check_conservation_each_slot) {
            uint64_t resident = kernels::sum_u32(buf_.occupancy_view());
            if (resident + buf_.free_cells() != buf_.capacity_cells()) {
                std::ostringstream os;
                os << "conservation report at slot " << slot << " (t=" << t_ns << "ns): resident "
                   << resident << " + free " << buf_.free_cells() << " != capacity "
                   << buf_.capacity_cells();
                throw std::logic_error(os.str());
            }
        }
    }

    buf_.assert_conservation();
    uint64_t enq = buf_.total_enqueued_cells();
    uint64_t out = buf_.total_dequeued_cells() + buf_.total_head_dropped_cells() +
                   buf_.total_resident_cells();
    if (enq != out) {
        std::ostringstream os;
        os << "conservation report: enqueued " << enq << " != dequeued+dropped+resident " << out;
        throw std::logic_error(os.str());
    }
    return std::move(events_);
}

}  // namespace tmsim
