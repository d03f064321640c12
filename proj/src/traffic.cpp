#include "tmsim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace tmsim {

namespace {
constexpr uint64_t kUnitsPerByte = 8ull * 1'000'000'000ull;  // rate_bps * dt_ns units
constexpr uint64_t kLongLivedBytes = uint64_t{1} << 56;      // effectively endless
}  // namespace

Cdf Cdf::parse(std::istream& in, const std::string& origin) {
    Cdf cdf;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        uint64_t bytes = 0;
        double prob = -1;
        if (!(ls >> bytes >> prob))
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": malformed CDF line");
        if (!cdf.points.empty()) {
            if (bytes <= cdf.points.back().first || prob <= cdf.points.back().second)
                throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                         ": CDF columns must be strictly increasing");
        }
        if (prob <= 0.0 || prob > 1.0)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": cumulative probability out of (0,1]");
        cdf.points.emplace_back(bytes, prob);
    }
    if (cdf.points.empty()) throw std::runtime_error(origin + ": empty CDF");
    if (cdf.points.back().second != 1.0)
        throw std::runtime_error(origin + ": CDF must end at probability 1.0");
    return cdf;
}

Cdf Cdf::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CDF file: " + path);
    return parse(in, path);
}

uint64_t Cdf::sample(double u) const {
    for (const auto& [bytes, prob] : points) {
        if (u <= prob) return bytes;
    }
    return points.back().first;
}

double Cdf::mean_bytes() const {
    double mean = 0, prev = 0;
    for (const auto& [bytes, prob] : points) {
        mean += static_cast<double>(bytes) * (prob - prev);
        prev = prob;
    }
    return mean;
}

size_t Traffic::Staging::lane_of(FlowId flow) {
    for (size_t i = 0; i < lane_flows.size(); ++i)
        if (lane_flows[i] == flow) return i;
    lane_flows.push_back(flow);
    lanes.emplace_back();
    return lanes.size() - 1;
}

bool Traffic::Staging::empty() const {
    for (const auto& l : lanes)
        if (!l.empty()) return false;
    return true;
}

Traffic::Traffic(const WorkloadSpec& spec, const TrafficParams& params)
    : params_(params), specs_(spec.generators), rng_(params.seed) {
    staging_.resize(specs_.size());
    gen_flows_.resize(specs_.size());
    for (size_t i = 0; i < specs_.size(); ++i) {
        std::visit(
            [&](const auto& g) {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, PoissonFlowsSpec>) {
                    staging_[i].rate_bps = g.ingress_rate_bps;
                    poisson_.push_back({i, sample_exponential(g.flows_per_sec) * 1e9});
                } else if constexpr (std::is_same_v<T, IncastQuerySpec>) {
                    staging_[i].rate_bps = g.ingress_rate_bps;
                    incast_.push_back({i, static_cast<double>(g.first_query.ns), false});
                } else if constexpr (std::is_same_v<T, LongLivedSpec>) {
                    staging_[i].rate_bps = g.ingress_rate_bps;
                    for (uint32_t k = 0; k < g.flow_count; ++k) {
                        QueueId q = g.dst_queues.empty() ? 0 : g.dst_queues[k % g.dst_queues.size()];
                        FlowId id = new_flow(q, kLongLivedBytes, g.priority_class, SimTime{0},
                                             std::nullopt, false);
                        gen_flows_[i].push_back(id);
                    }
                } else if constexpr (std::is_same_v<T, RawBurstSpec>) {
                    staging_[i].rate_bps = g.rate_bps;
                    FlowId id = new_flow(g.target_queue, g.burst_size_bytes, g.priority_class,
                                         g.start_time, std::nullopt, true);
                    raw_.push_back({i, id, g.burst_size_bytes, 0, false});
                }
            },
            specs_[i]);
    }
}

double Traffic::uniform01() {
    // 53-bit uniform in [0,1)
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

double Traffic::sample_exponential(double rate_per_sec) {
    if (rate_per_sec <= 0) return std::numeric_limits<double>::infinity();
    double u = uniform01();
    return -std::log1p(-u) / rate_per_sec;
}

FlowId Traffic::new_flow(QueueId queue, uint64_t bytes, uint8_t cls, SimTime now,
                         std::optional<uint64_t> query_index, bool raw) {
    FlowState f;
    f.flow_id = static_cast<FlowId>(flows_.size());
    f.queue = queue;
    f.priority_class = cls;
    f.raw = raw;
    f.total_bytes = bytes;
    f.packet_count = bytes == 0 ? 0 : (bytes + params_.mtu_bytes - 1) / params_.mtu_bytes;
    f.start_time = now;
    f.rto_deadline = SimTime{now.ns + params_.rto.ns};
    f.query_index = query_index;
    flows_.push_back(std::move(f));
    return flows_.back().flow_id;
}

uint32_t Traffic::packet_bytes(const FlowState& f, uint64_t seq) const {
    if (seq + 1 < f.packet_count) return params_.mtu_bytes;
    uint64_t rem = f.total_bytes - (f.packet_count - 1) * params_.mtu_bytes;
    return static_cast<uint32_t>(rem);
}

PacketDescriptor Traffic::make_pd(const FlowState& f, uint64_t seq, SimTime now) const {
    PacketDescriptor pd;
    pd.flow_id = f.flow_id;
    pd.length_bytes = packet_bytes(f, seq);
    pd.length_cells = params_.geometry.cells_for(pd.length_bytes);
    pd.arrival_time = now;
    pd.priority_class = f.priority_class;
    pd.seq = seq;
    return pd;
}

void Traffic::emit_packet(size_t gen_index, FlowState& f, uint64_t seq, SimTime now,
                          std::vector<InjectedPacket>& out) {
    InjectedPacket pkt{f.queue, make_pd(f, seq, now)};
    Staging& st = staging_[gen_index];
    if (st.rate_bps == 0) {
        out.push_back(pkt);
    } else {
        st.lanes[st.lane_of(f.flow_id)].push_back(pkt);
    }
}

void Traffic::pump_flow_windows(size_t gen_index, std::vector<FlowId>& flow_list, SimTime now,
                                std::vector<InjectedPacket>& out) {
    for (FlowId id : flow_list) {
        FlowState& f = flows_[id];
        if (f.finish_time || f.packet_count == 0) continue;
        if (now < f.start_time) continue;
        // RTO on the oldest outstanding: rewind to base (go-back-N)
        if (f.base < f.high_water && now >= f.rto_deadline) {
            f.next_seq = f.base;
            f.rto_deadline = SimTime{now.ns + params_.rto.ns};
        }
        while (f.next_seq < f.packet_count && f.next_seq < f.base + params_.window_packets) {
            emit_packet(gen_index, f, f.next_seq, now, out);
            if (f.next_seq == f.base && f.base == f.high_water)
                f.rto_deadline = SimTime{now.ns + params_.rto.ns};
            ++f.next_seq;
            f.high_water = std::max(f.high_water, f.next_seq);
        }
    }
}

void Traffic::on_slot(SimTime now, uint64_t slot_dt_ns, std::vector<InjectedPacket>& out) {
    // release rate-capped staging first (oldest packets)
    for (Staging& st : staging_) {
        if (st.rate_bps == 0 || st.empty()) continue;
        st.credit_units += st.rate_bps * slot_dt_ns;
        for (;;) {
            // round-robin across lanes so parallel senders interleave
            size_t n = st.lanes.size();
            size_t pick = n;
            for (size_t k = 0; k < n; ++k) {
                size_t i = (st.rr_cursor + k) % n;
                if (!st.lanes[i].empty()) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) break;
            uint64_t cost = st.lanes[pick].front().pd.length_bytes * kUnitsPerByte;
            if (st.credit_units < cost) break;
            st.credit_units -= cost;
            InjectedPacket pkt = st.lanes[pick].front();
            st.lanes[pick].pop_front();
            pkt.pd.arrival_time = now;
            out.push_back(pkt);
            st.rr_cursor = (pick + 1) % st.lanes.size();
        }
        if (st.empty()) st.credit_units = 0;  // no credit hoarding while idle
    }

    // raw bursts
    for (RawRt& r : raw_) {
        const auto& g = std::get<RawBurstSpec>(specs_[r.spec_index]);
        if (now < g.start_time || r.remaining_bytes == 0) continue;
        Staging& st = staging_[r.spec_index];
        if (st.rate_bps == 0) {
            // whole burst materializes in the start slot
            while (r.remaining_bytes > 0) {
                uint32_t bytes = static_cast<uint32_t>(
                    std::min<uint64_t>(g.packet_size_bytes, r.remaining_bytes));
                PacketDescriptor pd;
                pd.flow_id = r.flow_id;
                pd.length_bytes = bytes;
                pd.length_cells = params_.geometry.cells_for(bytes);
                pd.arrival_time = now;
                pd.priority_class = g.priority_class;
                pd.seq = r.seq++;
                out.push_back({g.target_queue, pd});
                r.remaining_bytes -= bytes;
            }
        } else {
            if (!r.started) {
                st.credit_units = 0;
                r.started = true;
            }
            st.credit_units += st.rate_bps * slot_dt_ns;
            while (r.remaining_bytes > 0) {
                uint32_t bytes = static_cast<uint32_t>(
                    std::min<uint64_t>(g.packet_size_bytes, r.remaining_bytes));
                uint64_t cost = static_cast<uint64_t>(bytes) * kUnitsPerByte;
                if (st.credit_units < cost) break;
                st.credit_units -= cost;
                PacketDescriptor pd;
                pd.flow_id = r.flow_id;
                pd.length_bytes = bytes;
                pd.length_cells = params_.geometry.cells_for(bytes);
                pd.arrival_time = now;
                pd.priority_class = g.priority_class;
                pd.seq = r.seq++;
                out.push_back({g.target_queue, pd});
                r.remaining_bytes -= bytes;
            }
        }
    }

    // poisson flow spawning
    for (PoissonRt& p : poisson_) {
        const auto& g = std::get<PoissonFlowsSpec>(specs_[p.spec_index]);
        double slot_end = static_cast<double>(now.ns + slot_dt_ns);
        while (p.next_arrival_ns < slot_end) {
            uint64_t bytes = g.sizes.sample(uniform01());
            QueueId q = g.dst_queues.empty()
                            ? 0
                            : g.dst_queues[static_cast<size_t>(rng_() % g.dst_queues.size())];
            FlowId id = new_flow(q, bytes, g.priority_class, now, std::nullopt, false);
            gen_flows_[p.spec_index].push_back(id);
            p.next_arrival_ns += sample_exponential(g.flows_per_sec) * 1e9;
        }
    }

    // incast query issue: fan_in flows of query/fan_in bytes each, all to
    // one queue, started simultaneously
    for (IncastRt& q : incast_) {
        const auto& g = std::get<IncastQuerySpec>(specs_[q.spec_index]);
        auto issue = [&](SimTime when) {
            QueryState query;
            query.query_id = static_cast<uint64_t>(queries_.size());
            query.issue_time = when;
            uint64_t per_flow = g.query_size_bytes / g.fan_in;
            uint64_t rem = g.query_size_bytes % g.fan_in;
            for (uint32_t k = 0; k < g.fan_in; ++k) {
                uint64_t bytes = per_flow + (k == 0 ? rem : 0);
                FlowId id = new_flow(g.target_queue, bytes, g.priority_class, when,
                                     query.query_id, false);
                query.flow_ids.push_back(id);
                gen_flows_[q.spec_index].push_back(id);
            }
            queries_.push_back(std::move(query));
        };
        double slot_end = static_cast<double>(now.ns + slot_dt_ns);
        if (g.queries_per_sec <= 0) {
            if (!q.single_done && g.first_query.ns <= now.ns) {
                issue(now);
                q.single_done = true;
            }
        } else {
            while (q.next_query_ns < slot_end) {
                issue(now);
                q.next_query_ns += sample_exponential(g.queries_per_sec) * 1e9;
            }
        }
    }

    // transport windows (new flows included this same slot)
    for (size_t i = 0; i < specs_.size(); ++i) {
        if (gen_flows_[i].empty()) continue;
        pump_flow_windows(i, gen_flows_[i], now, out);
    }
}

void Traffic::on_delivery(FlowId flow, uint64_t seq, SimTime now) {
    if (flow >= flows_.size()) return;
    FlowState& f = flows_[flow];
    if (f.raw || f.finish_time) return;
    if (seq < f.base) return;  // duplicate
    auto& ahead = f.delivered_ahead;
    if (std::find(ahead.begin(), ahead.end(), seq) == ahead.end()) ahead.push_back(seq);
    bool advanced = false;
    for (;;) {
        auto it = std::find(ahead.begin(), ahead.end(), f.base);
        if (it == ahead.end()) break;
        ahead.erase(it);
        f.acked_bytes += packet_bytes(f, f.base);
        ++f.base;
        advanced = true;
    }
    if (advanced) {
        f.next_seq = std::max(f.next_seq, f.base);
        f.rto_deadline = SimTime{now.ns + params_.rto.ns};
    }
    if (f.acked_bytes >= f.total_bytes) {
        f.finish_time = now;
        if (f.query_index) {
            QueryState& q = queries_[*f.query_index];
            bool all = true;
            SimTime slowest{0};
            for (FlowId id : q.flow_ids) {
                if (!flows_[id].finish_time) {
                    all = false;
                    break;
                }
                slowest = std::max(slowest, *flows_[id].finish_time);
            }
            if (all && !q.completion_time) q.completion_time = slowest;  // max member FCT
        }
    }
}

void Traffic::on_drop(FlowId flow, uint64_t seq, SimTime now) {
    if (flow >= flows_.size()) return;
    FlowState& f = flows_[flow];
    if (f.raw || f.finish_time) return;
    // observed loss re-arms the retransmission timer from the drop instant
    if (seq >= f.base) f.rto_deadline = SimTime{now.ns + params_.rto.ns};
}

}  // namespace tmsim
