#include "tmsim/admission.hpp"

#include "tmsim/kernels.hpp"

namespace tmsim {

const char* policy_kind_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::StaticThreshold: return "StaticThreshold";
        case PolicyKind::DynamicThreshold: return "DynamicThreshold";
        case PolicyKind::Occamy: return "Occamy";
        case PolicyKind::Pushout: return "Pushout";
    }
    return "?";
}

std::optional<PolicyKind> policy_kind_from_name(const std::string& name) {
    if (name == "StaticThreshold") return PolicyKind::StaticThreshold;
    if (name == "DynamicThreshold" || name == "DT") return PolicyKind::DynamicThreshold;
    if (name == "Occamy") return PolicyKind::Occamy;
    if (name == "Pushout") return PolicyKind::Pushout;
    return std::nullopt;
}

std::optional<QueueId> longest_queue(const SharedBufferState& buf) {
    auto occ = buf.occupancy_view();
    if (occ.empty()) return std::nullopt;
    size_t idx = kernels::argmax_u32(occ);
    if (occ[idx] == 0) return std::nullopt;
    return static_cast<QueueId>(idx);
}

std::optional<QueueId> pushout_victim(const SharedBufferState& buf, QueueId arriving) {
    auto occ = buf.occupancy_view();
    if (occ.empty()) return std::nullopt;
    size_t idx = kernels::argmax_u32(occ);
    uint32_t max_occ = occ[idx];
    if (max_occ == 0) return std::nullopt;
    if (static_cast<QueueId>(idx) != arriving) return static_cast<QueueId>(idx);
    // arriving queue is the lowest-id longest; expel a tied other queue if
    // one exists, otherwise the arrival loses
    for (size_t i = idx + 1; i < occ.size(); ++i) {
        if (occ[i] == max_occ) return static_cast<QueueId>(i);
    }
    return std::nullopt;
}

AdmissionVerdict admit(const AdmissionPolicy& policy, const QueueState& q,
                       const PacketDescriptor& pd, const SharedBufferState& buf) {
    AdmissionVerdict v;
    const uint32_t need = pd.length_cells;
    switch (policy.kind) {
        case PolicyKind::StaticThreshold: {
            uint64_t limit = policy.static_limit_cells.value_or(buf.capacity_cells());
            v.threshold_at_decision = limit;
            bool fits = static_cast<uint64_t>(q.occupancy_cells) + need <= limit &&
                        buf.free_cells() >= need;
            v.decision = fits ? Decision::Accept : Decision::TailDrop;
            return v;
        }
        case PolicyKind::DynamicThreshold:
        case PolicyKind::Occamy: {
            // Occamy admission is DT; only the configured alpha differs.
            uint64_t t = dt_threshold(buf, q.alpha);
            v.threshold_at_decision = t;
            bool ok = q.occupancy_cells < t && buf.free_cells() >= need;
            v.decision = ok ? Decision::Accept : Decision::TailDrop;
            return v;
        }
        case PolicyKind::Pushout: {
            v.threshold_at_decision = buf.capacity_cells();
            if (buf.free_cells() >= need) {
                v.decision = Decision::Accept;
                return v;
            }
            std::optional<QueueId> victim = pushout_victim(buf, q.queue_id);
            if (!victim) {
                v.decision = Decision::TailDrop;
                return v;
            }
            v.decision = Decision::AcceptAfterPushout;
            v.pushout_victim = victim;
            return v;
        }
    }
    return v;
}

double reserved_free_buffer(double capacity_cells, double alpha, unsigned congested_queues) {
    if (congested_queues == 0)
        throw std::invalid_argument("reserved_free_buffer: N must be >= 1");
    return capacity_cells / (1.0 + alpha * static_cast<double>(congested_queues));
}

bool fairness_condition_holds(double arrival_rate, double expulsion_rate, unsigned bursty_queues,
                              unsigned over_allocated_queues, double alpha) {
    if (bursty_queues == 0) throw std::invalid_argument("fairness_condition_holds: M must be >= 1");
    if (expulsion_rate <= 0) throw std::invalid_argument("fairness_condition_holds: V must be > 0");
    double n = static_cast<double>(over_allocated_queues);
    double m = static_cast<double>(bursty_queues);
    return arrival_rate <= expulsion_rate * (1.0 + (1.0 + alpha * n) / (alpha * m));
}

double max_steady_queue_share(double alpha, unsigned congested_queues) {
    if (congested_queues == 0)
        throw std::invalid_argument("max_steady_queue_share: N must be >= 1");
    double an = alpha * static_cast<double>(congested_queues);
    return an / (1.0 + an);
}

}  // namespace tmsim
