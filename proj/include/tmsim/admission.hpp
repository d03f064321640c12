#ifndef TMSIM_ADMISSION_HPP
#define TMSIM_ADMISSION_HPP

#include <optional>

#include "tmsim/core.hpp"

namespace tmsim {

enum class PolicyKind { StaticThreshold, DynamicThreshold, Occamy, Pushout };

const char* policy_kind_name(PolicyKind k);
std::optional<PolicyKind> policy_kind_from_name(const std::string& name);

/// Buffer-management policy. Per-queue alpha lives on QueueState (resolved
/// by the config validator); this carries the kind and the static limit.
struct AdmissionPolicy {
    PolicyKind kind = PolicyKind::DynamicThreshold;
    std::optional<uint32_t> static_limit_cells;  // StaticThreshold only
};

enum class Decision { Accept, TailDrop, AcceptAfterPushout };

struct AdmissionVerdict {
    Decision decision = Decision::TailDrop;
    // the occupancy cap applied at decision time (DT/Occamy: T(t);
    // StaticThreshold: the static limit; Pushout: capacity, i.e. uncapped)
    uint64_t threshold_at_decision = 0;
    std::optional<QueueId> pushout_victim;
};

/// T = floor(alpha * free_cells). Pure function of current state.
inline uint64_t dt_threshold(const SharedBufferState& buf, Alpha alpha) {
    return static_cast<uint64_t>(alpha.num) * buf.free_cells() / alpha.den;
}

/// Accept/reject verdict for one arriving packet. Pure: same policy, queue,
/// buffer, and packet length always yield the same verdict.
AdmissionVerdict admit(const AdmissionPolicy& policy, const QueueState& q,
                       const PacketDescriptor& pd, const SharedBufferState& buf);

/// Queue with maximum occupancy via full scan; ties break to the lowest
/// queue id; nullopt when every queue is empty.
std::optional<QueueId> longest_queue(const SharedBufferState& buf);

/// Pushout victim for a packet arriving at `arriving`: the longest queue.
/// A queue never expels itself — if the arriving queue is the unique
/// longest this returns nullopt and the arrival is tail-dropped.
std::optional<QueueId> pushout_victim(const SharedBufferState& buf, QueueId arriving);

// Steady-state reserved free buffer: B / (1 + alpha*N). N = number of
// congested queues sitting at the threshold; N = 0 is an error.
double reserved_free_buffer(double capacity_cells, double alpha, unsigned congested_queues);

// Fair-allocation condition relating burst arrival rate R, expulsion rate V,
// burst fan-out M and over-allocated queue count N:
//   R <= V * (1 + (1 + alpha*N) / (alpha*M))
bool fairness_condition_holds(double arrival_rate, double expulsion_rate, unsigned bursty_queues,
                              unsigned over_allocated_queues, double alpha);

// Fraction of the buffer N threshold-bound queues hold in steady state:
// alpha*N / (1 + alpha*N).
double max_steady_queue_share(double alpha, unsigned congested_queues);

}  // namespace tmsim

#endif
