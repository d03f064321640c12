#ifndef TMSIM_CORE_HPP
#define TMSIM_CORE_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tmsim {

using QueueId = uint32_t;
using PortId = uint32_t;
using FlowId = uint64_t;

/// Simulation clock in integer nanoseconds.
struct SimTime {
    uint64_t ns = 0;
    constexpr auto operator<=>(const SimTime&) const = default;
};

constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.ns + b.ns}; }

/// Exact positive rational, used for the DT control parameter so that
/// thresholds stay in integer arithmetic.
struct Alpha {
    uint32_t num = 1;
    uint32_t den = 1;
    constexpr bool operator==(const Alpha&) const = default;
};

/// Parses "8", "0.5", "3/4" into an exact rational. Throws on zero/negative.
Alpha parse_alpha(const std::string& text);
double alpha_value(Alpha a);

struct CellGeometry {
    uint32_t cell_size_bytes = 200;

    // ceil(len / cell_size); zero-length packets are invalid input.
    uint32_t cells_for(uint64_t length_bytes) const {
        if (length_bytes == 0)
            throw std::invalid_argument("cells_for: zero-length packet");
        return static_cast<uint32_t>((length_bytes + cell_size_bytes - 1) / cell_size_bytes);
    }
};

struct PacketDescriptor {
    FlowId flow_id = 0;
    uint32_t length_bytes = 0;
    uint32_t length_cells = 0;
    SimTime arrival_time;
    uint8_t priority_class = 0;
    uint64_t seq = 0;
};

struct QueueStats {
    uint64_t enqueued_pkts = 0;
    uint64_t dequeued_pkts = 0;
    uint64_t head_dropped_pkts = 0;
    uint64_t tail_dropped_pkts = 0;
    uint64_t enqueued_cells = 0;
    uint64_t dequeued_cells = 0;
    uint64_t head_dropped_cells = 0;
    uint64_t tail_dropped_cells = 0;
};

/// One FIFO of packet descriptors. Occupancy counters mirror the fifo
/// contents at all times; SharedBufferState is the only mutator.
struct QueueState {
    QueueId queue_id = 0;
    PortId port_id = 0;
    std::deque<PacketDescriptor> fifo;
    uint32_t occupancy_cells = 0;
    uint64_t occupancy_bytes = 0;
    Alpha alpha{1, 1};
    QueueStats stats;

    bool empty() const { return fifo.empty(); }
    const PacketDescriptor& head() const { return fifo.front(); }
};

enum class SchedKind { RoundRobin, DRR, StrictPriority };

struct PortSpec {
    PortId port_id = 0;
    uint64_t line_rate_bits_per_sec = 0;
    std::vector<QueueId> queue_ids;
    SchedKind scheduler_kind = SchedKind::RoundRobin;
};

/// Globally shared cell buffer plus all queue state. Queue ids are dense
/// (0..n-1) so occupancies live in a flat array the scan kernels read.
///
/// Invariant: free_cells + sum(occupancy_cells) == capacity_cells after
/// every mutation.
class SharedBufferState {
  public:
    SharedBufferState() = default;
    SharedBufferState(uint32_t capacity_cells, std::vector<QueueState> queues);

    uint32_t capacity_cells() const { return capacity_; }
    uint32_t free_cells() const { return free_; }
    size_t queue_count() const { return queues_.size(); }
    QueueState& queue(QueueId id) { return queues_.at(id); }
    const QueueState& queue(QueueId id) const { return queues_.at(id); }
    std::span<const uint32_t> occupancy_view() const { return occ_; }

    // Appends pd to the queue tail. free_cells < pd.length_cells is a hard
    // fault: admission must have reserved the space already.
    void enqueue(QueueId id, const PacketDescriptor& pd);

    // Removes the head for transmission, returning its cells to the free
    // pool. Empty queue -> nullopt (NoPacket).
    std::optional<PacketDescriptor> dequeue_head(QueueId id);

    // Same state change as dequeue_head but the packet is recorded as
    // head-dropped, never transmitted. Empty queue -> nullopt (NoVictim).
    std::optional<PacketDescriptor> expel_head(QueueId id);

    // Throws std::logic_error with a conservation report on violation.
    void assert_conservation() const;

    uint64_t total_enqueued_cells() const;
    uint64_t total_dequeued_cells() const;
    uint64_t total_head_dropped_cells() const;
    uint64_t total_resident_cells() const;

  private:
    std::optional<PacketDescriptor> pop_head(QueueId id, bool drop);

    uint32_t capacity_ = 0;
    uint32_t free_ = 0;
    std::vector<QueueState> queues_;
    std::vector<uint32_t> occ_;
};

}  // namespace tmsim

#endif
