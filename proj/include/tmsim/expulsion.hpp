#ifndef TMSIM_EXPULSION_HPP
#define TMSIM_EXPULSION_HPP

#include <optional>
#include <vector>

#include "tmsim/admission.hpp"
#include "tmsim/core.hpp"

namespace tmsim {

/// One bit per queue: set iff the queue held more than its DT threshold at
/// the last refresh.
class OverAllocationBitmap {
  public:
    OverAllocationBitmap() = default;
    explicit OverAllocationBitmap(size_t queue_count)
        : size_(queue_count), words_((queue_count + 63) / 64, 0) {}

    size_t size() const { return size_; }
    bool test(size_t i) const { return (words_[i / 64] >> (i % 64)) & 1; }
    void set(size_t i) { words_[i / 64] |= uint64_t{1} << (i % 64); }
    void reset(size_t i) { words_[i / 64] &= ~(uint64_t{1} << (i % 64)); }
    void clear() { std::fill(words_.begin(), words_.end(), 0); }
    bool any() const {
        for (uint64_t w : words_)
            if (w) return true;
        return false;
    }
    std::vector<uint64_t>& words() { return words_; }
    const std::vector<uint64_t>& words() const { return words_; }

  private:
    size_t size_ = 0;
    std::vector<uint64_t> words_;
};

/// Recomputes every bit from live state: bit i = occupancy_i > T(alpha_i).
/// `scratch` holds the per-queue thresholds between calls to avoid
/// reallocation; it is resized as needed.
void refresh_bitmap(const SharedBufferState& buf, OverAllocationBitmap& bitmap,
                    std::vector<uint64_t>& scratch);

struct RoundRobinPointer {
    std::optional<uint32_t> last_granted;
};

/// First set bit strictly after last_granted in cyclic order; advances the
/// pointer on a grant. Empty bitmap -> nullopt.
std::optional<uint32_t> rr_next(const OverAllocationBitmap& bitmap, RoundRobinPointer& ptr);

enum class TokenSource { TX, Expulsion };

/// Redundant-memory-bandwidth accounting in cell units. Tokens accrue at
/// the aggregate dequeue rate (one per cell-slot). TX withdrawals always
/// succeed and may drive the level negative; expulsion withdrawals are
/// gated on a sufficient balance.
class TokenBucket {
  public:
    TokenBucket() = default;
    // One token every interval_num_ns / interval_den nanoseconds.
    TokenBucket(uint64_t interval_num_ns, uint64_t interval_den, int64_t burst_cap);

    int64_t tokens() const { return tokens_; }
    int64_t burst_cap() const { return burst_cap_; }
    SimTime last_refill() const;

    // tokens += whole intervals elapsed since last_refill, clamped at
    // burst_cap; the fractional remainder carries forward.
    void refill(SimTime now);

    // TX: always succeeds. Expulsion: succeeds iff tokens >= cells.
    bool withdraw(uint32_t cells, TokenSource source);

  private:
    int64_t tokens_ = 0;
    uint64_t interval_num_ = 20;
    uint64_t interval_den_ = 1;
    int64_t burst_cap_ = 1;
    // refill progress in sub-ns units (ns * interval_den)
    unsigned __int128 last_refill_subns_ = 0;
};

enum class ArbSource { OutputScheduler, HeadDropSelector };

struct ArbiterRequest {
    ArbSource source = ArbSource::OutputScheduler;
    QueueId queue_id = 0;
};

enum class ArbGrant { GrantScheduler, GrantHeadDrop, Idle };

/// Fixed-priority arbiter: the scheduler always wins; head-drop requests
/// additionally need the token bucket to cover the victim's cells.
ArbGrant arbitrate(const std::optional<ArbiterRequest>& sched_req,
                   const std::optional<ArbiterRequest>& drop_req, const TokenBucket& bucket,
                   uint32_t cells_needed);

/// Removes the head of queue `id` as an expelled packet. Same buffer state
/// change as a dequeue, but no cell-data read happens and the packet is
/// counted as head-dropped. Empty queue -> nullopt (stale victim).
inline std::optional<PacketDescriptor> head_drop(SharedBufferState& buf, QueueId id) {
    return buf.expel_head(id);
}

}  // namespace tmsim

#endif
