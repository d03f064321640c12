#include "tmsim/expulsion.hpp"

#include <algorithm>

#include "tmsim/kernels.hpp"

namespace tmsim {

void refresh_bitmap(const SharedBufferState& buf, OverAllocationBitmap& bitmap,
                    std::vector<uint64_t>& scratch) {
    size_t n = buf.queue_count();
    if (bitmap.size() != n) bitmap = OverAllocationBitmap(n);
    scratch.resize(n);
    for (size_t i = 0; i < n; ++i) {
        scratch[i] = dt_threshold(buf, buf.queue(static_cast<QueueId>(i)).alpha);
    }
    kernels::over_threshold_bits(buf.occupancy_view(), scratch, bitmap.words());
}

std::optional<uint32_t> rr_next(const OverAllocationBitmap& bitmap, RoundRobinPointer& ptr) {
    size_t n = bitmap.size();
    if (n == 0 || !bitmap.any()) return std::nullopt;
    size_t start = ptr.last_granted ? (*ptr.last_granted + 1) % n : 0;
    for (size_t k = 0; k < n; ++k) {
        size_t i = (start + k) % n;
        if (bitmap.test(i)) {
            ptr.last_granted = static_cast<uint32_t>(i);
            return static_cast<uint32_t>(i);
        }
    }
    return std::nullopt;
}

TokenBucket::TokenBucket(uint64_t interval_num_ns, uint64_t interval_den, int64_t burst_cap)
    : interval_num_(interval_num_ns), interval_den_(interval_den), burst_cap_(burst_cap) {
    if (interval_num_ == 0 || interval_den_ == 0)
        throw std::invalid_argument("token interval must be positive");
}

SimTime TokenBucket::last_refill() const {
    return SimTime{static_cast<uint64_t>(last_refill_subns_ / interval_den_)};
}

void TokenBucket::refill(SimTime now) {
    unsigned __int128 now_subns = static_cast<unsigned __int128>(now.ns) * interval_den_;
    if (now_subns < last_refill_subns_) return;
    unsigned __int128 whole = (now_subns - last_refill_subns_) / interval_num_;
    last_refill_subns_ += whole * interval_num_;
    constexpr unsigned __int128 kAddCeiling = uint64_t{1} << 62;
    int64_t added = static_cast<int64_t>(whole > kAddCeiling ? kAddCeiling : whole);
    tokens_ = std::min(tokens_ + added, burst_cap_);
}

bool TokenBucket::withdraw(uint32_t cells, TokenSource source) {
    int64_t need = static_cast<int64_t>(cells);
    if (source == TokenSource::TX) {
        tokens_ -= need;  // may go negative; line rate is never blocked
        return true;
    }
    if (tokens_ >= need) {
        tokens_ -= need;
        return true;
    }
    return false;
}

ArbGrant arbitrate(const std::optional<ArbiterRequest>& sched_req,
                   const std::optional<ArbiterRequest>& drop_req, const TokenBucket& bucket,
                   uint32_t cells_needed) {
    if (sched_req) return ArbGrant::GrantScheduler;
    if (drop_req && bucket.tokens() >= static_cast<int64_t>(cells_needed))
        return ArbGrant::GrantHeadDrop;
    return ArbGrant::Idle;
}

}  // namespace tmsim
