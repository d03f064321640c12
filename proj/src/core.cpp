#include "tmsim/core.hpp"

#include <numeric>
#include <sstream>

namespace tmsim {

Alpha parse_alpha(const std::string& text) {
    auto fail = [&] { throw std::invalid_argument("alpha must be a positive rational: '" + text + "'"); };
    if (text.empty()) fail();
    uint64_t num = 0, den = 1;
    auto slash = text.find('/');
    auto dot = text.find('.');
    try {
        if (slash != std::string::npos) {
            num = std::stoull(text.substr(0, slash));
            den = std::stoull(text.substr(slash + 1));
        } else if (dot != std::string::npos) {
            std::string frac = text.substr(dot + 1);
            if (frac.empty() || frac.size() > 9) fail();
            num = std::stoull(text.substr(0, dot).empty() ? "0" : text.substr(0, dot));
            for (char c : frac) {
                if (c < '0' || c > '9') fail();
                num = num * 10 + static_cast<uint64_t>(c - '0');
                den *= 10;
            }
        } else {
            num = std::stoull(text);
        }
    } catch (const std::invalid_argument&) {
        fail();
    } catch (const std::out_of_range&) {
        fail();
    }
    if (num == 0 || den == 0) fail();
    uint64_t g = std::gcd(num, den);
    num /= g;
    den /= g;
    if (num > UINT32_MAX || den > UINT32_MAX) fail();
    return Alpha{static_cast<uint32_t>(num), static_cast<uint32_t>(den)};
}

double alpha_value(Alpha a) { return static_cast<double>(a.num) / static_cast<double>(a.den); }

SharedBufferState::SharedBufferState(uint32_t capacity_cells, std::vector<QueueState> queues)
    : capacity_(capacity_cells), free_(capacity_cells), queues_(std::move(queues)) {
    occ_.assign(queues_.size(), 0);
    for (size_t i = 0; i < queues_.size(); ++i) {
        if (queues_[i].queue_id != i)
            throw std::invalid_argument("queue ids must be dense 0..n-1");
        if (!queues_[i].fifo.empty())
            throw std::invalid_argument("queues must start empty");
    }
}

void SharedBufferState::enqueue(QueueId id, const PacketDescriptor& pd) {
    QueueState& q = queues_.at(id);
    if (pd.length_cells > free_) {
        std::ostringstream os;
        os << "enqueue over-commit on queue " << id << ": need " << pd.length_cells
           << " cells, free " << free_ << " (admission bug)";
        throw std::logic_error(os.str());
    }
    q.fifo.push_back(pd);
    q.occupancy_cells += pd.length_cells;
    q.occupancy_bytes += pd.length_bytes;
    q.stats.enqueued_pkts++;
    q.stats.enqueued_cells += pd.length_cells;
    occ_[id] = q.occupancy_cells;
    free_ -= pd.length_cells;
}

std::optional<PacketDescriptor> SharedBufferState::pop_head(QueueId id, bool drop) {
    QueueState& q = queues_.at(id);
    if (q.fifo.empty()) return std::nullopt;
    PacketDescriptor pd = q.fifo.front();
    q.fifo.pop_front();
    q.occupancy_cells -= pd.length_cells;
    q.occupancy_bytes -= pd.length_bytes;
    if (drop) {
        q.stats.head_dropped_pkts++;
        q.stats.head_dropped_cells += pd.length_cells;
    } else {
        q.stats.dequeued_pkts++;
        q.stats.dequeued_cells += pd.length_cells;
    }
    occ_[id] = q.occupancy_cells;
    free_ += pd.length_cells;
    return pd;
}

std::optional<PacketDescriptor> SharedBufferState::dequeue_head(QueueId id) {
    return pop_head(id, false);
}

std::optional<PacketDescriptor> SharedBufferState::expel_head(QueueId id) {
    return pop_head(id, true);
}

void SharedBufferState::assert_conservation() const {
    uint64_t resident = 0;
    for (const QueueState& q : queues_) {
        uint32_t cells = 0;
        uint64_t bytes = 0;
        for (const PacketDescriptor& pd : q.fifo) {
            cells += pd.length_cells;
            bytes += pd.length_bytes;
        }
        if (cells != q.occupancy_cells || bytes != q.occupancy_bytes || occ_[q.queue_id] != cells) {
            std::ostringstream os;
            os << "conservation report: queue " << q.queue_id << " occupancy mismatch (fifo "
               << cells << " cells / " << bytes << " bytes, counters " << q.occupancy_cells
               << " / " << q.occupancy_bytes << ")";
            throw std::logic_error(os.str());
        }
        resident += cells;
    }
    if (resident + free_ != capacity_) {
        std::ostringstream os;
        os << "conservation report: free " << free_ << " + resident " << resident
           << " != capacity " << capacity_;
        throw std::logic_error(os.str());
    }
}

uint64_t SharedBufferState::total_enqueued_cells() const {
    uint64_t n = 0;
    for (const QueueState& q : queues_) n += q.stats.enqueued_cells;
    return n;
}

uint64_t SharedBufferState::total_dequeued_cells() const {
    uint64_t n = 0;
    for (const QueueState& q : queues_) n += q.stats.dequeued_cells;
    return n;
}

uint64_t SharedBufferState::total_head_dropped_cells() const {
    uint64_t n = 0;
    for (const QueueState& q : queues_) n += q.stats.head_dropped_cells;
    return n;
}

uint64_t SharedBufferState::total_resident_cells() const {
    uint64_t n = 0;
    for (const QueueState& q : queues_) n += q.occupancy_cells;
    return n;
}

}  // namespace tmsim
