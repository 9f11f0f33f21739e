#include "pma/block_pool.hpp"

#include <cstring>
#include <limits>
#include <new>

namespace pma {

namespace {

bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

constexpr std::size_t kMinBlock = 4096;
constexpr std::size_t kMaxBlock = std::size_t{1} << 30;

} // namespace

BlockPool::BlockPool(const PoolConfig& cfg) : cfg_(cfg) {
    if (!is_pow2(cfg.block_size) || cfg.block_size < kMinBlock ||
        cfg.block_size > kMaxBlock) {
        throw ConfigError("block_size must be a power of two in [4096, 2^30]");
    }
    if (cfg.capacity_blocks == 0) {
        throw ConfigError("capacity_blocks must be >= 1");
    }
    if (cfg.capacity_blocks > std::numeric_limits<std::uint32_t>::max() ||
        cfg.capacity_blocks > std::numeric_limits<std::size_t>::max() / cfg.block_size) {
        throw ConfigError("pool arena size overflows");
    }

    // One reservation for the pool lifetime; aligning the arena base to
    // block_size makes every block start block_size-aligned.
    const std::size_t bytes = cfg.block_size * cfg.capacity_blocks;
    arena_ = static_cast<std::byte*>(
        ::operator new(bytes, std::align_val_t{cfg.block_size}));

    generation_.assign(cfg.capacity_blocks, 0);
    free_.reserve(cfg.capacity_blocks);
    // Reverse order so the first acquire returns block 0.
    for (std::size_t i = cfg.capacity_blocks; i-- > 0;) {
        free_.push_back(static_cast<std::uint32_t>(i));
    }
}

BlockPool::~BlockPool() {
    ::operator delete(arena_, std::align_val_t{cfg_.block_size});
}

BlockHandle BlockPool::acquire() {
    std::uint32_t index;
    std::uint32_t gen;
    {
        std::lock_guard lock(mu_);
        if (free_.empty()) {
            throw OutOfBlocksError("pool exhausted");
        }
        index = free_.back();
        free_.pop_back();
        gen = ++generation_[index]; // becomes odd: live
        ++acquires_;
        const std::uint64_t live = acquires_ - releases_;
        if (live > peak_live_) peak_live_ = live;
    }
    if (cfg_.zero_on_acquire) {
        std::memset(arena_ + std::size_t{index} * cfg_.block_size, 0,
                    cfg_.block_size);
    }
    return BlockHandle{index, gen};
}

void BlockPool::release(BlockHandle h) {
    std::lock_guard lock(mu_);
    check_handle(h);
    ++generation_[h.index_]; // becomes even: free
    ++releases_;
    free_.push_back(h.index_);
}

std::span<std::byte> BlockPool::span(BlockHandle h) const {
    {
        std::lock_guard lock(mu_);
        check_handle(h);
    }
    return {arena_ + std::size_t{h.index_} * cfg_.block_size, cfg_.block_size};
}

PoolStats BlockPool::stats() const {
    std::lock_guard lock(mu_);
    return PoolStats{
        .blocks_total = cfg_.capacity_blocks,
        .blocks_live = acquires_ - releases_,
        .acquires = acquires_,
        .releases = releases_,
        .peak_live = peak_live_,
    };
}

void BlockPool::check_handle(BlockHandle h) const {
    if (h.index_ >= cfg_.capacity_blocks || (h.generation_ & 1u) == 0 ||
        generation_[h.index_] != h.generation_) {
        throw UsageError("handle is not live in this pool");
    }
}

} // namespace pma
