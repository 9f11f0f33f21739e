#ifndef PMA_BLOCK_POOL_HPP
#define PMA_BLOCK_POOL_HPP

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <span>
#include <vector>

#include "pma/errors.hpp"

namespace pma {

// Fixed-size block memory manager: one upfront arena reservation carved into
// uniformly sized, block-size-aligned blocks. This is the only allocation
// source for the discontiguous structures in this library; exhaustion is an
// error, never an auto-grow.
struct PoolConfig {
    std::size_t block_size = 32 * 1024; // power of two, 4 KiB .. 1 GiB
    std::size_t capacity_blocks = 1024;
    bool zero_on_acquire = false;
};

// Opaque ticket for one live block. The generation field catches double
// release and handles from a different pool.
class BlockHandle {
public:
    BlockHandle() = default;
    bool valid() const { return generation_ != 0; }
    std::uint32_t index() const { return index_; }

    friend bool operator==(const BlockHandle&, const BlockHandle&) = default;

private:
    friend class BlockPool;
    BlockHandle(std::uint32_t index, std::uint32_t generation)
        : index_(index), generation_(generation) {}

    std::uint32_t index_ = 0;
    std::uint32_t generation_ = 0; // odd while live, 0 for a default handle
};

struct PoolStats {
    std::uint64_t blocks_total = 0;
    std::uint64_t blocks_live = 0;
    std::uint64_t acquires = 0;
    std::uint64_t releases = 0;
    std::uint64_t peak_live = 0;
};

class BlockPool {
public:
    // Throws ConfigError unless block_size is a power of two in
    // [4096, 2^30] and capacity_blocks >= 1.
    explicit BlockPool(const PoolConfig& cfg);
    ~BlockPool();

    BlockPool(const BlockPool&) = delete;
    BlockPool& operator=(const BlockPool&) = delete;

    // Pops a free block (LIFO). Throws OutOfBlocksError when none is left.
    BlockHandle acquire();

    // Returns a block to the free list. Throws UsageError on double release
    // or a handle this pool never issued.
    void release(BlockHandle h);

    // Resolves a live handle to its span of exactly block_size bytes.
    // Throws UsageError for stale or foreign handles.
    std::span<std::byte> span(BlockHandle h) const;

    PoolStats stats() const;

    const PoolConfig& config() const { return cfg_; }
    std::size_t block_size() const { return cfg_.block_size; }

private:
    void check_handle(BlockHandle h) const; // callers hold mu_

    PoolConfig cfg_;
    std::byte* arena_ = nullptr;
    std::vector<std::uint32_t> free_;       // LIFO stack of free indices
    std::vector<std::uint32_t> generation_; // per block; odd = live
    std::uint64_t acquires_ = 0;
    std::uint64_t releases_ = 0;
    std::uint64_t peak_live_ = 0;
    mutable std::mutex mu_;
};

} // namespace pma

#endif
