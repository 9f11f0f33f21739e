#ifndef PMA_SEG_STACK_HPP
#define PMA_SEG_STACK_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pma/block_pool.hpp"

namespace pma {

// Call-stack model built from chained pool blocks: every frame lives
// entirely inside one block, a push checks the current block's remaining
// space, and on overflow a fresh block is acquired and the declared
// spilled-argument bytes are copied across the boundary. One instance per
// thread of execution; frames pop in LIFO order.
struct SegStackStats {
    std::uint64_t pushes = 0;
    std::uint64_t overflows = 0;     // pushes that had to start a new block
    std::uint64_t bytes_copied = 0;  // spilled-argument bytes moved on overflow
    std::uint64_t frames = 0;        // currently live
    std::uint64_t blocks = 0;        // currently chained
};

class SegStack {
public:
    // First 16 bytes of every chained block: link to the previous block and
    // the cursor to restore when this block is popped away.
    static constexpr std::size_t kBlockHeaderBytes = 16;

    explicit SegStack(BlockPool& pool);
    ~SegStack();

    SegStack(const SegStack&) = delete;
    SegStack& operator=(const SegStack&) = delete;

    // Reserves frame_size bytes for a new top frame and returns its span.
    // Fast path: bump the cursor. Overflow path: chain a new block and copy
    // min(spilled_args_size, bytes above the old block's header) into the
    // new frame's start. Throws FrameSizeError when the frame cannot fit an
    // empty block, OutOfBlocksError when the pool is dry (stack unchanged).
    std::span<std::byte> push_frame(std::size_t frame_size,
                                    std::size_t spilled_args_size);

    // Removes the top frame; releases the block it started if it was chained
    // in by an overflow (or the last block once the stack empties). Throws
    // UsageError on an empty stack.
    void pop_frame();

    // Current top frame.
    std::span<std::byte> top();

    bool empty() const { return frames_.empty(); }
    SegStackStats stats() const;

private:
    struct FrameRecord {
        std::size_t size;
        bool opened_block; // this frame is the first in its block
    };

    struct BlockHeader {
        BlockHandle prev;
        std::uint64_t saved_cursor;
    };
    static_assert(sizeof(BlockHeader) == kBlockHeaderBytes);

    void read_header(BlockHeader& out) const;

    BlockPool* pool_;
    BlockHandle current_{};          // invalid while the stack is empty
    std::byte* current_data_ = nullptr;
    std::size_t cursor_ = kBlockHeaderBytes; // first free byte in current block
    std::uint64_t blocks_ = 0;
    std::vector<FrameRecord> frames_;
    std::uint64_t pushes_ = 0;
    std::uint64_t overflows_ = 0;
    std::uint64_t bytes_copied_ = 0;
};

// Recursive Fibonacci where every call pushes a SegStack frame and keeps its
// argument in frame memory across the recursive calls. A worst case for the
// per-call space check; the counters expose how often the check actually
// chains a block.
struct FibResult {
    std::uint64_t value = 0;
    std::uint64_t pushes = 0;
    std::uint64_t overflows = 0;
};

FibResult fib_bench(BlockPool& pool, unsigned depth,
                    std::size_t frame_size = 64,
                    std::size_t spilled_args_size = 16);

} // namespace pma

#endif
