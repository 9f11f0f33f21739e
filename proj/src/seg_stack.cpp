#include "pma/seg_stack.hpp"

#include <algorithm>
#include <cstring>

#include "pma/errors.hpp"

namespace pma {

SegStack::SegStack(BlockPool& pool) : pool_(&pool) {}

SegStack::~SegStack() {
    // Frames do not own resources; just hand the chain back.
    while (blocks_ > 0) {
        BlockHeader hdr;
        read_header(hdr);
        pool_->release(current_);
        current_ = hdr.prev;
        current_data_ = current_.valid() ? pool_->span(current_).data() : nullptr;
        --blocks_;
    }
}

std::span<std::byte> SegStack::push_frame(std::size_t frame_size,
                                          std::size_t spilled_args_size) {
    const std::size_t block_size = pool_->block_size();
    if (frame_size == 0 || spilled_args_size > frame_size) {
        throw ConfigError("frame_size must be > 0 and >= spilled_args_size");
    }
    if (frame_size > block_size - kBlockHeaderBytes) {
        throw FrameSizeError("frame does not fit within one block");
    }

    if (!current_.valid()) {
        // First frame: start the chain. Not an overflow, nothing to spill.
        const BlockHandle h = pool_->acquire();
        current_ = h;
        current_data_ = pool_->span(h).data();
        ++blocks_;
        BlockHeader hdr{BlockHandle{}, kBlockHeaderBytes};
        std::memcpy(current_data_, &hdr, sizeof(hdr));
        cursor_ = kBlockHeaderBytes;
    } else if (cursor_ + frame_size > block_size) {
        const BlockHandle h = pool_->acquire(); // may throw; stack unchanged
        std::byte* data = pool_->span(h).data();
        BlockHeader hdr{current_, cursor_};
        std::memcpy(data, &hdr, sizeof(hdr));
        const std::size_t copy =
            std::min(spilled_args_size, cursor_ - kBlockHeaderBytes);
        std::memcpy(data + kBlockHeaderBytes, current_data_ + cursor_ - copy,
                    copy);
        current_ = h;
        current_data_ = data;
        cursor_ = kBlockHeaderBytes;
        ++blocks_;
        ++overflows_;
        bytes_copied_ += copy;
        frames_.push_back({frame_size, true});
        ++pushes_;
        cursor_ += frame_size;
        return {current_data_ + kBlockHeaderBytes, frame_size};
    }

    frames_.push_back({frame_size, frames_.empty()});
    ++pushes_;
    std::byte* frame = current_data_ + cursor_;
    cursor_ += frame_size;
    return {frame, frames_.back().size};
}

void SegStack::pop_frame() {
    if (frames_.empty()) throw UsageError("pop on empty stack");
    const FrameRecord rec = frames_.back();
    frames_.pop_back();
    if (rec.opened_block && blocks_ > 1) {
        // Frame that chained this block in: unwind to the previous block.
        BlockHeader hdr;
        read_header(hdr);
        pool_->release(current_);
        current_ = hdr.prev;
        current_data_ = pool_->span(current_).data();
        cursor_ = hdr.saved_cursor;
        --blocks_;
    } else {
        cursor_ -= rec.size;
    }
    if (frames_.empty() && current_.valid()) {
        pool_->release(current_);
        current_ = BlockHandle{};
        current_data_ = nullptr;
        cursor_ = kBlockHeaderBytes;
        --blocks_;
    }
}

std::span<std::byte> SegStack::top() {
    if (frames_.empty()) throw UsageError("empty stack has no top frame");
    const std::size_t size = frames_.back().size;
    return {current_data_ + cursor_ - size, size};
}

SegStackStats SegStack::stats() const {
    return SegStackStats{pushes_, overflows_, bytes_copied_, frames_.size(),
                         blocks_};
}

void SegStack::read_header(BlockHeader& out) const {
    std::memcpy(&out, current_data_, sizeof(out));
}

namespace {

std::uint64_t fib_rec(SegStack& stack, unsigned k, std::size_t frame_size,
                      std::size_t spill) {
    auto frame = stack.push_frame(frame_size, spill);
    // Keep the argument in frame memory past the spill region, the way a
    // compiled function keeps a spilled local.
    std::byte* arg_slot = frame.data() + spill;
    std::uint64_t arg = k;
    std::memcpy(arg_slot, &arg, sizeof(arg));

    std::uint64_t result;
    if (k < 2) {
        result = k;
    } else {
        const std::uint64_t a = fib_rec(stack, k - 1, frame_size, spill);
        std::memcpy(&arg, arg_slot, sizeof(arg)); // reload k from the frame
        const std::uint64_t b =
            fib_rec(stack, static_cast<unsigned>(arg) - 2, frame_size, spill);
        result = a + b;
    }
    stack.pop_frame();
    return result;
}

} // namespace

FibResult fib_bench(BlockPool& pool, unsigned depth, std::size_t frame_size,
                    std::size_t spilled_args_size) {
    if (frame_size < spilled_args_size + sizeof(std::uint64_t)) {
        throw ConfigError("frame too small for the argument slot");
    }
    SegStack stack(pool);
    FibResult r;
    r.value = fib_rec(stack, depth, frame_size, spilled_args_size);
    const SegStackStats st = stack.stats();
    r.pushes = st.pushes;
    r.overflows = st.overflows;
    return r;
}

} // namespace pma
