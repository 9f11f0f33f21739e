#ifndef PMA_TREE_ARRAY_HPP
#define PMA_TREE_ARRAY_HPP

#include <atomic>
#include <bit>
#include <cstdint>
#include <cstring>
#include <limits>
#include <optional>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "pma/block_pool.hpp"
#include "pma/errors.hpp"

namespace pma {

namespace detail {

// Statistical counter: data-race-free under concurrent readers (atomic
// load+store, no RMW), exact in single-threaded runs, and cheap enough not
// to distort access-path timings. Counts may be lost only when several
// threads hammer the same counter, which the workloads never do.
class RelaxedCounter {
public:
    void add(std::uint64_t d) {
        v_.store(v_.load(std::memory_order_relaxed) + d,
                 std::memory_order_relaxed);
    }
    std::uint64_t get() const { return v_.load(std::memory_order_relaxed); }
    void set(std::uint64_t v) { v_.store(v, std::memory_order_relaxed); }

private:
    std::atomic<std::uint64_t> v_{0};
};

} // namespace detail

// Shape of one tree: every node occupies exactly one pool block of
// node_size bytes. Interior nodes hold child pointers, leaves hold elements.
struct TreeGeometry {
    std::size_t node_size = 0;     // bytes per node (= pool block size)
    std::size_t element_size = 0;  // bytes per element
    std::size_t pointer_width = 8; // bytes per child pointer
    std::size_t fanout = 0;        // child pointers per interior node
    std::size_t leaf_capacity = 0; // whole elements per leaf

    static constexpr int kMaxDepth = 6;

    static TreeGeometry make(std::size_t node_size, std::size_t element_size) {
        static_assert(sizeof(void*) == 8, "64-bit pointers assumed");
        if (!std::has_single_bit(node_size) || node_size < 16 ||
            node_size > (std::size_t{1} << 30)) {
            throw ConfigError("node_size must be a power of two in [16, 2^30]");
        }
        if (element_size == 0 || element_size > node_size) {
            throw ConfigError("element_size must be in [1, node_size]");
        }
        TreeGeometry g;
        g.node_size = node_size;
        g.element_size = element_size;
        g.fanout = node_size / g.pointer_width;
        g.leaf_capacity = node_size / element_size; // no element straddles blocks
        return g;
    }

    // Elements addressable by a tree of the given depth:
    // leaf_capacity * fanout^(depth-1), saturating at uint64 max.
    std::uint64_t capacity(int depth) const {
        constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
        std::uint64_t cap = leaf_capacity;
        for (int i = 1; i < depth; ++i) {
            if (cap > kMax / fanout) return kMax;
            cap *= fanout;
        }
        return cap;
    }

    // Smallest depth whose capacity covers n elements.
    int depth_for(std::uint64_t n) const {
        if (n == 0) throw ConfigError("array length must be >= 1");
        for (int d = 1; d <= kMaxDepth; ++d) {
            if (capacity(d) >= n) return d;
        }
        throw TooLargeError("length exceeds the deepest supported tree");
    }

    // Blocks a tree of length n occupies: ceil(n / leaf_capacity) leaves,
    // then each interior level just wide enough for the level below.
    std::uint64_t blocks_for(std::uint64_t n) const {
        const int depth = depth_for(n);
        std::uint64_t width = (n + leaf_capacity - 1) / leaf_capacity;
        std::uint64_t total = width;
        for (int level = depth - 1; level > 0; --level) {
            width = (width + fanout - 1) / fanout;
            total += width;
        }
        return total;
    }
};

// Hop: one node dereference on a root-to-leaf walk (the walk that reaches
// the data counts the leaf itself, so a naive access costs exactly `depth`).
// Depth dispatches count the per-access branch on stored depth that the
// naive paths take; the create-time-bound paths never take it.
struct TreeCounters {
    std::uint64_t hops = 0;
    std::uint64_t depth_dispatches = 0;
};

// Fixed-length array of trivially copyable elements stored as a radix tree
// of pool blocks. Data lives only in leaves; interior nodes are arrays of
// child pointers. Index i splits into leaf number q = i / leaf_capacity and
// offset r = i % leaf_capacity; q's base-fanout digits, most significant
// first, pick the path from the root.
template <class T>
class TreeArray {
    static_assert(std::is_trivially_copyable_v<T>);

public:
    struct DataPage {
        std::uint64_t first_index = 0; // array index of data[0]
        std::size_t count = 0;         // live elements on this leaf
        T* data = nullptr;
    };

    TreeArray(BlockPool& pool, std::uint64_t n)
        : pool_(&pool),
          geometry_(TreeGeometry::make(pool.block_size(), sizeof(T))),
          n_(n),
          depth_(geometry_.depth_for(n)) {
        leaf_capacity_ = geometry_.leaf_capacity;
        fanout_shift_ = std::countr_zero(geometry_.fanout);
        fanout_mask_ = geometry_.fanout - 1;
        if (std::has_single_bit(leaf_capacity_)) {
            leaf_shift_ = std::countr_zero(leaf_capacity_);
            leaf_mask_ = leaf_capacity_ - 1;
        }
        leaf_fn_ = kLeafTable[depth_ - 1];
        handles_.reserve(geometry_.blocks_for(n));
        try {
            const std::uint64_t leaves =
                (n + leaf_capacity_ - 1) / leaf_capacity_;
            root_ = build_subtree(depth_, leaves);
        } catch (...) {
            release_blocks();
            throw;
        }
    }

    ~TreeArray() {
        if (!destroyed_) release_blocks();
    }

    TreeArray(const TreeArray&) = delete;
    TreeArray& operator=(const TreeArray&) = delete;

    TreeArray(TreeArray&& other) noexcept { steal(std::move(other)); }
    TreeArray& operator=(TreeArray&& other) noexcept {
        if (this != &other) {
            if (!destroyed_) release_blocks();
            steal(std::move(other));
        }
        return *this;
    }

    std::uint64_t size() const { return n_; }
    int depth() const { return depth_; }
    const TreeGeometry& geometry() const { return geometry_; }
    std::uint64_t blocks_used() const { return handles_.size(); }

    // Naive access: branches on the stored depth every call, then walks
    // root to leaf (depth hops).
    T get(std::uint64_t i) const {
        check_index(i);
        const auto [q, r] = split(i);
        hops_.add(depth_);
        T out;
        std::memcpy(&out, dispatch_leaf(q) + r * sizeof(T), sizeof(T));
        return out;
    }

    void set(std::uint64_t i, const T& v) {
        check_index(i);
        const auto [q, r] = split(i);
        hops_.add(depth_);
        std::memcpy(dispatch_leaf(q) + r * sizeof(T), &v, sizeof(T));
    }

    // Fused read-modify-write: one walk, still on the naive dispatch path.
    template <class F>
    void update(std::uint64_t i, F&& f) {
        check_index(i);
        const auto [q, r] = split(i);
        hops_.add(depth_);
        T* p = reinterpret_cast<T*>(dispatch_leaf(q) + r * sizeof(T));
        f(*p);
    }

    // Access through the walk routine bound when the tree was created: no
    // per-access depth branch. For depth-1 trees this is plain leaf
    // indexing, which is what makes them behave like contiguous arrays.
    T get_fixed_depth(std::uint64_t i) const {
        check_index(i);
        const auto [q, r] = split(i);
        hops_.add(depth_);
        T out;
        std::memcpy(&out, leaf_fn_(*this, q) + r * sizeof(T), sizeof(T));
        return out;
    }

    void set_fixed_depth(std::uint64_t i, const T& v) {
        check_index(i);
        const auto [q, r] = split(i);
        hops_.add(depth_);
        std::memcpy(leaf_fn_(*this, q) + r * sizeof(T), &v, sizeof(T));
    }

    // The page holding index i. Pages tile [0, n) in index order; the last
    // one may be short. Costs one full walk (depth hops).
    DataPage get_data_page(std::uint64_t i) {
        check_index(i);
        const auto [q, r] = split(i);
        hops_.add(depth_);
        std::byte* leaf = leaf_fn_(*this, q);
        const std::uint64_t first = i - r;
        const std::size_t count = static_cast<std::size_t>(
            std::min<std::uint64_t>(leaf_capacity_, n_ - first));
        return DataPage{first, count, reinterpret_cast<T*>(leaf)};
    }

    // Sequential cursor caching the current leaf's live span. Serving an
    // element inside the cached page costs zero hops; crossing into the
    // next page (or seeking outside the page) costs one full walk.
    class Iterator {
    public:
        explicit Iterator(TreeArray& tree) : tree_(&tree) {}

        // Next element in index order, or nullopt once past the end.
        std::optional<T> next() {
            if (next_ptr_ == nullptr || next_ptr_ > last_ptr_) {
                const std::uint64_t idx = last_idx_ + 1; // wraps to 0 on start
                if (idx >= tree_->size()) return std::nullopt;
                refill(idx);
            }
            return *next_ptr_++;
        }

        // Remaining cached span (loading the next page if the cache is
        // spent), advancing past it. Empty span means exhausted. Draining
        // with this visits exactly the same elements as next() while
        // keeping the inner loop contiguous.
        std::span<T> next_span() {
            if (next_ptr_ == nullptr || next_ptr_ > last_ptr_) {
                const std::uint64_t idx = last_idx_ + 1;
                if (idx >= tree_->size()) return {};
                refill(idx);
            }
            std::span<T> out{next_ptr_,
                             static_cast<std::size_t>(last_ptr_ - next_ptr_) + 1};
            next_ptr_ = last_ptr_ + 1;
            return out;
        }

        // Position the cursor so the next element served is i. Free when i
        // lies inside the cached page.
        void seek(std::uint64_t i) {
            if (i >= tree_->size()) throw BoundsError("seek past end");
            if (page_ != nullptr && i >= first_idx_ && i <= last_idx_) {
                next_ptr_ = page_ + (i - first_idx_);
                return;
            }
            refill(i);
        }

        // Reference to element i through the page cache.
        T& at(std::uint64_t i) {
            seek(i);
            return *next_ptr_;
        }

        std::uint64_t next_index() const {
            if (next_ptr_ == nullptr || next_ptr_ > last_ptr_) {
                return last_idx_ + 1;
            }
            return first_idx_ + static_cast<std::uint64_t>(next_ptr_ - page_);
        }

        bool exhausted() const { return next_index() >= tree_->size(); }

    private:
        void refill(std::uint64_t idx) {
            const DataPage dp = tree_->get_data_page(idx);
            page_ = dp.data;
            first_idx_ = dp.first_index;
            next_ptr_ = dp.data + (idx - dp.first_index);
            last_ptr_ = dp.data + dp.count - 1;
            last_idx_ = dp.first_index + dp.count - 1;
        }

        TreeArray* tree_;
        T* page_ = nullptr;     // cached leaf base
        T* next_ptr_ = nullptr; // next element to serve
        T* last_ptr_ = nullptr; // last element of cached page
        std::uint64_t first_idx_ = 0;
        std::uint64_t last_idx_ = std::uint64_t(-1);
    };

    Iterator iterate() { return Iterator{*this}; }

    // Returns every block to the pool. The object stays destroyed; a second
    // destroy (or one after a move) is a usage error.
    void destroy() {
        if (destroyed_) throw UsageError("tree already destroyed");
        release_blocks();
    }

    TreeCounters counters() const {
        return TreeCounters{hops_.get(), dispatch_.get()};
    }
    void reset_counters() {
        hops_.set(0);
        dispatch_.set(0);
    }

private:
    using LeafFn = std::byte* (*)(const TreeArray&, std::uint64_t);

    struct Split {
        std::uint64_t q; // leaf number
        std::uint64_t r; // offset within leaf
    };

    Split split(std::uint64_t i) const {
        if (leaf_shift_ >= 0) {
            return {i >> leaf_shift_, i & leaf_mask_};
        }
        return {i / leaf_capacity_, i % leaf_capacity_};
    }

    void check_index(std::uint64_t i) const {
        if (i >= n_) throw BoundsError("index out of range");
    }

    // Walk for a tree of compile-time depth D: D-1 pointer loads, leaf out.
    template <int D>
    static std::byte* leaf_walk(const TreeArray& t, std::uint64_t q) {
        std::byte* node = t.root_;
        if constexpr (D >= 2) {
            for (int level = D - 2; level >= 0; --level) {
                const std::uint64_t child =
                    (q >> (static_cast<unsigned>(level) * t.fanout_shift_)) &
                    t.fanout_mask_;
                node = reinterpret_cast<std::byte* const*>(node)[child];
            }
        }
        return node;
    }

    // The one runtime branch on stored depth that naive accesses pay.
    std::byte* dispatch_leaf(std::uint64_t q) const {
        dispatch_.add(1);
        switch (depth_) {
            case 1: return leaf_walk<1>(*this, q);
            case 2: return leaf_walk<2>(*this, q);
            case 3: return leaf_walk<3>(*this, q);
            case 4: return leaf_walk<4>(*this, q);
            case 5: return leaf_walk<5>(*this, q);
            case 6: return leaf_walk<6>(*this, q);
        }
        throw Error("corrupt tree depth");
    }

    static constexpr LeafFn kLeafTable[TreeGeometry::kMaxDepth] = {
        &leaf_walk<1>, &leaf_walk<2>, &leaf_walk<3>,
        &leaf_walk<4>, &leaf_walk<5>, &leaf_walk<6>,
    };

    std::byte* build_subtree(int levels, std::uint64_t leaves_needed) {
        const BlockHandle h = pool_->acquire();
        handles_.push_back(h);
        std::byte* node = pool_->span(h).data();
        const bool pre_zeroed = pool_->config().zero_on_acquire;
        if (levels == 1) {
            if (!pre_zeroed) std::memset(node, 0, geometry_.node_size);
            return node;
        }
        if (!pre_zeroed) std::memset(node, 0, geometry_.node_size);
        // Leaves a child subtree one level down can hold.
        std::uint64_t child_leaves = 1;
        for (int i = 0; i < levels - 2; ++i) child_leaves *= geometry_.fanout;
        auto* children = reinterpret_cast<std::byte**>(node);
        std::uint64_t remaining = leaves_needed;
        std::size_t slot = 0;
        while (remaining > 0) {
            const std::uint64_t take = std::min(child_leaves, remaining);
            children[slot++] = build_subtree(levels - 1, take);
            remaining -= take;
        }
        return node;
    }

    void release_blocks() {
        for (auto it = handles_.rbegin(); it != handles_.rend(); ++it) {
            pool_->release(*it);
        }
        handles_.clear();
        root_ = nullptr;
        destroyed_ = true;
    }

    void steal(TreeArray&& other) noexcept {
        pool_ = other.pool_;
        geometry_ = other.geometry_;
        n_ = other.n_;
        depth_ = other.depth_;
        leaf_capacity_ = other.leaf_capacity_;
        leaf_shift_ = other.leaf_shift_;
        leaf_mask_ = other.leaf_mask_;
        fanout_shift_ = other.fanout_shift_;
        fanout_mask_ = other.fanout_mask_;
        leaf_fn_ = other.leaf_fn_;
        root_ = other.root_;
        handles_ = std::move(other.handles_);
        destroyed_ = other.destroyed_;
        hops_.set(other.hops_.get());
        dispatch_.set(other.dispatch_.get());
        other.handles_.clear();
        other.root_ = nullptr;
        other.destroyed_ = true;
    }

    BlockPool* pool_ = nullptr;
    TreeGeometry geometry_;
    std::uint64_t n_ = 0;
    int depth_ = 0;
    std::uint64_t leaf_capacity_ = 0;
    int leaf_shift_ = -1; // -1: leaf_capacity is not a power of two
    std::uint64_t leaf_mask_ = 0;
    unsigned fanout_shift_ = 0;
    std::uint64_t fanout_mask_ = 0;
    LeafFn leaf_fn_ = nullptr;
    std::byte* root_ = nullptr;
    std::vector<BlockHandle> handles_; // acquisition order, root first
    bool destroyed_ = false;
    mutable detail::RelaxedCounter hops_;
    mutable detail::RelaxedCounter dispatch_;
};

} // namespace pma

#endif
