#include "pma/workloads.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <vector>

#include "pma/block_pool.hpp"
#include "pma/prng.hpp"
#include "pma/rbtree.hpp"
#include "pma/seg_stack.hpp"
#include "pma/tree_array.hpp"

namespace pma {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shared by the flat scan and the page-wise iterator scan so both run the
// same inner loop.
template <class T>
std::uint64_t sum_range(const T* p, std::size_t count) {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < count; ++i) s += p[i];
    return s;
}

template <class T>
void fill_tree(TreeArray<T>& tree, SplitMix64& gen) {
    auto it = tree.iterate();
    for (auto span = it.next_span(); !span.empty(); span = it.next_span()) {
        for (T& v : span) v = static_cast<T>(gen.next());
    }
}

template <class T>
PoolConfig pool_config_for_tree(const PoolOptions& opt, std::uint64_t n) {
    const auto geo = TreeGeometry::make(opt.block_size, sizeof(T));
    const std::uint64_t need = geo.blocks_for(n);
    return PoolConfig{opt.block_size,
                      opt.capacity_blocks ? opt.capacity_blocks : need,
                      opt.zero_on_acquire};
}

std::uint64_t fold_key(std::uint64_t h, std::uint64_t key) {
    return mix64(h ^ key);
}

template <class T>
WorkloadResult linear_impl(const WorkloadSpec& spec, Variant variant,
                           const PoolOptions& popt) {
    const std::uint64_t n = spec.data_bytes / sizeof(T);
    if (n == 0) throw ConfigError("data_bytes must cover at least one element");
    WorkloadResult res;
    res.accesses = n;

    if (variant == Variant::flat) {
        const auto t0 = Clock::now();
        std::vector<T> flat(n);
        SplitMix64 gen(spec.seed);
        for (T& v : flat) v = static_cast<T>(gen.next());
        res.construct_seconds = since(t0);
        res.allocations = 1;

        const auto t1 = Clock::now();
        res.checksum = sum_range(flat.data(), flat.size());
        res.seconds = since(t1);
        return res;
    }

    const auto t0 = Clock::now();
    BlockPool pool(pool_config_for_tree<T>(popt, n));
    TreeArray<T> tree(pool, n);
    SplitMix64 gen(spec.seed);
    fill_tree(tree, gen);
    tree.reset_counters();
    res.construct_seconds = since(t0);

    const auto t1 = Clock::now();
    std::uint64_t sum = 0;
    if (variant == Variant::tree_naive) {
        for (std::uint64_t i = 0; i < n; ++i) sum += tree.get(i);
    } else {
        auto it = tree.iterate();
        for (auto span = it.next_span(); !span.empty(); span = it.next_span()) {
            sum += sum_range(span.data(), span.size());
        }
    }
    res.seconds = since(t1);
    res.checksum = sum;
    res.hops = tree.counters().hops;
    res.allocations = pool.stats().acquires;
    return res;
}

template <class T>
WorkloadResult strided_impl(const WorkloadSpec& spec, Variant variant,
                            const PoolOptions& popt) {
    const std::uint64_t n = spec.data_bytes / sizeof(T);
    const std::uint64_t stride = spec.stride_elements;
    if (n == 0) throw ConfigError("data_bytes must cover at least one element");
    if (stride == 0 || spec.passes == 0) {
        throw ConfigError("stride and passes must be >= 1");
    }
    const std::uint64_t per_pass = (n + stride - 1) / stride;
    WorkloadResult res;
    res.accesses = per_pass * spec.passes;

    if (variant == Variant::flat) {
        const auto t0 = Clock::now();
        std::vector<T> flat(n);
        SplitMix64 gen(spec.seed);
        for (T& v : flat) v = static_cast<T>(gen.next());
        res.construct_seconds = since(t0);
        res.allocations = 1;

        const auto t1 = Clock::now();
        std::uint64_t sum = 0;
        for (std::uint32_t pass = 0; pass < spec.passes; ++pass) {
            for (std::uint64_t i = 0; i < n; i += stride) sum += flat[i];
        }
        res.seconds = since(t1);
        res.checksum = sum;
        return res;
    }

    const auto t0 = Clock::now();
    BlockPool pool(pool_config_for_tree<T>(popt, n));
    TreeArray<T> tree(pool, n);
    SplitMix64 gen(spec.seed);
    fill_tree(tree, gen);
    tree.reset_counters();
    res.construct_seconds = since(t0);

    const auto t1 = Clock::now();
    std::uint64_t sum = 0;
    if (variant == Variant::tree_naive) {
        for (std::uint32_t pass = 0; pass < spec.passes; ++pass) {
            for (std::uint64_t i = 0; i < n; i += stride) sum += tree.get(i);
        }
    } else {
        auto it = tree.iterate();
        for (std::uint32_t pass = 0; pass < spec.passes; ++pass) {
            for (std::uint64_t i = 0; i < n; i += stride) {
                it.seek(i);
                sum += *it.next();
            }
        }
    }
    res.seconds = since(t1);
    res.checksum = sum;
    res.hops = tree.counters().hops;
    res.allocations = pool.stats().acquires;
    return res;
}

WorkloadResult gups_impl(const WorkloadSpec& spec, Variant variant,
                         const PoolOptions& popt) {
    const std::uint64_t want = spec.data_bytes / sizeof(std::uint64_t);
    if (want == 0) throw ConfigError("data_bytes must cover at least one element");
    // GUPS indexes with a mask, so the table length is the largest power of
    // two that fits the requested bytes.
    const std::uint64_t n = std::bit_floor(want);
    const std::uint64_t mask = n - 1;
    const std::uint64_t updates = spec.updates ? spec.updates : 4 * n;
    WorkloadResult res;
    res.accesses = updates;

    if (variant == Variant::flat) {
        const auto t0 = Clock::now();
        std::vector<std::uint64_t> table(n);
        SplitMix64 fill(spec.seed);
        for (auto& v : table) v = fill.next();
        res.construct_seconds = since(t0);
        res.allocations = 1;

        const auto t1 = Clock::now();
        SplitMix64 upd(spec.seed + kGupsUpdateSalt);
        for (std::uint64_t u = 0; u < updates; ++u) {
            const std::uint64_t r = upd.next();
            table[r & mask] ^= r;
        }
        res.seconds = since(t1);

        std::uint64_t x = 0;
        for (auto v : table) x ^= v;
        res.checksum = x;
        return res;
    }

    const auto t0 = Clock::now();
    BlockPool pool(pool_config_for_tree<std::uint64_t>(popt, n));
    TreeArray<std::uint64_t> tree(pool, n);
    SplitMix64 fill(spec.seed);
    fill_tree(tree, fill);
    tree.reset_counters();
    res.construct_seconds = since(t0);

    const auto t1 = Clock::now();
    SplitMix64 upd(spec.seed + kGupsUpdateSalt);
    if (variant == Variant::tree_naive) {
        for (std::uint64_t u = 0; u < updates; ++u) {
            const std::uint64_t r = upd.next();
            tree.update(r & mask, [r](std::uint64_t& v) { v ^= r; });
        }
    } else {
        auto it = tree.iterate();
        for (std::uint64_t u = 0; u < updates; ++u) {
            const std::uint64_t r = upd.next();
            it.at(r & mask) ^= r;
        }
    }
    res.seconds = since(t1);
    res.hops = tree.counters().hops; // body only; the checksum fold below re-walks

    std::uint64_t x = 0;
    auto it = tree.iterate();
    for (auto span = it.next_span(); !span.empty(); span = it.next_span()) {
        for (auto v : span) x ^= v;
    }
    res.checksum = x;
    res.allocations = pool.stats().acquires;
    return res;
}

template <class Alloc>
std::uint64_t rb_insert_and_hash(Alloc& alloc, std::uint64_t n,
                                 std::uint64_t seed) {
    RbTree<Alloc> tree(alloc);
    SplitMix64 keys(seed);
    for (std::uint64_t i = 0; i < n; ++i) tree.insert(keys.next());
    std::uint64_t h = 0;
    tree.for_each_in_order([&](std::uint64_t k) { h = fold_key(h, k); });
    return h;
}

WorkloadResult rbtree_impl(const WorkloadSpec& spec, Variant variant,
                           const PoolOptions& popt) {
    const std::uint64_t n = spec.data_bytes / rb_node_bytes();
    if (n == 0) throw ConfigError("data_bytes must cover at least one node");
    WorkloadResult res;
    res.accesses = 2 * n; // n inserts, n in-order visits

    if (variant == Variant::flat) {
        const auto t0 = Clock::now();
        HeapNodeAllocator alloc;
        res.construct_seconds = since(t0);

        const auto t1 = Clock::now();
        res.checksum = rb_insert_and_hash(alloc, n, spec.seed);
        res.seconds = since(t1);
        res.allocations = alloc.allocation_count();
        return res;
    }

    const auto t0 = Clock::now();
    const std::uint64_t nodes_per_block = popt.block_size / rb_node_bytes();
    const std::uint64_t blocks_needed =
        (n + nodes_per_block - 1) / nodes_per_block;
    BlockPool pool(PoolConfig{
        popt.block_size,
        popt.capacity_blocks ? popt.capacity_blocks : blocks_needed,
        popt.zero_on_acquire});
    PoolNodeAllocator alloc(pool);
    res.construct_seconds = since(t0);

    const auto t1 = Clock::now();
    res.checksum = rb_insert_and_hash(alloc, n, spec.seed);
    res.seconds = since(t1);
    res.allocations = pool.stats().acquires;
    return res;
}

std::uint64_t native_fib(unsigned k, std::uint64_t& calls) {
    ++calls;
    if (k < 2) return k;
    return native_fib(k - 1, calls) + native_fib(k - 2, calls);
}

WorkloadResult fib_impl(const WorkloadSpec& spec, Variant variant,
                        const PoolOptions& popt) {
    const unsigned depth =
        spec.fib_depth ? spec.fib_depth : fib_depth_for_bytes(spec.data_bytes);
    WorkloadResult res;

    if (variant == Variant::flat) {
        const auto t1 = Clock::now();
        std::uint64_t calls = 0;
        res.checksum = native_fib(depth, calls);
        res.seconds = since(t1);
        res.accesses = calls;
        return res;
    }

    constexpr std::size_t kFrame = 64;
    constexpr std::size_t kSpill = 16;
    const auto t0 = Clock::now();
    const std::uint64_t frames_per_block =
        (popt.block_size - SegStack::kBlockHeaderBytes) / kFrame;
    const std::uint64_t blocks_needed = (depth + 1) / frames_per_block + 2;
    BlockPool pool(PoolConfig{
        popt.block_size,
        popt.capacity_blocks ? popt.capacity_blocks : blocks_needed,
        popt.zero_on_acquire});
    res.construct_seconds = since(t0);

    const auto t1 = Clock::now();
    const FibResult fr = fib_bench(pool, depth, kFrame, kSpill);
    res.seconds = since(t1);
    res.checksum = fr.value;
    res.accesses = fr.pushes;
    res.allocations = pool.stats().acquires;
    return res;
}

} // namespace

const char* to_string(WorkloadKind k) {
    switch (k) {
        case WorkloadKind::linear_scan: return "linear_scan";
        case WorkloadKind::strided_scan: return "strided_scan";
        case WorkloadKind::gups: return "gups";
        case WorkloadKind::rbtree: return "rbtree";
        case WorkloadKind::fib: return "fib";
    }
    throw Error("unknown workload kind");
}

const char* to_string(Variant v) {
    switch (v) {
        case Variant::flat: return "flat";
        case Variant::tree_naive: return "tree_naive";
        case Variant::tree_iter: return "tree_iter";
    }
    throw Error("unknown variant");
}

WorkloadKind parse_workload(const std::string& name) {
    if (name == "linear_scan") return WorkloadKind::linear_scan;
    if (name == "strided_scan") return WorkloadKind::strided_scan;
    if (name == "gups") return WorkloadKind::gups;
    if (name == "rbtree") return WorkloadKind::rbtree;
    if (name == "fib") return WorkloadKind::fib;
    throw ConfigError("unknown workload: " + name);
}

Variant parse_variant(const std::string& name) {
    if (name == "flat") return Variant::flat;
    if (name == "tree_naive") return Variant::tree_naive;
    if (name == "tree_iter") return Variant::tree_iter;
    throw ConfigError("unknown variant: " + name);
}

unsigned fib_depth_for_bytes(std::uint64_t data_bytes) {
    const unsigned log2 =
        data_bytes == 0 ? 0 : static_cast<unsigned>(std::bit_width(data_bytes) - 1);
    return std::clamp(log2 + 8u, 16u, 32u);
}

WorkloadResult run_linear_scan(const WorkloadSpec& spec, Variant v,
                               const PoolOptions& p) {
    switch (spec.element_size) {
        case 4: return linear_impl<std::uint32_t>(spec, v, p);
        case 8: return linear_impl<std::uint64_t>(spec, v, p);
        default: throw ConfigError("scan element_size must be 4 or 8");
    }
}

WorkloadResult run_strided_scan(const WorkloadSpec& spec, Variant v,
                                const PoolOptions& p) {
    switch (spec.element_size) {
        case 4: return strided_impl<std::uint32_t>(spec, v, p);
        case 8: return strided_impl<std::uint64_t>(spec, v, p);
        default: throw ConfigError("scan element_size must be 4 or 8");
    }
}

WorkloadResult run_gups(const WorkloadSpec& spec, Variant v,
                        const PoolOptions& p) {
    return gups_impl(spec, v, p);
}

WorkloadResult run_rbtree(const WorkloadSpec& spec, Variant v,
                          const PoolOptions& p) {
    return rbtree_impl(spec, v, p);
}

WorkloadResult run_fib(const WorkloadSpec& spec, Variant v,
                       const PoolOptions& p) {
    return fib_impl(spec, v, p);
}

WorkloadResult run_workload(const WorkloadSpec& spec, Variant v,
                            const PoolOptions& p) {
    switch (spec.kind) {
        case WorkloadKind::linear_scan: return run_linear_scan(spec, v, p);
        case WorkloadKind::strided_scan: return run_strided_scan(spec, v, p);
        case WorkloadKind::gups: return run_gups(spec, v, p);
        case WorkloadKind::rbtree: return run_rbtree(spec, v, p);
        case WorkloadKind::fib: return run_fib(spec, v, p);
    }
    throw Error("unknown workload kind");
}

} // namespace pma
