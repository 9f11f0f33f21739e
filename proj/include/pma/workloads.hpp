#ifndef PMA_WORKLOADS_HPP
#define PMA_WORKLOADS_HPP

#include <cstdint>
#include <string>

#include "pma/errors.hpp"

namespace pma {

// The microbenchmark bodies, each runnable against a contiguous baseline and
// against the block-backed structures. Everything is derived from the spec's
// seed, so two runs of the same spec are bit-identical regardless of variant.
enum class WorkloadKind { linear_scan, strided_scan, gups, rbtree, fib };

// flat:       contiguous host-allocated baseline
// tree_naive: block-backed, full root-to-leaf walk per access
// tree_iter:  block-backed, cached-page cursor
// For rbtree the structure is identical in all variants and only the node
// allocation backing changes (flat = host allocator, tree_* = pool blocks);
// for fib, flat is native recursion and tree_* run on the segmented stack.
enum class Variant { flat, tree_naive, tree_iter };

const char* to_string(WorkloadKind k);
const char* to_string(Variant v);
WorkloadKind parse_workload(const std::string& name);
Variant parse_variant(const std::string& name);

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::linear_scan;
    std::uint64_t data_bytes = 0;
    std::uint32_t element_size = 4;    // scans: 4 or 8; gups always uses 8
    std::uint64_t stride_elements = 1024;
    std::uint32_t passes = 16;         // strided scan sweeps
    std::uint64_t updates = 0;         // gups; 0 means 4x table length
    unsigned fib_depth = 0;            // 0 means derived from data_bytes
    std::uint64_t seed = 1;
};

struct WorkloadResult {
    std::uint64_t checksum = 0;
    double seconds = 0;           // workload body only
    double construct_seconds = 0; // pool + structure setup + fill
    std::uint64_t hops = 0;
    std::uint64_t allocations = 0;
    std::uint64_t accesses = 0;
};

struct PoolOptions {
    std::size_t block_size = 32 * 1024;
    std::uint64_t capacity_blocks = 0; // 0: sized to fit the workload
    bool zero_on_acquire = false;
};

WorkloadResult run_linear_scan(const WorkloadSpec&, Variant, const PoolOptions&);
WorkloadResult run_strided_scan(const WorkloadSpec&, Variant, const PoolOptions&);
WorkloadResult run_gups(const WorkloadSpec&, Variant, const PoolOptions&);
WorkloadResult run_rbtree(const WorkloadSpec&, Variant, const PoolOptions&);
WorkloadResult run_fib(const WorkloadSpec&, Variant, const PoolOptions&);

WorkloadResult run_workload(const WorkloadSpec&, Variant, const PoolOptions&);

// Fibonacci argument used when a fib spec leaves fib_depth at 0: grows with
// the size column so bigger cells do more calls.
unsigned fib_depth_for_bytes(std::uint64_t data_bytes);

} // namespace pma

#endif
