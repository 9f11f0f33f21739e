#ifndef PMA_ERRORS_HPP
#define PMA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pma {

// Base for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration (non-power-of-two block size, zero capacity, ...).
struct ConfigError : Error {
    using Error::Error;
};

// The pool has no free block left. The pool never over-commits; callers
// decide the policy (fail, skip the cell, retry with a smaller size).
struct OutOfBlocksError : Error {
    using Error::Error;
};

// API misuse that must be detected rather than left undefined: double
// release, foreign handle, pop on an empty stack, double destroy.
struct UsageError : Error {
    using Error::Error;
};

// Index outside [0, n).
struct BoundsError : Error {
    using Error::Error;
};

// Requested element count cannot be addressed by the deepest supported tree.
struct TooLargeError : Error {
    using Error::Error;
};

// A stack frame that cannot fit into a single block even when empty.
struct FrameSizeError : Error {
    using Error::Error;
};

// Benchmark variants disagreed on a checksum; timings must not be reported.
struct ChecksumMismatchError : Error {
    using Error::Error;
};

} // namespace pma

#endif
