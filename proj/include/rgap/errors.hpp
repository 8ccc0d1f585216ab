#pragma once

#include <stdexcept>
#include <string>

namespace rgap {

// Invalid inputs are reported with std::invalid_argument throughout.

/// A requested resolution or sample count exceeds the configured cap.
class ResourceLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical object failed an internal consistency check (for example a
/// Gram matrix that is not Hermitian).
class InternalConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct Limits {
    int max_grid = 1 << 15;
    long long max_samples = 100'000'000;
};

inline Limits& limits() {
    static Limits l;
    return l;
}

}  // namespace rgap
