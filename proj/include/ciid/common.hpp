#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ciid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Labels = Eigen::VectorXi;  // binary labels, values in {0, 1}

// Error taxonomy. Every throwing operation names one of these so callers can
// distinguish config mistakes from data defects.
struct EmptyGroupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewSamplesError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownColumnError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyTargetGroupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnseenGroupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LengthMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientDefinedCellsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingColumnError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnparsableCellError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyDatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewRowsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Derives an independent child seed from (seed, stream index). Used so that
// parallel work items get reproducible streams regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x1234567ull));
}

// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Locale-independent shortest round-trip formatting; all CSV/JSON output goes
// through this so reruns are byte-identical.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Runs fn(i) for i in [0, n) on a small thread pool. Work items must write to
// disjoint state; the caller owns any deterministic reduction afterwards.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t workers = std::min<std::size_t>(hw == 0 ? 1 : hw, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace ciid
