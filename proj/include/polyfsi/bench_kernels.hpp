/// @file bench_kernels.hpp
/// @brief Timed comparison of the OpenMP kernels against their serial
///        reference paths. Results must match bitwise; the deterministic
///        reduction layout guarantees it independently of the thread count.

#pragma once

#include <string>
#include <vector>

namespace polyfsi::bench {

struct KernelResult {
    std::string name;
    double serial_ms = 0;
    double parallel_ms = 0;
    double speedup = 0;
    bool bitwise_equal = false;
};

std::vector<KernelResult> run_kernels(unsigned seed, int n, int repeats);

}  // namespace polyfsi::bench
