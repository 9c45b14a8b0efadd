#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cookbench {

// Static-partition parallel for. Partitioning depends only on (n, workers),
// so results are reproducible for a fixed worker count; workers=1 runs inline.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t, std::size_t, int)>& body) {
    if (n == 0) return;
    if (workers < 1) workers = 1;
    if (workers == 1 || n == 1) {
        body(0, n, 0);
        return;
    }
    int t = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), n));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(t));
    for (int k = 0; k < t; ++k) {
        std::size_t begin = n * static_cast<std::size_t>(k) / static_cast<std::size_t>(t);
        std::size_t end = n * static_cast<std::size_t>(k + 1) / static_cast<std::size_t>(t);
        threads.emplace_back([&body, begin, end, k] { body(begin, end, k); });
    }
    for (auto& th : threads) th.join();
}

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};
struct DataError : std::runtime_error {
    explicit DataError(const std::string& m) : std::runtime_error(m) {}
};
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace cookbench
