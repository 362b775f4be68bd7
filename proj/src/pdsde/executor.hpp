#pragma once

#include <cstddef>
#include <functional>
#include <memory>

namespace pdsde {

// Fixed-width worker pool. Work handed to for_each must write only to slots
// owned by its index; results then never depend on the worker count.
class Executor {
public:
    explicit Executor(std::size_t threads = 1);
    ~Executor();
    Executor(const Executor&) = delete;
    Executor& operator=(const Executor&) = delete;

    std::size_t threads() const noexcept { return threads_; }

    // Calls fn(k) for k in [0, n). Exceptions propagate; when several
    // indices throw, the one with the lowest index wins.
    void for_each(std::size_t n, const std::function<void(std::size_t)>& fn) const;

private:
    std::size_t threads_;
    struct Arena;
    std::unique_ptr<Arena> arena_;
};

}  // namespace pdsde
