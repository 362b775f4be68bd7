#include "pdsde/executor.hpp"

#include <exception>
#include <limits>
#include <mutex>

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

namespace pdsde {

struct Executor::Arena {
    explicit Arena(int n) : limit(tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(n)), arena(n) {}
    tbb::global_control limit;
    tbb::task_arena arena;
};

Executor::Executor(std::size_t threads) : threads_(threads == 0 ? 1 : threads) {
    if (threads_ > 1) arena_ = std::make_unique<Arena>(static_cast<int>(threads_));
}

Executor::~Executor() = default;

void Executor::for_each(std::size_t n, const std::function<void(std::size_t)>& fn) const {
    if (n == 0) return;
    if (!arena_) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::mutex mu;
    std::size_t failed_at = std::numeric_limits<std::size_t>::max();
    std::exception_ptr failure;
    arena_->arena.execute([&] {
        tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n),
                                  [&](const tbb::blocked_range<std::size_t>& r) {
                                      for (std::size_t k = r.begin(); k != r.end(); ++k) {
                                          try {
                                              fn(k);
                                          } catch (...) {
                                              std::lock_guard lock(mu);
                                              if (k < failed_at) {
                                                  failed_at = k;
                                                  failure = std::current_exception();
                                              }
                                              return;
                                          }
                                      }
                                  });
    });
    if (failure) std::rethrow_exception(failure);
}

}  // namespace pdsde
