#include "gdyn/core/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

namespace gdyn {

namespace {

int resolve_worker_count()
{
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("GARMENTDYN_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1 && cap <= 256) n = static_cast<unsigned>(cap);
    }
    return static_cast<int>(n);
}

// Persistent pool; the calling thread participates. Task indices are claimed
// through a generation-tagged counter so a helper that lingers past the end
// of one round can never claim indices (or touch the closure) of the next.
class Pool {
public:
    static Pool& get()
    {
        static Pool pool(worker_count() - 1);
        return pool;
    }

    void run(int ntasks, const std::function<void(int)>& task)
    {
        if (ntasks <= 0) return;
        if (helpers_.empty() || ntasks == 1) {
            for (int i = 0; i < ntasks; ++i) task(i);
            return;
        }
        uint64_t gen;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            gen = ++generation_;
            task_ = &task;
            ntasks_ = ntasks;
            pending_.store(ntasks, std::memory_order_relaxed);
            claim_.store(gen << 32, std::memory_order_release);
        }
        wake_.notify_all();
        work(task, ntasks, gen);
        {
            std::unique_lock<std::mutex> lock(mutex_);
            done_.wait(lock, [&] { return pending_.load(std::memory_order_acquire) == 0; });
            task_ = nullptr;
        }
    }

private:
    explicit Pool(int helpers)
    {
        for (int i = 0; i < helpers; ++i) helpers_.emplace_back([this] { helper_loop(); });
    }

    ~Pool()
    {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            stop_ = true;
            ++generation_;
        }
        wake_.notify_all();
        for (auto& t : helpers_) t.join();
    }

    void work(const std::function<void(int)>& task, int ntasks, uint64_t gen)
    {
        for (;;) {
            uint64_t c = claim_.load(std::memory_order_acquire);
            if ((c >> 32) != gen) break;
            const uint32_t idx = static_cast<uint32_t>(c & 0xffffffffu);
            if (idx >= static_cast<uint32_t>(ntasks)) break;
            if (!claim_.compare_exchange_weak(c, c + 1, std::memory_order_acq_rel)) continue;
            task(static_cast<int>(idx));
            if (pending_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
                std::lock_guard<std::mutex> lock(mutex_);
                done_.notify_all();
            }
        }
    }

    void helper_loop()
    {
        uint64_t seen = 0;
        for (;;) {
            const std::function<void(int)>* task = nullptr;
            int ntasks = 0;
            uint64_t gen = 0;
            {
                std::unique_lock<std::mutex> lock(mutex_);
                wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                task = task_;
                ntasks = ntasks_;
                gen = generation_;
            }
            if (task) work(*task, ntasks, gen);
        }
    }

    std::vector<std::thread> helpers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(int)>* task_ = nullptr;
    int ntasks_ = 0;
    uint64_t generation_ = 0;
    std::atomic<uint64_t> claim_{0};
    std::atomic<int> pending_{0};
    bool stop_ = false;
};

} // namespace

int worker_count()
{
    static const int n = resolve_worker_count();
    return n;
}

namespace detail {
void pool_run(int ntasks, const std::function<void(int)>& task) { Pool::get().run(ntasks, task); }
} // namespace detail

} // namespace gdyn
