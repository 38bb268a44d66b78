#include "vclab/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace vclab {

namespace {

int resolve_thread_count() {
    if (const char* env = std::getenv("VCLAB_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n > 64 ? 64 : n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    return hw > 16 ? 16 : static_cast<int>(hw);
}

// Persistent pool: workers park on a condition variable between jobs.
class Pool {
public:
    Pool() : threads_(resolve_thread_count()) {
        for (int t = 1; t < threads_; ++t) {
            workers_.emplace_back([this, t] { worker_loop(t); });
        }
    }

    ~Pool() {
        {
            std::lock_guard<std::mutex> lock(mu_);
            stop_ = true;
            ++epoch_;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    int threads() const { return threads_; }

    void run(size_t n, const std::function<void(size_t, size_t)>& fn) {
        int parts = threads_;
        size_t chunk = (n + static_cast<size_t>(parts) - 1) / static_cast<size_t>(parts);
        {
            std::lock_guard<std::mutex> lock(mu_);
            job_ = &fn;
            job_n_ = n;
            job_chunk_ = chunk;
            pending_ = parts - 1;
            ++epoch_;
        }
        cv_.notify_all();
        run_chunk(fn, 0, n, chunk);
        std::unique_lock<std::mutex> lock(mu_);
        done_cv_.wait(lock, [this] { return pending_ == 0; });
        job_ = nullptr;
    }

private:
    static void run_chunk(const std::function<void(size_t, size_t)>& fn, size_t part,
                          size_t n, size_t chunk) {
        size_t begin = part * chunk;
        if (begin >= n) return;
        size_t end = begin + chunk < n ? begin + chunk : n;
        fn(begin, end);
    }

    void worker_loop(int part) {
        uint64_t seen = 0;
        for (;;) {
            const std::function<void(size_t, size_t)>* job = nullptr;
            size_t n = 0, chunk = 0;
            {
                std::unique_lock<std::mutex> lock(mu_);
                cv_.wait(lock, [&] { return epoch_ != seen; });
                seen = epoch_;
                if (stop_) return;
                job = job_;
                n = job_n_;
                chunk = job_chunk_;
            }
            if (job) run_chunk(*job, static_cast<size_t>(part), n, chunk);
            {
                std::lock_guard<std::mutex> lock(mu_);
                if (--pending_ == 0) done_cv_.notify_one();
            }
        }
    }

    int threads_;
    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(size_t, size_t)>* job_ = nullptr;
    size_t job_n_ = 0;
    size_t job_chunk_ = 0;
    int pending_ = 0;
    uint64_t epoch_ = 0;
    bool stop_ = false;
};

Pool& pool() {
    static Pool p;
    return p;
}

}  // namespace

int thread_count() { return pool().threads(); }

void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn) {
    if (n == 0) return;
    if (pool().threads() == 1 || n < 256) {
        fn(0, n);
        return;
    }
    pool().run(n, fn);
}

}  // namespace vclab
