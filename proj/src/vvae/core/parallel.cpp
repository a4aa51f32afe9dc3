#include "vvae/core/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace vvae {

namespace {

// Lazily started pool of n-1 workers; the calling thread runs slice 0
// itself. Slices are handed out through an epoch-tagged ticket so a worker
// that outlives one job can never consume a slice (or the function pointer)
// of the next one.
class Pool {
 public:
  static Pool& instance() {
    static Pool p;
    return p;
  }

  void set_threads(int n) {
    std::unique_lock lk(mu_);
    want_ = n < 1 ? 1 : n;
  }

  int threads() {
    std::unique_lock lk(mu_);
    return want_;
  }

  void run(std::size_t slices,
           const std::function<void(std::size_t)>& slice_fn) {
    // One job at a time; concurrent callers queue here.
    std::unique_lock run_lk(run_mu_);
    std::unique_lock lk(mu_);
    ensure_workers(want_ - 1);
    job_ = &slice_fn;
    total_slices_ = slices;
    pending_ = static_cast<int>(slices) - 1;
    ++epoch_;
    ticket_.store((std::uint64_t(epoch_ & 0xffffffffu) << 32) | 1u,
                  std::memory_order_release);
    lk.unlock();
    cv_.notify_all();

    slice_fn(0);

    std::unique_lock lk2(mu_);
    done_cv_.wait(lk2, [&] { return pending_ <= 0; });
    job_ = nullptr;
  }

 private:
  Pool() = default;
  ~Pool() {
    {
      std::unique_lock lk(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  void ensure_workers(int n) {
    while (static_cast<int>(workers_.size()) < n)
      workers_.emplace_back([this] { worker(); });
  }

  void worker() {
    std::uint64_t seen = 0;
    for (;;) {
      const std::function<void(std::size_t)>* job = nullptr;
      std::size_t total = 0;
      std::uint32_t my_epoch = 0;
      {
        std::unique_lock lk(mu_);
        cv_.wait(lk, [&] { return stop_ || epoch_ != seen; });
        if (stop_) return;
        seen = epoch_;
        my_epoch = std::uint32_t(seen & 0xffffffffu);
        job = job_;
        total = total_slices_;
      }
      if (!job) continue;
      for (;;) {
        std::uint64_t cur = ticket_.load(std::memory_order_acquire);
        if (std::uint32_t(cur >> 32) != my_epoch) break;
        const std::uint32_t s = std::uint32_t(cur & 0xffffffffu);
        if (s >= total) break;
        if (!ticket_.compare_exchange_weak(cur, cur + 1,
                                           std::memory_order_acq_rel))
          continue;
        (*job)(s);
        std::unique_lock lk(mu_);
        if (--pending_ <= 0) {
          done_cv_.notify_one();
          break;  // job complete; fn may be destroyed once run() returns
        }
      }
    }
  }

  std::mutex run_mu_;
  std::mutex mu_;
  std::condition_variable cv_, done_cv_;
  std::vector<std::thread> workers_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::atomic<std::uint64_t> ticket_{0};
  std::size_t total_slices_ = 0;
  int pending_ = 0;
  std::uint64_t epoch_ = 0;
  int want_ = static_cast<int>(std::thread::hardware_concurrency());
  bool stop_ = false;
};

}  // namespace

void set_threads(int n) { Pool::instance().set_threads(n); }
int threads() { return Pool::instance().threads(); }

void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (grain == 0) grain = 1;
  const int tw = threads();
  std::size_t slices = (n + grain - 1) / grain;
  if (slices > static_cast<std::size_t>(tw)) slices = tw;
  if (slices <= 1) {
    fn(0, n);
    return;
  }
  const std::size_t per = (n + slices - 1) / slices;
  std::function<void(std::size_t)> slice_fn = [&](std::size_t s) {
    const std::size_t b = s * per;
    const std::size_t e = b + per < n ? b + per : n;
    if (b < e) fn(b, e);
  };
  Pool::instance().run(slices, slice_fn);
}

}  // namespace vvae
