#pragma once

#include <atomic>
#include <cassert>
#include <cstdint>
#include <deque>
#include <mutex>
#include <vector>

#include "augtree/common.hpp"

namespace augtree {

// Epoch-based reclamation domain. One domain per tree instance.
//
// Threads announce the global epoch while inside a guarded operation and go
// quiescent on exit. An object retired under epoch e is freed once the global
// epoch reaches e+2; the epoch only advances when every active announcement
// and every snapshot pin sits at the current value. Snapshot pins are
// thread-agnostic announcements, so snapshot handles can be shared across
// threads and outlive the operation that created them.
class epoch_domain {
 public:
  static constexpr std::size_t kMaxThreads = 128;
  static constexpr std::size_t kMaxPins = 256;
  static constexpr std::uint64_t kQuiescent = ~std::uint64_t{0};
  static constexpr std::uint64_t kNoPin = ~std::uint64_t{0};

  using deleter_fn = void (*)(epoch_domain&, void*);

  explicit epoch_domain(std::size_t limbo_watermark = 4096,
                        std::uint32_t advance_interval = 256)
      : id_(next_id_.fetch_add(1, std::memory_order_relaxed)),
        watermark_(limbo_watermark),
        advance_interval_(advance_interval) {
    for (auto& p : pins_) p.store(kNoPin, std::memory_order_relaxed);
  }

  epoch_domain(const epoch_domain&) = delete;
  epoch_domain& operator=(const epoch_domain&) = delete;

  ~epoch_domain() { drain_all(); }

  struct retired_item {
    void* ptr;
    deleter_fn fn;
    std::uint64_t epoch;
  };

  struct alignas(64) thread_slot {
    std::atomic<std::uint64_t> announce{kQuiescent};
    std::atomic<bool> claimed{false};
    std::uint32_t depth = 0;  // guard nesting, owner thread only
    std::uint32_t enters = 0;
    std::size_t reclaim_at = 0;  // next limbo size worth another sweep
    std::vector<retired_item> limbo;  // owner thread only (teardown excepted)
  };

  // RAII guard around one public operation.
  class guard {
   public:
    explicit guard(epoch_domain& d) : dom_(&d), slot_(d.enter()) {}
    ~guard() { dom_->exit(slot_); }
    guard(const guard&) = delete;
    guard& operator=(const guard&) = delete;
    thread_slot* slot() const noexcept { return slot_; }

   private:
    epoch_domain* dom_;
    thread_slot* slot_;
  };

  thread_slot* enter() {
    thread_slot* s = slot_for_thread();
    if (s->depth++ == 0) {
      // Publish the announcement and stabilize against a concurrent advance.
      std::uint64_t e = global_.load(std::memory_order_seq_cst);
      for (;;) {
        s->announce.store(e, std::memory_order_seq_cst);
        std::uint64_t now = global_.load(std::memory_order_seq_cst);
        if (now == e) break;
        e = now;
      }
      if (++s->enters >= advance_interval_) {
        s->enters = 0;
        try_advance();
        reclaim(s);
      }
    }
    return s;
  }

  void exit(thread_slot* s) {
    assert(s->depth > 0);
    if (--s->depth == 0)
      s->announce.store(kQuiescent, std::memory_order_seq_cst);
  }

  // Retire an object unlinked from the shared structure. Must run under a
  // guard on the calling thread (deleters cascading retires during a drain
  // are the one exception).
  void retire(void* ptr, deleter_fn fn) {
    thread_slot* s = slot_for_thread();
    assert(s->depth > 0 || draining_);
    s->limbo.push_back(
        retired_item{ptr, fn, global_.load(std::memory_order_seq_cst)});
    retired_.fetch_add(1, std::memory_order_relaxed);
    bump_hwm(s->limbo.size());
    // Sweeps are amortized: each one buys headroom proportional to the
    // watermark before the next, so a long limbo list is scanned once per
    // batch of retires rather than once per retire.
    if (!draining_ && s->limbo.size() >= watermark_ &&
        s->limbo.size() >= s->reclaim_at) {
      try_advance();
      reclaim(s);
      s->reclaim_at =
          s->limbo.size() + (watermark_ > 256 ? watermark_ / 4 : 64);
    }
  }

  // Snapshot pins -----------------------------------------------------------

  // Claims a pin slot holding the current epoch; returns its index.
  std::size_t acquire_pin() {
    for (;;) {
      std::uint64_t e = global_.load(std::memory_order_seq_cst);
      for (std::size_t i = 0; i < kMaxPins; ++i) {
        std::uint64_t empty = kNoPin;
        if (pins_[i].compare_exchange_strong(empty, e,
                                             std::memory_order_seq_cst)) {
          // Stabilize: the pin must equal the global epoch before it is
          // guaranteed to block further advances.
          for (;;) {
            std::uint64_t now = global_.load(std::memory_order_seq_cst);
            if (now == e) return i;
            e = now;
            pins_[i].store(e, std::memory_order_seq_cst);
          }
        }
      }
      cpu_relax();  // all pin slots busy; wait for one to free up
    }
  }

  // Claims a pin slot at a specific (older) epoch, for snapshot copies.
  std::size_t acquire_pin_at(std::uint64_t epoch) {
    for (;;) {
      for (std::size_t i = 0; i < kMaxPins; ++i) {
        std::uint64_t empty = kNoPin;
        if (pins_[i].compare_exchange_strong(empty, epoch,
                                             std::memory_order_seq_cst))
          return i;
      }
      cpu_relax();
    }
  }

  std::uint64_t pin_epoch(std::size_t idx) const {
    return pins_[idx].load(std::memory_order_seq_cst);
  }

  void release_pin(std::size_t idx) {
    pins_[idx].store(kNoPin, std::memory_order_seq_cst);
  }

  // Maintenance --------------------------------------------------------------

  bool try_advance() {
    std::uint64_t e = global_.load(std::memory_order_seq_cst);
    for (std::size_t i = 0; i < kMaxThreads; ++i) {
      if (!slots_[i].claimed.load(std::memory_order_acquire)) continue;
      std::uint64_t a = slots_[i].announce.load(std::memory_order_seq_cst);
      if (a != kQuiescent && a != e) return false;
    }
    for (std::size_t i = 0; i < kMaxPins; ++i) {
      std::uint64_t p = pins_[i].load(std::memory_order_seq_cst);
      if (p != kNoPin && p != e) return false;
    }
    return global_.compare_exchange_strong(e, e + 1,
                                           std::memory_order_seq_cst);
  }

  // Frees every eligible item in the calling thread's limbo list.
  void reclaim(thread_slot* s) {
    std::uint64_t g = global_.load(std::memory_order_seq_cst);
    std::vector<retired_item> ready;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < s->limbo.size(); ++i) {
      retired_item& it = s->limbo[i];
      if (it.epoch + 2 <= g)
        ready.push_back(it);
      else
        s->limbo[kept++] = it;
    }
    s->limbo.resize(kept);
    for (auto& it : ready) it.fn(*this, it.ptr);  // may retire more; fine
  }

  // Drives epochs forward and reclaims everything. Callable only when no
  // guards or pins are held (quiescent system), e.g. between trials. Deleters
  // cascade retires into the calling thread's slot, so the sweep repeats until
  // the counters meet; a held pin or guard stalls the epoch and ends the loop
  // early instead of spinning.
  void flush() {
    draining_ = true;
    for (;;) {
      std::uint64_t e_before = global_.load(std::memory_order_seq_cst);
      std::uint64_t r_before = reclaimed_.load(std::memory_order_relaxed);
      try_advance();
      for (std::size_t i = 0; i < kMaxThreads; ++i)
        if (slots_[i].claimed.load(std::memory_order_acquire))
          reclaim(&slots_[i]);
      if (retired_.load(std::memory_order_relaxed) ==
          reclaimed_.load(std::memory_order_relaxed))
        break;
      if (global_.load(std::memory_order_seq_cst) == e_before &&
          reclaimed_.load(std::memory_order_relaxed) == r_before)
        break;
    }
    draining_ = false;
  }

  std::uint64_t epoch() const { return global_.load(std::memory_order_seq_cst); }
  std::uint64_t retired_count() const { return retired_.load(std::memory_order_relaxed); }
  std::uint64_t reclaimed_count() const { return reclaimed_.load(std::memory_order_relaxed); }
  std::uint64_t limbo_high_water() const { return limbo_hwm_.load(std::memory_order_relaxed); }
  std::size_t quarantine_size() const {
    std::lock_guard<std::mutex> lk(quarantine_mu_);
    return quarantine_.size();
  }

  // Called by deleters to account a completed reclamation.
  void count_reclaimed() { reclaimed_.fetch_add(1, std::memory_order_relaxed); }

  // Poison quarantine: instrumented deleters hand the carcass here instead of
  // freeing it, so stale readers hit the poisoned tag instead of freed memory.
  void quarantine(void* ptr, void (*destroy)(void*)) {
    std::lock_guard<std::mutex> lk(quarantine_mu_);
    quarantine_.push_back({ptr, destroy});
    while (quarantine_.size() > kQuarantineCap) {
      auto old = quarantine_.front();
      quarantine_.pop_front();
      old.destroy(old.ptr);
    }
  }

 private:
  static constexpr std::size_t kQuarantineCap = 1u << 20;

  void bump_hwm(std::size_t n) {
    std::uint64_t cur = limbo_hwm_.load(std::memory_order_relaxed);
    while (n > cur &&
           !limbo_hwm_.compare_exchange_weak(cur, n, std::memory_order_relaxed)) {
    }
  }

  thread_slot* slot_for_thread() {
    struct cache_entry {
      std::uint64_t id;
      epoch_domain* dom;
      thread_slot* slot;
    };
    thread_local std::vector<cache_entry> cache;
    for (auto& c : cache)
      if (c.id == id_ && c.dom == this) return c.slot;
    for (std::size_t i = 0; i < kMaxThreads; ++i) {
      bool unclaimed = false;
      if (slots_[i].claimed.compare_exchange_strong(unclaimed, true,
                                                    std::memory_order_acq_rel)) {
        cache.push_back({id_, this, &slots_[i]});
        return &slots_[i];
      }
    }
    assert(!"epoch_domain thread slots exhausted");
    return nullptr;
  }

  void drain_all() {
    // No guards may be active here; free everything unconditionally.
    draining_ = true;
    // Deleters can cascade retires into the draining thread's own slot, so
    // sweep until every limbo list is empty.
    for (bool any = true; any;) {
      any = false;
      for (std::size_t i = 0; i < kMaxThreads; ++i) {
        thread_slot& s = slots_[i];
        if (!s.claimed.load(std::memory_order_acquire) || s.limbo.empty())
          continue;
        any = true;
        std::vector<retired_item> items;
        items.swap(s.limbo);
        for (auto& it : items) it.fn(*this, it.ptr);
      }
    }
    std::lock_guard<std::mutex> lk(quarantine_mu_);
    for (auto& q : quarantine_) q.destroy(q.ptr);
    quarantine_.clear();
  }

  struct quarantined {
    void* ptr;
    void (*destroy)(void*);
  };

  static inline std::atomic<std::uint64_t> next_id_{1};

  const std::uint64_t id_;
  const std::size_t watermark_;
  const std::uint32_t advance_interval_;
  bool draining_ = false;
  std::atomic<std::uint64_t> global_{2};  // starts >0 so epoch-2 math is safe
  std::atomic<std::uint64_t> retired_{0};
  std::atomic<std::uint64_t> reclaimed_{0};
  std::atomic<std::uint64_t> limbo_hwm_{0};
  thread_slot slots_[kMaxThreads];
  std::atomic<std::uint64_t> pins_[kMaxPins];
  mutable std::mutex quarantine_mu_;
  std::deque<quarantined> quarantine_;
};

// Standard deleter body for objects carrying a leading atomic tag word. With
// poison checks on, the tag is stomped and the memory parked in quarantine so
// a use-after-reclaim trips AUGTREE_CHECK_TAG instead of silently reading
// recycled memory.
template <class T>
void reclaim_object(epoch_domain& dom, void* p) {
  auto* obj = static_cast<T*>(p);
#if defined(AUGTREE_POISON_CHECKS)
  obj->tag.store(kTagPoisoned, std::memory_order_relaxed);
  dom.count_reclaimed();
  dom.quarantine(p, [](void* q) { delete static_cast<T*>(q); });
#else
  dom.count_reclaimed();
  delete obj;
#endif
}

}  // namespace augtree
