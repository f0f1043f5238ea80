#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

#include "augtree/ordered_set.hpp"
#include "workload.hpp"

// Trial runner shared by the bench CLI and the acceptance checks: builds a
// tree variant, prefills it, runs one timed window across worker threads,
// and folds the counters into a flat result row.

namespace driver {

struct bench_config {
  std::string variant = "bat";
  unsigned threads = 1;
  std::uint64_t max_key = 100000;
  std::uint64_t rq_size = 256;
  workload::op_mix mix{};
  workload::query_kind qkind = workload::query_kind::range_count;
  workload::dist_kind dist = workload::dist_kind::uniform;
  double zipf_theta = 0.95;
  double seconds = 1.0;
  unsigned trials = 3;
  std::uint64_t seed = 1;
  bool prefill = true;
  bool pin_threads = false;
  unsigned latency_every = 100;  // timestamp every Nth op; 0 disables
};

inline bool variant_options(const std::string& v, augtree::set_options& o) {
  if (v == "bat") {
    o.balanced = true;
    o.mode = augtree::propagate_mode::direct;
  } else if (v == "bat-del") {
    o.balanced = true;
    o.mode = augtree::propagate_mode::delegated;
  } else if (v == "bat-eagerdel") {
    o.balanced = true;
    o.mode = augtree::propagate_mode::eager_delegated;
  } else if (v == "unbalanced-baseline") {
    o.balanced = false;
    o.mode = augtree::propagate_mode::direct;
  } else {
    return false;
  }
  return true;
}

inline std::string dist_name(const bench_config& cfg) {
  switch (cfg.dist) {
    case workload::dist_kind::uniform:
      return "uniform";
    case workload::dist_kind::sorted:
      return "sorted";
    case workload::dist_kind::zipf:
    default:
      return "zipf:" + workload::format_sig6(cfg.zipf_theta);
  }
}

inline std::string query_name(workload::query_kind q) {
  switch (q) {
    case workload::query_kind::range_count:
      return "range";
    case workload::query_kind::rank:
      return "rank";
    case workload::query_kind::select:
    default:
      return "select";
  }
}

struct trial_result {
  double elapsed = 0.0;
  std::uint64_t total_ops = 0;
  double throughput = 0.0;       // ops per second over the timed window
  std::uint64_t counts[4] = {};  // indexed by op_kind
  std::uint64_t hits[4] = {};
  double lat_ns[4] = {};  // sampled mean latency per op kind

  std::uint64_t propagates = 0;
  double avg_nodes_per_propagate = 0.0;
  double avg_cas_per_propagate = 0.0;
  double avg_nil_fills_per_propagate = 0.0;
  std::uint64_t delegations = 0;
  std::uint64_t wait_timeouts = 0;
  std::uint64_t scx_committed = 0;
  std::uint64_t scx_aborted = 0;
  std::uint64_t llx_fail = 0;
  std::uint64_t rebalance_steps = 0;
  std::uint64_t discipline_violations = 0;

  std::uint64_t retired = 0;
  std::uint64_t reclaimed = 0;
  std::uint64_t limbo_high_water = 0;
  std::uint64_t final_size = 0;
  int final_height = 0;
  std::uint64_t stream_hash = 0;
};

// Quiescent callers only.
inline int tree_height(augtree::ordered_set& s) {
  augtree::epoch_domain::guard g(s.domain());
  std::vector<std::pair<augtree::node*, int>> st;
  st.emplace_back(s.tree().root()->load_child(0), 0);
  int h = 0;
  while (!st.empty()) {
    auto [x, d] = st.back();
    st.pop_back();
    if (x->is_leaf()) {
      h = std::max(h, d);
      continue;
    }
    st.emplace_back(x->load_child(0), d + 1);
    st.emplace_back(x->load_child(1), d + 1);
  }
  return h;
}

// Random inserts and deletes, biased toward the half-full point, until the
// size sits within one percent of max_key / 2.
inline void prefill_to_half(augtree::ordered_set& s, const bench_config& cfg) {
  std::uint64_t target = cfg.max_key / 2;
  if (target == 0) return;
  std::uint64_t tol = std::max<std::uint64_t>(target / 100, 1);
  workload::rng g{workload::stream_seed(cfg.seed, 0xffffffffu, 0)};
  for (;;) {
    std::uint64_t sz = s.size();
    if (sz + tol >= target && sz <= target + tol) break;
    std::uint64_t k = g.next_below(cfg.max_key);
    if (sz < target)
      s.insert(k);
    else
      s.erase(k);
  }
}

// Pure replay of the first ops each thread's generator would produce, so the
// value depends on (seed, config) and nothing the tree does. Select queries
// are fingerprinted over the key universe since their live draw range is a
// tree property, not a generator one.
inline std::uint64_t generator_fingerprint(const bench_config& cfg,
                                           unsigned trial) {
  std::unique_ptr<workload::zipf_table> zipf;
  if (cfg.dist == workload::dist_kind::zipf)
    zipf = std::make_unique<workload::zipf_table>(
        std::max<std::uint64_t>(cfg.max_key, 1), cfg.zipf_theta);
  std::uint64_t span = cfg.rq_size >= cfg.max_key
                           ? 1
                           : cfg.max_key - cfg.rq_size + 1;
  std::uint64_t universe = std::max<std::uint64_t>(cfg.max_key, 1);

  std::uint64_t acc = 0;
  for (unsigned t = 0; t < cfg.threads; ++t) {
    workload::sorted_source sorted;
    workload::rng g{workload::stream_seed(cfg.seed, trial, t)};
    workload::key_stream ks(cfg.dist, cfg.max_key, g, zipf.get(), &sorted);
    std::uint64_t h = 0;
    for (int i = 0; i < 10000; ++i) {
      workload::op_kind op = workload::draw_op(ks.generator(), cfg.mix);
      std::uint64_t key;
      if (op == workload::op_kind::query) {
        switch (cfg.qkind) {
          case workload::query_kind::range_count:
            key = ks.generator().next_below(span);
            break;
          case workload::query_kind::rank:
          case workload::query_kind::select:
          default:
            key = ks.generator().next_below(universe);
            break;
        }
      } else {
        key = ks.next_key();
      }
      h = workload::hash_step(h, std::uint64_t(op), key);
    }
    acc = workload::hash_step(acc, t, h);
  }
  return acc;
}

inline void pin_self(unsigned tid) {
#if defined(__linux__)
  cpu_set_t cs;
  CPU_ZERO(&cs);
  unsigned ncpu = std::max(1u, std::thread::hardware_concurrency());
  CPU_SET(tid % ncpu, &cs);
  pthread_setaffinity_np(pthread_self(), sizeof(cs), &cs);
#else
  (void)tid;
#endif
}

inline trial_result run_trial(const bench_config& cfg, unsigned trial) {
  augtree::set_options opt;
  if (!variant_options(cfg.variant, opt))
    throw std::invalid_argument("unknown variant: " + cfg.variant);
  augtree::ordered_set s(opt);

  if (cfg.prefill) prefill_to_half(s, cfg);

  std::unique_ptr<workload::zipf_table> zipf;
  if (cfg.dist == workload::dist_kind::zipf)
    zipf = std::make_unique<workload::zipf_table>(
        std::max<std::uint64_t>(cfg.max_key, 1), cfg.zipf_theta);
  workload::sorted_source sorted;

  const augtree::tree_stats& ts = s.stats();
  std::uint64_t p0 = ts.propagates.load();
  std::uint64_t pn0 = ts.propagate_nodes.load();
  std::uint64_t pc0 = ts.propagate_cas.load();
  std::uint64_t nf0 = ts.nil_fills.load();
  std::uint64_t dg0 = ts.delegations.load();
  std::uint64_t wt0 = ts.wait_timeouts.load();
  std::uint64_t sc0 = ts.scx_committed.load();
  std::uint64_t sa0 = ts.scx_aborted.load();
  std::uint64_t lf0 = ts.llx_fail.load();
  std::uint64_t rb0 = ts.rebalance_steps.load();

  struct worker_out {
    std::uint64_t counts[4] = {};
    std::uint64_t hits[4] = {};
    double lat_total_ns[4] = {};
    std::uint64_t lat_samples[4] = {};
  };
  std::vector<worker_out> outs(cfg.threads);
  std::atomic<unsigned> ready{0};
  std::atomic<bool> go{false};
  std::atomic<bool> stop{false};

  auto body = [&](unsigned tid) {
    if (cfg.pin_threads) pin_self(tid);
    worker_out& out = outs[tid];
    workload::rng gen{workload::stream_seed(cfg.seed, trial, tid)};
    workload::key_stream ks(cfg.dist, cfg.max_key, gen, zipf.get(), &sorted);
    std::uint64_t span = cfg.rq_size >= cfg.max_key
                             ? 1
                             : cfg.max_key - cfg.rq_size + 1;
    std::uint64_t universe = std::max<std::uint64_t>(cfg.max_key, 1);

    ready.fetch_add(1, std::memory_order_acq_rel);
    while (!go.load(std::memory_order_acquire)) std::this_thread::yield();

    using clock = std::chrono::steady_clock;
    std::uint64_t n = 0;
    while (!stop.load(std::memory_order_relaxed)) {
      workload::op_kind op = workload::draw_op(ks.generator(), cfg.mix);
      bool timed = cfg.latency_every != 0 && n % cfg.latency_every == 0;
      clock::time_point t0;
      if (timed) t0 = clock::now();

      std::uint64_t key = 0;
      bool hit = false;
      switch (op) {
        case workload::op_kind::insert:
          key = ks.next_key();
          hit = s.insert(key);
          break;
        case workload::op_kind::erase:
          key = ks.next_key();
          hit = s.erase(key);
          break;
        case workload::op_kind::find:
          key = ks.next_key();
          hit = s.find(key);
          break;
        case workload::op_kind::query:
        default:
          switch (cfg.qkind) {
            case workload::query_kind::range_count:
              key = ks.generator().next_below(span);
              hit = s.range_count(key, key + cfg.rq_size - 1) != 0;
              break;
            case workload::query_kind::rank:
              key = ks.generator().next_below(universe);
              hit = s.rank(key) != 0;
              break;
            case workload::query_kind::select:
            default: {
              std::uint64_t sz = s.size();
              key = 1 + ks.generator().next_below(std::max<std::uint64_t>(sz, 1));
              try {
                (void)s.select(key);
                hit = true;
              } catch (const std::out_of_range&) {
                hit = false;
              }
              break;
            }
          }
          break;
      }

      int oi = int(op);
      out.counts[oi] += 1;
      if (hit) out.hits[oi] += 1;
      if (timed) {
        out.lat_total_ns[oi] +=
            std::chrono::duration<double, std::nano>(clock::now() - t0)
                .count();
        out.lat_samples[oi] += 1;
      }
      n += 1;
    }
  };

  std::vector<std::thread> workers;
  workers.reserve(cfg.threads);
  for (unsigned t = 0; t < cfg.threads; ++t) workers.emplace_back(body, t);
  while (ready.load(std::memory_order_acquire) != cfg.threads)
    std::this_thread::yield();

  auto t_start = std::chrono::steady_clock::now();
  go.store(true, std::memory_order_release);
  std::this_thread::sleep_for(std::chrono::duration<double>(cfg.seconds));
  stop.store(true, std::memory_order_release);
  auto t_stop = std::chrono::steady_clock::now();
  for (auto& w : workers) w.join();

  trial_result r;
  r.elapsed = std::chrono::duration<double>(t_stop - t_start).count();
  for (const auto& o : outs) {
    for (int i = 0; i < 4; ++i) {
      r.counts[i] += o.counts[i];
      r.hits[i] += o.hits[i];
    }
  }
  r.total_ops = r.counts[0] + r.counts[1] + r.counts[2] + r.counts[3];
  r.throughput = r.elapsed > 0.0 ? double(r.total_ops) / r.elapsed : 0.0;
  for (int i = 0; i < 4; ++i) {
    double total = 0.0;
    std::uint64_t samples = 0;
    for (const auto& o : outs) {
      total += o.lat_total_ns[i];
      samples += o.lat_samples[i];
    }
    r.lat_ns[i] = samples != 0 ? total / double(samples) : 0.0;
  }

  std::uint64_t dp = ts.propagates.load() - p0;
  r.propagates = dp;
  if (dp != 0) {
    r.avg_nodes_per_propagate =
        double(ts.propagate_nodes.load() - pn0) / double(dp);
    r.avg_cas_per_propagate =
        double(ts.propagate_cas.load() - pc0) / double(dp);
    r.avg_nil_fills_per_propagate =
        double(ts.nil_fills.load() - nf0) / double(dp);
  }
  r.delegations = ts.delegations.load() - dg0;
  r.wait_timeouts = ts.wait_timeouts.load() - wt0;
  r.scx_committed = ts.scx_committed.load() - sc0;
  r.scx_aborted = ts.scx_aborted.load() - sa0;
  r.llx_fail = ts.llx_fail.load() - lf0;
  r.rebalance_steps = ts.rebalance_steps.load() - rb0;
  r.discipline_violations =
      ts.top_cas_nil_expected.load() + ts.nil_cas_nonnil_expected.load();
  r.retired = s.domain().retired_count();
  r.reclaimed = s.domain().reclaimed_count();
  r.limbo_high_water = s.domain().limbo_high_water();
  r.final_size = s.size();
  r.final_height = tree_height(s);
  r.stream_hash = generator_fingerprint(cfg, trial);
  return r;
}

inline const std::vector<std::string>& csv_header() {
  static const std::vector<std::string> h = {
      "variant", "threads", "max_key", "rq_size",
      "mix_insert", "mix_erase", "mix_find", "mix_query",
      "query_kind", "dist", "seconds", "trial", "seed", "prefill", "pin",
      "elapsed_s", "total_ops", "throughput_ops_s",
      "inserts", "insert_hits", "erases", "erase_hits",
      "finds", "find_hits", "queries", "query_hits",
      "lat_insert_ns", "lat_erase_ns", "lat_find_ns", "lat_query_ns",
      "propagates", "avg_nodes_per_propagate", "avg_cas_per_propagate",
      "avg_nil_fills_per_propagate", "delegations", "wait_timeouts",
      "scx_committed", "scx_aborted", "llx_fail", "rebalance_steps",
      "discipline_violations", "retired", "reclaimed", "limbo_high_water",
      "final_size", "final_height", "stream_hash"};
  return h;
}

inline std::vector<std::string> csv_row(const bench_config& cfg,
                                        unsigned trial,
                                        const trial_result& r) {
  using std::to_string;
  using workload::format_sig6;
  std::vector<std::string> c;
  c.reserve(csv_header().size());
  c.push_back(cfg.variant);
  c.push_back(to_string(cfg.threads));
  c.push_back(to_string(cfg.max_key));
  c.push_back(to_string(cfg.rq_size));
  c.push_back(to_string(cfg.mix.insert_pct));
  c.push_back(to_string(cfg.mix.erase_pct));
  c.push_back(to_string(cfg.mix.find_pct));
  c.push_back(to_string(cfg.mix.query_pct));
  c.push_back(query_name(cfg.qkind));
  c.push_back(dist_name(cfg));
  c.push_back(format_sig6(cfg.seconds));
  c.push_back(to_string(trial));
  c.push_back(to_string(cfg.seed));
  c.push_back(cfg.prefill ? "on" : "off");
  c.push_back(cfg.pin_threads ? "on" : "off");
  c.push_back(format_sig6(r.elapsed));
  c.push_back(to_string(r.total_ops));
  c.push_back(format_sig6(r.throughput));
  c.push_back(to_string(r.counts[0]));
  c.push_back(to_string(r.hits[0]));
  c.push_back(to_string(r.counts[1]));
  c.push_back(to_string(r.hits[1]));
  c.push_back(to_string(r.counts[2]));
  c.push_back(to_string(r.hits[2]));
  c.push_back(to_string(r.counts[3]));
  c.push_back(to_string(r.hits[3]));
  c.push_back(format_sig6(r.lat_ns[0]));
  c.push_back(format_sig6(r.lat_ns[1]));
  c.push_back(format_sig6(r.lat_ns[2]));
  c.push_back(format_sig6(r.lat_ns[3]));
  c.push_back(to_string(r.propagates));
  c.push_back(format_sig6(r.avg_nodes_per_propagate));
  c.push_back(format_sig6(r.avg_cas_per_propagate));
  c.push_back(format_sig6(r.avg_nil_fills_per_propagate));
  c.push_back(to_string(r.delegations));
  c.push_back(to_string(r.wait_timeouts));
  c.push_back(to_string(r.scx_committed));
  c.push_back(to_string(r.scx_aborted));
  c.push_back(to_string(r.llx_fail));
  c.push_back(to_string(r.rebalance_steps));
  c.push_back(to_string(r.discipline_violations));
  c.push_back(to_string(r.retired));
  c.push_back(to_string(r.reclaimed));
  c.push_back(to_string(r.limbo_high_water));
  c.push_back(to_string(r.final_size));
  c.push_back(to_string(r.final_height));
  c.push_back(to_string(r.stream_hash));
  return c;
}

inline void print_trial(std::ostream& os, const bench_config& cfg,
                        unsigned trial, const trial_result& r) {
  os << cfg.variant << " trial " << trial << ": "
     << workload::format_sig6(r.throughput) << " ops/s ("
     << r.total_ops << " ops in " << workload::format_sig6(r.elapsed)
     << " s), size " << r.final_size << ", height " << r.final_height
     << "\n";
}

inline void print_summary(std::ostream& os, const bench_config& cfg,
                          const std::vector<trial_result>& rs) {
  os << "summary: " << cfg.variant << " threads=" << cfg.threads
     << " max_key=" << cfg.max_key << " mix=" << cfg.mix.insert_pct << ":"
     << cfg.mix.erase_pct << ":" << cfg.mix.find_pct << ":"
     << cfg.mix.query_pct << " dist=" << dist_name(cfg)
     << " query=" << query_name(cfg.qkind) << " rq=" << cfg.rq_size
     << " trials=" << rs.size() << "\n";
  if (rs.empty()) return;
  auto mean = [&](auto f) {
    double t = 0.0;
    for (const auto& r : rs) t += double(f(r));
    return t / double(rs.size());
  };
  using tr = const trial_result&;
  os << "  throughput        "
     << workload::format_sig6(mean([](tr r) { return r.throughput; }))
     << " ops/s\n";
  os << "  latency ns (i/e/f/q) "
     << workload::format_sig6(mean([](tr r) { return r.lat_ns[0]; })) << " / "
     << workload::format_sig6(mean([](tr r) { return r.lat_ns[1]; })) << " / "
     << workload::format_sig6(mean([](tr r) { return r.lat_ns[2]; })) << " / "
     << workload::format_sig6(mean([](tr r) { return r.lat_ns[3]; })) << "\n";
  os << "  avg per propagate: nodes "
     << workload::format_sig6(
            mean([](tr r) { return r.avg_nodes_per_propagate; }))
     << ", cas "
     << workload::format_sig6(
            mean([](tr r) { return r.avg_cas_per_propagate; }))
     << ", nil fills "
     << workload::format_sig6(
            mean([](tr r) { return r.avg_nil_fills_per_propagate; }))
     << "\n";
  os << "  delegations " << workload::format_sig6(mean([](tr r) {
       return double(r.delegations);
     })) << ", wait timeouts "
     << workload::format_sig6(mean([](tr r) { return double(r.wait_timeouts); }))
     << ", scx aborts "
     << workload::format_sig6(mean([](tr r) { return double(r.scx_aborted); }))
     << "\n";
  os << "  final size " << workload::format_sig6(mean([](tr r) {
       return double(r.final_size);
     })) << ", height "
     << workload::format_sig6(mean([](tr r) { return double(r.final_height); }))
     << ", limbo high water "
     << workload::format_sig6(
            mean([](tr r) { return double(r.limbo_high_water); }))
     << "\n";
}

}  // namespace driver
