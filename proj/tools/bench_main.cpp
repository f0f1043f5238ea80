#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "driver.hpp"

namespace {

int fail_usage(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workload benchmark for the concurrent ordered set"};

  driver::bench_config cfg;
  std::string mix_text = "25:25:25:25";
  std::string dist_text = "uniform";
  std::string query_text = "range";
  std::string prefill_text = "on";
  std::string pin_text = "off";
  std::string csv_path;
  bool summary = false;

  app.add_option("--variant", cfg.variant,
                 "bat | bat-del | bat-eagerdel | unbalanced-baseline")
      ->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker thread count")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  app.add_option("--max-key", cfg.max_key, "key universe size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--rq-size", cfg.rq_size, "range query width in keys")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--mix", mix_text,
                 "insert:erase:find:query percentages, summing to 100")
      ->capture_default_str();
  app.add_option("--query-kind", query_text, "range | rank | select")
      ->capture_default_str();
  app.add_option("--dist", dist_text, "uniform | zipf[:theta] | sorted")
      ->capture_default_str();
  app.add_option("--seconds", cfg.seconds, "timed window per trial")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--trials", cfg.trials,
                 "trials per configuration (0 emits a header-only CSV)")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "base seed for the operation streams")
      ->capture_default_str();
  app.add_option("--prefill", prefill_text,
                 "on | off: fill to half the key universe before timing")
      ->capture_default_str();
  app.add_option("--pin", pin_text, "on | off: pin workers to cpus")
      ->capture_default_str();
  app.add_option("--latency-every", cfg.latency_every,
                 "sample latency on every Nth op (0 disables)")
      ->capture_default_str();
  app.add_option("--csv", csv_path, "write one CSV row per trial to this file");
  app.add_flag("--summary", summary, "print metrics averaged over trials");

  CLI11_PARSE(app, argc, argv);

  augtree::set_options probe;
  if (!driver::variant_options(cfg.variant, probe))
    return fail_usage("unknown variant '" + cfg.variant + "'");
  if (!workload::parse_mix(mix_text, cfg.mix) || !cfg.mix.valid())
    return fail_usage("bad mix '" + mix_text +
                      "', want i:e:f:q percentages summing to 100");
  if (!workload::parse_dist(dist_text, cfg.dist, cfg.zipf_theta))
    return fail_usage("bad dist '" + dist_text +
                      "', want uniform, sorted, or zipf[:theta]");
  if (query_text == "range") {
    cfg.qkind = workload::query_kind::range_count;
  } else if (query_text == "rank") {
    cfg.qkind = workload::query_kind::rank;
  } else if (query_text == "select") {
    cfg.qkind = workload::query_kind::select;
  } else {
    return fail_usage("bad query kind '" + query_text + "'");
  }
  if (prefill_text == "on") {
    cfg.prefill = true;
  } else if (prefill_text == "off") {
    cfg.prefill = false;
  } else {
    return fail_usage("bad --prefill '" + prefill_text + "', want on or off");
  }
  if (pin_text == "on") {
    cfg.pin_threads = true;
  } else if (pin_text == "off") {
    cfg.pin_threads = false;
  } else {
    return fail_usage("bad --pin '" + pin_text + "', want on or off");
  }
  if (cfg.rq_size > cfg.max_key)
    return fail_usage("--rq-size must not exceed --max-key");

  std::ofstream csv;
  if (!csv_path.empty()) {
    csv.open(csv_path, std::ios::trunc);
    if (!csv) return fail_usage("cannot open '" + csv_path + "' for writing");
    csv << workload::csv_join(driver::csv_header()) << "\n";
  }

  std::vector<driver::trial_result> results;
  results.reserve(cfg.trials);
  for (unsigned trial = 0; trial < cfg.trials; ++trial) {
    driver::trial_result r = driver::run_trial(cfg, trial);
    driver::print_trial(std::cout, cfg, trial, r);
    if (csv.is_open())
      csv << workload::csv_join(driver::csv_row(cfg, trial, r)) << "\n";
    results.push_back(r);
  }

  if (summary) driver::print_summary(std::cout, cfg, results);
  return 0;
}
