#include "workload.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace workload {

bool parse_mix(const std::string& text, op_mix& out) {
  int vals[4];
  std::size_t pos = 0;
  for (int i = 0; i < 4; ++i) {
    if (pos >= text.size() || !std::isdigit(text[pos])) return false;
    std::size_t end = pos;
    while (end < text.size() && std::isdigit(text[end])) ++end;
    vals[i] = std::atoi(text.substr(pos, end - pos).c_str());
    pos = end;
    if (i < 3) {
      if (pos >= text.size() || text[pos] != ':') return false;
      ++pos;
    }
  }
  if (pos != text.size()) return false;
  out.insert_pct = vals[0];
  out.erase_pct = vals[1];
  out.find_pct = vals[2];
  out.query_pct = vals[3];
  return true;
}

bool parse_dist(const std::string& text, dist_kind& out, double& theta) {
  if (text == "uniform") {
    out = dist_kind::uniform;
    return true;
  }
  if (text == "sorted") {
    out = dist_kind::sorted;
    return true;
  }
  if (text == "zipf") {
    out = dist_kind::zipf;
    theta = 0.95;
    return true;
  }
  const std::string prefix = "zipf:";
  if (text.rfind(prefix, 0) == 0) {
    char* end = nullptr;
    double t = std::strtod(text.c_str() + prefix.size(), &end);
    if (end == nullptr || *end != '\0' || !(t > 0.0)) return false;
    out = dist_kind::zipf;
    theta = t;
    return true;
  }
  return false;
}

zipf_table::zipf_table(std::uint64_t n, double theta) : theta_(theta) {
  cum_.resize(n);
  double acc = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    acc += 1.0 / std::pow(double(i + 1), theta);
    cum_[i] = acc;
  }
  double total = acc;
  for (std::uint64_t i = 0; i < n; ++i) cum_[i] /= total;
  if (!cum_.empty()) cum_.back() = 1.0;
}

std::uint64_t zipf_table::sample(rng& r) const {
  double u = r.next_unit();
  auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
  if (it == cum_.end()) --it;
  return std::uint64_t(it - cum_.begin());
}

std::string format_sig6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string csv_join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out.push_back(',');
    out += cells[i];
  }
  return out;
}

}  // namespace workload
