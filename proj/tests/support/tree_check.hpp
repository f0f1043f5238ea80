#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "augtree/ordered_set.hpp"
#include "support/oracle.hpp"

// Quiescent structural audits. Callers must have joined every worker thread
// first; the walks here read node and version fields directly with no
// synchronization beyond the implied happens-before of the joins.

namespace testsup {

struct tree_audit {
  std::vector<augtree::key_type> keys;  // data leaves, in-order
  int height = 0;                       // edges, from the data root
  std::uint64_t red_red = 0;
  std::uint64_t overweight = 0;
  bool bst_ok = true;
  bool versions_ok = true;     // every node's version size == its leaf count
  bool version_sum_ok = true;  // every version's size == left + right
  std::string detail;

  bool structure_ok(bool balanced) const {
    if (!bst_ok || !versions_ok || !version_sum_ok) return false;
    if (balanced && (red_red != 0 || overweight != 0)) return false;
    return true;
  }

  bool height_bound_ok() const {
    double n = double(keys.size());
    return height <= int(2.0 * std::log2(n + 1.0) + 2.0 + 1e-9);
  }
};

namespace check_detail {

inline void audit_version(augtree::node* x, std::uint64_t leaves,
                          tree_audit& out) {
  using namespace augtree;
  version* v = x->ver.load(std::memory_order_acquire);
  if (v == nullptr) {
    // A nil version is legal only on a node no refresh has read yet; at
    // quiescence that cannot happen above data leaves.
    if (leaves != 0) {
      out.versions_ok = false;
      out.detail += "nil version above data leaves; ";
    }
    return;
  }
  if (v->size != leaves) {
    out.versions_ok = false;
    std::ostringstream os;
    os << "version size " << v->size << " != leaf count " << leaves
       << " at key " << x->key << "; ";
    out.detail += os.str();
  }
  if (v->left != nullptr && v->right != nullptr &&
      v->size != v->left->size + v->right->size) {
    out.version_sum_ok = false;
    out.detail += "version size not the sum of its children; ";
  }
}

// Iterative post-order: the unbalanced tree can be tens of thousands of
// levels deep, which real recursion would not survive.
inline void audit_subtree(augtree::node* root, tree_audit& out) {
  using namespace augtree;
  struct frame {
    node* x;
    key_type lo, hi;
    int depth;
    int stage = 0;
    std::uint64_t left_leaves = 0;
  };
  std::vector<frame> st;
  st.push_back({root, 0, kSentinelKey, 0});
  std::uint64_t ret = 0;
  while (!st.empty()) {
    frame& f = st.back();
    if (f.stage == 0) {
      if (f.depth > out.height) out.height = f.depth;
      if (f.x->weight >= 2) out.overweight += 1;
      if (f.x->is_leaf()) {
        std::uint64_t leaves = 0;
        if (f.x->key != kSentinelKey) {
          out.keys.push_back(f.x->key);
          if (!(f.lo <= f.x->key && f.x->key < f.hi)) {
            out.bst_ok = false;
            out.detail += "leaf key outside its search interval; ";
          }
          leaves = 1;
        }
        audit_version(f.x, leaves, out);
        ret = leaves;
        st.pop_back();
        continue;
      }
      node* c0 = f.x->load_child(0);
      node* c1 = f.x->load_child(1);
      if (f.x->weight == 0 && ((!c0->is_leaf() && c0->weight == 0) ||
                               (!c1->is_leaf() && c1->weight == 0)))
        out.red_red += 1;
      f.stage = 1;
      // Descent sends k < x->key left, k >= x->key right.
      st.push_back({c0, f.lo, std::min(f.hi, f.x->key), f.depth + 1});
      continue;
    }
    if (f.stage == 1) {
      f.left_leaves = ret;
      f.stage = 2;
      st.push_back({f.x->load_child(1), std::max(f.lo, f.x->key), f.hi,
                    f.depth + 1});
      continue;
    }
    std::uint64_t leaves = f.left_leaves + ret;
    audit_version(f.x, leaves, out);
    ret = leaves;
    st.pop_back();
  }
}

}  // namespace check_detail

// Full audit from the data root (the sentinel's left child).
inline tree_audit audit(augtree::ordered_set& s) {
  tree_audit out;
  s.size();  // forces the root version chain to exist before the raw walk
  augtree::node* data = s.tree().root()->load_child(0);
  check_detail::audit_subtree(data, out);
  for (std::size_t i = 1; i < out.keys.size(); ++i)
    if (out.keys[i - 1] >= out.keys[i]) {
      out.bst_ok = false;
      out.detail += "in-order walk not strictly increasing; ";
      break;
    }
  return out;
}

// Set equality plus the structural invariants, against a replayed oracle.
inline bool quiescent_compare(augtree::ordered_set& s,
                              const oracle_set& oracle, std::string* why) {
  tree_audit a = audit(s);
  std::ostringstream os;
  bool ok = true;
  if (a.keys != oracle.keys()) {
    ok = false;
    os << "key sets differ (tree " << a.keys.size() << " keys, oracle "
       << oracle.size() << "); ";
  }
  if (!a.structure_ok(s.options().balanced)) {
    ok = false;
    os << "structure: " << a.detail << " red_red=" << a.red_red
       << " overweight=" << a.overweight << "; ";
  }
  if (s.options().balanced && !a.height_bound_ok()) {
    ok = false;
    os << "height " << a.height << " over bound for n=" << a.keys.size()
       << "; ";
  }
  if (s.size() != oracle.size()) {
    ok = false;
    os << "root size " << s.size() << " != oracle " << oracle.size() << "; ";
  }
  if (!ok && why) *why = os.str();
  return ok;
}

}  // namespace testsup
