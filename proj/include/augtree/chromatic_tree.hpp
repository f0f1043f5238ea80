#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

#include "augtree/common.hpp"
#include "augtree/epoch.hpp"
#include "augtree/llx_scx.hpp"
#include "augtree/options.hpp"
#include "augtree/version.hpp"

// Leaf-oriented balanced search tree. Internal nodes carry routing keys
// (descend left iff k < key); every key lives in exactly one leaf. Balance is
// tracked by per-node weights: weight 0 is red, 1 is black, 2 and up is
// overweight. All root-to-leaf paths inside the data subtree have equal
// weight sums, which bounds the height once the two violation kinds (a red
// node with a red child, an overweight node) have been repaired.
//
// Every mutation is a single scx replacing one child pointer with a freshly
// built patch of nodes, so concurrent readers always see a consistent tree.
// Rebalancing fixes the topmost violation on the updated key's search path
// and rescans; each patch either removes a violation or moves one strictly
// closer to the root, where the fixed-weight sentinel absorbs it.

namespace augtree {

class chromatic_tree {
 public:
  chromatic_tree(epoch_domain& dom, tree_stats& stats, const set_options& opt)
      : dom_(dom), stats_(stats), opt_(opt) {
    node* dl = new node(kSentinelKey, 1, nullptr, nullptr,
                        make_leaf_version(kSentinelKey));
    node* dr = new node(kSentinelKey, 1, nullptr, nullptr,
                        make_leaf_version(kSentinelKey));
    root_ = new node(kSentinelKey, 1, dl, dr, nullptr);
  }

  chromatic_tree(const chromatic_tree&) = delete;
  chromatic_tree& operator=(const chromatic_tree&) = delete;

  ~chromatic_tree() {
    epoch_domain::guard g(dom_);
    std::vector<node*> st;
    st.push_back(root_);
    while (!st.empty()) {
      node* n = st.back();
      st.pop_back();
      if (node* c = n->load_child(0)) st.push_back(c);
      if (node* c = n->load_child(1)) st.push_back(c);
      dom_.retire(n, &node_deleter);
    }
  }

  node* root() const noexcept { return root_; }
  epoch_domain& domain() noexcept { return dom_; }
  tree_stats& stats() noexcept { return stats_; }
  const set_options& options() const noexcept { return opt_; }

  struct locate {
    node* leaf = nullptr;
    node* parent = nullptr;
    node* gparent = nullptr;
    int dir_p = 0;   // parent -> leaf
    int dir_gp = 0;  // gparent -> parent
  };

  // Descends to the leaf whose range covers k. When path is given it
  // receives the internal nodes visited, root first.
  locate search(key_type k, std::vector<node*>* path = nullptr) const {
    locate loc;
    node* gp = nullptr;
    int dgp = 0;
    node* p = nullptr;
    int dp = 0;
    node* x = root_;
    while (!x->is_leaf()) {
      if (path) path->push_back(x);
      gp = p;
      dgp = dp;
      p = x;
      dp = k < x->key ? 0 : 1;
      x = x->load_child(dp);
    }
    loc.leaf = x;
    loc.parent = p;
    loc.gparent = gp;
    loc.dir_p = dp;
    loc.dir_gp = dgp;
    return loc;
  }

  bool contains(key_type k) const { return search(k).leaf->key == k; }

  // Structural insert, no rebalancing or propagation. path receives the
  // search path of the attempt that decided the outcome.
  bool insert(key_type k, std::vector<node*>& path) {
    for (;;) {
      path.clear();
      locate loc = search(k, &path);
      if (loc.leaf->key == k) return false;
      llx_result rp = llx(loc.parent, stats_);
      if (rp.status != llx_status::ok) continue;
      if ((loc.dir_p == 0 ? rp.snap.left : rp.snap.right) != loc.leaf)
        continue;
      llx_result rl = llx(loc.leaf, stats_);
      if (rl.status != llx_status::ok) continue;

      std::uint32_t w = 1;
      if (opt_.balanced && loc.parent != root_) w = loc.leaf->weight - 1;
      node* nk = new node(k, 1, nullptr, nullptr, make_leaf_version(k));
      node* nl = new node(loc.leaf->key, 1, nullptr, nullptr,
                          make_leaf_version(loc.leaf->key));
      node* ni = k < loc.leaf->key
                     ? new node(loc.leaf->key, w, nk, nl, nullptr)
                     : new node(k, w, nl, nk, nullptr);
      llx_snapshot vs[2] = {rp.snap, rl.snap};
      node* fresh[3] = {ni, nk, nl};
      if (run_patch(vs, 2, loc.dir_p, ni, fresh, 3)) return true;
    }
  }

  // Structural erase. The leaf, its parent, and its sibling are replaced by
  // a single copy of the sibling carrying the combined weight.
  bool erase(key_type k, std::vector<node*>& path) {
    for (;;) {
      path.clear();
      locate loc = search(k, &path);
      if (loc.leaf->key != k) return false;
      assert(loc.gparent != nullptr);
      llx_result rg = llx(loc.gparent, stats_);
      if (rg.status != llx_status::ok) continue;
      if ((loc.dir_gp == 0 ? rg.snap.left : rg.snap.right) != loc.parent)
        continue;
      llx_result rp = llx(loc.parent, stats_);
      if (rp.status != llx_status::ok) continue;
      if ((loc.dir_p == 0 ? rp.snap.left : rp.snap.right) != loc.leaf)
        continue;
      node* sib = loc.dir_p == 0 ? rp.snap.right : rp.snap.left;
      llx_result rs = llx(sib, stats_);
      if (rs.status != llx_status::ok) continue;
      llx_result rl = llx(loc.leaf, stats_);
      if (rl.status != llx_status::ok) continue;

      std::uint32_t w = 1;
      if (opt_.balanced && loc.gparent != root_)
        w = loc.parent->weight + sib->weight;
      node* repl = copy_with_weight(sib, rs.snap, w);
      llx_snapshot vs[4] = {rg.snap, rp.snap, rs.snap, rl.snap};
      node* fresh[1] = {repl};
      if (run_patch(vs, 4, loc.dir_gp, repl, fresh, 1)) return true;
    }
  }

  // Repairs every violation on k's search path, topmost first, restarting
  // the scan after each applied patch. Returns once a full descent finds the
  // path clean.
  void cleanup(key_type k) {
    if (!opt_.balanced) return;
    for (;;) {
      fix_outcome o = try_fix_path(k);
      if (o == fix_outcome::clean) return;
      if (o == fix_outcome::applied)
        stats_.rebalance_steps.fetch_add(1, std::memory_order_relaxed);
    }
  }

 private:
  enum class fix_outcome { applied, clean, conflict };

  static node* mk_internal(key_type key, std::uint32_t w, node* c0, node* c1) {
    return new node(key, w, c0, c1, nullptr);
  }

  static node* copy_with_weight(node* src, const llx_snapshot& s,
                                std::uint32_t w) {
    if (s.left == nullptr)
      return new node(src->key, w, nullptr, nullptr,
                      make_leaf_version(src->key));
    return new node(src->key, w, s.left, s.right, nullptr);
  }

  static void destroy_unpublished(node* n) {
    if (version* v = n->ver.load(std::memory_order_relaxed)) delete v;
    delete n;
  }

  // Common scx shape shared by all mutations: vs[0] is the node whose child
  // pointer swings to repl, every other vs entry leaves the tree. On commit
  // the owner retires the removed nodes; on failure the unpublished
  // replacement nodes are destroyed.
  bool run_patch(const llx_snapshot* vs, int n, int target_dir, node* repl,
                 node* const* fresh, int nfresh) {
    scx_args args;
    args.v = vs;
    args.n = n;
    args.finalize[0] = false;
    for (int i = 1; i < n; ++i) args.finalize[i] = true;
    args.target_index = 0;
    args.dir = target_dir;
    args.new_child = repl;
    if (scx(dom_, stats_, args)) {
      for (int i = 1; i < n; ++i) dom_.retire(vs[i].n, &node_deleter);
      return true;
    }
    for (int i = 0; i < nfresh; ++i) destroy_unpublished(fresh[i]);
    return false;
  }

  fix_outcome try_fix_path(key_type k) {
    node* ggp = nullptr;
    node* gp = nullptr;
    node* p = root_;
    int dir = k < root_->key ? 0 : 1;
    node* x = root_->load_child(dir);
    for (;;) {
      if (x->weight >= 2) return fix_overweight(x, p, gp, ggp, dir);
      if (x->weight == 0 && p->weight == 0) return fix_red_red(p, gp, ggp);
      if (x->is_leaf()) return fix_outcome::clean;
      ggp = gp;
      gp = p;
      p = x;
      dir = k < x->key ? 0 : 1;
      x = x->load_child(dir);
    }
  }

  // Replaces d, a child of the root, by a weight-1 copy. Legal because the
  // sentinel root is the head of every data path, so the shift is uniform.
  fix_outcome clamp_at_root(node* d) {
    llx_result rr = llx(root_, stats_);
    if (rr.status != llx_status::ok) return fix_outcome::conflict;
    int dir = rr.snap.left == d ? 0 : rr.snap.right == d ? 1 : -1;
    if (dir < 0) return fix_outcome::conflict;
    llx_result rd = llx(d, stats_);
    if (rd.status != llx_status::ok) return fix_outcome::conflict;
    node* nd = copy_with_weight(d, rd.snap, 1);
    llx_snapshot vs[2] = {rr.snap, rd.snap};
    node* fresh[1] = {nd};
    return run_patch(vs, 2, dir, nd, fresh, 1) ? fix_outcome::applied
                                               : fix_outcome::conflict;
  }

  // d is red with at least one red child; e = parent(d), f = parent(e).
  // Resolution: recolor when d's sibling is red too, otherwise rotate the
  // red pair upward (single rotation when d's outside child is red, double
  // rotation through the inside child otherwise). Rotations never leave a
  // red-red or overweight pair behind anywhere except at nodes that already
  // carried one, so repair stays confined to search paths that cross them.
  fix_outcome fix_red_red(node* d, node* e, node* f) {
    if (e == root_) return clamp_at_root(d);
    llx_result rf = llx(f, stats_);
    if (rf.status != llx_status::ok) return fix_outcome::conflict;
    int dir_fe = rf.snap.left == e ? 0 : rf.snap.right == e ? 1 : -1;
    if (dir_fe < 0) return fix_outcome::conflict;
    llx_result re = llx(e, stats_);
    if (re.status != llx_status::ok) return fix_outcome::conflict;
    int dir_ed = re.snap.left == d ? 0 : re.snap.right == d ? 1 : -1;
    if (dir_ed < 0) return fix_outcome::conflict;
    node* u = dir_ed == 0 ? re.snap.right : re.snap.left;
    llx_result rd = llx(d, stats_);
    if (rd.status != llx_status::ok) return fix_outcome::conflict;
    assert(e->weight >= 1);

    if (u->weight == 0) {
      // Both of e's children red: push e's weight down onto them.
      llx_result ru = llx(u, stats_);
      if (ru.status != llx_status::ok) return fix_outcome::conflict;
      node* nd = copy_with_weight(d, rd.snap, 1);
      node* nu = copy_with_weight(u, ru.snap, 1);
      node* ek[2];
      ek[dir_ed] = nd;
      ek[1 - dir_ed] = nu;
      node* ne = mk_internal(e->key, e->weight - 1, ek[0], ek[1]);
      llx_snapshot vs[4] = {rf.snap, re.snap, rd.snap, ru.snap};
      node* fresh[3] = {ne, nd, nu};
      return run_patch(vs, 4, dir_fe, ne, fresh, 3) ? fix_outcome::applied
                                                    : fix_outcome::conflict;
    }

    node* out = dir_ed == 0 ? rd.snap.left : rd.snap.right;
    node* in = dir_ed == 0 ? rd.snap.right : rd.snap.left;
    if (out != nullptr && out->weight == 0) {
      // Single rotation lifting d over e; d's red outside child rides along
      // under d's full weight, so it stops violating.
      node* ek[2];
      ek[dir_ed] = in;
      ek[1 - dir_ed] = u;
      node* ne = mk_internal(e->key, 0, ek[0], ek[1]);
      node* dk[2];
      dk[dir_ed] = out;
      dk[1 - dir_ed] = ne;
      node* nd = mk_internal(d->key, e->weight, dk[0], dk[1]);
      llx_snapshot vs[3] = {rf.snap, re.snap, rd.snap};
      node* fresh[2] = {nd, ne};
      return run_patch(vs, 3, dir_fe, nd, fresh, 2) ? fix_outcome::applied
                                                    : fix_outcome::conflict;
    }
    if (in != nullptr && in->weight == 0) {
      // Double rotation lifting the inside grandchild between d and e.
      llx_result rc = llx(in, stats_);
      if (rc.status != llx_status::ok) return fix_outcome::conflict;
      node* cl = rc.snap.left;
      node* cr = rc.snap.right;
      node* dk[2];
      dk[dir_ed] = out;
      dk[1 - dir_ed] = dir_ed == 0 ? cl : cr;
      node* nd = mk_internal(d->key, 0, dk[0], dk[1]);
      node* ek[2];
      ek[dir_ed] = dir_ed == 0 ? cr : cl;
      ek[1 - dir_ed] = u;
      node* ne = mk_internal(e->key, 0, ek[0], ek[1]);
      node* ck[2];
      ck[dir_ed] = nd;
      ck[1 - dir_ed] = ne;
      node* nc = mk_internal(in->key, e->weight, ck[0], ck[1]);
      llx_snapshot vs[4] = {rf.snap, re.snap, rd.snap, rc.snap};
      node* fresh[3] = {nc, nd, ne};
      return run_patch(vs, 4, dir_fe, nc, fresh, 3) ? fix_outcome::applied
                                                    : fix_outcome::conflict;
    }
    // Neither child of d is red anymore; the shape moved on under us.
    return fix_outcome::conflict;
  }

  // v has weight >= 2; p = parent(v), gp/ggp above. dir_pv = direction from
  // p to v. A red parent or red sibling is handled as a red pair first; a
  // black sibling either donates weight (recolor) or a red nephew is rotated
  // over to absorb it.
  fix_outcome fix_overweight(node* v, node* p, node* gp, node* ggp,
                             int dir_pv) {
    if (p == root_) return clamp_at_root(v);
    llx_result rg = llx(gp, stats_);
    if (rg.status != llx_status::ok) return fix_outcome::conflict;
    int dir_gp = rg.snap.left == p ? 0 : rg.snap.right == p ? 1 : -1;
    if (dir_gp < 0) return fix_outcome::conflict;
    llx_result rp = llx(p, stats_);
    if (rp.status != llx_status::ok) return fix_outcome::conflict;
    if ((dir_pv == 0 ? rp.snap.left : rp.snap.right) != v)
      return fix_outcome::conflict;
    node* s = dir_pv == 0 ? rp.snap.right : rp.snap.left;

    if (p->weight == 0 && s->weight == 0) return fix_red_red(p, gp, ggp);

    if (s->weight == 0) {
      llx_result rs = llx(s, stats_);
      if (rs.status != llx_status::ok) return fix_outcome::conflict;
      node* near = dir_pv == 0 ? rs.snap.left : rs.snap.right;
      node* far = dir_pv == 0 ? rs.snap.right : rs.snap.left;
      assert(near != nullptr && far != nullptr);
      if (near->weight == 0 || far->weight == 0)
        return fix_red_red(s, p, gp);
      // Rotate the red sibling over v; v gains a red parent and a
      // weight-for-weight sibling, making one of the other cases apply.
      node* pk[2];
      pk[dir_pv] = v;
      pk[1 - dir_pv] = near;
      node* np = mk_internal(p->key, 0, pk[0], pk[1]);
      node* sk[2];
      sk[dir_pv] = np;
      sk[1 - dir_pv] = far;
      node* ns = mk_internal(s->key, p->weight, sk[0], sk[1]);
      llx_snapshot vs[3] = {rg.snap, rp.snap, rs.snap};
      node* fresh[2] = {ns, np};
      return run_patch(vs, 3, dir_gp, ns, fresh, 2) ? fix_outcome::applied
                                                    : fix_outcome::conflict;
    }

    llx_result rv = llx(v, stats_);
    if (rv.status != llx_status::ok) return fix_outcome::conflict;
    llx_result rs = llx(s, stats_);
    if (rs.status != llx_status::ok) return fix_outcome::conflict;
    node* near = dir_pv == 0 ? rs.snap.left : rs.snap.right;
    node* far = dir_pv == 0 ? rs.snap.right : rs.snap.left;

    if (s->weight == 1 && far != nullptr && far->weight == 0) {
      // Far nephew red: rotate s over p, blackening the nephew; v sheds one.
      llx_result rfar = llx(far, stats_);
      if (rfar.status != llx_status::ok) return fix_outcome::conflict;
      node* nv = copy_with_weight(v, rv.snap, v->weight - 1);
      node* nfar = copy_with_weight(far, rfar.snap, 1);
      node* pk[2];
      pk[dir_pv] = nv;
      pk[1 - dir_pv] = near;
      node* np = mk_internal(p->key, 1, pk[0], pk[1]);
      node* sk[2];
      sk[dir_pv] = np;
      sk[1 - dir_pv] = nfar;
      node* ns = mk_internal(s->key, p->weight, sk[0], sk[1]);
      llx_snapshot vs[5] = {rg.snap, rp.snap, rv.snap, rs.snap, rfar.snap};
      node* fresh[4] = {ns, np, nv, nfar};
      return run_patch(vs, 5, dir_gp, ns, fresh, 4) ? fix_outcome::applied
                                                    : fix_outcome::conflict;
    }
    if (s->weight == 1 && near != nullptr && near->weight == 0) {
      // Near nephew red: lift it between p and s; v sheds one.
      llx_result rn = llx(near, stats_);
      if (rn.status != llx_status::ok) return fix_outcome::conflict;
      node* nv = copy_with_weight(v, rv.snap, v->weight - 1);
      node* pk[2];
      pk[dir_pv] = nv;
      pk[1 - dir_pv] = dir_pv == 0 ? rn.snap.left : rn.snap.right;
      node* np = mk_internal(p->key, 1, pk[0], pk[1]);
      node* sk[2];
      sk[dir_pv] = dir_pv == 0 ? rn.snap.right : rn.snap.left;
      sk[1 - dir_pv] = far;
      node* ns = mk_internal(s->key, 1, sk[0], sk[1]);
      node* nk[2];
      nk[dir_pv] = np;
      nk[1 - dir_pv] = ns;
      node* nn = mk_internal(near->key, p->weight, nk[0], nk[1]);
      llx_snapshot vs[5] = {rg.snap, rp.snap, rv.snap, rs.snap, rn.snap};
      node* fresh[4] = {nn, np, ns, nv};
      return run_patch(vs, 5, dir_gp, nn, fresh, 4) ? fix_outcome::applied
                                                    : fix_outcome::conflict;
    }

    // Sibling can donate: v and s each shed one unit onto p.
    assert(!(s->weight == 1 && rs.snap.left == nullptr));
    node* nv = copy_with_weight(v, rv.snap, v->weight - 1);
    node* ns = copy_with_weight(s, rs.snap, s->weight - 1);
    node* pk[2];
    pk[dir_pv] = nv;
    pk[1 - dir_pv] = ns;
    node* np = mk_internal(p->key, p->weight + 1, pk[0], pk[1]);
    llx_snapshot vs[4] = {rg.snap, rp.snap, rv.snap, rs.snap};
    node* fresh[3] = {np, nv, ns};
    return run_patch(vs, 4, dir_gp, np, fresh, 3) ? fix_outcome::applied
                                                  : fix_outcome::conflict;
  }

  epoch_domain& dom_;
  tree_stats& stats_;
  set_options opt_;
  node* root_;
};

}  // namespace augtree
