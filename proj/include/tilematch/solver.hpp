#pragma once

// Winnability: random rollouts first, then an exhaustive search over the
// pairings of the groups, with forced moves, a relaxation scan that cuts
// provably dead branches, a table of dead states and randomized restarts.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rules.hpp"

namespace tilematch {

enum class Verdict { winnable, impossible, aborted };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::winnable: return "winnable";
    case Verdict::impossible: return "impossible";
    case Verdict::aborted: return "aborted";
  }
  return "?";
}

// Number of complete (4-tile) groups; the short group does not count.
inline int full_groups(const GroupAssignment& ga) {
  int k = 0;
  for (const auto& g : ga.groups) k += g.members.size() == 4;
  return k;
}

// round(base^(6 sqrt k)), base 1.15 for Shisen-Sho and 1.2 for Mahjong
// Solitaire, at least 1.
inline std::uint64_t rollout_attempts(int k, RuleKind kind) {
  const double base = kind == RuleKind::shisen ? 1.15 : 1.2;
  const double n = std::round(std::pow(base, 6.0 * std::sqrt(double(k))));
  return n < 1 ? 1 : std::uint64_t(n);
}

struct RolloutPolicy {
  std::uint64_t attempts = 1;
  std::uint64_t seed = 0;

  static RolloutPolicy for_groups(int k, RuleKind kind, std::uint64_t seed) {
    return {rollout_attempts(k, kind), seed};
  }
};

struct Limits {
  std::uint64_t max_nodes = 100'000'000;
  std::optional<std::chrono::milliseconds> max_time;
};

struct SolveOptions {
  Limits limits;
  bool transpositions = true;
  bool prune = true;
  // Scan every pairing of every open group and bind groups left with one.
  bool probe = true;
  // Node budget unit for restarts with a Luby schedule; 0 runs one search.
  std::uint64_t restart_unit = 256;
  // Entries kept in the transposition table; later dead positions are not stored.
  std::size_t max_table_entries = std::size_t{1} << 22;
};

struct SolveResult {
  Verdict verdict = Verdict::impossible;
  std::vector<Move> witness;
  std::uint64_t nodes = 0;
  std::uint64_t table_hits = 0;
  std::uint64_t pruned = 0;
  std::uint64_t restarts = 0;
  std::uint64_t rollout_attempts = 0;
  bool by_rollout = false;
};

// ---------------------------------------------------------------------------
// Transposition table

// Open-addressing set of occupancy bitsets. Keys are hashed to 128 bits; a
// probe matches only when both hash lanes and the full bitset agree.
class SignatureSet {
 public:
  explicit SignatureSet(std::size_t words, std::size_t max_entries = std::size_t{1} << 22)
      : words_(words), max_entries_(max_entries) {}

  std::size_t size() const noexcept { return count_; }

  bool contains(std::span<const std::uint64_t> key) const noexcept {
    if (capacity_ == 0) return false;
    const auto [h1, h2] = hash(key);
    for (std::size_t i = h1 & (capacity_ - 1);; i = (i + 1) & (capacity_ - 1)) {
      if (lane1_[i] == 0) return false;
      if (lane1_[i] == h1 && lane2_[i] == h2 && equal(i, key)) return true;
    }
  }

  // Returns false when the key was present or the table is full.
  bool insert(std::span<const std::uint64_t> key) {
    if (count_ >= max_entries_) return false;
    if ((count_ + 1) * 2 > capacity_) grow();
    const auto [h1, h2] = hash(key);
    std::size_t i = h1 & (capacity_ - 1);
    for (; lane1_[i] != 0; i = (i + 1) & (capacity_ - 1))
      if (lane1_[i] == h1 && lane2_[i] == h2 && equal(i, key)) return false;
    lane1_[i] = h1;
    lane2_[i] = h2;
    std::copy(key.begin(), key.end(), keys_.begin() + std::ptrdiff_t(i * words_));
    ++count_;
    return true;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::pair<std::uint64_t, std::uint64_t> hash(std::span<const std::uint64_t> key) noexcept {
    std::uint64_t a = 0x243f6a8885a308d3ull, b = 0x13198a2e03707344ull;
    for (auto w : key) {
      a = mix(a ^ w);
      b = mix(b + w * 0x9e3779b97f4a7c15ull);
    }
    return {a | 1, b};  // lane 1 is never 0, which marks empty buckets
  }

  bool equal(std::size_t i, std::span<const std::uint64_t> key) const noexcept {
    return std::equal(key.begin(), key.end(), keys_.begin() + std::ptrdiff_t(i * words_));
  }

  void grow() {
    const std::size_t old_capacity = capacity_;
    auto old1 = std::move(lane1_);
    auto old2 = std::move(lane2_);
    auto old_keys = std::move(keys_);
    capacity_ = capacity_ ? capacity_ * 2 : 1024;
    lane1_.assign(capacity_, 0);
    lane2_.assign(capacity_, 0);
    keys_.assign(capacity_ * words_, 0);
    for (std::size_t j = 0; j < old_capacity; ++j) {
      if (old1[j] == 0) continue;
      std::size_t i = old1[j] & (capacity_ - 1);
      while (lane1_[i] != 0) i = (i + 1) & (capacity_ - 1);
      lane1_[i] = old1[j];
      lane2_[i] = old2[j];
      std::copy_n(old_keys.begin() + std::ptrdiff_t(j * words_), words_, keys_.begin() + std::ptrdiff_t(i * words_));
    }
  }

  std::size_t words_;
  std::size_t max_entries_;
  std::size_t capacity_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> lane1_, lane2_, keys_;
};

// ---------------------------------------------------------------------------
// Pairings

// The three ways to split a group of four into two pairs, by member index.
inline constexpr int kPairings[3][2][2] = {{{0, 1}, {2, 3}}, {{0, 2}, {1, 3}}, {{0, 3}, {1, 2}}};

// Per group: -1 while open, else the index of the pairing the group is bound to.
using Commitments = std::vector<std::int8_t>;

// A set of commitments, each as the literal 3 * group + pairing.
class LiteralSet {
 public:
  explicit LiteralSet(std::size_t literals = 0) : w_((literals + 63) / 64, 0) {}

  void set(int lit) { w_[std::size_t(lit) >> 6] |= std::uint64_t{1} << (lit & 63); }
  void reset(int lit) { w_[std::size_t(lit) >> 6] &= ~(std::uint64_t{1} << (lit & 63)); }
  bool test(int lit) const { return (w_[std::size_t(lit) >> 6] >> (lit & 63)) & 1u; }
  void clear() { std::fill(w_.begin(), w_.end(), 0); }

  LiteralSet& operator|=(const LiteralSet& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
    return *this;
  }

  // Literals of every bound group.
  static LiteralSet of(const Commitments& bound) {
    LiteralSet s(bound.size() * 3);
    for (std::size_t g = 0; g < bound.size(); ++g)
      if (bound[g] >= 0) s.set(int(3 * g) + bound[g]);
    return s;
  }

  friend bool operator==(const LiteralSet&, const LiteralSet&) = default;

 private:
  std::vector<std::uint64_t> w_;
};

// ---------------------------------------------------------------------------
// Prune scan

namespace detail {

// Plays the relaxation on the board itself; works for every rule. On failure,
// `culprits` receives the commitments that keep the stuck state stuck: bound
// groups that could move if they were open. Those commitments alone already
// make the scan fail from the position the search started in.
inline bool generic_clearing_scan(Board& b, const Rules& rules, const Commitments& bound,
                                  LiteralSet* culprits = nullptr) {
  const std::size_t mark = b.history().size();
  const int ng = b.num_groups();
  std::vector<char> loose(std::size_t(ng), 0);
  bool changed = true;
  while (changed && !b.empty()) {
    changed = false;
    for (int g = 0; g < ng; ++g) {
      const int left = b.remaining(g);
      if (left == 0) continue;
      const auto& m = b.group(g).members;
      if (loose[std::size_t(g)]) {
        for (int t : m) {
          if (!b.occupied(t)) continue;
          for (int u : m)
            if (u != t && connects_to_position(b, t, u, rules)) {
              b.play(Move::lone(t));
              changed = true;
              break;
            }
        }
      } else if (left == 4 && bound[std::size_t(g)] >= 0) {
        for (const auto& e : kPairings[bound[std::size_t(g)]]) {
          const int x = m[std::size_t(e[0])], y = m[std::size_t(e[1])];
          if (b.occupied(x) && pair_playable(b, x, y, rules)) {
            b.play(Move::pair_of(x, y));
            changed = true;
          }
        }
      } else {
        bool done = false;
        for (std::size_t i = 0; i < m.size() && !done; ++i)
          for (std::size_t j = i + 1; j < m.size() && !done; ++j)
            if (pair_playable(b, m[i], m[j], rules)) {
              b.play(Move::pair_of(m[i], m[j]));
              loose[std::size_t(g)] = left == 4;
              done = changed = true;
            }
      }
    }
  }
  const bool clearable = b.empty();
  if (!clearable && culprits) {
    culprits->clear();
    for (int g = 0; g < ng; ++g) {
      const int left = b.remaining(g);
      if (bound[std::size_t(g)] < 0 || left == 0) continue;
      const auto& m = b.group(g).members;
      bool moves = false;
      for (int t : m)
        for (int u : m) {
          if (moves || t == u || !b.occupied(t)) continue;
          moves = left == 4 ? b.occupied(u) && pair_playable(b, t, u, rules) : connects_to_position(b, t, u, rules);
        }
      if (moves) culprits->set(3 * g + bound[std::size_t(g)]);
    }
  }
  b.undo_to(mark);
  return clearable;
}


// Tiles that block each tile's freedom: from above, and on either side (left
// and right, or front and rear for the transposed rule). Fixed by the layout.
class FreedomGraph {
 public:
  enum Side : std::uint8_t { above, side_a, side_b };
  struct Edge {
    int tile;
    Side side;
  };

  FreedomGraph(const Layout& layout, const Rules& rules) : blocks_(layout.size()) {
    auto covers = [](const Slot& u, int row, int col) {
      return row >= u.row && row <= u.row + 1 && col >= u.col && col <= u.col + 1;
    };
    const bool transposed = rules.kind == RuleKind::mahjong_transposed;
    for (std::size_t ui = 0; ui < layout.size(); ++ui) {
      const Slot& u = layout.slots[ui];
      for (std::size_t vi = 0; vi < layout.size(); ++vi) {
        const Slot& v = layout.slots[vi];
        if (ui == vi) continue;
        const bool overlap = std::abs(u.row - v.row) <= 1 && std::abs(u.col - v.col) <= 1;
        const bool high = rules.free_variant == FreeVariant::pillar_above ? u.level > v.level : u.level == v.level + 1;
        if (high && overlap) {
          blocks_[ui].push_back({int(vi), above});
          continue;
        }
        if (u.level != v.level) continue;
        bool a, b;
        if (transposed) {
          a = covers(u, v.row - 1, v.col) || covers(u, v.row - 1, v.col + 1);
          b = covers(u, v.row + 2, v.col) || covers(u, v.row + 2, v.col + 1);
        } else {
          a = covers(u, v.row, v.col - 1) || covers(u, v.row + 1, v.col - 1);
          b = covers(u, v.row, v.col + 2) || covers(u, v.row + 1, v.col + 2);
        }
        if (a) blocks_[ui].push_back({int(vi), side_a});
        if (b) blocks_[ui].push_back({int(vi), side_b});
      }
    }
  }

  // Tiles whose freedom tile u takes part in.
  const std::vector<Edge>& blocked_by(int u) const { return blocks_[std::size_t(u)]; }

 private:
  std::vector<std::vector<Edge>> blocks_;
};

// The relaxation for the Mahjong rules with blocker counts and a worklist of
// groups to revisit; a tile's freedom only changes when a blocker goes.
class MahjongScan {
 public:
  MahjongScan(const Layout& layout, const Rules& rules) : graph_(layout, rules) {}

  bool operator()(const Board& b, const Commitments& bound, LiteralSet* culprits = nullptr) {
    const int n = int(b.size()), ng = b.num_groups();
    present_.assign(std::size_t(n), 0);
    count_.assign(std::size_t(n) * 3, 0);
    left_.assign(std::size_t(ng), 0);
    loose_.assign(std::size_t(ng), 0);
    queued_.assign(std::size_t(ng), 0);
    queue_.clear();
    int tiles = 0;
    for (int i = 0; i < n; ++i)
      if (b.occupied(i)) {
        present_[std::size_t(i)] = 1;
        ++tiles;
      }
    for (int u = 0; u < n; ++u) {
      if (!present_[std::size_t(u)]) continue;
      for (const auto& e : graph_.blocked_by(u)) ++count_[std::size_t(e.tile) * 3 + e.side];
    }
    for (int g = 0; g < ng; ++g) {
      left_[std::size_t(g)] = std::int8_t(b.remaining(g));
      if (left_[std::size_t(g)]) push(g);
    }
    auto remove = [&](int t) {
      present_[std::size_t(t)] = 0;
      --left_[std::size_t(b.group_of(t))];
      --tiles;
      for (const auto& e : graph_.blocked_by(t)) {
        if (!present_[std::size_t(e.tile)]) continue;
        const bool was = free(e.tile);
        --count_[std::size_t(e.tile) * 3 + e.side];
        if (!was && free(e.tile)) push(b.group_of(e.tile));
      }
    };
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const int g = queue_[head];
      queued_[std::size_t(g)] = 0;
      const auto& m = b.group(g).members;
      if (!loose_[std::size_t(g)] && left_[std::size_t(g)] == 4 && bound[std::size_t(g)] >= 0) {
        for (const auto& e : kPairings[bound[std::size_t(g)]]) {
          const int x = m[std::size_t(e[0])], y = m[std::size_t(e[1])];
          if (present_[std::size_t(x)] && present_[std::size_t(y)] && free(x) && free(y)) {
            remove(x);
            remove(y);
          }
        }
        continue;
      }
      if (!loose_[std::size_t(g)]) {
        int f[4], k = 0;
        for (int t : m)
          if (present_[std::size_t(t)] && free(t)) f[k++] = t;
        if (k < 2) continue;
        loose_[std::size_t(g)] = left_[std::size_t(g)] == 4;
        remove(f[0]);
        remove(f[1]);
      }
      if (loose_[std::size_t(g)])
        for (int t : m)
          if (present_[std::size_t(t)] && free(t)) remove(t);
    }
    if (tiles != 0 && culprits) {
      // released, a group of 4 moves with two free tiles and a group of 2
      // (which lost a pair) with one
      culprits->clear();
      for (int g = 0; g < ng; ++g) {
        const int left = left_[std::size_t(g)];
        if (bound[std::size_t(g)] < 0 || left == 0) continue;
        int f = 0;
        for (int t : b.group(g).members) f += present_[std::size_t(t)] && free(t);
        if (f >= (left == 4 ? 2 : 1)) culprits->set(3 * g + bound[std::size_t(g)]);
      }
    }
    return tiles == 0;
  }

 private:
  bool free(int t) const {
    const std::size_t k = std::size_t(t) * 3;
    return count_[k] == 0 && (count_[k + 1] == 0 || count_[k + 2] == 0);
  }

  void push(int g) {
    if (queued_[std::size_t(g)]) return;
    queued_[std::size_t(g)] = 1;
    queue_.push_back(g);
  }

  FreedomGraph graph_;
  std::vector<char> present_, loose_, queued_;
  std::vector<std::int8_t> left_;
  std::vector<int> count_;
  std::vector<int> queue_;
};

}  // namespace detail

// The relaxation scan bound to one board's layout and rule; Mahjong rules use
// the incremental variant.
class ClearingScan {
 public:
  ClearingScan(const Board& b, const Rules& rules) : rules_(rules) {
    if (rules.kind != RuleKind::shisen) mahjong_.emplace(b.layout(), rules);
  }

  bool operator()(Board& b, const Commitments& bound, LiteralSet* culprits = nullptr) {
    if (mahjong_) return (*mahjong_)(b, bound, culprits);
    return detail::generic_clearing_scan(b, rules_, bound, culprits);
  }

 private:
  Rules rules_;
  std::optional<detail::MahjongScan> mahjong_;
};

// Relaxed clearing pass. An open group of 4 must first lose a real playable
// pair; its last two tiles may then go one at a time, each as soon as it
// connects to the position of another tile of its group, present or already
// removed. A bound group of 4 loses only the pairs of its pairing, and a group
// down to 2 tiles needs a real playable pair. Removals never hurt here, so the
// greedy fixpoint decides the relaxation. False means the position cannot be
// cleared under the given commitments. The board is restored before returning.
inline bool clearing_scan(Board& b, const Rules& rules, const Commitments& bound) {
  return ClearingScan(b, rules)(b, bound);
}

// The scan with every group open.
inline bool prune_scan(Board& b, const Rules& rules) {
  return clearing_scan(b, rules, Commitments(std::size_t(b.num_groups()), -1));
}

// ---------------------------------------------------------------------------
// Forced moves

// Plays moves that never lose: the last two tiles of a group when they form
// a playable pair, the pairs of a bound group as they become playable, and
// two disjoint playable pairs covering a whole group of four. Any winning
// line that respects the commitments stays winning because removing tiles
// only opens lines and frees tiles. Returns the number of moves played.
inline int play_forced_moves(Board& b, const Rules& rules, const Commitments* bound = nullptr) {
  int played = 0;
  auto take = [&](int x, int y) {
    if (!b.occupied(x) || !b.occupied(y) || !pair_playable(b, x, y, rules)) return false;
    b.play(Move::pair_of(x, y));
    ++played;
    return true;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (int g = 0; g < b.num_groups(); ++g) {
      const int left = b.remaining(g);
      const auto& m = b.group(g).members;
      if (left == 2) {
        int p[2], n = 0;
        for (int s : m)
          if (b.occupied(s)) p[n++] = s;
        changed |= take(p[0], p[1]);
      } else if (left == 4 && bound && (*bound)[std::size_t(g)] >= 0) {
        for (const auto& e : kPairings[(*bound)[std::size_t(g)]])
          changed |= take(m[std::size_t(e[0])], m[std::size_t(e[1])]);
      } else if (left == 4) {
        for (const auto& pr : kPairings) {
          const int a = m[std::size_t(pr[0][0])], c = m[std::size_t(pr[0][1])];
          const int d = m[std::size_t(pr[1][0])], e = m[std::size_t(pr[1][1])];
          if (pair_playable(b, a, c, rules) && pair_playable(b, d, e, rules)) {
            take(a, c);
            take(d, e);
            changed = true;
            break;
          }
        }
      }
    }
  }
  return played;
}

// ---------------------------------------------------------------------------
// Rollouts

// Up to policy.attempts random playouts, each choosing uniformly among the
// playable pairs. Returns the first playout that empties the board. The board
// is restored after every playout.
inline std::optional<std::vector<Move>> rollout(Board& b, const Rules& rules, const RolloutPolicy& policy,
                                                std::uint64_t* attempts_used = nullptr) {
  const std::size_t mark = b.history().size();
  SplitMix64 rng(policy.seed);
  std::optional<std::vector<Move>> found;
  std::uint64_t attempt = 0;
  while (attempt < policy.attempts && !found) {
    ++attempt;
    for (;;) {
      auto moves = enumerate_playable_pairs(b, rules);
      if (moves.empty()) break;
      b.play(moves[rng.below(moves.size())]);
    }
    if (b.empty()) found.emplace(b.history().begin() + std::ptrdiff_t(mark), b.history().end());
    b.undo_to(mark);
  }
  if (attempts_used) *attempts_used = attempt;
  return found;
}

// ---------------------------------------------------------------------------
// Exhaustive search

namespace detail {

// Depth-first search over pairings. Every group of four is eventually cleared
// as two pairs, one of its three pairings; once a pairing is fixed the
// group's pairs are forced as soon as they are playable. Each node binds one
// open group and branches over its pairings. With every group bound, forced
// play alone decides the position.
class Search {
 public:
  Search(Board& b, const Rules& rules, const SolveOptions& opt)
      : b_(b),
        rules_(rules),
        opt_(opt),
        bound_(std::size_t(b.num_groups()), -1),
        key_words_(b.occupancy_words().size() + (std::size_t(b.num_groups()) * 2 + 63) / 64),
        table_(key_words_, opt.max_table_entries),
        scan_(b, rules),
        culprits_(bound_.size() * 3),
        conflict_(bound_.size() * 3) {
    if (opt_.limits.max_time) deadline_ = std::chrono::steady_clock::now() + *opt_.limits.max_time;
  }

  SolveResult run() {
    const std::size_t base = b_.history().size();
    SolveResult r;
    bool won = false;
    // Luby restarts; dead states stay valid across runs
    for (;;) {
      run_budget_ = opt_.restart_unit ? opt_.restart_unit * luby(restart_ + 1) : 0;
      run_nodes_ = 0;
      aborted_ = run_cut_ = false;
      won = dfs();
      if (won || !run_cut_) break;
      ++restart_;
    }
    if (won) {
      r.verdict = Verdict::winnable;
      r.witness.assign(b_.history().begin() + std::ptrdiff_t(base), b_.history().end());
    } else {
      r.verdict = aborted_ ? Verdict::aborted : Verdict::impossible;
    }
    b_.undo_to(base);
    r.nodes = nodes_;
    r.table_hits = hits_;
    r.pruned = pruned_;
    r.restarts = restart_;
    return r;
  }

 private:
  static std::uint64_t luby(std::uint64_t i) {
    for (std::uint64_t k = 1;; ++k) {
      if (i == (std::uint64_t{1} << k) - 1) return std::uint64_t{1} << (k - 1);
      if (i < (std::uint64_t{1} << k) - 1) return luby(i - (std::uint64_t{1} << (k - 1)) + 1);
    }
  }

  bool out_of_budget() {
    if (run_budget_ && run_nodes_ > run_budget_) return run_cut_ = true;
    if (nodes_ > opt_.limits.max_nodes) return true;
    if (deadline_ && (nodes_ & 63) == 0 && std::chrono::steady_clock::now() > *deadline_) return true;
    return false;
  }

  const std::vector<std::uint64_t>& key() {
    key_.assign(b_.occupancy_words().begin(), b_.occupancy_words().end());
    key_.resize(key_words_, 0);
    const std::size_t off = b_.occupancy_words().size();
    for (std::size_t g = 0; g < bound_.size(); ++g)
      if (b_.remaining(int(g)) == 4)
        key_[off + g / 32] |= std::uint64_t(bound_[g] + 1) << (2 * (g % 32));
    return key_;
  }

  // Pairings of an open group that could still pair it legally. With probing
  // on, a pairing survives only if the scan clears the board under it; `why`
  // collects the commitments that rule out the others.
  int feasible(int g, LiteralSet& why) {
    why.clear();
    if (!opt_.prune || !opt_.probe) return 7;
    int mask = 0;
    for (int p = 0; p < 3; ++p) {
      bound_[std::size_t(g)] = std::int8_t(p);
      if (scan_(b_, bound_, &culprits_)) {
        mask |= 1 << p;
      } else {
        culprits_.reset(3 * g + p);
        why |= culprits_;
      }
    }
    bound_[std::size_t(g)] = -1;
    return mask;
  }

  bool progresses(int g, int p) {
    const auto& m = b_.group(g).members;
    for (const auto& e : kPairings[p])
      if (pair_playable(b_, m[std::size_t(e[0])], m[std::size_t(e[1])], rules_)) return true;
    return false;
  }

  // On failure, conflict_ holds commitments under which the position the
  // node started from has no winning line. A parent whose branch commitment
  // is not among them skips its remaining pairings.
  bool dfs() {
    ++nodes_;
    ++run_nodes_;
    if (out_of_budget()) {
      aborted_ = true;
      return false;
    }
    const std::size_t mark = b_.history().size();
    const Commitments saved = bound_;
    std::vector<std::vector<std::uint64_t>> seen;
    std::vector<int> implied;
    std::vector<LiteralSet> reasons;
    auto fail = [&](LiteralSet k) {
      for (std::size_t i = implied.size(); i-- > 0;)
        if (k.test(implied[i])) {
          k.reset(implied[i]);
          k |= reasons[i];
        }
      conflict_ = std::move(k);
      if (!aborted_ && opt_.transpositions)
        for (const auto& key : seen) table_.insert(key);
      b_.undo_to(mark);
      bound_ = saved;
      return false;
    };

    int branch_group = -1, branch_mask = 0;
    LiteralSet why(bound_.size() * 3), branch_why;
    for (;;) {
      play_forced_moves(b_, rules_, &bound_);
      if (b_.empty()) return true;
      if (opt_.transpositions) {
        if (table_.contains(key())) {
          ++hits_;
          return fail(LiteralSet::of(bound_));
        }
        seen.push_back(key_);
      }
      if (opt_.prune && !scan_(b_, bound_, &culprits_)) {
        ++pruned_;
        return fail(culprits_);
      }
      // bind every group left with a single pairing, else pick a branch group
      bool bound_any = false;
      int best = -1, best_mask = 0, best_score = 0;
      for (int g = 0; g < b_.num_groups(); ++g) {
        if (b_.remaining(g) != 4 || bound_[std::size_t(g)] >= 0) continue;
        const int mask = feasible(g, why);
        const int n = std::popcount(unsigned(mask));
        if (n == 0) {
          ++pruned_;
          return fail(why);
        }
        if (n == 1) {
          bound_[std::size_t(g)] = std::int8_t(std::countr_zero(unsigned(mask)));
          implied.push_back(3 * g + bound_[std::size_t(g)]);
          reasons.push_back(why);
          bound_any = true;
          continue;
        }
        int moving = 0;
        for (int p = 0; p < 3; ++p) moving += (mask >> p & 1) && progresses(g, p);
        // alternate fail-first and progress-first orders between restarts
        int score = restart_ % 2 ? 16 * moving - 4 * n : -16 * n - 4 * moving;
        if (restart_ > 0) score += int(rng_.below(32));
        if (best < 0 || score > best_score) {
          best = g, best_mask = mask, best_score = score;
          branch_why = why;
        }
      }
      if (bound_any) continue;
      branch_group = best;
      branch_mask = best_mask;
      break;
    }
    if (branch_group < 0) return fail(LiteralSet::of(bound_));  // all bound and stuck

    int order[3], n = 0;
    for (int p = 0; p < 3; ++p)
      if ((branch_mask >> p & 1) && progresses(branch_group, p)) order[n++] = p;
    for (int p = 0; p < 3; ++p)
      if ((branch_mask >> p & 1) && !progresses(branch_group, p)) order[n++] = p;
    if (restart_ > 0 && n > 1 && rng_.below(2)) std::swap(order[0], order[1 + rng_.below(std::uint64_t(n - 1))]);
    LiteralSet acc = std::move(branch_why);
    for (int i = 0; i < n; ++i) {
      const int lit = 3 * branch_group + order[i];
      bound_[std::size_t(branch_group)] = std::int8_t(order[i]);
      if (dfs()) return true;
      if (aborted_) break;
      if (!conflict_.test(lit)) {
        ++backjumps_;
        return fail(conflict_);
      }
      conflict_.reset(lit);
      acc |= conflict_;
    }
    return fail(std::move(acc));
  }

  Board& b_;
  const Rules& rules_;
  const SolveOptions& opt_;
  Commitments bound_;
  std::size_t key_words_;
  std::vector<std::uint64_t> key_;
  SignatureSet table_;
  ClearingScan scan_;
  LiteralSet culprits_, conflict_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  std::uint64_t nodes_ = 0, hits_ = 0, pruned_ = 0, backjumps_ = 0;
  std::uint64_t run_nodes_ = 0, run_budget_ = 0, restart_ = 0;
  SplitMix64 rng_{0x6a09e667f3bcc908ull};
  bool aborted_ = false, run_cut_ = false;
};

}  // namespace detail

// Decides the position on `b` (fresh or mid-game). The board is restored.
inline SolveResult solve(Board& b, const Rules& rules, const SolveOptions& options = {}) {
  return detail::Search(b, rules, options).run();
}

// Replays `moves` from the current position, checking each against the rule.
// True when every move is legal and the board ends empty. Restores the board.
inline bool replay_empties(Board& b, const Rules& rules, std::span<const Move> moves) {
  const std::size_t mark = b.history().size();
  bool ok = true;
  for (const Move& m : moves) {
    if (m.kind != MoveKind::pair || !pair_playable(b, m.a, m.b, rules)) {
      ok = false;
      break;
    }
    b.play(m);
  }
  ok = ok && b.empty();
  b.undo_to(mark);
  return ok;
}

// Rollout seed derived from a board seed.
inline std::uint64_t rollout_seed(std::uint64_t board_seed) { return SplitMix64(board_seed ^ 0x5eed5eed5eed5eedull)(); }

// Rollouts, then the exhaustive search when no rollout clears the board.
inline SolveResult winnable(Board& b, const Rules& rules, std::uint64_t seed, const SolveOptions& options = {}) {
  int k = 0;
  for (int g = 0; g < b.num_groups(); ++g) k += b.remaining(g) == 4;
  std::uint64_t used = 0;
  auto policy = RolloutPolicy::for_groups(k, rules.kind, rollout_seed(seed));
  if (auto moves = rollout(b, rules, policy, &used)) {
    SolveResult r;
    r.verdict = Verdict::winnable;
    r.witness = std::move(*moves);
    r.rollout_attempts = used;
    r.by_rollout = true;
    return r;
  }
  auto r = solve(b, rules, options);
  r.rollout_attempts = used;
  return r;
}

inline SolveResult winnable(LayoutPtr layout, const GroupAssignment& ga, std::uint64_t seed, const Rules& rules,
                            const SolveOptions& options = {}) {
  Board b = deal(std::move(layout), ga, seed);
  return winnable(b, rules, seed, options);
}

}  // namespace tilematch
