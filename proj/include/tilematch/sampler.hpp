#pragma once

// Batch winnability sampling with checkpoints and mergeable reports.
//
// Board i of a spec is dealt with seed base_seed + i; shard I of K takes the
// indices i with i % K == I. Reports and checkpoints are key=value text with
// a fixed field order. Wall time is kept out of both, so a resumed run writes
// the same bytes as an uninterrupted one.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <unistd.h>

#include "catalog.hpp"
#include "solver.hpp"

namespace tilematch {

struct SampleSpec {
  std::string layout = "default";
  RuleKind rule = RuleKind::shisen;
  FreeVariant free_variant = FreeVariant::pillar_above;
  bool border_paths = true;
  std::uint64_t count = 1;
  std::uint64_t seed = 0;
  std::uint64_t shard_index = 0;
  std::uint64_t shard_count = 1;
  std::uint64_t max_nodes = Limits{}.max_nodes;
  std::uint64_t max_time_ms = 0;  // 0: none
  std::size_t retain = 64;        // seeds kept per verdict, smallest first

  Rules rules() const { return {rule, free_variant, border_paths}; }

  // Boards in this shard.
  std::uint64_t shard_size() const {
    return shard_index < count ? (count - shard_index + shard_count - 1) / shard_count : 0;
  }

  void check() const {
    if (count < 1) throw std::invalid_argument("sample count must be at least 1");
    if (shard_count < 1 || shard_index >= shard_count) throw std::invalid_argument("shard index out of range");
  }
};

inline const char* to_string(FreeVariant v) {
  return v == FreeVariant::pillar_above ? "pillar_above" : "adjacent_above";
}

inline std::optional<FreeVariant> parse_free_variant(const std::string& s) {
  if (s == "pillar_above") return FreeVariant::pillar_above;
  if (s == "adjacent_above") return FreeVariant::adjacent_above;
  return std::nullopt;
}

struct SampleReport {
  // spec echo
  std::string layout;
  std::uint64_t fingerprint = 0;
  std::uint64_t transposed_fingerprint = 0;
  std::string rule;
  std::string free_variant;
  bool border_paths = true;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
  std::string shard = "0/1";  // "combined" after merging different specs
  std::uint64_t max_nodes = 0;
  std::uint64_t max_time_ms = 0;
  std::size_t retain = 0;
  // results
  std::uint64_t processed = 0;
  std::uint64_t winnable = 0;
  std::uint64_t impossible = 0;
  std::uint64_t aborted = 0;
  std::vector<std::uint64_t> impossible_seeds;
  std::vector<std::uint64_t> aborted_seeds;
  std::vector<std::string> sources;  // provenance of combined reports

  double impossible_fraction() const { return processed ? double(impossible) / double(processed) : 0.0; }

  friend bool operator==(const SampleReport&, const SampleReport&) = default;
};

namespace detail {

inline std::string join_seeds(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (auto x : v) s += (s.empty() ? "" : " ") + std::to_string(x);
  return s;
}

inline std::vector<std::uint64_t> split_seeds(const std::string& s) {
  std::vector<std::uint64_t> v;
  std::istringstream in(s);
  for (std::uint64_t x; in >> x;) v.push_back(x);
  return v;
}

inline std::map<std::string, std::string> read_fields(std::istream& in, const std::string& magic) {
  std::string line;
  if (!std::getline(in, line) || line != magic) throw std::runtime_error("expected header '" + magic + "'");
  std::map<std::string, std::string> f;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("malformed line '" + line + "'");
    const std::string key = line.substr(0, eq);
    if (key == "source") f[key] += line.substr(eq + 1) + "\n";
    else f[key] = line.substr(eq + 1);
  }
  return f;
}

inline const std::string& field(const std::map<std::string, std::string>& f, const std::string& key) {
  auto it = f.find(key);
  if (it == f.end()) throw std::runtime_error("missing field '" + key + "'");
  return it->second;
}

inline void keep_smallest(std::vector<std::uint64_t>& seeds, std::size_t cap) {
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  if (seeds.size() > cap) seeds.resize(cap);
}

// Writes through a temporary file, fsyncs it and renames it into place.
inline void write_durably(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw std::runtime_error("cannot write " + tmp);
  std::size_t done = 0;
  while (done < text.size()) {
    const auto n = ::write(fd, text.data() + done, text.size() - done);
    if (n <= 0) {
      ::close(fd);
      throw std::runtime_error("write failed on " + tmp);
    }
    done += std::size_t(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) throw std::runtime_error("fsync failed on " + tmp);
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

// Field order: header, spec echo, counts, retained seeds, sources.
inline std::string format_report(const SampleReport& r) {
  std::ostringstream o;
  char frac[32];
  std::snprintf(frac, sizeof frac, "%.6f", r.impossible_fraction());
  o << "tilematch-sample-report 1\n"
    << "layout=" << r.layout << "\n"
    << "fingerprint=" << r.fingerprint << "\n"
    << "transposed_fingerprint=" << r.transposed_fingerprint << "\n"
    << "rule=" << r.rule << "\n"
    << "free_variant=" << r.free_variant << "\n"
    << "border_paths=" << r.border_paths << "\n"
    << "count=" << r.count << "\n"
    << "seed=" << r.seed << "\n"
    << "shard=" << r.shard << "\n"
    << "max_nodes=" << r.max_nodes << "\n"
    << "max_time_ms=" << r.max_time_ms << "\n"
    << "retain=" << r.retain << "\n"
    << "processed=" << r.processed << "\n"
    << "winnable=" << r.winnable << "\n"
    << "impossible=" << r.impossible << "\n"
    << "aborted=" << r.aborted << "\n"
    << "impossible_fraction=" << frac << "\n"
    << "impossible_seeds=" << detail::join_seeds(r.impossible_seeds) << "\n"
    << "aborted_seeds=" << detail::join_seeds(r.aborted_seeds) << "\n";
  for (const auto& s : r.sources) o << "source=" << s << "\n";
  return o.str();
}

inline SampleReport parse_report(std::istream& in) {
  const auto f = detail::read_fields(in, "tilematch-sample-report 1");
  using detail::field;
  SampleReport r;
  r.layout = field(f, "layout");
  r.fingerprint = std::stoull(field(f, "fingerprint"));
  r.transposed_fingerprint = std::stoull(field(f, "transposed_fingerprint"));
  r.rule = field(f, "rule");
  r.free_variant = field(f, "free_variant");
  r.border_paths = field(f, "border_paths") == "1";
  r.count = std::stoull(field(f, "count"));
  r.seed = std::stoull(field(f, "seed"));
  r.shard = field(f, "shard");
  r.max_nodes = std::stoull(field(f, "max_nodes"));
  r.max_time_ms = std::stoull(field(f, "max_time_ms"));
  r.retain = std::stoull(field(f, "retain"));
  r.processed = std::stoull(field(f, "processed"));
  r.winnable = std::stoull(field(f, "winnable"));
  r.impossible = std::stoull(field(f, "impossible"));
  r.aborted = std::stoull(field(f, "aborted"));
  r.impossible_seeds = detail::split_seeds(field(f, "impossible_seeds"));
  r.aborted_seeds = detail::split_seeds(field(f, "aborted_seeds"));
  if (auto it = f.find("source"); it != f.end()) {
    std::istringstream s(it->second);
    for (std::string line; std::getline(s, line);) r.sources.push_back(line);
  }
  if (r.winnable + r.impossible + r.aborted != r.processed) throw std::runtime_error("report counts do not sum");
  return r;
}

inline SampleReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report " + path);
  return parse_report(in);
}

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  std::uint64_t spec_hash = 0;
  std::uint64_t completed = 0;  // boards of the shard done, in order
  std::uint64_t last_seed = 0;
  SampleReport partial;
};

// Hash of every spec field that influences results.
inline std::uint64_t spec_hash(const SampleSpec& s, std::uint64_t layout_fingerprint) {
  std::ostringstream o;
  o << layout_fingerprint << '|' << to_string(s.rule) << '|' << to_string(s.free_variant) << '|' << s.border_paths
    << '|' << s.count << '|' << s.seed << '|' << s.shard_index << '/' << s.shard_count << '|' << s.max_nodes << '|'
    << s.max_time_ms << '|' << s.retain;
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : o.str()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string format_checkpoint(const Checkpoint& c) {
  return "tilematch-checkpoint 1\nspec_hash=" + std::to_string(c.spec_hash) +
         "\ncompleted=" + std::to_string(c.completed) + "\nlast_seed=" + std::to_string(c.last_seed) + "\n" +
         format_report(c.partial);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  std::string line;
  Checkpoint c;
  if (!std::getline(in, line) || line != "tilematch-checkpoint 1") throw std::runtime_error("not a checkpoint: " + path);
  for (auto* dst : {&c.spec_hash, &c.completed, &c.last_seed}) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated checkpoint " + path);
    *dst = std::stoull(line.substr(line.find('=') + 1));
  }
  c.partial = parse_report(in);
  return c;
}

// ---------------------------------------------------------------------------
// Sampling

struct SampleOptions {
  std::size_t threads = 1;
  std::uint64_t checkpoint_every = 10'000;
  std::string checkpoint_path;  // empty: no checkpoints
  bool resume = false;          // continue from checkpoint_path when it exists
  std::uint64_t stop_after = 0; // stop once this many boards of the shard are done; 0: run to the end
  std::function<void(std::uint64_t done, std::uint64_t total)> progress;
};

inline SampleReport empty_report(const SampleSpec& spec, const Layout& layout) {
  SampleReport r;
  r.layout = layout.name;
  r.fingerprint = fingerprint(layout);
  r.transposed_fingerprint = fingerprint(transpose(layout));
  r.rule = to_string(spec.rule);
  r.free_variant = to_string(spec.free_variant);
  r.border_paths = spec.border_paths;
  r.count = spec.count;
  r.seed = spec.seed;
  r.shard = std::to_string(spec.shard_index) + "/" + std::to_string(spec.shard_count);
  r.max_nodes = spec.max_nodes;
  r.max_time_ms = spec.max_time_ms;
  r.retain = spec.retain;
  return r;
}

inline Verdict sample_board(const LayoutPtr& layout, const GroupAssignment& ga, const SampleSpec& spec,
                            std::uint64_t board_seed) {
  SolveOptions opt;
  opt.limits.max_nodes = spec.max_nodes;
  if (spec.max_time_ms) opt.limits.max_time = std::chrono::milliseconds(spec.max_time_ms);
  return winnable(layout, ga, board_seed, spec.rules(), opt).verdict;
}

inline SampleReport run_sample(const SampleSpec& spec, const Layout& layout, const SampleOptions& opt = {}) {
  spec.check();
  const auto shared = std::make_shared<const Layout>(layout);
  const auto ga = make_groups(layout);
  const std::uint64_t total = spec.shard_size();
  const std::uint64_t hash = spec_hash(spec, fingerprint(layout));

  Checkpoint ck{hash, 0, 0, empty_report(spec, layout)};
  if (opt.resume && !opt.checkpoint_path.empty() && std::filesystem::exists(opt.checkpoint_path)) {
    ck = load_checkpoint(opt.checkpoint_path);
    if (ck.spec_hash != hash) throw std::runtime_error("checkpoint " + opt.checkpoint_path + " belongs to a different spec");
  }
  SampleReport& r = ck.partial;
  auto board_seed = [&](std::uint64_t k) { return spec.seed + spec.shard_index + k * spec.shard_count; };
  const std::uint64_t end = opt.stop_after ? std::min(total, opt.stop_after) : total;
  const std::uint64_t every = std::max<std::uint64_t>(1, opt.checkpoint_every);
  std::vector<Verdict> verdicts;

  while (ck.completed < end) {
    const std::uint64_t lo = ck.completed, hi = std::min(end, (lo / every + 1) * every);
    verdicts.assign(hi - lo, Verdict::aborted);
    std::atomic<std::uint64_t> next{lo};
    auto work = [&] {
      for (std::uint64_t k; (k = next.fetch_add(1)) < hi;)
        verdicts[k - lo] = sample_board(shared, ga, spec, board_seed(k));
    };
    const std::size_t n = std::max<std::size_t>(1, std::min<std::size_t>(opt.threads, hi - lo));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    for (std::uint64_t k = lo; k < hi; ++k) {
      const auto s = board_seed(k);
      switch (verdicts[k - lo]) {
        case Verdict::winnable: ++r.winnable; break;
        case Verdict::impossible:
          ++r.impossible;
          if (r.impossible_seeds.size() < spec.retain) r.impossible_seeds.push_back(s);
          break;
        case Verdict::aborted:
          ++r.aborted;
          if (r.aborted_seeds.size() < spec.retain) r.aborted_seeds.push_back(s);
          break;
      }
      ++r.processed;
      ck.last_seed = s;
    }
    ck.completed = hi;
    if (!opt.checkpoint_path.empty() && (hi % every == 0 || hi == end))
      detail::write_durably(opt.checkpoint_path, format_checkpoint(ck));
    if (opt.progress) opt.progress(ck.completed, total);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Merging

// Reports combine when they sample the same game: equal rule on one layout,
// Shisen-Sho on a layout and on its transpose, or Mahjong on a layout and
// transposed Mahjong on its transpose. Shards of one spec that cover it
// exactly merge into the report of an unsharded run. Anything else yields a
// combined report: spec fields of the first input in canonical order, the
// union of layout names, summed counts and one source line per input run.
inline SampleReport merge_reports(std::vector<SampleReport> in) {
  if (in.empty()) throw std::invalid_argument("nothing to merge");
  // canonical order keeps the merge commutative
  std::sort(in.begin(), in.end(),
            [](const SampleReport& x, const SampleReport& y) { return format_report(x) < format_report(y); });
  auto game = [](const SampleReport& r) {
    if (r.rule == "shisen") return std::pair{std::string("shisen"), std::min(r.fingerprint, r.transposed_fingerprint)};
    if (r.rule == "mahjong-t") return std::pair{std::string("mahjong"), r.transposed_fingerprint};
    return std::pair{r.rule, r.fingerprint};
  };
  const auto& first = in.front();
  for (const auto& r : in) {
    if (game(r) != game(first))
      throw std::invalid_argument("incompatible reports: " + r.rule + " on " + r.layout + " vs " + first.rule + " on " +
                                  first.layout);
    if (r.free_variant != first.free_variant || r.border_paths != first.border_paths)
      throw std::invalid_argument("incompatible rule options between reports");
  }
  SampleReport out = first;
  out.processed = out.winnable = out.impossible = out.aborted = 0;
  out.impossible_seeds.clear();
  out.aborted_seeds.clear();
  out.sources.clear();
  for (const auto& r : in) {
    out.processed += r.processed;
    out.winnable += r.winnable;
    out.impossible += r.impossible;
    out.aborted += r.aborted;
    out.impossible_seeds.insert(out.impossible_seeds.end(), r.impossible_seeds.begin(), r.impossible_seeds.end());
    out.aborted_seeds.insert(out.aborted_seeds.end(), r.aborted_seeds.begin(), r.aborted_seeds.end());
  }
  detail::keep_smallest(out.impossible_seeds, out.retain);
  detail::keep_smallest(out.aborted_seeds, out.retain);

  // the complete, finished shards of one spec
  auto spec_of = [](SampleReport r) {
    r.shard = r.shard.substr(r.shard.find('/') + 1);
    r.processed = r.winnable = r.impossible = r.aborted = 0;
    r.impossible_seeds.clear();
    r.aborted_seeds.clear();
    return r;
  };
  bool cover = first.shard != "combined";
  std::vector<std::uint64_t> index;
  for (const auto& r : in) {
    cover = cover && r.shard != "combined" && spec_of(r) == spec_of(first);
    if (cover) index.push_back(std::stoull(r.shard));
  }
  if (cover) {
    std::sort(index.begin(), index.end());
    for (std::size_t i = 0; i < index.size(); ++i) cover = cover && index[i] == i;
    cover = cover && index.size() == std::stoull(spec_of(first).shard) && out.processed == first.count;
  }
  if (cover) {
    out.shard = "0/1";
    return out;
  }

  out.shard = "combined";
  std::uint64_t count = 0;
  std::set<std::string> names;
  for (const auto& r : in) {
    count += r.count;
    out.seed = std::min(out.seed, r.seed);
    std::istringstream parts(r.layout);
    for (std::string name; std::getline(parts, name, '+');) names.insert(name);
    if (r.sources.empty()) {
      out.sources.push_back(r.layout + " " + r.rule + " count=" + std::to_string(r.count) +
                            " seed=" + std::to_string(r.seed) + " shard=" + r.shard +
                            " processed=" + std::to_string(r.processed));
    } else {
      out.sources.insert(out.sources.end(), r.sources.begin(), r.sources.end());
    }
  }
  out.layout.clear();
  for (const auto& name : names) out.layout += (out.layout.empty() ? "" : "+") + name;
  out.count = count;
  std::sort(out.sources.begin(), out.sources.end());
  return out;
}

}  // namespace tilematch
