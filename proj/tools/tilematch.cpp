// tilematch command line: sample, merge, reduce, solve-one, serve.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <tilematch/gadgets.hpp>
#include <tilematch/service_http.hpp>

using namespace tilematch;

namespace {

RuleKind rule_or_throw(const std::string& s) {
  if (auto k = parse_rule_kind(s)) return *k;
  throw CLI::ValidationError("--rule", "expected shisen, mahjong or mahjong-t");
}

FreeVariant variant_or_throw(const std::string& s) {
  if (auto v = parse_free_variant(s)) return *v;
  throw CLI::ValidationError("--free-variant", "expected pillar_above or adjacent_above");
}

// "K/I": shard I of K.
void parse_shards(const std::string& s, SampleSpec& spec) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) throw CLI::ValidationError("--shards", "expected K/I");
  spec.shard_count = std::stoull(s.substr(0, slash));
  spec.shard_index = std::stoull(s.substr(slash + 1));
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!(out << text)) throw std::runtime_error("cannot write " + path);
}

std::vector<int> read_faces(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open faces file " + path);
  std::vector<int> faces;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    for (int f; ls >> f;) faces.push_back(f);
  }
  return faces;
}

const char* verdict_name(Verdict v) {
  return v == Verdict::winnable ? "winnable" : v == Verdict::impossible ? "impossible" : "aborted";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shisen-Sho and Mahjong Solitaire solvability tools.\nLayouts resolve against $TILEMATCH_DATA_DIR (default " +
               std::string(TILEMATCH_DEFAULT_DATA_DIR) + ")."};
  app.require_subcommand(1);

  // sample
  SampleSpec spec;
  SampleOptions sopt;
  std::string rule = "shisen", variant = "pillar_above", shards, out_path, resume_path;
  std::uint64_t max_time = 0;
  bool no_border = false, quiet = false;
  auto* sample = app.add_subcommand("sample", "Deal boards from consecutive seeds and count verdicts");
  sample->add_option("--layout", spec.layout, "rect<R>x<C>, foo, bar, default/turtle, a data-dir name or a file")->capture_default_str();
  sample->add_option("--rule", rule, "shisen, mahjong or mahjong-t")->capture_default_str();
  sample->add_option("--free-variant", variant, "Mahjong freedom: pillar_above or adjacent_above")->capture_default_str();
  sample->add_flag("--no-border-paths", no_border, "Shisen-Sho lines stay inside the layout's bounding box");
  sample->add_option("--count", spec.count, "Boards in the whole sample")->capture_default_str();
  sample->add_option("--seed", spec.seed, "Seed of board 0")->capture_default_str();
  sample->add_option("--shards", shards, "K/I: run shard I of K (boards I, I+K, ...)");
  sample->add_option("--max-nodes", spec.max_nodes, "Search node limit per board")->capture_default_str();
  sample->add_option("--max-time", max_time, "Time limit per board in ms, 0 for none")->capture_default_str();
  sample->add_option("--retain", spec.retain, "Seeds kept per verdict")->capture_default_str();
  sample->add_option("--threads", sopt.threads, "Worker threads")->capture_default_str();
  sample->add_option("--checkpoint", sopt.checkpoint_path, "Write checkpoints here");
  sample->add_option("--resume", resume_path, "Continue from this checkpoint if it exists, and keep writing it");
  sample->add_option("--checkpoint-every", sopt.checkpoint_every, "Boards between checkpoints")->capture_default_str();
  sample->add_option("--out,-o", out_path, "Report file (default stdout)");
  sample->add_flag("--quiet,-q", quiet, "No progress on stderr");

  // merge
  std::vector<std::string> merge_inputs;
  std::string merge_out;
  auto* merge = app.add_subcommand("merge", "Combine sample reports of shards or transpose-equivalent games");
  merge->add_option("reports", merge_inputs, "Report files")->required()->check(CLI::ExistingFile);
  merge->add_option("--out,-o", merge_out, "Merged report file (default stdout)");

  // reduce
  std::string instance_path, reduce_prefix, construction = "auto";
  bool reduce_check = false;
  auto* reduce = app.add_subcommand("reduce", "Compile a stack instance into a Shisen-Sho board");
  reduce->add_option("instance", instance_path, "One stack per line, bottom tile first; '-' for stdin")->required();
  reduce->add_option("--construction", construction, "general, 5rows, or auto (5rows when every stack is aab/abb)")
      ->check(CLI::IsMember({"auto", "general", "5rows"}))
      ->capture_default_str();
  reduce->add_option("--out,-o", reduce_prefix, "Write <prefix>.layout and <prefix>.faces");
  reduce->add_flag("--check", reduce_check, "Solve both games and compare verdicts");

  // solve-one
  std::string solve_layout = "default", solve_rule = "shisen", solve_variant = "pillar_above", faces_path;
  std::uint64_t solve_seed = 0, solve_nodes = Limits{}.max_nodes, solve_time = 0;
  bool solve_no_border = false, solve_exhaustive = false, solve_witness = false;
  auto* one = app.add_subcommand("solve-one", "Deal one board and decide it");
  one->add_option("--layout", solve_layout, "Layout selector")->capture_default_str();
  one->add_option("--rule", solve_rule, "shisen, mahjong or mahjong-t")->capture_default_str();
  one->add_option("--free-variant", solve_variant, "pillar_above or adjacent_above")->capture_default_str();
  one->add_flag("--no-border-paths", solve_no_border, "Keep Shisen-Sho lines inside the bounding box");
  one->add_option("--seed", solve_seed, "Deal seed")->capture_default_str();
  one->add_option("--faces", faces_path, "Fixed faces per slot instead of a deal (e.g. from reduce)");
  one->add_option("--max-nodes", solve_nodes, "Search node limit")->capture_default_str();
  one->add_option("--max-time", solve_time, "Time limit in ms, 0 for none")->capture_default_str();
  one->add_flag("--exhaustive", solve_exhaustive, "Skip the random rollouts");
  one->add_flag("--witness", solve_witness, "Print the winning move sequence");

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t hint_nodes = 1'000'000;
  auto* serve = app.add_subcommand("serve", "Run the JSON game service");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--hint-max-nodes", hint_nodes, "Node limit of a hint solve")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      spec.rule = rule_or_throw(rule);
      spec.free_variant = variant_or_throw(variant);
      spec.border_paths = !no_border;
      spec.max_time_ms = max_time;
      if (!shards.empty()) parse_shards(shards, spec);
      if (!resume_path.empty()) {
        sopt.checkpoint_path = resume_path;
        sopt.resume = true;
      }
      if (!quiet)
        sopt.progress = [](std::uint64_t done, std::uint64_t total) {
          std::cerr << "\r" << done << "/" << total << std::flush;
        };
      const Layout layout = resolve_layout(spec.layout);
      const auto t0 = std::chrono::steady_clock::now();
      const auto report = run_sample(spec, layout, sopt);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!quiet) std::cerr << "\n";
      std::cerr << "wall_time_s=" << secs << "\n";
      write_text(out_path, format_report(report));
    } else if (*merge) {
      std::vector<SampleReport> reports;
      for (const auto& p : merge_inputs) reports.push_back(load_report(p));
      write_text(merge_out, format_report(merge_reports(std::move(reports))));
    } else if (*reduce) {
      StackInstance inst;
      if (instance_path == "-") {
        inst = parse_instance(std::cin);
      } else {
        std::ifstream in(instance_path);
        if (!in) throw std::runtime_error("cannot open " + instance_path);
        inst = parse_instance(in);
      }
      inst.validate();
      const bool five = construction == "5rows" || (construction == "auto" && !inst.stacks.empty() && is_restricted(inst));
      const Reduction red = five ? reduce_5rows(inst) : reduce_general(inst);
      for (const auto& row : red.label_rows()) std::cout << row << "\n";
      if (!reduce_prefix.empty()) {
        write_text(reduce_prefix + ".layout", format_layout(red.layout));
        std::string faces = "# face per slot, in layout order\n";
        for (std::size_t i = 0; i < red.faces.size(); ++i) faces += std::to_string(red.faces[i]) + ((i + 1) % std::size_t(std::max(red.width, 1)) ? " " : "\n");
        write_text(reduce_prefix + ".faces", faces);
      }
      if (reduce_check) {
        Board b = red.board();
        const auto r = solve(b, Rules{RuleKind::shisen});
        const bool peek = peeking_mahjong_solve(inst);
        std::cout << "peeking_mahjong=" << (peek ? "winnable" : "impossible") << "\n"
                  << "shisen=" << verdict_name(r.verdict) << "\n";
        if (r.verdict != Verdict::aborted && peek != (r.verdict == Verdict::winnable)) return 3;
      }
    } else if (*one) {
      const Rules rules{rule_or_throw(solve_rule), variant_or_throw(solve_variant), !solve_no_border};
      auto layout = std::make_shared<const Layout>(resolve_layout(solve_layout));
      SolveOptions opt;
      opt.limits.max_nodes = solve_nodes;
      if (solve_time) opt.limits.max_time = std::chrono::milliseconds(solve_time);
      const auto t0 = std::chrono::steady_clock::now();
      SolveResult r;
      if (!faces_path.empty()) {
        Board b(layout, read_faces(faces_path));
        r = solve_exhaustive ? solve(b, rules, opt) : winnable(b, rules, solve_seed, opt);
      } else if (solve_exhaustive) {
        Board b = deal(layout, solve_seed);
        r = solve(b, rules, opt);
      } else {
        r = winnable(layout, make_groups(*layout), solve_seed, rules, opt);
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cout << "layout=" << layout->name << "\nrule=" << to_string(rules.kind) << "\nseed=" << solve_seed
                << "\nverdict=" << verdict_name(r.verdict) << "\nby_rollout=" << r.by_rollout
                << "\nrollout_attempts=" << r.rollout_attempts << "\nnodes=" << r.nodes << "\nrestarts=" << r.restarts
                << "\ntime_s=" << secs << "\n";
      if (solve_witness) {
        std::cout << "witness=";
        for (const Move& m : r.witness) std::cout << m.a << "-" << m.b << " ";
        std::cout << "\n";
      }
      return r.verdict == Verdict::aborted ? 2 : 0;
    } else if (*serve) {
      Service service(ServiceOptions{hint_nodes, data_dir()});
      httplib::Server server;
      bind_http(server, service);
      if (!server.bind_to_port(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
      std::cerr << "serving on http://" << host << ":" << port << "\n";
      server.listen_after_bind();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
