// Command-line front end: evaluate, abx, aggregate, synth-gen,
// dump-assignment. Exit status 0 on success, 1 on invalid input, 2 on I/O
// failure.

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phoneval/error.hpp"
#include "phoneval/runner.hpp"
#include "phoneval/synth.hpp"

namespace fs = std::filesystem;
using namespace phoneval;

namespace {

struct Common {
  std::string manifest;
  std::string out;
  std::string track;
  double tolerance_ms = 20.0;
  std::string abx_mode;
  bool abx_strict = false;
  std::uint64_t seed = 0;
  int threads = 1;
};

void add_common(CLI::App* app, Common& c, bool manifest_required = true) {
  auto* m = app->add_option("--manifest", c.manifest, "manifest file");
  if (manifest_required) m->required();
  app->add_option("--out", c.out, "output path");
  app->add_option("--track", c.track, "many-to-one or one-to-one");
  app->add_option("--tolerance-ms", c.tolerance_ms,
                  "boundary tolerance in milliseconds")
      ->capture_default_str();
  app->add_option("--abx-mode", c.abx_mode, "continuous or discrete")
      ->check(CLI::IsMember({"continuous", "discrete"}));
  app->add_flag("--abx-strict", c.abx_strict,
                "discrete ABX distance is 0/1 identity");
  app->add_option("--seed", c.seed, "sampling seed")->capture_default_str();
  app->add_option("--threads", c.threads, "worker threads (0 = all)")
      ->capture_default_str();
}

EvalOptions options_from(const Common& c) {
  EvalOptions o;
  if (!(c.tolerance_ms >= 0))
    throw ValidationError("--tolerance-ms must be non-negative");
  o.tolerance = std::llround(c.tolerance_ms * 1000.0);
  if (!c.track.empty()) o.track = parse_track(c.track);
  if (!c.abx_mode.empty()) o.abx_mode = parse_abx_mode(c.abx_mode);
  o.abx_strict = c.abx_strict;
  o.seed = c.seed;
  o.threads = c.threads;
  return o;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw IoError("cannot write " + out);
  f << text;
  if (!f) throw IoError("write failed: " + out);
}

std::vector<fs::path> expand_glob(const std::string& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::vector<fs::path> out;
  if (rc == 0)
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  globfree(&g);
  if (rc == GLOB_NOMATCH || out.empty())
    throw IoError("no files match '" + pattern + "'");
  if (rc != 0) throw IoError("glob failed for '" + pattern + "'");
  std::sort(out.begin(), out.end());
  return out;
}

fs::path resolve_inventory(const std::string& name) {
  fs::path p(name);
  if (fs::exists(p)) return p;
  return data_root() / "inventories" / (name + ".tsv");
}

int run(int argc, char** argv) {
  CLI::App app{"Evaluate discrete speech units against gold phone alignments"};
  app.require_subcommand(1);

  Common ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "full evaluation report");
  add_common(evaluate_cmd, ev);

  Common ab;
  auto* abx_cmd = app.add_subcommand("abx", "ABX discriminability only");
  add_common(abx_cmd, ab);

  std::string glob_pattern, group;
  auto* agg_cmd = app.add_subcommand("aggregate", "average reports into a CSV row");
  agg_cmd->add_option("--glob", glob_pattern, "report files")->required();
  agg_cmd->add_option("--group", group, "split to average (dev or test)")->required();

  Common da;
  auto* dump_cmd = app.add_subcommand("dump-assignment", "write the unit -> phone map");
  add_common(dump_cmd, da);

  std::string syn_out, syn_inventory = "english", syn_track = "many-to-one",
              syn_split = "dev", syn_embed = "none";
  std::uint64_t syn_seed = 0;
  int syn_utts = 100, syn_upp = 1, syn_vocab = 0, syn_dims = 16;
  double syn_sub = 0, syn_ins = 0, syn_del = 0, syn_pause = 0;
  auto* syn_cmd = app.add_subcommand("synth-gen", "write a synthetic corpus");
  syn_cmd->add_option("--out", syn_out, "output directory")->required();
  syn_cmd->add_option("--seed", syn_seed)->capture_default_str();
  syn_cmd->add_option("--inventory", syn_inventory, "inventory file or language name")
      ->capture_default_str();
  syn_cmd->add_option("--utterances", syn_utts)->capture_default_str();
  syn_cmd->add_option("--units-per-phone", syn_upp)->capture_default_str();
  syn_cmd->add_option("--vocab-size", syn_vocab, "0 = just enough units");
  syn_cmd->add_option("--sub-rate", syn_sub)->capture_default_str();
  syn_cmd->add_option("--ins-rate", syn_ins)->capture_default_str();
  syn_cmd->add_option("--del-rate", syn_del)->capture_default_str();
  syn_cmd->add_option("--pause-rate", syn_pause)->capture_default_str();
  syn_cmd->add_option("--track", syn_track)->capture_default_str();
  syn_cmd->add_option("--split", syn_split)->capture_default_str();
  syn_cmd->add_option("--embeddings", syn_embed, "also write frame features")
      ->check(CLI::IsMember({"none", "separated", "identical", "random"}))
      ->capture_default_str();
  syn_cmd->add_option("--dims", syn_dims, "feature dimension")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (evaluate_cmd->parsed()) {
    const auto report = evaluate(fs::path(ev.manifest), options_from(ev));
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    if (ev.out.empty() || ev.out == "-")
      std::cout << report_json(report);
    else
      write_report(ev.out, report);
  } else if (abx_cmd->parsed()) {
    auto opts = options_from(ab);
    const auto m = load_manifest(ab.manifest);
    const auto mode = opts.abx_mode.value_or(AbxMode::kContinuous);
    emit(ab.out, abx_json(m.language, run_abx(m, mode, opts), opts));
  } else if (agg_cmd->parsed()) {
    std::vector<ReportRow> rows;
    for (const auto& p : expand_glob(glob_pattern)) rows.push_back(load_report_row(p));
    std::cout << aggregate_csv(aggregate(rows, group));
  } else if (dump_cmd->parsed()) {
    auto opts = options_from(da);
    opts.abx_mode.reset();
    const auto report = evaluate(fs::path(da.manifest), opts);
    emit(da.out, assignment_tsv(report.assignment, report.inventory));
  } else if (syn_cmd->parsed()) {
    synth::ChannelSpec spec{load_inventory(resolve_inventory(syn_inventory))};
    spec.seed = syn_seed;
    spec.units_per_phone = syn_upp;
    spec.vocab_size = syn_vocab;
    spec.substitution_rate = syn_sub;
    spec.insertion_rate = syn_ins;
    spec.deletion_rate = syn_del;
    spec.pause_rate = syn_pause;
    const auto track = parse_track(syn_track);
    if (track == Track::kOneToOne &&
        spec.effective_vocab() != one_to_one_vocab_size(spec.inventory))
      throw ValidationError("one-to-one corpora need exactly |P|+1 units");
    const auto corpus = synth::generate(spec, syn_utts);
    const auto manifest =
        synth::write_corpus(syn_out, corpus, spec, track, syn_split);
    if (syn_embed != "none") {
      const auto mode = syn_embed == "separated"   ? synth::EmbeddingMode::kSeparated
                        : syn_embed == "identical" ? synth::EmbeddingMode::kIdentical
                                                   : synth::EmbeddingMode::kRandom;
      const auto feats = synth::embeddings(corpus.gold, spec.inventory,
                                           corpus.units.frame_rate, syn_dims,
                                           mode, syn_seed);
      write_features(fs::path(syn_out) / "features", feats);
      std::ofstream f(manifest, std::ios::app);
      f << "features: features\n";
      if (!f) throw IoError("cannot append to " + manifest.string());
    }
    std::cout << manifest.string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
