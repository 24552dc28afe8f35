#include "phoneval/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "phoneval/error.hpp"
#include "phoneval/framesync.hpp"
#include "phoneval/parallel.hpp"
#include "text_util.hpp"

namespace phoneval {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(AbxMode m) {
  return m == AbxMode::kContinuous ? "continuous" : "discrete";
}

AbxMode parse_abx_mode(std::string_view s) {
  if (s == "continuous") return AbxMode::kContinuous;
  if (s == "discrete") return AbxMode::kDiscrete;
  throw ValidationError("unknown ABX mode '" + std::string(s) +
                        "' (expected continuous or discrete)");
}

namespace {

// Two decimals; -0 becomes 0 so reruns compare equal byte for byte.
double round2(double x) { return std::round(x * 100.0) / 100.0 + 0.0; }

struct UttTally {
  PerBreakdown per;
  ClassConfusion confusion;
  BoundaryCounts boundaries;
};

std::vector<AbxItem> abx_items_for(const Manifest& m, const PhoneCorpus& gold,
                                   const PhonemeInventory& inv) {
  if (!m.abx_items.empty()) return load_items(m.abx_items);
  return extract_items(gold, inv);
}

AbxSummary score_abx(const Manifest& m, const PhoneCorpus& gold,
                     const UnitCorpus& units, const PhonemeInventory& inv,
                     AbxMode mode, const EvalOptions& opts) {
  const auto items = abx_items_for(m, gold, inv);
  std::vector<Representation> reps;
  if (mode == AbxMode::kContinuous) {
    if (m.features.empty())
      throw ValidationError("continuous ABX needs 'features' in the manifest");
    reps = item_representations(items, load_features(m.features));
  } else {
    reps = item_representations(items, units);
  }
  AbxOptions ao;
  ao.max_triples_per_cell = opts.abx_max_triples;
  ao.seed = opts.seed;
  ao.strict = opts.abx_strict;
  ao.threads = opts.threads;
  AbxSummary s;
  s.mode = mode;
  s.within = abx_score(items, reps, AbxCondition::kWithin, ao);
  s.across = abx_score(items, reps, AbxCondition::kAcross, ao);
  return s;
}

ojson abx_to_json(const AbxSummary& s) {
  ojson j;
  j["mode"] = std::string(to_string(s.mode));
  j["within"] = round2(s.within.error_rate());
  j["across"] = round2(s.across.error_rate());
  j["summary"] = round2(s.summary());
  j["cells"] = {{"within", s.within.symmetric_cells},
                {"across", s.across.symmetric_cells}};
  return j;
}

ojson metadata_json(const EvalOptions& o) {
  ojson j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["schema_version"] = kReportSchemaVersion;
  j["solver"] = "hungarian-int64-lexmin";
  j["tie_rule"] = "lexicographically smallest unit->phone vector";
  j["frame_rule"] = "frame k labelled by the segment containing (k+0.5)/rate";
  j["boundary_tolerance_ms"] = static_cast<double>(o.tolerance) / 1000.0;
  j["per_aggregation"] = "micro";
  j["language_average"] = "unweighted mean of per-language reports";
  j["abx_distance"] = "dtw-angular, steps (1,0)(0,1)(1,1), path-length normalized";
  j["abx_across_convention"] = "A and B share a speaker, X from another";
  j["abx_max_triples_per_cell"] = o.abx_max_triples;
  j["abx_strict"] = o.abx_strict;
  j["seed"] = o.seed;
  return j;
}

}  // namespace

EvalReport evaluate(const PhoneCorpus& gold, const UnitCorpus& units,
                    const PhonemeInventory& inv, Track track, int vocab_size,
                    const EvalOptions& opts) {
  require_matching_utterances(gold, units);
  if (track == Track::kOneToOne && vocab_size != one_to_one_vocab_size(inv))
    throw ValidationError("one-to-one track needs vocab_size = " +
                          std::to_string(one_to_one_vocab_size(inv)));

  EvalReport r;
  r.language = inv.language();
  r.track = track;
  r.vocab_size = vocab_size;
  r.inventory = inv;
  r.options = opts;
  r.warnings = units.warnings;
  r.utterances = gold.utterances.size();

  const auto table = build_contingency(gold, units, inv, vocab_size, opts.threads);
  r.frames = table.total();
  r.pnmi = pnmi(table);
  r.assignment = track == Track::kOneToOne ? one_to_one(table)
                                            : many_to_one(table);
  const auto assigned = map_units(r.assignment, units, opts.threads);

  std::vector<const std::string*> ids;
  for (const auto& kv : gold.utterances) ids.push_back(&kv.first);
  std::vector<UttTally> tallies(num_chunks(ids.size(), opts.threads));
  const PhoneIndex sil = inv.silence_index();
  for_each_chunk(ids.size(), opts.threads,
                 [&](std::size_t chunk, std::size_t b, std::size_t e) {
                   UttTally& t = tallies[chunk];
                   for (std::size_t k = b; k < e; ++k) {
                     const auto& utt = gold.utterances.at(*ids[k]);
                     const auto& frames = assigned.at(*ids[k]);
                     const auto ref = gold_transcription(utt, sil);
                     const auto hyp = collapse(frames, sil);
                     const auto al = align(ref, hyp);
                     t.per.add(al, ref.size());
                     t.confusion.add(al, inv);
                     const auto gb = boundaries(utt, sil);
                     const auto pb = boundaries(frames, units.frame_rate);
                     t.boundaries += BoundaryCounts{
                         match_boundaries(gb, pb, opts.tolerance),
                         static_cast<Count>(gb.size()),
                         static_cast<Count>(pb.size())};
                   }
                 });
  for (const auto& t : tallies) {
    r.per += t.per;
    r.confusion += t.confusion;
    r.boundary_counts += t.boundaries;
  }
  if (r.per.gold_length == 0)
    throw ValidationError("gold corpus has no phones outside edge silence");
  if (r.boundary_counts.gold > 0)
    r.boundaries = segmentation_scores(r.boundary_counts);
  return r;
}

EvalReport evaluate(const Manifest& manifest, const EvalOptions& opts) {
  Manifest m = manifest;
  if (opts.track) m.track = *opts.track;
  const auto inv = load_inventory(m.inventory);
  check_manifest(m, inv);
  const auto gold = load_gold(m.gold, inv);
  const auto units = load_units(m.units);
  auto r = evaluate(gold, units, inv, m.track, m.vocab_size, opts);
  r.language = m.language;
  r.split = m.split;
  if (opts.abx_mode)
    r.abx = score_abx(m, gold, units, inv, *opts.abx_mode, opts);
  return r;
}

EvalReport evaluate(const fs::path& manifest, const EvalOptions& opts) {
  return evaluate(load_manifest(manifest), opts);
}

AbxSummary run_abx(const Manifest& m, AbxMode mode, const EvalOptions& opts) {
  const auto inv = load_inventory(m.inventory);
  check_manifest(m, inv);
  const auto gold = load_gold(m.gold, inv);
  UnitCorpus units;
  if (mode == AbxMode::kDiscrete) {
    units = load_units(m.units);
    require_matching_utterances(gold, units);
  }
  return score_abx(m, gold, units, inv, mode, opts);
}

std::string report_json(const EvalReport& r,
                        const std::string& assignment_file) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["language"] = r.language;
  j["track"] = std::string(to_string(r.track));
  j["split"] = r.split;
  j["vocab_size"] = r.vocab_size;
  j["utterances"] = r.utterances;
  j["frames"] = r.frames;

  const double n = static_cast<double>(r.per.gold_length);
  j["pnmi"] = round2(100.0 * r.pnmi);
  j["per"] = round2(100.0 * r.per.per());
  j["per_breakdown"] = {
      {"sub", round2(100.0 * static_cast<double>(r.per.substitutions) / n)},
      {"del", round2(100.0 * static_cast<double>(r.per.deletions) / n)},
      {"ins", round2(100.0 * static_cast<double>(r.per.insertions) / n)}};
  j["edit_counts"] = {{"sub", r.per.substitutions},
                      {"del", r.per.deletions},
                      {"ins", r.per.insertions},
                      {"gold_length", r.per.gold_length}};

  if (r.boundaries) {
    j["f1"] = round2(r.boundaries->f1);
    j["r_value"] = round2(r.boundaries->r_value);
    j["precision"] = round2(r.boundaries->precision);
    j["recall"] = round2(r.boundaries->recall);
  } else {
    j["f1"] = nullptr;
    j["r_value"] = nullptr;
    j["precision"] = nullptr;
    j["recall"] = nullptr;
  }
  j["boundaries"] = {{"hits", r.boundary_counts.hits},
                     {"gold", r.boundary_counts.gold},
                     {"pred", r.boundary_counts.pred}};

  ojson conf;
  ojson classes = ojson::array();
  for (auto c : all_phoneme_classes()) classes.push_back(std::string(to_string(c)));
  conf["classes"] = classes;
  const auto pct = r.confusion.percent();
  ojson rows = ojson::object();
  ojson counts = ojson::array();
  for (int g = 0; g < kNumPhonemeClasses; ++g) {
    const std::string gname(to_string(all_phoneme_classes()[g]));
    ojson crow = ojson::array();
    for (int h = 0; h < kNumPhonemeClasses; ++h) crow.push_back(r.confusion.counts(g, h));
    counts.push_back(crow);
    if (!r.confusion.row_defined(g)) {
      rows[gname] = nullptr;
      continue;
    }
    ojson prow = ojson::object();
    for (int h = 0; h < kNumPhonemeClasses; ++h)
      prow[std::string(to_string(all_phoneme_classes()[h]))] = round2(pct(g, h));
    rows[gname] = prow;
  }
  conf["percent"] = rows;
  conf["counts"] = counts;
  j["confusion"] = conf;

  j["abx"] = r.abx ? abx_to_json(*r.abx) : ojson(nullptr);

  j["assignment"] = {{"kind", std::string(to_string(r.assignment.kind))},
                     {"file", assignment_file},
                     {"objective", round2(100.0 * r.assignment.objective)},
                     {"objective_count", r.assignment.objective_count},
                     {"tie_units", r.assignment.tie_units}};
  j["warnings"] = r.warnings;
  j["metadata"] = metadata_json(r.options);
  return j.dump(2) + "\n";
}

std::string abx_json(const std::string& language, const AbxSummary& abx,
                     const EvalOptions& options) {
  ojson j;
  j["schema_version"] = kReportSchemaVersion;
  j["language"] = language;
  j["abx"] = abx_to_json(abx);
  j["metadata"] = metadata_json(options);
  return j.dump(2) + "\n";
}

fs::path write_report(const fs::path& out, const EvalReport& report) {
  const fs::path tsv =
      out.parent_path() / (out.stem().string() + ".assignment.tsv");
  if (!out.parent_path().empty()) {
    std::error_code ec;
    fs::create_directories(out.parent_path(), ec);
    if (ec) throw IoError("cannot create " + out.parent_path().string());
  }
  detail::write_file(tsv, assignment_tsv(report.assignment, report.inventory));
  detail::write_file(out, report_json(report, tsv.filename().string()));
  return tsv;
}

ReportRow parse_report_row(std::string_view text, const std::string& origin) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(origin + ": not valid JSON: " + e.what());
  }
  auto opt = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
  };
  try {
    if (j.at("schema_version").get<int>() != kReportSchemaVersion)
      throw ValidationError(origin + ": unsupported schema_version");
    ReportRow row;
    row.language = j.at("language").get<std::string>();
    row.track = j.at("track").get<std::string>();
    row.split = j.at("split").get<std::string>();
    row.per = j.at("per").get<double>();
    row.pnmi = j.at("pnmi").get<double>();
    row.f1 = opt("f1");
    row.r_value = opt("r_value");
    if (j.contains("abx") && !j["abx"].is_null())
      row.abx = j["abx"].at("summary").get<double>();
    return row;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(origin + ": malformed report: " + e.what());
  }
}

ReportRow load_report_row(const fs::path& path) {
  return parse_report_row(detail::read_file(path), path.string());
}

AggregateRow aggregate(std::span<const ReportRow> rows,
                       const std::string& group) {
  std::vector<ReportRow> sel;
  for (const auto& r : rows)
    if (r.split == group) sel.push_back(r);
  if (sel.empty())
    throw ValidationError("no reports with split '" + group + "'");
  // Fixed summation order keeps the means independent of input order.
  std::sort(sel.begin(), sel.end(), [](const ReportRow& a, const ReportRow& b) {
    return a.language < b.language;
  });
  AggregateRow out;
  out.group = group;
  out.track = sel.front().track;
  double per = 0, pnmi = 0, f1 = 0, rv = 0, abx = 0;
  bool have_f1 = true, have_rv = true, have_abx = true;
  for (const auto& r : sel) {
    if (r.track != out.track)
      throw ValidationError("cannot aggregate mixed tracks (" + out.track +
                            ", " + r.track + ")");
    out.languages.push_back(r.language);
    per += r.per;
    pnmi += r.pnmi;
    if (r.f1) f1 += *r.f1; else have_f1 = false;
    if (r.r_value) rv += *r.r_value; else have_rv = false;
    if (r.abx) abx += *r.abx; else have_abx = false;
  }
  const double n = static_cast<double>(sel.size());
  out.per = per / n;
  out.pnmi = pnmi / n;
  if (have_f1) out.f1 = f1 / n;
  if (have_rv) out.r_value = rv / n;
  if (have_abx) out.abx = abx / n;
  return out;
}

std::string aggregate_csv(const AggregateRow& row) {
  auto num = [](std::optional<double> v) {
    if (!v) return std::string();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", round2(*v));
    return std::string(buf);
  };
  std::string langs;
  for (const auto& l : row.languages) langs += (langs.empty() ? "" : ";") + l;
  std::ostringstream os;
  os << "group,track,languages,per,r_value,f1,pnmi,abx\n"
     << row.group << ',' << row.track << ',' << langs << ',' << num(row.per)
     << ',' << num(row.r_value) << ',' << num(row.f1) << ','
     << num(row.pnmi) << ',' << num(row.abx) << '\n';
  return os.str();
}

}  // namespace phoneval
