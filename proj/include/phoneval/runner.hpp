#ifndef PHONEVAL_RUNNER_HPP
#define PHONEVAL_RUNNER_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phoneval/abx.hpp"
#include "phoneval/assignment.hpp"
#include "phoneval/corpus_io.hpp"
#include "phoneval/inventory.hpp"
#include "phoneval/metrics.hpp"

namespace phoneval {

inline constexpr const char* kToolName = "phoneval";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

enum class AbxMode { kContinuous, kDiscrete };

std::string_view to_string(AbxMode m);
AbxMode parse_abx_mode(std::string_view s);

struct EvalOptions {
  Micros tolerance = kDefaultBoundaryTolerance;
  /// Overrides the manifest's track.
  std::optional<Track> track;
  /// ABX is skipped unless a mode is given.
  std::optional<AbxMode> abx_mode;
  bool abx_strict = false;
  std::size_t abx_max_triples = 5000;
  std::uint64_t seed = 0;
  /// <= 0: all hardware threads. Results do not depend on this.
  int threads = 1;
};

struct AbxSummary {
  AbxMode mode = AbxMode::kContinuous;
  AbxResult within;
  AbxResult across;
  /// Percent.
  double summary() const { return abx_summary(within, across); }
};

struct EvalReport {
  std::string language;
  Track track = Track::kManyToOne;
  std::string split;
  int vocab_size = 0;
  PhonemeInventory inventory;

  double pnmi = 0.0;
  PerBreakdown per;
  BoundaryCounts boundary_counts;
  /// Empty when the gold side has no boundaries at all.
  std::optional<BoundaryScore> boundaries;
  ClassConfusion confusion;
  Assignment assignment;
  std::optional<AbxSummary> abx;

  Count frames = 0;
  std::size_t utterances = 0;
  std::vector<std::string> warnings;
  EvalOptions options;
};

/// framesync -> assignment -> metrics (and ABX when requested).
EvalReport evaluate(const Manifest& manifest, const EvalOptions& options = {});
EvalReport evaluate(const std::filesystem::path& manifest,
                    const EvalOptions& options = {});

/// In-memory corpora; ABX is not run here (it needs items and features).
EvalReport evaluate(const PhoneCorpus& gold, const UnitCorpus& units,
                    const PhonemeInventory& inv, Track track, int vocab_size,
                    const EvalOptions& options = {});

/// ABX only. Continuous mode needs `features` in the manifest.
AbxSummary run_abx(const Manifest& manifest, AbxMode mode,
                   const EvalOptions& options = {});

/// Pretty-printed JSON; floats rounded to two decimals. `assignment_file`
/// is the name recorded under assignment.file.
std::string report_json(const EvalReport& report,
                        const std::string& assignment_file = "");
std::string abx_json(const std::string& language, const AbxSummary& abx,
                     const EvalOptions& options);

/// Writes the report to `out` and the assignment next to it as
/// `<stem>.assignment.tsv`. Returns the assignment path.
std::filesystem::path write_report(const std::filesystem::path& out,
                                   const EvalReport& report);

/// The fields aggregate() needs, read back from a report file.
struct ReportRow {
  std::string language;
  std::string track;
  std::string split;
  double per = 0.0;
  std::optional<double> r_value;
  std::optional<double> f1;
  double pnmi = 0.0;
  std::optional<double> abx;
};

ReportRow parse_report_row(std::string_view json_text,
                           const std::string& origin = "<string>");
ReportRow load_report_row(const std::filesystem::path& path);

struct AggregateRow {
  std::string group;
  std::string track;
  std::vector<std::string> languages;
  double per = 0.0;
  std::optional<double> r_value;
  std::optional<double> f1;
  double pnmi = 0.0;
  /// Present only when every report in the group has ABX.
  std::optional<double> abx;
};

/// Unweighted mean over the reports whose split equals `group`. Throws
/// ValidationError when none match or the matches mix tracks.
AggregateRow aggregate(std::span<const ReportRow> rows,
                       const std::string& group);

/// Header line plus one data row.
std::string aggregate_csv(const AggregateRow& row);

}  // namespace phoneval

#endif  // PHONEVAL_RUNNER_HPP
