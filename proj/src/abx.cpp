#include "phoneval/abx.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <tuple>

#include "phoneval/metrics.hpp"
#include "phoneval/parallel.hpp"
#include "text_util.hpp"

namespace phoneval {

namespace fs = std::filesystem;

std::string_view to_string(AbxCondition c) {
  return c == AbxCondition::kWithin ? "within" : "across";
}

// ----------------------------------------------------------------- items

std::vector<AbxItem> extract_items(const PhoneCorpus& gold,
                                   const PhonemeInventory& inv) {
  const PhoneIndex sil = inv.silence_index();
  std::vector<AbxItem> items;
  for (const auto& [id, utt] : gold.utterances) {
    struct Span {
      Micros on, off;
      PhoneIndex label;
    };
    std::vector<Span> tl;
    Micros cursor = 0;
    for (const auto& s : utt.segments) {
      if (s.onset > cursor) tl.push_back({cursor, s.onset, sil});
      tl.push_back({s.onset, s.offset, s.phone});
      cursor = s.offset;
    }
    for (std::size_t k = 1; k + 1 < tl.size(); ++k) {
      if (tl[k].label == sil) continue;
      items.push_back({id, tl[k].on, tl[k].off, inv.symbol(tl[k].label),
                       inv.symbol(tl[k - 1].label), inv.symbol(tl[k + 1].label),
                       utt.speaker});
    }
  }
  return items;
}

namespace {
constexpr std::string_view kItemHeader =
    "#file\tonset\toffset\t#phone\tprev-phone\tnext-phone\tspeaker";
}

std::string serialize_items(std::span<const AbxItem> items) {
  std::ostringstream out;
  out << kItemHeader << '\n';
  for (const auto& it : items)
    out << it.utterance << '\t' << detail::format_seconds(it.onset) << '\t'
        << detail::format_seconds(it.offset) << '\t' << it.phone << '\t'
        << it.prev << '\t' << it.next << '\t' << it.speaker << '\n';
  return out.str();
}

std::vector<AbxItem> parse_items(std::string_view text,
                                 const std::string& origin) {
  std::vector<AbxItem> items;
  bool header_seen = false;
  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    const auto where = origin + ":" + std::to_string(line_no);
    if (detail::trim(line).empty()) continue;
    auto f = detail::split(line, '\t');
    if (!header_seen) {
      if (f.size() != 7 || detail::trim(f[0]) != "#file")
        throw ValidationError(where + ": missing item header row");
      header_seen = true;
      continue;
    }
    if (f.size() != 7)
      throw ValidationError(where + ": expected 7 tab-separated fields");
    AbxItem it;
    it.utterance = std::string(detail::trim(f[0]));
    it.onset = detail::parse_seconds(detail::trim(f[1]), where);
    it.offset = detail::parse_seconds(detail::trim(f[2]), where);
    if (it.offset <= it.onset)
      throw ValidationError(where + ": offset <= onset");
    it.phone = std::string(detail::trim(f[3]));
    it.prev = std::string(detail::trim(f[4]));
    it.next = std::string(detail::trim(f[5]));
    it.speaker = std::string(detail::trim(f[6]));
    items.push_back(std::move(it));
  }
  return items;
}

std::vector<AbxItem> load_items(const fs::path& path) {
  return parse_items(detail::read_file(path), path.string());
}

// -------------------------------------------------------------- features

FeatureSet load_features(const fs::path& dir) {
  const auto meta_path = dir / "features.meta";
  FeatureSet set;
  const std::string meta = detail::read_file(meta_path);
  for (std::string_view line : detail::split_lines(meta)) {
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto colon = t.find(':');
    if (colon == std::string_view::npos)
      throw ValidationError(meta_path.string() + ": expected 'key: value'");
    auto key = detail::trim(t.substr(0, colon));
    auto value = detail::trim(t.substr(colon + 1));
    if (key == "dims")
      set.dims = static_cast<int>(detail::parse_int(value, meta_path.string()));
    else if (key == "frame_rate")
      set.frame_rate = detail::parse_double(value, meta_path.string());
  }
  if (set.dims <= 0 || !(set.frame_rate > 0))
    throw ValidationError(meta_path.string() +
                          ": needs positive 'dims' and 'frame_rate'");

  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".bin") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  const std::size_t row_bytes = sizeof(float) * static_cast<std::size_t>(set.dims);
  for (const auto& f : files) {
    const std::string raw = detail::read_file(f);
    if (raw.size() % row_bytes != 0)
      throw ValidationError(f.string() + ": size is not a multiple of dims");
    const auto frames = static_cast<Eigen::Index>(raw.size() / row_bytes);
    FrameMatrixd m(frames, set.dims);
    for (Eigen::Index i = 0; i < frames; ++i) {
      for (int d = 0; d < set.dims; ++d) {
        std::uint32_t bits;
        std::memcpy(&bits, raw.data() + (i * set.dims + d) * sizeof(float),
                    sizeof bits);
        if constexpr (std::endian::native == std::endian::big)
          bits = __builtin_bswap32(bits);
        m(i, d) = static_cast<double>(std::bit_cast<float>(bits));
      }
    }
    set.utterances.emplace(f.stem().string(), std::move(m));
  }
  return set;
}

void write_features(const fs::path& dir, const FeatureSet& set) {
  fs::create_directories(dir);
  std::ostringstream meta;
  meta << "dims: " << set.dims << "\nframe_rate: " << set.frame_rate << '\n';
  detail::write_file(dir / "features.meta", meta.str());
  for (const auto& [id, m] : set.utterances) {
    if (m.cols() != set.dims)
      throw ValidationError("utterance " + id + ": feature dims mismatch");
    std::string raw(static_cast<std::size_t>(m.size()) * sizeof(float), '\0');
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index d = 0; d < m.cols(); ++d) {
        auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(m(i, d)));
        if constexpr (std::endian::native == std::endian::big)
          bits = __builtin_bswap32(bits);
        std::memcpy(raw.data() + (i * m.cols() + d) * sizeof(float), &bits,
                    sizeof bits);
      }
    }
    detail::write_file(dir / (id + ".bin"), raw);
  }
}

std::pair<long, long> item_frame_range(const AbxItem& item, long num_frames,
                                       double frame_rate) {
  if (num_frames <= 0) return {0, 0};
  auto first_at_or_after = [&](Micros t) {
    long k = static_cast<long>(
        std::ceil(static_cast<double>(t) * frame_rate / kMicrosPerSecond - 0.5));
    k = std::clamp(k, 0L, num_frames);
    while (k > 0 && frame_center(k - 1, frame_rate) >= t) --k;
    while (k < num_frames && frame_center(k, frame_rate) < t) ++k;
    return k;
  };
  const long b = first_at_or_after(item.onset);
  const long e = first_at_or_after(item.offset);
  if (b < e) return {b, e};
  const double mid = static_cast<double>(item.onset + item.offset) / 2.0;
  const long k = std::clamp(
      static_cast<long>(std::floor(mid * frame_rate / kMicrosPerSecond)), 0L,
      num_frames - 1);
  return {k, k + 1};
}

std::vector<Representation> item_representations(
    std::span<const AbxItem> items, const FeatureSet& features) {
  std::vector<Representation> reps;
  reps.reserve(items.size());
  for (const auto& it : items) {
    auto u = features.utterances.find(it.utterance);
    if (u == features.utterances.end())
      throw ValidationError("ABX item references utterance " + it.utterance +
                            " missing from features");
    auto [b, e] = item_frame_range(it, static_cast<long>(u->second.rows()),
                                   features.frame_rate);
    if (b == e)
      throw ValidationError("utterance " + it.utterance + " has no frames");
    reps.emplace_back(FrameMatrixd(u->second.middleRows(b, e - b)));
  }
  return reps;
}

std::vector<Representation> item_representations(
    std::span<const AbxItem> items, const UnitCorpus& units) {
  std::vector<Representation> reps;
  reps.reserve(items.size());
  for (const auto& it : items) {
    auto u = units.utterances.find(it.utterance);
    if (u == units.utterances.end())
      throw ValidationError("ABX item references utterance " + it.utterance +
                            " missing from units");
    auto [b, e] = item_frame_range(it, static_cast<long>(u->second.size()),
                                   units.frame_rate);
    if (b == e)
      throw ValidationError("utterance " + it.utterance + " has no frames");
    reps.emplace_back(
        std::vector<UnitId>(u->second.begin() + b, u->second.begin() + e));
  }
  return reps;
}

// ------------------------------------------------------------- distances

double unit_sequence_distance(std::span<const UnitId> a,
                              std::span<const UnitId> b, bool strict) {
  if (a.empty() || b.empty())
    throw ValidationError("unit distance: empty representation");
  auto rle = [](std::span<const UnitId> s) {
    std::vector<int> out;
    for (UnitId u : s)
      if (out.empty() || out.back() != u) out.push_back(u);
    return out;
  };
  const auto ca = rle(a), cb = rle(b);
  if (strict) return ca == cb ? 0.0 : 1.0;
  const auto d = align(ca, cb).distance;
  return static_cast<double>(d) /
         static_cast<double>(std::max(ca.size(), cb.size()));
}

double distance(const Representation& x, const Representation& y,
                bool strict) {
  if (x.index() != y.index())
    throw ValidationError("ABX distance: representation kind mismatch");
  if (const auto* fx = std::get_if<FrameMatrixd>(&x))
    return dtw_angular(*fx, std::get<FrameMatrixd>(y));
  return unit_sequence_distance(std::get<std::vector<UnitId>>(x),
                                std::get<std::vector<UnitId>>(y), strict);
}

// ----------------------------------------------------------------- cells

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct CellSpec {
  AbxCell meta;
  std::vector<std::size_t> a, b, x;
  bool x_is_a = false;  // within: X drawn from A's items, X != A
};

// Lazily filled distance matrix between two item lists.
class DistanceCache {
 public:
  DistanceCache(std::span<const Representation> reps,
                const std::vector<std::size_t>& rows,
                const std::vector<std::size_t>& cols, bool strict)
      : reps_(reps), rows_(rows), cols_(cols), strict_(strict),
        values_(rows.size() * cols.size(),
                std::numeric_limits<double>::quiet_NaN()) {}

  double operator()(std::size_t r, std::size_t c) {
    double& v = values_[r * cols_.size() + c];
    if (std::isnan(v)) v = distance(reps_[rows_[r]], reps_[cols_[c]], strict_);
    return v;
  }

 private:
  std::span<const Representation> reps_;
  const std::vector<std::size_t>& rows_;
  const std::vector<std::size_t>& cols_;
  bool strict_;
  std::vector<double> values_;
};

void score_cell(CellSpec& cell, std::span<const Representation> reps,
                const AbxOptions& opt, std::uint64_t cell_seed) {
  DistanceCache dax(reps, cell.a, cell.x, opt.strict);
  DistanceCache dbx(reps, cell.b, cell.x, opt.strict);
  auto triple = [&](std::size_t ia, std::size_t ib, std::size_t ix) {
    const double d1 = dax(ia, ix), d2 = dbx(ib, ix);
    return d1 < d2 ? 1.0 : (d1 == d2 ? 0.5 : 0.0);
  };

  const std::size_t na = cell.a.size(), nb = cell.b.size(), nx = cell.x.size();
  const std::size_t total =
      cell.x_is_a ? na * (na - 1) * nb : na * nb * nx;
  double sum = 0.0;
  std::size_t used = 0;
  if (total <= opt.max_triples_per_cell) {
    for (std::size_t ix = 0; ix < nx; ++ix)
      for (std::size_t ia = 0; ia < na; ++ia) {
        if (cell.x_is_a && ia == ix) continue;
        for (std::size_t ib = 0; ib < nb; ++ib) sum += triple(ia, ib, ix);
      }
    used = total;
  } else {
    std::mt19937_64 rng(cell_seed);
    std::uniform_int_distribution<std::size_t> pa(0, na - 1), pb(0, nb - 1),
        px(0, nx - 1);
    for (std::size_t k = 0; k < opt.max_triples_per_cell; ++k) {
      const std::size_t ix = px(rng);
      std::size_t ia;
      if (cell.x_is_a) {
        // Uniform over A != X.
        ia = std::uniform_int_distribution<std::size_t>(0, na - 2)(rng);
        if (ia >= ix) ++ia;
      } else {
        ia = pa(rng);
      }
      const std::size_t ib = pb(rng);
      sum += triple(ia, ib, ix);
    }
    used = opt.max_triples_per_cell;
    cell.meta.sampled = true;
  }
  cell.meta.triples = used;
  cell.meta.score = sum / static_cast<double>(used);
}

using Context = std::pair<std::string, std::string>;
using PhoneLists = std::map<std::string, std::vector<std::size_t>>;

std::vector<CellSpec> enumerate_cells(std::span<const AbxItem> items,
                                      AbxCondition condition) {
  // context -> speaker -> phone -> item indices; map order fixes cell order.
  std::map<Context, std::map<std::string, PhoneLists>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    groups[{it.prev, it.next}][it.speaker][it.phone].push_back(i);
  }

  std::vector<CellSpec> cells;
  for (const auto& [ctx, by_speaker] : groups) {
    for (const auto& [spk, phones] : by_speaker) {
      for (const auto& [a, list_a] : phones) {
        for (const auto& [b, list_b] : phones) {
          if (a == b) continue;
          if (condition == AbxCondition::kWithin) {
            if (list_a.size() < 2) continue;
            CellSpec c;
            c.meta = {a, b, ctx.first, ctx.second, spk, spk, 0.0, 0, false};
            c.a = list_a;
            c.b = list_b;
            c.x = list_a;
            c.x_is_a = true;
            cells.push_back(std::move(c));
            continue;
          }
          for (const auto& [spk_x, phones_x] : by_speaker) {
            if (spk_x == spk) continue;
            auto xs = phones_x.find(a);
            if (xs == phones_x.end()) continue;
            CellSpec c;
            c.meta = {a, b, ctx.first, ctx.second, spk, spk_x, 0.0, 0, false};
            c.a = list_a;
            c.b = list_b;
            c.x = xs->second;
            cells.push_back(std::move(c));
          }
        }
      }
    }
  }
  return cells;
}

}  // namespace

AbxResult abx_score(std::span<const AbxItem> items,
                    std::span<const Representation> reps,
                    AbxCondition condition, const AbxOptions& options) {
  if (items.size() != reps.size())
    throw ValidationError("abx: items and representations differ in count");
  if (options.max_triples_per_cell == 0)
    throw ValidationError("abx: triple cap must be positive");

  auto cells = enumerate_cells(items, condition);
  if (cells.empty())
    throw ValidationError(std::string("abx: no valid ") +
                          std::string(to_string(condition)) +
                          "-speaker cells");

  for_each_chunk(cells.size(), options.threads,
                 [&](std::size_t, std::size_t b, std::size_t e) {
                   for (std::size_t k = b; k < e; ++k)
                     score_cell(cells[k], reps, options,
                                splitmix64(options.seed ^ splitmix64(k)));
                 });

  // Average each (a, b) cell with its (b, a) twin when both exist.
  using Key = std::tuple<std::string, std::string, std::string, std::string,
                         std::string, std::string>;
  std::map<Key, std::pair<double, int>> sym;
  for (const auto& c : cells) {
    const auto& m = c.meta;
    const auto& lo = std::min(m.phone_a, m.phone_b);
    const auto& hi = std::max(m.phone_a, m.phone_b);
    auto& slot = sym[{lo, hi, m.prev, m.next, m.speaker_ab, m.speaker_x}];
    slot.first += m.score;
    slot.second += 1;
  }
  AbxResult result;
  result.condition = condition;
  double total = 0.0;
  for (const auto& [_, v] : sym) total += v.first / v.second;
  result.symmetric_cells = sym.size();
  result.score = total / static_cast<double>(sym.size());
  result.cells.reserve(cells.size());
  for (auto& c : cells) result.cells.push_back(std::move(c.meta));
  return result;
}

}  // namespace phoneval
