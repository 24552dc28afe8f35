#include "phoneval/corpus_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <set>
#include <sstream>

#include "phoneval/error.hpp"
#include "text_util.hpp"

namespace phoneval {

namespace fs = std::filesystem;

int UnitCorpus::observed_vocab() const {
  int top = -1;
  for (const auto& [id, units] : utterances)
    for (UnitId u : units) top = std::max(top, u);
  return top + 1;
}

std::string_view to_string(Track t) {
  return t == Track::kManyToOne ? "many-to-one" : "one-to-one";
}

Track parse_track(std::string_view s) {
  if (s == "many-to-one") return Track::kManyToOne;
  if (s == "one-to-one") return Track::kOneToOne;
  throw ValidationError("unknown track '" + std::string(s) +
                        "' (expected many-to-one or one-to-one)");
}

// ---------------------------------------------------------------- gold

PhoneCorpus parse_gold(std::string_view text, const PhonemeInventory& inv,
                       const std::string& origin) {
  if (!detail::is_valid_utf8(text))
    throw ValidationError(origin + ": malformed UTF-8");

  PhoneCorpus corpus;
  std::string current;
  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    const auto where = origin + ":" + std::to_string(line_no);
    if (detail::trim(line).empty() || line.front() == '#') continue;

    auto f = detail::split(line, '\t');
    if (f.size() != 5)
      throw ValidationError(where + ": expected 5 tab-separated fields, got " +
                            std::to_string(f.size()));
    std::string utt(detail::trim(f[0]));
    std::string speaker(detail::trim(f[1]));
    auto phone_sym = detail::trim(f[2]);
    Micros onset = detail::parse_seconds(detail::trim(f[3]), where);
    Micros offset = detail::parse_seconds(detail::trim(f[4]), where);

    auto phone = inv.find(phone_sym);
    if (!phone)
      throw ValidationError(where + ": utterance " + utt + ": symbol '" +
                            std::string(phone_sym) + "' not in inventory " +
                            inv.language());
    if (onset < 0)
      throw ValidationError(where + ": utterance " + utt + ": negative onset");
    if (offset <= onset)
      throw ValidationError(where + ": utterance " + utt +
                            ": offset <= onset");

    if (utt != current) {
      if (corpus.utterances.count(utt))
        throw ValidationError(where + ": utterance " + utt +
                              " is not contiguous (file must be sorted by "
                              "utterance)");
      corpus.utterances[utt].speaker = speaker;
      current = utt;
    }
    auto& u = corpus.utterances[utt];
    if (u.speaker != speaker)
      throw ValidationError(where + ": utterance " + utt +
                            " changes speaker mid-utterance");
    if (!u.segments.empty()) {
      const auto& prev = u.segments.back();
      if (onset < prev.onset)
        throw ValidationError(where + ": utterance " + utt +
                              ": segments not sorted by onset");
      if (onset < prev.offset)
        throw ValidationError(where + ": utterance " + utt +
                              ": overlapping segments");
    }
    u.segments.push_back({*phone, onset, offset});
    u.duration = offset;
  }
  return corpus;
}

PhoneCorpus load_gold(const fs::path& path, const PhonemeInventory& inv) {
  return parse_gold(detail::read_file(path), inv, path.string());
}

std::string serialize_gold(const PhoneCorpus& corpus,
                           const PhonemeInventory& inv) {
  std::ostringstream out;
  for (const auto& [id, utt] : corpus.utterances)
    for (const auto& s : utt.segments)
      out << id << '\t' << utt.speaker << '\t' << inv.symbol(s.phone) << '\t'
          << detail::format_seconds(s.onset) << '\t'
          << detail::format_seconds(s.offset) << '\n';
  return out.str();
}

// ---------------------------------------------------------------- units

UnitCorpus parse_units(std::string_view text, const std::string& origin) {
  UnitCorpus corpus;
  bool have_rate = false;
  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    const auto where = origin + ":" + std::to_string(line_no);
    auto trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;

    if (!have_rate) {
      constexpr std::string_view kKey = "frame_rate:";
      if (trimmed.substr(0, kKey.size()) != kKey)
        throw ValidationError(where + ": missing 'frame_rate: <Hz>' header");
      corpus.frame_rate =
          detail::parse_double(detail::trim(trimmed.substr(kKey.size())), where);
      if (!(corpus.frame_rate > 0))
        throw ValidationError(where + ": frame rate must be positive");
      have_rate = true;
      continue;
    }

    auto tokens = detail::split_ws(trimmed);
    std::string utt(tokens.front());
    if (corpus.utterances.count(utt))
      throw ValidationError(where + ": duplicate utterance " + utt);
    std::vector<UnitId> units;
    units.reserve(tokens.size() - 1);
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      auto tok = tokens[k];
      long v = 0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size())
        throw ValidationError(where + ": utterance " + utt + ", column " +
                              std::to_string(k) + ": non-integer unit '" +
                              std::string(tok) + "'");
      if (v < 0)
        throw ValidationError(where + ": utterance " + utt + ", column " +
                              std::to_string(k) + ": negative unit id");
      units.push_back(static_cast<UnitId>(v));
    }
    if (units.empty())
      corpus.warnings.push_back(where + ": utterance " + utt +
                                " has zero frames");
    corpus.utterances.emplace(std::move(utt), std::move(units));
  }
  if (!have_rate)
    throw ValidationError(origin + ": missing 'frame_rate: <Hz>' header");
  return corpus;
}

UnitCorpus load_units(const fs::path& path) {
  return parse_units(detail::read_file(path), path.string());
}

std::string serialize_units(const UnitCorpus& corpus) {
  std::ostringstream out;
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, corpus.frame_rate);
  out << "frame_rate: " << std::string_view(buf, p - buf) << '\n';
  for (const auto& [id, units] : corpus.utterances) {
    out << id;
    for (UnitId u : units) out << ' ' << u;
    out << '\n';
  }
  return out.str();
}

// ------------------------------------------------------------- manifest

fs::path data_root() {
  if (const char* env = std::getenv("PHONEVAL_DATA_ROOT"); env && *env)
    return fs::path(env);
#ifdef PHONEVAL_DEFAULT_DATA_ROOT
  return fs::path(PHONEVAL_DEFAULT_DATA_ROOT);
#else
  return fs::current_path() / "data";
#endif
}

namespace {

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  if (p.is_relative()) p = base / p;
  return fs::absolute(p).lexically_normal();
}

}  // namespace

Manifest load_manifest(const fs::path& path) {
  const auto text = detail::read_file(path);
  const auto base = fs::absolute(path).parent_path();
  const auto origin = path.string();

  std::map<std::string, std::string> kv;
  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto colon = t.find(':');
    if (colon == std::string_view::npos)
      throw ValidationError(origin + ":" + std::to_string(line_no) +
                            ": expected 'key: value'");
    kv[std::string(detail::trim(t.substr(0, colon)))] =
        std::string(detail::trim(t.substr(colon + 1)));
  }
  auto require = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end() || it->second.empty())
      throw ValidationError(origin + ": missing field '" + key + "'");
    return it->second;
  };

  Manifest m;
  m.language = require("language");
  try {
    m.track = parse_track(require("track"));
  } catch (const ValidationError& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  m.split = require("split");
  m.gold = resolve(base, require("gold"));
  m.units = resolve(base, require("units"));

  const auto& inv_value = require("inventory");
  m.inventory = resolve(base, inv_value);
  if (!fs::exists(m.inventory) &&
      inv_value.find('/') == std::string::npos) {
    auto named = data_root() / "inventories" / (inv_value + ".tsv");
    if (fs::exists(named)) m.inventory = fs::absolute(named).lexically_normal();
  }
  if (auto it = kv.find("features"); it != kv.end() && !it->second.empty())
    m.features = resolve(base, it->second);
  if (auto it = kv.find("abx_items"); it != kv.end() && !it->second.empty())
    m.abx_items = resolve(base, it->second);

  const auto inv = load_inventory(m.inventory);
  if (auto it = kv.find("vocab_size"); it != kv.end()) {
    m.vocab_size = static_cast<int>(detail::parse_int(it->second, origin));
  } else {
    m.vocab_size = m.track == Track::kOneToOne ? one_to_one_vocab_size(inv)
                                               : kDefaultManyToOneVocab;
  }
  try {
    check_manifest(m, inv);
  } catch (const ValidationError& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  return m;
}

void check_manifest(const Manifest& m, const PhonemeInventory& inv) {
  if (m.language != inv.language())
    throw ValidationError("manifest language '" + m.language +
                          "' does not match inventory language '" +
                          inv.language() + "'");
  if (m.vocab_size < 1)
    throw ValidationError("vocab_size must be positive");
  if (m.track == Track::kOneToOne &&
      m.vocab_size != one_to_one_vocab_size(inv))
    throw ValidationError(
        "one-to-one track requires vocab_size = |P|+1 = " +
        std::to_string(one_to_one_vocab_size(inv)) + ", got " +
        std::to_string(m.vocab_size));
}

std::string serialize_manifest(const Manifest& m) {
  std::ostringstream out;
  out << "language: " << m.language << '\n'
      << "track: " << to_string(m.track) << '\n'
      << "vocab_size: " << m.vocab_size << '\n'
      << "split: " << m.split << '\n'
      << "inventory: " << m.inventory.string() << '\n'
      << "gold: " << m.gold.string() << '\n'
      << "units: " << m.units.string() << '\n';
  if (!m.features.empty()) out << "features: " << m.features.string() << '\n';
  if (!m.abx_items.empty())
    out << "abx_items: " << m.abx_items.string() << '\n';
  return out.str();
}

UtteranceMismatch compare_utterances(const PhoneCorpus& gold,
                                     const UnitCorpus& units) {
  UtteranceMismatch mm;
  for (const auto& [id, _] : gold.utterances)
    if (!units.utterances.count(id)) mm.missing_units.push_back(id);
  for (const auto& [id, _] : units.utterances)
    if (!gold.utterances.count(id)) mm.missing_gold.push_back(id);
  return mm;
}

void require_matching_utterances(const PhoneCorpus& gold,
                                 const UnitCorpus& units) {
  auto mm = compare_utterances(gold, units);
  if (mm.empty()) return;
  std::ostringstream msg;
  msg << "utterance sets differ:";
  if (!mm.missing_units.empty()) {
    msg << " missing from units [";
    for (std::size_t i = 0; i < mm.missing_units.size(); ++i)
      msg << (i ? ", " : "") << mm.missing_units[i];
    msg << "]";
  }
  if (!mm.missing_gold.empty()) {
    msg << " missing from gold [";
    for (std::size_t i = 0; i < mm.missing_gold.size(); ++i)
      msg << (i ? ", " : "") << mm.missing_gold[i];
    msg << "]";
  }
  throw ValidationError(msg.str());
}

}  // namespace phoneval
