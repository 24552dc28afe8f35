#include "phoneval/inventory.hpp"

#include <fstream>
#include <sstream>

#include "phoneval/error.hpp"
#include "text_util.hpp"

namespace phoneval {

namespace {

constexpr std::array<std::string_view, kNumPhonemeClasses> kClassNames = {
    "fricative", "affricate", "plosive",    "vibrant", "nasal",
    "approximant", "monophthong", "diphthong", "silence"};

}  // namespace

std::string_view to_string(PhonemeClass c) {
  return kClassNames[static_cast<int>(c)];
}

std::optional<PhonemeClass> parse_phoneme_class(std::string_view label) {
  // Silence is never a valid class for a declared phoneme.
  for (int i = 0; i < kNumPhonemeClasses - 1; ++i)
    if (kClassNames[i] == label) return static_cast<PhonemeClass>(i);
  return std::nullopt;
}

const std::array<PhonemeClass, kNumPhonemeClasses>& all_phoneme_classes() {
  static const std::array<PhonemeClass, kNumPhonemeClasses> all = {
      PhonemeClass::kFricative,   PhonemeClass::kAffricate,
      PhonemeClass::kPlosive,     PhonemeClass::kVibrant,
      PhonemeClass::kNasal,       PhonemeClass::kApproximant,
      PhonemeClass::kMonophthong, PhonemeClass::kDiphthong,
      PhonemeClass::kSilence};
  return all;
}

PhonemeInventory::PhonemeInventory(std::string language, std::string silence,
                                   std::vector<std::string> symbols,
                                   std::vector<PhonemeClass> classes)
    : language_(std::move(language)),
      silence_(std::move(silence)),
      symbols_(std::move(symbols)),
      classes_(std::move(classes)) {
  if (language_.empty())
    throw ValidationError("inventory: empty language identifier");
  if (silence_.empty())
    throw ValidationError("inventory " + language_ +
                          ": missing silence declaration");
  if (symbols_.size() != classes_.size())
    throw ValidationError("inventory " + language_ +
                          ": symbol/class count mismatch");
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    const auto& s = symbols_[i];
    if (s.empty())
      throw ValidationError("inventory " + language_ + ": empty symbol");
    if (s == silence_)
      throw ValidationError("inventory " + language_ + ": silence symbol '" +
                            s + "' also declared as a phoneme");
    if (classes_[i] == PhonemeClass::kSilence)
      throw ValidationError("inventory " + language_ + ": phoneme '" + s +
                            "' declared with class silence");
    if (!index_.emplace(s, static_cast<PhoneIndex>(i)).second)
      throw ValidationError("inventory " + language_ + ": duplicate symbol '" +
                            s + "'");
  }
}

const std::string& PhonemeInventory::symbol(PhoneIndex i) const {
  if (i == silence_index()) return silence_;
  return symbols_.at(static_cast<std::size_t>(i));
}

PhonemeClass PhonemeInventory::phone_class(PhoneIndex i) const {
  if (i == silence_index()) return PhonemeClass::kSilence;
  return classes_.at(static_cast<std::size_t>(i));
}

std::optional<PhoneIndex> PhonemeInventory::find(std::string_view s) const {
  if (s == silence_) return silence_index();
  auto it = index_.find(std::string(s));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

PhonemeInventory parse_inventory(std::string_view text,
                                 const std::string& origin) {
  if (!detail::is_valid_utf8(text))
    throw ValidationError(origin + ": malformed UTF-8");

  std::string language, silence;
  std::optional<long> declared;
  std::vector<std::string> symbols;
  std::vector<PhonemeClass> classes;

  int line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    const auto where = origin + ":" + std::to_string(line_no);
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;

    if (line.find('\t') != std::string_view::npos) {
      auto fields = detail::split(line, '\t');
      if (fields.size() != 2)
        throw ValidationError(where + ": expected '<symbol>\\t<class>'");
      auto cls = parse_phoneme_class(detail::trim(fields[1]));
      if (!cls)
        throw ValidationError(where + ": unknown class label '" +
                              std::string(fields[1]) + "'");
      symbols.emplace_back(detail::trim(fields[0]));
      classes.push_back(*cls);
      continue;
    }

    auto colon = line.find(':');
    if (colon == std::string_view::npos)
      throw ValidationError(where + ": expected 'key: value' header or record");
    auto key = detail::trim(line.substr(0, colon));
    auto value = std::string(detail::trim(line.substr(colon + 1)));
    if (key == "language") {
      language = value;
    } else if (key == "silence") {
      silence = value;
    } else if (key == "phonemes") {
      declared = detail::parse_int(value, where);
    } else {
      throw ValidationError(where + ": unknown header '" + std::string(key) +
                            "'");
    }
  }
  if (silence.empty())
    throw ValidationError(origin + ": missing silence declaration");
  if (language.empty())
    throw ValidationError(origin + ": missing language declaration");
  if (declared && *declared != static_cast<long>(symbols.size()))
    throw ValidationError(origin + ": declares " + std::to_string(*declared) +
                          " phonemes but lists " +
                          std::to_string(symbols.size()));
  try {
    return PhonemeInventory(std::move(language), std::move(silence),
                            std::move(symbols), std::move(classes));
  } catch (const ValidationError& e) {
    throw ValidationError(origin + ": " + e.what());
  }
}

PhonemeInventory load_inventory(const std::filesystem::path& path) {
  return parse_inventory(detail::read_file(path), path.string());
}

std::string serialize_inventory(const PhonemeInventory& inv) {
  std::ostringstream out;
  out << "language: " << inv.language() << '\n';
  out << "silence: " << inv.silence() << '\n';
  out << "phonemes: " << inv.size() << '\n';
  for (PhoneIndex i = 0; i < inv.size(); ++i)
    out << inv.symbol(i) << '\t' << to_string(inv.phone_class(i)) << '\n';
  return out.str();
}

}  // namespace phoneval
