#ifndef PHONEVAL_INVENTORY_HPP
#define PHONEVAL_INVENTORY_HPP

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "phoneval/types.hpp"

namespace phoneval {

enum class PhonemeClass : int {
  kFricative = 0,
  kAffricate,
  kPlosive,
  kVibrant,
  kNasal,
  kApproximant,
  kMonophthong,
  kDiphthong,
  kSilence,
};

constexpr int kNumPhonemeClasses = 9;

std::string_view to_string(PhonemeClass c);
std::optional<PhonemeClass> parse_phoneme_class(std::string_view label);
const std::array<PhonemeClass, kNumPhonemeClasses>& all_phoneme_classes();

/// A language's phoneme set plus the reserved silence symbol.
///
/// Phone indices follow file order; silence always gets index size(), so a
/// contingency table over an inventory has size() + 1 rows. The ordering is
/// the canonical tie-break order for every argmax in the library.
class PhonemeInventory {
 public:
  PhonemeInventory() = default;

  /// Validates on construction. Throws ValidationError.
  PhonemeInventory(std::string language, std::string silence,
                   std::vector<std::string> symbols,
                   std::vector<PhonemeClass> classes);

  const std::string& language() const { return language_; }
  const std::string& silence() const { return silence_; }
  const std::vector<std::string>& symbols() const { return symbols_; }

  /// |P|, silence excluded.
  int size() const { return static_cast<int>(symbols_.size()); }
  PhoneIndex silence_index() const { return size(); }
  /// Rows of a contingency table: |P| + 1.
  int num_labels() const { return size() + 1; }

  /// Symbol for any index in [0, size()], silence included.
  const std::string& symbol(PhoneIndex i) const;
  PhonemeClass phone_class(PhoneIndex i) const;
  std::optional<PhoneIndex> find(std::string_view symbol) const;

 private:
  std::string language_;
  std::string silence_;
  std::vector<std::string> symbols_;
  std::vector<PhonemeClass> classes_;
  std::unordered_map<std::string, PhoneIndex> index_;
};

PhonemeInventory parse_inventory(std::string_view text,
                                 const std::string& origin = "<string>");
PhonemeInventory load_inventory(const std::filesystem::path& path);
std::string serialize_inventory(const PhonemeInventory& inv);

/// Vocabulary size of the one-to-one track: |P| + 1 (silence).
inline int one_to_one_vocab_size(const PhonemeInventory& inv) {
  return inv.size() + 1;
}

}  // namespace phoneval

#endif  // PHONEVAL_INVENTORY_HPP
