#include <doctest.h>

#include <map>

#include "phoneval/error.hpp"
#include "phoneval/inventory.hpp"
#include "support.hpp"

using namespace phoneval;

TEST_CASE("parse a small inventory") {
  const auto inv = parse_inventory(
      "# comment\n"
      "language: xx\n"
      "silence: SIL\n"
      "p\tplosive\n"
      "a\tmonophthong\n"
      "ai\tdiphthong\n");
  CHECK(inv.language() == "xx");
  CHECK(inv.size() == 3);
  CHECK(inv.silence_index() == 3);
  CHECK(inv.num_labels() == 4);
  CHECK(inv.symbol(3) == "SIL");
  CHECK(inv.phone_class(3) == PhonemeClass::kSilence);
  CHECK(inv.phone_class(2) == PhonemeClass::kDiphthong);
  CHECK(inv.find("a") == 1);
  CHECK_FALSE(inv.find("zz"));
  CHECK(one_to_one_vocab_size(inv) == 4);
}

TEST_CASE("inventory rejects malformed input") {
  const std::string head = "language: xx\nsilence: SIL\n";
  CHECK_THROWS_AS(parse_inventory(head + "p\tplosive\np\tnasal\n"), ValidationError);
  CHECK_THROWS_AS(parse_inventory(head + "p\tclick\n"), ValidationError);
  CHECK_THROWS_AS(parse_inventory(head + "SIL\tnasal\n"), ValidationError);
  CHECK_THROWS_AS(parse_inventory(head + "s\tsilence\n"), ValidationError);
  CHECK_THROWS_AS(parse_inventory("language: xx\np\tplosive\n"), ValidationError);
  CHECK_THROWS_AS(parse_inventory("silence: SIL\np\tplosive\n"), ValidationError);
  CHECK_THROWS_AS(parse_inventory(head + "phonemes: 2\np\tplosive\n"), ValidationError);
  CHECK_THROWS_AS(parse_inventory(head + "p plosive\n"), ValidationError);
  CHECK_THROWS_AS(parse_inventory(head + "\xff\tplosive\n"), ValidationError);
}

TEST_CASE("serialize round trip") {
  const auto inv = testing::toy_inventory(8);
  const auto back = parse_inventory(serialize_inventory(inv));
  CHECK(back.symbols() == inv.symbols());
  for (int i = 0; i <= inv.size(); ++i) CHECK(back.phone_class(i) == inv.phone_class(i));
  CHECK(back.silence() == inv.silence());
}

TEST_CASE("bundled inventories load with the published sizes") {
  const std::map<std::string, int> sizes{
      {"german", 41},   {"swahili", 29}, {"tamil", 29},    {"thai", 40},
      {"turkish", 27},  {"ukrainian", 35}, {"basque", 29}, {"english", 39},
      {"french", 34},   {"japanese", 42}, {"mandarin", 42}, {"wolof", 39}};
  for (const auto& [lang, n] : sizes) {
    CAPTURE(lang);
    const auto inv = testing::data_inventory(lang);
    CHECK(inv.size() == n);
    CHECK(inv.language() == lang);
    CHECK(inv.silence() == "SIL");
  }
}
