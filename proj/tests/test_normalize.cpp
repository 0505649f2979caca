#include "ctiprof/normalize.hpp"

#include <vector>

#include "doctest.h"
#include "support/rng.hpp"

using namespace ctiprof;

TEST_CASE("group name normalization matches the rule table") {
  auto rules = default_group_rules();
  CHECK(normalize_group_name("Lazarus Group", rules) == "lazarus");
  CHECK(normalize_group_name("TEMP.Veles", rules) == "veles");
  CHECK(normalize_group_name("lazarus", rules) == "lazarus");
  CHECK(normalize_group_name("Equation Team", rules) == "equation");
  CHECK(normalize_group_name("Threat Group-3390", rules) == "tg-3390");
  CHECK(normalize_group_name("Sofacy Framework", rules) == "sofacy");
  CHECK(normalize_group_name("  Winnti   Group ", rules) == "winnti");
  // "team" is only replaced as a whole word
  CHECK(normalize_group_name("Team9", rules) == "team9");
}

TEST_CASE("fully rule-consumed names fall back to the lower-cased raw string") {
  auto rules = default_group_rules();
  CHECK(normalize_group_name("Team", rules) == "team");
  CHECK(normalize_group_name("group", rules) == "group");
}

TEST_CASE("software name normalization matches the rule table") {
  auto rules = default_software_rules();
  CHECK(normalize_software_name("win.plugx", rules) == "plugx");
  CHECK(normalize_software_name("Poison_RAT", rules) == "poisonrat");
  CHECK(normalize_software_name("mimikatz", rules) == "mimikatz");
  CHECK(normalize_software_name("apk.skygofree", rules) == "skygofree");
  CHECK(normalize_software_name("elf.mirai", rules) == "mirai");
  CHECK(normalize_software_name("Trojan.Gh0st", rules) == "gh0st");
  CHECK(normalize_software_name("8.t", rules) == "8.t");
  // separator only dropped before the suffix token
  CHECK(normalize_software_name("x-rat", rules) == "xrat");
  CHECK(normalize_software_name("x-ratel", rules) == "x-ratel");
}

TEST_CASE("normalization is idempotent") {
  auto group_rules = default_group_rules();
  auto software_rules = default_software_rules();
  std::vector<std::string> names = {
      "Lazarus Group", "TEMP.Veles",  "Threat Group-3390", "Equation Team",
      "APT28",         "Fancy Bear",  "TeamTNT",           "TEMP.Hermit",
      "win.plugx",     "Poison_RAT",  "trojan.win.emotet", "elf_rat",
      "GROUP",         "Team Team",   "temp.temp.abc",     "a",
      "8.t dropper",   "win win",     "Sandworm Team",     "Gamaredon Group",
  };
  // A pile of generated junk exercises the same property away from the
  // hand-picked cases.
  testing::SplitMix64 rng(0x1de9f00d);
  const std::string alphabet = "abcdefgXYZ0123 ._-/";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    auto len = 1 + rng.below(24);
    for (std::uint64_t k = 0; k < len; ++k) s.push_back(alphabet[rng.below(alphabet.size())]);
    names.push_back(std::move(s));
  }
  for (const auto& raw : names) {
    if (raw.empty()) continue;
    std::string g1 = group_rules.apply(raw);
    CHECK_MESSAGE(group_rules.apply(g1) == g1, "group rules not idempotent on: ", raw);
    std::string s1 = software_rules.apply(raw);
    CHECK_MESSAGE(software_rules.apply(s1) == s1, "software rules not idempotent on: ", raw);
  }
}
