#include "ctiprof/attack.hpp"

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "json.hpp"

using namespace ctiprof;
using nlohmann::json;

namespace {

json stix_ref(const std::string& external_id) {
  return {{"source_name", "mitre-attack"},
          {"external_id", external_id},
          {"url", "https://attack.mitre.org/x/" + external_id}};
}

json group_obj(const std::string& stix_id, const std::string& gid,
               const std::string& name, std::vector<std::string> aliases = {},
               std::vector<std::string> report_urls = {}) {
  json refs = json::array({stix_ref(gid)});
  for (const auto& url : report_urls) {
    refs.push_back({{"source_name", "Vendor"}, {"url", url}, {"description", "report"}});
  }
  json aliases_json = json::array({name});
  for (const auto& a : aliases) aliases_json.push_back(a);
  return {{"type", "intrusion-set"}, {"id", stix_id},        {"name", name},
          {"aliases", aliases_json}, {"external_references", refs}};
}

json technique_obj(const std::string& stix_id, const std::string& tid,
                   const std::string& name, const std::string& domain,
                   std::vector<std::string> phases = {}) {
  json obj = {{"type", "attack-pattern"},
              {"id", stix_id},
              {"name", name},
              {"external_references", json::array({stix_ref(tid)})},
              {"x_mitre_domains", json::array({domain})}};
  if (!phases.empty()) {
    json kcp = json::array();
    for (const auto& p : phases) {
      kcp.push_back({{"kill_chain_name", "mitre-attack"}, {"phase_name", p}});
    }
    obj["kill_chain_phases"] = kcp;
  }
  return obj;
}

json software_obj(const std::string& type, const std::string& stix_id,
                  const std::string& sid, const std::string& name) {
  return {{"type", type},
          {"id", stix_id},
          {"name", name},
          {"x_mitre_aliases", json::array({name})},
          {"external_references", json::array({stix_ref(sid)})}};
}

json uses(const std::string& src, const std::string& dst) {
  return {{"type", "relationship"},
          {"id", "relationship--" + src + dst},
          {"relationship_type", "uses"},
          {"source_ref", src},
          {"target_ref", dst}};
}

json sample_bundle() {
  json objects = json::array();
  objects.push_back({{"type", "x-mitre-collection"},
                     {"id", "x-mitre-collection--1"},
                     {"x_mitre_version", "15.1"}});
  objects.push_back({{"type", "x-mitre-tactic"},
                     {"id", "x-mitre-tactic--1"},
                     {"x_mitre_shortname", "initial-access"},
                     {"x_mitre_domains", json::array({"enterprise-attack"})},
                     {"external_references", json::array({stix_ref("TA0001")})}});
  objects.push_back(group_obj("intrusion-set--a", "G0001", "Alpha Group",
                              {"AlphaBear"},
                              {"https://intel.example.com/alpha", "https://Shared.example.com/joint"}));
  objects.push_back(group_obj("intrusion-set--b", "G0002", "Beta Group", {},
                              {"https://Shared.example.com/joint"}));
  // revoked group: filtered together with its relationships
  json revoked = group_obj("intrusion-set--c", "G0099", "Gone Group");
  revoked["revoked"] = true;
  objects.push_back(revoked);
  objects.push_back(technique_obj("attack-pattern--1", "T1566", "Phishing",
                                  "enterprise-attack", {"initial-access"}));
  objects.push_back(technique_obj("attack-pattern--2", "T1566.001",
                                  "Spearphishing Attachment", "enterprise-attack",
                                  {"initial-access"}));
  objects.push_back(technique_obj("attack-pattern--3", "T1430", "Location Tracking",
                                  "mobile-attack"));
  objects.push_back(technique_obj("attack-pattern--4", "T0800", "Activate Firmware",
                                  "ics-attack"));
  json deprecated = technique_obj("attack-pattern--5", "T9998", "Old Technique",
                                  "enterprise-attack");
  deprecated["x_mitre_deprecated"] = true;
  objects.push_back(deprecated);
  objects.push_back(software_obj("tool", "tool--1", "S0001", "NiceTool"));
  objects.push_back(software_obj("malware", "malware--1", "S0002", "BadSoft"));
  objects.push_back(uses("intrusion-set--a", "attack-pattern--1"));
  objects.push_back(uses("intrusion-set--a", "attack-pattern--2"));
  objects.push_back(uses("intrusion-set--a", "malware--1"));
  objects.push_back(uses("intrusion-set--b", "attack-pattern--2"));
  objects.push_back(uses("intrusion-set--c", "attack-pattern--1"));  // revoked source
  objects.push_back(uses("malware--1", "attack-pattern--1"));        // not a group edge
  objects.push_back({{"type", "relationship"},
                     {"id", "relationship--attr"},
                     {"relationship_type", "attributed-to"},
                     {"source_ref", "intrusion-set--a"},
                     {"target_ref", "intrusion-set--b"}});
  objects.push_back({{"type", "course-of-action"}, {"id", "course-of-action--1"}});
  objects.push_back({{"type", "identity"}, {"id", "identity--1"}});
  return json{{"type", "bundle"}, {"id", "bundle--x"}, {"objects", objects}};
}

}  // namespace

TEST_CASE("sample bundle loads with filtering, associations and report refs") {
  auto snap = load_attack_bundle(sample_bundle().dump());

  CHECK(snap.version == "15.1");
  REQUIRE(snap.groups.size() == 2);
  CHECK(snap.groups[0].source_id == "G0001");
  CHECK(snap.groups[0].names ==
        std::vector<std::string>{"Alpha Group", "AlphaBear"});

  REQUIRE(snap.techniques.size() == 4);
  CHECK(snap.subtechnique_count() == 1);
  CHECK(snap.domain_count(Domain::Enterprise) == 2);
  CHECK(snap.domain_count(Domain::Mobile) == 1);
  CHECK(snap.domain_count(Domain::Ics) == 1);
  for (const auto& t : snap.techniques) {
    CHECK(t.is_subtechnique() == (t.id.find('.') != std::string::npos));
    if (t.id == "T1566.001") {
      REQUIRE(t.parent_id.has_value());
      CHECK(*t.parent_id == "T1566");
    }
    if (t.id == "T1566") CHECK(t.tactic_ids == std::set<std::string>{"TA0001"});
  }

  REQUIRE(snap.software.size() == 2);
  CHECK(snap.software[0].kind == SoftwareKind::Tool);
  CHECK(snap.software[1].kind == SoftwareKind::Malware);

  // G0001 -> T1566, T1566.001, S0002; G0002 -> T1566.001. Revoked and
  // non-group edges dropped.
  REQUIRE(snap.associations.size() == 4);
  for (const auto& a : snap.associations) {
    CHECK(a.provenance == Provenance::AttackCatalog);
    CHECK((a.group_id == "G0001" || a.group_id == "G0002"));
  }

  CHECK(snap.diagnostics.revoked_filtered == 1);
  CHECK(snap.diagnostics.deprecated_filtered == 1);
  CHECK(snap.diagnostics.skipped_object_types.at("course-of-action") == 1);
  CHECK(snap.diagnostics.skipped_object_types.at("identity") == 1);
  // attributed-to, malware->technique, revoked-source uses
  CHECK(snap.diagnostics.ignored_relationships >= 2);

  SUBCASE("group report URLs are deduplicated and carry linked groups") {
    auto refs = attack_group_report_urls(snap);
    REQUIRE(refs.size() == 2);
    CHECK(refs[0].url == "https://Shared.example.com/joint");
    CHECK(refs[0].fqdn == "shared.example.com");
    CHECK(refs[0].linked_groups == std::set<std::string>{"G0001", "G0002"});
    CHECK(refs[1].url == "https://intel.example.com/alpha");
    CHECK(refs[1].linked_groups == std::set<std::string>{"G0001"});
    // the attack.mitre.org self-references never become report refs
    for (const auto& r : refs) CHECK(r.url.find("attack.mitre.org") == std::string::npos);
  }

  SUBCASE("no association references a missing behavior") {
    std::set<std::string> known;
    for (const auto& t : snap.techniques) known.insert(t.id);
    for (const auto& s : snap.software) known.insert(s.id);
    for (const auto& a : snap.associations) CHECK(known.count(a.behavior_id) == 1);
  }

  SUBCASE("reloading yields an identical snapshot") {
    auto again = load_attack_bundle(sample_bundle().dump());
    REQUIRE(again.groups.size() == snap.groups.size());
    REQUIRE(again.techniques.size() == snap.techniques.size());
    REQUIRE(again.associations.size() == snap.associations.size());
    for (std::size_t i = 0; i < snap.techniques.size(); ++i) {
      CHECK(again.techniques[i].id == snap.techniques[i].id);
    }
    for (std::size_t i = 0; i < snap.associations.size(); ++i) {
      CHECK(again.associations[i].group_id == snap.associations[i].group_id);
      CHECK(again.associations[i].behavior_id == snap.associations[i].behavior_id);
    }
  }
}

TEST_CASE("empty bundle yields an empty snapshot") {
  auto snap = load_attack_bundle(R"({"objects":[]})");
  CHECK(snap.groups.empty());
  CHECK(snap.techniques.empty());
  CHECK(snap.software.empty());
  CHECK(snap.associations.empty());
  CHECK(snap.report_refs.empty());
}

TEST_CASE("malformed JSON reports the byte offset") {
  try {
    load_attack_bundle(R"({"objects":[{"type":)");
    FAIL("expected parse error");
  } catch (const std::runtime_error& e) {
    std::string msg = e.what();
    CHECK(msg.find("byte") != std::string::npos);
  }
  CHECK_THROWS_AS(load_attack_bundle(R"({"not_objects":true})"), std::runtime_error);
}

TEST_CASE("three groups with two distinct URLs each produce six refs") {
  json objects = json::array();
  for (int g = 1; g <= 3; ++g) {
    std::string gid = "G000" + std::to_string(g);
    objects.push_back(group_obj("intrusion-set--" + gid, gid, "Group " + gid, {},
                                {"https://reports.example.com/" + gid + "/one",
                                 "https://reports.example.com/" + gid + "/two"}));
  }
  auto snap = load_attack_bundle(json{{"objects", objects}}.dump());
  CHECK(attack_group_report_urls(snap).size() == 6);
}

TEST_CASE("multiple bundle files merge into one snapshot") {
  auto dir = std::filesystem::temp_directory_path() / "ctiprof_attack_test";
  std::filesystem::create_directories(dir);
  json b1 = {{"objects", json::array({group_obj("intrusion-set--a", "G0001", "Alpha"),
                                      technique_obj("attack-pattern--1", "T1001",
                                                    "Tech One", "enterprise-attack")})}};
  json b2 = {{"objects", json::array({group_obj("intrusion-set--b", "G0002", "Beta"),
                                      technique_obj("attack-pattern--2", "T1430",
                                                    "Tech Two", "mobile-attack")})}};
  auto p1 = dir / "one.json";
  auto p2 = dir / "two.json";
  std::ofstream(p1) << b1.dump();
  std::ofstream(p2) << b2.dump();
  auto snap = load_attack_bundles({p1.string(), p2.string()});
  CHECK(snap.groups.size() == 2);
  CHECK(snap.techniques.size() == 2);
  std::filesystem::remove_all(dir);
}
