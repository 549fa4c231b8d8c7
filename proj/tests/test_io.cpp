#include <catch2/catch_amalgamated.hpp>

#include "test_designs.hpp"

using namespace tcdesign;
using tcdesign::testing::unequal_blocks_v2;

TEST_CASE("design JSON round trips") {
  SECTION("exact designs") {
    auto design = unequal_blocks_v2();
    auto parsed = design_from_json(to_json(design));
    REQUIRE(std::holds_alternative<ExactDesign>(parsed));
    CHECK(std::get<ExactDesign>(parsed) == design);
  }
  SECTION("rational approximate designs keep exact entries") {
    auto design = normalize(unequal_blocks_v2());
    auto parsed = design_from_json(to_json(design));
    REQUIRE(std::holds_alternative<ApproxDesign<Rational>>(parsed));
    CHECK(std::get<ApproxDesign<Rational>>(parsed) == design);
  }
  SECTION("real approximate designs stay in floating point") {
    auto design = random_feasible_approx(2, 3, 5);
    auto parsed = design_from_json(to_json(design));
    REQUIRE(std::holds_alternative<ApproxDesign<double>>(parsed));
    CHECK(std::get<ApproxDesign<double>>(parsed) == design);
  }
  SECTION("rational strings parse inside real allocations") {
    json doc{{"kind", "approximate"},
             {"v", 1},
             {"d", 1},
             {"allocation", json::array({json::array({"1/4"}), json::array({0.75})})}};
    auto parsed = design_from_json(doc);
    REQUIRE(std::holds_alternative<ApproxDesign<double>>(parsed));
    CHECK(std::get<ApproxDesign<double>>(parsed)(0, 0) == 0.25);
  }
}

TEST_CASE("design JSON rejects malformed documents") {
  json good = to_json(unequal_blocks_v2());
  SECTION("missing fields") {
    for (const char* key : {"kind", "v", "d", "m", "allocation"}) {
      json doc = good;
      doc.erase(key);
      CHECK_THROWS_AS(design_from_json(doc), std::invalid_argument);
    }
  }
  SECTION("unknown kind") {
    json doc = good;
    doc["kind"] = "mixed";
    CHECK_THROWS_AS(design_from_json(doc), std::invalid_argument);
  }
  SECTION("row count disagrees with v") {
    json doc = good;
    doc["v"] = 3;
    CHECK_THROWS_AS(design_from_json(doc), std::invalid_argument);
  }
  SECTION("non-integer entries in an exact allocation") {
    json doc = good;
    doc["allocation"][0][0] = 1.5;
    CHECK_THROWS_AS(design_from_json(doc), std::invalid_argument);
  }
  SECTION("column sums must match m") {
    json doc = good;
    doc["m"] = std::vector<int>{2, 2, 5};
    CHECK_THROWS_AS(design_from_json(doc), std::invalid_argument);
  }
  SECTION("bad rational literals") {
    CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("a/b"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1/2/3"), std::invalid_argument);
    CHECK(parse_rational("-3/6") == make_rational(-1, 2));
  }
}

TEST_CASE("CSV export") {
  SECTION("exact design") {
    std::string csv = to_csv(unequal_blocks_v2());
    CHECK(csv ==
          "treatment,block_1,block_2,block_3\n"
          "0,1,1,2\n"
          "1,1,0,1\n"
          "2,0,1,1\n");
  }
  SECTION("rational design uses p/q entries") {
    std::string csv = to_csv(normalize(unequal_blocks_v2()));
    CHECK(csv.find("0,1/8,1/8,1/4\n") != std::string::npos);
  }
}

TEST_CASE("report serialization") {
  SECTION("criterion values") {
    json doc = to_json(evaluate(unequal_blocks_v2(), Criterion::E));
    CHECK(doc.at("criterion") == "E");
    CHECK(doc.at("feasible") == true);
    CHECK(doc.at("value_exact") == "1");
  }
  SECTION("condition reports list violations by name") {
    ExactDesign lopsided({2, 2}, Matrix<Count>(3, 2, {2, 0, 0, 1, 0, 1}));
    json doc = to_json(verify_conditions(lopsided, Family::Thm3));
    CHECK(doc.at("satisfied") == false);
    CHECK(doc.at("conditions").at("control_half_block") == false);
    CHECK(doc.at("conditions").at("equireplicated_tests") == true);
  }
  SECTION("certificates") {
    auto cert = certify(Claim::Prop1_E_opt, 2, 2, {2, 2});
    json with_timing = to_json(cert);
    CHECK(with_timing.contains("wall_time_seconds"));
    json stable = to_json(cert, false);
    CHECK_FALSE(stable.contains("wall_time_seconds"));
    CHECK(stable.at("holds") == true);
    CHECK(stable.at("optimum") == "2");
    CHECK(stable.at("first_optimizer").at("kind") == "exact");
  }
  SECTION("enumeration spaces") {
    json doc = to_json(enumeration_space(2, 3, {2, 2, 4}));
    CHECK(doc.at("total") == "540");
    CHECK(doc.at("per_column") == json::array({"6", "6", "15"}));
  }
}
