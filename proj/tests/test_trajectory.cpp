#include <doctest.h>

#include <random>
#include <sstream>

#include "destin/trajectory.hpp"
#include "oracles.hpp"

using namespace destin;

TEST_CASE("parse_track local frame") {
  const Track t = parse_track("t,x,y\n0,0,0\n1,1,0\n");
  CHECK_FALSE(t.geodetic);
  REQUIRE(t.samples.size() == 2);
  CHECK(t.samples[0].t == 0.0);
  CHECK(t.samples[1].x == 1.0);
}

TEST_CASE("parse_track geodetic header sets the flag") {
  const Track t = parse_track("t,lat,lon\n0,52.2,0.12\n1,52.2001,0.12\n");
  CHECK(t.geodetic);
  CHECK(t.samples.size() == 2);
}

TEST_CASE("parse_track error paths") {
  SUBCASE("duplicate timestamp") {
    CHECK_THROWS_AS(parse_track("t,x,y\n0,0,0\n0,1,0\n"), ParseError);
  }
  SUBCASE("decreasing timestamp") {
    CHECK_THROWS_AS(parse_track("t,x,y\n5,0,0\n4,1,0\n"), ParseError);
  }
  SUBCASE("bad header") {
    CHECK_THROWS_AS(parse_track("time,x,y\n0,0,0\n"), ParseError);
  }
  SUBCASE("malformed row reports its line number") {
    try {
      parse_track("t,x,y\n0,0,0\n1,abc,0\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line_number == 3);
    }
  }
  SUBCASE("wrong field count") {
    CHECK_THROWS_AS(parse_track("t,x,y\n0,0\n"), ParseError);
  }
  SUBCASE("empty stream") {
    CHECK_THROWS_AS(parse_track(""), ParseError);
  }
}

TEST_CASE("equirectangular projection") {
  SUBCASE("origin maps to (0,0)") {
    const auto local = latlon_to_local({{0.0, 52.2, 0.12}}, 52.2, 0.12);
    CHECK(local[0].x == doctest::Approx(0.0));
    CHECK(local[0].y == doctest::Approx(0.0));
  }
  SUBCASE("one degree of latitude is R pi/180 northward") {
    const auto local = latlon_to_local({{0.0, 53.2, 0.12}}, 52.2, 0.12);
    CHECK(local[0].x == doctest::Approx(0.0));
    CHECK(local[0].y == doctest::Approx(kEarthRadius * M_PI / 180.0).epsilon(1e-12));
    CHECK(local[0].y == doctest::Approx(111194.9).epsilon(1e-5));
  }
  SUBCASE("projection error against haversine below 0.1% within a kilometer") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dlat(-0.008, 0.008);  // ~±900 m
    const double lat0 = 48.1, lon0 = 11.6;
    for (int i = 0; i < 200; ++i) {
      const double lat = lat0 + dlat(rng);
      const double lon = lon0 + dlat(rng) / std::cos(lat0 * M_PI / 180.0);
      const auto local = latlon_to_local({{0.0, lat, lon}}, lat0, lon0);
      const double flat = std::hypot(local[0].x, local[0].y);
      const double exact = oracles::haversine_distance(lat0, lon0, lat, lon);
      if (exact > 1.0) {
        CHECK(std::abs(flat - exact) / exact < 1e-3);
      }
    }
  }
  SUBCASE("inverse projection recovers the input") {
    std::vector<TrackSample> geo{{0.0, 52.2004, 0.1207}, {1.0, 52.2011, 0.1199}};
    const auto local = latlon_to_local(geo, 52.2, 0.12);
    const auto back = local_to_latlon(local, 52.2, 0.12);
    for (std::size_t i = 0; i < geo.size(); ++i) {
      // 1e-9 m corresponds to ~1e-14 degrees
      CHECK(std::abs(back[i].x - geo[i].x) * kEarthRadius * M_PI / 180.0 < 1e-9);
      CHECK(std::abs(back[i].y - geo[i].y) * kEarthRadius * M_PI / 180.0 < 1e-9);
    }
  }
  SUBCASE("polar latitudes are rejected") {
    CHECK_THROWS_AS(latlon_to_local({{0.0, 86.0, 0.0}}, 86.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(latlon_to_local({{0.0, 87.0, 0.0}}, 52.0, 0.0), std::invalid_argument);
  }
}

TEST_CASE("report emission") {
  IntentReport r;
  r.t = 12.5;
  r.p_return = 0.875;
  r.p_not = 0.125;
  r.T_map = 97.5;
  r.T_std = 11.25;
  r.decision = Decision::Returning;

  SUBCASE("csv header is the exact contract string") {
    const std::string csv = emit_report({r}, ReportFormat::Csv);
    CHECK(csv.rfind("t,p_return,p_not,T_map,T_std,decision\n", 0) == 0);
  }
  SUBCASE("csv round trip") {
    r.p_return = 0.123456789012345;  // all significant digits must survive
    r.p_not = 1.0 - r.p_return;
    const auto parsed = parse_report_csv(emit_report({r}, ReportFormat::Csv));
    REQUIRE(parsed.size() == 1);
    CHECK(parsed[0].t == r.t);
    CHECK(parsed[0].p_return == r.p_return);
    CHECK(parsed[0].p_not == r.p_not);
    CHECK(parsed[0].T_map == r.T_map);
    CHECK(parsed[0].T_std == r.T_std);
    CHECK(parsed[0].decision == r.decision);
  }
  SUBCASE("decisions serialize as snake-case words") {
    IntentReport nr = r;
    nr.decision = Decision::NotReturning;
    IntentReport ud = r;
    ud.decision = Decision::Undecided;
    const std::string csv = emit_report({r, nr, ud}, ReportFormat::Csv);
    CHECK(csv.find(",returning") != std::string::npos);
    CHECK(csv.find(",not_returning") != std::string::npos);
    CHECK(csv.find(",undecided") != std::string::npos);
  }
  SUBCASE("json carries the same keys") {
    const std::string json = emit_report({r}, ReportFormat::Json);
    for (const char* key : {"\"t\"", "\"p_return\"", "\"p_not\"", "\"T_map\"", "\"T_std\"",
                            "\"decision\""}) {
      CHECK(json.find(key) != std::string::npos);
    }
    CHECK(json.find("\"returning\"") != std::string::npos);
  }
  SUBCASE("empty report list is rejected") {
    std::ostringstream out;
    CHECK_THROWS_AS(emit_report({}, ReportFormat::Csv, out), std::invalid_argument);
  }
}
