#include "smallbody/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace smallbody;

namespace {

constexpr double kPi = 3.14159265358979323846;

const char* kMinimalAcoustic = R"({
  "medium": {"k": 0.1},
  "incident": {"kind": "acoustic-plane", "direction": [0, 0, 1]},
  "bodies": [
    {"shape": {"sphere": {"radius": 1.0, "subdivisions": 3}},
     "position": [0, 0, 0],
     "condition": "dirichlet"}
  ],
  "outputs": ["charges"]
})";

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string field;
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

}  // namespace

TEST_CASE("minimal scenario parses with defaults materialized") {
  Scenario s = parse_scenario(kMinimalAcoustic);
  CHECK(s.k == 0.1);
  CHECK(s.eps0 == 1.0);
  CHECK(s.mu0 == 1.0);
  CHECK(s.incident_kind == IncidentKind::AcousticPlane);
  CHECK(s.solver.kind == SolveMethod::Kind::Direct);
  CHECK(s.solver.tol == 1e-12);
  CHECK(s.solver.max_iter == 200);
  CHECK(s.capacitance_order == 2);
  REQUIRE(s.bodies.size() == 1);
  CHECK(s.bodies[0].condition == BoundaryKind::Dirichlet);
  REQUIRE(s.outputs.size() == 1);
  CHECK(s.outputs[0].kind == OutputRequest::Kind::Charges);
}

TEST_CASE("schema violations carry path diagnostics") {
  SUBCASE("unknown top-level key") {
    std::string text = kMinimalAcoustic;
    text.insert(text.rfind('}'), R"(, "extra": 1)");
    CHECK_THROWS_WITH_AS(parse_scenario(text),
                         "scenario error at $: unknown key \"extra\"",
                         ScenarioError);
  }
  SUBCASE("unknown key inside medium") {
    std::string text = kMinimalAcoustic;
    text.replace(text.find("\"k\": 0.1"), 8, "\"k\": 0.1, \"q\": 2");
    CHECK_THROWS_WITH_AS(parse_scenario(text),
                         "scenario error at $.medium: unknown key \"q\"",
                         ScenarioError);
  }
  SUBCASE("missing incident") {
    CHECK_THROWS_WITH_AS(
        parse_scenario(R"({"medium": {"k": 1}, "bodies": [], "outputs": []})"),
        "scenario error at $: missing key \"incident\"", ScenarioError);
  }
  SUBCASE("dirichlet with zeta conflicts") {
    std::string text = kMinimalAcoustic;
    text.replace(text.find("\"condition\": \"dirichlet\""), 24,
                 "\"condition\": \"dirichlet\", \"zeta\": 1.0");
    try {
      parse_scenario(text);
      FAIL("expected a ScenarioError");
    } catch (const ScenarioError& e) {
      CHECK(std::string(e.what()).find(
                "conflicting boundary conditions: dirichlet with zeta") !=
            std::string::npos);
    }
  }
  SUBCASE("mixed boundary conditions rejected") {
    std::string text = R"({
      "medium": {"k": 0.1},
      "incident": {"kind": "acoustic-plane", "direction": [0, 0, 1]},
      "bodies": [
        {"shape": {"sphere": {"radius": 0.5, "subdivisions": 2}},
         "position": [0, 0, 0], "condition": "dirichlet"},
        {"shape": {"sphere": {"radius": 0.5, "subdivisions": 2}},
         "position": [5, 0, 0], "condition": "neumann"}
      ],
      "outputs": ["charges"]
    })";
    try {
      parse_scenario(text);
      FAIL("expected a ScenarioError");
    } catch (const ScenarioError& e) {
      CHECK(std::string(e.what()).find("mixed boundary conditions unsupported") !=
            std::string::npos);
    }
  }
  SUBCASE("polarization on an acoustic wave") {
    std::string text = kMinimalAcoustic;
    text.replace(text.find("\"direction\": [0, 0, 1]"), 22,
                 "\"direction\": [0, 0, 1], \"polarization\": [1, 0, 0]");
    CHECK_THROWS_AS(parse_scenario(text), ScenarioError);
  }
  SUBCASE("far-field grid below six points") {
    std::string text = kMinimalAcoustic;
    text.replace(text.find("[\"charges\"]"), 11,
                 R"([{"far_field": {"grid": "lat-long", "lat": 1, "lon": 4}}])");
    CHECK_THROWS_AS(parse_scenario(text), ScenarioError);
  }
}

TEST_CASE("serialization round-trips and is canonical") {
  std::string text = R"({
    "medium": {"k": 0.25, "eps0": 2.0, "mu0": 1.5},
    "incident": {"kind": "em-plane", "direction": [0, 0, 1],
                 "polarization": [1, 0, 0]},
    "bodies": [
      {"shape": {"ellipsoid": {"semi_axes": [2, 1, 1], "subdivisions": 2}},
       "position": [0.5, -1, 3], "eps": [4, 0.0], "mu": 1.0}
    ],
    "outputs": [{"far_field": {"grid": "lat-long", "lat": 3, "lon": 4}},
                "properties"],
    "solver": {"method": "fixed-point", "tol": 1e-10, "max_iter": 77},
    "capacitance": {"order": 3}
  })";
  Scenario s = parse_scenario(text);
  std::string canon = serialize_scenario(s);
  Scenario t = parse_scenario(canon);
  CHECK(serialize_scenario(t) == canon);  // fixed point of the round trip
  CHECK(t.k == s.k);
  CHECK(t.eps0 == s.eps0);
  CHECK(t.incident_kind == IncidentKind::EmPlane);
  CHECK(t.bodies.size() == s.bodies.size());
  CHECK(*t.bodies[0].eps == *s.bodies[0].eps);
  CHECK(t.solver.kind == SolveMethod::Kind::FixedPoint);
  CHECK(t.solver.tol == s.solver.tol);
  CHECK(t.solver.max_iter == 77);
  CHECK(t.capacitance_order == 3);
  CHECK(t.outputs.size() == 2);
  CHECK(t.outputs[0].grid.lat == 3);
}

TEST_CASE("single-sphere run reproduces the closed-form charge") {
  Scenario s = parse_scenario(kMinimalAcoustic);
  auto bundle = run(s);
  REQUIRE(bundle.doc.contains("charges"));
  const auto& q = bundle.doc["charges"][0];
  Complex q0(q[0].get<double>(), q[1].get<double>());
  // u0(0) = 1, C within 1% of 4 pi on the subdivision-3 mesh
  CHECK(std::abs(q0 - Complex(-4 * kPi, 0.0)) < 0.01 * 4 * kPi);
  CHECK(bundle.doc["solver"]["residual"].get<double>() <= 1e-10);
  CHECK(bundle.doc["diagnostics"]["dominance_margin"].get<double>() == 0.0);
}

TEST_CASE("far-field output structure") {
  std::string text = kMinimalAcoustic;
  text.replace(text.find("[\"charges\"]"), 11,
               R"([{"far_field": {"grid": "default26"}}])");
  auto bundle = run(parse_scenario(text));
  REQUIRE(bundle.far_field_lines.size() == 27);  // header + 26
  CHECK(bundle.far_field_lines[0] ==
        "direction-x,direction-y,direction-z,Re(A),Im(A),|A|");
  for (std::size_t i = 1; i < bundle.far_field_lines.size(); ++i) {
    auto f = split(bundle.far_field_lines[i], ',');
    REQUIRE(f.size() == 6);
    double re = std::stod(f[3]), im = std::stod(f[4]), mag = std::stod(f[5]);
    CHECK(mag == doctest::Approx(std::hypot(re, im)).epsilon(1e-15));
    // soft small sphere: nearly isotropic |A| ~ C/(4 pi)
    CHECK(mag == doctest::Approx(1.0).epsilon(2e-2));
  }
}

TEST_CASE("runs are deterministic") {
  std::string text = kMinimalAcoustic;
  text.replace(text.find("[\"charges\"]"), 11,
               R"(["charges", "properties", {"far_field": {"grid": "default26"}}])");
  Scenario s = parse_scenario(text);
  auto a = run(s);
  auto b = run(s);
  CHECK(dump_results(a.doc) == dump_results(b.doc));
  CHECK(a.far_field_lines == b.far_field_lines);

  auto dir = std::filesystem::temp_directory_path() / "smallbody_scenario";
  std::filesystem::remove_all(dir);
  auto files1 = write_results(a, dir / "run1");
  auto files2 = write_results(b, dir / "run2");
  REQUIRE(files1.size() == 2);
  REQUIRE(files2.size() == 2);
  for (std::size_t i = 0; i < files1.size(); ++i)
    CHECK(read_file(files1[i]) == read_file(files2[i]));
}

TEST_CASE("dominance violation is reported, direct solve still runs") {
  // Eleven spheres of radius 0.45 on a unit-spaced line: the middle body
  // sees a margin of about 2.
  std::ostringstream text;
  text << R"({"medium": {"k": 0.1},)"
       << R"("incident": {"kind": "acoustic-plane", "direction": [0, 1, 0]},)"
       << R"("bodies": [)";
  for (int i = 0; i < 11; ++i) {
    if (i) text << ',';
    text << R"({"shape": {"sphere": {"radius": 0.45, "subdivisions": 2}},)"
         << R"("position": [)" << i << R"(, 0, 0], "condition": "dirichlet"})";
  }
  text << R"(], "outputs": ["charges"]})";
  auto bundle = run(parse_scenario(text.str()));
  double margin = bundle.doc["diagnostics"]["dominance_margin"].get<double>();
  CHECK(margin > 1.0);
  bool warned = false;
  for (const auto& w : bundle.doc["diagnostics"]["warnings"])
    if (w.get<std::string>().find("diagonal dominance violated") !=
        std::string::npos)
      warned = true;
  CHECK(warned);
  CHECK(bundle.doc.contains("charges"));  // direct solve went through
}

TEST_CASE("regime and near-field warnings surface in the document") {
  std::string text = R"({
    "medium": {"k": 2.0},
    "incident": {"kind": "acoustic-plane", "direction": [0, 0, 1]},
    "bodies": [
      {"shape": {"sphere": {"radius": 1.0, "subdivisions": 2}},
       "position": [0, 0, 0], "condition": "dirichlet"}
    ],
    "outputs": [{"field_samples": [[3, 0, 0], [100, 0, 0]]}]
  })";
  auto bundle = run(parse_scenario(text));
  bool ka_warned = false, near_warned = false;
  for (const auto& w : bundle.doc["diagnostics"]["warnings"]) {
    auto s = w.get<std::string>();
    if (s.find("small-body regime") != std::string::npos) ka_warned = true;
    if (s.find("5 body diameters") != std::string::npos) near_warned = true;
  }
  CHECK(ka_warned);
  CHECK(near_warned);
  REQUIRE(bundle.doc["field_samples"].size() == 2);
}

TEST_CASE("Neumann scenario routes through the 4M system") {
  std::string text = R"({
    "medium": {"k": 0.2},
    "incident": {"kind": "acoustic-plane", "direction": [1, 0, 0]},
    "bodies": [
      {"shape": {"sphere": {"radius": 0.5, "subdivisions": 2}},
       "position": [0, 0, 0], "condition": "neumann"}
    ],
    "outputs": ["charges", "properties"]
  })";
  auto bundle = run(parse_scenario(text));
  REQUIRE(bundle.doc.contains("charges"));
  const auto& entry = bundle.doc["charges"][0];
  // M = 1: L = -k^2 u0(0) = -0.04, G = i k alpha
  CHECK(entry["laplacian"][0].get<double>() ==
        doctest::Approx(-0.04).epsilon(1e-12));
  CHECK(entry["laplacian"][1].get<double>() == doctest::Approx(0.0));
  CHECK(entry["gradient"][0][1].get<double>() ==
        doctest::Approx(0.2).epsilon(1e-12));
  // properties carry the polarizability tensor
  const auto& beta = bundle.doc["properties"][0]["beta"];
  CHECK(beta[0][0].get<double>() == doctest::Approx(-1.5).epsilon(0.05));
}

TEST_CASE("EM scenario far field and guards") {
  std::string base = R"({
    "medium": {"k": 0.3},
    "incident": {"kind": "em-plane", "direction": [0, 0, 1],
                 "polarization": [1, 0, 0]},
    "bodies": [
      {"shape": {"sphere": {"radius": 0.5, "subdivisions": 2}},
       "position": [0, 0, 0], "eps": 4.0, "mu": 1.0}
    ],
    "outputs": [OUT]
  })";
  SUBCASE("far-field table has 3 + 12 columns") {
    std::string text = base;
    text.replace(text.find("OUT"), 3,
                 R"({"far_field": {"grid": "default26"}})");
    auto bundle = run(parse_scenario(text));
    REQUIRE(bundle.far_field_lines.size() == 27);
    auto header = split(bundle.far_field_lines[0], ',');
    CHECK(header.size() == 15);
    auto row = split(bundle.far_field_lines[1], ',');
    REQUIRE(row.size() == 15);
    // transversality: theta'. E = 0 for the (-1,-1,-1)/sqrt 3 direction
    Eigen::Vector3d d(std::stod(row[0]), std::stod(row[1]), std::stod(row[2]));
    Complex ex(std::stod(row[3]), std::stod(row[4]));
    Complex ey(std::stod(row[5]), std::stod(row[6]));
    Complex ez(std::stod(row[7]), std::stod(row[8]));
    CHECK(std::abs(d.x() * ex + d.y() * ey + d.z() * ez) < 1e-14);
  }
  SUBCASE("charges are not an EM product") {
    std::string text = base;
    text.replace(text.find("OUT"), 3, R"("charges")");
    CHECK_THROWS_AS(run(parse_scenario(text)), ScenarioError);
  }
}

TEST_CASE("module-tagged error propagation") {
  std::string text = R"({
    "medium": {"k": 0.1},
    "incident": {"kind": "acoustic-plane", "direction": [0, 0, 1]},
    "bodies": [
      {"shape": {"mesh": {"path": "/nonexistent/shape.stl"}},
       "position": [0, 0, 0], "condition": "dirichlet"}
    ],
    "outputs": ["charges"]
  })";
  CHECK_THROWS_AS(run(parse_scenario(text)), std::exception);
}

TEST_CASE("check mode reports diagnostics without solving") {
  Scenario s = parse_scenario(kMinimalAcoustic);
  auto bundle = run_check(s);
  CHECK(bundle.doc.contains("diagnostics"));
  CHECK(!bundle.doc.contains("charges"));
  CHECK(!bundle.doc.contains("solver"));
  CHECK(bundle.doc["diagnostics"]["ka"].get<double>() ==
        doctest::Approx(0.2).epsilon(1e-12));

  auto props = run_properties(s);
  CHECK(props.doc.contains("properties"));
  CHECK(props.doc["properties"][0]["capacitance"].get<double>() ==
        doctest::Approx(4 * kPi).epsilon(0.01));
  CHECK(!props.doc.contains("charges"));
}
