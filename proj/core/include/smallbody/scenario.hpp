// scenario.hpp -- scenario-file schema, pipeline orchestration, and
// deterministic result serialization.

#pragma once

#include "smallbody/acoustic.hpp"
#include "smallbody/em.hpp"
#include "smallbody/mesh_io.hpp"

#include <nlohmann/json.hpp>

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace smallbody {

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SphereShape {
  double radius = 1.0;
  int subdivisions = 3;
};
struct EllipsoidShape {
  Vec3 semi_axes = Vec3::Ones();
  int subdivisions = 3;
};
struct MeshFileShape {
  std::string path;
  MeshFormat format = MeshFormat::Auto;
};
using ShapeSpec = std::variant<SphereShape, EllipsoidShape, MeshFileShape>;

struct BodySpec {
  ShapeSpec shape;
  Vec3 position = Vec3::Zero();
  BoundaryKind condition = BoundaryKind::Dirichlet;
  Complex zeta = 0.0;                  // impedance bodies
  std::optional<Complex> eps, mu;      // EM bodies
};

struct FarFieldGridSpec {
  // "default26" or a lat-long grid.
  bool lat_long = false;
  int lat = 0, lon = 0;
};

struct OutputRequest {
  enum class Kind { Charges, Properties, FarField, FieldSamples };
  Kind kind = Kind::Charges;
  FarFieldGridSpec grid;        // FarField
  std::vector<Vec3> samples;    // FieldSamples
};

enum class IncidentKind { AcousticPlane, EmPlane };

struct Scenario {
  double k = 1.0;
  double eps0 = 1.0;
  double mu0 = 1.0;
  IncidentKind incident_kind = IncidentKind::AcousticPlane;
  Vec3 direction = Vec3::UnitZ();
  Vec3 polarization = Vec3::UnitX();  // EM only
  std::vector<BodySpec> bodies;
  std::vector<OutputRequest> outputs;
  SolveMethod solver;  // defaults: direct, tol 1e-12, max_iter 200
  int capacitance_order = 2;
};

/// Parse and validate a scenario document. Unknown keys are rejected with
/// a path diagnostic; defaulted fields are materialized.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical serialization; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

using ResultsDoc = nlohmann::ordered_json;

struct ResultsBundle {
  ResultsDoc doc;
  // Far-field table rows, already formatted per the delimited schema;
  // empty when no far-field output was requested.
  std::vector<std::string> far_field_lines;
};

/// Full pipeline: shape properties -> diagnostics -> assembly -> solve ->
/// requested outputs. Every warning lands in doc["diagnostics"]["warnings"].
ResultsBundle run(const Scenario& scenario);

/// Shape properties and diagnostics only (no solve).
ResultsBundle run_properties(const Scenario& scenario);

/// Parse + regime diagnostics only.
ResultsBundle run_check(const Scenario& scenario);

/// Deterministic serialization: stable key order, floats at 17
/// significant digits. Returns the files written (results.json and,
/// when present, farfield.csv).
std::vector<std::filesystem::path> write_results(
    const ResultsBundle& bundle, const std::filesystem::path& out_dir);

/// The deterministic JSON text of a results document (exposed for tests).
std::string dump_results(const ResultsDoc& doc);

/// 26 unit directions: faces, edges and corners of the cube.
std::vector<Vec3> default26_directions();

}  // namespace smallbody
