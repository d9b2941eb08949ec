#include "smallbody/scenario.hpp"

#include "smallbody/mesh_io.hpp"
#include "smallbody/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace smallbody {

namespace {

using Json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioError("scenario error at " + path + ": " + what);
}

void check_keys(const Json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return it.key() == k;
        }) == allowed.end())
      fail(path, "unknown key \"" + it.key() + "\"");
  }
}

const Json& require(const Json& obj, const std::string& path,
                    const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing key \"") + key + "\"");
  return *it;
}

double get_number(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int get_int(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

Vec3 get_vec3(const Json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) fail(path, "expected [x, y, z]");
  return Vec3(get_number(v[0], path), get_number(v[1], path),
              get_number(v[2], path));
}

Complex get_complex(const Json& v, const std::string& path) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2)
    return Complex(get_number(v[0], path), get_number(v[1], path));
  fail(path, "expected a number or [re, im]");
}

ShapeSpec parse_shape(const Json& v, const std::string& path) {
  if (!v.is_object() || v.size() != 1)
    fail(path, "expected exactly one of \"sphere\", \"ellipsoid\", \"mesh\"");
  if (v.contains("sphere")) {
    const Json& s = v["sphere"];
    check_keys(s, path + ".sphere", {"radius", "subdivisions"});
    SphereShape shape;
    shape.radius = get_number(require(s, path, "radius"), path + ".radius");
    shape.subdivisions =
        get_int(require(s, path, "subdivisions"), path + ".subdivisions");
    return shape;
  }
  if (v.contains("ellipsoid")) {
    const Json& s = v["ellipsoid"];
    check_keys(s, path + ".ellipsoid", {"semi_axes", "subdivisions"});
    EllipsoidShape shape;
    shape.semi_axes =
        get_vec3(require(s, path, "semi_axes"), path + ".semi_axes");
    shape.subdivisions =
        get_int(require(s, path, "subdivisions"), path + ".subdivisions");
    return shape;
  }
  if (v.contains("mesh")) {
    const Json& s = v["mesh"];
    check_keys(s, path + ".mesh", {"path", "format"});
    MeshFileShape shape;
    shape.path = require(s, path, "path").get<std::string>();
    std::string fmt = s.value("format", "auto");
    if (fmt == "auto")
      shape.format = MeshFormat::Auto;
    else if (fmt == "stl-binary")
      shape.format = MeshFormat::StlBinary;
    else if (fmt == "stl-ascii")
      shape.format = MeshFormat::StlAscii;
    else if (fmt == "obj")
      shape.format = MeshFormat::Obj;
    else
      fail(path + ".mesh.format", "unknown format \"" + fmt + "\"");
    return shape;
  }
  fail(path, "unknown shape kind");
}

OutputRequest parse_output(const Json& v, const std::string& path) {
  OutputRequest out;
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s == "charges")
      out.kind = OutputRequest::Kind::Charges;
    else if (s == "properties")
      out.kind = OutputRequest::Kind::Properties;
    else
      fail(path, "unknown output \"" + s + "\"");
    return out;
  }
  if (v.is_object() && v.size() == 1 && v.contains("far_field")) {
    const Json& ff = v["far_field"];
    check_keys(ff, path + ".far_field", {"grid", "lat", "lon"});
    out.kind = OutputRequest::Kind::FarField;
    std::string grid = require(ff, path + ".far_field", "grid")
                           .get<std::string>();
    if (grid == "default26") {
      out.grid.lat_long = false;
    } else if (grid == "lat-long") {
      out.grid.lat_long = true;
      out.grid.lat = get_int(require(ff, path, "lat"), path + ".lat");
      out.grid.lon = get_int(require(ff, path, "lon"), path + ".lon");
      if (out.grid.lat * out.grid.lon < 6)
        fail(path + ".far_field", "grid must have at least 6 points");
    } else {
      fail(path + ".far_field.grid", "unknown grid \"" + grid + "\"");
    }
    return out;
  }
  if (v.is_object() && v.size() == 1 && v.contains("field_samples")) {
    out.kind = OutputRequest::Kind::FieldSamples;
    const Json& pts = v["field_samples"];
    if (!pts.is_array() || pts.empty())
      fail(path + ".field_samples", "expected a non-empty list of points");
    for (std::size_t i = 0; i < pts.size(); ++i)
      out.samples.push_back(
          get_vec3(pts[i], path + ".field_samples[" + std::to_string(i) + "]"));
    return out;
  }
  fail(path, "unknown output request");
}

BodySpec parse_body(const Json& v, const std::string& path, IncidentKind kind) {
  check_keys(v, path,
             {"shape", "position", "condition", "zeta", "eps", "mu"});
  BodySpec body;
  body.shape = parse_shape(require(v, path, "shape"), path + ".shape");
  body.position = get_vec3(require(v, path, "position"), path + ".position");
  if (kind == IncidentKind::EmPlane) {
    if (v.contains("condition") || v.contains("zeta"))
      fail(path, "boundary conditions do not apply to EM bodies");
    body.eps = get_complex(require(v, path, "eps"), path + ".eps");
    body.mu = get_complex(require(v, path, "mu"), path + ".mu");
    return body;
  }
  if (v.contains("eps") || v.contains("mu"))
    fail(path, "material parameters apply only to EM scenarios");
  std::string cond =
      require(v, path, "condition").get<std::string>();
  if (cond == "dirichlet") {
    body.condition = BoundaryKind::Dirichlet;
    if (v.contains("zeta"))
      fail(path, "conflicting boundary conditions: dirichlet with zeta");
  } else if (cond == "impedance") {
    body.condition = BoundaryKind::Impedance;
    body.zeta = get_complex(require(v, path, "zeta"), path + ".zeta");
    if (body.zeta == Complex(0.0, 0.0))
      fail(path + ".zeta", "zeta = 0 is degenerate");
  } else if (cond == "neumann") {
    body.condition = BoundaryKind::Neumann;
    if (v.contains("zeta"))
      fail(path, "conflicting boundary conditions: neumann with zeta");
  } else {
    fail(path + ".condition", "unknown condition \"" + cond + "\"");
  }
  return body;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ScenarioError(std::string("scenario parse failure: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("scenario must be a JSON object");
  check_keys(doc, "$",
             {"medium", "incident", "bodies", "outputs", "solver",
              "capacitance"});

  Scenario s;
  const Json& medium = require(doc, "$", "medium");
  check_keys(medium, "$.medium", {"k", "eps0", "mu0"});
  s.k = get_number(require(medium, "$.medium", "k"), "$.medium.k");
  if (s.k <= 0.0) fail("$.medium.k", "wavenumber must be positive");
  s.eps0 = medium.contains("eps0")
               ? get_number(medium["eps0"], "$.medium.eps0")
               : 1.0;
  s.mu0 =
      medium.contains("mu0") ? get_number(medium["mu0"], "$.medium.mu0") : 1.0;

  const Json& incident = require(doc, "$", "incident");
  check_keys(incident, "$.incident", {"kind", "direction", "polarization"});
  std::string kind =
      require(incident, "$.incident", "kind").get<std::string>();
  if (kind == "acoustic-plane")
    s.incident_kind = IncidentKind::AcousticPlane;
  else if (kind == "em-plane")
    s.incident_kind = IncidentKind::EmPlane;
  else
    fail("$.incident.kind", "unknown kind \"" + kind + "\"");
  s.direction = get_vec3(require(incident, "$.incident", "direction"),
                         "$.incident.direction");
  if (s.direction.norm() <= 0.0)
    fail("$.incident.direction", "zero direction");
  s.direction.normalize();
  if (s.incident_kind == IncidentKind::EmPlane) {
    s.polarization = get_vec3(require(incident, "$.incident", "polarization"),
                              "$.incident.polarization");
    if (std::abs(s.direction.dot(s.polarization)) >
        1e-9 * s.polarization.norm())
      fail("$.incident.polarization",
           "polarization must be orthogonal to the direction");
  } else if (incident.contains("polarization")) {
    fail("$.incident.polarization", "not meaningful for acoustic waves");
  }

  const Json& bodies = require(doc, "$", "bodies");
  if (!bodies.is_array() || bodies.empty())
    fail("$.bodies", "expected a non-empty array");
  for (std::size_t i = 0; i < bodies.size(); ++i)
    s.bodies.push_back(parse_body(
        bodies[i], "$.bodies[" + std::to_string(i) + "]", s.incident_kind));

  if (s.incident_kind == IncidentKind::AcousticPlane) {
    bool any_neumann = false, any_charge = false;
    for (const auto& b : s.bodies)
      (b.condition == BoundaryKind::Neumann ? any_neumann : any_charge) = true;
    if (any_neumann && any_charge)
      fail("$.bodies", "mixed boundary conditions unsupported");
  }

  const Json& outputs = require(doc, "$", "outputs");
  if (!outputs.is_array() || outputs.empty())
    fail("$.outputs", "at least one output must be requested");
  for (std::size_t i = 0; i < outputs.size(); ++i)
    s.outputs.push_back(
        parse_output(outputs[i], "$.outputs[" + std::to_string(i) + "]"));

  if (doc.contains("solver")) {
    const Json& solver = doc["solver"];
    check_keys(solver, "$.solver", {"method", "tol", "max_iter"});
    std::string method = solver.value("method", "direct");
    if (method == "direct")
      s.solver.kind = SolveMethod::Kind::Direct;
    else if (method == "fixed-point")
      s.solver.kind = SolveMethod::Kind::FixedPoint;
    else
      fail("$.solver.method", "unknown method \"" + method + "\"");
    if (solver.contains("tol"))
      s.solver.tol = get_number(solver["tol"], "$.solver.tol");
    if (solver.contains("max_iter"))
      s.solver.max_iter = get_int(solver["max_iter"], "$.solver.max_iter");
    if (s.solver.tol <= 0.0) fail("$.solver.tol", "must be positive");
    if (s.solver.max_iter < 1) fail("$.solver.max_iter", "must be >= 1");
  }

  if (doc.contains("capacitance")) {
    const Json& cap = doc["capacitance"];
    check_keys(cap, "$.capacitance", {"order"});
    s.capacitance_order =
        get_int(require(cap, "$.capacitance", "order"), "$.capacitance.order");
    if (s.capacitance_order < 0 || s.capacitance_order > 4)
      fail("$.capacitance.order", "order must be in [0, 4]");
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

namespace {

ResultsDoc complex_json(Complex z) {
  return ResultsDoc::array({z.real(), z.imag()});
}

ResultsDoc vec3_json(const Vec3& v) {
  return ResultsDoc::array({v.x(), v.y(), v.z()});
}

ResultsDoc matrix3_json(const Eigen::Matrix3d& m) {
  ResultsDoc rows = ResultsDoc::array();
  for (int r = 0; r < 3; ++r)
    rows.push_back(ResultsDoc::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

ResultsDoc shape_json(const ShapeSpec& shape) {
  ResultsDoc v = ResultsDoc::object();
  if (const auto* s = std::get_if<SphereShape>(&shape)) {
    v["sphere"] = {{"radius", s->radius}, {"subdivisions", s->subdivisions}};
  } else if (const auto* e = std::get_if<EllipsoidShape>(&shape)) {
    v["ellipsoid"] = {{"semi_axes", vec3_json(e->semi_axes)},
                      {"subdivisions", e->subdivisions}};
  } else {
    const auto& m = std::get<MeshFileShape>(shape);
    const char* fmt = "auto";
    switch (m.format) {
      case MeshFormat::StlBinary: fmt = "stl-binary"; break;
      case MeshFormat::StlAscii: fmt = "stl-ascii"; break;
      case MeshFormat::Obj: fmt = "obj"; break;
      default: break;
    }
    v["mesh"] = {{"path", m.path}, {"format", fmt}};
  }
  return v;
}

ResultsDoc scenario_json(const Scenario& s) {
  ResultsDoc doc = ResultsDoc::object();
  doc["medium"] = {{"k", s.k}, {"eps0", s.eps0}, {"mu0", s.mu0}};
  ResultsDoc incident = ResultsDoc::object();
  incident["kind"] = s.incident_kind == IncidentKind::AcousticPlane
                         ? "acoustic-plane"
                         : "em-plane";
  incident["direction"] = vec3_json(s.direction);
  if (s.incident_kind == IncidentKind::EmPlane)
    incident["polarization"] = vec3_json(s.polarization);
  doc["incident"] = std::move(incident);
  ResultsDoc bodies = ResultsDoc::array();
  for (const auto& b : s.bodies) {
    ResultsDoc body = ResultsDoc::object();
    body["shape"] = shape_json(b.shape);
    body["position"] = vec3_json(b.position);
    if (s.incident_kind == IncidentKind::EmPlane) {
      body["eps"] = complex_json(*b.eps);
      body["mu"] = complex_json(*b.mu);
    } else {
      switch (b.condition) {
        case BoundaryKind::Dirichlet: body["condition"] = "dirichlet"; break;
        case BoundaryKind::Impedance:
          body["condition"] = "impedance";
          body["zeta"] = complex_json(b.zeta);
          break;
        case BoundaryKind::Neumann: body["condition"] = "neumann"; break;
      }
    }
    bodies.push_back(std::move(body));
  }
  doc["bodies"] = std::move(bodies);
  ResultsDoc outputs = ResultsDoc::array();
  for (const auto& o : s.outputs) {
    switch (o.kind) {
      case OutputRequest::Kind::Charges:
        outputs.push_back("charges");
        break;
      case OutputRequest::Kind::Properties:
        outputs.push_back("properties");
        break;
      case OutputRequest::Kind::FarField: {
        ResultsDoc ff = ResultsDoc::object();
        if (o.grid.lat_long)
          ff["far_field"] = {{"grid", "lat-long"},
                             {"lat", o.grid.lat},
                             {"lon", o.grid.lon}};
        else
          ff["far_field"] = {{"grid", "default26"}};
        outputs.push_back(std::move(ff));
        break;
      }
      case OutputRequest::Kind::FieldSamples: {
        ResultsDoc pts = ResultsDoc::array();
        for (const auto& p : o.samples) pts.push_back(vec3_json(p));
        ResultsDoc fs = ResultsDoc::object();
        fs["field_samples"] = std::move(pts);
        outputs.push_back(std::move(fs));
        break;
      }
    }
  }
  doc["outputs"] = std::move(outputs);
  doc["solver"] = {
      {"method",
       s.solver.kind == SolveMethod::Kind::Direct ? "direct" : "fixed-point"},
      {"tol", s.solver.tol},
      {"max_iter", s.solver.max_iter}};
  doc["capacitance"] = {{"order", s.capacitance_order}};
  return doc;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Per-unique-mesh shape properties, cached by content hash; the electric
// tensor additionally by contrast so bodies sharing a mesh but not a
// material stay distinct.
struct ShapeProperties {
  std::shared_ptr<const TriangleMesh> mesh;
  GeometrySummary geometry;
  std::optional<CapacitanceResult> cap;
  std::optional<Eigen::Matrix3d> beta;
  std::map<double, Eigen::Matrix3d> alpha_by_gamma;
};

struct PropertyCache {
  std::map<std::uint64_t, ShapeProperties> by_hash;
};

// One body's view of the cached properties.
struct BodyProps {
  const ShapeProperties* shape = nullptr;
  double gamma = 0.0, gamma_tilde = 0.0;  // EM only

  const Eigen::Matrix3d& alpha() const {
    return shape->alpha_by_gamma.at(gamma);
  }
  Eigen::Matrix3d beta_tilde() const {
    return shape->alpha_by_gamma.at(gamma_tilde) + *shape->beta;
  }
};

std::shared_ptr<const TriangleMesh> build_mesh(const ShapeSpec& shape) {
  if (const auto* s = std::get_if<SphereShape>(&shape))
    return std::make_shared<TriangleMesh>(
        generate_sphere(s->radius, s->subdivisions));
  if (const auto* e = std::get_if<EllipsoidShape>(&shape))
    return std::make_shared<TriangleMesh>(
        generate_ellipsoid(e->semi_axes, e->subdivisions));
  const auto& m = std::get<MeshFileShape>(shape);
  return std::make_shared<TriangleMesh>(load_mesh(m.path, m.format));
}

double real_contrast(Complex value, Complex background,
                     const std::string& what) {
  Complex g = gamma_contrast(value, background);
  if (std::abs(g.imag()) > 1e-12 * std::max(1.0, std::abs(g)))
    throw ScenarioError("complex " + what +
                        " contrast is not supported by the polarizability "
                        "solver");
  return g.real();
}

BodyProps properties_for(PropertyCache& cache, const BodySpec& body,
                         const Scenario& scenario, int body_index) {
  auto mesh = build_mesh(body.shape);
  auto [it, fresh] = cache.by_hash.try_emplace(mesh->content_hash());
  ShapeProperties& props = it->second;
  if (fresh) {
    props.mesh = mesh;
    props.geometry = summarize(*mesh);
  }
  BodyProps view;
  view.shape = &props;
  try {
    if (scenario.incident_kind == IncidentKind::EmPlane) {
      view.gamma = real_contrast(*body.eps, scenario.eps0, "permittivity");
      view.gamma_tilde = real_contrast(*body.mu, scenario.mu0, "permeability");
      for (double g : {view.gamma, view.gamma_tilde})
        if (!props.alpha_by_gamma.count(g))
          props.alpha_by_gamma.emplace(
              g, electric_polarizability(*props.mesh, g).entries);
      if (!props.beta)
        props.beta = magnetic_polarizability(*props.mesh).entries;
    } else if (body.condition == BoundaryKind::Neumann) {
      if (!props.beta)
        props.beta = magnetic_polarizability(*props.mesh).entries;
    } else {
      if (!props.cap)
        props.cap = capacitance(*props.mesh, scenario.capacitance_order);
    }
  } catch (const std::exception& e) {
    throw ScenarioError("[potential_theory] body " +
                        std::to_string(body_index) + ": " + e.what());
  }
  return view;
}

struct FarFieldRequest {
  std::vector<Vec3> directions;
};

std::vector<Vec3> grid_directions(const FarFieldGridSpec& grid) {
  if (!grid.lat_long) return default26_directions();
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(grid.lat) * grid.lon);
  for (int i = 0; i < grid.lat; ++i) {
    double theta = M_PI * (i + 0.5) / grid.lat;
    for (int j = 0; j < grid.lon; ++j) {
      double phi = 2.0 * M_PI * j / grid.lon;
      dirs.emplace_back(std::sin(theta) * std::cos(phi),
                        std::sin(theta) * std::sin(phi), std::cos(theta));
    }
  }
  return dirs;
}

ResultsBundle run_impl(const Scenario& scenario, bool solve,
                       bool diagnostics_only) {
  ResultsBundle bundle;
  bundle.doc["scenario"] = scenario_json(scenario);
  std::vector<std::string> warnings;

  PropertyCache cache;
  std::vector<BodyProps> props;
  props.reserve(scenario.bodies.size());
  for (std::size_t m = 0; m < scenario.bodies.size(); ++m)
    if (diagnostics_only) {
      // check: geometry only, no integral equations
      auto mesh = build_mesh(scenario.bodies[m].shape);
      auto [it, fresh] = cache.by_hash.try_emplace(mesh->content_hash());
      if (fresh) {
        it->second.mesh = mesh;
        it->second.geometry = summarize(*mesh);
      }
      BodyProps view;
      view.shape = &it->second;
      props.push_back(view);
    } else {
      props.push_back(properties_for(cache, scenario.bodies[m], scenario,
                                     static_cast<int>(m)));
    }

  const bool em = scenario.incident_kind == IncidentKind::EmPlane;

  // Scene diagnostics via the acoustic scene machinery (geometry only).
  Scene scene;
  scene.k = scenario.k;
  for (std::size_t m = 0; m < scenario.bodies.size(); ++m) {
    Scatterer s;
    s.position = scenario.bodies[m].position;
    s.condition = em ? BoundaryKind::Neumann : scenario.bodies[m].condition;
    s.zeta = scenario.bodies[m].zeta;
    s.diameter = props[m].shape->geometry.diameter;
    s.area = props[m].shape->geometry.area;
    s.volume = props[m].shape->geometry.volume;
    if (props[m].shape->cap) s.capacitance = props[m].shape->cap->value;
    if (props[m].shape->beta) s.beta = *props[m].shape->beta;
    s.mesh = props[m].shape->mesh;
    scene.scatterers.push_back(std::move(s));
  }
  scene.validate();

  SceneValidity validity = scene.validity(em);
  for (const auto& w : validity.warnings) warnings.push_back(w);

  ResultsDoc diag = ResultsDoc::object();
  diag["a"] = validity.max_diameter;
  diag["d"] = validity.min_separation;  // null when infinite
  diag["ka"] = validity.ka;
  diag["a_over_d"] = validity.a_over_d;
  diag["kd"] = validity.kd;

  double margin = 0.0;
  const bool charge_problem =
      !em && scenario.bodies.front().condition != BoundaryKind::Neumann;
  if (charge_problem && !diagnostics_only) {
    margin = diagonal_dominance_margin(scene);
    diag["dominance_margin"] = margin;
    if (margin >= 1.0) {
      std::ostringstream w;
      w << "diagonal dominance violated (margin = " << margin
        << " >= 1); fixed-point iteration may diverge";
      warnings.push_back(w.str());
    }
  }
  for (std::size_t m = 0; m < props.size() && !diagnostics_only; ++m)
    if (props[m].shape->cap && props[m].shape->cap->divergence_warning)
      warnings.push_back("capacitance series for body " + std::to_string(m) +
                         " appears divergent on this mesh");

  bool want_properties = false, want_charges = false;
  const OutputRequest* far_field = nullptr;
  const OutputRequest* field_samples = nullptr;
  for (const auto& o : scenario.outputs) {
    switch (o.kind) {
      case OutputRequest::Kind::Properties: want_properties = true; break;
      case OutputRequest::Kind::Charges: want_charges = true; break;
      case OutputRequest::Kind::FarField: far_field = &o; break;
      case OutputRequest::Kind::FieldSamples: field_samples = &o; break;
    }
  }

  ResultsDoc properties = ResultsDoc::array();
  if (!diagnostics_only)
    for (std::size_t m = 0; m < props.size(); ++m) {
      const ShapeProperties& p = *props[m].shape;
      ResultsDoc body = ResultsDoc::object();
      body["body"] = static_cast<int>(m);
      body["area"] = p.geometry.area;
      body["volume"] = p.geometry.volume;
      body["diameter"] = p.geometry.diameter;
      body["centroid"] = vec3_json(p.geometry.centroid);
      if (p.cap) {
        ResultsDoc series = ResultsDoc::array();
        for (double c : p.cap->series) series.push_back(c);
        body["capacitance_series"] = std::move(series);
        body["capacitance"] = p.cap->value;
        if (p.cap->estimated_ratio)
          body["estimated_ratio"] = *p.cap->estimated_ratio;
        if (scenario.bodies[m].condition == BoundaryKind::Impedance)
          body["effective_capacitance"] = complex_json(
              impedance_capacitance(p.cap->value, scenario.bodies[m].zeta,
                                    p.geometry.area));
      }
      if (p.beta) body["beta"] = matrix3_json(*p.beta);
      if (em) {
        body["gamma"] = props[m].gamma;
        body["gamma_tilde"] = props[m].gamma_tilde;
        body["alpha"] = matrix3_json(props[m].alpha());
        body["beta_tilde"] = matrix3_json(props[m].beta_tilde());
      }
      properties.push_back(std::move(body));
    }

  ResultsDoc solver_meta, charges_out, samples_out;
  if (solve && !em) {
    const bool neumann =
        scenario.bodies.front().condition == BoundaryKind::Neumann;
    PlaneWave wave(scenario.direction, scenario.k);
    try {
      if (!neumann) {
        AssembledSystem sys = assemble_dirichlet(scene, wave);
        ChargeSolution sol = solve_charges(sys, scenario.solver, margin);
        solver_meta = {{"method", sol.method == SolveMethod::Kind::Direct
                                      ? "direct"
                                      : "fixed-point"},
                       {"iterations", sol.iterations},
                       {"residual", sol.residual}};
        if (want_charges) {
          charges_out = ResultsDoc::array();
          for (Eigen::Index m = 0; m < sol.charges.size(); ++m)
            charges_out.push_back(complex_json(sol.charges(m)));
        }
        if (field_samples) {
          samples_out = ResultsDoc::array();
          for (const auto& x : field_samples->samples) {
            for (const auto& b : scene.scatterers)
              if ((x - b.position).norm() < 5.0 * b.diameter &&
                  (x - b.position).norm() >= 0.5 * b.diameter)
                warnings.push_back(
                    "field sample closer than 5 body diameters; the "
                    "point-source field formula degrades near bodies");
            ResultsDoc entry = ResultsDoc::object();
            entry["point"] = vec3_json(x);
            entry["u"] = complex_json(field_dirichlet(sol, scene, wave, x));
            samples_out.push_back(std::move(entry));
          }
        }
        if (far_field) {
          auto dirs = grid_directions(far_field->grid);
          bundle.far_field_lines.push_back(
              "direction-x,direction-y,direction-z,Re(A),Im(A),|A|");
          for (const auto& dir : dirs) {
            Complex a = amplitude_dirichlet(sol, scene, dir);
            std::string line = format_double(dir.x()) + "," +
                               format_double(dir.y()) + "," +
                               format_double(dir.z()) + "," +
                               format_double(a.real()) + "," +
                               format_double(a.imag()) + "," +
                               format_double(std::abs(a));
            bundle.far_field_lines.push_back(std::move(line));
          }
        }
      } else {
        AssembledSystem sys = assemble_neumann(scene, wave);
        NeumannSolution sol = solve_neumann(scene, sys, scenario.solver);
        solver_meta = {{"method", sol.method == SolveMethod::Kind::Direct
                                      ? "direct"
                                      : "fixed-point"},
                       {"iterations", sol.iterations},
                       {"residual", sol.residual}};
        if (want_charges) {
          charges_out = ResultsDoc::array();
          for (Eigen::Index m = 0; m < sol.laplacians.size(); ++m) {
            ResultsDoc entry = ResultsDoc::object();
            entry["laplacian"] = complex_json(sol.laplacians(m));
            ResultsDoc grad = ResultsDoc::array();
            for (int q = 0; q < 3; ++q)
              grad.push_back(complex_json(sol.gradients[m](q)));
            entry["gradient"] = std::move(grad);
            charges_out.push_back(std::move(entry));
          }
        }
        if (field_samples) {
          samples_out = ResultsDoc::array();
          for (const auto& x : field_samples->samples) {
            ResultsDoc entry = ResultsDoc::object();
            entry["point"] = vec3_json(x);
            entry["u"] = complex_json(field_neumann(sol, scene, wave, x));
            samples_out.push_back(std::move(entry));
          }
        }
        if (far_field) {
          auto dirs = grid_directions(far_field->grid);
          bundle.far_field_lines.push_back(
              "direction-x,direction-y,direction-z,Re(A),Im(A),|A|");
          for (const auto& dir : dirs) {
            Complex a = amplitude_neumann(sol, scene, dir);
            std::string line = format_double(dir.x()) + "," +
                               format_double(dir.y()) + "," +
                               format_double(dir.z()) + "," +
                               format_double(a.real()) + "," +
                               format_double(a.imag()) + "," +
                               format_double(std::abs(a));
            bundle.far_field_lines.push_back(std::move(line));
          }
        }
      }
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception& e) {
      throw ScenarioError(std::string("[acoustic_solver] ") + e.what());
    }
  } else if (solve && em) {
    try {
      if (want_charges || field_samples)
        throw ScenarioError(
            "charges/field samples are not defined for EM scenarios "
            "(single-scattering far field only)");
      std::vector<EMBody> bodies;
      std::vector<EMField6> incident;
      for (std::size_t m = 0; m < scenario.bodies.size(); ++m) {
        EMBody b;
        b.volume = props[m].shape->geometry.volume;
        b.alpha = props[m].alpha();
        b.beta_tilde = props[m].beta_tilde();
        b.position = scenario.bodies[m].position;
        b.eps0 = scenario.eps0;
        b.mu0 = scenario.mu0;
        bodies.push_back(b);
        incident.push_back(em_plane_wave(
            scenario.direction, scenario.polarization.cast<Complex>(),
            scenario.k, scenario.eps0, scenario.mu0, b.position));
      }
      solver_meta = {{"method", "born"}, {"iterations", 0}, {"residual", 0.0}};
      if (far_field) {
        auto dirs = grid_directions(far_field->grid);
        bundle.far_field_lines.push_back(
            "direction-x,direction-y,direction-z,"
            "Re(Ex),Im(Ex),Re(Ey),Im(Ey),Re(Ez),Im(Ez),"
            "Re(Hx),Im(Hx),Re(Hy),Im(Hy),Re(Hz),Im(Hz)");
        for (const auto& dir : dirs) {
          EMField6 a = em_amplitude(bodies, incident, dir, scenario.k);
          std::string line = format_double(dir.x()) + "," +
                             format_double(dir.y()) + "," +
                             format_double(dir.z());
          for (int q = 0; q < 3; ++q)
            line += "," + format_double(a.E(q).real()) + "," +
                    format_double(a.E(q).imag());
          for (int q = 0; q < 3; ++q)
            line += "," + format_double(a.H(q).real()) + "," +
                    format_double(a.H(q).imag());
          bundle.far_field_lines.push_back(std::move(line));
        }
      }
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception& e) {
      throw ScenarioError(std::string("[em_scattering] ") + e.what());
    }
  }

  ResultsDoc warn = ResultsDoc::array();
  for (const auto& w : warnings) warn.push_back(w);
  diag["warnings"] = std::move(warn);
  bundle.doc["diagnostics"] = std::move(diag);
  if (!diagnostics_only && (want_properties || !solve))
    bundle.doc["properties"] = std::move(properties);
  if (!solver_meta.is_null()) bundle.doc["solver"] = std::move(solver_meta);
  if (!charges_out.is_null()) bundle.doc["charges"] = std::move(charges_out);
  if (!samples_out.is_null())
    bundle.doc["field_samples"] = std::move(samples_out);
  if (!bundle.far_field_lines.empty()) {
    bundle.doc["far_field"] = {
        {"file", "farfield.csv"},
        {"directions",
         static_cast<int>(bundle.far_field_lines.size()) - 1}};
  }
  return bundle;
}

}  // namespace

std::string serialize_scenario(const Scenario& scenario) {
  return dump_results(scenario_json(scenario));
}

ResultsBundle run(const Scenario& scenario) {
  return run_impl(scenario, /*solve=*/true, /*diagnostics_only=*/false);
}

ResultsBundle run_properties(const Scenario& scenario) {
  return run_impl(scenario, /*solve=*/false, /*diagnostics_only=*/false);
}

ResultsBundle run_check(const Scenario& scenario) {
  return run_impl(scenario, /*solve=*/false, /*diagnostics_only=*/true);
}

}  // namespace smallbody
