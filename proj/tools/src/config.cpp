#include "config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "gvs/basis.hpp"
#include "gvs/error.hpp"
#include "gvs/reduction_io.hpp"

namespace gvs::app {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + msg);
}

void read(const json& j, const std::string& path, double& out) {
  if (!j.is_number()) fail(path, "expected a number");
  out = j.get<double>();
  if (!std::isfinite(out)) fail(path, "must be finite");
}

void read(const json& j, const std::string& path, int& out) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  out = j.get<int>();
}

void read(const json& j, const std::string& path, std::uint64_t& out) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    fail(path, "expected a non-negative integer");
  out = j.get<std::uint64_t>();
}

void read(const json& j, const std::string& path, bool& out) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  out = j.get<bool>();
}

void read(const json& j, const std::string& path, std::string& out) {
  if (!j.is_string()) fail(path, "expected a string");
  out = j.get<std::string>();
}

void read(const json& j, const std::string& path, MaterialConfig& m);
void read(const json& j, const std::string& path, BasisConfig& b);
void read(const json& j, const std::string& path, HardeningConfig& h);
void read(const json& j, const std::string& path, JointConfig& jc);
void read(const json& j, const std::string& path, OutletConfig& oc);
void read(const json& j, const std::string& path, ElementConfig& e);
void read(const json& j, const std::string& path, CableConfig& c);
void read(const json& j, const std::string& path, MarkerConfig& m);
void read(const json& j, const std::string& path, LoadConfig& l);
void read(const json& j, const std::string& path, RobotConfig& r);
void read(const json& j, const std::string& path, SignalConfig& s);
void read(const json& j, const std::string& path, SimulationConfig& s);
void read(const json& j, const std::string& path, ReductionConfig& r);
void read(const json& j, const std::string& path, EstimationConfig& e);
void read(const json& j, const std::string& path, BenchConfig& b);

template <class T, std::size_t N>
void read(const json& j, const std::string& path, std::array<T, N>& out) {
  if (!j.is_array() || j.size() != N) fail(path, "expected an array of " + std::to_string(N) + " values");
  for (std::size_t i = 0; i < N; ++i) read(j[i], path + "[" + std::to_string(i) + "]", out[i]);
}

template <class T>
void read(const json& j, const std::string& path, std::vector<T>& out) {
  if (!j.is_array()) fail(path, "expected an array");
  out.resize(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) read(j[i], path + "[" + std::to_string(i) + "]", out[i]);
}

// Object view that rejects unknown keys once parsing is done.
class Object {
 public:
  Object(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
  }

  template <class T>
  void optional(const char* key, T& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) read(*it, child(key), out);
  }

  template <class T>
  void required(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) fail(child(key), "missing required key");
    read(*it, child(key), out);
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(child(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) fail(path, msg);
}

void read(const json& j, const std::string& path, MaterialConfig& m) {
  Object o(j, path);
  o.optional("young_modulus", m.young_modulus);
  o.optional("poisson_ratio", m.poisson_ratio);
  o.optional("density", m.density);
  o.optional("damping", m.damping);
  o.finish();
  require(m.young_modulus > 0, o.child("young_modulus"), "must be positive");
  require(m.poisson_ratio > -1 && m.poisson_ratio <= 0.5, o.child("poisson_ratio"), "must lie in (-1, 0.5]");
  require(m.density > 0, o.child("density"), "must be positive");
  require(m.damping >= 0, o.child("damping"), "must be non-negative");
}

void read(const json& j, const std::string& path, BasisConfig& b) {
  Object o(j, path);
  o.optional("kind", b.kind);
  if (o.has("orders")) {
    Orders orders{};
    o.required("orders", orders);
    b.sections = {orders};
  }
  o.optional("sections", b.sections);
  o.finish();
  require(b.kind == "legendre" || b.kind == "piecewise", o.child("kind"), "must be legendre or piecewise");
  require(!b.sections.empty(), path, "needs 'orders' or 'sections'");
  for (std::size_t s = 0; s < b.sections.size(); ++s)
    for (int v : b.sections[s]) require(v >= -1 && v <= 20, o.child("sections"), "orders must lie in [-1, 20]");
}

void read(const json& j, const std::string& path, SoftLinkConfig& s) {
  Object o(j, path);
  std::string type;
  o.required("type", type);
  o.required("length", s.length);
  o.optional("material", s.material);
  o.optional("base_radius", s.base_radius);
  o.optional("tip_radius", s.tip_radius);
  o.optional("gauss_points", s.gauss_points);
  o.optional("section_breaks", s.section_breaks);
  o.optional("reference", s.reference);
  o.required("basis", s.basis);
  o.finish();
  require(s.length > 0, o.child("length"), "must be positive");
  require(s.base_radius > 0 && s.tip_radius > 0, path, "radii must be positive");
  require(s.gauss_points >= 1 && s.gauss_points <= 64, o.child("gauss_points"), "must lie in [1, 64]");
  const std::size_t expected = s.basis.kind == "legendre" ? 1 : s.section_breaks.size() + 1;
  require(s.basis.sections.size() == expected, o.child("basis"),
          "expected " + std::to_string(expected) + " section order set(s)");
}

void read(const json& j, const std::string& path, HardeningConfig& h) {
  Object o(j, path);
  o.optional("k0", h.k0);
  o.optional("theta_limit", h.theta_limit);
  o.optional("k_wall", h.k_wall);
  o.optional("exponent", h.exponent);
  o.finish();
}

void read_joint_fields(Object& o, JointConfig& jc) {
  o.optional("kind", jc.kind);
  o.optional("axis", jc.axis);
  o.optional("stiffness", jc.stiffness);
  if (o.has("hardening")) {
    HardeningConfig h;
    o.required("hardening", h);
    jc.hardening = h;
  }
  o.optional("damping", jc.damping);
  require(jc.kind == "spherical" || jc.kind == "revolute" || jc.kind == "fixed", o.child("kind"),
          "must be spherical, revolute or fixed");
}

void read(const json& j, const std::string& path, JointConfig& jc) {
  Object o(j, path);
  if (o.has("type")) {
    std::string type;
    o.required("type", type);
  }
  read_joint_fields(o, jc);
  o.finish();
}

void read(const json& j, const std::string& path, OutletConfig& oc) {
  Object o(j, path);
  o.required("cable", oc.cable);
  o.required("left", oc.left);
  o.required("right", oc.right);
  o.finish();
}

void read(const json& j, const std::string& path, BodyConfig& b) {
  Object o(j, path);
  std::string type;
  o.required("type", type);
  o.required("mass", b.mass);
  o.optional("radius", b.radius);
  o.optional("length", b.length);
  o.optional("cm", b.cm);
  o.optional("end", b.end);
  o.optional("outlets", b.outlets);
  o.finish();
  require(b.mass > 0 && b.radius > 0 && b.length > 0, path, "mass, radius and length must be positive");
}

void read(const json& j, const std::string& path, ChainConfig& c) {
  Object o(j, path);
  std::string type;
  o.required("type", type);
  o.required("count", c.count);
  o.required("joint", c.joint);
  o.optional("body_mass", c.body_mass);
  o.optional("body_radius", c.body_radius);
  o.optional("body_length", c.body_length);
  o.optional("gap", c.gap);
  o.optional("outlet_radius", c.outlet_radius);
  if (o.has("outlet_radius_tip")) {
    double v = 0.0;
    o.required("outlet_radius_tip", v);
    c.outlet_radius_tip = v;
  }
  o.optional("first_angle", c.first_angle);
  o.optional("spans", c.spans);
  o.finish();
  require(c.count >= 1, o.child("count"), "must be at least 1");
  require(c.body_mass > 0 && c.body_radius > 0 && c.body_length > 0 && c.gap >= 0, path,
          "body dimensions must be positive");
  require(c.outlet_radius > 0 && c.outlet_radius_tip.value_or(1.0) > 0, path, "outlet radii must be positive");
  for (int s : c.spans) require(s >= 1 && s <= c.count, o.child("spans"), "each span must lie in [1, count]");
}

void read(const json& j, const std::string& path, ElementConfig& e) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) fail(path, "element needs a string 'type'");
  const std::string type = j["type"].get<std::string>();
  if (type == "soft") {
    SoftLinkConfig s;
    read(j, path, s);
    e = s;
  } else if (type == "joint") {
    JointConfig jc;
    read(j, path, jc);
    e = jc;
  } else if (type == "body") {
    BodyConfig b;
    read(j, path, b);
    e = b;
  } else if (type == "chain") {
    ChainConfig c;
    read(j, path, c);
    e = c;
  } else {
    fail(path + ".type", "unknown element type '" + type + "'");
  }
}

void read(const json& j, const std::string& path, CableConfig& c) {
  Object o(j, path);
  o.optional("link", c.link);
  o.required("offset_base", c.offset_base);
  o.optional("offset_tip", c.offset_tip);
  if (!o.has("offset_tip")) c.offset_tip = c.offset_base;
  if (o.has("x_begin")) {
    double v = 0;
    o.required("x_begin", v);
    c.x_begin = v;
  }
  if (o.has("x_end")) {
    double v = 0;
    o.required("x_end", v);
    c.x_end = v;
  }
  o.optional("routing", c.routing);
  o.optional("disks", c.disks);
  o.optional("friction", c.friction);
  o.finish();
  require(c.routing == "internal" || c.routing == "disk_guided", o.child("routing"),
          "must be internal or disk_guided");
  require(c.friction >= 0, o.child("friction"), "must be non-negative");
}

void read(const json& j, const std::string& path, MarkerConfig& m) {
  Object o(j, path);
  o.optional("link", m.link);
  o.required("x", m.x);
  o.optional("offset", m.offset);
  o.finish();
}

void read(const json& j, const std::string& path, LoadConfig& l) {
  Object o(j, path);
  o.optional("link", l.link);
  o.required("x", l.x);
  o.required("wrench", l.wrench);
  o.optional("world", l.world);
  o.finish();
}

void read(const json& j, const std::string& path, RobotConfig& r) {
  Object o(j, path);
  o.optional("base_position", r.base_position);
  o.optional("base_rotation", r.base_rotation);
  o.optional("gravity", r.gravity);
  o.required("elements", r.elements);
  o.optional("cables", r.cables);
  o.optional("chain_cables", r.chain_cables);
  o.optional("markers", r.markers);
  o.optional("loads", r.loads);
  o.finish();
  require(!r.elements.empty(), o.child("elements"), "must not be empty");
}

void read(const json& j, const std::string& path, SignalConfig& s) {
  Object o(j, path);
  o.required("kind", s.kind);
  o.optional("value", s.value);
  o.optional("at", s.at);
  o.optional("low", s.low);
  o.optional("high", s.high);
  o.optional("hold_min", s.hold_min);
  o.optional("hold_max", s.hold_max);
  o.optional("times", s.times);
  o.optional("values", s.values);
  o.finish();
  const std::string& k = s.kind;
  require(k == "constant" || k == "step" || k == "schedule" || k == "babbling", o.child("kind"),
          "must be constant, step, schedule or babbling");
  if (k == "babbling") {
    require(s.low <= s.high, path, "low must not exceed high");
    require(s.hold_min > 0 && s.hold_min <= s.hold_max, path, "need 0 < hold_min <= hold_max");
  }
  if (k == "schedule") require(s.times.size() == s.values.size() && !s.times.empty(), path,
                               "times and values must be non-empty and of equal length");
}

void read(const json& j, const std::string& path, SimulationConfig& s) {
  Object o(j, path);
  o.required("kind", s.kind);
  o.optional("tensions", s.tensions);
  o.optional("grid_levels", s.grid_levels);
  o.optional("tolerance", s.tolerance);
  o.optional("signal", s.signal);
  o.optional("horizon", s.horizon);
  o.optional("dt", s.dt);
  o.optional("sample_rate", s.sample_rate);
  o.optional("integrator", s.integrator);
  o.optional("rtol", s.rtol);
  o.optional("atol", s.atol);
  o.finish();
  require(s.kind == "statics" || s.kind == "dynamics", o.child("kind"), "must be statics or dynamics");
  require(s.tolerance > 0, o.child("tolerance"), "must be positive");
  require(s.horizon >= 0, o.child("horizon"), "must be non-negative");
  require(s.dt > 0, o.child("dt"), "must be positive");
  require(s.sample_rate > 0, o.child("sample_rate"), "must be positive");
  require(s.integrator == "rk4" || s.integrator == "rk45" || s.integrator == "imex", o.child("integrator"),
          "must be rk4, rk45 or imex");
  if (s.kind == "statics")
    require(!s.tensions.empty() || !s.grid_levels.empty(), path, "statics needs 'tensions' or 'grid_levels'");
}

void read(const json& j, const std::string& path, ReductionConfig& r) {
  Object o(j, path);
  o.optional("layout", r.layout);
  o.optional("modes", r.modes);
  o.optional("n_list", r.n_list);
  o.optional("tension_sets", r.tension_sets);
  if (o.has("test_signal")) {
    SignalConfig s;
    o.required("test_signal", s);
    r.test_signal = s;
  }
  o.optional("test_horizon", r.test_horizon);
  o.finish();
  try {
    snapshot_layout_from_string(r.layout);
  } catch (const Error&) {
    fail(o.child("layout"), "unknown layout '" + r.layout + "'");
  }
  require(r.modes >= 0, o.child("modes"), "must be non-negative");
  for (int n : r.n_list) require(n >= 1, o.child("n_list"), "entries must be positive");
}

void read(const json& j, const std::string& path, EstimationConfig& e) {
  Object o(j, path);
  o.optional("estimation_markers", e.estimation_markers);
  o.optional("evaluation_markers", e.evaluation_markers);
  o.optional("modes", e.modes);
  o.optional("measurements", e.measurements);
  o.optional("noise", e.noise);
  o.optional("analytic_jacobian", e.analytic_jacobian);
  o.finish();
  require(e.modes >= 1, o.child("modes"), "must be positive");
  require(e.noise >= 0, o.child("noise"), "must be non-negative");
}

void read(const json& j, const std::string& path, BenchConfig& b) {
  Object o(j, path);
  o.optional("repetitions", b.repetitions);
  o.finish();
  require(b.repetitions >= 1, o.child("repetitions"), "must be positive");
}

// ---- serialization ----

json write(const MaterialConfig& m) {
  return {{"young_modulus", m.young_modulus}, {"poisson_ratio", m.poisson_ratio}, {"density", m.density},
          {"damping", m.damping}};
}

json write(const JointConfig& jc, bool with_type) {
  json j = {{"kind", jc.kind}, {"axis", jc.axis}, {"stiffness", jc.stiffness}, {"damping", jc.damping}};
  if (with_type) j["type"] = "joint";
  if (jc.hardening) {
    const auto& h = *jc.hardening;
    j["hardening"] = {{"k0", h.k0}, {"theta_limit", h.theta_limit}, {"k_wall", h.k_wall}, {"exponent", h.exponent}};
  }
  return j;
}

json write(const ElementConfig& e) {
  if (const auto* s = std::get_if<SoftLinkConfig>(&e)) {
    return {{"type", "soft"},
            {"length", s->length},
            {"material", write(s->material)},
            {"base_radius", s->base_radius},
            {"tip_radius", s->tip_radius},
            {"gauss_points", s->gauss_points},
            {"section_breaks", s->section_breaks},
            {"reference", s->reference},
            {"basis", {{"kind", s->basis.kind}, {"sections", s->basis.sections}}}};
  }
  if (const auto* jc = std::get_if<JointConfig>(&e)) return write(*jc, true);
  if (const auto* b = std::get_if<BodyConfig>(&e)) {
    json outlets = json::array();
    for (const auto& o : b->outlets) outlets.push_back({{"cable", o.cable}, {"left", o.left}, {"right", o.right}});
    return {{"type", "body"}, {"mass", b->mass}, {"radius", b->radius}, {"length", b->length},
            {"cm", b->cm},    {"end", b->end},   {"outlets", outlets}};
  }
  const auto& c = std::get<ChainConfig>(e);
  json out = {{"type", "chain"},
          {"count", c.count},
          {"joint", write(c.joint, false)},
          {"body_mass", c.body_mass},
          {"body_radius", c.body_radius},
          {"body_length", c.body_length},
          {"gap", c.gap},
          {"outlet_radius", c.outlet_radius},
          {"first_angle", c.first_angle},
          {"spans", c.spans}};
  if (c.outlet_radius_tip) out["outlet_radius_tip"] = *c.outlet_radius_tip;
  return out;
}

json write(const SignalConfig& s) {
  return {{"kind", s.kind},         {"value", s.value},       {"at", s.at},         {"low", s.low},
          {"high", s.high},         {"hold_min", s.hold_min}, {"hold_max", s.hold_max}, {"times", s.times},
          {"values", s.values}};
}

json write(const RobotConfig& r) {
  json elements = json::array();
  for (const auto& e : r.elements) elements.push_back(write(e));
  json cables = json::array();
  for (const auto& c : r.cables) {
    json jc = {{"link", c.link},       {"offset_base", c.offset_base}, {"offset_tip", c.offset_tip},
               {"routing", c.routing}, {"disks", c.disks},             {"friction", c.friction}};
    if (c.x_begin) jc["x_begin"] = *c.x_begin;
    if (c.x_end) jc["x_end"] = *c.x_end;
    cables.push_back(jc);
  }
  json markers = json::array();
  for (const auto& m : r.markers) markers.push_back({{"link", m.link}, {"x", m.x}, {"offset", m.offset}});
  json loads = json::array();
  for (const auto& l : r.loads)
    loads.push_back({{"link", l.link}, {"x", l.x}, {"wrench", l.wrench}, {"world", l.world}});
  return {{"base_position", r.base_position},
          {"base_rotation", r.base_rotation},
          {"gravity", r.gravity},
          {"elements", elements},
          {"cables", cables},
          {"chain_cables", r.chain_cables},
          {"markers", markers},
          {"loads", loads}};
}

Vec3 vec(const Triple& t) { return Vec3(t[0], t[1], t[2]); }

JointSpec build_joint(const JointConfig& c) {
  JointSpec j;
  j.kind = c.kind == "spherical" ? JointKind::spherical : c.kind == "revolute" ? JointKind::revolute : JointKind::fixed;
  j.axis = vec(c.axis);
  j.stiffness = c.stiffness;
  if (c.hardening) j.hardening = HardeningStiffness{c.hardening->k0, c.hardening->theta_limit, c.hardening->k_wall,
                                                    c.hardening->exponent};
  j.damping = c.damping;
  return j;
}

// Outlet point of chain cable k on body `body` at axial offset x from its CM.
Vec3 chain_hole(const ChainConfig& c, std::size_t k, int body, double x) {
  const double angle = (c.first_angle + 360.0 * static_cast<double>(k) / static_cast<double>(c.spans.size())) *
                       std::numbers::pi / 180.0;
  double radius = c.outlet_radius;
  if (c.outlet_radius_tip && c.count > 1)
    radius += (*c.outlet_radius_tip - c.outlet_radius) * static_cast<double>(body) / (c.count - 1);
  return Vec3(x, radius * std::cos(angle), radius * std::sin(angle));
}

}  // namespace

ScenarioConfig parse_config(const json& j) {
  ScenarioConfig cfg;
  Object o(j, "");
  o.optional("name", cfg.name);
  o.optional("seed", cfg.seed);
  o.optional("output", cfg.output);
  o.required("robot", cfg.robot);
  o.required("simulation", cfg.simulation);
  o.optional("reduction", cfg.reduction);
  o.optional("estimation", cfg.estimation);
  o.optional("bench", cfg.bench);
  o.finish();

  // Cross-references that need the whole robot.
  int chain_cables = static_cast<int>(cfg.robot.chain_cables.size());
  for (const auto& e : cfg.robot.elements)
    if (const auto* c = std::get_if<ChainConfig>(&e)) chain_cables += static_cast<int>(c->spans.size());
  const int actuators = static_cast<int>(cfg.robot.cables.size()) + chain_cables;
  auto check_width = [&](const std::vector<std::vector<double>>& sets, const std::string& path) {
    for (std::size_t i = 0; i < sets.size(); ++i)
      require(static_cast<int>(sets[i].size()) == actuators, path + "[" + std::to_string(i) + "]",
              "expected " + std::to_string(actuators) + " tensions");
  };
  check_width(cfg.simulation.tensions, "simulation.tensions");
  check_width(cfg.reduction.tension_sets, "reduction.tension_sets");
  const int markers = static_cast<int>(cfg.robot.markers.size());
  for (int m : cfg.estimation.estimation_markers)
    require(m >= 0 && m < markers, "estimation.estimation_markers", "marker index out of range");
  for (int m : cfg.estimation.evaluation_markers)
    require(m >= 0 && m < markers, "estimation.evaluation_markers", "marker index out of range");
  return cfg;
}

json to_json(const ScenarioConfig& cfg) {
  const auto& s = cfg.simulation;
  const auto& r = cfg.reduction;
  const auto& e = cfg.estimation;
  json red = {{"layout", r.layout}, {"modes", r.modes}, {"n_list", r.n_list}, {"tension_sets", r.tension_sets},
              {"test_horizon", r.test_horizon}};
  if (r.test_signal) red["test_signal"] = write(*r.test_signal);
  return {{"name", cfg.name},
          {"seed", cfg.seed},
          {"output", cfg.output},
          {"robot", write(cfg.robot)},
          {"simulation",
           {{"kind", s.kind},
            {"tensions", s.tensions},
            {"grid_levels", s.grid_levels},
            {"tolerance", s.tolerance},
            {"signal", write(s.signal)},
            {"horizon", s.horizon},
            {"dt", s.dt},
            {"sample_rate", s.sample_rate},
            {"integrator", s.integrator},
            {"rtol", s.rtol},
            {"atol", s.atol}}},
          {"reduction", red},
          {"estimation",
           {{"estimation_markers", e.estimation_markers},
            {"evaluation_markers", e.evaluation_markers},
            {"modes", e.modes},
            {"measurements", e.measurements},
            {"noise", e.noise},
            {"analytic_jacobian", e.analytic_jacobian}}},
          {"bench", {{"repetitions", cfg.bench.repetitions}}}};
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void save_config(const std::string& path, const ScenarioConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write config file: " + path);
  os << to_json(cfg).dump(2) << '\n';
}

std::string robot_hash(const ScenarioConfig& cfg) { return hex64(fnv1a64(write(cfg.robot).dump())); }

Robot build_robot(const RobotConfig& cfg) {
  Robot robot;
  robot.base.R = exp_se3(make_twist(vec(cfg.base_rotation), Vec3::Zero())).R;
  robot.base.r = vec(cfg.base_position);
  robot.gravity = vec(cfg.gravity);

  int cable_offset = 0;
  for (const auto& e : cfg.elements) {
    if (const auto* s = std::get_if<SoftLinkConfig>(&e)) {
      SoftLinkSpec spec;
      spec.length = s->length;
      spec.material = {s->material.young_modulus, s->material.poisson_ratio, s->material.density, s->material.damping};
      spec.section = {s->base_radius, s->tip_radius};
      spec.gauss_points = s->gauss_points;
      spec.section_breaks = s->section_breaks;
      const Twist ref = Eigen::Map<const Vec6>(s->reference.data());
      if (!ref.isApprox(straight_reference())) spec.reference_strain = [ref](double) { return ref; };
      robot.elements.emplace_back(std::move(spec));
    } else if (const auto* j = std::get_if<JointConfig>(&e)) {
      robot.elements.emplace_back(build_joint(*j));
    } else if (const auto* b = std::get_if<BodyConfig>(&e)) {
      RigidBodySpec body;
      body.inertia = RigidBodySpec::cylinder_inertia(b->mass, b->radius, b->length);
      body.cm = Pose::translation(vec(b->cm));
      body.end = Pose::translation(vec(b->end));
      for (const auto& o : b->outlets) body.outlets.push_back({o.cable, vec(o.left), vec(o.right)});
      robot.elements.emplace_back(std::move(body));
    } else {
      const auto& c = std::get<ChainConfig>(e);
      for (int i = 0; i < c.count; ++i) {
        robot.elements.emplace_back(build_joint(c.joint));
        RigidBodySpec body;
        body.inertia = RigidBodySpec::cylinder_inertia(c.body_mass, c.body_radius, c.body_length);
        body.cm = Pose::translation(Vec3(0.5 * c.gap + 0.5 * c.body_length, 0, 0));
        body.end = Pose::translation(Vec3(c.gap + c.body_length, 0, 0));
        for (std::size_t k = 0; k < c.spans.size(); ++k) {
          if (i >= c.spans[k]) continue;
          body.outlets.push_back({cable_offset + static_cast<int>(k), chain_hole(c, k, i, -0.5 * c.body_length),
                                  chain_hole(c, k, i, 0.5 * c.body_length)});
        }
        robot.elements.emplace_back(std::move(body));
      }
      for (std::size_t k = 0; k < c.spans.size(); ++k) robot.chain_cables.push_back({chain_hole(c, k, 0, 0.0)});
      cable_offset += static_cast<int>(c.spans.size());
    }
  }
  for (const auto& a : cfg.chain_cables) robot.chain_cables.push_back({vec(a)});

  // Soft-link indices in the config refer to the expanded element list only
  // through soft links, which chain generators never produce; map them.
  std::vector<int> element_of_config;
  {
    int expanded = 0;
    for (const auto& e : cfg.elements) {
      element_of_config.push_back(expanded);
      expanded += std::holds_alternative<ChainConfig>(e) ? 2 * std::get<ChainConfig>(e).count : 1;
    }
  }
  auto link_index = [&](int link, const std::string& what) {
    if (link < 0 || link >= static_cast<int>(cfg.elements.size()) ||
        !std::holds_alternative<SoftLinkConfig>(cfg.elements[link]))
      throw ConfigError(what + ": link " + std::to_string(link) + " is not a soft element");
    return element_of_config[link];
  };

  for (std::size_t k = 0; k < cfg.cables.size(); ++k) {
    const auto& c = cfg.cables[k];
    const std::string what = "robot.cables[" + std::to_string(k) + "]";
    const int link = link_index(c.link, what);
    const auto& soft = std::get<SoftLinkConfig>(cfg.elements[c.link]);
    CableSpec spec;
    spec.link = link;
    spec.offset_base = vec(c.offset_base);
    spec.offset_tip = vec(c.offset_tip);
    spec.path_length = soft.length;
    spec.x_begin = c.x_begin.value_or(0.0);
    spec.x_end = c.x_end.value_or(soft.length);
    spec.routing = c.routing == "disk_guided" ? CableRouting::disk_guided : CableRouting::internal;
    spec.disks = c.disks;
    spec.friction = c.friction;
    robot.cables.push_back(std::move(spec));
  }
  for (std::size_t k = 0; k < cfg.markers.size(); ++k) {
    const auto& m = cfg.markers[k];
    robot.markers.push_back({link_index(m.link, "robot.markers[" + std::to_string(k) + "]"), m.x, vec(m.offset)});
  }
  for (std::size_t k = 0; k < cfg.loads.size(); ++k) {
    const auto& l = cfg.loads[k];
    robot.loads.push_back({link_index(l.link, "robot.loads[" + std::to_string(k) + "]"), l.x,
                           Eigen::Map<const Vec6>(l.wrench.data()), l.world});
  }
  robot.validate();
  return robot;
}

std::vector<StrainBasisPtr> build_bases(const RobotConfig& cfg) {
  std::vector<StrainBasisPtr> bases;
  for (const auto& e : cfg.elements) {
    const auto* s = std::get_if<SoftLinkConfig>(&e);
    if (!s) continue;
    if (s->basis.kind == "legendre") {
      bases.push_back(std::make_shared<LegendreMonomialBasis>(s->length, s->basis.sections.front()));
      continue;
    }
    std::vector<double> starts{0.0};
    starts.insert(starts.end(), s->section_breaks.begin(), s->section_breaks.end());
    std::vector<StrainBasisPtr> sections;
    for (std::size_t i = 0; i < s->basis.sections.size(); ++i) {
      const double end = i + 1 < starts.size() ? starts[i + 1] : s->length;
      sections.push_back(std::make_shared<LegendreMonomialBasis>(end - starts[i], s->basis.sections[i]));
    }
    bases.push_back(std::make_shared<PiecewiseBasis>(s->length, s->section_breaks, std::move(sections)));
  }
  return bases;
}

Model build_model(const RobotConfig& cfg) { return make_full_model(build_robot(cfg), build_bases(cfg)); }

ActuationSignal build_signal(const SignalConfig& s, int channels, double horizon, std::uint64_t seed) {
  auto vector_of = [&](const std::vector<double>& v, const std::string& what) {
    if (static_cast<int>(v.size()) != channels)
      throw ConfigError(what + ": expected " + std::to_string(channels) + " values");
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), channels));
  };
  if (s.kind == "constant") return ActuationSignal::constant(vector_of(s.value, "signal.value"));
  if (s.kind == "step") return ActuationSignal::step(vector_of(s.value, "signal.value"), s.at);
  if (s.kind == "babbling")
    return ActuationSignal::babbling(channels, s.low, s.high, s.hold_min, s.hold_max, horizon, seed);
  std::vector<Eigen::VectorXd> values;
  for (const auto& v : s.values) values.push_back(vector_of(v, "signal.values"));
  return ActuationSignal(s.times, std::move(values));
}

DynamicsOptions dynamics_options(const SimulationConfig& s) {
  DynamicsOptions o;
  o.integrator = s.integrator == "rk4" ? Integrator::rk4 : s.integrator == "rk45" ? Integrator::rk45 : Integrator::imex;
  o.dt = s.dt;
  o.sample_rate = s.sample_rate;
  o.rtol = s.rtol;
  o.atol = s.atol;
  return o;
}

std::vector<Eigen::VectorXd> static_cases(const SimulationConfig& s, int channels) {
  std::vector<Eigen::VectorXd> cases;
  if (!s.grid_levels.empty()) cases = tension_grid(channels, s.grid_levels);
  for (const auto& t : s.tensions) {
    if (static_cast<int>(t.size()) != channels) throw ConfigError("simulation.tensions: wrong width");
    cases.emplace_back(Eigen::Map<const Eigen::VectorXd>(t.data(), channels));
  }
  return cases;
}

SnapshotLayout snapshot_layout(const ReductionConfig& cfg) { return snapshot_layout_from_string(cfg.layout); }

}  // namespace gvs::app
