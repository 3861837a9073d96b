#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "gvs/dynamics.hpp"
#include "gvs/estimation.hpp"
#include "gvs/model.hpp"
#include "gvs/reduction.hpp"
#include "gvs/signal.hpp"

namespace gvs::app {

// Malformed or inconsistent configuration; the message starts with the key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Triple = std::array<double, 3>;
using Orders = std::array<int, 6>;

struct MaterialConfig {
  double young_modulus = 1e6;
  double poisson_ratio = 0.5;
  double density = 1000.0;
  double damping = 0.0;
  bool operator==(const MaterialConfig&) const = default;
};

// kind "legendre": one orders entry. kind "piecewise": one per section.
struct BasisConfig {
  std::string kind = "legendre";
  std::vector<Orders> sections;
  bool operator==(const BasisConfig&) const = default;
};

struct SoftLinkConfig {
  double length = 0.25;
  MaterialConfig material;
  double base_radius = 0.01;
  double tip_radius = 0.01;
  int gauss_points = 5;
  std::vector<double> section_breaks;
  std::array<double, 6> reference{0, 0, 0, 1, 0, 0};
  BasisConfig basis;
  bool operator==(const SoftLinkConfig&) const = default;
};

struct HardeningConfig {
  double k0 = 1.0;
  double theta_limit = 0.3;
  double k_wall = 1.0;
  int exponent = 7;
  bool operator==(const HardeningConfig&) const = default;
};

struct JointConfig {
  std::string kind = "spherical";
  Triple axis{0, 0, 1};
  double stiffness = 0.0;
  std::optional<HardeningConfig> hardening;
  double damping = 0.0;
  bool operator==(const JointConfig&) const = default;
};

struct OutletConfig {
  int cable = 0;
  Triple left{};
  Triple right{};
  bool operator==(const OutletConfig&) const = default;
};

// Solid cylinder along local x; cm and end are offsets from the body's start frame.
struct BodyConfig {
  double mass = 0.01;
  double radius = 0.01;
  double length = 0.02;
  Triple cm{0.01, 0, 0};
  Triple end{0.02, 0, 0};
  std::vector<OutletConfig> outlets;
  bool operator==(const BodyConfig&) const = default;
};

// Expands to `count` (joint, body) pairs with cables threaded at a common
// radius. Cable k sits at angle first_angle + k * 360/cables degrees and
// passes through the first spans[k] bodies; anchors lie on the base plane.
struct ChainConfig {
  int count = 1;
  JointConfig joint;
  double body_mass = 0.01;
  double body_radius = 0.01;
  double body_length = 0.025;
  double gap = 0.005;
  double outlet_radius = 0.008;
  std::optional<double> outlet_radius_tip;  // linear taper over the bodies when set
  double first_angle = 0.0;
  std::vector<int> spans;
  bool operator==(const ChainConfig&) const = default;
};

using ElementConfig = std::variant<SoftLinkConfig, JointConfig, BodyConfig, ChainConfig>;

struct CableConfig {
  int link = 0;
  Triple offset_base{};
  Triple offset_tip{};
  std::optional<double> x_begin;
  std::optional<double> x_end;
  std::string routing = "internal";
  std::vector<double> disks;
  double friction = 0.0;
  bool operator==(const CableConfig&) const = default;
};

struct MarkerConfig {
  int link = 0;
  double x = 0.0;
  Triple offset{};
  bool operator==(const MarkerConfig&) const = default;
};

struct LoadConfig {
  int link = 0;
  double x = 0.0;
  std::array<double, 6> wrench{};
  bool world = true;
  bool operator==(const LoadConfig&) const = default;
};

struct RobotConfig {
  Triple base_position{};
  Triple base_rotation{};  // rotation vector, rad
  Triple gravity{};
  std::vector<ElementConfig> elements;
  std::vector<CableConfig> cables;
  std::vector<Triple> chain_cables;  // explicit anchors, appended after generated ones
  std::vector<MarkerConfig> markers;
  std::vector<LoadConfig> loads;
  bool operator==(const RobotConfig&) const = default;
};

// kind: constant | step | schedule | babbling
struct SignalConfig {
  std::string kind = "step";
  std::vector<double> value;
  double at = 0.0;
  double low = 0.0;
  double high = 0.0;
  double hold_min = 0.5;
  double hold_max = 1.0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;
  bool operator==(const SignalConfig&) const = default;
};

struct SimulationConfig {
  std::string kind = "statics";  // statics | dynamics
  // statics: explicit tension sets and/or a full grid over `grid_levels`
  std::vector<std::vector<double>> tensions;
  std::vector<double> grid_levels;
  double tolerance = 1e-9;
  // dynamics
  SignalConfig signal;
  double horizon = 1.0;
  double dt = 1e-3;
  double sample_rate = 100.0;
  std::string integrator = "imex";
  double rtol = 1e-6;
  double atol = 1e-9;
  bool operator==(const SimulationConfig&) const = default;
};

struct ReductionConfig {
  std::string layout = "by_component";
  int modes = 0;  // retained in the mode file; 0 keeps all
  std::vector<int> n_list;
  // compare: held-out static cases or a dynamic test signal
  std::vector<std::vector<double>> tension_sets;
  std::optional<SignalConfig> test_signal;
  double test_horizon = 0.0;
  bool operator==(const ReductionConfig&) const = default;
};

struct EstimationConfig {
  std::vector<int> estimation_markers;
  std::vector<int> evaluation_markers;
  int modes = 6;
  std::string measurements;  // default: <output>/markers.csv
  double noise = 0.0;        // std of Gaussian noise added to measurements, m
  bool analytic_jacobian = true;
  bool operator==(const EstimationConfig&) const = default;
};

struct BenchConfig {
  int repetitions = 5;
  bool operator==(const BenchConfig&) const = default;
};

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 0;
  std::string output = "out";
  RobotConfig robot;
  SimulationConfig simulation;
  ReductionConfig reduction;
  EstimationConfig estimation;
  BenchConfig bench;
  bool operator==(const ScenarioConfig&) const = default;
};

ScenarioConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& cfg);
ScenarioConfig load_config(const std::string& path);  // ConfigError or IoError
void save_config(const std::string& path, const ScenarioConfig& cfg);

// Hex FNV-1a of the canonical robot serialization.
std::string robot_hash(const ScenarioConfig& cfg);

Robot build_robot(const RobotConfig& cfg);
std::vector<StrainBasisPtr> build_bases(const RobotConfig& cfg);
Model build_model(const RobotConfig& cfg);

ActuationSignal build_signal(const SignalConfig& cfg, int channels, double horizon, std::uint64_t seed);
DynamicsOptions dynamics_options(const SimulationConfig& cfg);
std::vector<Eigen::VectorXd> static_cases(const SimulationConfig& cfg, int channels);
SnapshotLayout snapshot_layout(const ReductionConfig& cfg);

}  // namespace gvs::app
