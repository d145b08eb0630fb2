// Copyright 2026 The OAO Explorer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file world.hpp
 *
 * @brief Deterministic table-top surrogate: objects, reach-and-enclose
 * actions, top-down depth rasters and an analytic outcome model.
 *
 * Lengths are in centimetres and angles in radians. The object sits at the
 * origin; the hand sweeps a semi-circle of radius `r_path` whose via point
 * lies in direction `phi_path`. The hand passes closest to the object centre
 * when r_path equals `WorldConfig::centre_radius`, so the miss distance is
 * |r_path - centre_radius|.
 */

#ifndef OAO_WORLD_HPP
#define OAO_WORLD_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oao/io.hpp"
#include "oao/rng.hpp"

namespace oao::world {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class ObjectKind : std::uint8_t { cup = 0, cylinder = 1, sphere = 2 };
enum class Gripper : std::uint8_t { closed = 0, half_open = 1, open = 2 };

inline constexpr std::array<ObjectKind, 3> kObjectKinds{ObjectKind::cup, ObjectKind::cylinder, ObjectKind::sphere};
inline constexpr std::array<Gripper, 3> kGrippers{Gripper::closed, Gripper::half_open, Gripper::open};

inline const char* to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::cup: return "cup";
    case ObjectKind::cylinder: return "cylinder";
    case ObjectKind::sphere: return "sphere";
  }
  return "?";
}

inline const char* to_string(Gripper g) {
  switch (g) {
    case Gripper::closed: return "closed";
    case Gripper::half_open: return "half_open";
    case Gripper::open: return "open";
  }
  return "?";
}

/// Every constant of the surrogate. Defaults are the reference world.
struct WorldConfig {
  double sigma_pos = 0.5;   // cm, on dx, dy, dz
  double sigma_ang = 0.05;  // rad, on dphi before sin/cos
  double centre_radius = 28.5;
  double finger_half_width = 1.0;
  double open_aperture = 11.0;
  double half_open_aperture = 5.0;
  double grasp_tolerance = 2.0;
  double handle_pinch_tolerance = 3.0;
  double handle_block_angle = kPi / 4.0;
  double handle_pinch_angle = kPi / 6.0;
  double handle_push_angle = kPi / 3.0;
  double lift_height = 10.0;
  double push_gain = 8.0;
  double sphere_push_gain = 20.0;
  double rotation_gain = 0.8;
  double handle_push_rotation = 0.4;
  double handle_block_rotation = 0.6;
  double handle_block_displacement = 4.0;
  double lift_threshold = 2.0;  // dz above which an outcome counts as lifted
};

// ---------------------------------------------------------------------------
// Value types

struct ObjectSpec {
  ObjectKind kind = ObjectKind::cylinder;
  double radius = 0.0;
  double height = 0.0;
  double handle_angle = 0.0;   // cup only
  double handle_offset = 0.0;  // cup only

  static constexpr double kCupRadius = 7.5;
  static constexpr double kHeight = 15.0;
  static constexpr double kHandleOffset = 12.5;
  static constexpr double kHandleLength = 10.0;
  static constexpr double kHandleWidth = 1.5;

  /// Throws std::invalid_argument unless every field lies in its kind's ranges.
  void validate() const {
    constexpr double tol = 1e-12;
    switch (kind) {
      case ObjectKind::cup:
        if (radius != kCupRadius || height != kHeight || handle_offset != kHandleOffset)
          throw std::invalid_argument("cup has fixed radius 7.5, height 15, handle offset 12.5");
        if (handle_angle < 0.0 || handle_angle >= kTwoPi) throw std::invalid_argument("cup handle angle out of [0, 2pi)");
        break;
      case ObjectKind::cylinder:
        if (height != kHeight || radius < 1.5 - tol || radius > 7.5 + tol)
          throw std::invalid_argument("cylinder needs height 15 and radius in [1.5, 7.5]");
        break;
      case ObjectKind::sphere:
        if (radius < 3.0 - tol || radius > 7.5 + tol || std::abs(height - 2.0 * radius) > tol)
          throw std::invalid_argument("sphere needs radius in [3, 7.5] and height 2 * radius");
        break;
    }
  }
};

struct ActionSpec {
  double r_path = 28.5;
  double phi_path = 0.0;
  Gripper gripper = Gripper::closed;

  static constexpr double kRadiusMin = 26.0;
  static constexpr double kRadiusMax = 31.0;

  /// One-hot gripper triple in the order (closed, half_open, open).
  std::array<double, 3> gripper_one_hot() const {
    std::array<double, 3> g{0.0, 0.0, 0.0};
    g[static_cast<std::size_t>(gripper)] = 1.0;
    return g;
  }

  void validate() const {
    if (r_path < kRadiusMin || r_path > kRadiusMax) throw std::invalid_argument("r_path outside [26, 31]");
    if (phi_path < 0.0 || phi_path > kTwoPi) throw std::invalid_argument("phi_path outside [0, 2pi]");
  }
};

struct Outcome {
  double dx = 0.0;
  double dy = 0.0;
  double dz = 0.0;
  double sin_dphi = 0.0;
  double cos_dphi = 1.0;

  std::array<double, 5> as_array() const { return {dx, dy, dz, sin_dphi, cos_dphi}; }
};

inline constexpr int kRasterSide = 32;
inline constexpr int kRasterSize = kRasterSide * kRasterSide;
inline constexpr double kRasterWindow = 40.0;     // cm, centred on the object
inline constexpr double kDepthNormalizer = 20.0;  // cm mapped to pixel value 1

/// Row-major 32x32 normalized top heights; row 0 is the most negative y.
struct DepthImage {
  std::array<double, kRasterSize> pixels{};

  double at(int row, int col) const { return pixels[static_cast<std::size_t>(row * kRasterSide + col)]; }
  bool operator==(const DepthImage&) const = default;
};

struct SemanticLabel {
  Gripper gripper = Gripper::closed;
  bool lifted = false;

  /// Class index in [0, 6): gripper * 2 + lifted.
  int index() const { return static_cast<int>(gripper) * 2 + (lifted ? 1 : 0); }
  bool operator==(const SemanticLabel&) const = default;
};

inline std::string to_string(const SemanticLabel& l) {
  return std::string(l.lifted ? "l_" : "n_") + to_string(l.gripper);
}

struct Interaction {
  std::uint64_t id = 0;
  ObjectSpec object;
  DepthImage depth;
  ActionSpec action;
  Outcome outcome;
  std::optional<std::array<double, 8>> i_enc;

  SemanticLabel label(double lift_threshold = WorldConfig{}.lift_threshold) const {
    return {action.gripper, outcome.dz > lift_threshold};
  }
};

// ---------------------------------------------------------------------------
// Sampling

inline ObjectSpec sample_object(ObjectKind kind, Rng& rng) {
  ObjectSpec o;
  o.kind = kind;
  switch (kind) {
    case ObjectKind::cup:
      o.radius = ObjectSpec::kCupRadius;
      o.height = ObjectSpec::kHeight;
      o.handle_offset = ObjectSpec::kHandleOffset;
      o.handle_angle = uniform(rng, 0.0, kTwoPi);
      break;
    case ObjectKind::cylinder:
      o.radius = uniform(rng, 1.5, 7.5);
      o.height = ObjectSpec::kHeight;
      break;
    case ObjectKind::sphere:
      o.radius = uniform(rng, 3.0, 7.5);
      o.height = 2.0 * o.radius;
      break;
  }
  return o;
}

inline ActionSpec sample_action(Gripper gripper, Rng& rng) {
  ActionSpec a;
  a.r_path = uniform(rng, ActionSpec::kRadiusMin, ActionSpec::kRadiusMax);
  a.phi_path = uniform(rng, 0.0, kTwoPi);
  a.gripper = gripper;
  return a;
}

// ---------------------------------------------------------------------------
// Rendering

/// Smallest absolute difference between two angles, in [0, pi].
inline double angular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return d > kPi ? kTwoPi - d : d;
}

namespace detail {

// Cup geometry used by the rasterizer.
inline constexpr double kCupWall = 1.0;          // cm rim thickness
inline constexpr double kCupFloorHeight = 1.0;   // cm inner floor
inline constexpr double kHandleTopHeight = 12.5; // cm

/// Top surface height (cm) of `o` at table point (x, y); 0 where empty.
inline double surface_height(const ObjectSpec& o, double x, double y) {
  const double r = std::hypot(x, y);
  switch (o.kind) {
    case ObjectKind::cylinder:
      return r <= o.radius ? o.height : 0.0;
    case ObjectKind::sphere:
      return r <= o.radius ? o.radius + std::sqrt(o.radius * o.radius - r * r) : 0.0;
    case ObjectKind::cup: {
      if (r <= o.radius) return r >= o.radius - kCupWall ? o.height : kCupFloorHeight;
      // Handle: a bar of width kHandleWidth along the handle direction, from
      // the body out to handle_offset.
      const double c = std::cos(o.handle_angle), s = std::sin(o.handle_angle);
      const double along = x * c + y * s;
      const double across = -x * s + y * c;
      if (along >= o.radius && along <= o.handle_offset && std::abs(across) <= 0.5 * ObjectSpec::kHandleWidth)
        return kHandleTopHeight;
      return 0.0;
    }
  }
  return 0.0;
}

}  // namespace detail

/// Orthographic top-down raster of a 40 cm window centred on the object.
/// Pixel value = surface height at the pixel centre / 20 cm, clamped to [0,1].
inline DepthImage render_depth(const ObjectSpec& object) {
  DepthImage img;
  const double pixel = kRasterWindow / kRasterSide;
  for (int row = 0; row < kRasterSide; ++row) {
    const double y = -0.5 * kRasterWindow + (row + 0.5) * pixel;
    for (int col = 0; col < kRasterSide; ++col) {
      const double x = -0.5 * kRasterWindow + (col + 0.5) * pixel;
      const double v = detail::surface_height(object, x, y) / kDepthNormalizer;
      img.pixels[static_cast<std::size_t>(row * kRasterSide + col)] = std::clamp(v, 0.0, 1.0);
    }
  }
  return img;
}

// ---------------------------------------------------------------------------
// Outcome model

enum class Mechanism { none, grasp, push, handle_block };

/// Noise-free mechanism and outcome (dphi returned unwrapped).
struct Effect {
  Mechanism mechanism = Mechanism::none;
  double dx = 0.0, dy = 0.0, dz = 0.0, dphi = 0.0;
};

inline Effect ideal_effect(const ObjectSpec& o, const ActionSpec& a, const WorldConfig& cfg = {}) {
  const double miss = std::abs(a.r_path - cfg.centre_radius);
  const double reach = o.radius + cfg.finger_half_width;
  Effect e;
  if (!(miss < reach)) return e;

  const bool is_cup = o.kind == ObjectKind::cup;
  const double handle_dist = is_cup ? angular_distance(a.phi_path, o.handle_angle) : kPi;
  const double tangent = a.phi_path + kPi / 2.0;

  auto lift = [&] {
    e.mechanism = Mechanism::grasp;
    e.dz = cfg.lift_height;
  };

  switch (a.gripper) {
    case Gripper::open:
      if (is_cup && handle_dist < cfg.handle_block_angle) {
        e.mechanism = Mechanism::handle_block;
        e.dx = cfg.handle_block_displacement * std::cos(tangent);
        e.dy = cfg.handle_block_displacement * std::sin(tangent);
        e.dphi = cfg.handle_block_rotation;
        return e;
      }
      if (2.0 * o.radius < cfg.open_aperture && miss < cfg.grasp_tolerance) {
        lift();
        return e;
      }
      break;
    case Gripper::half_open:
      if ((2.0 * o.radius < cfg.half_open_aperture && miss < cfg.grasp_tolerance) ||
          (is_cup && handle_dist < cfg.handle_pinch_angle && miss < cfg.handle_pinch_tolerance)) {
        lift();
        return e;
      }
      break;
    case Gripper::closed:
      break;
  }

  // Push.
  e.mechanism = Mechanism::push;
  const double depth = miss / reach;
  const double c = 1.0 - depth;
  const double magnitude = c * (o.kind == ObjectKind::sphere ? cfg.sphere_push_gain : cfg.push_gain);
  e.dx = magnitude * std::cos(tangent);
  e.dy = magnitude * std::sin(tangent);
  if (o.kind != ObjectKind::sphere) {
    const double side = a.r_path > cfg.centre_radius ? 1.0 : (a.r_path < cfg.centre_radius ? -1.0 : 0.0);
    e.dphi = c * cfg.rotation_gain * depth * side;
    if (is_cup && handle_dist < cfg.handle_push_angle) e.dphi += cfg.handle_push_rotation * c;
  }
  return e;
}

/// Executes the action: rule table plus Gaussian noise. A missed object
/// only receives positional noise on dx and dy.
inline Outcome execute(const ObjectSpec& o, const ActionSpec& a, Rng& rng, const WorldConfig& cfg = {}) {
  const Effect e = ideal_effect(o, a, cfg);
  std::normal_distribution<double> pos(0.0, 1.0);
  Outcome out;
  if (e.mechanism == Mechanism::none) {
    out.dx = cfg.sigma_pos * pos(rng);
    out.dy = cfg.sigma_pos * pos(rng);
    return out;
  }
  out.dx = e.dx + cfg.sigma_pos * pos(rng);
  out.dy = e.dy + cfg.sigma_pos * pos(rng);
  out.dz = e.dz + cfg.sigma_pos * pos(rng);
  const double dphi = e.dphi + cfg.sigma_ang * pos(rng);
  out.sin_dphi = std::sin(dphi);
  out.cos_dphi = std::cos(dphi);
  return out;
}

// ---------------------------------------------------------------------------
// Datasets

/// Interaction counts per (object kind x gripper) stratum, indexed
/// [kind][gripper] in enum order.
using StratumCounts = std::array<std::array<int, 3>, 3>;

inline StratumCounts uniform_counts(int per_stratum) {
  StratumCounts c{};
  for (auto& row : c) row.fill(per_stratum);
  return c;
}

/// Splits `total` over the 9 strata as evenly as possible; the first
/// total % 9 strata receive one extra interaction.
inline StratumCounts balanced_counts(int total) {
  StratumCounts c{};
  for (int s = 0; s < 9; ++s) c[s / 3][s % 3] = total / 9 + (s < total % 9 ? 1 : 0);
  return c;
}

/// Stratified dataset. Each stratum draws from its own substream
/// derive_seed(seed, "stratum", index), so strata can be generated
/// independently. Ids are first_id, first_id + 1, ... in output order.
inline std::vector<Interaction> generate_dataset(const StratumCounts& counts, std::uint64_t seed,
                                                 const WorldConfig& cfg = {}, std::uint64_t first_id = 0) {
  std::vector<Interaction> out;
  std::uint64_t id = first_id;
  for (int s = 0; s < 9; ++s) {
    const int n = counts[s / 3][s % 3];
    if (n < 0) throw std::invalid_argument("negative stratum count");
    Rng rng = make_rng(seed, "stratum", static_cast<std::uint64_t>(s));
    const ObjectKind kind = kObjectKinds[static_cast<std::size_t>(s / 3)];
    const Gripper gripper = kGrippers[static_cast<std::size_t>(s % 3)];
    for (int i = 0; i < n; ++i) {
      Interaction x;
      x.id = id++;
      x.object = sample_object(kind, rng);
      x.action = sample_action(gripper, rng);
      x.outcome = execute(x.object, x.action, rng, cfg);
      x.depth = render_depth(x.object);
      out.push_back(std::move(x));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset file "OAOD" (little-endian):
//   magic "OAOD", u32 version (1), u64 count, then count records of
//   u8 kind, f64 radius, f64 height, f64 handle_angle,
//   f64 x5 action (r_path, phi_path, closed, half_open, open),
//   f64 x5 outcome (dx, dy, dz, sin_dphi, cos_dphi), f64 x1024 depth (row-major).
// Record ids are implicit (position in file); handle_offset is implied by kind.

inline constexpr std::uint32_t kDatasetVersion = 1;

inline void save_dataset(std::ostream& out, const std::vector<Interaction>& data) {
  io::write_magic(out, "OAOD");
  io::write_u32(out, kDatasetVersion);
  io::write_u64(out, data.size());
  for (const auto& x : data) {
    io::write_u8(out, static_cast<std::uint8_t>(x.object.kind));
    io::write_f64(out, x.object.radius);
    io::write_f64(out, x.object.height);
    io::write_f64(out, x.object.handle_angle);
    io::write_f64(out, x.action.r_path);
    io::write_f64(out, x.action.phi_path);
    for (double g : x.action.gripper_one_hot()) io::write_f64(out, g);
    for (double v : x.outcome.as_array()) io::write_f64(out, v);
    for (double p : x.depth.pixels) io::write_f64(out, p);
  }
}

inline std::vector<Interaction> load_dataset(std::istream& in) {
  io::expect_magic(in, "OAOD");
  if (io::read_u32(in) != kDatasetVersion) throw io::FormatError("unsupported dataset version");
  const auto count = io::read_u64(in);
  std::vector<Interaction> data;
  data.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Interaction x;
    x.id = i;
    const auto kind = io::read_u8(in);
    if (kind > 2) throw io::FormatError("bad object kind");
    x.object.kind = static_cast<ObjectKind>(kind);
    x.object.radius = io::read_f64(in);
    x.object.height = io::read_f64(in);
    x.object.handle_angle = io::read_f64(in);
    if (x.object.kind == ObjectKind::cup) x.object.handle_offset = ObjectSpec::kHandleOffset;
    x.action.r_path = io::read_f64(in);
    x.action.phi_path = io::read_f64(in);
    std::array<double, 3> g{};
    for (auto& v : g) v = io::read_f64(in);
    int hot = -1;
    for (int k = 0; k < 3; ++k) {
      if (g[k] == 1.0) {
        if (hot >= 0) throw io::FormatError("gripper flags not one-hot");
        hot = k;
      } else if (g[k] != 0.0) {
        throw io::FormatError("gripper flags not one-hot");
      }
    }
    if (hot < 0) throw io::FormatError("gripper flags not one-hot");
    x.action.gripper = static_cast<Gripper>(hot);
    x.outcome.dx = io::read_f64(in);
    x.outcome.dy = io::read_f64(in);
    x.outcome.dz = io::read_f64(in);
    x.outcome.sin_dphi = io::read_f64(in);
    x.outcome.cos_dphi = io::read_f64(in);
    for (auto& p : x.depth.pixels) p = io::read_f64(in);
    data.push_back(std::move(x));
  }
  return data;
}

/// Lossy inspection export (no depth raster).
inline void export_csv(std::ostream& out, const std::vector<Interaction>& data, const WorldConfig& cfg = {}) {
  out << "id,kind,radius,height,handle_angle,r_path,phi_path,gripper,dx,dy,dz,sin_dphi,cos_dphi,label\n";
  for (const auto& x : data) {
    out << x.id << ',' << to_string(x.object.kind) << ',' << io::format_double(x.object.radius) << ','
        << io::format_double(x.object.height) << ',' << io::format_double(x.object.handle_angle) << ','
        << io::format_double(x.action.r_path) << ',' << io::format_double(x.action.phi_path) << ','
        << to_string(x.action.gripper) << ',' << io::format_double(x.outcome.dx) << ','
        << io::format_double(x.outcome.dy) << ',' << io::format_double(x.outcome.dz) << ','
        << io::format_double(x.outcome.sin_dphi) << ',' << io::format_double(x.outcome.cos_dphi) << ','
        << to_string(x.label(cfg.lift_threshold)) << '\n';
  }
}

}  // namespace oao::world

#endif  // OAO_WORLD_HPP
