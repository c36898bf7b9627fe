// Copyright 2026 The locogauge Authors
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

/*
 * terrain.hpp
 *
 * Procedural heightfields for the evaluation terrains. Every terrain is an
 * 8 m x 8 m tile (by default) laid out along +x: the robot spawns at
 * (spawn_x, width/2) facing +x and terrain features start one metre ahead.
 *
 * Grid convention: heights are stored at cell centres, row-major, rows along
 * y and columns along x. Cell (r, c) is centred at
 *   (origin.x + (c + 0.5) * res, origin.y + (r + 0.5) * res).
 */

#ifndef LOCOGAUGE_TERRAIN_HPP_
#define LOCOGAUGE_TERRAIN_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace locogauge {

enum class TerrainKind {
  kFlat,
  kWave,
  kSlopeUp,
  kSlopeDown,
  kRoughSlope,
  kStairsUp,
  kStairsDown,
  kObstacle,
};

inline constexpr int kNumTerrainKinds = 8;
inline constexpr int kNumLevels = 10;

std::string_view to_string(TerrainKind kind);
/// Throws InvalidArgument on unknown names.
TerrainKind terrain_kind_from_string(std::string_view name);

struct TerrainSpec {
  TerrainKind kind = TerrainKind::kFlat;
  double difficulty = 0.1;  // d in [0.1, 1.0]
  double length_m = 8.0;    // along x
  double width_m = 8.0;     // along y
  double resolution_m = 0.05;
  std::uint64_t seed = 0;
};

/// Difficulty parameter of a curriculum level: d = L / 10.
double difficulty_for_level(int level);

// Level formulas.
double wave_amplitude(double d);      // A = 0.4 d
double slope_gradient(double d);      // k = 0.07 + 0.5 d
double stair_step_height(double d);   // piecewise, 0.08 .. 0.23 m
double obstacle_height(double d);     // 0.05 + 0.23 d

inline constexpr double kWavePeriod = 1.6;
inline constexpr double kStairTread = 0.31;
inline constexpr double kRoughAmplitude = 0.05;
inline constexpr double kSpawnX = 1.0;
inline constexpr double kFeatureStartX = 2.0;  // 1 m apron ahead of spawn
inline constexpr double kObstacleClearRadius = 0.6;
inline constexpr double kObstaclesPerTile = 6.0;  // per 64 m^2
inline constexpr double kObstacleMinWidth = 1.0;
inline constexpr double kObstacleMaxWidth = 2.0;

/// Analytic wave surface z = A sin(x/T) + A cos(y/T).
double wave_height(double x, double y, double amplitude, double period = kWavePeriod);

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

class Heightfield {
 public:
  Heightfield(int rows, int cols, double resolution, Eigen::Vector2d origin,
              std::vector<double> heights, std::optional<TerrainSpec> spec = {});

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double resolution() const { return resolution_; }
  const Eigen::Vector2d& origin() const { return origin_; }
  const std::optional<TerrainSpec>& spec() const { return spec_; }
  const std::vector<double>& heights() const { return heights_; }

  double at(int row, int col) const { return heights_[row * cols_ + col]; }
  Eigen::Vector2d cell_center(int row, int col) const;

  double length() const { return cols_ * resolution_; }
  double width() const { return rows_ * resolution_; }
  bool contains(double x, double y) const;

  /// Bilinear interpolation between cell centres, exact at centres.
  /// Throws OutOfBounds outside the field.
  double height_at(double x, double y) const;

  /// As height_at but clamps the query into the field, so the terrain is
  /// continued by its border values.
  double height_clamped(double x, double y) const;

  /// Spawn point of the tile in world coordinates.
  Eigen::Vector2d spawn_point() const;

 private:
  double interpolate(double x, double y) const;

  int rows_;
  int cols_;
  double resolution_;
  Eigen::Vector2d origin_;
  std::vector<double> heights_;
  std::optional<TerrainSpec> spec_;
};

/// Pure function of the spec. Throws InvalidArgument on invalid specs.
Heightfield generate(const TerrainSpec& spec);

inline constexpr int kScanRows = 11;  // lateral, -0.5 .. 0.5 m
inline constexpr int kScanCols = 17;  // longitudinal, -0.8 .. 0.8 m
inline constexpr double kScanSpacing = 0.1;

/// Height samples of the 1 m x 1.6 m window centred on the base, relative to
/// base_z, row-major (rows lateral, columns longitudinal, both ascending in
/// the base frame). Throws OutOfBounds when the window leaves the field.
std::vector<double> sample_height_grid(const Heightfield& hf, const Pose2& base,
                                       double base_z);

// Export formats.
void write_csv(const Heightfield& hf, std::ostream& out);
/// "RGHF", u16 version, u32 cols, u32 rows, f64 resolution, f32 heights.
void write_binary(const Heightfield& hf, std::ostream& out);
std::vector<std::uint8_t> to_binary(const Heightfield& hf);
Heightfield read_binary(std::istream& in);
Heightfield from_binary(const std::vector<std::uint8_t>& bytes);

}  // namespace locogauge

#endif  // LOCOGAUGE_TERRAIN_HPP_
