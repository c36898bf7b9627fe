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

#include "locogauge/terrain.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "locogauge/util.hpp"

namespace locogauge {
namespace {

constexpr std::array<std::string_view, kNumTerrainKinds> kKindNames = {
    "flat",        "wave",      "slope_up",    "slope_down",
    "rough_slope", "stairs_up", "stairs_down", "obstacle"};

constexpr char kMagic[4] = {'R', 'G', 'H', 'F'};
constexpr std::uint16_t kBinaryVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "binary export assumes a little-endian host");

int grid_count(double extent, double resolution) {
  // Guard against 8 / 0.05 = 160.00000000000003.
  return static_cast<int>(std::ceil(extent / resolution - 1e-9));
}

void validate(const TerrainSpec& spec) {
  if (!(spec.length_m > 0.0) || !(spec.width_m > 0.0) ||
      !(spec.resolution_m > 0.0)) {
    throw InvalidArgument(fmt::format(
        "terrain: non-positive dimensions (length={}, width={}, resolution={})",
        spec.length_m, spec.width_m, spec.resolution_m));
  }
  if (spec.kind != TerrainKind::kFlat &&
      (spec.difficulty < 0.1 - 1e-9 || spec.difficulty > 1.0 + 1e-9)) {
    throw InvalidArgument(
        fmt::format("terrain: difficulty {} outside [0.1, 1.0]", spec.difficulty));
  }
  if (static_cast<int>(spec.kind) < 0 ||
      static_cast<int>(spec.kind) >= kNumTerrainKinds) {
    throw InvalidArgument("terrain: unknown kind");
  }
}

struct Box {
  double x0, x1, y0, y1;
};

std::vector<Box> place_obstacles(const TerrainSpec& spec) {
  Rng rng(derive_seed(spec.seed, "obstacles"));
  const double area = spec.length_m * spec.width_m;
  const int count = static_cast<int>(std::lround(kObstaclesPerTile * area / 64.0));
  const double spawn_y = spec.width_m / 2.0;
  std::vector<Box> boxes;
  for (int i = 0; i < count; ++i) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double wx = rng.uniform(kObstacleMinWidth, kObstacleMaxWidth);
      const double wy = rng.uniform(kObstacleMinWidth, kObstacleMaxWidth);
      const double cx = rng.uniform(0.0, spec.length_m);
      const double cy = rng.uniform(0.0, spec.width_m);
      const Box b{cx - wx / 2, cx + wx / 2, cy - wy / 2, cy + wy / 2};
      // Distance from the spawn point to the box.
      const double dx = std::max({b.x0 - kSpawnX, 0.0, kSpawnX - b.x1});
      const double dy = std::max({b.y0 - spawn_y, 0.0, spawn_y - b.y1});
      if (std::hypot(dx, dy) > kObstacleClearRadius) {
        boxes.push_back(b);
        break;
      }
    }
  }
  return boxes;
}

}  // namespace

std::string_view to_string(TerrainKind kind) {
  return kKindNames.at(static_cast<std::size_t>(kind));
}

TerrainKind terrain_kind_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == name) return static_cast<TerrainKind>(i);
  }
  throw InvalidArgument(fmt::format("unknown terrain kind '{}'", name));
}

double difficulty_for_level(int level) {
  if (level < 1 || level > kNumLevels) {
    throw InvalidArgument(fmt::format("level {} outside 1..{}", level, kNumLevels));
  }
  return level / 10.0;
}

double wave_amplitude(double d) { return 0.4 * d; }

double slope_gradient(double d) { return 0.07 + 0.5 * d; }

double stair_step_height(double d) {
  if (d <= 0.4 + 1e-9) return 0.05 + 0.3 * d;
  return 0.17 + 0.1 * (d - 0.4);
}

double obstacle_height(double d) { return 0.05 + 0.23 * d; }

double wave_height(double x, double y, double amplitude, double period) {
  return amplitude * std::sin(x / period) + amplitude * std::cos(y / period);
}

Heightfield::Heightfield(int rows, int cols, double resolution,
                         Eigen::Vector2d origin, std::vector<double> heights,
                         std::optional<TerrainSpec> spec)
    : rows_(rows),
      cols_(cols),
      resolution_(resolution),
      origin_(std::move(origin)),
      heights_(std::move(heights)),
      spec_(std::move(spec)) {
  if (rows_ <= 0 || cols_ <= 0 || !(resolution_ > 0.0)) {
    throw InvalidArgument("heightfield: non-positive dimensions");
  }
  if (heights_.size() != static_cast<std::size_t>(rows_) * cols_) {
    throw InvalidArgument("heightfield: height count does not match dimensions");
  }
  for (double h : heights_) {
    if (!std::isfinite(h)) throw InvalidArgument("heightfield: non-finite height");
  }
}

Eigen::Vector2d Heightfield::cell_center(int row, int col) const {
  return origin_ + Eigen::Vector2d((col + 0.5) * resolution_, (row + 0.5) * resolution_);
}

bool Heightfield::contains(double x, double y) const {
  return x >= origin_.x() && x <= origin_.x() + length() && y >= origin_.y() &&
         y <= origin_.y() + width();
}

double Heightfield::interpolate(double x, double y) const {
  auto axis = [this](double coord, double origin, int n, int& i0, int& i1, double& t) {
    double u = (coord - origin) / resolution_ - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    double base = std::floor(u);
    t = u - base;
    // Snap to the node so that queries at cell centres return stored values.
    if (t < 1e-9) {
      t = 0.0;
    } else if (t > 1.0 - 1e-9) {
      t = 0.0;
      base += 1.0;
    }
    i0 = std::min(static_cast<int>(base), n - 1);
    i1 = std::min(i0 + 1, n - 1);
  };
  int c0, c1, r0, r1;
  double tx, ty;
  axis(x, origin_.x(), cols_, c0, c1, tx);
  axis(y, origin_.y(), rows_, r0, r1, ty);
  const double h00 = at(r0, c0);
  const double h01 = at(r0, c1);
  const double h10 = at(r1, c0);
  const double h11 = at(r1, c1);
  if (tx == 0.0 && ty == 0.0) return h00;
  const double lower = h00 + tx * (h01 - h00);
  const double upper = h10 + tx * (h11 - h10);
  return lower + ty * (upper - lower);
}

double Heightfield::height_at(double x, double y) const {
  if (!contains(x, y)) {
    throw OutOfBounds(fmt::format("height query ({}, {}) outside field [{}, {}] x [{}, {}]",
                                  x, y, origin_.x(), origin_.x() + length(),
                                  origin_.y(), origin_.y() + width()));
  }
  return interpolate(x, y);
}

double Heightfield::height_clamped(double x, double y) const {
  return interpolate(x, y);
}

Eigen::Vector2d Heightfield::spawn_point() const {
  return origin_ + Eigen::Vector2d(kSpawnX, width() / 2.0);
}

Heightfield generate(const TerrainSpec& spec) {
  validate(spec);
  const int cols = grid_count(spec.length_m, spec.resolution_m);
  const int rows = grid_count(spec.width_m, spec.resolution_m);
  std::vector<double> heights(static_cast<std::size_t>(rows) * cols, 0.0);
  const double d = spec.difficulty;
  const double res = spec.resolution_m;

  auto for_each_cell = [&](auto&& fn) {
    for (int r = 0; r < rows; ++r) {
      const double y = (r + 0.5) * res;
      for (int c = 0; c < cols; ++c) {
        const double x = (c + 0.5) * res;
        heights[static_cast<std::size_t>(r) * cols + c] = fn(x, y);
      }
    }
  };

  switch (spec.kind) {
    case TerrainKind::kFlat:
      break;
    case TerrainKind::kWave: {
      const double a = wave_amplitude(d);
      for_each_cell([a](double x, double y) { return wave_height(x, y, a); });
      break;
    }
    case TerrainKind::kSlopeUp:
    case TerrainKind::kSlopeDown: {
      const double k = slope_gradient(d) * (spec.kind == TerrainKind::kSlopeDown ? -1.0 : 1.0);
      for_each_cell([k](double x, double) { return k * x; });
      break;
    }
    case TerrainKind::kRoughSlope: {
      const double k = slope_gradient(d);
      Rng rng(derive_seed(spec.seed, "rough"));
      // Row-major draw order keeps the noise layout deterministic.
      for_each_cell([&](double x, double) {
        return k * x + rng.uniform(-kRoughAmplitude, kRoughAmplitude);
      });
      break;
    }
    case TerrainKind::kStairsUp:
    case TerrainKind::kStairsDown: {
      const double h = stair_step_height(d) * (spec.kind == TerrainKind::kStairsDown ? -1.0 : 1.0);
      for_each_cell([h](double x, double) {
        if (x < kFeatureStartX) return 0.0;
        const double step = std::floor((x - kFeatureStartX) / kStairTread) + 1.0;
        return step * h;
      });
      break;
    }
    case TerrainKind::kObstacle: {
      const double h = obstacle_height(d);
      const auto boxes = place_obstacles(spec);
      for_each_cell([&](double x, double y) {
        for (const Box& b : boxes) {
          if (x >= b.x0 && x < b.x1 && y >= b.y0 && y < b.y1) return h;
        }
        return 0.0;
      });
      break;
    }
  }
  return Heightfield(rows, cols, res, Eigen::Vector2d::Zero(), std::move(heights), spec);
}

std::vector<double> sample_height_grid(const Heightfield& hf, const Pose2& base,
                                       double base_z) {
  const double c = std::cos(base.yaw);
  const double s = std::sin(base.yaw);
  std::vector<double> out;
  out.reserve(kScanRows * kScanCols);
  for (int r = 0; r < kScanRows; ++r) {
    const double ly = -0.5 + kScanSpacing * r;
    for (int col = 0; col < kScanCols; ++col) {
      const double lx = -0.8 + kScanSpacing * col;
      const double wx = base.x + c * lx - s * ly;
      const double wy = base.y + s * lx + c * ly;
      if (!hf.contains(wx, wy)) {
        throw OutOfBounds(fmt::format(
            "height scan window leaves the field at ({:.3f}, {:.3f})", wx, wy));
      }
      out.push_back(hf.height_at(wx, wy) - base_z);
    }
  }
  return out;
}

void write_csv(const Heightfield& hf, std::ostream& out) {
  for (int r = 0; r < hf.rows(); ++r) {
    for (int c = 0; c < hf.cols(); ++c) {
      if (c) out << ',';
      out << fmt::format("{:.6f}", hf.at(r, c));
    }
    out << '\n';
  }
}

std::vector<std::uint8_t> to_binary(const Heightfield& hf) {
  std::vector<std::uint8_t> bytes;
  auto put = [&bytes](const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  };
  put(kMagic, 4);
  put(&kBinaryVersion, sizeof(kBinaryVersion));
  const auto cols = static_cast<std::uint32_t>(hf.cols());
  const auto rows = static_cast<std::uint32_t>(hf.rows());
  put(&cols, sizeof(cols));
  put(&rows, sizeof(rows));
  const double res = hf.resolution();
  put(&res, sizeof(res));
  for (double h : hf.heights()) {
    const auto f = static_cast<float>(h);
    put(&f, sizeof(f));
  }
  return bytes;
}

void write_binary(const Heightfield& hf, std::ostream& out) {
  const auto bytes = to_binary(hf);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Heightfield from_binary(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  auto take = [&](void* p, std::size_t n) {
    if (pos + n > bytes.size()) throw FormatError("heightfield binary: truncated");
    std::memcpy(p, bytes.data() + pos, n);
    pos += n;
  };
  char magic[4];
  take(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("heightfield binary: bad magic");
  std::uint16_t version = 0;
  take(&version, sizeof(version));
  if (version != kBinaryVersion) {
    throw FormatError(fmt::format("heightfield binary: unsupported version {}", version));
  }
  std::uint32_t cols = 0, rows = 0;
  take(&cols, sizeof(cols));
  take(&rows, sizeof(rows));
  double res = 0.0;
  take(&res, sizeof(res));
  if (cols == 0 || rows == 0 || !(res > 0.0)) {
    throw FormatError("heightfield binary: invalid dimensions");
  }
  std::vector<double> heights(static_cast<std::size_t>(rows) * cols);
  for (double& h : heights) {
    float f = 0.0f;
    take(&f, sizeof(f));
    h = f;
  }
  if (pos != bytes.size()) throw FormatError("heightfield binary: trailing bytes");
  return Heightfield(static_cast<int>(rows), static_cast<int>(cols), res,
                     Eigen::Vector2d::Zero(), std::move(heights));
}

Heightfield read_binary(std::istream& in) {
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>()};
  return from_binary(bytes);
}

}  // namespace locogauge
