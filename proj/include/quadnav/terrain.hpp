#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace quadnav {

enum class Family : int { Rough = 0, Pillar = 1, Stair = 2, Gap = 3, Tilt = 4 };

constexpr std::array<Family, 5> kAllFamilies = {
    Family::Rough, Family::Pillar, Family::Stair, Family::Gap, Family::Tilt};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

enum class Zone : uint8_t { Start = 0, Goal = 1, Safety = 2, Transition = 3, Challenge = 4 };

// Affine difficulty schedule p(d) = p_min + d (p_max - p_min).
struct DifficultyParam {
  std::string name;
  double p_min = 0.0;
  double p_max = 0.0;
};

// Throws std::domain_error for d outside [0,1].
double difficulty_map(double d, const DifficultyParam& param);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Discrete height surface over [0,length_m] x [0,width_m], values at cell
// centers. Row-major indexing: idx = ix * ny + iy.
struct HeightField {
  double length_m = 0.0;  // travel axis (x)
  double width_m = 0.0;   // lateral axis (y), the plane's W
  double cell_size = 0.0;
  int nx = 0;
  int ny = 0;
  std::vector<double> heights;
  std::vector<uint8_t> support_mask;  // 1 = supported
  std::vector<Zone> zone_labels;

  // difficulty-driving parameter actually used by the generator
  // (amplitude / obstacle count / step height / gap width / tilt angle)
  double realized_param = 0.0;

  int idx(int ix, int iy) const { return ix * ny + iy; }
  double cell_x(int ix) const { return (ix + 0.5) * cell_size; }
  double cell_y(int iy) const { return (iy + 0.5) * cell_size; }
  double h(int ix, int iy) const { return heights[idx(ix, iy)]; }
  bool supported(int ix, int iy) const { return support_mask[idx(ix, iy)] != 0; }
  Zone zone(int ix, int iy) const { return zone_labels[idx(ix, iy)]; }
  bool in_extent(double x, double y) const {
    return x >= 0.0 && x <= length_m && y >= 0.0 && y <= width_m;
  }
};

struct RoughParams {
  double a_min = 0.02;
  double a_max = 0.15;
  double noise_cell = 0.4;  // lattice spacing of the value noise, m
};
struct PillarParams {
  double n_min = 2.0;
  double n_max = 14.0;
  double radius = 0.25;
  double height = 0.6;
};
struct StairParams {
  double h_min = 0.05;
  double h_max = 0.25;
  double run = 0.30;
};
struct GapParams {
  double w_min = 0.10;
  double w_max = 0.60;
  int max_gaps = 4;
};
struct TiltParams {
  double theta_min = 0.05;
  double theta_max = 0.35;
};

struct TerrainConfig {
  double length_m = 8.0;
  double width_m = 4.0;
  double cell_size = 0.05;
  double start_safety_radius = 0.6;
  double goal_radius = 0.5;
  double transition_band = 0.5;
  int l_max = 10;
  RoughParams rough;
  PillarParams pillar;
  StairParams stair;
  GapParams gap;
  TiltParams tilt;

  Vec2 start_pos() const { return {0.8, width_m * 0.5}; }
  Vec2 goal_pos() const { return {length_m - 0.8, width_m * 0.5}; }
};

struct TerrainTile {
  Family family = Family::Rough;
  int level = 0;
  double difficulty_d = 0.0;
  HeightField field;
  Vec2 start_pos;
  Vec2 goal_pos;
  uint64_t seed = 0;
};

// Labels zones and blends heights: safety circles flat at 0, linear radial
// blend across the transition band, untouched challenge elsewhere.
// Input field carries raw challenge heights; throws std::runtime_error if the
// two safety discs (incl. bands) overlap or fall outside the extent.
HeightField apply_zones(HeightField field, Vec2 start_pos, Vec2 goal_pos,
                        const TerrainConfig& cfg);

// Full per-family generation including zoning. d in [0,1].
HeightField generate_heightfield(Family family, double d, uint64_t seed,
                                 const TerrainConfig& cfg);

// Deterministic tile for (level, family, seed). level in [0, l_max-1].
TerrainTile sample_tile(const TerrainConfig& cfg, int level, Family family,
                        uint64_t seed);

// Bilinear interpolation over cell centers (clamped at the half-cell border).
// Throws std::domain_error outside the extent.
double query_height(const HeightField& field, double x, double y);

// True iff all four surrounding cells are supported.
bool is_supported(const HeightField& field, double x, double y);

// Nearest-cell lookup, used by the surrogate's step/collision checks so that
// stair edges are seen at full height rather than smoothed by interpolation.
double nearest_cell_height(const HeightField& field, double x, double y);

// Binary export: row-major float32 heights at PATH plus a JSON sidecar at
// PATH + ".json" (dims, cell size, family, level, seed). Round-trips the
// float32 payload bit-exactly.
void save_heightfield(const HeightField& field, const std::string& path,
                      Family family, int level, uint64_t seed);
HeightField load_heightfield(const std::string& path);

// Grayscale PGM for quick inspection.
void save_heightfield_pgm(const HeightField& field, const std::string& path);

}  // namespace quadnav
