#include "quadnav/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "quadnav/rng.hpp"

namespace quadnav {

std::string family_name(Family f) {
  switch (f) {
    case Family::Rough: return "rough";
    case Family::Pillar: return "pillar";
    case Family::Stair: return "stair";
    case Family::Gap: return "gap";
    case Family::Tilt: return "tilt";
  }
  throw std::domain_error("unknown family");
}

Family family_from_name(const std::string& name) {
  for (Family f : kAllFamilies)
    if (family_name(f) == name) return f;
  throw std::domain_error("unknown terrain family: " + name);
}

double difficulty_map(double d, const DifficultyParam& param) {
  if (!(d >= 0.0 && d <= 1.0))
    throw std::domain_error("difficulty d outside [0,1]");
  if (param.p_min > param.p_max)
    throw std::domain_error("DifficultyParam with p_min > p_max: " + param.name);
  return param.p_min + d * (param.p_max - param.p_min);
}

namespace {

double dist2d(double ax, double ay, double bx, double by) {
  return std::hypot(ax - bx, ay - by);
}

// Zone of a point plus the transition blend fraction (0 at the safety edge,
// 1 at the challenge edge).
Zone classify(double x, double y, Vec2 start, Vec2 goal,
              const TerrainConfig& cfg, double* frac_out) {
  double rs = dist2d(x, y, start.x, start.y);
  double rg = dist2d(x, y, goal.x, goal.y);
  if (rs <= cfg.start_safety_radius) {
    *frac_out = 0.0;
    return Zone::Start;
  }
  if (rg <= cfg.goal_radius) {
    *frac_out = 0.0;
    return Zone::Goal;
  }
  double fs = (rs - cfg.start_safety_radius) / cfg.transition_band;
  double fg = (rg - cfg.goal_radius) / cfg.transition_band;
  double frac = std::clamp(std::min(fs, fg), 0.0, 1.0);
  *frac_out = frac;
  return frac < 1.0 ? Zone::Transition : Zone::Challenge;
}

HeightField make_grid(const TerrainConfig& cfg) {
  HeightField f;
  f.length_m = cfg.length_m;
  f.width_m = cfg.width_m;
  f.cell_size = cfg.cell_size;
  f.nx = static_cast<int>(std::ceil(cfg.length_m / cfg.cell_size));
  f.ny = static_cast<int>(std::ceil(cfg.width_m / cfg.cell_size));
  f.heights.assign(static_cast<size_t>(f.nx) * f.ny, 0.0);
  f.support_mask.assign(static_cast<size_t>(f.nx) * f.ny, 1);
  f.zone_labels.assign(static_cast<size_t>(f.nx) * f.ny, Zone::Challenge);
  return f;
}

// Smoothed lattice value noise in [-1,1], pure function of (seed, x, y).
double value_noise(uint64_t seed, double x, double y, double lattice) {
  double u = x / lattice;
  double v = y / lattice;
  int i0 = static_cast<int>(std::floor(u));
  int j0 = static_cast<int>(std::floor(v));
  double fu = u - i0;
  double fv = v - j0;
  // smoothstep fade
  double su = fu * fu * (3.0 - 2.0 * fu);
  double sv = fv * fv * (3.0 - 2.0 * fv);
  auto corner = [&](int i, int j) {
    uint64_t h = hash_mix(seed, static_cast<uint64_t>(i + 100000),
                          static_cast<uint64_t>(j + 100000));
    return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  };
  double a = corner(i0, j0), b = corner(i0 + 1, j0);
  double c = corner(i0, j0 + 1), d = corner(i0 + 1, j0 + 1);
  double top = a + su * (b - a);
  double bot = c + su * (d - c);
  return top + sv * (bot - top);
}

struct GapSpec {
  double center = 0.0;
  double width = 0.0;
};

std::vector<GapSpec> layout_gaps(double d, uint64_t seed, const TerrainConfig& cfg,
                                 double* width_out) {
  double width =
      difficulty_map(d, {"gap_width", cfg.gap.w_min, cfg.gap.w_max});
  *width_out = width;
  Vec2 start = cfg.start_pos();
  Vec2 goal = cfg.goal_pos();
  double lo = start.x + cfg.start_safety_radius + cfg.transition_band +
              cfg.gap.w_max * 0.5;
  double hi = goal.x - cfg.goal_radius - cfg.transition_band - cfg.gap.w_max * 0.5;
  Rng rng(hash_mix(seed, 29));
  int n = 1 + static_cast<int>(rng.uniform_int(cfg.gap.max_gaps));
  double slot = (hi - lo) / n;
  std::vector<GapSpec> gaps;
  for (int i = 0; i < n; ++i) {
    double c0 = lo + (i + 0.5) * slot;
    double jitter_range = std::max(0.0, slot * 0.5 - cfg.gap.w_max * 0.5 - 0.05);
    double c = c0 + rng.uniform(-jitter_range, jitter_range);
    gaps.push_back({c, width});
  }
  return gaps;
}

}  // namespace

HeightField apply_zones(HeightField field, Vec2 start_pos, Vec2 goal_pos,
                        const TerrainConfig& cfg) {
  double sep = dist2d(start_pos.x, start_pos.y, goal_pos.x, goal_pos.y);
  if (sep <= cfg.start_safety_radius + cfg.goal_radius)
    throw std::runtime_error("start/goal safety zones overlap");
  auto inside = [&](Vec2 p, double r) {
    return p.x - r >= 0.0 && p.x + r <= field.length_m && p.y - r >= 0.0 &&
           p.y + r <= field.width_m;
  };
  if (!inside(start_pos, cfg.start_safety_radius) ||
      !inside(goal_pos, cfg.goal_radius))
    throw std::runtime_error("terrain extent too small for start/goal zones");

  for (int ix = 0; ix < field.nx; ++ix) {
    for (int iy = 0; iy < field.ny; ++iy) {
      double frac = 1.0;
      Zone z = classify(field.cell_x(ix), field.cell_y(iy), start_pos, goal_pos,
                        cfg, &frac);
      int k = field.idx(ix, iy);
      field.zone_labels[k] = z;
      field.heights[k] *= frac;
      if (z != Zone::Challenge) field.support_mask[k] = 1;
    }
  }
  return field;
}

HeightField generate_heightfield(Family family, double d, uint64_t seed,
                                 const TerrainConfig& cfg) {
  if (!(d >= 0.0 && d <= 1.0))
    throw std::domain_error("difficulty d outside [0,1]");
  HeightField f = make_grid(cfg);
  Vec2 start = cfg.start_pos();
  Vec2 goal = cfg.goal_pos();

  switch (family) {
    case Family::Rough: {
      double amp = difficulty_map(d, {"rough_amp", cfg.rough.a_min, cfg.rough.a_max});
      f.realized_param = amp;
      // raw noise everywhere, then rescale to zero mean / unit max-abs over
      // the challenge region
      double sum = 0.0;
      int n_challenge = 0;
      for (int ix = 0; ix < f.nx; ++ix)
        for (int iy = 0; iy < f.ny; ++iy) {
          double v = value_noise(seed, f.cell_x(ix), f.cell_y(iy), cfg.rough.noise_cell);
          f.heights[f.idx(ix, iy)] = v;
          double frac;
          if (classify(f.cell_x(ix), f.cell_y(iy), start, goal, cfg, &frac) ==
              Zone::Challenge) {
            sum += v;
            ++n_challenge;
          }
        }
      if (n_challenge == 0)
        throw std::runtime_error("terrain geometry leaves no challenge region");
      double mean = sum / n_challenge;
      double max_abs = 0.0;
      for (int ix = 0; ix < f.nx; ++ix)
        for (int iy = 0; iy < f.ny; ++iy) {
          double frac;
          if (classify(f.cell_x(ix), f.cell_y(iy), start, goal, cfg, &frac) ==
              Zone::Challenge)
            max_abs = std::max(max_abs,
                               std::abs(f.heights[f.idx(ix, iy)] - mean));
        }
      double scale = max_abs > 0.0 ? amp / max_abs : 0.0;
      for (double& h : f.heights) h = (h - mean) * scale;
      break;
    }
    case Family::Pillar: {
      double n_real = difficulty_map(d, {"pillar_count", cfg.pillar.n_min, cfg.pillar.n_max});
      int n_obs = static_cast<int>(std::lround(n_real));
      f.realized_param = n_obs;
      double r = cfg.pillar.radius;
      double lo = start.x + cfg.start_safety_radius + cfg.transition_band + r;
      double hi = goal.x - cfg.goal_radius - cfg.transition_band - r;
      // draw the maximum count so obstacle sets are nested across d
      Rng rng(hash_mix(seed, 17));
      int n_max = static_cast<int>(std::lround(cfg.pillar.n_max));
      std::vector<Vec2> centers;
      for (int i = 0; i < n_max; ++i)
        centers.push_back({rng.uniform(lo, hi), rng.uniform(r, cfg.width_m - r)});
      for (int i = 0; i < n_obs && i < n_max; ++i)
        for (int ix = 0; ix < f.nx; ++ix)
          for (int iy = 0; iy < f.ny; ++iy)
            if (dist2d(f.cell_x(ix), f.cell_y(iy), centers[i].x, centers[i].y) <= r)
              f.heights[f.idx(ix, iy)] = cfg.pillar.height;
      break;
    }
    case Family::Stair: {
      double hs = difficulty_map(d, {"stair_height", cfg.stair.h_min, cfg.stair.h_max});
      f.realized_param = hs;
      double x0 = start.x + cfg.start_safety_radius + cfg.transition_band;
      double x1 = goal.x - cfg.goal_radius - cfg.transition_band;
      int n_steps = static_cast<int>(std::floor((x1 - x0) / cfg.stair.run));
      if (n_steps < 2) throw std::runtime_error("terrain too short for stairs");
      for (int ix = 0; ix < f.nx; ++ix) {
        double x = f.cell_x(ix);
        int k = static_cast<int>(std::floor((x - x0) / cfg.stair.run));
        k = std::clamp(k, 0, n_steps - 1);
        int pyramid = std::min(k, n_steps - 1 - k);  // up then down
        double h = hs * pyramid;
        for (int iy = 0; iy < f.ny; ++iy) f.heights[f.idx(ix, iy)] = h;
      }
      break;
    }
    case Family::Gap: {
      double width = 0.0;
      auto gaps = layout_gaps(d, seed, cfg, &width);
      f.realized_param = width;
      for (const GapSpec& g : gaps)
        for (int ix = 0; ix < f.nx; ++ix) {
          double x = f.cell_x(ix);
          if (std::abs(x - g.center) <= g.width * 0.5)
            for (int iy = 0; iy < f.ny; ++iy) f.support_mask[f.idx(ix, iy)] = 0;
        }
      break;
    }
    case Family::Tilt: {
      double theta = difficulty_map(d, {"tilt_angle", cfg.tilt.theta_min, cfg.tilt.theta_max});
      f.realized_param = theta;
      double t = std::tan(theta);
      for (int iy = 0; iy < f.ny; ++iy) {
        double h = (f.cell_y(iy) - cfg.width_m * 0.5) * t;
        for (int ix = 0; ix < f.nx; ++ix) f.heights[f.idx(ix, iy)] = h;
      }
      break;
    }
  }

  f = apply_zones(std::move(f), start, goal, cfg);

  // gaps are restricted to the challenge region; zoning restored the mask
  // elsewhere already, nothing further to do
  return f;
}

TerrainTile sample_tile(const TerrainConfig& cfg, int level, Family family,
                        uint64_t seed) {
  if (cfg.l_max < 2) throw std::domain_error("l_max must be >= 2");
  if (level < 0 || level >= cfg.l_max)
    throw std::domain_error("curriculum level out of range");
  TerrainTile tile;
  tile.family = family;
  tile.level = level;
  tile.difficulty_d = static_cast<double>(level) / (cfg.l_max - 1);
  tile.seed = seed;
  tile.start_pos = cfg.start_pos();
  tile.goal_pos = cfg.goal_pos();
  uint64_t tile_seed =
      hash_mix(seed, static_cast<uint64_t>(level), static_cast<uint64_t>(family));
  tile.field = generate_heightfield(family, tile.difficulty_d, tile_seed, cfg);
  return tile;
}

namespace {

// clamped bilinear weights over cell centers
struct BilinearCell {
  int ix0, iy0, ix1, iy1;
  double wx, wy;
};

BilinearCell locate(const HeightField& f, double x, double y) {
  if (!f.in_extent(x, y)) throw std::domain_error("terrain query out of extent");
  double u = x / f.cell_size - 0.5;
  double v = y / f.cell_size - 0.5;
  int ix0 = static_cast<int>(std::floor(u));
  int iy0 = static_cast<int>(std::floor(v));
  double wx = u - ix0;
  double wy = v - iy0;
  if (ix0 < 0) { ix0 = 0; wx = 0.0; }
  if (iy0 < 0) { iy0 = 0; wy = 0.0; }
  if (ix0 > f.nx - 2) { ix0 = f.nx - 2; wx = 1.0; }
  if (iy0 > f.ny - 2) { iy0 = f.ny - 2; wy = 1.0; }
  return {ix0, iy0, ix0 + 1, iy0 + 1, wx, wy};
}

}  // namespace

double query_height(const HeightField& f, double x, double y) {
  BilinearCell c = locate(f, x, y);
  double a = f.h(c.ix0, c.iy0) * (1 - c.wx) + f.h(c.ix1, c.iy0) * c.wx;
  double b = f.h(c.ix0, c.iy1) * (1 - c.wx) + f.h(c.ix1, c.iy1) * c.wx;
  return a * (1 - c.wy) + b * c.wy;
}

bool is_supported(const HeightField& f, double x, double y) {
  BilinearCell c = locate(f, x, y);
  return f.supported(c.ix0, c.iy0) && f.supported(c.ix1, c.iy0) &&
         f.supported(c.ix0, c.iy1) && f.supported(c.ix1, c.iy1);
}

double nearest_cell_height(const HeightField& f, double x, double y) {
  if (!f.in_extent(x, y)) throw std::domain_error("terrain query out of extent");
  int ix = std::clamp(static_cast<int>(x / f.cell_size), 0, f.nx - 1);
  int iy = std::clamp(static_cast<int>(y / f.cell_size), 0, f.ny - 1);
  return f.h(ix, iy);
}

void save_heightfield(const HeightField& f, const std::string& path,
                      Family family, int level, uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  std::vector<float> buf(f.heights.size());
  for (size_t i = 0; i < buf.size(); ++i)
    buf[i] = static_cast<float>(f.heights[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(f.support_mask.data()),
            static_cast<std::streamsize>(f.support_mask.size()));
  out.close();

  nlohmann::json meta;
  meta["nx"] = f.nx;
  meta["ny"] = f.ny;
  meta["length_m"] = f.length_m;
  meta["width_m"] = f.width_m;
  meta["cell_size"] = f.cell_size;
  meta["family"] = family_name(family);
  meta["level"] = level;
  meta["seed"] = seed;
  meta["realized_param"] = f.realized_param;
  std::ofstream js(path + ".json");
  js << meta.dump(2) << "\n";
}

HeightField load_heightfield(const std::string& path) {
  std::ifstream js(path + ".json");
  if (!js) throw std::runtime_error("missing sidecar " + path + ".json");
  nlohmann::json meta = nlohmann::json::parse(js);
  HeightField f;
  f.nx = meta.at("nx").get<int>();
  f.ny = meta.at("ny").get<int>();
  f.length_m = meta.at("length_m").get<double>();
  f.width_m = meta.at("width_m").get<double>();
  f.cell_size = meta.at("cell_size").get<double>();
  f.realized_param = meta.at("realized_param").get<double>();
  size_t n = static_cast<size_t>(f.nx) * f.ny;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<float> buf(n);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  f.heights.resize(n);
  for (size_t i = 0; i < n; ++i) f.heights[i] = buf[i];
  f.support_mask.resize(n);
  in.read(reinterpret_cast<char*>(f.support_mask.data()),
          static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("truncated height-field file " + path);
  f.zone_labels.assign(n, Zone::Challenge);
  return f;
}

void save_heightfield_pgm(const HeightField& f, const std::string& path) {
  double lo = *std::min_element(f.heights.begin(), f.heights.end());
  double hi = *std::max_element(f.heights.begin(), f.heights.end());
  double span = hi - lo > 1e-12 ? hi - lo : 1.0;
  std::ofstream out(path, std::ios::binary);
  out << "P5\n" << f.nx << " " << f.ny << "\n255\n";
  for (int iy = f.ny - 1; iy >= 0; --iy)
    for (int ix = 0; ix < f.nx; ++ix) {
      unsigned char v = f.supported(ix, iy)
          ? static_cast<unsigned char>(255.0 * (f.h(ix, iy) - lo) / span)
          : 0;
      out.put(static_cast<char>(v));
    }
}

}  // namespace quadnav
