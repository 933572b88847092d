#include "quadnav/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace quadnav {

std::string gait_name(int g) {
  switch (g) {
    case kTrot: return "trot";
    case kPronk: return "pronk";
    case kPace: return "pace";
    case kBound: return "bound";
  }
  throw std::domain_error("gait index out of range");
}

CommandBounds CommandBounds::defaults() {
  CommandBounds b;
  b.channels = {
      {"v_x", -1.0, 1.0},           {"v_y", -0.6, 0.6},
      {"omega_z", -1.5, 1.5},       {"body_height", 0.22, 0.34},
      {"gait_freq", 1.5, 4.0},      {"swing_height", 0.03, 0.15},
      {"body_pitch", -0.3, 0.3},    {"body_roll", -0.2, 0.2},
      {"stance_width", 0.15, 0.35}, {"stance_length", 0.30, 0.50},
      {"reserve_a", -1.0, 1.0},     {"reserve_b", -1.0, 1.0},
  };
  return b;
}

void CommandBounds::validate() const {
  if (channels.size() != kContinuousDim)
    throw std::runtime_error("CommandBounds must have exactly 12 channels");
  for (const ChannelBound& c : channels)
    if (c.lo > c.hi)
      throw std::runtime_error("channel bound lo > hi: " + c.name);
}

std::array<double, kCommandDim> CommandVector::flat() const {
  std::array<double, kCommandDim> out{};
  for (int j = 0; j < kContinuousDim; ++j) out[j] = continuous[j];
  for (int j = 0; j < 3; ++j) out[kContinuousDim + j] = gait_embedding[j];
  return out;
}

std::array<double, kActionDim> clip_normalize(const HighLevelAction& a, double a_max) {
  if (!(a_max > 0.0)) throw std::invalid_argument("a_max must be positive");
  std::array<double, kActionDim> x{};
  for (int j = 0; j < kActionDim; ++j) {
    if (!std::isfinite(a.values[j]))
      throw std::invalid_argument("non-finite high-level action");
    x[j] = std::clamp(a.values[j], -a_max, a_max) / a_max;
  }
  return x;
}

std::array<double, kContinuousDim> decode_continuous(
    const std::array<double, kContinuousDim>& x, const CommandBounds& bounds) {
  bounds.validate();
  std::array<double, kContinuousDim> c{};
  for (int j = 0; j < kContinuousDim; ++j) {
    const ChannelBound& b = bounds.channels[j];
    c[j] = b.lo + (x[j] + 1.0) * 0.5 * (b.hi - b.lo);
  }
  return c;
}

int quantize_gait(double x_g) {
  int g = static_cast<int>(std::floor(2.0 * (x_g + 1.0)));
  return std::clamp(g, 0, kNumGaits - 1);
}

std::array<double, 3> gait_embedding(int g) {
  // per-pair phase offsets (diagonal, lateral, front/rear)
  switch (g) {
    case kTrot: return {0.5, 0.0, 0.0};
    case kPronk: return {0.0, 0.0, 0.0};
    case kPace: return {0.0, 0.5, 0.0};
    case kBound: return {0.0, 0.0, 0.5};
  }
  throw std::domain_error("gait index out of range");
}

CommandVector decode(const HighLevelAction& a, const CommandBounds& bounds,
                     double a_max) {
  std::array<double, kActionDim> x = clip_normalize(a, a_max);
  CommandVector cmd;
  std::array<double, kContinuousDim> xc{};
  std::copy_n(x.begin(), kContinuousDim, xc.begin());
  cmd.continuous = decode_continuous(xc, bounds);
  cmd.gait_index = quantize_gait(x[kActionDim - 1]);
  cmd.gait_embedding = gait_embedding(cmd.gait_index);
  return cmd;
}

}  // namespace quadnav
