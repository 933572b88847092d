#pragma once

#include <array>
#include <string>
#include <vector>

namespace quadnav {

inline constexpr int kActionDim = 13;      // 12 continuous channels + gait channel
inline constexpr int kContinuousDim = 12;
inline constexpr int kCommandDim = 15;     // 12 continuous + 3-dim gait embedding
inline constexpr int kNumGaits = 4;

enum Gait : int { kTrot = 0, kPronk = 1, kPace = 2, kBound = 3 };

std::string gait_name(int g);

// Continuous-channel indices of the default roster. The roster itself lives in
// configuration; these constants name the channels the executor consumes.
enum CommandChannel : int {
  kChVx = 0,
  kChVy = 1,
  kChOmegaZ = 2,
  kChBodyHeight = 3,
  kChGaitFreq = 4,
  kChSwingHeight = 5,
};

struct ChannelBound {
  std::string name;
  double lo = -1.0;
  double hi = 1.0;
};

struct CommandBounds {
  std::vector<ChannelBound> channels;  // size kContinuousDim

  static CommandBounds defaults();
  void validate() const;  // throws std::runtime_error on lo > hi or bad size
};

struct HighLevelAction {
  std::array<double, kActionDim> values{};
};

struct CommandVector {
  std::array<double, kContinuousDim> continuous{};
  std::array<double, 3> gait_embedding{};
  int gait_index = 0;

  // flat 15-dim view used by smoothness terms and logging
  std::array<double, kCommandDim> flat() const;
};

// x = clip(a, -a_max, a_max) / a_max. Throws std::invalid_argument on
// non-finite input or a_max <= 0.
std::array<double, kActionDim> clip_normalize(const HighLevelAction& a, double a_max);

// c_j = lo_j + (x_j + 1)/2 (hi_j - lo_j)
std::array<double, kContinuousDim> decode_continuous(
    const std::array<double, kContinuousDim>& x, const CommandBounds& bounds);

// g = clip(floor(2 (x_g + 1)), 0, 3)
int quantize_gait(double x_g);

// fixed per-gait phase-offset template; injective over the four gaits
std::array<double, 3> gait_embedding(int g);

CommandVector decode(const HighLevelAction& a, const CommandBounds& bounds,
                     double a_max);

}  // namespace quadnav
