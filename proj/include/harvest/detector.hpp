#pragma once

#include <array>
#include <cmath>
#include <string>

#include "harvest/errors.hpp"
#include "harvest/qcore.hpp"

namespace harvest {

enum class DetectorLabel { A, B };

inline const char* to_string(DetectorLabel l) { return l == DetectorLabel::A ? "A" : "B"; }

/// A static two-level detector with Gaussian switching
///   chi(t) = exp(-(t - t0)^2 / T^2)
/// and a normalized Gaussian smearing
///   F(x) = (pi sigma^2)^{-d/2} exp(-|x - x0|^2 / sigma^2).
/// Proper time equals coordinate time along the static worldline.
struct DetectorConfig {
  DetectorLabel label = DetectorLabel::A;
  double gap = 1.0;       // Omega, may be negative
  double coupling = 0.0;  // lambda
  std::array<double, 3> position{0.0, 0.0, 0.0};
  double smearing_width = 0.0;  // sigma, 0 = pointlike
  double switching_width = 1.0; // T
  double switching_center = 0.0;
  InitialStateSpec initial{};

  void validate() const {
    if (!(switching_width > 0.0))
      throw ValidationError(std::string("detector ") + to_string(label) + ": switching width T must be > 0");
    if (!(smearing_width >= 0.0))
      throw ValidationError(std::string("detector ") + to_string(label) + ": smearing width must be >= 0");
    if (!(coupling >= 0.0))
      throw ValidationError(std::string("detector ") + to_string(label) + ": coupling must be >= 0");
    for (double x : position)
      if (!std::isfinite(x)) throw ValidationError("detector position must be finite");
    if (!std::isfinite(gap) || !std::isfinite(switching_center))
      throw ValidationError("detector gap and switching centre must be finite");
  }

  /// Variance of each Cartesian coordinate under the smearing profile.
  double position_variance() const { return 0.5 * smearing_width * smearing_width; }
  /// Variance of the switching profile read as a Gaussian weight.
  double time_variance() const { return 0.5 * switching_width * switching_width; }
};

inline double distance(const DetectorConfig& a, const DetectorConfig& b) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) s += (a.position[c] - b.position[c]) * (a.position[c] - b.position[c]);
  return std::sqrt(s);
}

/// Time function t_v(x) = gamma_v (t - v x), a global boost of the lab
/// frame along the first spatial axis.
struct FrameSpec {
  double v = 0.0;
  std::string label = "lab";

  FrameSpec() = default;
  FrameSpec(double velocity, std::string name = {}) : v(velocity), label(std::move(name)) {
    validate();
    if (label.empty()) label = v == 0.0 ? "lab" : "v=" + std::to_string(v);
  }

  void validate() const {
    if (!(std::abs(v) < 1.0)) throw ValidationError("frame velocity must satisfy |v| < 1");
  }

  bool is_lab() const noexcept { return v == 0.0; }
  bool operator==(const FrameSpec& o) const { return v == o.v; }
};

}  // namespace harvest
