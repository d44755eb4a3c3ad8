#include "sbcm/core.hpp"

#include <cmath>

namespace sbcm {

void ModelParams::validate() const {
  if (!std::isfinite(gamma) || gamma < 0.0)
    throw ValidationError("gamma must be finite and nonnegative, got " + std::to_string(gamma));
  if (!std::isfinite(delta) || delta < 0.0)
    throw ValidationError("delta must be finite and nonnegative, got " + std::to_string(delta));
}

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::marginal: return "marginal";
  }
  return "unknown";
}

Stability stability_from_string(std::string_view s) {
  if (s == "stable") return Stability::stable;
  if (s == "unstable") return Stability::unstable;
  if (s == "marginal") return Stability::marginal;
  throw ValidationError("unknown classification '" + std::string(s) + "'");
}

}  // namespace sbcm
