#include "pmiflow/correction_config.hpp"

#include <cmath>
#include <string>

#include "pmiflow/errors.hpp"

namespace pmiflow {

void CorrectionConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be positive");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("epsilon must be non-negative");
  }
  if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("w must lie in [0, 1]");
  if (!(ema_alpha > 0.0 && ema_alpha <= 1.0)) {
    throw InvalidArgument("ema_alpha must lie in (0, 1]");
  }
  if (!(grad_tol > 0.0)) throw InvalidArgument("grad_tol must be positive");
  if (!(projection_tol > 0.0)) throw InvalidArgument("projection_tol must be positive");
}

std::string_view to_string(NormChoice v) {
  switch (v) {
    case NormChoice::none: return "none";
    case NormChoice::l1: return "l1";
    case NormChoice::l2: return "l2";
  }
  return "?";
}

std::string_view to_string(AveragingScheme v) {
  return v == AveragingScheme::integral ? "integral" : "ema";
}

std::string_view to_string(AverageSource v) {
  return v == AverageSource::raw ? "raw" : "corrected";
}

std::string_view to_string(InterpMode v) {
  return v == InterpMode::projection ? "projection" : "direct";
}

NormChoice parse_norm_choice(std::string_view s) {
  if (s == "none") return NormChoice::none;
  if (s == "l1" || s == "L1") return NormChoice::l1;
  if (s == "l2" || s == "L2") return NormChoice::l2;
  throw InvalidArgument("unknown norm choice '" + std::string(s) + "'");
}

AveragingScheme parse_averaging_scheme(std::string_view s) {
  if (s == "integral") return AveragingScheme::integral;
  if (s == "ema") return AveragingScheme::ema;
  throw InvalidArgument("unknown averaging scheme '" + std::string(s) + "'");
}

AverageSource parse_average_source(std::string_view s) {
  if (s == "raw") return AverageSource::raw;
  if (s == "corrected") return AverageSource::corrected;
  throw InvalidArgument("unknown average source '" + std::string(s) + "'");
}

InterpMode parse_interp_mode(std::string_view s) {
  if (s == "projection") return InterpMode::projection;
  if (s == "direct") return InterpMode::direct;
  throw InvalidArgument("unknown interpolation mode '" + std::string(s) + "'");
}

}  // namespace pmiflow
