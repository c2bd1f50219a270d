#pragma once

#include <string_view>

namespace pmiflow {

/// Which p-norm anchors the corrected velocity to the previous one.
enum class NormChoice { none, l1, l2 };

enum class AveragingScheme { integral, ema };

/// Whether running averages and the previous-velocity anchor track the raw
/// solver velocity or the corrected one.
enum class AverageSource { raw, corrected };

/// mimic-CFG target: projection onto the running average, or the average itself.
enum class InterpMode { projection, direct };

/// Hyperparameters shared by the proximal-mean and mimic-CFG corrections.
struct CorrectionConfig {
  double lambda = 10.0;
  double epsilon = 2.0;
  double w = 0.94;
  NormChoice norm_choice = NormChoice::l1;
  AveragingScheme averaging = AveragingScheme::integral;
  double ema_alpha = 0.9;
  double grad_tol = 1e-12;
  AverageSource average_source = AverageSource::corrected;
  InterpMode interp_mode = InterpMode::projection;
  double projection_tol = 1e-12;

  /// Throws InvalidArgument naming the first offending field.
  void validate() const;
};

std::string_view to_string(NormChoice v);
std::string_view to_string(AveragingScheme v);
std::string_view to_string(AverageSource v);
std::string_view to_string(InterpMode v);

NormChoice parse_norm_choice(std::string_view s);
AveragingScheme parse_averaging_scheme(std::string_view s);
AverageSource parse_average_source(std::string_view s);
InterpMode parse_interp_mode(std::string_view s);

}  // namespace pmiflow
