#pragma once
// Gradient fine-tuning of the boundary tensors at the target temperature.
//
// gradient() returns the exact derivative of the per-site free energy with
// respect to every entry of A and B (environment route: A enters each of the
// K layers once and the channel is linear in A, so
//   d ln Tr M^K / dA = K * contraction of M^(K-1) with dM/dA,
// with M^(K-1) from the same scaled binary exponentiation). The default loop
// direction runs the step that raises log_lambda (lowering f toward the
// dominant-eigenvalue value); the sign is configurable.

#include <functional>

#include "tnt/tailoring.hpp"

namespace tnt {

struct FineTuneConfig {
  double eta = 0.5;
  int max_steps = 200;
  double f_tol = 1e-13;
  enum class GradMode { analytic, finite_difference_debug };
  GradMode grad_mode = GradMode::analytic;
  enum class StepMode { raw, gradient_normalized };
  StepMode step_mode = StepMode::gradient_normalized;
  bool ascend_lambda = true;   // step direction raises log_lambda
  bool alternate = false;      // update A and B on alternating steps
  double fd_step = 1e-6;       // finite_difference_debug only
};

struct FineTuneStep {
  int step = 0;
  double f = 0.0;
  double grad_max = 0.0;
  double seconds = 0.0;
};

struct FineTuneTrace {
  std::vector<FineTuneStep> steps;
  enum class Status { converged, max_steps_reached, stalled };
  Status status = Status::max_steps_reached;
  double f_initial = 0.0;
  double f_final = 0.0;
};

struct Gradient {
  DenseTensor dA, dB;  // shapes of A and B tensors
  double f = 0.0;      // free energy at the evaluation point
};

Gradient gradient(const TailoredEnsemble& e,
                  FineTuneConfig::GradMode mode = FineTuneConfig::GradMode::analytic,
                  double fd_step = 1e-6);

// A <- A + eta * dA (raw) or the max-norm-normalized, 1/K-scaled step
// (gradient_normalized); the caller bakes the direction sign into (dA, dB).
TailoredEnsemble gd_step(const TailoredEnsemble& e, const DenseTensor& dA,
                         const DenseTensor& dB, const FineTuneConfig& config);

std::pair<TailoredEnsemble, FineTuneTrace> finetune_loop(const TailoredEnsemble& e,
                                                         const FineTuneConfig& config);

}  // namespace tnt
