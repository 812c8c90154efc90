#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "originet/config.hpp"

namespace originet {

struct GradcheckCase {
  std::string name;
  double discrepancy = 0.0;  // max |a - n| / max(1, |a|, |n|)
  double tolerance = 0.0;
  bool passed() const { return discrepancy < tolerance; }
};

enum class GradcheckScope { Activation, Layer, Model };

GradcheckScope parse_gradcheck_scope(const std::string& name);

/// The 16x16, depths [4, 8], fc 8, three-class network used for full-model checks.
ModelConfig tiny_model_config();

/// Activation scope: every kind at 1000 points in [-20, 20] away from its
/// branch point, tolerance 1e-7. Layer scope: conv (stride 1 and 2, 3x3 and
/// 5x5), train-mode batch norm, linear and softmax + cross-entropy on small
/// random tensors, tolerance 1e-6. Model scope: every parameter of the tiny
/// network on a batch of two, tolerance 1e-4.
/// `plant_fault` doubles the analytic gradient of the first case, which the
/// check must then reject.
std::vector<GradcheckCase> run_gradcheck_suite(GradcheckScope scope, std::uint64_t seed,
                                               bool plant_fault = false);

}  // namespace originet
