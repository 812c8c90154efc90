#pragma once

#include <cstddef>
#include <string>

#include "originet/tensor.hpp"

namespace originet {

struct AugmentationTag {
  double angle = 0.0;
  bool equalized = false;

  bool operator==(const AugmentationTag&) const = default;
};

/// One network input: a normalized active image scaled to [0, 1], shape
/// [C, H, W].
struct Sample {
  Tensor image;
  std::size_t label = 0;
  std::string subject_id;
  std::string video_id;
  AugmentationTag tag;
};

}  // namespace originet
