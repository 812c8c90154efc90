#pragma once

#include <array>
#include <vector>

#include "originet/config.hpp"
#include "originet/image.hpp"
#include "originet/sample.hpp"

namespace originet {

/// Rotation angles applied to each training image, in degrees.
inline constexpr std::array<double, 7> kAugmentAngles{-45.0, -30.0, -15.0, 0.0, 15.0, 30.0, 45.0};

/// Maps gray levels through round(255 * CDF). Input values are taken on the
/// 0..255 scale and quantized to the nearest level. Single channel only.
Image histogram_equalization(const Image& img);

/// Rotates counter-clockwise (as displayed) about the image center with
/// bilinear sampling. Pixels whose source falls outside the frame become 0.
/// Angle must lie in [-45, 45].
Image rotate(const Image& img, double angle_degrees);

/// Rotations x enhancement states of one sample. Product mode yields 14
/// samples ordered angle-major, raw before equalized; Single yields the 7
/// equalized rotations; None returns the sample unchanged.
std::vector<Sample> augment(const Sample& sample, AugmentMode mode = AugmentMode::Product);

Image image_from_tensor(const Tensor& chw);
Tensor tensor_from_image(const Image& img);

}  // namespace originet
