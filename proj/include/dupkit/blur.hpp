// Image-blur label-noise world: procedural glyphs, Gaussian blur, and
// blur-dependent label noise.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dupkit/random.hpp"
#include "dupkit/uncertainty.hpp"
#include "dupkit/worlds.hpp"

namespace dupkit {

/// Row-major grayscale image.
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int h, int w, double fill = 0.0) : height(h), width(w), pixels(static_cast<std::size_t>(h * w), fill) {}

  double& at(int r, int c) { return pixels[static_cast<std::size_t>(r * width + c)]; }
  double at(int r, int c) const { return pixels[static_cast<std::size_t>(r * width + c)]; }
  bool empty() const { return pixels.empty(); }
};

inline constexpr int kMaxBlurLevel = 3;

/// Normalized 1-D discrete Gaussian of variance `level`, radius ceil(3 sqrt(level)).
std::vector<double> blur_kernel(int level);

/// Separable Gaussian blur with reflect padding; level 0 is the identity.
Image blur_image(const Image& img, int level);

/// Per-level mass placed on each of the four incorrect labels.
inline constexpr std::array<double, kMaxBlurLevel + 1> kNoiseMassPerWrongLabel = {0.0, 0.02, 0.08, 0.12};

/// Label distribution for an image of class `true_label` blurred at `level`.
/// Four distinct wrong labels are chosen uniformly at random from `rng`.
GradeHistogram label_noise_dist(int true_label, int level, int k, Rng& rng);
GradeHistogram label_noise_dist(int true_label, int level, int k, std::uint64_t seed);

struct BlurWorld {
  int height = 12;
  int width = 12;
  int class_count = 10;
  int labels_per_image = 3;
  /// Pixel noise added to the glyph before blurring.
  double texture_noise = 0.3;
  /// Pixel noise added after blurring.
  double sensor_noise = 0.05;

  void validate() const;
};

/// Seven-segment style glyph for `label` with random offset, stroke
/// intensity and texture noise.
Image render_glyph(int label, const BlurWorld& world, Rng& rng);

struct BlurSample {
  LabeledInstance instance;
  int true_label = 0;
  int level = 0;
};

std::vector<BlurSample> gen_blur_samples(int n_images, const BlurWorld& world, std::uint64_t seed);

/// Instances only; target_disagree is 1 iff the drawn labels are not all equal.
std::vector<LabeledInstance> gen_blur_dataset(int n_images, const BlurWorld& world, std::uint64_t seed);

}  // namespace dupkit
