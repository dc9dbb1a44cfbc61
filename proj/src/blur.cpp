#include "dupkit/blur.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dupkit {

namespace {

// Mirror an out-of-range index back into [0, n) without repeating the edge.
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

// Segment masks a..g for digits 0..9.
constexpr std::array<unsigned, 10> kSegments = {0x3f, 0x06, 0x5b, 0x4f, 0x66, 0x6d, 0x7d, 0x07, 0x7f, 0x6f};

void draw_segments(Image& img, unsigned mask, int top, int left, double intensity) {
  const int w = 5;  // glyph width
  const int h = 9;  // glyph height
  const int mid = top + h / 2;
  auto hline = [&](int r) {
    for (int c = left; c < left + w; ++c)
      if (r >= 0 && r < img.height && c >= 0 && c < img.width) img.at(r, c) = intensity;
  };
  auto vline = [&](int c, int r0, int r1) {
    for (int r = r0; r <= r1; ++r)
      if (r >= 0 && r < img.height && c >= 0 && c < img.width) img.at(r, c) = intensity;
  };
  if (mask & 0x01) hline(top);
  if (mask & 0x02) vline(left + w - 1, top, mid);
  if (mask & 0x04) vline(left + w - 1, mid, top + h - 1);
  if (mask & 0x08) hline(top + h - 1);
  if (mask & 0x10) vline(left, mid, top + h - 1);
  if (mask & 0x20) vline(left, top, mid);
  if (mask & 0x40) hline(mid);
}

}  // namespace

std::vector<double> blur_kernel(int level) {
  if (level < 0 || level > kMaxBlurLevel) throw std::invalid_argument("blur level must be in 0..3");
  if (level == 0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * std::sqrt(static_cast<double>(level))));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / level);
    kernel[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : kernel) v /= total;
  return kernel;
}

Image blur_image(const Image& img, int level) {
  if (img.empty() || img.height < 1 || img.width < 1) throw std::invalid_argument("empty image");
  const std::vector<double> kernel = blur_kernel(level);
  if (level == 0) return img;
  const int radius = static_cast<int>(kernel.size() / 2);

  Image rows(img.height, img.width);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t)
        acc += kernel[static_cast<std::size_t>(t + radius)] * img.at(r, reflect_index(c + t, img.width));
      rows.at(r, c) = acc;
    }
  Image out(img.height, img.width);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t)
        acc += kernel[static_cast<std::size_t>(t + radius)] * rows.at(reflect_index(r + t, img.height), c);
      out.at(r, c) = acc;
    }
  return out;
}

GradeHistogram label_noise_dist(int true_label, int level, int k, Rng& rng) {
  if (k < 5) throw std::invalid_argument("need at least 5 classes to pick four wrong labels");
  if (true_label < 0 || true_label >= k) throw std::out_of_range("unknown grade");
  if (level < 0 || level > kMaxBlurLevel) throw std::invalid_argument("blur level must be in 0..3");
  std::vector<double> mass(static_cast<std::size_t>(k), 0.0);
  if (level == 0) {
    mass[static_cast<std::size_t>(true_label)] = 1.0;
    return GradeHistogram(std::move(mass));
  }
  std::vector<int> wrong;
  for (int c = 0; c < k; ++c)
    if (c != true_label) wrong.push_back(c);
  // Partial Fisher-Yates: the first four entries are a uniform 4-subset.
  for (std::size_t i = 0; i < 4; ++i) std::swap(wrong[i], wrong[i + rng.index(wrong.size() - i)]);
  const double per_wrong = kNoiseMassPerWrongLabel[static_cast<std::size_t>(level)];
  for (std::size_t i = 0; i < 4; ++i) mass[static_cast<std::size_t>(wrong[i])] = per_wrong;
  mass[static_cast<std::size_t>(true_label)] = 1.0 - 4.0 * per_wrong;
  return GradeHistogram(std::move(mass));
}

GradeHistogram label_noise_dist(int true_label, int level, int k, std::uint64_t seed) {
  Rng rng(seed);
  return label_noise_dist(true_label, level, k, rng);
}

void BlurWorld::validate() const {
  if (height < 1 || width < 1) throw std::invalid_argument("image size must be positive");
  if (class_count < 5 || class_count > 10) throw std::invalid_argument("glyph world supports 5..10 classes");
  if (labels_per_image < 1) throw std::invalid_argument("need at least one label per image");
  if (texture_noise < 0.0 || sensor_noise < 0.0) throw std::invalid_argument("noise levels must be nonnegative");
}

Image render_glyph(int label, const BlurWorld& world, Rng& rng) {
  if (label < 0 || label >= world.class_count) throw std::out_of_range("unknown glyph class");
  Image img(world.height, world.width);
  const int top = (world.height - 9) / 2 + static_cast<int>(rng.index(3)) - 1;
  const int left = (world.width - 5) / 2 + static_cast<int>(rng.index(3)) - 1;
  draw_segments(img, kSegments[static_cast<std::size_t>(label)], top, left, rng.uniform(0.6, 1.0));
  for (double& p : img.pixels) p += rng.normal(0.0, world.texture_noise);
  return img;
}

std::vector<BlurSample> gen_blur_samples(int n_images, const BlurWorld& world, std::uint64_t seed) {
  if (n_images < 1) throw std::invalid_argument("need at least one image");
  world.validate();
  const GradeScale scale = GradeScale::ordinal(static_cast<std::size_t>(world.class_count));
  // Any disagreement among the drawn labels counts as high uncertainty.
  const TargetThresholds thresholds{0.0, kVarianceThreshold};

  std::vector<BlurSample> samples;
  samples.reserve(static_cast<std::size_t>(n_images));
  for (int i = 0; i < n_images; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    BlurSample sample;
    sample.true_label = static_cast<int>(rng.index(static_cast<std::size_t>(world.class_count)));
    sample.level = static_cast<int>(rng.index(kMaxBlurLevel + 1));
    Image img = blur_image(render_glyph(sample.true_label, world, rng), sample.level);
    for (double& p : img.pixels) p += rng.normal(0.0, world.sensor_noise);
    const GradeHistogram noise = label_noise_dist(sample.true_label, sample.level, world.class_count, rng);
    std::vector<int> labels = draw_labels(noise, world.labels_per_image, rng);
    sample.instance = make_instance(std::move(img.pixels), "b" + std::to_string(i), std::move(labels), scale, thresholds);
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::vector<LabeledInstance> gen_blur_dataset(int n_images, const BlurWorld& world, std::uint64_t seed) {
  std::vector<LabeledInstance> instances;
  for (auto& sample : gen_blur_samples(n_images, world, seed)) instances.push_back(std::move(sample.instance));
  return instances;
}

}  // namespace dupkit
