#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hjbd {

// Row-major grayscale image with real intensities. The nominal range is
// [0, 255], but values are only clamped when written to disk.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, double fill = 0.0);
  Image(std::size_t w, std::size_t h, std::vector<double> values);

  std::size_t size() const { return pixels.size(); }
  double& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
  double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
  bool same_shape(const Image& other) const {
    return width == other.width && height == other.height;
  }
  bool operator==(const Image&) const = default;
};

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

// lambda times the sum of |y_i - y_j| over 4-neighbour edges, each edge counted once.
double tv_eval(const Image& img, double lambda);

struct RofOptions {
  double tol = 1e-12;
  int max_iter = 10000;
  bool record_objective = false;
};

struct RofResult {
  Image image;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;      // relative change of the last iterate
  double duality_gap = 0.0;   // primal minus dual objective at exit
  std::vector<double> objective_trace;  // objective of the returned (best so far) iterate
};

// (1/2t)||x - y||^2 + lambda TV(y).
double rof_objective(const Image& x, const Image& y, double t, double lambda);

// Minimizes rof_objective over y by restarted accelerated projected gradient on the
// edge-indexed dual variables. tol bounds the relative change of successive iterates.
RofResult rof_map(const Image& x, double t, double lambda, const RofOptions& options = {});

Image add_gaussian_noise(const Image& img, const NoiseSpec& spec);

// Fraction of 4-neighbour edges whose endpoint values differ by at most tol.
double plateau_fraction(const Image& img, double tol = 1e-6);

// Peak signal-to-noise ratio for peak 255; +infinity for identical images.
double psnr(const Image& a, const Image& b);

// The exact pixel values write_pgm stores: rounded to nearest, clamped to [0, 255].
Image quantize(const Image& img);

Image read_pgm(const std::filesystem::path& path);
void write_pgm(const Image& img, const std::filesystem::path& path);

// Deterministic piecewise-smooth test scene (flat regions, edges, a ramp, a texture band).
Image make_test_pattern(std::size_t width, std::size_t height);

}  // namespace hjbd
