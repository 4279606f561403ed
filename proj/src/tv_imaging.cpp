#include "hjbd/tv_imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "hjbd/error.hpp"
#include "hjbd/random.hpp"

namespace hjbd {

Image::Image(std::size_t w, std::size_t h, double fill) : width(w), height(h), pixels(w * h, fill) {}

Image::Image(std::size_t w, std::size_t h, std::vector<double> values)
    : width(w), height(h), pixels(std::move(values)) {
  if (pixels.size() != w * h) {
    throw InvalidArgument("Image: " + std::to_string(pixels.size()) + " values for a " +
                          std::to_string(w) + "x" + std::to_string(h) + " image");
  }
}

double tv_eval(const Image& img, double lambda) {
  const std::size_t w = img.width;
  const std::size_t h = img.height;
  double s = 0.0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double v = img.at(r, c);
      if (c + 1 < w) s += std::abs(img.at(r, c + 1) - v);
      if (r + 1 < h) s += std::abs(img.at(r + 1, c) - v);
    }
  }
  return lambda * s;
}

double rof_objective(const Image& x, const Image& y, double t, double lambda) {
  double fid = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.pixels[i] - y.pixels[i];
    fid += d * d;
  }
  return fid / (2.0 * t) + tv_eval(y, lambda);
}

namespace {

// Forward differences: gx on horizontal edges (h x (w-1)), gy on vertical edges ((h-1) x w).
void forward_diff(const std::vector<double>& y, std::size_t w, std::size_t h,
                  std::vector<double>& gx, std::vector<double>& gy) {
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c + 1 < w; ++c) gx[r * (w - 1) + c] = y[r * w + c + 1] - y[r * w + c];
  }
  for (std::size_t r = 0; r + 1 < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) gy[r * w + c] = y[(r + 1) * w + c] - y[r * w + c];
  }
}

// Adjoint of forward_diff.
void adjoint_diff(const std::vector<double>& px, const std::vector<double>& py, std::size_t w,
                  std::size_t h, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c + 1 < w; ++c) {
      const double p = px[r * (w - 1) + c];
      out[r * w + c] -= p;
      out[r * w + c + 1] += p;
    }
  }
  for (std::size_t r = 0; r + 1 < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double p = py[r * w + c];
      out[r * w + c] -= p;
      out[(r + 1) * w + c] += p;
    }
  }
}

}  // namespace

RofResult rof_map(const Image& x, double t, double lambda, const RofOptions& options) {
  if (!(t > 0.0)) throw InvalidArgument("rof_map: t must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("rof_map: lambda must be nonnegative");
  const std::size_t w = x.width;
  const std::size_t h = x.height;
  const std::size_t n = x.size();
  RofResult result;
  result.image = x;
  if (n == 0 || lambda == 0.0 || (w < 2 && h < 2)) {
    result.converged = true;
    return result;
  }

  const std::size_t nx = h * (w > 0 ? w - 1 : 0);
  const std::size_t ny = (h > 0 ? h - 1 : 0) * w;
  std::vector<double> y(n), y_prev = x.pixels, div(n);
  std::vector<double> px(nx, 0.0), py(ny, 0.0), qx(nx, 0.0), qy(ny, 0.0), px_old(nx), py_old(ny), gx(nx), gy(ny);

  // FISTA on the dual min_{|p| <= lambda} (t/2)||D^T p||^2 - <p, Dx>, whose gradient is
  // -D y(p) with y(p) = x - t D^T p and Lipschitz constant t ||D||^2 <= 8t. Momentum is
  // reset whenever it points uphill, which gives linear convergence on this problem.
  const double step = 1.0 / (8.0 * t);
  double s = 1.0;
  auto primal = [&](const std::vector<double>& ax, const std::vector<double>& ay, std::vector<double>& out) {
    adjoint_diff(ax, ay, w, h, div);
    for (std::size_t i = 0; i < n; ++i) out[i] = x.pixels[i] - t * div[i];
  };

  Image current(w, h);
  double best_obj = rof_objective(x, x, t, lambda);
  std::vector<double> best = x.pixels;
  int k = 0;
  for (; k < options.max_iter; ++k) {
    primal(qx, qy, y);
    forward_diff(y, w, h, gx, gy);
    px_old = px;
    py_old = py;
    for (std::size_t e = 0; e < nx; ++e) px[e] = std::clamp(qx[e] + step * gx[e], -lambda, lambda);
    for (std::size_t e = 0; e < ny; ++e) py[e] = std::clamp(qy[e] + step * gy[e], -lambda, lambda);

    double uphill = 0.0;
    for (std::size_t e = 0; e < nx; ++e) uphill += (qx[e] - px[e]) * (px[e] - px_old[e]);
    for (std::size_t e = 0; e < ny; ++e) uphill += (qy[e] - py[e]) * (py[e] - py_old[e]);
    if (uphill > 0.0) {
      s = 1.0;
      qx = px;
      qy = py;
    } else {
      const double s_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * s * s));
      const double beta = (s - 1.0) / s_next;
      for (std::size_t e = 0; e < nx; ++e) qx[e] = px[e] + beta * (px[e] - px_old[e]);
      for (std::size_t e = 0; e < ny; ++e) qy[e] = py[e] + beta * (py[e] - py_old[e]);
      s = s_next;
    }

    primal(px, py, current.pixels);
    double change = 0.0, mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = current.pixels[i] - y_prev[i];
      change += d * d;
      mag += current.pixels[i] * current.pixels[i];
    }
    y_prev = current.pixels;
    result.residual = std::sqrt(change) / std::max(1.0, std::sqrt(mag));

    // The dual method is not monotone in the primal objective; keep the best iterate.
    const double obj = rof_objective(x, current, t, lambda);
    if (obj <= best_obj) {
      best_obj = obj;
      best = current.pixels;
    }
    if (options.record_objective) result.objective_trace.push_back(best_obj);
    if (result.residual < options.tol) {
      ++k;
      result.converged = true;
      break;
    }
  }
  result.iterations = k;
  result.image.pixels = std::move(best);

  // Dual objective <p, Dx> - (t/2)||D^T p||^2 for the feasible p.
  forward_diff(x.pixels, w, h, gx, gy);
  adjoint_diff(px, py, w, h, div);
  double dual = 0.0;
  for (std::size_t e = 0; e < nx; ++e) dual += px[e] * gx[e];
  for (std::size_t e = 0; e < ny; ++e) dual += py[e] * gy[e];
  double dsq = 0.0;
  for (double v : div) dsq += v * v;
  dual -= 0.5 * t * dsq;
  result.duality_gap = rof_objective(x, result.image, t, lambda) - dual;
  return result;
}

Image add_gaussian_noise(const Image& img, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw InvalidArgument("add_gaussian_noise: sigma must be nonnegative");
  Image out = img;
  if (spec.sigma == 0.0) return out;
  Rng rng(spec.seed);
  for (double& v : out.pixels) v += spec.sigma * rng.normal();
  return out;
}

double plateau_fraction(const Image& img, double tol) {
  const std::size_t w = img.width;
  const std::size_t h = img.height;
  std::size_t edges = 0, flat = 0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double v = img.at(r, c);
      if (c + 1 < w) {
        ++edges;
        if (std::abs(img.at(r, c + 1) - v) <= tol) ++flat;
      }
      if (r + 1 < h) {
        ++edges;
        if (std::abs(img.at(r + 1, c) - v) <= tol) ++flat;
      }
    }
  }
  if (edges == 0) return 1.0;
  return static_cast<double>(flat) / static_cast<double>(edges);
}

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw InvalidArgument("psnr: images differ in size");
  if (a.size() == 0) throw InvalidArgument("psnr: empty images");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

Image quantize(const Image& img) {
  Image out = img;
  for (double& v : out.pixels) v = std::clamp(std::nearbyint(v), 0.0, 255.0);
  return out;
}

namespace {

// Next header token of a PNM file, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

std::size_t parse_positive(const std::string& tok, const char* field) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (tok.empty() || pos != tok.size() || v == 0) {
    throw InvalidArgument(std::string("read_pgm: malformed header field ") + field + " '" + tok + "'");
  }
  return v;
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("read_pgm: cannot open " + path.string());
  if (next_token(in) != "P5") throw InvalidArgument("read_pgm: not a binary PGM (P5) file: " + path.string());
  const std::size_t w = parse_positive(next_token(in), "width");
  const std::size_t h = parse_positive(next_token(in), "height");
  const std::size_t maxval = parse_positive(next_token(in), "maxval");
  if (maxval != 255) throw InvalidArgument("read_pgm: only maxval 255 is supported");
  // next_token consumed exactly one whitespace byte after maxval.
  std::vector<unsigned char> raw(w * h);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw InvalidArgument("read_pgm: truncated payload in " + path.string());
  }
  Image img(w, h);
  for (std::size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i];
  return img;
}

void write_pgm(const Image& img, const std::filesystem::path& path) {
  if (img.width == 0 || img.height == 0) throw InvalidArgument("write_pgm: empty image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("write_pgm: cannot open " + path.string());
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.size());
  const Image q = quantize(img);
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = static_cast<unsigned char>(q.pixels[i]);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw InvalidArgument("write_pgm: write failed for " + path.string());
}

Image make_test_pattern(std::size_t width, std::size_t height) {
  Image img(width, height);
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double u = (static_cast<double>(c) + 0.5) / w;
      const double v = (static_cast<double>(r) + 0.5) / h;
      double val = 90.0;
      if (u > 0.55 && v < 0.45) val = 170.0;
      if (u < 0.45 && v > 0.6) val = 40.0 + 120.0 * u;  // ramp
      const double du = u - 0.35, dv = v - 0.35;
      if (du * du + dv * dv < 0.04) val = 220.0;
      if (v > 0.8 && u > 0.5) val = 128.0 + 50.0 * std::sin(2.0 * std::numbers::pi * 6.0 * u);
      img.at(r, c) = val;
    }
  }
  return img;
}

}  // namespace hjbd
