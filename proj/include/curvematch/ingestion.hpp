#pragma once

// From raw data to curves: PGM images, Otsu thresholding, 4-connected
// components, Moore boundary tracing, spline fitting of point sequences and
// CSV point lists.

#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "curvematch/errors.hpp"
#include "curvematch/geodesic_bvp.hpp"
#include "curvematch/metric.hpp"
#include "curvematch/splines.hpp"

namespace curvematch {

/// 8-bit grayscale image, row-major, row 0 at the top.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), pixels(w * h, fill) {}

  std::uint8_t& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
  std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
  bool empty() const noexcept { return pixels.empty(); }
};

/// Foreground mask with the same layout as GrayImage (nonzero = foreground).
using BinaryImage = GrayImage;

/// Ordered points in the plane; closed sequences do not repeat the first
/// point at the end.
struct PointSequence {
  Controls points;
  bool closed = true;

  std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
};

// ---------------------------------------------------------------------------
// PGM

namespace detail {

inline std::string pgm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw IoError("truncated PGM header");
  return tok;
}

inline std::size_t pgm_number(std::istream& in, const char* what) {
  const std::string tok = pgm_token(in);
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != tok.size()) throw IoError(std::string("bad PGM ") + what + ": " + tok);
  return v;
}

}  // namespace detail

/// Reads binary (P5) or ASCII (P2) PGM with maxval <= 255.
inline GrayImage read_pgm(std::istream& in) {
  const std::string magic = detail::pgm_token(in);
  if (magic != "P5" && magic != "P2") throw IoError("not a P2/P5 PGM file (magic " + magic + ")");
  const std::size_t w = detail::pgm_number(in, "width");
  const std::size_t h = detail::pgm_number(in, "height");
  const std::size_t maxval = detail::pgm_number(in, "maxval");
  if (w == 0 || h == 0) throw IoError("PGM image has zero size");
  if (maxval == 0 || maxval > 255) throw IoError("PGM maxval must be in 1..255");
  GrayImage img(w, h);
  if (magic == "P5") {
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(w * h));
    if (static_cast<std::size_t>(in.gcount()) != w * h) throw IoError("truncated PGM pixel data");
  } else {
    for (auto& px : img.pixels) {
      const std::size_t v = detail::pgm_number(in, "pixel");
      if (v > maxval) throw IoError("PGM pixel exceeds maxval");
      px = static_cast<std::uint8_t>(v);
    }
  }
  for (auto px : img.pixels) {
    if (px > maxval) throw IoError("PGM pixel exceeds maxval");
  }
  return img;
}

inline GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_pgm(in);
}

inline void write_pgm(std::ostream& out, const GrayImage& img) {
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_pgm(out, img);
  if (!out) throw IoError("write failed for " + path);
}

// ---------------------------------------------------------------------------
// Otsu

using Histogram = std::array<std::uint64_t, 256>;

inline Histogram histogram(const GrayImage& img) {
  Histogram h{};
  for (auto px : img.pixels) ++h[px];
  return h;
}

/// Between-class variance criterion for threshold t (class 0 = values <= t),
/// up to the constant factor 1 / total^2: (n1 s0 - n0 s1)^2 / (n0 n1).
/// Counts and sums are exact integers, so the value is reproducible.
inline double otsu_criterion(std::uint64_t n0, std::uint64_t s0, std::uint64_t n1, std::uint64_t s1) {
  const auto diff = static_cast<double>(static_cast<std::int64_t>(n1 * s0) - static_cast<std::int64_t>(n0 * s1));
  return diff * diff / (static_cast<double>(n0) * static_cast<double>(n1));
}

/// Threshold maximizing the between-class variance; foreground is > t. Ties
/// go to the smallest threshold.
inline int otsu_threshold(const Histogram& h) {
  std::uint64_t n = 0, s = 0;
  for (int v = 0; v < 256; ++v) {
    n += h[static_cast<std::size_t>(v)];
    s += h[static_cast<std::size_t>(v)] * static_cast<std::uint64_t>(v);
  }
  std::uint64_t n0 = 0, s0 = 0;
  int best = -1;
  double best_value = -1.0;
  for (int t = 0; t < 255; ++t) {
    n0 += h[static_cast<std::size_t>(t)];
    s0 += h[static_cast<std::size_t>(t)] * static_cast<std::uint64_t>(t);
    if (n0 == 0 || n0 == n) continue;
    const double value = otsu_criterion(n0, s0, n - n0, s - s0);
    if (value > best_value) {
      best_value = value;
      best = t;
    }
  }
  if (best < 0) throw DegenerateHistogram("image has a single intensity, Otsu threshold undefined");
  return best;
}

inline int otsu_threshold(const GrayImage& img) {
  if (img.empty()) throw InvalidArgument("image is empty");
  return otsu_threshold(histogram(img));
}

inline BinaryImage binarize(const GrayImage& img, int threshold) {
  BinaryImage out(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) out.pixels[i] = img.pixels[i] > threshold ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// components and boundaries

struct Components {
  std::vector<int> labels;  ///< -1 for background, else 0..count-1 in raster order of first pixel
  std::vector<std::size_t> area;
  std::size_t width = 0, height = 0;

  std::size_t count() const noexcept { return area.size(); }
};

inline Components label_components(const BinaryImage& mask) {
  Components out;
  out.width = mask.width;
  out.height = mask.height;
  out.labels.assign(mask.pixels.size(), -1);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.pixels.size(); ++start) {
    if (!mask.pixels[start] || out.labels[start] >= 0) continue;
    const int label = static_cast<int>(out.area.size());
    std::size_t area = 0;
    out.labels[start] = label;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++area;
      const std::size_t r = p / mask.width, c = p % mask.width;
      auto visit = [&](std::size_t q) {
        if (mask.pixels[q] && out.labels[q] < 0) {
          out.labels[q] = label;
          stack.push_back(q);
        }
      };
      if (c > 0) visit(p - 1);
      if (c + 1 < mask.width) visit(p + 1);
      if (r > 0) visit(p - mask.width);
      if (r + 1 < mask.height) visit(p + mask.width);
    }
    out.area.push_back(area);
  }
  return out;
}

struct Pixel {
  std::ptrdiff_t row;
  std::ptrdiff_t col;
  bool operator==(const Pixel&) const = default;
};

/// Moore-neighbourhood trace of one component, starting at its first pixel
/// in raster order, with Jacob's stopping criterion. Pixels are returned in
/// the order visited; thin parts are visited more than once.
inline std::vector<Pixel> trace_component(const Components& comp, int label) {
  const auto W = static_cast<std::ptrdiff_t>(comp.width), H = static_cast<std::ptrdiff_t>(comp.height);
  auto inside = [&](Pixel p) {
    return p.row >= 0 && p.row < H && p.col >= 0 && p.col < W &&
           comp.labels[static_cast<std::size_t>(p.row * W + p.col)] == label;
  };
  // clockwise on screen, starting west
  static constexpr std::array<std::array<int, 2>, 8> dirs{
      {{0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}}};
  auto dir_of = [](Pixel from, Pixel to) {
    for (int k = 0; k < 8; ++k) {
      if (to.row - from.row == dirs[static_cast<std::size_t>(k)][0] &&
          to.col - from.col == dirs[static_cast<std::size_t>(k)][1]) {
        return k;
      }
    }
    return -1;
  };
  Pixel start{-1, -1};
  for (std::ptrdiff_t i = 0; i < W * H; ++i) {
    if (comp.labels[static_cast<std::size_t>(i)] == label) {
      start = {i / W, i % W};
      break;
    }
  }
  if (start.row < 0) throw InvalidArgument("no such component");

  // one Moore step: scan clockwise from the backtrack neighbour
  auto step = [&](Pixel p, Pixel back, Pixel& next, Pixel& next_back) {
    const int k0 = dir_of(p, back);
    Pixel prev = back;
    for (int m = 1; m <= 8; ++m) {
      const auto& d = dirs[static_cast<std::size_t>((k0 + m) % 8)];
      const Pixel q{p.row + d[0], p.col + d[1]};
      if (inside(q)) {
        next = q;
        next_back = prev;
        return true;
      }
      prev = q;
    }
    return false;
  };

  std::vector<Pixel> out{start};
  const Pixel start_back{start.row, start.col - 1};
  Pixel p = start, back = start_back, next{}, next_back{};
  if (!step(p, back, next, next_back)) return out;  // isolated pixel
  const Pixel second = next;
  const std::size_t limit = 4 * comp.labels.size() + 8;
  while (out.size() < limit) {
    p = next;
    back = next_back;
    step(p, back, next, next_back);
    if (p == start && next == second) break;
    out.push_back(p);
  }
  return out;
}

enum class ComponentChoice { longest_boundary, largest_area };

inline double signed_area(const Controls& pts) {
  double a = 0.0;
  const Eigen::Index n = pts.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = (i + 1) % n;
    a += pts(i, 0) * pts(j, 1) - pts(j, 0) * pts(i, 1);
  }
  return 0.5 * a;
}

/// Boundary of the chosen 4-connected component as points (col, height - 1 -
/// row), oriented counterclockwise. Ties go to the component found first in
/// raster order.
inline PointSequence largest_component_boundary(const BinaryImage& mask,
                                                ComponentChoice choice = ComponentChoice::longest_boundary) {
  const Components comp = label_components(mask);
  if (comp.count() == 0) throw EmptyForeground("image has no foreground pixels");
  std::vector<Pixel> best;
  std::size_t best_area = 0;
  for (std::size_t l = 0; l < comp.count(); ++l) {
    if (choice == ComponentChoice::largest_area) {
      if (comp.area[l] > best_area) {
        best_area = comp.area[l];
        best = trace_component(comp, static_cast<int>(l));
      }
      continue;
    }
    std::vector<Pixel> b = trace_component(comp, static_cast<int>(l));
    if (b.size() > best.size()) best = std::move(b);
  }
  PointSequence seq;
  seq.points.resize(static_cast<Eigen::Index>(best.size()), 2);
  for (std::size_t i = 0; i < best.size(); ++i) {
    seq.points(static_cast<Eigen::Index>(i), 0) = static_cast<double>(best[i].col);
    seq.points(static_cast<Eigen::Index>(i), 1) =
        static_cast<double>(static_cast<std::ptrdiff_t>(mask.height) - 1 - best[i].row);
  }
  if (signed_area(seq.points) < 0.0) {
    // reverse, keeping the start point first
    Controls r = seq.points;
    for (Eigen::Index i = 1; i < r.rows(); ++i) r.row(i) = seq.points.row(r.rows() - i);
    seq.points = std::move(r);
  }
  return seq;
}

// ---------------------------------------------------------------------------
// fitting

namespace detail {

inline Controls drop_repeats(const Controls& pts) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (keep.empty() || pts.row(i) != pts.row(keep.back())) keep.push_back(i);
  }
  while (keep.size() > 1 && pts.row(keep.back()) == pts.row(keep.front())) keep.pop_back();
  Controls out(static_cast<Eigen::Index>(keep.size()), pts.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = pts.row(keep[i]);
  return out;
}

inline void require_regular_curve(const Curve& c) {
  const QuadratureGrid g = default_grid(c.basis());
  require_regular(slice_quadratic(MetricParams{}, g, c.controls(), Controls::Zero(c.size(), c.dim())), g);
}

}  // namespace detail

/// Least-squares periodic fit at arc-length-proportional parameters, then
/// reparametrization to constant speed.
inline Curve boundary_to_curve(const PointSequence& seq, std::size_t n_controls = 12, int degree = 4) {
  if (!seq.closed) throw InvalidArgument("boundary sequences must be closed");
  const Controls pts = detail::drop_repeats(seq.points);
  if (static_cast<std::size_t>(pts.rows()) < n_controls) {
    throw InvalidArgument("boundary has fewer distinct points than controls");
  }
  const Eigen::Index m = pts.rows();
  std::vector<double> s(static_cast<std::size_t>(m), 0.0);
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    s[static_cast<std::size_t>(i)] = total;
    total += (pts.row((i + 1) % m) - pts.row(i)).norm();
  }
  for (auto& x : s) x *= two_pi / total;
  const Curve fit = fit_least_squares(s, pts, n_controls, degree);
  detail::require_regular_curve(fit);
  Curve out = reparam_constant_speed(fit);
  detail::require_regular_curve(out);
  return out;
}

/// Periodic spline through (or, with more samples than controls, fitted to)
/// the samples at uniform parameters 2 pi i / m. Repeated consecutive
/// samples are rejected.
inline Curve points_to_curve(const PointSequence& seq, std::size_t n_controls, int degree) {
  if (!seq.closed) throw InvalidArgument("point sequences must be closed");
  const Eigen::Index m = seq.points.rows();
  if (static_cast<std::size_t>(m) < n_controls) {
    throw SingularFit(static_cast<std::size_t>(m), n_controls, "fewer samples than controls");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (seq.points.row(i) == seq.points.row((i + 1) % m)) {
      throw SingularFit(static_cast<std::size_t>(m) - 1, static_cast<std::size_t>(m),
                        "repeated consecutive sample " + std::to_string(i));
    }
  }
  std::vector<double> params(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) params[static_cast<std::size_t>(i)] = two_pi * static_cast<double>(i) / static_cast<double>(m);
  return fit_least_squares(params, seq.points, n_controls, degree);
}

// ---------------------------------------------------------------------------
// CSV point lists

/// One point per line, comma or whitespace separated. Blank lines, '#'
/// comments and a non-numeric first line (header) are skipped. With
/// project_simplex each row (x1, x2, x3) becomes (x1, x2) / (x1 + x2 + x3).
inline PointSequence read_points_csv(std::istream& in, bool project_simplex = false) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& ch : line) {
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    }
    std::istringstream ls(line);
    std::vector<double> v;
    std::string tok;
    bool numeric = true;
    while (ls >> tok) {
      try {
        std::size_t pos = 0;
        v.push_back(std::stod(tok, &pos));
        if (pos != tok.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (v.empty() && numeric) continue;
    if (!numeric) {
      if (rows.empty()) continue;  // header
      throw IoError("non-numeric value on line " + std::to_string(lineno));
    }
    if (!rows.empty() && v.size() != rows.front().size()) {
      throw IoError("inconsistent column count on line " + std::to_string(lineno));
    }
    rows.push_back(std::move(v));
  }
  if (rows.empty()) throw IoError("no points found");
  const std::size_t cols = rows.front().size();
  if (project_simplex ? cols != 3 : (cols < 2 || cols > static_cast<std::size_t>(max_dim))) {
    throw IoError(project_simplex ? "simplex projection needs three columns"
                                  : "points need two or three columns");
  }
  PointSequence seq;
  const auto out_cols = static_cast<Eigen::Index>(project_simplex ? 2 : cols);
  seq.points.resize(static_cast<Eigen::Index>(rows.size()), out_cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double div = 1.0;
    if (project_simplex) {
      div = rows[i][0] + rows[i][1] + rows[i][2];
      if (div == 0.0) throw InvalidArgument("homogeneous coordinates sum to zero on row " + std::to_string(i));
    }
    for (Eigen::Index k = 0; k < out_cols; ++k) {
      seq.points(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)] / div;
    }
  }
  return seq;
}

inline PointSequence read_points_csv(const std::string& path, bool project_simplex = false) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_points_csv(in, project_simplex);
}

/// Pipeline for one image: Otsu, binarize, boundary, spline.
struct Extraction {
  int threshold = 0;
  PointSequence boundary;
  Curve curve;
};

inline Extraction extract_curve(const GrayImage& img, std::size_t n_controls = 12, int degree = 4,
                                ComponentChoice choice = ComponentChoice::longest_boundary) {
  Extraction out;
  out.threshold = otsu_threshold(img);
  out.boundary = largest_component_boundary(binarize(img, out.threshold), choice);
  out.curve = boundary_to_curve(out.boundary, n_controls, degree);
  return out;
}

}  // namespace curvematch
