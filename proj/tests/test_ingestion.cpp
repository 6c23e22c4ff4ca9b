#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "curvematch/ingestion.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace cm = curvematch;

namespace {

cm::GrayImage square_image(std::size_t w, std::size_t h, std::size_t r0, std::size_t c0, std::size_t size) {
  cm::GrayImage img(w, h, 0);
  for (std::size_t r = r0; r < r0 + size; ++r) {
    for (std::size_t c = c0; c < c0 + size; ++c) img.at(r, c) = 1;
  }
  return img;
}

cm::GrayImage disk_image(std::size_t w, std::size_t h, double cx, double cy, double rx, double ry,
                         std::uint8_t fg = 200, std::uint8_t bg = 30) {
  cm::GrayImage img(w, h, bg);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double x = (static_cast<double>(c) - cx) / rx, y = (static_cast<double>(r) - cy) / ry;
      if (x * x + y * y <= 1.0) img.at(r, c) = fg;
    }
  }
  return img;
}

std::set<std::pair<double, double>> point_set(const cm::PointSequence& s) {
  std::set<std::pair<double, double>> out;
  for (Eigen::Index i = 0; i < s.points.rows(); ++i) out.insert({s.points(i, 0), s.points(i, 1)});
  return out;
}

// (col, row) of a boundary point in image coordinates
std::pair<long, long> pixel_of(const cm::PointSequence& s, Eigen::Index i, std::size_t height) {
  return {std::lround(s.points(i, 0)), static_cast<long>(height) - 1 - std::lround(s.points(i, 1))};
}

void expect_valid_boundary(const cm::PointSequence& s, const cm::BinaryImage& mask) {
  const Eigen::Index n = s.points.rows();
  ASSERT_GE(n, 1);
  EXPECT_GT(cm::signed_area(s.points), -1e-12);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto [c, r] = pixel_of(s, i, mask.height);
    ASSERT_TRUE(mask.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)));
    const auto [c2, r2] = pixel_of(s, (i + 1) % n, mask.height);
    if (n > 1) {
      EXPECT_LE(std::max(std::abs(c2 - c), std::abs(r2 - r)), 1) << "loop broken at " << i;
    }
    bool touches = false;
    for (long dr = -1; dr <= 1; ++dr) {
      for (long dc = -1; dc <= 1; ++dc) {
        const long rr = r + dr, cc = c + dc;
        if (rr < 0 || cc < 0 || rr >= static_cast<long>(mask.height) || cc >= static_cast<long>(mask.width) ||
            !mask.at(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc))) {
          touches = true;
        }
      }
    }
    EXPECT_TRUE(touches) << "interior pixel on boundary at " << i;
  }
}

double max_speed_deviation(const cm::Curve& c) {
  std::vector<double> s;
  for (int k = 0; k < 400; ++k) s.push_back(c.eval(cm::two_pi * k / 400.0, 1).norm());
  double mean = 0.0;
  for (double x : s) mean += x / 400.0;
  double dev = 0.0;
  for (double x : s) dev = std::max(dev, std::abs(x - mean) / mean);
  return dev;
}

cm::PointSequence circle_points(std::size_t m, double r, double cx = 0.0, double cy = 0.0, double phase = 0.3) {
  cm::PointSequence s;
  s.points.resize(static_cast<Eigen::Index>(m), 2);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = phase + cm::two_pi * static_cast<double>(i) / static_cast<double>(m);
    s.points(static_cast<Eigen::Index>(i), 0) = cx + r * std::cos(t);
    s.points(static_cast<Eigen::Index>(i), 1) = cy + r * std::sin(t);
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Otsu

TEST(Otsu, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const cm::Histogram h = cm::oracles::random_histogram(rng);
    EXPECT_EQ(cm::otsu_threshold(h), cm::oracles::brute_force_otsu(h)) << trial;
  }
}

TEST(Otsu, TwoLevelImageTiesToSmallest) {
  cm::GrayImage img(10, 10, 0);
  for (std::size_t i = 0; i < 50; ++i) img.pixels[i] = 255;
  EXPECT_EQ(cm::otsu_threshold(img), 0);
  const cm::BinaryImage b = cm::binarize(img, 0);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(b.pixels[i], i < 50 ? 1 : 0);
}

TEST(Otsu, TwoNarrowModes) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 2.0);
  cm::GrayImage img(40, 40);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double v = (i % 3 == 0 ? 200.0 : 50.0) + g(rng);
    img.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  const int t = cm::otsu_threshold(img);
  EXPECT_GT(t, 50);
  EXPECT_LT(t, 200);
}

TEST(Otsu, ConstantImageFails) {
  EXPECT_THROW(cm::otsu_threshold(cm::GrayImage(5, 5, 77)), cm::DegenerateHistogram);
  EXPECT_THROW(cm::otsu_threshold(cm::GrayImage()), cm::InvalidArgument);
}

// ---------------------------------------------------------------------------
// PGM

TEST(Pgm, BinaryRoundTrip) {
  cm::GrayImage img(7, 3);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 11);
  std::stringstream ss;
  cm::write_pgm(ss, img);
  const cm::GrayImage back = cm::read_pgm(ss);
  EXPECT_EQ(back.width, 7u);
  EXPECT_EQ(back.height, 3u);
  EXPECT_EQ(back.pixels, img.pixels);
}

TEST(Pgm, AsciiWithComments) {
  std::istringstream in("P2\n# a comment\n3 2 # trailing\n15\n0 1 2\n13 14 15\n");
  const cm::GrayImage img = cm::read_pgm(in);
  EXPECT_EQ(img.width, 3u);
  EXPECT_EQ(img.height, 2u);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{0, 1, 2, 13, 14, 15}));
}

TEST(Pgm, RejectsBadInput) {
  std::istringstream magic("P6\n1 1\n255\nx");
  EXPECT_THROW(cm::read_pgm(magic), cm::IoError);
  std::istringstream wide("P2\n1 1\n65535\n0\n");
  EXPECT_THROW(cm::read_pgm(wide), cm::IoError);
  std::istringstream shortdata("P5\n4 4\n255\nabc");
  EXPECT_THROW(cm::read_pgm(shortdata), cm::IoError);
  std::istringstream over("P2\n2 1\n10\n3 11\n");
  EXPECT_THROW(cm::read_pgm(over), cm::IoError);
  EXPECT_THROW(cm::read_pgm(std::string("/nonexistent/file.pgm")), cm::IoError);
}

// ---------------------------------------------------------------------------
// components and boundaries

TEST(Boundary, FilledSquare) {
  const cm::BinaryImage img = square_image(7, 6, 1, 2, 3);
  const cm::PointSequence s = cm::largest_component_boundary(img);
  ASSERT_EQ(s.size(), 8u);
  std::set<std::pair<double, double>> expected;
  for (int r = 1; r < 4; ++r) {
    for (int c = 2; c < 5; ++c) {
      if (r != 2 || c != 3) expected.insert({c, 6 - 1 - r});
    }
  }
  EXPECT_EQ(point_set(s), expected);
  EXPECT_GT(cm::signed_area(s.points), 0.0);
  expect_valid_boundary(s, img);
}

TEST(Boundary, LongestOfTwoSquares) {
  cm::BinaryImage img = square_image(20, 12, 1, 1, 3);
  for (std::size_t r = 4; r < 9; ++r) {
    for (std::size_t c = 10; c < 15; ++c) img.at(r, c) = 1;
  }
  const cm::PointSequence s = cm::largest_component_boundary(img);
  EXPECT_EQ(s.size(), 16u);
  for (Eigen::Index i = 0; i < s.points.rows(); ++i) EXPECT_GE(s.points(i, 0), 10.0);
  expect_valid_boundary(s, img);
}

TEST(Boundary, FullFrame) {
  const cm::BinaryImage img(6, 4, 1);
  const cm::PointSequence s = cm::largest_component_boundary(img);
  EXPECT_EQ(s.size(), 2u * (6 + 4) - 4);
  for (Eigen::Index i = 0; i < s.points.rows(); ++i) {
    const double x = s.points(i, 0), y = s.points(i, 1);
    EXPECT_TRUE(x == 0 || x == 5 || y == 0 || y == 3);
  }
  expect_valid_boundary(s, img);
}

TEST(Boundary, LongestBoundaryVersusLargestArea) {
  // a 1 x 20 line has the longer trace (38 visits), a 6 x 6 square the larger area
  cm::BinaryImage img(30, 12, 0);
  for (std::size_t c = 2; c < 22; ++c) img.at(1, c) = 1;
  for (std::size_t r = 4; r < 10; ++r) {
    for (std::size_t c = 20; c < 26; ++c) img.at(r, c) = 1;
  }
  const cm::PointSequence line = cm::largest_component_boundary(img);
  EXPECT_EQ(line.size(), 38u);
  const cm::PointSequence square = cm::largest_component_boundary(img, cm::ComponentChoice::largest_area);
  EXPECT_EQ(square.size(), 20u);
}

TEST(Boundary, DiagonalNeighboursAreSeparateComponents) {
  cm::BinaryImage img = square_image(10, 10, 1, 1, 3);
  for (std::size_t r = 4; r < 8; ++r) {
    for (std::size_t c = 4; c < 8; ++c) img.at(r, c) = 1;  // touches the first square at a corner
  }
  EXPECT_EQ(cm::label_components(img).count(), 2u);
  const cm::PointSequence s = cm::largest_component_boundary(img);
  EXPECT_EQ(s.size(), 12u);
  for (Eigen::Index i = 0; i < s.points.rows(); ++i) EXPECT_GE(s.points(i, 0), 4.0);
}

TEST(Boundary, DiskIsSimpleLoop) {
  const cm::GrayImage g = disk_image(64, 48, 30.3, 22.7, 17.2, 12.9);
  const cm::BinaryImage img = cm::binarize(g, cm::otsu_threshold(g));
  const cm::PointSequence s = cm::largest_component_boundary(img);
  expect_valid_boundary(s, img);
  EXPECT_EQ(point_set(s).size(), s.size());  // no pixel visited twice
}

TEST(Boundary, SinglePixelAndEmpty) {
  cm::BinaryImage img(5, 5, 0);
  EXPECT_THROW(cm::largest_component_boundary(img), cm::EmptyForeground);
  img.at(2, 3) = 1;
  const cm::PointSequence s = cm::largest_component_boundary(img);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.points(0, 0), 3.0);
  EXPECT_EQ(s.points(0, 1), 2.0);
}

// ---------------------------------------------------------------------------
// fitting

TEST(BoundaryToCurve, CircleFromPoints) {
  const cm::Curve c = cm::boundary_to_curve(circle_points(200, 10.0, 3.0, -2.0));
  EXPECT_EQ(c.size(), 12u);
  EXPECT_EQ(c.degree(), 4);
  double err = 0.0;
  for (int k = 0; k < 400; ++k) {
    const cm::Point p = c.eval(cm::two_pi * k / 400.0);
    err = std::max(err, std::abs(std::hypot(p[0] - 3.0, p[1] + 2.0) - 10.0) / 10.0);
  }
  EXPECT_LT(err, 0.01);
  EXPECT_LT(max_speed_deviation(c), 0.05);
  // orientation is kept
  EXPECT_GT(c.eval(0.0, 1).dot(Eigen::Vector2d(-std::sin(0.3), std::cos(0.3))), 0.0);
}

TEST(BoundaryToCurve, FromRasterDisk) {
  const cm::GrayImage g = disk_image(80, 80, 40.2, 39.6, 25.0, 25.0);
  const cm::Extraction e = cm::extract_curve(g);
  EXPECT_EQ(e.threshold, 30);  // two levels: smallest separating threshold
  EXPECT_LT(max_speed_deviation(e.curve), 0.05);
  double err = 0.0;
  for (int k = 0; k < 400; ++k) {
    const cm::Point p = e.curve.eval(cm::two_pi * k / 400.0);
    // boundary pixel centres lie within one pixel inside the true circle
    err = std::max(err, std::abs(std::hypot(p[0] - 40.2, p[1] - (79 - 39.6)) - 24.5));
  }
  EXPECT_LT(err, 1.0);
  EXPECT_GT(cm::signed_area(cm::sample_curve(e.curve, 100)), 0.0);
}

TEST(BoundaryToCurve, TooFewPoints) {
  EXPECT_THROW(cm::boundary_to_curve(circle_points(8, 1.0)), cm::InvalidArgument);
  cm::PointSequence open = circle_points(50, 1.0);
  open.closed = false;
  EXPECT_THROW(cm::boundary_to_curve(open), cm::InvalidArgument);
}

TEST(PointsToCurve, InterpolatesThirtySamples) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.05);
  cm::PointSequence s = circle_points(30, 1.0, 0.0, 0.0, 0.0);
  for (Eigen::Index i = 0; i < s.points.size(); ++i) s.points.data()[i] += g(rng);
  const cm::Curve c = cm::points_to_curve(s, 30, 3);
  for (Eigen::Index i = 0; i < 30; ++i) {
    EXPECT_LT((c.eval(cm::two_pi * static_cast<double>(i) / 30.0) - s.points.row(i).transpose()).norm(), 1e-8);
  }
}

TEST(PointsToCurve, RecoversSplineFromKnotAverages) {
  std::mt19937_64 rng(4);
  const cm::Curve c = cm::fixtures::random_curve(rng, 16, 3, 0.1);
  // for odd degree the knot averages are the uniform parameters 2 pi i / N
  const std::vector<double>& knots = c.basis().knots();
  std::set<long> averages, uniform;
  for (std::size_t j = 0; j < 16; ++j) {
    double a = 0.0;
    for (std::size_t k = 1; k <= 3; ++k) a += knots[j + k] / 3.0;
    averages.insert(std::lround(std::remainder(a, cm::two_pi) / cm::two_pi * 16.0 + 16.0) % 16);
    uniform.insert(static_cast<long>(j));
  }
  ASSERT_EQ(averages, uniform);
  cm::PointSequence s;
  s.points = cm::sample_curve(c, 16);
  const cm::Curve back = cm::points_to_curve(s, 16, 3);
  EXPECT_LT((back.controls() - c.controls()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PointsToCurve, RejectsRepeatedSamples) {
  cm::PointSequence s = circle_points(30, 1.0);
  s.points.row(11) = s.points.row(10);
  EXPECT_THROW(cm::points_to_curve(s, 30, 3), cm::SingularFit);
  EXPECT_THROW(cm::points_to_curve(circle_points(10, 1.0), 12, 3), cm::SingularFit);
}

// ---------------------------------------------------------------------------
// CSV

TEST(PointsCsv, ParsesHeaderCommentsAndSeparators) {
  std::istringstream in("x,y\n# comment\n1,2\n 3.5 4\n\n5;-6e-1 # tail\n");
  const cm::PointSequence s = cm::read_points_csv(in);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.points(1, 0), 3.5);
  EXPECT_EQ(s.points(2, 1), -0.6);
}

TEST(PointsCsv, ProjectSimplex) {
  std::istringstream in("1,1,2\n2,0,2\n");
  const cm::PointSequence s = cm::read_points_csv(in, true);
  ASSERT_EQ(s.points.cols(), 2);
  EXPECT_EQ(s.points(0, 0), 0.25);
  EXPECT_EQ(s.points(0, 1), 0.25);
  EXPECT_EQ(s.points(1, 0), 0.5);
  EXPECT_EQ(s.points(1, 1), 0.0);
  std::istringstream zero("1,-1,0\n");
  EXPECT_THROW(cm::read_points_csv(zero, true), cm::InvalidArgument);
}

TEST(PointsCsv, RejectsMalformed) {
  std::istringstream ragged("1,2\n3,4,5\n");
  EXPECT_THROW(cm::read_points_csv(ragged), cm::IoError);
  std::istringstream text("1,2\nfoo,4\n");
  EXPECT_THROW(cm::read_points_csv(text), cm::IoError);
  std::istringstream empty("# nothing\n");
  EXPECT_THROW(cm::read_points_csv(empty), cm::IoError);
  std::istringstream two("1,2\n");
  EXPECT_THROW(cm::read_points_csv(two, true), cm::IoError);
}
