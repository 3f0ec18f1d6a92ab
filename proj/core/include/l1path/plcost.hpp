#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "l1path/gaussmp.hpp"

namespace l1path {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class SegmentKind { Line, Point };

// One piece of a proper segmentation. A line lives on the open interval
// (lo, hi) with the given slope; a point sits at location with the slopes of
// its two neighbouring lines recorded in left_slope/right_slope.
struct Segment {
  SegmentKind kind = SegmentKind::Line;
  double lo = -kInf;
  double hi = kInf;
  double slope = 0.0;
  double location = 0.0;
  double left_slope = 0.0;
  double right_slope = 0.0;

  bool is_line() const { return kind == SegmentKind::Line; }
  bool is_point() const { return kind == SegmentKind::Point; }
  bool contains(double z) const;
};

// A kink of a custom cost: at location the slope changes from left to right.
struct Kink {
  double location;
  double left_slope;
  double right_slope;
};

// Piecewise linear convex cost kappa, normalized so that kappa vanishes at
// its first breakpoint. Segments alternate line, point, ..., point, line.
class SegmentedCost {
public:
  // slopes.size() == breakpoints.size() + 1, both strictly increasing.
  static SegmentedCost from_breakpoints(std::vector<double> breakpoints,
                                        std::vector<double> slopes);

  const std::vector<Segment>& segments() const { return segments_; }
  const Segment& segment(std::size_t i) const { return segments_.at(i); }
  std::size_t size() const { return segments_.size(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& slopes() const { return slopes_; }

  double eval(double z) const;
  // Same cost expressed in z + offset, i.e. kappa'(z) = kappa(z - offset).
  SegmentedCost shifted(double offset) const;

  // Index of the point segment minimizing kappa, or npos when the minimum
  // is attained on a line (a zero slope) or the cost is unbounded below.
  std::size_t argmin_point() const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  bool operator==(const SegmentedCost& o) const {
    return breakpoints_ == o.breakpoints_ && slopes_ == o.slopes_;
  }

private:
  std::vector<double> breakpoints_;
  std::vector<double> slopes_;
  std::vector<Segment> segments_;
};

SegmentedCost make_l1(double center);
SegmentedCost make_hinge1(double a);
SegmentedCost make_hinge2(double b);
SegmentedCost make_vapnik(double a, double b);
SegmentedCost make_custom(const std::vector<Kink>& kinks);

// Degenerate Gaussian parameters of a segment: a line is the flat message
// xi = -slope, a point is the point mass at its location.
struct SegmentGaussParams {
  SegmentKind kind;
  double value; // xi for a line, m for a point

  GaussianMsg message() const;
  static SegmentGaussParams flat(double xi) { return {SegmentKind::Line, xi}; }
  static SegmentGaussParams point(double m) { return {SegmentKind::Point, m}; }
};

SegmentGaussParams segment_params(const Segment& seg);

std::size_t locate(const SegmentedCost& cost, double z);

// Decision rule: maximizer of exp(-kappa(z)) N(z; mb, Vb) given that it lies
// in seg. mb - slope*Vb for a line, the location for a point.
double decide(const Segment& seg, double mb, double Vb);

// coef_m * mb + coef_v * Vb + constant  (> 0 if strict, >= 0 otherwise)
struct LinearCondition {
  enum Side { Lower, Upper };
  double coef_m;
  double coef_v;
  double constant;
  bool strict;
  Side side; // which boundary of the segment the inequality guards

  double value(double mb, double Vb) const { return coef_m * mb + coef_v * Vb + constant; }
  bool holds(double mb, double Vb) const {
    double v = value(mb, Vb);
    return strict ? v > 0 : v >= 0;
  }
};

// The set of (mb, Vb) for which decide(seg, ...) lies in seg, as a
// conjunction of affine inequalities. Lines get strict inequalities, points
// closed ones, so boundary ties resolve to the point.
std::vector<LinearCondition> in_subdomain_condition(const Segment& seg);
bool in_subdomain(const Segment& seg, double mb, double Vb);

std::string cost_to_json(const SegmentedCost& cost);
SegmentedCost cost_from_json(const std::string& text);

} // namespace l1path
