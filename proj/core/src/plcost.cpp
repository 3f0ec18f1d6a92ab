#include "l1path/plcost.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>

#include "l1path/error.hpp"

namespace l1path {

bool Segment::contains(double z) const {
  return is_point() ? z == location : (z > lo && z < hi);
}

SegmentedCost SegmentedCost::from_breakpoints(std::vector<double> breakpoints,
                                              std::vector<double> slopes) {
  if (slopes.size() != breakpoints.size() + 1)
    throw ModelError("cost: need exactly one more slope than breakpoints");
  for (double p : breakpoints)
    if (!std::isfinite(p)) throw ModelError("cost: breakpoints must be finite");
  for (std::size_t i = 0; i < slopes.size(); ++i) {
    if (std::isnan(slopes[i])) throw ModelError("cost: slope is NaN");
    bool end = i == 0 || i + 1 == slopes.size();
    if (std::isinf(slopes[i]) && !(end && !breakpoints.empty()))
      throw ModelError("cost: only the outer slopes of a kinked cost may be infinite");
  }
  if (!slopes.empty() && slopes.front() == kInf) throw ModelError("cost: left slope +inf");
  if (slopes.back() == -kInf) throw ModelError("cost: right slope -inf");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw ModelError("cost: breakpoints must be strictly increasing");
  for (std::size_t i = 1; i < slopes.size(); ++i)
    if (!(slopes[i] > slopes[i - 1]))
      throw ModelError("cost: slopes must be strictly increasing (convexity)");

  SegmentedCost c;
  c.breakpoints_ = std::move(breakpoints);
  c.slopes_ = std::move(slopes);
  const auto& bp = c.breakpoints_;
  const auto& sl = c.slopes_;
  for (std::size_t i = 0; i < sl.size(); ++i) {
    if (std::isfinite(sl[i])) {
      Segment line;
      line.kind = SegmentKind::Line;
      line.lo = i == 0 ? -kInf : bp[i - 1];
      line.hi = i == bp.size() ? kInf : bp[i];
      line.slope = sl[i];
      c.segments_.push_back(line);
    }
    if (i < bp.size()) {
      Segment pt;
      pt.kind = SegmentKind::Point;
      pt.location = pt.lo = pt.hi = bp[i];
      pt.left_slope = sl[i];
      pt.right_slope = sl[i + 1];
      c.segments_.push_back(pt);
    }
  }
  return c;
}

double SegmentedCost::eval(double z) const {
  if (breakpoints_.empty()) return slopes_[0] * z;
  const std::size_t k = breakpoints_.size();
  if (z < breakpoints_[0]) {
    return slopes_[0] == -kInf ? kInf : slopes_[0] * (z - breakpoints_[0]);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double right = i + 1 < k ? breakpoints_[i + 1] : kInf;
    if (z <= right) return acc + (z == breakpoints_[i] ? 0.0 : slopes_[i + 1] * (z - breakpoints_[i]));
    acc += slopes_[i + 1] * (right - breakpoints_[i]);
  }
  return acc; // unreachable
}

SegmentedCost SegmentedCost::shifted(double offset) const {
  std::vector<double> bp = breakpoints_;
  for (double& p : bp) p += offset;
  return from_breakpoints(std::move(bp), slopes_);
}

std::size_t SegmentedCost::argmin_point() const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (s.is_point() && s.left_slope < 0 && s.right_slope > 0) return i;
  }
  return npos;
}

SegmentedCost make_l1(double center) { return SegmentedCost::from_breakpoints({center}, {-1.0, 1.0}); }
SegmentedCost make_hinge1(double a) { return SegmentedCost::from_breakpoints({a}, {-1.0, 0.0}); }
SegmentedCost make_hinge2(double b) { return SegmentedCost::from_breakpoints({b}, {0.0, 1.0}); }

SegmentedCost make_vapnik(double a, double b) {
  if (!(a < b)) throw ModelError("vapnik: need a < b");
  return SegmentedCost::from_breakpoints({a, b}, {-2.0, 0.0, 2.0});
}

SegmentedCost make_custom(const std::vector<Kink>& kinks) {
  if (kinks.empty()) throw ModelError("custom cost: no kinks given");
  std::vector<Kink> merged;
  for (const Kink& k : kinks) {
    if (!(k.right_slope != k.left_slope)) throw ModelError("custom cost: kink without slope change");
    if (!merged.empty() && k.location == merged.back().location) {
      if (k.left_slope != merged.back().right_slope)
        throw ModelError("custom cost: inconsistent slopes at repeated location");
      merged.back().right_slope = k.right_slope;
      continue;
    }
    if (!merged.empty() && !(k.location > merged.back().location))
      throw ModelError("custom cost: kink locations must increase");
    if (!merged.empty() && k.left_slope != merged.back().right_slope)
      throw ModelError("custom cost: slope between consecutive kinks disagrees");
    merged.push_back(k);
  }
  std::vector<double> bp, sl;
  sl.push_back(merged.front().left_slope);
  for (const Kink& k : merged) {
    if (!(k.right_slope > k.left_slope)) throw ModelError("custom cost: non-convex slope sequence");
    bp.push_back(k.location);
    sl.push_back(k.right_slope);
  }
  return SegmentedCost::from_breakpoints(std::move(bp), std::move(sl));
}

GaussianMsg SegmentGaussParams::message() const {
  return kind == SegmentKind::Line ? GaussianMsg::flat(value) : GaussianMsg::point(value);
}

SegmentGaussParams segment_params(const Segment& seg) {
  return seg.is_line() ? SegmentGaussParams::flat(-seg.slope)
                       : SegmentGaussParams::point(seg.location);
}

std::size_t locate(const SegmentedCost& cost, double z) {
  const auto& segs = cost.segments();
  for (std::size_t i = 0; i < segs.size(); ++i)
    if (segs[i].contains(z)) return i;
  throw ModelError("locate: value outside the domain of the cost");
}

double decide(const Segment& seg, double mb, double Vb) {
  return seg.is_line() ? mb - seg.slope * Vb : seg.location;
}

std::vector<LinearCondition> in_subdomain_condition(const Segment& seg) {
  std::vector<LinearCondition> out;
  if (seg.is_line()) {
    // lo < mb - s Vb < hi
    if (std::isfinite(seg.lo))
      out.push_back({1.0, -seg.slope, -seg.lo, true, LinearCondition::Lower});
    if (std::isfinite(seg.hi))
      out.push_back({-1.0, seg.slope, seg.hi, true, LinearCondition::Upper});
  } else {
    // a + sL Vb <= mb <= a + sR Vb
    if (std::isfinite(seg.left_slope))
      out.push_back({1.0, -seg.left_slope, -seg.location, false, LinearCondition::Lower});
    if (std::isfinite(seg.right_slope))
      out.push_back({-1.0, seg.right_slope, seg.location, false, LinearCondition::Upper});
  }
  return out;
}

bool in_subdomain(const Segment& seg, double mb, double Vb) {
  for (const LinearCondition& c : in_subdomain_condition(seg))
    if (!c.holds(mb, Vb)) return false;
  return true;
}

namespace {

nlohmann::json slope_json(double s) {
  if (s == kInf) return "inf";
  if (s == -kInf) return "-inf";
  return s;
}

double slope_value(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ParseError("cost json: bad slope '" + s + "'");
  }
  if (!j.is_number()) throw ParseError("cost json: slope must be a number");
  return j.get<double>();
}

} // namespace

std::string cost_to_json(const SegmentedCost& cost) {
  nlohmann::json j;
  j["breakpoints"] = cost.breakpoints();
  nlohmann::json sl = nlohmann::json::array();
  for (double s : cost.slopes()) sl.push_back(slope_json(s));
  j["slopes"] = sl;
  return j.dump();
}

SegmentedCost cost_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("cost json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("breakpoints") || !j.contains("slopes"))
    throw ParseError("cost json: expected {breakpoints: [...], slopes: [...]}");
  std::vector<double> bp, sl;
  for (const auto& v : j.at("breakpoints")) {
    if (!v.is_number()) throw ParseError("cost json: breakpoint must be a number");
    bp.push_back(v.get<double>());
  }
  for (const auto& v : j.at("slopes")) sl.push_back(slope_value(v));
  return SegmentedCost::from_breakpoints(std::move(bp), std::move(sl));
}

} // namespace l1path
