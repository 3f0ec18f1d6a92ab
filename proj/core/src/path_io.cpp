#include <json.hpp>

#include "l1path/error.hpp"
#include "l1path/path.hpp"

namespace l1path {

namespace {

using nlohmann::json;

json pairs(const AffineVec& a) {
  json arr = json::array();
  for (Index n = 0; n < a.c1.size(); ++n) arr.push_back({a.c1(n), a.c0(n)});
  return arr;
}

AffineVec unpairs(const json& arr, const char* what) {
  if (!arr.is_array()) throw ParseError(std::string("path JSON: '") + what + "' is not an array");
  AffineVec a{VectorXd(static_cast<Index>(arr.size())), VectorXd(static_cast<Index>(arr.size()))};
  for (std::size_t n = 0; n < arr.size(); ++n) {
    const json& p = arr[n];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ParseError(std::string("path JSON: bad coefficient pair in '") + what + "' at " +
                       std::to_string(n));
    a.c1(static_cast<Index>(n)) = p[0].get<double>();
    a.c0(static_cast<Index>(n)) = p[1].get<double>();
  }
  return a;
}

} // namespace

std::string path_to_json(const RegPath& path) {
  json j;
  j["side"] = path.side == RegSide::InputReg ? "input" : "output";
  j["knots"] = path.knots;
  std::vector<double> s2;
  for (double k : path.knots) s2.push_back(2.0 * k);
  j["s2_knots"] = s2;
  j["sigma2_max"] = path.sigma2_max();
  j["initial_active"] = path.initial_active;
  j["truncated"] = path.truncated;
  j["stats"] = {{"iterations", path.stats.iterations}, {"start", path.stats.start}};
  json ev = json::array();
  for (const PathEvent& e : path.events)
    ev.push_back({{"sigma2", e.sigma2}, {"n", e.n}, {"from", e.from}, {"to", e.to}, {"interval", e.interval}});
  j["events"] = ev;
  json pieces = json::array();
  for (std::size_t i = 0; i < path.pieces.size(); ++i) {
    const PathPiece& p = path.pieces[i];
    json pj;
    pj["interval"] = i;
    pj["lo"] = i < path.knots.size() ? path.knots[i] : 0.0;
    if (i + 1 < path.knots.size()) pj["hi"] = path.knots[i + 1];
    else pj["hi"] = nullptr;
    pj["coeffs"] = pairs(p.estimate);
    pj["secondary"] = pairs(p.secondary);
    pj["initial_state"] = pairs(p.initial_state);
    pieces.push_back(pj);
  }
  j["pieces"] = pieces;
  return j.dump(1);
}

RegPath path_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("path JSON: ") + e.what());
  }
  RegPath p;
  try {
    const std::string side = j.at("side").get<std::string>();
    if (side == "input") p.side = RegSide::InputReg;
    else if (side == "output") p.side = RegSide::OutputReg;
    else throw ParseError("path JSON: unknown side '" + side + "'");
    p.knots = j.at("knots").get<std::vector<double>>();
    p.initial_active = j.at("initial_active").get<std::vector<std::size_t>>();
    p.truncated = j.value("truncated", false);
    if (j.contains("stats")) {
      p.stats.iterations = j["stats"].value("iterations", std::size_t{0});
      p.stats.start = j["stats"].value("start", std::string());
    }
    for (const json& e : j.at("events"))
      p.events.push_back({e.at("sigma2").get<double>(), e.at("n").get<Index>(),
                          e.at("from").get<std::size_t>(), e.at("to").get<std::size_t>(),
                          e.at("interval").get<std::size_t>()});
    for (const json& pj : j.at("pieces")) {
      PathPiece piece;
      piece.estimate = unpairs(pj.at("coeffs"), "coeffs");
      piece.secondary = unpairs(pj.at("secondary"), "secondary");
      piece.initial_state = unpairs(pj.at("initial_state"), "initial_state");
      p.pieces.push_back(std::move(piece));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("path JSON: ") + e.what());
  }
  if (p.pieces.size() != p.knots.size())
    throw ParseError("path JSON: " + std::to_string(p.pieces.size()) + " pieces for " +
                     std::to_string(p.knots.size()) + " knots");
  const Index d = p.dim();
  for (const PathPiece& piece : p.pieces)
    if (piece.estimate.c1.size() != d) throw ParseError("path JSON: pieces differ in dimension");
  if (p.initial_active.size() != static_cast<std::size_t>(d))
    throw ParseError("path JSON: initial_active has wrong length");
  return p;
}

} // namespace l1path
