#include "potlab/core/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "potlab/core/errors.hpp"

namespace potlab {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InvalidInput("not a number: '" + s + "'");
  }
  if (pos != s.size()) throw InvalidInput("not a number: '" + s + "'");
  return v;
}

std::string header(int d, const std::string& last) {
  std::string h;
  for (int a = 0; a < d; ++a) h += "x" + std::to_string(a + 1) + ",";
  return h + last + "\n";
}

}  // namespace

std::string measure_csv(const GridMeasure& mu) {
  const int d = std::max(1, mu.grid().dim());
  std::string out = header(d, "weight");
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const Point& c = mu.grid().cell(i).center;
    for (int a = 0; a < d; ++a) out += format_number(c[a]) + ",";
    out += format_number(mu.weight(i)) + "\n";
  }
  return out;
}

GridMeasure parse_measure_csv(const std::string& text, const GridPtr& grid) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("empty measure CSV");
  const auto head = split(line, ',');
  if (head.size() < 2 || head.back() != "weight") throw InvalidInput("measure CSV header must end with 'weight'");
  const int d = int(head.size()) - 1;
  for (int a = 0; a < d; ++a)
    if (head[a] != "x" + std::to_string(a + 1)) throw InvalidInput("bad measure CSV header");
  std::vector<Point> pts;
  std::vector<double> w;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (int(f.size()) != d + 1) throw InvalidInput("measure CSV row has wrong arity");
    Point p = Point::zero(d);
    for (int a = 0; a < d; ++a) p[a] = parse_double(f[a]);
    pts.push_back(p);
    w.push_back(parse_double(f[d]));
  }
  GridPtr g = grid;
  if (!g) {
    g = share(GridSet::points(pts, "csv points"));
  } else {
    if (g->size() != pts.size()) throw GridMismatch();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Point& c = g->cell(i).center;
      for (int a = 0; a < d; ++a)
        if (c[a] != pts[i][a]) throw GridMismatch();
    }
  }
  return GridMeasure(g, std::move(w));
}

GridMeasure read_measure_csv(const std::string& path, const GridPtr& grid) {
  return parse_measure_csv(read_text_file(path), grid);
}

std::string field_csv(const PotentialField& f) {
  const int d = std::max(1, f.grid->dim());
  std::string out = header(d, "value");
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point& c = f.grid->cell(i).center;
    for (int a = 0; a < d; ++a) out += format_number(c[a]) + ",";
    out += format_number(f[i]) + "\n";
  }
  return out;
}

nlohmann::json ball_union_to_json(const BallUnionMeasure& mu) {
  nlohmann::json comps = nlohmann::json::array();
  for (const BallComponent& c : mu.components()) {
    nlohmann::json center = nlohmann::json::array();
    for (int a = 0; a < c.center.dim; ++a) center.push_back(c.center[a]);
    nlohmann::json e{{"center", center}, {"radius", c.radius}, {"weight", c.weight}};
    // the weight alone loses components far below the double range
    e["log_weight"] = c.log_weight;
    comps.push_back(e);
  }
  nlohmann::json j{{"components", comps}, {"normalized", mu.normalized()}};
  if (mu.support_box) {
    nlohmann::json lo = nlohmann::json::array(), hi = nlohmann::json::array();
    for (int a = 0; a < mu.support_box->first.dim; ++a) {
      lo.push_back(mu.support_box->first[a]);
      hi.push_back(mu.support_box->second[a]);
    }
    j["support_box"] = {{"lo", lo}, {"hi", hi}};
  }
  return j;
}

BallUnionMeasure ball_union_from_json(const nlohmann::json& j) {
  if (!j.contains("components") || !j["components"].is_array()) throw InvalidInput("ball union JSON needs 'components'");
  std::vector<BallComponent> comps;
  for (const auto& e : j["components"]) {
    BallComponent c;
    const auto& center = e.at("center");
    if (!center.is_array() || center.empty() || center.size() > 3) throw InvalidInput("ball center must have 1..3 coordinates");
    c.center = Point::zero(int(center.size()));
    for (std::size_t a = 0; a < center.size(); ++a) c.center[int(a)] = center[a].get<double>();
    c.radius = e.at("radius").get<double>();
    c.weight = e.value("weight", 0.0);
    c.log_weight = e.value("log_weight", c.weight > 0.0 ? std::log(c.weight) : -INFINITY);
    if (c.weight > 0.0 && e.contains("log_weight")) c.weight = 0.0;  // prefer the exact log form
    comps.push_back(c);
  }
  BallUnionMeasure mu(std::move(comps), j.value("normalized", true));
  if (j.contains("support_box")) {
    const auto& lo = j["support_box"].at("lo");
    const auto& hi = j["support_box"].at("hi");
    Point a = Point::zero(int(lo.size())), b = Point::zero(int(hi.size()));
    for (std::size_t i = 0; i < lo.size(); ++i) a[int(i)] = lo[i].get<double>();
    for (std::size_t i = 0; i < hi.size(); ++i) b[int(i)] = hi[i].get<double>();
    mu.support_box = std::make_pair(a, b);
  }
  return mu;
}

BallUnionMeasure read_ball_union(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bad ball union JSON: ") + e.what());
  }
  return ball_union_from_json(j);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace potlab
