#include "potlab/cli/config.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>
#include <memory>
#include <sstream>

#include "toml.hpp"

#include "potlab/cli/weight_expr.hpp"
#include "potlab/core/errors.hpp"
#include "potlab/core/io.hpp"

namespace potlab {

namespace {

using nlohmann::json;

const char* const kSections[] = {"kernel", "domain", "weight", "solver", "run", "output"};

json node_to_json(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    json o = json::object();
    for (auto&& [k, v] : *t) o[std::string(k.str())] = node_to_json(v);
    return o;
  }
  if (const auto* a = n.as_array()) {
    json arr = json::array();
    for (const toml::node& v : *a) arr.push_back(node_to_json(v));
    return arr;
  }
  if (const auto* v = n.as_integer()) return v->get();
  if (const auto* v = n.as_floating_point()) return v->get();
  if (const auto* v = n.as_string()) return v->get();
  if (const auto* v = n.as_boolean()) return v->get();
  std::ostringstream os;
  if (const auto* v = n.as_date()) os << v->get();
  else if (const auto* v = n.as_time()) os << v->get();
  else if (const auto* v = n.as_date_time()) os << v->get();
  return os.str();
}

Point point_from(const json& j, const char* what) {
  if (!j.is_array() || j.empty() || j.size() > 3) throw InvalidInput(std::string(what) + " must be a list of 1..3 numbers");
  Point p = Point::zero(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidInput(std::string(what) + " must be a list of numbers");
    p[static_cast<int>(i)] = j[i].get<double>();
  }
  return p;
}

double number_at(const json& section, const char* key, double def) {
  if (!section.contains(key)) return def;
  const json& v = section[key];
  if (!v.is_number()) throw InvalidInput(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

/// Weight tabulated in a field CSV, extended by its nearest tabulated point.
WeightFunction csv_weight(const std::string& path) {
  std::istringstream is(read_text_file(path));
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("empty weight CSV");
  const int d = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (d < 1 || d > 3) throw InvalidInput("weight CSV needs x1..xd,value columns");
  auto pts = std::make_shared<std::vector<std::pair<Point, double>>>();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Point p = Point::zero(d);
    double v;
    for (int i = 0; i < d; ++i)
      if (!(row >> p[i])) throw InvalidInput("bad weight CSV row");
    if (!(row >> v)) throw InvalidInput("bad weight CSV row");
    pts->emplace_back(p, v);
  }
  if (pts->empty()) throw InvalidInput("weight CSV has no rows");
  return [pts](const Point& x) {
    double best = std::numeric_limits<double>::infinity(), val = 0.0;
    for (const auto& [p, v] : *pts) {
      const double dd = distance(p, x);
      if (dd < best) {
        best = dd;
        val = v;
      }
    }
    return val;
  };
}

}  // namespace

json toml_to_json(const std::string& text) {
  try {
    return node_to_json(toml::parse(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: " << e.description() << " at line " << e.source().begin.line;
    throw InvalidInput(os.str());
  }
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.tree = {
      {"kernel", {{"d", 2}, {"alpha", 2.0}}},
      {"domain", {{"kind", "interval"}, {"a", -1.0}, {"b", 1.0}}},
      {"weight", {{"expr", "0"}}},
      {"solver", {{"tol", 1e-6}, {"max_iter", 20000}, {"anneal", 1.0}}},
      {"run", json::object()},
      {"output", {{"dir", "out"}, {"formats", {"csv", "json"}}}},
  };
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("config must be a table");
  ExperimentConfig c = defaults();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(std::begin(kSections), std::end(kSections), it.key()) == std::end(kSections))
      throw InvalidInput("unknown config section '" + it.key() + "'");
    if (!it.value().is_object()) throw InvalidInput("config section '" + it.key() + "' must be a table");
    if (it.key() == "domain") {
      c.tree["domain"] = it.value();
      c.domain_given = true;
    } else if (it.key() == "weight") {
      c.tree["weight"] = it.value();
    } else {
      for (auto kv = it.value().begin(); kv != it.value().end(); ++kv) c.tree[it.key()][kv.key()] = kv.value();
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_toml(const std::string& text) { return from_json(toml_to_json(text)); }

ExperimentConfig ExperimentConfig::from_file(const std::string& path) { return from_toml(read_text_file(path)); }

void ExperimentConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw InvalidInput("override must look like section.key=value: '" + assignment + "'");
  const std::string section = assignment.substr(0, dot);
  const std::string key = assignment.substr(dot + 1, eq - dot - 1);
  const std::string value = assignment.substr(eq + 1);
  if (std::find(std::begin(kSections), std::end(kSections), section) == std::end(kSections))
    throw InvalidInput("unknown config section '" + section + "'");
  if (key.empty()) throw InvalidInput("override needs a key");
  json v;
  try {
    v = node_to_json(toml::parse("v = " + value))["v"];
  } catch (const toml::parse_error&) {
    v = value;
  }
  if (section == "domain" && !domain_given) {
    // an explicit domain replaces the default interval
    if (key == "kind") tree["domain"] = json::object();
    domain_given = true;
  }
  tree[section][key] = v;
  if (section == "weight" && key == "expr") tree["weight"].erase("csv");
  if (section == "weight" && key == "csv") tree["weight"].erase("expr");
}

void ExperimentConfig::validate() const {
  (void)kernel();
  const std::string kind = domain_kind();
  const json& dom = tree["domain"];
  if (kind == "interval") {
    if (!(number_at(dom, "b", 1.0) > number_at(dom, "a", -1.0))) throw InvalidInput("interval needs a < b");
  } else if (kind == "box") {
    if (!dom.contains("lo") || !dom.contains("hi")) throw InvalidInput("box needs lo and hi");
    const Point lo = point_from(dom["lo"], "lo"), hi = point_from(dom["hi"], "hi");
    if (lo.dim != hi.dim) throw InvalidInput("box corners need equal dimension");
    for (int i = 0; i < lo.dim; ++i)
      if (!(hi[i] > lo[i])) throw InvalidInput("box needs lo < hi");
  } else if (kind == "disk" || kind == "circle") {
    if (!(number_at(dom, "R", 1.0) > 0.0)) throw InvalidInput("radius must be positive");
    if (kind == "circle" && !(number_at(dom, "n", 400) >= 3)) throw InvalidInput("circle needs n >= 3 arcs");
  } else if (kind == "ball_union_file") {
    if (!dom.contains("file") || !dom["file"].is_string()) throw InvalidInput("ball_union_file needs 'file'");
    if (!std::filesystem::exists(dom["file"].get<std::string>()))
      throw InvalidInput("ball union file not found: " + dom["file"].get<std::string>());
  } else {
    throw InvalidInput("unknown domain kind '" + kind + "'");
  }
  const json& w = tree["weight"];
  if (w.contains("csv")) {
    if (!w["csv"].is_string() || !std::filesystem::exists(w["csv"].get<std::string>()))
      throw InvalidInput("weight CSV not found");
  } else {
    if (!w.contains("expr") || !w["expr"].is_string()) throw InvalidInput("weight needs expr or csv");
    (void)WeightExpr::parse(w["expr"].get<std::string>());
  }
  if (!(solver_h() > 0.0)) throw InvalidInput("solver.grid_h must be positive");
  if (!(solver_tol() > 0.0)) throw InvalidInput("solver.tol must be positive");
  if (solver_max_iter() < 1) throw InvalidInput("solver.max_iter must be positive");
  if (!tree["output"]["dir"].is_string()) throw InvalidInput("output.dir must be a string");
  if (!tree["output"]["formats"].is_array()) throw InvalidInput("output.formats must be a list");
}

KernelConfig ExperimentConfig::kernel() const {
  const json& k = tree["kernel"];
  if (!k.value("d", json(2)).is_number_integer()) throw InvalidInput("kernel.d must be an integer");
  return KernelConfig(k.value("d", 2), number_at(k, "alpha", 2.0));
}

std::string ExperimentConfig::domain_kind() const {
  const json& dom = tree["domain"];
  if (!dom.contains("kind") || !dom["kind"].is_string()) throw InvalidInput("domain.kind must be a string");
  return dom["kind"].get<std::string>();
}

GridPtr ExperimentConfig::domain_grid() const {
  const std::string kind = domain_kind();
  const json& dom = tree["domain"];
  const double h = solver_h();
  if (kind == "interval") return share(GridSet::interval(number_at(dom, "a", -1.0), number_at(dom, "b", 1.0), h));
  if (kind == "box") return share(GridSet::box(point_from(dom.at("lo"), "lo"), point_from(dom.at("hi"), "hi"), h));
  const Point center = dom.contains("center") ? point_from(dom["center"], "center") : Point{0.0, 0.0};
  if (kind == "disk") return share(GridSet::ball(center, number_at(dom, "R", 1.0), h));
  if (kind == "circle")
    return share(GridSet::circle(center, number_at(dom, "R", 1.0), static_cast<int>(number_at(dom, "n", 400))));
  if (kind == "ball_union_file") {
    const BallUnionMeasure mu = *ball_union();
    if (mu.support_box) return share(GridSet::box(mu.support_box->first, mu.support_box->second, h));
    const auto [lo, hi] = mu.grid()->bounding_box();
    return share(GridSet::box(lo, hi, h));
  }
  throw InvalidInput("unknown domain kind '" + kind + "'");
}

std::optional<BallUnionMeasure> ExperimentConfig::ball_union() const {
  if (domain_kind() != "ball_union_file") return std::nullopt;
  return read_ball_union(tree["domain"].at("file").get<std::string>());
}

WeightFunction ExperimentConfig::weight() const {
  const json& w = tree["weight"];
  if (w.contains("csv")) return csv_weight(w["csv"].get<std::string>());
  return WeightExpr::parse(w.value("expr", std::string("0"))).function();
}

std::string ExperimentConfig::weight_text() const {
  const json& w = tree["weight"];
  if (w.contains("csv")) return "csv:" + w["csv"].get<std::string>();
  return w.value("expr", std::string("0"));
}

double ExperimentConfig::solver_h() const {
  const json& s = tree["solver"];
  if (s.contains("grid_h")) return number_at(s, "grid_h", 1e-3);
  const std::string kind = domain_kind();
  return kind == "interval" ? 1e-3 : 0.02;
}

double ExperimentConfig::solver_tol() const { return number_at(tree["solver"], "tol", 1e-6); }
int ExperimentConfig::solver_max_iter() const { return static_cast<int>(number_at(tree["solver"], "max_iter", 20000)); }
double ExperimentConfig::solver_anneal() const { return number_at(tree["solver"], "anneal", 1.0); }

std::string ExperimentConfig::output_dir() const { return tree["output"].value("dir", std::string("out")); }

bool ExperimentConfig::wants(const std::string& format) const {
  for (const json& f : tree["output"]["formats"])
    if (f.is_string() && f.get<std::string>() == format) return true;
  return false;
}

std::uint64_t ExperimentConfig::seed() const {
  const json& r = tree["run"];
  if (!r.contains("seed")) return 1;
  if (!r["seed"].is_number_integer()) throw InvalidInput("run.seed must be an integer");
  return r["seed"].get<std::uint64_t>();
}

bool ExperimentConfig::has_run(const std::string& key) const { return tree["run"].contains(key); }

double ExperimentConfig::run_double(const std::string& key, double def) const {
  return number_at(tree["run"], key.c_str(), def);
}

int ExperimentConfig::run_int(const std::string& key, int def) const {
  const json& r = tree["run"];
  if (!r.contains(key)) return def;
  if (!r[key].is_number_integer()) throw InvalidInput("run." + key + " must be an integer");
  return r[key].get<int>();
}

std::string ExperimentConfig::run_string(const std::string& key, const std::string& def) const {
  const json& r = tree["run"];
  if (!r.contains(key)) return def;
  if (!r[key].is_string()) throw InvalidInput("run." + key + " must be a string");
  return r[key].get<std::string>();
}

std::vector<double> ExperimentConfig::run_list(const std::string& key, const std::vector<double>& def) const {
  const json& r = tree["run"];
  if (!r.contains(key)) return def;
  const json& v = r[key];
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw InvalidInput("run." + key + " must be a list of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw InvalidInput("run." + key + " must be a list of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace potlab
