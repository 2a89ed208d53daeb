#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "potlab/core/functionals.hpp"

namespace potlab {

/// Experiment description assembled from defaults, a TOML file and
/// command-line overrides. The resolved tree is echoed into every report.
struct ExperimentConfig {
  nlohmann::json tree;
  /// Whether the domain section came from the user (commands with their own
  /// natural domain use it only then).
  bool domain_given = false;

  static ExperimentConfig defaults();
  /// Parse TOML text; unknown sections are rejected.
  static ExperimentConfig from_toml(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_json(const nlohmann::json& j);

  /// section.key=value, the value read as a TOML literal (bare words become strings).
  void apply_override(const std::string& assignment);
  /// Checks types, kernel validity, referenced files and the weight expression.
  void validate() const;

  KernelConfig kernel() const;
  std::string domain_kind() const;
  /// Cells of the domain; for ball-union files the lattice of the support box.
  GridPtr domain_grid() const;
  /// The ball-union file of the domain, if that is the domain kind.
  std::optional<BallUnionMeasure> ball_union() const;
  WeightFunction weight() const;
  std::string weight_text() const;

  double solver_h() const;
  double solver_tol() const;
  int solver_max_iter() const;
  double solver_anneal() const;

  std::string output_dir() const;
  bool wants(const std::string& format) const;
  std::uint64_t seed() const;

  /// Typed access to run.<key> with a default.
  double run_double(const std::string& key, double def) const;
  int run_int(const std::string& key, int def) const;
  std::string run_string(const std::string& key, const std::string& def) const;
  std::vector<double> run_list(const std::string& key, const std::vector<double>& def) const;
  bool has_run(const std::string& key) const;
};

/// TOML document as JSON (integers stay integers, dates become strings).
nlohmann::json toml_to_json(const std::string& text);

}  // namespace potlab
