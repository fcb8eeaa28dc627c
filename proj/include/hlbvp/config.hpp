#ifndef HLBVP_CONFIG_HPP
#define HLBVP_CONFIG_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hlbvp/kernel.hpp"
#include "hlbvp/model.hpp"

namespace hlbvp::config {

// Line-oriented "key = value" document with [section] headers. Full-line
// comments start with '#' or ';'. Unknown sections or keys are errors;
// missing optional sections fall back to defaults.
struct ConfigDocument {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& section) const { return sections.count(section) != 0; }
  const std::string* find(const std::string& section, const std::string& key) const;
};

ConfigDocument parse_config_text(const std::string& text);
ConfigDocument load_config_file(const std::string& path);

struct SolverSettings {
  std::optional<double> t_max;
  std::optional<int> nodes;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<double> damping;
};

struct SearchSettings {
  std::optional<double> r_min;
  std::optional<double> r_max;
};

struct Setup {
  model::MultipointProblem problem;
  std::optional<model::BoundFamily> bounds;
  std::optional<model::BracketPair> bracket;
  double k = 0.0;
  double M = 0.0;
  kernel::KernelMode mode = kernel::KernelMode::as_printed;
  SolverSettings solver;
  SearchSettings search;
};

// Validates section/key names, parses numbers, lists and quoted expressions.
// Throws ConfigError (missing/unknown sections and keys, malformed values)
// and ParseError for bad embedded expressions.
Setup make_setup(const ConfigDocument& doc);

}  // namespace hlbvp::config

#endif
