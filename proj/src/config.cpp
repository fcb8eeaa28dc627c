#include "hlbvp/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace hlbvp::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

const std::map<std::string, std::set<std::string>> kSchema = {
    {"problem", {"alphas", "xis", "f"}},
    {"bounds", {"kind", "phi"}},
    {"bracket", {"alpha", "beta"}},
    {"shift", {"k", "M", "mode"}},
    {"solver", {"t_max", "nodes", "tol", "max_iter", "damping"}},
    {"search", {"r_min", "r_max"}},
};

double parse_number(const std::string& section, const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("[" + section + "] " + key + ": not a number: '" + v + "'");
  return x;
}

int parse_int(const std::string& section, const std::string& key, const std::string& v) {
  const double x = parse_number(section, key, v);
  const int i = static_cast<int>(x);
  if (i != x) throw ConfigError("[" + section + "] " + key + ": not an integer: '" + v + "'");
  return i;
}

std::vector<double> parse_list(const std::string& section, const std::string& key,
                               const std::string& v) {
  if (!v.empty() && v.back() == ',')
    throw ConfigError("[" + section + "] " + key + ": trailing comma");
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw ConfigError("[" + section + "] " + key + ": empty list entry");
    out.push_back(parse_number(section, key, item));
  }
  if (out.empty()) throw ConfigError("[" + section + "] " + key + ": empty list");
  return out;
}

std::string unquote(const std::string& section, const std::string& key, const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  if (!v.empty() && (v.front() == '"' || v.back() == '"'))
    throw ConfigError("[" + section + "] " + key + ": unbalanced quotes");
  return v;  // bare expressions are accepted too
}

}  // namespace

const std::string* ConfigDocument::find(const std::string& section, const std::string& key) const {
  auto s = sections.find(section);
  if (s == sections.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

ConfigDocument parse_config_text(const std::string& text) {
  ConfigDocument doc;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!kSchema.count(section))
        throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      doc.sections[section];
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!kSchema.at(section).count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key +
                        "' in section [" + section + "]");
    if (doc.sections[section].count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    doc.sections[section][key] = value;
  }
  return doc;
}

ConfigDocument load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

Setup make_setup(const ConfigDocument& doc) {
  Setup setup;

  if (!doc.has("problem")) throw ConfigError("missing required section [problem]");
  if (!doc.has("shift")) throw ConfigError("missing required section [shift]");

  auto require = [&](const std::string& section, const std::string& key) -> const std::string& {
    const std::string* v = doc.find(section, key);
    if (!v) throw ConfigError("missing key '" + key + "' in section [" + section + "]");
    return *v;
  };

  setup.problem.alphas = parse_list("problem", "alphas", require("problem", "alphas"));
  setup.problem.xis = parse_list("problem", "xis", require("problem", "xis"));
  setup.problem.f = expr::parse(unquote("problem", "f", require("problem", "f")), {"t", "x", "y"});

  if (doc.has("bounds")) {
    model::BoundFamily bf;
    const std::string kind = require("bounds", "kind");
    if (kind == "L1")
      bf.kind = model::BoundKind::L1;
    else if (kind == "Linf")
      bf.kind = model::BoundKind::Linf;
    else
      throw ConfigError("[bounds] kind must be L1 or Linf, got '" + kind + "'");
    bf.phi = expr::parse(unquote("bounds", "phi", require("bounds", "phi")), {"t", "r"});
    setup.bounds = std::move(bf);
  }

  if (doc.has("bracket")) {
    model::BracketPair br;
    br.alpha_low = expr::parse(unquote("bracket", "alpha", require("bracket", "alpha")), {"t"});
    br.beta_up = expr::parse(unquote("bracket", "beta", require("bracket", "beta")), {"t"});
    setup.bracket = std::move(br);
  }

  setup.k = parse_number("shift", "k", require("shift", "k"));
  setup.M = parse_number("shift", "M", require("shift", "M"));
  if (const std::string* mode = doc.find("shift", "mode")) {
    if (*mode == "as_printed")
      setup.mode = kernel::KernelMode::as_printed;
    else if (*mode == "derived")
      setup.mode = kernel::KernelMode::derived;
    else
      throw ConfigError("[shift] mode must be as_printed or derived, got '" + *mode + "'");
  }

  if (doc.has("solver")) {
    if (const auto* v = doc.find("solver", "t_max")) setup.solver.t_max = parse_number("solver", "t_max", *v);
    if (const auto* v = doc.find("solver", "nodes")) setup.solver.nodes = parse_int("solver", "nodes", *v);
    if (const auto* v = doc.find("solver", "tol")) setup.solver.tol = parse_number("solver", "tol", *v);
    if (const auto* v = doc.find("solver", "max_iter")) setup.solver.max_iter = parse_int("solver", "max_iter", *v);
    if (const auto* v = doc.find("solver", "damping")) setup.solver.damping = parse_number("solver", "damping", *v);
  }
  if (doc.has("search")) {
    if (const auto* v = doc.find("search", "r_min")) setup.search.r_min = parse_number("search", "r_min", *v);
    if (const auto* v = doc.find("search", "r_max")) setup.search.r_max = parse_number("search", "r_max", *v);
  }
  return setup;
}

}  // namespace hlbvp::config
