#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "degenctrl/catalog.hpp"
#include "degenctrl/errors.hpp"
#include "degenctrl/nonlinear.hpp"

namespace degenctrl::cli {

using nlohmann::json;

namespace {

const std::vector<std::pair<std::string, ExperimentKind>>& kind_names() {
  static const std::vector<std::pair<std::string, ExperimentKind>> names{
      {"forward-convergence", ExperimentKind::forward_convergence},
      {"carleman-sweep", ExperimentKind::carleman_sweep},
      {"observability", ExperimentKind::observability},
      {"hum", ExperimentKind::hum},
      {"weighted", ExperimentKind::weighted},
      {"semilinear", ExperimentKind::semilinear},
      {"nonlocal", ExperimentKind::nonlocal},
      {"window-study", ExperimentKind::window_study},
  };
  return names;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void reject_unknown(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(join(path, key) + ": unknown field");
  }
}

const json* member(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& object_at(const json& obj, const std::string& key, const std::string& path) {
  static const json empty = json::object();
  const json* v = member(obj, key);
  if (!v) return empty;
  if (!v->is_object()) throw ConfigError(join(path, key) + ": expected an object");
  return *v;
}

void read(const json& obj, const std::string& key, const std::string& path, double& out) {
  if (const json* v = member(obj, key)) {
    if (!v->is_number()) throw ConfigError(join(path, key) + ": expected a number");
    out = v->get<double>();
  }
}

void read(const json& obj, const std::string& key, const std::string& path, int& out) {
  if (const json* v = member(obj, key)) {
    if (!v->is_number_integer()) throw ConfigError(join(path, key) + ": expected an integer");
    out = v->get<int>();
  }
}

void read(const json& obj, const std::string& key, const std::string& path, bool& out) {
  if (const json* v = member(obj, key)) {
    if (!v->is_boolean()) throw ConfigError(join(path, key) + ": expected true or false");
    out = v->get<bool>();
  }
}

void read(const json& obj, const std::string& key, const std::string& path, std::string& out) {
  if (const json* v = member(obj, key)) {
    if (!v->is_string()) throw ConfigError(join(path, key) + ": expected a string");
    out = v->get<std::string>();
  }
}

void read(const json& obj, const std::string& key, const std::string& path, std::uint64_t& out) {
  if (const json* v = member(obj, key)) {
    if (!v->is_number_unsigned()) throw ConfigError(join(path, key) + ": expected a nonnegative integer");
    out = v->get<std::uint64_t>();
  }
}

void read(const json& obj, const std::string& key, const std::string& path, std::vector<double>& out) {
  if (const json* v = member(obj, key)) {
    if (v->is_number()) {
      out = {v->get<double>()};
      return;
    }
    if (!v->is_array()) throw ConfigError(join(path, key) + ": expected a number or a list of numbers");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) throw ConfigError(join(path, key) + "[" + std::to_string(i) + "]: expected a number");
      out.push_back((*v)[i].get<double>());
    }
  }
}

void read(const json& obj, const std::string& key, const std::string& path, std::vector<std::size_t>& out) {
  if (const json* v = member(obj, key)) {
    if (v->is_number_unsigned()) {
      out = {v->get<std::size_t>()};
      return;
    }
    if (!v->is_array()) throw ConfigError(join(path, key) + ": expected a list of positive integers");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number_unsigned()) {
        throw ConfigError(join(path, key) + "[" + std::to_string(i) + "]: expected a positive integer");
      }
      out.push_back((*v)[i].get<std::size_t>());
    }
  }
}

Interval read_interval(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(where + ": expected [a, b]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

void read_choice(const json& obj, const std::string& key, const std::string& path, Choice& out,
                 const char* scale_key = "scale") {
  const json* v = member(obj, key);
  if (!v) return;
  const std::string where = join(path, key);
  if (v->is_string()) {
    out.name = v->get<std::string>();
    return;
  }
  if (!v->is_object()) throw ConfigError(where + ": expected a catalog name or {\"name\": ..., \"" + scale_key + "\": ...}");
  reject_unknown(*v, where, {"name", scale_key});
  read(*v, "name", where, out.name);
  read(*v, scale_key, where, out.scale);
}

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void check_name(const std::string& field, const std::string& name, const std::vector<std::string>& known) {
  for (const auto& k : known) {
    if (k == name) return;
  }
  std::string list;
  for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
  throw ConfigError(field + ": unknown name '" + name + "' (known: " + list + ")");
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [name, k] : kind_names()) {
    if (k == kind) return name;
  }
  return "unknown";
}

ProblemSpec ExperimentConfig::problem() const {
  ProblemSpec p;
  p.alpha = alpha;
  p.horizon = horizon;
  p.omega = omega;
  p.geometric = geometric;
  p.b0 = catalog::coefficient(b0.name, b0.scale);
  p.b1 = catalog::coefficient(b1.name, b1.scale);
  p.u0 = catalog::profile(u0.name, u0.scale);
  return p;
}

std::size_t ExperimentConfig::steps_for(std::size_t index) const {
  return steps.empty() ? sizes.at(index) : steps.at(index);
}

double ExperimentConfig::effective_picard_tol() const {
  if (picard_tol > 0.0) return picard_tol;
  return kind == ExperimentKind::nonlocal ? NonlocalConfig{}.picard.tol : PicardConfig{}.tol;
}

json ExperimentConfig::resolved() const {
  const auto choice = [](const Choice& c, const char* scale_key = "scale") {
    return json{{"name", c.name}, {scale_key, c.scale}};
  };
  json win = json::array();
  for (const auto& w : windows) win.push_back({w.a, w.b});
  return json{
      {"experiment", to_string(kind)},
      {"problem",
       {{"alpha", alpha},
        {"horizon", horizon},
        {"omega", {omega.a, omega.b}},
        {"geometric", geometric},
        {"b0", choice(b0)},
        {"b1", choice(b1)},
        {"u0", choice(u0)}}},
      {"grid", {{"sizes", sizes}, {"steps", steps}, {"grading", grading}}},
      {"carleman", {{"s", s_values}, {"lambda", lambda_values}, {"family", family}, {"draws", draws}}},
      {"hum", {{"epsilon", epsilons}, {"cg_tol", hum_cg_tol}, {"cg_maxit", hum_cg_maxit}}},
      {"weighted", {{"log_cap", log_cap}, {"cg_tol", weighted_cg_tol}, {"cg_maxit", weighted_cg_maxit}}},
      {"semilinear", {{"g", choice(g)}}},
      {"nonlocal", {{"ell", choice(ell, "slope")}, {"radius", radius}}},
      {"picard", {{"tol", effective_picard_tol()}, {"max_iterations", picard_max_iterations}}},
      {"windows", win},
      {"output", output},
      {"seed", seed},
      {"dump_fields", dump_fields},
  };
}

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    std::string msg = e.what();
    const auto cut = msg.find("]: ");
    if (cut != std::string::npos) msg = msg.substr(cut + 3);
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg);
  }
  if (!root.is_object()) throw ConfigError("top level: expected an object");
  reject_unknown(root, "", {"experiment", "problem", "grid", "carleman", "hum", "weighted", "semilinear", "nonlocal",
                            "picard", "windows", "output", "seed", "dump_fields"});

  ExperimentConfig cfg;
  const json* kind = member(root, "experiment");
  if (!kind || !kind->is_string()) throw ConfigError("experiment: required string");
  bool known = false;
  for (const auto& [name, k] : kind_names()) {
    if (name == kind->get<std::string>()) {
      cfg.kind = k;
      known = true;
    }
  }
  if (!known) {
    std::string list;
    for (const auto& [name, k] : kind_names()) list += (list.empty() ? "" : ", ") + name;
    throw ConfigError("experiment: unknown kind '" + kind->get<std::string>() + "' (known: " + list + ")");
  }

  const json& problem = object_at(root, "problem", "");
  reject_unknown(problem, "problem", {"alpha", "horizon", "omega", "geometric", "b0", "b1", "u0"});
  read(problem, "alpha", "problem", cfg.alpha);
  read(problem, "horizon", "problem", cfg.horizon);
  if (const json* w = member(problem, "omega")) cfg.omega = read_interval(*w, "problem.omega");
  read(problem, "geometric", "problem", cfg.geometric);
  read_choice(problem, "b0", "problem", cfg.b0);
  read_choice(problem, "b1", "problem", cfg.b1);
  read_choice(problem, "u0", "problem", cfg.u0);

  const json& grid = object_at(root, "grid", "");
  reject_unknown(grid, "grid", {"sizes", "steps", "grading"});
  read(grid, "sizes", "grid", cfg.sizes);
  read(grid, "steps", "grid", cfg.steps);
  read(grid, "grading", "grid", cfg.grading);

  const json& carleman = object_at(root, "carleman", "");
  reject_unknown(carleman, "carleman", {"s", "lambda", "family", "draws"});
  read(carleman, "s", "carleman", cfg.s_values);
  if (cfg.kind == ExperimentKind::weighted || cfg.kind == ExperimentKind::nonlocal) cfg.lambda_values = {1.0};
  read(carleman, "lambda", "carleman", cfg.lambda_values);
  read(carleman, "family", "carleman", cfg.family);
  read(carleman, "draws", "carleman", cfg.draws);

  const json& hum = object_at(root, "hum", "");
  reject_unknown(hum, "hum", {"epsilon", "cg_tol", "cg_maxit"});
  read(hum, "epsilon", "hum", cfg.epsilons);
  read(hum, "cg_tol", "hum", cfg.hum_cg_tol);
  read(hum, "cg_maxit", "hum", cfg.hum_cg_maxit);

  const json& weighted = object_at(root, "weighted", "");
  reject_unknown(weighted, "weighted", {"log_cap", "cg_tol", "cg_maxit"});
  read(weighted, "log_cap", "weighted", cfg.log_cap);
  read(weighted, "cg_tol", "weighted", cfg.weighted_cg_tol);
  read(weighted, "cg_maxit", "weighted", cfg.weighted_cg_maxit);

  const json& semilinear = object_at(root, "semilinear", "");
  reject_unknown(semilinear, "semilinear", {"g"});
  read_choice(semilinear, "g", "semilinear", cfg.g);

  const json& nonlocal = object_at(root, "nonlocal", "");
  reject_unknown(nonlocal, "nonlocal", {"ell", "radius"});
  read_choice(nonlocal, "ell", "nonlocal", cfg.ell, "slope");
  read(nonlocal, "radius", "nonlocal", cfg.radius);

  const json& picard = object_at(root, "picard", "");
  reject_unknown(picard, "picard", {"tol", "max_iterations"});
  read(picard, "tol", "picard", cfg.picard_tol);
  read(picard, "max_iterations", "picard", cfg.picard_max_iterations);

  if (const json* w = member(root, "windows")) {
    if (!w->is_array()) throw ConfigError("windows: expected a list of [a, b] pairs");
    cfg.windows.clear();
    for (std::size_t i = 0; i < w->size(); ++i) {
      cfg.windows.push_back(read_interval((*w)[i], "windows[" + std::to_string(i) + "]"));
    }
  }
  read(root, "output", "", cfg.output);
  read(root, "seed", "", cfg.seed);
  read(root, "dump_fields", "", cfg.dump_fields);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

void validate_config(const ExperimentConfig& cfg) {
  ProblemSpec spec;
  spec.alpha = cfg.alpha;
  spec.horizon = cfg.horizon;
  spec.omega = cfg.omega;
  spec.geometric = cfg.geometric && cfg.kind != ExperimentKind::window_study;
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }

  check_name("problem.b0", cfg.b0.name, catalog::coefficient_names());
  check_name("problem.b1", cfg.b1.name, catalog::coefficient_names());
  check_name("problem.u0", cfg.u0.name, catalog::profile_names());
  check_name("semilinear.g", cfg.g.name, catalog::nonlinearity_names());
  check_name("nonlocal.ell", cfg.ell.name, catalog::nonlocal_names());
  check_name("carleman.family", cfg.family, {"sigma", "a"});

  require(!cfg.sizes.empty(), "grid.sizes: must not be empty");
  for (std::size_t n : cfg.sizes) require(n >= 2, "grid.sizes: every size must be at least 2");
  require(cfg.steps.empty() || cfg.steps.size() == cfg.sizes.size(), "grid.steps: must match grid.sizes in length");
  for (std::size_t m : cfg.steps) require(m >= 1, "grid.steps: every entry must be positive");
  require(cfg.grading >= 1.0, "grid.grading: must be >= 1");

  require(!cfg.s_values.empty() && !cfg.lambda_values.empty(), "carleman: s and lambda lists must not be empty");
  for (double s : cfg.s_values) require(s > 0.0, "carleman.s: values must be positive");
  for (double l : cfg.lambda_values) require(l > 0.0, "carleman.lambda: values must be positive");
  require(cfg.draws > 0, "carleman.draws: must be positive");

  require(!cfg.epsilons.empty(), "hum.epsilon: must not be empty");
  for (double e : cfg.epsilons) require(e > 0.0, "hum.epsilon: values must be positive");
  require(cfg.hum_cg_tol > 0.0 && cfg.hum_cg_tol < 1.0, "hum.cg_tol: must lie in (0, 1)");
  require(cfg.hum_cg_maxit > 0, "hum.cg_maxit: must be positive");
  require(cfg.weighted_cg_tol > 0.0 && cfg.weighted_cg_tol < 1.0, "weighted.cg_tol: must lie in (0, 1)");
  require(cfg.weighted_cg_maxit > 0, "weighted.cg_maxit: must be positive");
  require(cfg.picard_max_iterations > 0, "picard.max_iterations: must be positive");

  if (cfg.kind == ExperimentKind::weighted || cfg.kind == ExperimentKind::nonlocal) {
    for (double l : cfg.lambda_values) {
      require(cfg.log_cap > 4.0 * l, "weighted.log_cap: must exceed 4 lambda");
    }
  }
  if (cfg.kind == ExperimentKind::semilinear) {
    for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
      require(cfg.steps_for(i) % 4 == 0, "grid.steps: semilinear runs need m divisible by 4");
    }
  }
  if (cfg.kind == ExperimentKind::forward_convergence) {
    require(cfg.sizes.size() >= 2, "grid.sizes: convergence needs at least two sizes");
    for (std::size_t i = 1; i < cfg.sizes.size(); ++i) {
      require(cfg.sizes[i] == 2 * cfg.sizes[i - 1], "grid.sizes: convergence sizes must double");
    }
  }
  if (cfg.kind == ExperimentKind::window_study) {
    require(!cfg.windows.empty(), "windows: must not be empty");
    for (std::size_t i = 0; i < cfg.windows.size(); ++i) {
      try {
        validate_interval(cfg.windows[i]);
      } catch (const InvalidArgument& e) {
        throw ConfigError("windows[" + std::to_string(i) + "]: " + e.what());
      }
    }
  }
}

}  // namespace degenctrl::cli
