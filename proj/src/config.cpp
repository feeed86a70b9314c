#include "kschemo/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "kschemo/error.hpp"
#include "kschemo/expression.hpp"

namespace kschemo {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || std::isnan(v)) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  return v;
}

int to_int(const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected an integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

Point to_point(const std::string& s) {
  const auto tok = split_ws(s);
  if (tok.size() != 2) throw std::invalid_argument("expected 'x y', got '" + s + "'");
  return {to_double(tok[0]), to_double(tok[1])};
}

std::string point_text(Point p) { return format_double(p.x) + " " + format_double(p.y); }

ModelPreset to_model(const std::string& s) {
  if (s == "full") return ModelPreset::full;
  if (s == "classical") return ModelPreset::classical;
  if (s == "custom") return ModelPreset::custom;
  throw std::invalid_argument("unknown model preset '" + s + "' (full, classical, custom)");
}

std::string model_text(ModelPreset m) {
  switch (m) {
    case ModelPreset::full: return "full";
    case ModelPreset::classical: return "classical";
    case ModelPreset::custom: return "custom";
  }
  return "?";
}

AdaptMode to_adapt(const std::string& s) {
  if (s == "none") return AdaptMode::none;
  if (s == "halving") return AdaptMode::halving;
  throw std::invalid_argument("unknown adapt mode '" + s + "' (none, halving)");
}

struct KeyDef {
  const char* section;
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
  bool required = false;
};

#define KS_DOUBLE(sec, field)                                                   \
  KeyDef {                                                                      \
    sec, #field, [](RunConfig& c, const std::string& v) { c.field = to_double(v); }, \
        [](const RunConfig& c) { return format_double(c.field); }               \
  }
#define KS_INT(sec, field)                                                      \
  KeyDef {                                                                      \
    sec, #field, [](RunConfig& c, const std::string& v) { c.field = to_int(v); },    \
        [](const RunConfig& c) { return std::to_string(c.field); }              \
  }
#define KS_BOOL(sec, field)                                                     \
  KeyDef {                                                                      \
    sec, #field, [](RunConfig& c, const std::string& v) { c.field = to_bool(v); },   \
        [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); } \
  }
#define KS_STRING(sec, field)                                                   \
  KeyDef {                                                                      \
    sec, #field, [](RunConfig& c, const std::string& v) { c.field = unquote(v); },   \
        [](const RunConfig& c) { return c.field; }                              \
  }
#define KS_INITIAL(field)                                                              \
  KeyDef {                                                                             \
    "initial", #field, [](RunConfig& c, const std::string& v) { c.field = InitialSpec::parse(v); }, \
        [](const RunConfig& c) { return c.field.to_string(); }                         \
  }

const std::vector<KeyDef>& key_table() {
  static const std::vector<KeyDef> table = [] {
    std::vector<KeyDef> t{
        {"domain", "domain", [](RunConfig& c, const std::string& v) { c.domain = parse_domain_preset(v); },
         [](const RunConfig& c) { return to_string(c.domain); }, true},
        {"domain", "vertices",
         [](RunConfig& c, const std::string& v) {
           c.vertices.clear();
           std::stringstream ss(v);
           for (std::string item; std::getline(ss, item, ',');) {
             if (!trim(item).empty()) c.vertices.push_back(to_point(trim(item)));
           }
         },
         [](const RunConfig& c) {
           std::string s;
           for (std::size_t i = 0; i < c.vertices.size(); ++i) {
             s += (i ? ", " : "") + point_text(c.vertices[i]);
           }
           return s;
         }},
        KS_DOUBLE("domain", h),
        KS_INT("domain", refinements),
        KS_DOUBLE("domain", grading_ratio),
        KS_BOOL("domain", require_nonobtuse),
        {"model", "model", [](RunConfig& c, const std::string& v) { c.model = to_model(v); },
         [](const RunConfig& c) { return model_text(c.model); }, true},
        KS_DOUBLE("model", chi),
        KS_DOUBLE("model", r1),
        KS_DOUBLE("model", r_neg1),
        KS_DOUBLE("model", r2),
        KS_DOUBLE("model", c_f),
        KS_DOUBLE("model", c_g),
        KS_DOUBLE("model", k_deg),
        KS_DOUBLE("model", kappa_floor),
        KS_DOUBLE("model", k_v),
        KS_DOUBLE("model", k_p),
        KS_DOUBLE("model", k_w),
        KS_DOUBLE("model", delta),
        KS_BOOL("model", cutoff),
        KS_STRING("model", R1),
        KS_STRING("model", R2),
        KS_STRING("model", R3),
        KS_STRING("model", R4),
        KS_STRING("model", kappa),
        KS_STRING("model", sigma),
        KS_INITIAL(u0),
        KS_INITIAL(v0),
        KS_INITIAL(p0),
        KS_INITIAL(w0),
        KS_DOUBLE("time", tau0),
        KS_DOUBLE("time", tau_min),
        KS_DOUBLE("time", t_end),
        KS_INT("time", picard_iters),
        KS_DOUBLE("time", picard_tol),
        KS_DOUBLE("time", blowup_linf),
        KS_DOUBLE("time", solver_tol),
        KS_INT("time", solver_max_iter),
        {"time", "adapt", [](RunConfig& c, const std::string& v) { c.adapt = to_adapt(v); },
         [](const RunConfig& c) { return std::string(c.adapt == AdaptMode::none ? "none" : "halving"); }},
        KS_DOUBLE("time", max_rel_change),
        KS_BOOL("time", lumped_mass),
        KS_STRING("output", csv),
        KS_STRING("output", snapshot_dir),
        KS_INT("output", snapshot_every),
        {"output", "corner",
         [](RunConfig& c, const std::string& v) {
           if (v == "auto") {
             c.corner.reset();
           } else {
             c.corner = to_point(v);
           }
         },
         [](const RunConfig& c) { return c.corner ? point_text(*c.corner) : std::string("auto"); }},
        KS_DOUBLE("output", corner_radius),
    };
    for (auto& k : t) {
      if (std::string(k.name) == "t_end") k.required = true;
    }
    return t;
  }();
  return table;
}

#undef KS_DOUBLE
#undef KS_INT
#undef KS_BOOL
#undef KS_STRING
#undef KS_INITIAL

const KeyDef* find_key(const std::string& name) {
  for (const auto& k : key_table()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

const std::set<std::string> kSections{"domain", "model", "initial", "time", "output"};

const std::map<std::string, double> model_constants(const RunConfig& c) {
  return {{"chi", c.chi}, {"r1", c.r1},   {"r_neg1", c.r_neg1}, {"r2", c.r2},
          {"c_f", c.c_f}, {"c_g", c.c_g}, {"k_deg", c.k_deg}};
}

const std::vector<std::string> kFourVars{"u", "v", "p", "w"};
const std::vector<std::string> kTwoVars{"u", "v"};

}  // namespace

// ---------------------------------------------------------------------------

InitialSpec InitialSpec::parse(const std::string& text) {
  const auto tok = split_ws(text);
  if (tok.empty()) throw std::invalid_argument("empty initial condition");
  InitialSpec s;
  if (tok[0] == "constant") {
    if (tok.size() != 2) throw std::invalid_argument("expected 'constant <c>'");
    s.kind = Kind::constant;
    s.value = to_double(tok[1]);
  } else if (tok[0] == "gaussian") {
    if (tok.size() != 6) {
      throw std::invalid_argument("expected 'gaussian <x0> <y0> <width> <amplitude> <offset>'");
    }
    s.kind = Kind::gaussian;
    s.center = {to_double(tok[1]), to_double(tok[2])};
    s.width = to_double(tok[3]);
    s.amplitude = to_double(tok[4]);
    s.offset = to_double(tok[5]);
    if (!(s.width > 0.0)) throw std::invalid_argument("gaussian width must be positive");
  } else if (tok[0] == "file") {
    if (tok.size() != 2 && tok.size() != 3) throw std::invalid_argument("expected 'file <path> [u|v|p|w]'");
    s.kind = Kind::file;
    s.path = tok[1];
    if (tok.size() == 3) {
      s.column = tok[2];
      if (s.column != "u" && s.column != "v" && s.column != "p" && s.column != "w") {
        throw std::invalid_argument("file column must be one of u, v, p, w");
      }
    }
  } else {
    throw std::invalid_argument("unknown initial condition '" + tok[0] + "' (constant, gaussian, file)");
  }
  return s;
}

std::string InitialSpec::to_string() const {
  switch (kind) {
    case Kind::constant: return "constant " + format_double(value);
    case Kind::gaussian:
      return "gaussian " + format_double(center.x) + " " + format_double(center.y) + " " + format_double(width) +
             " " + format_double(amplitude) + " " + format_double(offset);
    case Kind::file: return "file " + path.string() + (column.empty() ? "" : " " + column);
  }
  return {};
}

std::vector<double> read_nodal_file(const std::filesystem::path& path, const std::string& column,
                                    std::size_t expected) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open nodal file '" + path.string() + "'");
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  bool snapshot = false;
  static const std::map<std::string, std::size_t> columns{{"u", 2}, {"v", 3}, {"p", 4}, {"w", 5}};
  const std::size_t col = columns.count(column) ? columns.at(column) : 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("t=", 0) == 0) {
      snapshot = true;
      continue;
    }
    const auto tok = split_ws(line);
    try {
      if (snapshot) {
        if (tok.size() != 6) throw std::invalid_argument("expected 'x y u v p w'");
        out.push_back(to_double(tok[col]));
      } else {
        if (tok.size() != 1) throw std::invalid_argument("expected one value per line");
        out.push_back(to_double(tok[0]));
      }
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, path.string() + ": " + e.what());
    }
  }
  if (out.size() != expected) {
    throw DimensionError("nodal file '" + path.string() + "' has " + std::to_string(out.size()) +
                         " values, mesh has " + std::to_string(expected) + " nodes");
  }
  return out;
}

ScalarField initial_condition(const InitialSpec& spec, const TriMesh& mesh, const std::string& default_column) {
  switch (spec.kind) {
    case InitialSpec::Kind::constant: return ScalarField(mesh, spec.value);
    case InitialSpec::Kind::gaussian: {
      std::vector<double> v(mesh.node_count());
      const double w2 = spec.width * spec.width;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Point d = mesh.nodes()[i] - spec.center;
        v[i] = spec.offset + spec.amplitude * std::exp(-dot(d, d) / w2);
      }
      return ScalarField(mesh, std::move(v));
    }
    case InitialSpec::Kind::file:
      return ScalarField(mesh, read_nodal_file(spec.path, spec.column.empty() ? default_column : spec.column,
                                               mesh.node_count()));
  }
  throw std::logic_error("unhandled initial condition kind");
}

// ---------------------------------------------------------------------------

void validate_config(const RunConfig& c) {
  const auto require = [](bool ok, const char* key, const std::string& what) {
    if (!ok) throw ConfigError(key, 0, what);
  };
  require(std::isfinite(c.h) && c.h > 0.0, "h", "must be positive");
  require(c.refinements >= 0, "refinements", "must be nonnegative");
  require(c.grading_ratio > 0.0 && c.grading_ratio <= 1.0, "grading_ratio", "must lie in (0, 1]");
  require(c.domain != DomainPreset::custom || c.vertices.size() >= 3, "vertices",
          "custom domain needs at least 3 vertices");
  require(std::isfinite(c.kappa_floor) && c.kappa_floor > 0.0, "kappa_floor",
          "must be strictly positive (the diffusion coefficient takes only positive values)");
  require(std::isfinite(c.chi), "chi", "must be finite");
  require(std::isfinite(c.r1) && c.r1 >= 0.0, "r1", "must be finite and nonnegative");
  require(std::isfinite(c.r_neg1) && c.r_neg1 >= 0.0, "r_neg1", "must be finite and nonnegative");
  require(std::isfinite(c.r2) && c.r2 >= 0.0, "r2", "must be finite and nonnegative");
  require(std::isfinite(c.c_f) && c.c_f >= 0.0, "c_f", "must be finite and nonnegative");
  require(std::isfinite(c.c_g) && c.c_g >= 0.0, "c_g", "must be finite and nonnegative");
  require(std::isfinite(c.k_deg) && c.k_deg >= 0.0, "k_deg", "must be finite and nonnegative");
  require(std::isfinite(c.k_v) && c.k_v > 0.0, "k_v", "must be positive");
  require(std::isfinite(c.k_p) && c.k_p > 0.0, "k_p", "must be positive");
  require(std::isfinite(c.k_w) && c.k_w > 0.0, "k_w", "must be positive");
  require(std::isfinite(c.delta) && c.delta > 0.0, "delta", "must be positive");
  const auto constants = model_constants(c);
  const auto compiles = [&](const std::string& text, const std::vector<std::string>& vars, const char* key) {
    try {
      Expression(text, vars, constants);
    } catch (const ParseError& e) {
      throw ConfigError(key, 0, e.what());
    }
  };
  compiles(c.R1, kFourVars, "R1");
  compiles(c.R2, kFourVars, "R2");
  compiles(c.R3, kFourVars, "R3");
  compiles(c.R4, kFourVars, "R4");
  compiles(c.kappa, kTwoVars, "kappa");
  compiles(c.sigma, kTwoVars, "sigma");
  require(std::isfinite(c.tau0) && c.tau0 > 0.0, "tau0", "must be positive");
  require(std::isfinite(c.tau_min) && c.tau_min > 0.0 && c.tau_min <= c.tau0, "tau_min",
          "must lie in (0, tau0]");
  require(std::isfinite(c.t_end) && c.t_end >= 0.0, "t_end", "must be nonnegative");
  require(c.picard_iters >= 0, "picard_iters", "must be nonnegative");
  require(c.picard_tol > 0.0, "picard_tol", "must be positive");
  require(c.blowup_linf > 0.0, "blowup_linf", "must be positive");
  require(c.solver_tol > 0.0 && c.solver_tol < 1.0, "solver_tol", "must lie in (0, 1)");
  require(c.solver_max_iter > 0, "solver_max_iter", "must be positive");
  require(c.max_rel_change > 0.0, "max_rel_change", "must be positive");
  require(c.snapshot_every >= 0, "snapshot_every", "must be nonnegative");
  require(std::isfinite(c.corner_radius) && c.corner_radius > 0.0, "corner_radius", "must be positive");
}

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::map<std::string, std::size_t> seen;
  std::string section;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line, line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.count(section)) throw ConfigError(section, line_no, "unknown section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const KeyDef* def = find_key(key);
    if (!def) throw ConfigError(key, line_no, "unknown key");
    if (!section.empty() && section != def->section) {
      throw ConfigError(key, line_no, std::string("belongs in section [") + def->section + "]");
    }
    if (!seen.emplace(key, line_no).second) throw ConfigError(key, line_no, "duplicate key");
    try {
      def->set(c, value);
    } catch (const ValidationError& e) {
      throw ConfigError(key, line_no, e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, line_no, e.what());
    }
  }
  for (const auto& k : key_table()) {
    if (k.required && !seen.count(k.name)) throw ConfigError(k.name, 0, "missing required key");
  }
  try {
    validate_config(c);
  } catch (const ConfigError& e) {
    const auto it = seen.find(e.key());
    if (it == seen.end()) throw;
    const std::string what = e.what();
    throw ConfigError(e.key(), it->second, what.substr(what.find(": ") + 2));
  }
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse_config(in);
}

std::string emit_config(const RunConfig& c) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : key_table()) {
    if (section != k.section) {
      if (!section.empty()) out << '\n';
      section = k.section;
      out << '[' << section << "]\n";
    }
    out << k.name << " = " << k.get(c) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

Scenario build_scenario(const RunConfig& c) {
  validate_config(c);
  PolygonalDomain domain = make_domain(c.domain, c.vertices);
  MeshOptions opts;
  opts.h_target = c.h;
  opts.require_nonobtuse = c.require_nonobtuse;
  const auto reentrant = domain.reentrant_corners();
  if (c.grading_ratio < 1.0 && !reentrant.empty()) opts.grading = Grading{reentrant, c.grading_ratio};
  auto meshed = triangulate(domain, opts);
  TriMesh mesh = std::move(meshed.mesh);
  for (int k = 0; k < c.refinements; ++k) mesh = refine_uniform(mesh);
  const bool nonobtuse = mesh.is_nonobtuse();

  CoefficientPair coefficients = CoefficientPair::classical(c.chi, c.kappa_floor);
  ReactionNetwork network = ReactionNetwork::none();
  switch (c.model) {
    case ModelPreset::full: {
      KineticParams k;
      k.r1 = c.r1;
      k.r_neg1 = c.r_neg1;
      k.r2 = c.r2;
      k.f = [cf = c.c_f](double) { return cf; };
      k.g = [cg = c.c_g](double, double) { return cg; };
      network = ReactionNetwork::full(std::move(k));
      break;
    }
    case ModelPreset::classical: {
      SimplifiedParams s;
      s.k = [kd = c.k_deg](double) { return kd; };
      s.f = [cf = c.c_f](double) { return cf; };
      network = ReactionNetwork::simplified(std::move(s));
      break;
    }
    case ModelPreset::custom: {
      const auto constants = model_constants(c);
      CustomReactions terms;
      const std::array<const std::string*, 4> texts{&c.R1, &c.R2, &c.R3, &c.R4};
      for (std::size_t i = 0; i < 4; ++i) {
        terms.terms[i] = [e = Expression(*texts[i], kFourVars, constants)](double u, double v, double p,
                                                                            double w) {
          const std::array<double, 4> x{u, v, p, w};
          return e(x);
        };
      }
      network = ReactionNetwork::custom(std::move(terms));
      const auto fn2 = [&](const std::string& text) -> Fn2 {
        return [e = Expression(text, kTwoVars, constants)](double u, double v) {
          const std::array<double, 2> x{u, v};
          return e(x);
        };
      };
      coefficients = {fn2(c.kappa), fn2(c.sigma), c.kappa_floor, false};
      break;
    }
  }

  StepConfig step;
  step.tau0 = c.tau0;
  step.tau_min = c.tau_min;
  step.t_end = c.t_end;
  step.picard_iters = c.picard_iters;
  step.picard_tol = c.picard_tol;
  step.blowup_linf = c.blowup_linf;
  step.diffusion = {c.k_v, c.k_p, c.k_w};
  step.solver_tol = c.solver_tol;
  step.solver_max_iter = c.solver_max_iter;
  step.adapt = c.adapt;
  step.max_rel_change = c.max_rel_change;
  step.lumped_mass = c.lumped_mass;
  step.apply_cutoff = c.cutoff;
  step.cutoff_delta = c.delta;

  SimState initial{0.0, initial_condition(c.u0, mesh, "u"), initial_condition(c.v0, mesh, "v"),
                   initial_condition(c.p0, mesh, "p"), initial_condition(c.w0, mesh, "w")};

  Point corner = domain.vertices().front();
  if (c.corner) {
    corner = *c.corner;
  } else if (!reentrant.empty()) {
    corner = domain.vertices()[reentrant.front()];
  }
  return {std::move(domain), std::move(mesh), nonobtuse, std::move(coefficients), std::move(network),
          step, std::move(initial), corner};
}

int exit_code(RunReason reason) {
  switch (reason) {
    case RunReason::reached_t_end: return kExitOk;
    case RunReason::blowup_detected: return kExitBlowup;
    case RunReason::step_underflow: return kExitUnderflow;
    case RunReason::solver_failure: return kExitSolverFailure;
  }
  return kExitSolverFailure;
}

std::string csv_row(const DiagRecord& r) {
  std::string s = std::to_string(r.step);
  for (const double v : {r.t, r.tau, r.mass_u, r.mass_p_plus_w, r.u.min, r.u.max, r.v.min, r.v.max, r.p.min,
                         r.p.max, r.w.min, r.w.max, r.corner_fraction, r.margin}) {
    s += ',';
    s += format_double(v);
  }
  s += r.clamp_active ? ",1" : ",0";
  s += r.picard_converged ? ",1" : ",0";
  return s;
}

void write_snapshot(const std::filesystem::path& path, const TriMesh& mesh, const SimState& state) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open snapshot '" + path.string() + "' for writing");
  out << "t=" << format_double(state.t) << '\n';
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const Point p = mesh.nodes()[i];
    out << format_double(p.x) << ' ' << format_double(p.y) << ' ' << format_double(state.u[i]) << ' '
        << format_double(state.v[i]) << ' ' << format_double(state.p[i]) << ' ' << format_double(state.w[i])
        << '\n';
  }
  if (!out) throw IoError("write to snapshot '" + path.string() + "' failed");
}

CommandResult run_command(const RunConfig& config, std::ostream& summary, std::ostream& errors) {
  std::optional<Scenario> sc;
  try {
    sc.emplace(build_scenario(config));
  } catch (const IoError& e) {
    errors << "error: " << e.what() << '\n';
    return {kExitIoError, std::nullopt};
  } catch (const std::exception& e) {
    errors << "config error: " << e.what() << '\n';
    return {kExitConfigError, std::nullopt};
  }

  try {
    std::ofstream csv;
    if (!config.csv.empty()) {
      csv.open(config.csv);
      if (!csv) throw IoError("cannot open time series '" + config.csv + "' for writing");
      csv << kCsvHeader << '\n' << std::flush;
    }
    const std::filesystem::path snap_dir = config.snapshot_dir;
    if (!snap_dir.empty()) std::filesystem::create_directories(snap_dir);
    long last_snapshot = -1;
    const auto snapshot = [&](long step, const SimState& state) {
      char name[40];
      std::snprintf(name, sizeof name, "snapshot_%06ld.txt", step);
      write_snapshot(snap_dir / name, sc->mesh, state);
      last_snapshot = step;
    };

    RunHooks hooks;
    hooks.corner = sc->corner;
    hooks.corner_radius = config.corner_radius;
    hooks.on_record = [&](const DiagRecord& r, const SimState& state) {
      if (csv.is_open()) {
        csv << csv_row(r) << '\n' << std::flush;
        if (!csv) throw IoError("write to time series '" + config.csv + "' failed");
      }
      if (!snap_dir.empty() && (r.step == 0 || (config.snapshot_every > 0 && r.step % config.snapshot_every == 0))) {
        snapshot(r.step, state);
      }
    };
    RunOutcome outcome = run(sc->mesh, sc->initial, sc->step, sc->coefficients, sc->network, hooks);
    if (!snap_dir.empty() && last_snapshot != outcome.steps) snapshot(outcome.steps, outcome.final_state);

    summary << "reason=" << to_string(outcome.reason) << " t=" << format_double(outcome.final_state.t)
            << " steps=" << outcome.steps << '\n';
    if (!outcome.message.empty() && outcome.reason != RunReason::reached_t_end) {
      errors << "note: " << outcome.message << '\n';
    }
    const int code = exit_code(outcome.reason);
    return {code, std::move(outcome)};
  } catch (const IoError& e) {
    errors << "error: " << e.what() << '\n';
    return {kExitIoError, std::nullopt};
  } catch (const std::filesystem::filesystem_error& e) {
    errors << "error: " << e.what() << '\n';
    return {kExitIoError, std::nullopt};
  }
}

}  // namespace kschemo
