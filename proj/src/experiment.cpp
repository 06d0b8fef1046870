#include "mxdd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mxdd/analysis.hpp"
#include "mxdd/decomp.hpp"
#include "mxdd/precond.hpp"

namespace mxdd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: '" + key + "' expects on/off, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
  if (out.empty()) throw ConfigError("config: '" + key + "' must not be empty");
  return out;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

std::string join(const std::vector<double>& v) {
  std::vector<std::string> s;
  for (double x : v) s.push_back(fmt(x));
  return join(s);
}

const char* name(FineRule r) {
  switch (r) {
    case FineRule::k15: return "k15";
    case FineRule::ppw: return "ppw";
    default: return "fixed";
  }
}

const char* name(CoarseRule r) {
  switch (r) {
    case CoarseRule::none: return "none";
    case CoarseRule::alpha: return "alpha";
    case CoarseRule::ppw: return "ppw";
    case CoarseRule::fixed: return "fixed";
    default: return "fine";
  }
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"mode",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "gmres") c.mode = RunMode::gmres;
         else if (v == "error_sweep") c.mode = RunMode::error_sweep;
         else throw ConfigError("config: '" + k + "' must be gmres or error_sweep");
       }},
      {"k_list", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.k_list = to_doubles(k, v);
         for (double x : c.k_list)
           if (!(x > 0.0)) throw ConfigError("config: wavenumbers must be positive");
       }},
      {"xi_prob", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.xi_prob = XiRule::parse(v); }},
      {"xi_prec", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.xi_prec = XiRule::parse(v); }},
      {"bc",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "pec") c.bc = BoundaryCondition::pec;
         else if (v == "impedance") c.bc = BoundaryCondition::impedance;
         else throw ConfigError("config: '" + k + "' must be pec or impedance");
       }},
      {"fine_rule",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "k15") c.fine_rule = FineRule::k15;
         else if (v == "ppw") c.fine_rule = FineRule::ppw;
         else if (v == "fixed") c.fine_rule = FineRule::fixed;
         else throw ConfigError("config: '" + k + "' must be k15, ppw or fixed");
       }},
      {"fine_param", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.fine_param = to_double(k, v); }},
      {"sub_rule",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "alpha") c.sub_rule = SubRule::alpha;
         else if (v == "fixed") c.sub_rule = SubRule::fixed;
         else throw ConfigError("config: '" + k + "' must be alpha or fixed");
       }},
      {"sub_param", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.sub_param = to_double(k, v); }},
      {"sub_alpha", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.sub_alpha = to_double(k, v); }},
      {"coarse_rule",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "none") c.coarse_rule = CoarseRule::none;
         else if (v == "alpha") c.coarse_rule = CoarseRule::alpha;
         else if (v == "ppw") c.coarse_rule = CoarseRule::ppw;
         else if (v == "fixed") c.coarse_rule = CoarseRule::fixed;
         else if (v == "fine") c.coarse_rule = CoarseRule::fine;
         else throw ConfigError("config: '" + k + "' must be none, alpha, ppw, fixed or fine");
       }},
      {"coarse_param", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.coarse_param = to_double(k, v); }},
      {"coarse_alpha", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.coarse_alpha = to_double(k, v); }},
      {"overlap",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v != "minimal" && v != "generous" && to_integer(k, v) < 0)
           throw ConfigError("config: '" + k + "' must be minimal, generous or a layer count");
         c.overlap = v;
       }},
      {"overlap_factor", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.overlap_factor = to_double(k, v); }},
      {"preconditioners",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.preconditioners = split_list(v);
         if (c.preconditioners.empty()) throw ConfigError("config: '" + k + "' must not be empty");
         for (const auto& p : c.preconditioners) {
           try {
             parse_preconditioner(p, 0.0);
           } catch (const std::invalid_argument& e) {
             throw ConfigError(std::string("config: ") + e.what());
           }
         }
       }},
      {"side",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "right") c.side = Side::right;
         else if (v == "left") c.side = Side::left;
         else throw ConfigError("config: '" + k + "' must be left or right");
       }},
      {"weighted", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.weighted = to_bool(k, v); }},
      {"correction_matrix",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "prob") c.correction_uses_prec = false;
         else if (v == "prec") c.correction_uses_prec = true;
         else throw ConfigError("config: '" + k + "' must be prob or prec");
       }},
      {"tol", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.tol = to_double(k, v);
         if (!(c.tol > 0.0)) throw ConfigError("config: tol must be positive");
       }},
      {"maxit", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.maxit = static_cast<int>(to_integer(k, v));
         if (c.maxit < 1) throw ConfigError("config: maxit must be at least 1");
       }},
      {"initial_guess",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         if (v == "zero") c.initial = InitialGuess::zero;
         else if (v == "random") c.initial = InitialGuess::random;
         else throw ConfigError("config: '" + k + "' must be zero or random");
       }},
      {"seed", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.seed = static_cast<std::uint64_t>(to_integer(k, v));
       }},
      {"materials",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.materials = split_list(v);
         if (c.materials.empty()) throw ConfigError("config: '" + k + "' must not be empty");
         for (const auto& m : c.materials)
           if (m != "none" && m != "uniform" && m != "head" && m != "inclusion")
             throw ConfigError("config: unknown material '" + m + "' (none, uniform, head, inclusion)");
       }},
      {"sigma_bg", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.sigma_bg = to_double(k, v); }},
      {"box",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const auto b = to_doubles(k, v);
         if (b.size() != 6) throw ConfigError("config: box needs x0,y0,z0,x1,y1,z1");
         std::copy(b.begin(), b.end(), c.box.begin());
       }},
      {"inclusion_eps", [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.inclusion_eps = to_double(k, v);
         if (!(c.inclusion_eps > 0.0)) throw ConfigError("config: inclusion_eps must be positive");
       }},
      {"error_xi_factors", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.error_xi_factors = to_doubles(k, v); }},
      {"max_local_dofs", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.max_local_dofs = to_integer(k, v); }},
      {"timings", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.timings = to_bool(k, v); }},
      {"out", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.out = v; }},
  };
  return table;
}

}  // namespace

double XiRule::eval(double k) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::k: return k;
    case Kind::k2: return k * k;
    default: return value;
  }
}

std::string XiRule::str() const {
  switch (kind) {
    case Kind::zero: return "0";
    case Kind::k: return "k";
    case Kind::k2: return "k2";
    default: return fmt(value);
  }
}

XiRule XiRule::parse(const std::string& s) {
  XiRule r;
  if (s == "0" || s == "zero") r.kind = Kind::zero;
  else if (s == "k") r.kind = Kind::k;
  else if (s == "k2" || s == "k^2") r.kind = Kind::k2;
  else {
    r.kind = Kind::value;
    r.value = to_double("xi", s);
  }
  return r;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("config: unknown key '" + key + "'");
  it->second(cfg, key, trim(value));
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::vector<std::string> preset_names() {
  return {"table1", "table2", "table3", "table4", "table6", "medimax-cube", "abs-error", "degenerate"};
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;  // defaults are the table-1 setup
  if (name == "table1") return c;
  if (name == "table2") {
    c.overlap = "minimal";
    return c;
  }
  if (name == "table3") {
    c.xi_prob = XiRule::parse("k");
    c.xi_prec = XiRule::parse("k");
    return c;
  }
  if (name == "table4") {
    c.weighted = true;
    c.preconditioners = {"AS2"};
    return c;
  }
  if (name == "table6") {
    c.preconditioners = {"AS2", "RAS2", "HRAS", "ADEF1"};
    return c;
  }
  if (name == "medimax-cube") {
    c.bc = BoundaryCondition::impedance;
    c.k_list = {6};
    c.xi_prob = XiRule::parse("0");
    c.xi_prec = XiRule::parse("0");
    c.fine_rule = FineRule::fixed;
    c.fine_param = 12;
    c.sub_rule = SubRule::fixed;
    c.sub_param = 3;
    c.coarse_rule = CoarseRule::fixed;
    c.coarse_param = 3;
    c.overlap = "minimal";
    c.preconditioners = {"ImpHRAS", "ImpRAS1"};
    c.initial = InitialGuess::zero;
    c.materials = {"uniform", "head", "inclusion"};
    return c;
  }
  if (name == "abs-error") {
    c.mode = RunMode::error_sweep;
    c.bc = BoundaryCondition::impedance;
    c.k_list = {5, 8};
    c.fine_rule = FineRule::fixed;
    c.fine_param = 10;
    c.sub_rule = SubRule::fixed;
    c.sub_param = 1;
    c.coarse_rule = CoarseRule::none;
    return c;
  }
  if (name == "degenerate") {
    c.k_list = {1, 2};
    c.sub_rule = SubRule::fixed;
    c.sub_param = 1;
    c.coarse_rule = CoarseRule::none;
    c.fine_rule = FineRule::fixed;
    c.fine_param = 3;
    c.preconditioners = {"AS1"};
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

std::string describe(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "mode = " << (c.mode == RunMode::gmres ? "gmres" : "error_sweep") << "\n"
    << "k_list = " << join(c.k_list) << "\n"
    << "xi_prob = " << c.xi_prob.str() << "\n"
    << "xi_prec = " << c.xi_prec.str() << "\n"
    << "bc = " << (c.bc == BoundaryCondition::pec ? "pec" : "impedance") << "\n"
    << "fine_rule = " << name(c.fine_rule) << "\n"
    << "fine_param = " << fmt(c.fine_param) << "\n"
    << "sub_rule = " << (c.sub_rule == SubRule::alpha ? "alpha" : "fixed") << "\n"
    << "sub_param = " << fmt(c.sub_param) << "\n"
    << "sub_alpha = " << fmt(c.sub_alpha) << "\n"
    << "coarse_rule = " << name(c.coarse_rule) << "\n"
    << "coarse_param = " << fmt(c.coarse_param) << "\n"
    << "coarse_alpha = " << fmt(c.coarse_alpha) << "\n"
    << "overlap = " << c.overlap << "\n"
    << "overlap_factor = " << fmt(c.overlap_factor) << "\n"
    << "preconditioners = " << join(c.preconditioners) << "\n"
    << "side = " << (c.side == Side::right ? "right" : "left") << "\n"
    << "weighted = " << (c.weighted ? "on" : "off") << "\n"
    << "correction_matrix = " << (c.correction_uses_prec ? "prec" : "prob") << "\n"
    << "tol = " << fmt(c.tol) << "\n"
    << "maxit = " << c.maxit << "\n"
    << "initial_guess = " << (c.initial == InitialGuess::zero ? "zero" : "random") << "\n"
    << "seed = " << c.seed << "\n"
    << "materials = " << join(c.materials) << "\n"
    << "sigma_bg = " << fmt(c.sigma_bg) << "\n"
    << "box = " << join(std::vector<double>(c.box.begin(), c.box.end())) << "\n"
    << "inclusion_eps = " << fmt(c.inclusion_eps) << "\n"
    << "error_xi_factors = " << join(c.error_xi_factors) << "\n"
    << "max_local_dofs = " << c.max_local_dofs << "\n"
    << "timings = " << (c.timings ? "on" : "off") << "\n"
    << "out = " << c.out << "\n";
  return o.str();
}

namespace {

Index cube_edge_count(Index c) { return 3 * c * (c + 1) * (c + 1) + 3 * c * c * (c + 1) + c * c * c; }

}  // namespace

Sizing resolve_sizing(const ExperimentConfig& cfg, double k) {
  const double two_pi = 2.0 * std::numbers::pi;
  Sizing s;
  s.p_axis = cfg.sub_rule == SubRule::alpha
                 ? std::max(1L, std::lround(cfg.sub_param * std::pow(k, cfg.sub_alpha)))
                 : static_cast<int>(cfg.sub_param);
  if (s.p_axis < 1) throw ConfigError("config: subdomains per axis must be positive");
  switch (cfg.coarse_rule) {
    case CoarseRule::none: s.n_coarse = 0; break;
    case CoarseRule::alpha:
      s.n_coarse = static_cast<int>(std::max(1L, std::lround(cfg.coarse_param * std::pow(k, cfg.coarse_alpha))));
      break;
    case CoarseRule::ppw:
      s.n_coarse = std::max(1, static_cast<int>(std::ceil(cfg.coarse_param * k / two_pi)));
      break;
    case CoarseRule::fixed: s.n_coarse = static_cast<int>(cfg.coarse_param); break;
    case CoarseRule::fine: s.n_coarse = 0; break;
  }
  if (cfg.coarse_rule == CoarseRule::fixed && s.n_coarse < 1)
    throw ConfigError("config: coarse cells per axis must be positive");
  double target = 0.0;
  switch (cfg.fine_rule) {
    case FineRule::k15: target = cfg.fine_param * std::pow(k, 1.5); break;
    case FineRule::ppw: target = std::ceil(cfg.fine_param * k / two_pi); break;
    case FineRule::fixed: target = cfg.fine_param; break;
  }
  const int unit = s.n_coarse > 0 ? std::lcm(s.p_axis, s.n_coarse) : s.p_axis;
  s.n = static_cast<int>(std::max(1L, std::lround(target / unit))) * unit;
  if (cfg.coarse_rule == CoarseRule::fine) s.n_coarse = s.n;
  if (cfg.overlap == "minimal")
    s.layers = 2;
  else if (cfg.overlap == "generous")
    s.layers = std::max(2, static_cast<int>(std::ceil(cfg.overlap_factor * s.n / s.p_axis)));
  else
    s.layers = static_cast<int>(std::stol(cfg.overlap));
  s.h = std::sqrt(3.0) / s.n;
  s.H = s.n_coarse > 0 ? std::sqrt(3.0) / s.n_coarse : 0.0;
  s.H_sub = std::sqrt(3.0) / s.p_axis;
  const Index width = std::min<Index>(s.n, s.n / s.p_axis + 2 * s.layers);
  s.projected_local_dofs = std::max(cube_edge_count(width), s.n_coarse > 0 ? cube_edge_count(s.n_coarse) : 0);
  if (s.projected_local_dofs > cfg.max_local_dofs) {
    std::ostringstream msg;
    msg << "sizing: k=" << fmt(k) << " needs n=" << s.n << ", " << s.p_axis << "^3 subdomains with "
        << s.layers << " overlap layers and " << s.n_coarse << "^3 coarse cells; the largest local or "
        << "coarse problem is projected at " << s.projected_local_dofs << " unknowns, above the cap "
        << cfg.max_local_dofs << " (raise max_local_dofs or reduce k)";
    throw SizingError(msg.str());
  }
  return s;
}

Coefficients build_coefficients(const ExperimentConfig& cfg, const std::string& material,
                                const Mesh& mesh, double k, double xi) {
  Coefficients c = Coefficients::homogeneous(k, xi);
  if (material == "none") return c;
  const Index nt = mesh.num_tets();
  c.sigma.assign(static_cast<std::size_t>(nt), cfg.sigma_bg * k);
  if (material == "uniform") return c;
  c.eps.assign(static_cast<std::size_t>(nt), 1.0);
  const auto& b = cfg.box;
  for (Index t = 0; t < nt; ++t) {
    const Point x = mesh.barycenter(t);
    const bool inside = x[0] > b[0] && x[0] < b[3] && x[1] > b[1] && x[1] < b[4] && x[2] > b[2] && x[2] < b[5];
    if (!inside) continue;
    c.eps[t] = cfg.inclusion_eps;
    if (material == "inclusion")
      c.sigma[t] = 0.0;
    else if (material == "head")
      c.sigma[t] = 1.5 * cfg.sigma_bg * k;
    else
      throw ConfigError("unknown material '" + material + "'");
  }
  return c;
}

std::string csv_header() {
  return "k,n,n_sub,n_cs,xi_prob,xi_prec,preconditioner,iterations,converged,setup_time_s,"
         "gmres_time_s,final_relative_residual,seed,h,H,H_sub,layers,ndof,material,side,weighted";
}

std::string csv_row(const RunRecord& r) {
  std::ostringstream o;
  char res[32];
  std::snprintf(res, sizeof res, "%.6e", r.final_relative_residual);
  o << fmt(r.k) << ',' << r.n << ',' << r.n_sub << ',' << r.n_cs << ',' << fmt(r.xi_prob) << ','
    << fmt(r.xi_prec) << ',' << r.preconditioner << ',' << r.iterations << ','
    << (r.converged ? "true" : "false") << ',' << fmt(r.setup_time_s) << ',' << fmt(r.gmres_time_s)
    << ',' << res << ',' << r.seed << ',' << fmt(r.h) << ',' << fmt(r.H) << ',' << fmt(r.H_sub)
    << ',' << r.layers << ',' << r.ndof << ',' << r.material << ',' << r.side << ','
    << (r.weighted ? "true" : "false");
  return o.str();
}

std::string to_csv(const ExperimentConfig& cfg, const RunOutput& out) {
  std::ostringstream o;
  if (cfg.mode == RunMode::error_sweep) {
    o << "k,n,xi,ratio,ratio_per_xi_over_k\n";
    for (const auto& e : out.errors) {
      char r1[32], r2[32];
      std::snprintf(r1, sizeof r1, "%.10e", e.ratio);
      std::snprintf(r2, sizeof r2, "%.10e", e.xi > 0.0 ? e.ratio / (e.xi / e.k) : 0.0);
      o << fmt(e.k) << ',' << e.n << ',' << fmt(e.xi) << ',' << r1 << ',' << r2 << '\n';
    }
    return o.str();
  }
  o << csv_header() << '\n';
  for (const auto& r : out.runs) o << csv_row(r) << '\n';
  return o.str();
}

RunOutput run_table(const ExperimentConfig& cfg, std::ostream& log) {
  RunOutput out;
  if (cfg.mode == RunMode::error_sweep) {
    for (double k : cfg.k_list) {
      const Sizing s = resolve_sizing(cfg, k);
      std::vector<double> xis;
      for (double f : cfg.error_xi_factors) xis.push_back(f * k);
      for (const auto& p : relative_error_sweep(k, xis, s.n)) {
        out.errors.push_back({k, s.n, p.xi, p.ratio});
        log << "k=" << fmt(k) << " n=" << s.n << " xi=" << fmt(p.xi) << " ratio=" << p.ratio
            << " ratio/(xi/k)=" << (p.xi > 0 ? p.ratio / (p.xi / k) : 0.0) << "\n";
      }
    }
  } else {
    // Resolve every size up front so an infeasible request fails before any work.
    std::vector<Sizing> sizes;
    for (double k : cfg.k_list) sizes.push_back(resolve_sizing(cfg, k));
    bool needs_coarse = false;
    for (const auto& p : cfg.preconditioners)
      needs_coarse |= parse_preconditioner(p, 0.0).levels == Levels::two;
    for (std::size_t ki = 0; ki < cfg.k_list.size(); ++ki) {
      const double k = cfg.k_list[ki];
      const Sizing& s = sizes[ki];
      if (needs_coarse && s.n_coarse == 0)
        throw ConfigError("config: two-level preconditioners need a coarse_rule other than none");
      auto mesh = std::make_shared<const Mesh>(Mesh::cube(s.n));
      EdgeSpace space(mesh, cfg.bc);
      const double xi_prob = cfg.xi_prob.eval(k);
      const double xi_prec = cfg.xi_prec.eval(k);
      const Decomposition decomp = make_decomposition(space, s.p_axis, s.layers, needs_coarse ? s.n_coarse : 0);
      for (const auto& material : cfg.materials) {
        const SystemBundle system = assemble(space, build_coefficients(cfg, material, *mesh, k, xi_prob));
        for (const auto& pid : cfg.preconditioners) {
          PreconditionerSpec spec = parse_preconditioner(pid, xi_prec, cfg.side);
          spec.correction_uses_prec_matrix = cfg.correction_uses_prec;
          RunRecord r;
          r.k = k;
          r.n = s.n;
          r.n_sub = s.p_axis * s.p_axis * s.p_axis;
          r.n_cs = spec.levels == Levels::two && decomp.coarse ? decomp.coarse->space.size() : 0;
          r.xi_prob = xi_prob;
          r.xi_prec = xi_prec;
          r.preconditioner = spec.id();
          r.seed = cfg.seed;
          r.h = s.h;
          r.H = spec.levels == Levels::two ? s.H : 0.0;
          r.H_sub = s.H_sub;
          r.layers = s.layers;
          r.ndof = space.size();
          r.material = material;
          r.side = cfg.side == Side::right ? "right" : "left";
          r.weighted = cfg.weighted;
          try {
            const SchwarzPreconditioner prec(system, decomp, spec);
            KrylovConfig kc;
            kc.tol = cfg.tol;
            kc.maxit = cfg.maxit;
            kc.side = cfg.side;
            kc.initial = cfg.initial;
            kc.seed = cfg.seed;
            kc.weight = cfg.weighted ? &system.Dk : nullptr;
            const KrylovReport rep = gmres(as_linear_map(system.A), system.rhs, prec.as_map(), kc);
            r.iterations = rep.iterations;
            r.converged = rep.converged;
            r.final_relative_residual = rep.residual_history.back();
            if (cfg.timings) {
              r.setup_time_s = prec.setup_time_s();
              r.gmres_time_s = rep.solve_time_s;
            }
          } catch (const std::exception& e) {
            r.iterations = cfg.maxit;
            r.converged = false;
            r.final_relative_residual = 1.0;
            r.error = e.what();
          }
          log << "k=" << fmt(k) << " n=" << s.n << " ndof=" << r.ndof << " N=" << r.n_sub
              << " n_cs=" << r.n_cs << " layers=" << s.layers << " " << material << " " << r.preconditioner
              << " its=" << r.iterations << (r.converged ? "" : " (not converged)")
              << (r.error.empty() ? "" : " error: " + r.error) << "\n";
          out.runs.push_back(std::move(r));
        }
      }
    }
  }
  if (!cfg.out.empty()) {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + cfg.out + "'");
    f << to_csv(cfg, out);
  }
  return out;
}

}  // namespace mxdd
