#include "ecoevo/scenario.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ecoevo/errors.hpp"

namespace ecoevo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
    throw ConfigError("key '" + key + "': '" + raw + "' is not a finite number");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("key '" + key + "': '" + raw + "' is not a nonnegative integer");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("key '" + key + "': '" + raw + "' is not a boolean");
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(key, item));
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

template <class E>
E parse_enum(const std::string& key, const std::string& raw,
             std::initializer_list<std::pair<const char*, E>> options) {
  const std::string s = trim(raw);
  std::string names;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    names += std::string(names.empty() ? "" : ", ") + name;
  }
  throw ConfigError("key '" + key + "': '" + raw + "' is not one of {" + names + "}");
}

struct Field {
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

using Schema = std::vector<std::pair<std::string, std::vector<std::pair<std::string, Field>>>>;

Field num(double& ref, const std::string& key) {
  return {[&ref, key](const std::string& v) { ref = parse_double(key, v); }, [&ref] { return fmt(ref); }};
}

Field flag(bool& ref, const std::string& key) {
  return {[&ref, key](const std::string& v) { ref = parse_bool(key, v); },
          [&ref] { return std::string(ref ? "true" : "false"); }};
}

Field text(std::string& ref) {
  return {[&ref](const std::string& v) { ref = trim(v); }, [&ref] { return ref; }};
}

Field trait_kind(std::string& ref, const std::string& key) {
  return {[&ref, key](const std::string& v) {
            const std::string s = trim(v);
            if (s != "section5" && s != "quadratic" && s != "constant") {
              throw ConfigError("key '" + key + "': '" + v + "' is not one of {section5, quadratic, constant}");
            }
            ref = s;
          },
          [&ref] { return ref; }};
}

Schema schema(ScenarioConfig& c) {
  auto& sc = c.scheme;
  return {
      {"scenario",
       {{"name", text(c.name)},
        {"model",
         {[&c](const std::string& v) {
            c.model = parse_enum<ModelKind>("model", v,
                                            {{"single_species", ModelKind::single_species},
                                             {"predator_prey_reduced", ModelKind::predator_prey_reduced},
                                             {"predator_prey_coupled", ModelKind::predator_prey_coupled}});
          },
          [&c] { return std::string(to_string(c.model)); }}},
        {"epsilon", num(c.epsilon, "epsilon")},
        {"seed",
         {[&c](const std::string& v) { c.seed = parse_uint("seed", v); },
          [&c] { return std::to_string(c.seed); }}}}},
      {"grid", {{"half_width", num(c.half_width, "half_width")}, {"spacing", num(c.spacing, "spacing")}}},
      {"scheme",
       {{"dt", num(sc.dt, "dt")},
        {"n_steps",
         {[&sc](const std::string& v) { sc.n_steps = parse_uint("n_steps", v); },
          [&sc] { return std::to_string(sc.n_steps); }}},
        {"horizon", num(sc.horizon, "horizon")},
        {"mode",
         {[&sc](const std::string& v) {
            sc.mode = parse_enum<StateMode>("mode", v,
                                            {{"normalized", StateMode::normalized},
                                             {"population", StateMode::population}});
          },
          [&sc] { return std::string(sc.mode == StateMode::normalized ? "normalized" : "population"); }}},
        {"renormalize_each_step", flag(sc.renormalize_each_step, "renormalize_each_step")},
        {"record_stride",
         {[&sc](const std::string& v) {
            sc.record_stride = parse_uint("record_stride", v);
            if (sc.record_stride == 0) throw ConfigError("key 'record_stride' must be positive");
          },
          [&sc] { return std::to_string(sc.record_stride); }}},
        {"safety_factor", num(sc.safety_factor, "safety_factor")},
        {"allow_unsafe_dt", flag(sc.allow_unsafe_dt, "allow_unsafe_dt")},
        {"method",
         {[&sc](const std::string& v) {
            sc.method = parse_enum<ReproductionMethod>("method", v,
                                                       {{"fft", ReproductionMethod::fft},
                                                        {"direct", ReproductionMethod::direct},
                                                        {"reference", ReproductionMethod::reference}});
          },
          [&sc] {
            return std::string(sc.method == ReproductionMethod::fft      ? "fft"
                               : sc.method == ReproductionMethod::direct ? "direct"
                                                                         : "reference");
          }}},
        {"k0",
         {[&sc](const std::string& v) {
            const auto k = parse_uint("k0", v);
            if (k < 1 || k > 10) throw ConfigError("key 'k0' must be in [1, 10]");
            sc.k0 = static_cast<int>(k);
          },
          [&sc] { return std::to_string(sc.k0); }}},
        {"snapshot_times",
         {[&sc](const std::string& v) { sc.snapshot_times = parse_list("snapshot_times", v); },
          [&sc] { return fmt_list(sc.snapshot_times); }}}}},
      {"ecology",
       {{"family",
         {[&c](const std::string& v) {
            c.family = parse_enum<PreyMortalityFamily>(
                "family", v,
                {{"section5_scheme", PreyMortalityFamily::section5_scheme},
                 {"holling_reduced", PreyMortalityFamily::holling_reduced}});
          },
          [&c] { return std::string(to_string(c.family)); }}},
        {"r1", num(c.r1, "r1")},
        {"h", num(c.h, "h")},
        {"kappa1", num(c.kappa1, "kappa1")},
        {"gamma", num(c.gamma, "gamma")},
        {"kappa2", num(c.kappa2, "kappa2")},
        {"tau", num(c.tau, "tau")},
        {"tau_eps_power", num(c.tau_eps_power, "tau_eps_power")},
        {"g_exponent", num(c.g_exponent, "g_exponent")},
        {"contact", trait_kind(c.contact.kind, "contact")},
        {"contact_floor", num(c.contact.floor, "contact_floor")},
        {"contact_c0", num(c.contact.c0, "contact_c0")},
        {"contact_c2", num(c.contact.c2, "contact_c2")},
        {"relief", trait_kind(c.relief.kind, "relief")},
        {"relief_slope", num(c.relief.slope, "relief_slope")},
        {"relief_c0", num(c.relief.c0, "relief_c0")},
        {"relief_c2", num(c.relief.c2, "relief_c2")}}},
      {"single",
       {{"birth_base", num(c.birth.base, "birth_base")},
        {"birth_amplitude", num(c.birth.amplitude, "birth_amplitude")},
        {"birth_period", num(c.birth.period, "birth_period")},
        {"mortality",
         {[&c](const std::string& v) {
            c.mortality.kind = parse_enum<MortalityFamilyKind>(
                "mortality", v,
                {{"quadratic", MortalityFamilyKind::quadratic},
                 {"quadratic_quartic", MortalityFamilyKind::quadratic_quartic}});
          },
          [&c] { return std::string(to_string(c.mortality.kind)); }}},
        {"mortality_a", num(c.mortality.a, "mortality_a")},
        {"mortality_b", num(c.mortality.b, "mortality_b")},
        {"optimum",
         {[&c](const std::string& v) {
            c.optimum.kind = parse_enum<OptimumKind>("optimum", v,
                                                     {{"constant", OptimumKind::constant},
                                                      {"linear_ramp", OptimumKind::linear_ramp},
                                                      {"sinusoidal", OptimumKind::sinusoidal}});
          },
          [&c] { return std::string(to_string(c.optimum.kind)); }}},
        {"optimum_speed", num(c.optimum.speed, "optimum_speed")},
        {"optimum_amplitude", num(c.optimum.amplitude, "optimum_amplitude")},
        {"optimum_period", num(c.optimum.period, "optimum_period")},
        {"kappa", num(c.kappa, "kappa")}}},
      {"initial",
       {{"kind",
         {[&c](const std::string& v) {
            c.initial_kind = parse_enum<InitialKind>("kind", v,
                                                     {{"indicator", InitialKind::indicator},
                                                      {"gaussian", InitialKind::gaussian}});
          },
          [&c] { return std::string(c.initial_kind == InitialKind::indicator ? "indicator" : "gaussian"); }}},
        {"center_base", num(c.center_base, "center_base")},
        {"center_eps_factor", num(c.center_eps_factor, "center_eps_factor")},
        {"width_base", num(c.width_base, "width_base")},
        {"width_eps_factor", num(c.width_eps_factor, "width_eps_factor")},
        {"rho0", num(c.rho0, "rho0")},
        {"rho2_0", num(c.rho2_0, "rho2_0")}}},
      {"sweep",
       {{"epsilons",
         {[&c](const std::string& v) { c.epsilons = parse_list("epsilons", v); },
          [&c] { return fmt_list(c.epsilons); }}}}},
      {"theory",
       {{"dt", num(c.theory_dt, "theory.dt")},
        {"stride", num(c.theory_stride, "theory.stride")},
        {"audit_window", num(c.audit_window, "audit_window")},
        {"L_X", num(c.L_X, "L_X")}}},
      {"output", {{"directory", text(c.output_directory)}}},
  };
}

void validate(const ScenarioConfig& c) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(c.epsilon, "epsilon");
  positive(c.half_width, "grid.half_width");
  positive(c.spacing, "grid.spacing");
  if (c.spacing > c.half_width) throw ConfigError("grid.spacing larger than the half-width");
  if (c.scheme.horizon < 0.0) throw ConfigError("scheme.horizon must be nonnegative");
  if (c.scheme.dt < 0.0) throw ConfigError("scheme.dt must be nonnegative");
  positive(c.scheme.safety_factor, "scheme.safety_factor");
  positive(c.theory_dt, "theory.dt");
  positive(c.L_X, "theory.L_X");
  positive(c.audit_window, "theory.audit_window");
  for (double e : c.epsilons) positive(e, "sweep epsilon");
  if (c.model == ModelKind::single_species) {
    positive(c.kappa, "single.kappa");
    positive(c.birth.period, "single.birth_period");
    positive(c.optimum.period, "single.optimum_period");
  } else {
    positive(c.kappa1, "ecology.kappa1");
    positive(c.kappa2, "ecology.kappa2");
    if (c.h < 0.0 || c.gamma < 0.0) throw ConfigError("ecology.h and ecology.gamma must be nonnegative");
    if (c.model == ModelKind::predator_prey_coupled && !(c.tau > 0.0) && !(c.tau_eps_power > 0.0)) {
      throw ConfigError("predator_prey_coupled needs tau > 0 or tau_eps_power > 0");
    }
  }
  if (c.width_base + c.width_eps_factor * c.epsilon <= 0.0) {
    throw ConfigError("initial width must be positive");
  }
}

TraitFunction build(const TraitFunctionConfig& t, bool is_contact, double kappa1) {
  if (t.kind == "section5") return is_contact ? section5_contact(t.floor) : section5_relief(kappa1, t.slope);
  if (t.kind == "quadratic") return quadratic_function(t.c0, t.c2);
  return constant_function(t.c0);
}

}  // namespace

Grid1D ScenarioConfig::grid() const { return Grid1D::symmetric(half_width, spacing); }

ModelSpec ScenarioConfig::model_spec(double eps) const {
  ModelSpec m;
  m.kind = model;
  m.single.epsilon = eps;
  m.single.birth = birth;
  m.single.mortality = mortality;
  m.single.optimum = optimum;
  m.single.kappa = kappa;
  auto& p = m.prey;
  p.epsilon = eps;
  p.r1 = r1;
  p.h = h;
  p.kappa1 = kappa1;
  p.gamma = gamma;
  p.kappa2 = kappa2;
  p.tau = tau_eps_power > 0.0 ? std::pow(eps, tau_eps_power) : tau;
  if (model != ModelKind::predator_prey_coupled) p.tau = 0.0;
  p.family = family;
  p.g_exponent = g_exponent;
  p.contact = build(contact, true, kappa1);
  p.relief = build(relief, false, kappa1);
  return m;
}

InitialCondition ScenarioConfig::initial(double eps) const {
  InitialCondition ic;
  ic.kind = initial_kind;
  ic.center = center_base + center_eps_factor * eps;
  ic.width = width_base + width_eps_factor * eps;
  ic.rho0 = rho0;
  ic.rho2_0 = rho2_0;
  return ic;
}

AuditOptions ScenarioConfig::audit_options() const {
  AuditOptions o;
  o.window = audit_window;
  o.k0 = scheme.k0;
  o.L_X = L_X;
  o.horizon = scheme.horizon;
  o.x_min = -half_width;
  o.x_max = half_width;
  return o;
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  ScenarioConfig cfg;
  const Schema s = schema(cfg);
  for (const auto& [section, body] : tree) {
    auto sec = std::find_if(s.begin(), s.end(), [&](const auto& e) { return e.first == section; });
    if (sec == s.end()) throw ConfigError(origin + ": unknown section [" + section + "]");
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(origin + ": key '" + section + "' outside any section");
    }
    for (const auto& [key, value] : body) {
      auto f = std::find_if(sec->second.begin(), sec->second.end(), [&](const auto& e) { return e.first == key; });
      if (f == sec->second.end()) throw ConfigError(origin + ": unknown key '" + key + "' in [" + section + "]");
      try {
        f->second.set(value.data());
      } catch (const ConfigError& e) {
        throw ConfigError(origin + ": [" + section + "] " + e.what());
      }
    }
  }
  if (cfg.epsilons.empty()) cfg.epsilons = {cfg.epsilon};
  validate(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.string());
}

std::string to_ini(const ScenarioConfig& config) {
  ScenarioConfig copy = config;
  const Schema s = schema(copy);
  std::string out;
  for (const auto& [section, fields] : s) {
    out += "[" + section + "]\n";
    for (const auto& [key, field] : fields) out += key + " = " + field.get() + "\n";
    out += "\n";
  }
  return out;
}

std::filesystem::path scenario_directory() {
#ifdef ECOEVO_SCENARIO_DIR
  return ECOEVO_SCENARIO_DIR;
#else
  return "configs";
#endif
}

std::vector<std::string> list_scenarios(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec)) {
    if (e.path().extension() == ".ini") names.push_back(e.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::filesystem::path resolve_scenario_path(const std::string& name_or_path) {
  std::filesystem::path p(name_or_path);
  if (std::filesystem::exists(p)) return p;
  const auto bundled = scenario_directory() / (name_or_path + ".ini");
  if (std::filesystem::exists(bundled)) return bundled;
  throw ConfigError("no scenario file or bundled scenario named '" + name_or_path + "'");
}

}  // namespace ecoevo
