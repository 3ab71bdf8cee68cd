#include "etcsim/io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "etcsim/errors.hpp"

namespace etcsim {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& j, const char* key, std::string_view where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError("scenario is missing '" + std::string(where) + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("scenario key '" + std::string(where) + key + "' has the wrong type");
  }
}

template <typename T>
T optional_or(const json& j, const char* key, T fallback, std::string_view where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return required<T>(j, key, where);
}

template <typename T>
std::optional<T> optional_value(const json& j, const char* key, std::string_view where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return required<T>(j, key, where);
}

json optional_to_json(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

ThresholdSpec threshold_from(const json& j, std::string_view where) {
  ThresholdSpec spec;
  spec.value = optional_value<double>(j, "J", where);
  spec.margin = optional_or<double>(j, "J_margin", 0.0, where);
  if (!spec.value && !j.contains("J_margin")) {
    throw ConfigError("scenario needs either '" + std::string(where) + "J' or '" + std::string(where) + "J_margin'");
  }
  return spec;
}

void threshold_to(json& j, const ThresholdSpec& spec) {
  if (spec.value) {
    j["J"] = *spec.value;
  } else {
    j["J_margin"] = spec.margin;
  }
}

const json& section(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_object()) {
    throw ConfigError(std::string("scenario is missing section '") + key + "'");
  }
  return j.at(key);
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  Scenario s;
  s.name = optional_or<std::string>(j, "name", "", "");
  s.horizon = required<double>(j, "horizon_s", "");
  s.seed = optional_or<std::uint64_t>(j, "seed", 1, "");
  s.disturbance = parse_disturbance_kind(optional_or<std::string>(j, "disturbance", "uniform", ""));

  const json& ch = section(j, "channel");
  s.channel.gamma = required<double>(ch, "gamma_s", "channel.");
  s.channel.delta = required<double>(ch, "delta_s", "channel.");
  s.channel.min_delay_steps = optional_or<int>(ch, "min_delay_steps", 2, "channel.");
  s.channel.seed = optional_or<std::uint64_t>(ch, "seed", 0, "channel.");
  s.channel.law = parse_delay_law(optional_or<std::string>(ch, "delay_law", "uniform", "channel."));

  const auto scheme = required<std::string>(j, "scheme", "");
  const json& plant = section(j, "plant");
  if (scheme == "linear") {
    LinearSetup setup;
    if (plant.contains("physical")) {
      const json& ph = plant.at("physical");
      setup.physical = PendulumParams{
          .m1 = required<double>(ph, "m1_kg", "plant.physical."),
          .m2 = required<double>(ph, "m2_kg", "plant.physical."),
          .l = required<double>(ph, "l_m", "plant.physical."),
          .inertia = required<double>(ph, "I_kg_m2", "plant.physical."),
          .g_acc = required<double>(ph, "g_m_per_s2", "plant.physical."),
          .k_xi = required<double>(ph, "k_xi_N", "plant.physical."),
      };
      setup.pendulum = linearize(*setup.physical);
    } else {
      setup.pendulum.stiffness = required<double>(plant, "stiffness_per_s2", "plant.");
      setup.pendulum.input_gain = required<double>(plant, "input_gain", "plant.");
    }
    setup.M = required<double>(plant, "M", "plant.");
    setup.truth = parse_truth_model(optional_or<std::string>(plant, "truth", "modal-linear", "plant."));
    setup.integrator = parse_integrator(optional_or<std::string>(plant, "integrator", "euler", "plant."));
    setup.physical_noise_bound = optional_or<double>(plant, "physical_noise_bound", 0.02, "plant.");
    setup.initial_physical = Vec2(optional_or<double>(plant, "phi0_rad", 0.0, "plant."),
                                  optional_or<double>(plant, "phidot0_rad_per_s", 0.0, "plant."));
    if (auto xhat = optional_value<std::vector<double>>(plant, "xhat0_modal", "plant.")) {
      if (xhat->size() != 2) throw ConfigError("plant.xhat0_modal must have two entries");
      setup.initial_estimate = Vec2((*xhat)[0], (*xhat)[1]);
    }

    const json& lin = section(j, "linear");
    setup.J = threshold_from(lin, "linear.");
    setup.rho0 = required<double>(lin, "rho0", "linear.");
    setup.b = required<double>(lin, "b", "linear.");
    const auto K = required<std::vector<double>>(lin, "K", "linear.");
    if (K.size() != 2) throw ConfigError("linear.K must have two entries");
    setup.K = Gain2(K[0], K[1]);
    setup.bits = optional_value<int>(lin, "g_bits", "linear.");
    if (j.contains("reference")) setup.declared_bits = optional_value<int>(j.at("reference"), "g_bits", "reference.");
    s.setup = setup;
  } else if (scheme == "nonlinear") {
    const auto map = ScalarNonlinearPlant::parse_map(optional_or<std::string>(plant, "map", "demo", "plant."));
    const double M = required<double>(plant, "M", "plant.");
    NonlinearSetup setup;
    if (map == ScalarNonlinearPlant::Map::demo) {
      setup.plant = ScalarNonlinearPlant::demo(M);
    } else {
      setup.plant = ScalarNonlinearPlant::unstable_linear(required<double>(plant, "rate_per_s", "plant."), M);
    }
    setup.x0 = required<double>(plant, "x0", "plant.");
    setup.xhat0 = optional_or<double>(plant, "xhat0", setup.x0, "plant.");

    const json& nl = section(j, "nonlinear");
    setup.alpha = required<double>(nl, "alpha_s", "nonlinear.");
    setup.J = threshold_from(nl, "nonlinear.");
    setup.gain = required<double>(nl, "gain", "nonlinear.");
    setup.bits = optional_value<int>(nl, "g_bits", "nonlinear.");
    if (j.contains("reference")) setup.declared_bits = optional_value<int>(j.at("reference"), "g_bits", "reference.");
    s.setup = setup;
  } else {
    throw ConfigError("scheme must be 'linear' or 'nonlinear', got '" + scheme + "'");
  }
  return s;
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["scheme"] = std::string(to_string(s.scheme()));
  j["horizon_s"] = s.horizon;
  j["seed"] = s.seed;
  j["disturbance"] = std::string(to_string(s.disturbance));
  j["channel"] = {
      {"gamma_s", s.channel.gamma},
      {"delta_s", s.channel.delta},
      {"min_delay_steps", s.channel.min_delay_steps},
      {"seed", s.channel.seed},
      {"delay_law", std::string(to_string(s.channel.law))},
  };
  if (const auto* lin = std::get_if<LinearSetup>(&s.setup)) {
    json plant;
    if (lin->physical) {
      const auto& p = *lin->physical;
      plant["physical"] = {{"m1_kg", p.m1},   {"m2_kg", p.m2},           {"l_m", p.l},
                           {"I_kg_m2", p.inertia}, {"g_m_per_s2", p.g_acc}, {"k_xi_N", p.k_xi}};
    } else {
      plant["stiffness_per_s2"] = lin->pendulum.stiffness;
      plant["input_gain"] = lin->pendulum.input_gain;
    }
    plant["M"] = lin->M;
    plant["truth"] = std::string(to_string(lin->truth));
    plant["integrator"] = std::string(to_string(lin->integrator));
    plant["physical_noise_bound"] = lin->physical_noise_bound;
    plant["phi0_rad"] = lin->initial_physical(0);
    plant["phidot0_rad_per_s"] = lin->initial_physical(1);
    plant["xhat0_modal"] = lin->initial_estimate
                               ? json::array({(*lin->initial_estimate)(0), (*lin->initial_estimate)(1)})
                               : json(nullptr);
    j["plant"] = plant;
    json l;
    threshold_to(l, lin->J);
    l["rho0"] = lin->rho0;
    l["b"] = lin->b;
    l["K"] = json::array({lin->K(0), lin->K(1)});
    l["g_bits"] = optional_to_json(lin->bits);
    j["linear"] = l;
    j["reference"] = {{"g_bits", optional_to_json(lin->declared_bits)}};
  } else {
    const auto& nl = std::get<NonlinearSetup>(s.setup);
    json plant;
    plant["map"] = std::string(nl.plant.rhs_id());
    if (nl.plant.map() == ScalarNonlinearPlant::Map::unstable_linear) plant["rate_per_s"] = nl.plant.rate();
    plant["M"] = nl.plant.M();
    plant["x0"] = nl.x0;
    plant["xhat0"] = nl.xhat0;
    j["plant"] = plant;
    json n;
    n["alpha_s"] = nl.alpha;
    threshold_to(n, nl.J);
    n["gain"] = nl.gain;
    n["g_bits"] = optional_to_json(nl.bits);
    j["nonlinear"] = n;
    j["reference"] = {{"g_bits", optional_to_json(nl.declared_bits)}};
  }
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario file " + path.string() + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

std::string scenario_text(const Scenario& s) { return scenario_to_json(s).dump(2) + "\n"; }

namespace {

Scenario linear_paper(std::string name, double gamma, int declared_bits) {
  Scenario s;
  s.name = std::move(name);
  s.horizon = 12.0;
  s.seed = 1;
  s.channel = ChannelConfig{gamma, 0.003, 2, 0, DelayLaw::uniform};
  LinearSetup setup;
  setup.initial_physical = Vec2(0.1, 0.0);
  setup.declared_bits = declared_bits;
  s.setup = setup;
  return s;
}

Scenario nonlinear_paper(std::string name, double delta, double horizon, double gamma, double M, double margin,
                         double gain, double x0, double xhat0, std::optional<int> declared_bits) {
  Scenario s;
  s.name = std::move(name);
  s.horizon = horizon;
  s.seed = 1;
  s.channel = ChannelConfig{gamma, delta, 2, 0, DelayLaw::uniform};
  NonlinearSetup setup;
  setup.plant = ScalarNonlinearPlant::demo(M);
  setup.alpha = 0.01;
  setup.J = ThresholdSpec{std::nullopt, margin};
  setup.gain = gain;
  setup.x0 = x0;
  setup.xhat0 = xhat0;
  setup.declared_bits = declared_bits;
  s.setup = setup;
  return s;
}

std::vector<BuiltinScenario> make_builtins() {
  std::vector<BuiltinScenario> out;
  out.push_back({"paper/linear-gamma2delta",
                 "pendulum, linear scheme, delta=0.003 s, gamma=2 delta=0.006 s, M=0.047, rho0=0.01, b=1.00001, "
                 "J=(M/(lambda1 rho0))(e^{lambda1 gamma}-1)+0.1, K=(225,11); reported g=1 bit",
                 {linear_paper("paper/linear-gamma2delta", 0.006, 1)}});
  out.push_back({"paper/linear-gamma5delta",
                 "as linear-gamma2delta with gamma=5 delta=0.015 s; reported g=7 bits",
                 {linear_paper("paper/linear-gamma5delta", 0.015, 7)}});
  out.push_back({"paper/nonlinear-fig",
                 "x'=2x+sin x+u+w, delta=0.005 s, T=20 s, u=-4 xhat, alpha=0.01 s, M=0.1, "
                 "J=(e^{3 gamma}-1)M/3+0.01; column 1 gamma=0.1 s (g=3), column 2 gamma=0.99 s (g=15)",
                 {nonlinear_paper("paper/nonlinear-fig/gamma-0.1", 0.005, 20.0, 0.1, 0.1, 0.01, 4.0, 0.5, 0.5, 3),
                  nonlinear_paper("paper/nonlinear-fig/gamma-0.99", 0.005, 20.0, 0.99, 0.1, 0.01, 4.0, 0.5, 0.5, 15)}});
  out.push_back({"paper/nonlinear-rate",
                 "rate sweep template: x'=2x+sin x+u+w, delta=0.01 s, T=100 s, u=-2 xhat, z(0)=0.01, M=0.05, "
                 "alpha=0.01 s, J=(e^{3 gamma}-1)M/3+0.05; sweep gamma over 0.02:0.99:20",
                 {nonlinear_paper("paper/nonlinear-rate", 0.01, 100.0, 0.1, 0.05, 0.05, 2.0, 0.5, 0.49, std::nullopt)}});
  return out;
}

}  // namespace

const std::vector<BuiltinScenario>& builtin_scenarios() {
  static const std::vector<BuiltinScenario> builtins = make_builtins();
  return builtins;
}

const BuiltinScenario& find_builtin(std::string_view name) {
  for (const auto& b : builtin_scenarios()) {
    if (b.name == name) return b;
  }
  std::string msg = "unknown scenario '" + std::string(name) + "'; built-ins are:";
  for (const auto& b : builtin_scenarios()) msg += " " + b.name;
  throw ConfigError(msg);
}

std::string describe_builtins() {
  std::ostringstream os;
  for (const auto& b : builtin_scenarios()) {
    os << b.name << "\n  " << b.description << "\n";
    for (const auto& s : b.runs) {
      try {
        const auto rs = resolve(s);
        os << "  - " << s.name << ": scheme=" << to_string(s.scheme()) << " delta_s=" << s.channel.delta
           << " gamma_s=" << rs.scenario.channel.gamma << " horizon_s=" << s.horizon << " J=" << fmt(rs.bounds.J)
           << " g_bits=" << rs.bounds.bits;
        const auto declared = std::visit([](const auto& setup) { return setup.declared_bits; }, s.setup);
        if (declared) os << " (reported " << *declared << ")";
        os << "\n";
      } catch (const ConfigError& e) {
        os << "  - " << s.name << ": infeasible (" << e.what() << ")\n";
      }
    }
  }
  return os.str();
}

void write_trace_csv(std::ostream& os, const SimTrace& trace) {
  if (trace.scheme == SchemeKind::linear) {
    os << "t,x1,x2,xhat1,xhat2,z1,u,w1,w2,phi,phidot\n";
    for (const auto& s : trace.steps) {
      os << fmt(s.t) << ',' << fmt(s.x1) << ',' << fmt(s.x2) << ',' << fmt(s.xhat1) << ',' << fmt(s.xhat2) << ','
         << fmt(s.z) << ',' << fmt(s.u) << ',' << fmt(s.w1) << ',' << fmt(s.w2) << ',' << fmt(s.phi) << ','
         << fmt(s.phidot) << '\n';
    }
  } else {
    os << "t,x,xhat,z,u,w\n";
    for (const auto& s : trace.steps) {
      os << fmt(s.t) << ',' << fmt(s.x1) << ',' << fmt(s.xhat1) << ',' << fmt(s.z) << ',' << fmt(s.u) << ','
         << fmt(s.w1) << '\n';
    }
  }
}

void write_events_csv(std::ostream& os, const SimTrace& trace) {
  struct Row {
    Tick tick;
    int order;
    std::string text;
  };
  std::vector<Row> rows;
  for (const auto& r : trace.receptions) {
    rows.push_back({r.tick, 0,
                    "reception," + std::to_string(r.seq) + ',' + fmt(r.t) + ',' + fmt(r.t_send) + ",,," +
                        fmt(r.z_before) + ',' + fmt(r.z_after)});
  }
  for (const auto& c : trace.candidates) {
    rows.push_back({c.tick, 1, "candidate," + std::to_string(c.k) + ',' + fmt(c.t) + ",,,," + fmt(c.z) + ','});
  }
  for (const auto& s : trace.sends) {
    rows.push_back({s.tick, 2,
                    "send," + std::to_string(s.seq) + ',' + fmt(s.t) + ',' + fmt(s.t) + ',' + std::to_string(s.bits) +
                        ',' + s.payload.to_string() + ',' + fmt(s.z) + ','});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.tick != b.tick ? a.tick < b.tick : a.order < b.order; });
  os << "kind,seq,t,t_send,g_bits,payload,z_before,z_after\n";
  for (const auto& r : rows) os << r.text << '\n';
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points) {
  os << "gamma,g_bits,R_s,entropy_ref,max_z,violations\n";
  for (const auto& p : points) {
    if (!p.feasible) continue;
    os << fmt(p.gamma) << ',' << p.bits << ',' << (p.rate.R_s ? fmt(*p.rate.R_s) : std::string()) << ','
       << fmt(p.entropy_reference) << ',' << fmt(p.max_abs_z) << ',' << p.violations << '\n';
  }
}

json summary_json(const ResolvedScenario& rs, const SimTrace& trace) {
  const RateReport rate = compute_rate(trace);
  const EnvelopeReport env = verify_envelopes(trace, trace.bounds);
  const auto& b = rs.bounds;
  json j;
  j["scenario"] = rs.scenario.name;
  j["scheme"] = std::string(to_string(trace.scheme));
  j["seed"] = trace.seed;
  j["status"] = std::string(to_string(trace.status));
  j["diagnostics"] = trace.diagnostics;
  j["warnings"] = rs.warnings;
  j["delta_s"] = b.delta;
  j["gamma_s"] = b.gamma;
  j["J"] = b.J;
  j["g_bits"] = b.bits;
  j["bounds"] = {{"envelope", b.envelope},         {"envelope_slack", b.envelope_slack},
                 {"jump_bound", b.jump_bound},     {"jump_slack", b.jump_slack},
                 {"sample_bound", b.sample_bound}, {"sample_slack", b.sample_slack},
                 {"period_s", b.period}};
  if (const auto* nl = std::get_if<NonlinearResolved>(&rs.scheme)) {
    j["packet_size"] = {{"ratio", nl->size.ratio}, {"real_bound", nl->size.real_bound}, {"bits", nl->size.bits}};
    const auto rb = rate_lower_bound(nl->trigger, b.bits);
    j["rate_lower_bound"] = {{"deployable", rb.deployable}, {"theorem", rb.theorem}};
  } else if (const auto* lin = std::get_if<LinearResolved>(&rs.scheme)) {
    j["lambda1"] = lin->system.lambda1;
    j["min_intertrigger_bound_s"] = min_intertrigger_bound(lin->trigger);
  }
  j["entropy_reference_bits_per_s"] = b.entropy_reference;
  j["rate"] = {{"R_s", rate.R_s ? json(*rate.R_s) : json(nullptr)},
               {"total_bits", rate.total_bits},
               {"total_time_s", rate.total_time},
               {"trigger_count", rate.trigger_count},
               {"mean_interval_s", rate.mean_interval ? json(*rate.mean_interval) : json(nullptr)},
               {"min_interval_s", rate.min_interval ? json(*rate.min_interval) : json(nullptr)},
               {"max_abs_z", rate.max_abs_z}};
  json checks = json::array();
  for (const auto& c : env.checks) {
    checks.push_back({{"name", c.name},
                      {"bound", c.bound},
                      {"slack", c.slack},
                      {"max_observed", c.max_observed},
                      {"max_excess", c.max_excess},
                      {"samples", c.samples},
                      {"violations", c.violations}});
  }
  j["envelopes"] = checks;
  j["receptions"] = trace.receptions.size();
  return j;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<double> parse_grid(std::string_view spec) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    const auto token = spec.substr(start, colon == std::string_view::npos ? spec.size() - start : colon - start);
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
      throw ConfigError("grid must be start:stop:count, got '" + std::string(spec) + "'");
    }
    parts.push_back(v);
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || parts[2] < 1 || parts[2] != std::floor(parts[2])) {
    throw ConfigError("grid must be start:stop:count with an integer count >= 1, got '" + std::string(spec) + "'");
  }
  return linspace(parts[0], parts[1], static_cast<std::size_t>(parts[2]));
}

}  // namespace etcsim
