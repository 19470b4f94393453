#include "snmpc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "snmpc/error.hpp"
#include "snmpc/fokker_planck.hpp"

namespace snmpc::config {

using nlohmann::json;

namespace {

/// Strict view of one JSON object: every read key is marked, absent keys are
/// recorded as defaulted, finish() rejects the rest.
class Node {
 public:
  Node(const json* j, std::string path, std::set<std::string>& defaulted)
      : j_(j), path_(std::move(path)), defaulted_(defaulted) {
    if (j_ != nullptr && !j_->is_object()) fail(path_, "expected an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    const std::string p = path_ + "/" + key;
    if (j_ == nullptr || !j_->contains(key)) {
      defaulted_.insert(p);
      return;
    }
    seen_.insert(key);
    read(j_->at(key), p, out);
  }

  Node child(const char* key) {
    const std::string p = path_ + "/" + key;
    if (j_ == nullptr || !j_->contains(key)) return Node(nullptr, p, defaulted_);
    seen_.insert(key);
    return Node(&j_->at(key), p, defaulted_);
  }

  void finish() const {
    if (j_ == nullptr) return;
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (!seen_.count(it.key())) fail(path_ + "/" + it.key(), "unknown key");
    }
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config " + (path.empty() ? std::string("/") : path) + ": " + what);
  }

 private:
  static void read(const json& v, const std::string& p, double& out) {
    if (!v.is_number()) fail(p, "expected a number");
    out = v.get<double>();
  }
  static void read(const json& v, const std::string& p, int& out) {
    if (!v.is_number_integer()) fail(p, "expected an integer");
    out = v.get<int>();
  }
  static void read(const json& v, const std::string& p, std::uint64_t& out) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      fail(p, "expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }
  static void read(const json& v, const std::string& p, bool& out) {
    if (!v.is_boolean()) fail(p, "expected a boolean");
    out = v.get<bool>();
  }
  static void read(const json& v, const std::string& p, std::string& out) {
    if (!v.is_string()) fail(p, "expected a string");
    out = v.get<std::string>();
  }
  static void read(const json& v, const std::string& p, std::vector<double>& out) {
    if (!v.is_array()) fail(p, "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(p + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
  }
  static void read(const json& v, const std::string& p, std::vector<std::vector<double>>& out) {
    if (!v.is_array()) fail(p, "expected an array of arrays");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::vector<double> row;
      read(v[i], p + "/" + std::to_string(i), row);
      out.push_back(std::move(row));
    }
  }

  const json* j_;
  std::string path_;
  std::set<std::string>& defaulted_;
  std::set<std::string> seen_;
};

ModelType parse_model_type(const std::string& s) {
  if (s == "cstr") return ModelType::cstr;
  if (s == "ou") return ModelType::ou;
  if (s == "zero") return ModelType::zero;
  Node::fail("/model/type", "expected one of cstr, ou, zero");
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) Node::fail(path, what);
}

void check_size(const std::vector<double>& v, std::size_t n, const std::string& path) {
  require(v.size() == n, path, "expected " + std::to_string(n) + " entries");
}

void check_times(const std::vector<double>& v, double t_end, const std::string& path) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i] >= 0.0 && v[i] <= t_end + 1e-9, path, "times must lie in [0, end time]");
    require(i == 0 || v[i] > v[i - 1], path, "times must be strictly increasing");
  }
}

/// Defaults that depend on the model type apply only to untouched fields.
void apply_model_defaults(ExperimentConfig& cfg) {
  auto untouched = [&](const char* p) { return cfg.defaulted.count(p) > 0; };
  if (cfg.model == ModelType::ou) {
    if (untouched("/fp/grid_lower")) cfg.fp.grid_lower = -cfg.ou.half_width;
    if (untouched("/fp/grid_upper")) cfg.fp.grid_upper = cfg.ou.half_width;
    if (untouched("/fp/diffusion")) cfg.fp.diffusion = 0.5 * cfg.ou.sigma * cfg.ou.sigma;
    if (untouched("/fp/t_end")) cfg.fp.t_end = 5.0;
    if (untouched("/fp/snapshot_times")) cfg.fp.snapshot_times = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    if (untouched("/initial/kind")) cfg.initial.kind = "normal";
    if (untouched("/initial/mean")) cfg.initial.mean = 0.0;
    if (untouched("/initial/variance") && cfg.ou.theta > 0.0) {
      cfg.initial.variance = cfg.ou.sigma * cfg.ou.sigma / (2.0 * cfg.ou.theta);
    }
  } else if (cfg.model == ModelType::zero) {
    if (untouched("/fp/diffusion")) cfg.fp.diffusion = 0.0;
  }
}

void validate(const ExperimentConfig& cfg) {
  require(cfg.fp.n_cells >= 2, "/fp/n_cells", "must be >= 2");
  require(cfg.fp.grid_upper > cfg.fp.grid_lower, "/fp/grid_upper", "must exceed grid_lower");
  require(cfg.fp.diffusion >= 0.0, "/fp/diffusion", "must be >= 0");
  require(cfg.fp.dt_max > 0.0, "/fp/dt_max", "must be positive");
  require(cfg.fp.t_end >= 0.0, "/fp/t_end", "must be >= 0");
  check_times(cfg.fp.snapshot_times, cfg.fp.t_end, "/fp/snapshot_times");
  require(cfg.fp.durations.size() == cfg.fp.inputs.size(), "/fp/inputs",
          "needs one input per duration");
  for (double d : cfg.fp.durations) require(d > 0.0, "/fp/durations", "must be positive");

  const auto& in = cfg.initial;
  require(in.kind == "beta" || in.kind == "normal" || in.kind == "point", "/initial/kind",
          "expected one of beta, normal, point");
  if (in.kind == "beta") {
    require(in.upper > in.lower, "/initial/upper", "must exceed lower");
    require(in.alpha > 0.0 && in.beta > 0.0, "/initial/alpha", "shapes must be positive");
  }
  if (in.kind == "normal") require(in.variance > 0.0, "/initial/variance", "must be positive");

  const auto& o = cfg.ocp;
  require(o.objective == "temperature_tracking" || o.objective == "input_weight",
          "/ocp/objective", "expected temperature_tracking or input_weight");
  check_size(o.input_weight, 4, "/ocp/input_weight");
  check_size(o.P, 4, "/ocp/P");
  check_size(o.center, 2, "/ocp/center");
  check_size(o.input_lower, 2, "/ocp/input_lower");
  check_size(o.input_upper, 2, "/ocp/input_upper");
  require(o.eval_step > 0.0, "/ocp/eval_step", "must be positive");
  require(o.reference_variance > 0.0, "/ocp/reference_variance", "must be positive");
  require(o.confidence > 0.0 && o.confidence < 1.0, "/ocp/confidence", "must lie in (0, 1)");

  const auto& c = cfg.closed_loop;
  require(c.realizations >= 1, "/closed_loop/realizations", "must be >= 1");
  require(c.workers >= 0, "/closed_loop/workers", "must be >= 0");
  require(c.measurement_std > 0.0, "/closed_loop/measurement_std", "must be positive");
  check_times(c.snapshot_times, c.run_time, "/closed_loop/snapshot_times");
}

}  // namespace

const char* to_string(ModelType type) {
  switch (type) {
    case ModelType::cstr: return "cstr";
    case ModelType::ou: return "ou";
    case ModelType::zero: return "zero";
  }
  return "unknown";
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  Node root(&doc, "", cfg.defaulted);

  Node model = root.child("model");
  std::string type = "cstr";
  model.get("type", type);
  cfg.model = parse_model_type(type);
  {
    Node p = model.child("cstr");
    auto& c = cfg.cstr;
    p.get("V", c.V);
    p.get("F", c.F);
    p.get("T0", c.T0);
    p.get("E", c.E);
    p.get("R", c.R);
    p.get("dH", c.dH);
    p.get("k0", c.k0);
    p.get("cp", c.cp);
    p.get("rho", c.rho);
    p.get("sigma_CA", c.sigma_CA);
    p.finish();
  }
  {
    Node p = model.child("ou");
    p.get("theta", cfg.ou.theta);
    p.get("sigma", cfg.ou.sigma);
    p.get("half_width", cfg.ou.half_width);
    p.finish();
  }
  model.finish();

  {
    Node p = root.child("initial");
    auto& in = cfg.initial;
    p.get("kind", in.kind);
    p.get("lower", in.lower);
    p.get("upper", in.upper);
    p.get("alpha", in.alpha);
    p.get("beta", in.beta);
    p.get("mean", in.mean);
    p.get("variance", in.variance);
    p.get("temperature", in.temperature);
    p.finish();
  }
  {
    Node p = root.child("fp");
    auto& f = cfg.fp;
    p.get("grid_lower", f.grid_lower);
    p.get("grid_upper", f.grid_upper);
    p.get("n_cells", f.n_cells);
    p.get("diffusion", f.diffusion);
    p.get("dt_max", f.dt_max);
    p.get("t_end", f.t_end);
    p.get("snapshot_times", f.snapshot_times);
    p.get("durations", f.durations);
    p.get("inputs", f.inputs);
    p.finish();
  }
  {
    Node p = root.child("ocp");
    auto& o = cfg.ocp;
    p.get("prediction_horizon", o.prediction_horizon);
    p.get("control_horizon", o.control_horizon);
    p.get("n_intervals", o.n_intervals);
    p.get("objective", o.objective);
    p.get("input_weight", o.input_weight);
    p.get("target_temperature", o.target_temperature);
    p.get("threshold", o.threshold);
    p.get("confidence", o.confidence);
    p.get("gamma", o.gamma);
    p.get("P", o.P);
    p.get("center", o.center);
    p.get("stability_outside_noise_floor", o.stability_outside_noise_floor);
    p.get("input_lower", o.input_lower);
    p.get("input_upper", o.input_upper);
    p.get("reference_mean", o.reference_mean);
    p.get("reference_variance", o.reference_variance);
    p.get("eval_step", o.eval_step);
    p.get("nominal_dt", o.nominal_dt);
    Node b = p.child("solver");
    auto& s = o.budget;
    b.get("max_evaluations", s.max_evaluations);
    b.get("initial_penalty", s.initial_penalty);
    b.get("penalty_growth", s.penalty_growth);
    b.get("penalty_rounds", s.penalty_rounds);
    b.get("step_tolerance", s.step_tolerance);
    b.get("initial_step", s.initial_step);
    b.get("warm_start_step", s.warm_start_step);
    b.get("feasibility_tolerance", s.feasibility_tolerance);
    b.finish();
    p.finish();
  }
  {
    Node p = root.child("closed_loop");
    auto& c = cfg.closed_loop;
    p.get("sample_period", c.sample_period);
    p.get("run_time", c.run_time);
    p.get("measurement_std", c.measurement_std);
    p.get("plant_dt", c.plant_dt);
    p.get("record_every", c.record_every);
    p.get("realizations", c.realizations);
    p.get("seed", c.seed);
    p.get("workers", c.workers);
    p.get("snapshot_times", c.snapshot_times);
    p.finish();
  }
  root.get("output_dir", cfg.output_dir);
  root.finish();

  apply_model_defaults(cfg);
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
  const auto& c = cfg.cstr;
  const auto& in = cfg.initial;
  const auto& f = cfg.fp;
  const auto& o = cfg.ocp;
  const auto& s = o.budget;
  const auto& cl = cfg.closed_loop;
  json j;
  j["model"] = {{"type", to_string(cfg.model)},
                {"cstr",
                 {{"V", c.V}, {"F", c.F}, {"T0", c.T0}, {"E", c.E}, {"R", c.R}, {"dH", c.dH},
                  {"k0", c.k0}, {"cp", c.cp}, {"rho", c.rho}, {"sigma_CA", c.sigma_CA}}},
                {"ou", {{"theta", cfg.ou.theta}, {"sigma", cfg.ou.sigma},
                        {"half_width", cfg.ou.half_width}}}};
  j["initial"] = {{"kind", in.kind},   {"lower", in.lower}, {"upper", in.upper},
                  {"alpha", in.alpha}, {"beta", in.beta},   {"mean", in.mean},
                  {"variance", in.variance}, {"temperature", in.temperature}};
  j["fp"] = {{"grid_lower", f.grid_lower}, {"grid_upper", f.grid_upper},
             {"n_cells", f.n_cells},       {"diffusion", f.diffusion},
             {"dt_max", f.dt_max},         {"t_end", f.t_end},
             {"snapshot_times", f.snapshot_times}, {"durations", f.durations},
             {"inputs", f.inputs}};
  j["ocp"] = {{"prediction_horizon", o.prediction_horizon},
              {"control_horizon", o.control_horizon},
              {"n_intervals", o.n_intervals},
              {"objective", o.objective},
              {"input_weight", o.input_weight},
              {"target_temperature", o.target_temperature},
              {"threshold", o.threshold},
              {"confidence", o.confidence},
              {"gamma", o.gamma},
              {"P", o.P},
              {"center", o.center},
              {"stability_outside_noise_floor", o.stability_outside_noise_floor},
              {"input_lower", o.input_lower},
              {"input_upper", o.input_upper},
              {"reference_mean", o.reference_mean},
              {"reference_variance", o.reference_variance},
              {"eval_step", o.eval_step},
              {"nominal_dt", o.nominal_dt},
              {"solver",
               {{"max_evaluations", s.max_evaluations},
                {"initial_penalty", s.initial_penalty},
                {"penalty_growth", s.penalty_growth},
                {"penalty_rounds", s.penalty_rounds},
                {"step_tolerance", s.step_tolerance},
                {"initial_step", s.initial_step},
                {"warm_start_step", s.warm_start_step},
                {"feasibility_tolerance", s.feasibility_tolerance}}}};
  j["closed_loop"] = {{"sample_period", cl.sample_period}, {"run_time", cl.run_time},
                      {"measurement_std", cl.measurement_std}, {"plant_dt", cl.plant_dt},
                      {"record_every", cl.record_every}, {"realizations", cl.realizations},
                      {"seed", cl.seed}, {"workers", cl.workers},
                      {"snapshot_times", cl.snapshot_times}};
  j["output_dir"] = cfg.output_dir;
  return j;
}

model::ControlAffineSde build_model(const ExperimentConfig& cfg) {
  switch (cfg.model) {
    case ModelType::cstr: return model::build_cstr(cfg.cstr);
    case ModelType::ou: return model::build_ou(cfg.ou.theta, cfg.ou.sigma, cfg.ou.half_width);
    case ModelType::zero: break;
  }
  auto zero_drift = [](const model::Vector&) { return model::Vector::Zero(1); };
  auto zero_map = [](const model::Vector&) { return model::Matrix::Zero(1, 1); };
  model::Box domain{model::Vector::Constant(1, cfg.fp.grid_lower),
                    model::Vector::Constant(1, cfg.fp.grid_upper)};
  return model::ControlAffineSde(1, 1, 1, zero_drift, zero_map, zero_map, domain, {"x"});
}

fp::Grid1D build_grid(const ExperimentConfig& cfg) {
  return fp::Grid1D(cfg.fp.grid_lower, cfg.fp.grid_upper, cfg.fp.n_cells);
}

model::SteadyStateInputs steady_inputs(const ExperimentConfig& cfg) {
  if (cfg.model != ModelType::cstr) throw ConfigError("steady inputs: only defined for the cstr model");
  const auto sys = model::build_cstr(cfg.cstr);
  const Eigen::Vector2d x_ss(cfg.ocp.center[0], cfg.ocp.center[1]);
  auto ss = model::solve_steady_inputs(sys, x_ss, Eigen::Vector2d(x_ss[0], 0.0));
  if (!(ss.residual_norm <= 1e-6)) {
    std::ostringstream msg;
    msg << "steady inputs: no equilibrium at the configured center (residual "
        << ss.residual_norm << ")";
    throw NumericError(msg.str());
  }
  return ss;
}

model::Beta4Distribution initial_beta(const ExperimentConfig& cfg) {
  const auto& in = cfg.initial;
  if (in.kind != "beta") throw ConfigError("config /initial/kind: a beta distribution is required");
  return model::Beta4Distribution(in.lower, in.upper, in.alpha, in.beta);
}

fp::DensityField initial_density(const ExperimentConfig& cfg) {
  const fp::Grid1D grid = build_grid(cfg);
  const auto& in = cfg.initial;
  if (in.kind == "beta") return fp::density_from_beta(initial_beta(cfg), grid);
  if (in.kind == "normal") return fp::density_from_normal(in.mean, in.variance, grid).field;
  std::vector<double> w(grid.n_cells(), 0.0);
  w[grid.locate(in.mean)] = 1.0;
  return fp::DensityField::from_masses(grid, std::move(w));
}

ocp::OcpSpec build_ocp(const ExperimentConfig& cfg) {
  if (cfg.model != ModelType::cstr) throw ConfigError("ocp: only the cstr model is supported");
  const auto& o = cfg.ocp;
  const fp::Grid1D grid = build_grid(cfg);
  model::Matrix P(2, 2);
  P << o.P[0], o.P[1], o.P[2], o.P[3];
  model::Matrix R(2, 2);
  R << o.input_weight[0], o.input_weight[1], o.input_weight[2], o.input_weight[3];
  ocp::OcpSpec spec{
      cfg.cstr,
      o.prediction_horizon,
      o.control_horizon,
      o.n_intervals,
      fp::density_from_normal(o.reference_mean, o.reference_variance, grid).field,
      o.objective == "input_weight" ? ocp::ObjectiveForm::input_weight
                                    : ocp::ObjectiveForm::temperature_tracking,
      R,
      o.target_temperature,
      model::StateConstraint{0, o.threshold, false, o.confidence},
      lyap::LyapunovCertificate(P, o.gamma, Eigen::Vector2d(o.center[0], o.center[1])),
      o.stability_outside_noise_floor,
      model::InputBounds(Eigen::Vector2d(o.input_lower[0], o.input_lower[1]),
                         Eigen::Vector2d(o.input_upper[0], o.input_upper[1])),
      ocp::uniform_eval_grid(o.prediction_horizon, o.eval_step),
      cfg.fp.diffusion,
      cfg.fp.dt_max,
      o.nominal_dt,
      steady_inputs(cfg).u,
  };
  spec.validate();
  return spec;
}

mpc::ClosedLoopConfig build_closed_loop(const ExperimentConfig& cfg) {
  const auto& c = cfg.closed_loop;
  mpc::ClosedLoopConfig loop{c.sample_period, c.run_time, {c.measurement_std},
                             build_ocp(cfg),  cfg.ocp.budget, c.plant_dt,
                             c.record_every};
  loop.validate();
  return loop;
}

mpc::MonteCarloOptions build_monte_carlo(const ExperimentConfig& cfg) {
  const auto& c = cfg.closed_loop;
  const auto& in = cfg.initial;
  mpc::MonteCarloOptions opt;
  opt.n_realizations = c.realizations;
  opt.seed = c.seed;
  opt.snapshot_times = c.snapshot_times;
  opt.initial_temperature = in.temperature;
  if (in.kind == "beta") {
    const model::Beta4Distribution dist = initial_beta(cfg);
    opt.initial_concentration = [dist](std::mt19937_64& e) { return dist.sample(e); };
  } else if (in.kind == "normal") {
    const double lo = cfg.fp.grid_lower, hi = cfg.fp.grid_upper;
    const double mean = in.mean, sd = std::sqrt(in.variance);
    opt.initial_concentration = [=](std::mt19937_64& e) {
      return std::clamp(std::normal_distribution<double>(mean, sd)(e), lo, hi);
    };
  } else {
    const double x = in.mean;
    opt.initial_concentration = [x](std::mt19937_64&) { return x; };
  }
  return opt;
}

ControlPolicy build_fp_policy(const ExperimentConfig& cfg) {
  const auto& f = cfg.fp;
  const int m = cfg.model == ModelType::cstr ? 2 : 1;
  if (f.durations.empty()) {
    const double horizon = f.t_end > 0.0 ? f.t_end : 1.0;
    const model::Vector u = cfg.model == ModelType::cstr ? steady_inputs(cfg).u
                                                         : model::Vector::Zero(1);
    return ControlPolicy::constant(horizon, 1, u);
  }
  std::vector<PolicyInterval> intervals;
  for (std::size_t i = 0; i < f.durations.size(); ++i) {
    if (static_cast<int>(f.inputs[i].size()) != m) {
      Node::fail("/fp/inputs/" + std::to_string(i), "expected " + std::to_string(m) + " entries");
    }
    intervals.push_back({f.durations[i], Eigen::Map<const Eigen::VectorXd>(f.inputs[i].data(), m)});
  }
  return ControlPolicy(std::move(intervals));
}

}  // namespace snmpc::config
