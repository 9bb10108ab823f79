#include "slsmpc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace slsmpc {

using nlohmann::json;

std::string to_string(Method m) {
  switch (m) {
    case Method::Sls: return "sls";
    case Method::TubeUnit: return "tube_unit";
    case Method::TubeZinv: return "tube_zinv";
  }
  return "unknown";
}

namespace {

Method method_from_string(const std::string& s) {
  if (s == "sls") return Method::Sls;
  if (s == "tube_unit") return Method::TubeUnit;
  if (s == "tube_zinv") return Method::TubeZinv;
  throw std::invalid_argument("unknown method: " + s);
}

MatrixXd parse_matrix(const json& j, const std::string& name) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw std::invalid_argument(name + ": empty matrix");
  MatrixXd M(rows.size(), rows[0].size());
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) {
      throw std::invalid_argument(name + ": ragged matrix");
    }
    for (size_t c = 0; c < rows[r].size(); ++c) M(r, c) = rows[r][c];
  }
  return M;
}

VectorXd parse_vector(const json& j, const std::string& name) {
  const auto v = j.get<std::vector<double>>();
  if (v.empty()) throw std::invalid_argument(name + ": empty vector");
  return Eigen::Map<const VectorXd>(v.data(), v.size());
}

json matrix_json(const MatrixXd& M) {
  std::vector<std::vector<double>> rows;
  for (int r = 0; r < M.rows(); ++r) {
    rows.emplace_back(M.row(r).data(), M.row(r).data() + M.cols());
  }
  return rows;
}

void parallel_for(int jobs, int count, const std::function<void(int)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, count);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

double fnv1a_hash(const std::string& text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return static_cast<double>(h >> 11);
}

std::string format_double(double v) {
  char buf[40];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string hash_hex(const std::string& text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig cfg;
  cfg.horizon = j.at("horizon").get<int>();
  if (cfg.horizon < 1) throw std::invalid_argument("horizon must be >= 1");

  const json& jm = j.at("model");
  const MatrixXd A = parse_matrix(jm.at("A"), "model.A");
  const MatrixXd B = parse_matrix(jm.at("B"), "model.B");
  cfg.model = LtvModel::lti(A, B, cfg.horizon, jm.value("eps_A", 0.0),
                            jm.value("eps_B", 0.0), jm.value("sigma_w", 0.0));
  cfg.model.uncertainty =
      jm.value("uncertainty", std::string("memoryless")) == "full_ltv"
          ? UncertaintyStructure::FullLtv
          : UncertaintyStructure::Memoryless;

  const json& jc = j.at("constraints");
  cfg.Fx = parse_matrix(jc.at("Fx"), "constraints.Fx");
  cfg.bx = parse_vector(jc.at("bx"), "constraints.bx");
  cfg.Fu = parse_matrix(jc.at("Fu"), "constraints.Fu");
  cfg.bu = parse_vector(jc.at("bu"), "constraints.bu");
  const json& jt = jc.at("terminal");
  const std::string tmode = jt.at("mode").get<std::string>();
  if (tmode == "dp_computed") {
    cfg.terminal_mode = TerminalMode::DpComputed;
  } else if (tmode == "explicit") {
    cfg.terminal_mode = TerminalMode::Explicit;
    cfg.FT = parse_matrix(jt.at("FT"), "terminal.FT");
    cfg.bT = parse_vector(jt.at("bT"), "terminal.bT");
  } else {
    throw std::invalid_argument("terminal.mode must be dp_computed|explicit");
  }

  const json& jw = j.at("cost");
  const MatrixXd Q = parse_matrix(jw.at("Q"), "cost.Q");
  const MatrixXd R = parse_matrix(jw.at("R"), "cost.R");
  const MatrixXd QT = jw.contains("QT") ? parse_matrix(jw.at("QT"), "cost.QT")
                                        : Q;
  cfg.weights = CostWeights::constant(Q, R, QT, cfg.horizon);

  const int n = cfg.model.state_dim();
  const int m = cfg.model.input_dim();
  if (cfg.Fx.cols() != n || cfg.Fu.cols() != m || Q.rows() != n ||
      R.rows() != m) {
    throw std::invalid_argument("config: dimension mismatch across sections");
  }
  cfg.weights.validate(cfg.horizon, n, m);

  if (j.contains("search")) {
    const json& js = j.at("search");
    cfg.eps_tol = js.value("eps_tol", 0.01);
    if (js.contains("range")) {
      const auto r = js.at("range").get<std::vector<double>>();
      if (r.size() != 2) throw std::invalid_argument("search.range: [lo,hi]");
      cfg.ranges.tau = {r[0], r[1]};
      cfg.ranges.gamma = {r[0], r[1]};
      cfg.ranges.beta = {r[0], r[1]};
    }
    if (js.contains("grid")) {
      const auto g = js.at("grid").get<std::vector<int>>();
      if (g.size() != 3) throw std::invalid_argument("search.grid: 3 dims");
      cfg.grid_dims = {g[0], g[1], g[2]};
    }
    cfg.alpha = js.value("alpha", 0.5);
  }

  if (j.contains("simulation")) {
    const json& js = j.at("simulation");
    cfg.episodes = js.value("episodes", 10);
    cfg.seed = js.value("seed", 0ull);
    cfg.sampling = sampling_mode_from_string(
        js.value("sampling", std::string("mixed")));
    cfg.sim_steps = js.value("steps", 0);
    if (js.contains("x0")) cfg.x0 = parse_vector(js.at("x0"), "x0");
  }
  if (cfg.x0.size() == 0) cfg.x0 = VectorXd::Zero(n);
  if (cfg.x0.size() != n) throw std::invalid_argument("x0 dimension mismatch");

  const std::string method = j.value("method", std::string("sls"));
  if (method == "all") {
    cfg.methods = {Method::Sls, Method::TubeUnit, Method::TubeZinv};
  } else {
    cfg.methods = {method_from_string(method)};
  }

  if (j.contains("tube")) {
    cfg.tube_truncation_tol = j.at("tube").value("truncation_tol", 1e-4);
    cfg.tube_include_zero_term = j.at("tube").value("include_zero_term",
                                                    false);
  }
  if (j.contains("feasmap")) {
    cfg.feasmap_spacing = j.at("feasmap").value("spacing", 0.5);
  }
  if (j.contains("invariant_set")) {
    cfg.invariant_iteration_cap =
        j.at("invariant_set").value("iteration_cap", 200);
  }
  cfg.rng_name = j.value("rng", std::string("mt19937_64"));
  if (cfg.rng_name != "mt19937_64") {
    throw std::invalid_argument("rng: only mt19937_64 is supported");
  }
  cfg.config_hash = hash_hex(json::parse(text).dump());
  return cfg;
}

LtvModel ExperimentConfig::model_at_horizon(int T) const {
  LtvModel m = LtvModel::lti(model.A[0], model.B[0], T, model.eps_A,
                             model.eps_B, model.sigma_w);
  m.uncertainty = model.uncertainty;
  return m;
}

CostWeights ExperimentConfig::weights_at_horizon(int T) const {
  return CostWeights::constant(weights.Q[0], weights.R[0], weights.QT, T);
}

TerminalInfo resolve_terminal(const ExperimentConfig& config, int horizon) {
  TerminalInfo info;
  info.constraints.Fx = config.Fx;
  info.constraints.bx = config.bx;
  info.constraints.Fu = config.Fu;
  info.constraints.bu = config.bu;
  if (config.terminal_mode == ExperimentConfig::TerminalMode::Explicit) {
    info.constraints.FT = config.FT;
    info.constraints.bT = config.bT;
    info.XT = Polytope::from_hrep(config.FT, config.bT);
    info.XT.ensure_vrep();
    info.from_dp = false;
    return info;
  }
  info.dp = max_robust_invariant_set(config.state_set(), config.input_set(),
                                     config.model_at_horizon(1),
                                     config.invariant_iteration_cap);
  info.XT = info.dp.set;
  info.from_dp = true;
  if (!info.XT.is_empty()) {
    info.XT.ensure_hrep();
    info.XT.ensure_vrep();
    info.constraints.FT = info.XT.F();
    info.constraints.bT = info.XT.b();
  } else {
    info.constraints.FT = MatrixXd::Zero(1, config.model.state_dim());
    info.constraints.bT = VectorXd::Constant(1, -1.0);  // empty set
  }
  return info;
}

namespace {

double row_margin(const MatrixXd& F, const VectorXd& b, const VectorXd& v) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < F.rows(); ++i) m = std::min(m, b(i) - F.row(i).dot(v));
  return m;
}

struct StepController {
  // per-step OCP solve for the configured method; returns status + input
  virtual ~StepController() = default;
  virtual EpisodeStep step(const VectorXd& x) = 0;
};

struct SlsController : StepController {
  const ExperimentConfig& cfg;
  const TerminalInfo& terminal;
  int T;
  const OfflineBounds* offline;
  LtvModel model;
  CostWeights weights;

  SlsController(const ExperimentConfig& c, const TerminalInfo& t, int horizon,
                const OfflineBounds* off)
      : cfg(c), terminal(t), T(horizon), offline(off),
        model(c.model_at_horizon(horizon)),
        weights(c.weights_at_horizon(horizon)) {}

  EpisodeStep step(const VectorXd& x) override {
    EpisodeStep st;
    st.x = x;
    SearchConfig sc;
    sc.ranges = cfg.ranges;
    sc.eps_tol = cfg.eps_tol;
    sc.grid.dims = cfg.grid_dims;
    sc.alpha = cfg.alpha;
    sc.offline = offline;
    MpcStepResult res =
        mpc_step(model, terminal.constraints, weights, x, sc);
    st.status = to_string(res.solution.status);
    st.bisect_s = res.bisect_time_s;
    st.grid_s = res.grid_time_s;
    if (res.u0) {
      st.u = *res.u0;
      st.hyper = res.solution.hyper;
      st.objective = res.solution.objective;
    }
    return st;
  }
};

struct TubeStepController : StepController {
  const ExperimentConfig& cfg;
  const TerminalInfo& terminal;
  int T;
  TubeShape shape;
  LtvModel model;
  CostWeights weights;

  TubeStepController(const ExperimentConfig& c, const TerminalInfo& t,
                     int horizon, Method method)
      : cfg(c), terminal(t), T(horizon),
        model(c.model_at_horizon(horizon)),
        weights(c.weights_at_horizon(horizon)) {
    shape = method == Method::TubeUnit
                ? make_unit_shape(model.state_dim())
                : make_zinv_shape(model, weights.Q[0], weights.R[0],
                                  cfg.tube_truncation_tol);
  }

  EpisodeStep step(const VectorXd& x) override {
    EpisodeStep st;
    st.x = x;
    const auto t0 = std::chrono::steady_clock::now();
    TubeProgram prog =
        build_tube_program(model, terminal.constraints, weights, x, shape);
    TubeSolution sol = solve_tube(prog);
    st.grid_s = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    if (sol.feasible) {
      st.status = "feasible";
      st.u = sol.u0;
      st.objective = sol.objective;
    } else if (sol.status == SolveStatus::PrimalInfeasible) {
      st.status = "infeasible";
    } else {
      st.status = "unverified";
    }
    return st;
  }
};

std::unique_ptr<StepController> make_controller(const ExperimentConfig& cfg,
                                                Method method,
                                                const TerminalInfo& terminal,
                                                int horizon,
                                                const OfflineBounds* offline) {
  if (method == Method::Sls) {
    return std::make_unique<SlsController>(cfg, terminal, horizon, offline);
  }
  return std::make_unique<TubeStepController>(cfg, terminal, horizon, method);
}

}  // namespace

EpisodeRecord run_episode(const ExperimentConfig& config, Method method,
                          const TerminalInfo& terminal, int horizon,
                          const VectorXd& x0, int steps, Rng rng,
                          const OfflineBounds* offline) {
  EpisodeRecord rec;
  auto controller =
      make_controller(config, method, terminal, horizon, offline);
  const LtvModel model = config.model_at_horizon(horizon);
  const int n = model.state_dim();
  VectorXd x = x0;
  for (int k = 0; k < steps; ++k) {
    EpisodeStep st = controller->step(x);
    st.margin_state = row_margin(config.Fx, config.bx, x);
    if (st.u.size() > 0) st.margin_input = row_margin(config.Fu, config.bu,
                                                      st.u);
    const bool ok = st.status == "feasible";
    rec.steps.push_back(st);
    if (!ok) {
      rec.abort_reason = st.status;
      return rec;
    }
    // advance the true system with a fresh admissible realization
    LtvModel one = config.model_at_horizon(1);
    UncertaintySample s = sample_uncertainty(one, config.sampling, rng);
    x = (model.A[0] + s.deltaA_t[0]) * x +
        (model.B[0] + s.deltaB_t[0]) * rec.steps.back().u + s.w[0];
  }
  EpisodeStep fin;
  fin.x = x;
  fin.status = "terminal";
  fin.margin_state = row_margin(config.Fx, config.bx, x);
  fin.margin_input = 0.0;
  rec.steps.push_back(fin);
  rec.completed = true;
  rec.terminal_membership = terminal.XT.is_empty() ? false
                                                   : terminal.XT.contains(x);
  (void)n;
  return rec;
}

namespace {

json episode_json(const EpisodeRecord& rec) {
  json out;
  out["completed"] = rec.completed;
  out["terminal_membership"] = rec.terminal_membership;
  out["abort_reason"] = rec.abort_reason;
  json steps = json::array();
  for (const auto& st : rec.steps) {
    json s;
    s["status"] = st.status;
    s["x"] = std::vector<double>(st.x.data(), st.x.data() + st.x.size());
    s["u"] = std::vector<double>(st.u.data(), st.u.data() + st.u.size());
    s["objective"] = st.objective;
    s["hyper"] = {{"tau", st.hyper.tau},
                  {"gamma", st.hyper.gamma},
                  {"beta", st.hyper.beta}};
    s["margin_state"] = st.margin_state;
    s["margin_input"] = st.margin_input;
    s["bisect_s"] = st.bisect_s;
    s["grid_s"] = st.grid_s;
    steps.push_back(s);
  }
  out["steps"] = steps;
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace

int cmd_invset(const ExperimentConfig& config, const std::string& out_dir,
               const CliOverrides& ov) {
  std::filesystem::create_directories(out_dir);
  const int T = ov.horizon.value_or(config.horizon);
  TerminalInfo info = resolve_terminal(config, T);
  json log;
  log["config_hash"] = config.config_hash;
  log["from_dp"] = info.from_dp;
  log["iterations"] = info.dp.iterations;
  log["gaps"] = info.dp.gaps;
  log["empty"] = info.XT.is_empty();
  write_file(out_dir + "/invset_log.json", log.dump(2) + "\n");
  write_file(out_dir + "/xt.json", info.XT.to_json() + "\n");
  return info.XT.is_empty() ? 2 : 0;
}

int cmd_simulate(const ExperimentConfig& config, const std::string& out_dir,
                 const CliOverrides& ov) {
  std::filesystem::create_directories(out_dir);
  const int T = ov.horizon.value_or(config.horizon);
  const uint64_t seed = ov.seed.value_or(config.seed);
  std::vector<Method> methods = config.methods;
  if (ov.method) methods = {method_from_string(*ov.method)};
  const int steps = config.sim_steps > 0 ? config.sim_steps : T;
  TerminalInfo terminal = resolve_terminal(config, T);
  const Rng master(seed);

  std::ostringstream csv;
  const int n = config.model.state_dim();
  const int m = config.model.input_dim();
  csv << "method,episode,step,status";
  for (int c = 0; c < n; ++c) csv << ",x" << c;
  for (int c = 0; c < m; ++c) csv << ",u" << c;
  csv << ",margin_state,margin_input\n";

  json record;
  record["config_hash"] = config.config_hash;
  record["seed"] = seed;
  record["horizon"] = T;
  record["sampling"] = to_string(config.sampling);
  record["episodes"] = json::array();

  bool any_completed = false;
  bool all_certified_at_start = true;
  for (size_t mi = 0; mi < methods.size(); ++mi) {
    const Method method = methods[mi];
    OfflineBounds offline;
    const OfflineBounds* off = nullptr;
    if (method == Method::Sls) {
      offline = compute_offline_bounds(config.model_at_horizon(T),
                                       terminal.constraints,
                                       config.weights_at_horizon(T),
                                       config.ranges, config.eps_tol,
                                       config.alpha);
      off = &offline;
    }
    std::vector<EpisodeRecord> recs(config.episodes);
    parallel_for(ov.jobs, config.episodes, [&](int e) {
      recs[e] = run_episode(config, method, terminal, T, config.x0, steps,
                            master.fork(mi * 100003 + e), off);
    });
    for (int e = 0; e < config.episodes; ++e) {
      const EpisodeRecord& rec = recs[e];
      any_completed = any_completed || rec.completed;
      if (rec.completed ||
          !(rec.steps.size() == 1 &&
            (rec.abort_reason == "infeasible" ||
             rec.abort_reason == "infeasible_certified"))) {
        all_certified_at_start = false;
      }
      for (size_t k = 0; k < rec.steps.size(); ++k) {
        const EpisodeStep& st = rec.steps[k];
        csv << to_string(method) << ',' << e << ',' << k << ',' << st.status;
        for (int c = 0; c < n; ++c) csv << ',' << format_double(st.x(c));
        for (int c = 0; c < m; ++c) {
          csv << ','
              << (st.u.size() > 0 ? format_double(st.u(c)) : std::string(""));
        }
        csv << ',' << format_double(st.margin_state) << ','
            << format_double(st.margin_input) << '\n';
      }
      json ej = episode_json(rec);
      ej["method"] = to_string(method);
      ej["episode"] = e;
      record["episodes"].push_back(ej);
    }
    if (off) {
      record["offline_lb_tau"] = offline.lb_tau;
      record["offline_lb_beta"] = offline.lb_beta;
    }
  }
  write_file(out_dir + "/trajectories.csv", csv.str());
  write_file(out_dir + "/runrecord.json", record.dump(2) + "\n");
  if (!any_completed && all_certified_at_start) return 2;
  return 0;
}

int cmd_feasmap(const ExperimentConfig& config, const std::string& out_dir,
                const CliOverrides& ov) {
  std::filesystem::create_directories(out_dir);
  const int T = ov.horizon.value_or(config.horizon);
  std::vector<Method> methods = config.methods;
  if (ov.method) methods = {method_from_string(*ov.method)};
  TerminalInfo terminal = resolve_terminal(config, T);

  // grid over the bounding box of the terminal set
  std::vector<VectorXd> points;
  const int n = config.model.state_dim();
  if (!terminal.XT.is_empty()) {
    Polytope XT = terminal.XT;
    XT.ensure_vrep();
    VectorXd lo = XT.vertices()[0], hi = XT.vertices()[0];
    for (const auto& v : XT.vertices()) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    const double h = config.feasmap_spacing;
    std::function<void(int, VectorXd&)> fill = [&](int d, VectorXd& x) {
      if (d == n) {
        points.push_back(x);
        return;
      }
      for (double v = lo(d); v <= hi(d) + 1e-9; v += h) {
        x(d) = v;
        fill(d + 1, x);
      }
    };
    VectorXd x(n);
    fill(0, x);
  }

  std::ostringstream csv;
  csv << "method";
  for (int c = 0; c < n; ++c) csv << ",x" << c;
  csv << ",status,in_xt\n";
  json log;
  log["config_hash"] = config.config_hash;
  log["horizon"] = T;
  log["num_points"] = points.size();

  for (const Method method : methods) {
    OfflineBounds offline;
    const OfflineBounds* off = nullptr;
    LtvModel model = config.model_at_horizon(T);
    CostWeights weights = config.weights_at_horizon(T);
    if (method == Method::Sls) {
      offline = compute_offline_bounds(model, terminal.constraints, weights,
                                       config.ranges, config.eps_tol,
                                       config.alpha);
      off = &offline;
      log[to_string(method)] = {{"offline_lb_tau", offline.lb_tau},
                                {"offline_lb_beta", offline.lb_beta}};
    }
    std::unique_ptr<TubeShape> shape;
    if (method != Method::Sls) {
      shape = std::make_unique<TubeShape>(
          method == Method::TubeUnit
              ? make_unit_shape(n)
              : make_zinv_shape(model, weights.Q[0], weights.R[0],
                                config.tube_truncation_tol));
    }
    std::vector<std::string> status(points.size());
    parallel_for(ov.jobs, static_cast<int>(points.size()), [&](int i) {
      const VectorXd& x0 = points[i];
      try {
        if (method == Method::Sls) {
          SearchConfig sc;
          sc.ranges = config.ranges;
          sc.eps_tol = config.eps_tol;
          sc.grid.dims = config.grid_dims;
          sc.grid.first_feasible = true;
          sc.alpha = config.alpha;
          sc.offline = off;
          MpcStepResult res =
              mpc_step(model, terminal.constraints, weights, x0, sc);
          status[i] = to_string(res.solution.status);
        } else {
          TubeProgram prog = build_tube_program(model, terminal.constraints,
                                                weights, x0, *shape);
          SolveResult cert;
          const FeasOutcome f =
              check_feasible(prog.program, {}, nullptr, &cert);
          status[i] = f == FeasOutcome::Feasible     ? "feasible"
                      : f == FeasOutcome::Infeasible ? "infeasible"
                                                     : "unverified";
        }
      } catch (const std::exception&) {
        status[i] = "unverified";
      }
    });
    for (size_t i = 0; i < points.size(); ++i) {
      csv << to_string(method);
      for (int c = 0; c < n; ++c) csv << ',' << format_double(points[i](c));
      csv << ',' << status[i] << ','
          << (terminal.XT.is_empty() ? 0 : terminal.XT.contains(points[i]))
          << '\n';
    }
  }
  write_file(out_dir + "/feasmap.csv", csv.str());
  write_file(out_dir + "/feasmap_log.json", log.dump(2) + "\n");
  return 0;
}

int cmd_bench(const ExperimentConfig& config, const std::string& out_dir,
              const std::vector<int>& horizons, const CliOverrides& ov) {
  std::filesystem::create_directories(out_dir);
  std::vector<int> Ts = horizons;
  if (Ts.empty()) Ts = {ov.horizon.value_or(config.horizon)};
  std::vector<Method> methods = config.methods;
  if (ov.method) methods = {method_from_string(*ov.method)};
  const int reps = 5;

  std::ostringstream csv;
  csv << "T,method,reps,total_ms,bisect_ms,grid_ms,variable_count,"
         "constraint_count\n";
  for (int T : Ts) {
    TerminalInfo terminal = resolve_terminal(config, T);
    LtvModel model = config.model_at_horizon(T);
    CostWeights weights = config.weights_at_horizon(T);
    for (const Method method : methods) {
      std::vector<double> total(reps), bisect(reps), grid(reps);
      long long varcount = 0, concount = 0;
      for (int r = 0; r < reps; ++r) {
        if (method == Method::Sls) {
          SearchConfig sc;
          sc.ranges = config.ranges;
          sc.eps_tol = config.eps_tol;
          sc.grid.dims = config.grid_dims;
          sc.alpha = config.alpha;
          MpcStepResult res =
              mpc_step(model, terminal.constraints, weights, config.x0, sc);
          bisect[r] = res.bisect_time_s * 1e3;
          grid[r] = res.grid_time_s * 1e3;
          total[r] = bisect[r] + grid[r];
          varcount = res.solution.reported_variable_count;
          concount = static_cast<long long>(T) * (T + 1) *
                     model.state_dim() * model.state_dim() / 2;
        } else {
          TubeShape shape =
              method == Method::TubeUnit
                  ? make_unit_shape(model.state_dim())
                  : make_zinv_shape(model, weights.Q[0], weights.R[0],
                                    config.tube_truncation_tol);
          TubeProgram prog = build_tube_program(model, terminal.constraints,
                                                weights, config.x0, shape);
          TubeSolution sol = solve_tube(prog);
          total[r] = sol.wall_time_s * 1e3;
          bisect[r] = 0.0;
          grid[r] = total[r];
          varcount = prog.variable_count;
          concount = prog.raw_constraint_count;
        }
      }
      auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
      };
      csv << T << ',' << to_string(method) << ',' << reps << ','
          << format_double(median(total)) << ',' << format_double(
                 median(bisect))
          << ',' << format_double(median(grid)) << ',' << varcount << ','
          << concount << '\n';
    }
  }
  write_file(out_dir + "/bench.csv", csv.str());
  return 0;
}

}  // namespace slsmpc
