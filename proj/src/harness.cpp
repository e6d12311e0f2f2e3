#include "cglo/harness.hpp"

#include "cglo/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cglo {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

struct Located {
  std::string prefix;
  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(prefix + msg); }
};

long long to_int(const Located& at, const std::string& key, const std::string& v, long long lo) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    at.fail(key + ": expected an integer, got '" + v + "'");
  }
  if (used != v.size()) at.fail(key + ": expected an integer, got '" + v + "'");
  if (out < lo) at.fail(key + " must be >= " + std::to_string(lo) + " (got " + v + ")");
  return out;
}

double to_real(const Located& at, const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    at.fail(key + ": expected a number, got '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(out)) at.fail(key + ": expected a number, got '" + v + "'");
  return out;
}

using Setter = std::function<void(const Located&, const std::string&)>;

std::map<std::string, std::map<std::string, Setter>> setters(ExperimentSpec& s) {
  auto size = [](std::size_t& f, long long lo = 0) {
    return [&f, lo](const Located& at, const std::string& v) { f = static_cast<std::size_t>(to_int(at, "value", v, lo)); };
  };
  auto integer = [](int& f, long long lo = 0) {
    return [&f, lo](const Located& at, const std::string& v) { f = static_cast<int>(to_int(at, "value", v, lo)); };
  };
  auto real = [](double& f) { return [&f](const Located& at, const std::string& v) { f = to_real(at, "value", v); }; };

  std::map<std::string, std::map<std::string, Setter>> m;
  auto& e = m["experiment"];
  e["objective"] = [&s](const Located&, const std::string& v) { s.objective = v; };
  e["optimizers"] = [&s](const Located& at, const std::string& v) {
    s.optimizers = split(v, ',');
    for (const auto& o : s.optimizers) {
      if (o != "cglo" && o != "rs" && o != "gp-ei-ocba") at.fail("unknown optimizer '" + o + "'");
    }
  };
  e["macroreps"] = size(s.macroreps, 1);
  e["checkpoints"] = [&s](const Located& at, const std::string& v) {
    s.checkpoints.clear();
    for (const auto& c : split(v, ',')) s.checkpoints.push_back(to_int(at, "checkpoints", c, 1));
  };
  e["budget"] = [&s](const Located& at, const std::string& v) { s.budget = to_int(at, "budget", v, 1); };
  e["seed"] = [&s](const Located& at, const std::string& v) {
    s.master_seed = static_cast<std::uint64_t>(to_int(at, "seed", v, 0));
  };
  e["output"] = [&s](const Located&, const std::string& v) { s.output_dir = v; };

  auto& c = m["cglo"];
  c["n0"] = size(s.cglo.n0, 1);
  c["K"] = size(s.cglo.regions);
  c["init_reps"] = integer(s.cglo.init_reps);
  c["r_min"] = integer(s.cglo.r_min, 1);
  c["b2"] = integer(s.cglo.b2);
  c["kappa_coef"] = real(s.cglo.kappa_coef);
  c["v"] = real(s.cglo.v);
  c["mean_lo"] = [&s](const Located& at, const std::string& v) { s.cglo.mean_lo = to_real(at, "mean_lo", v); };
  c["mean_hi"] = [&s](const Located& at, const std::string& v) { s.cglo.mean_hi = to_real(at, "mean_hi", v); };
  c["candidate_count"] = size(s.cglo.candidate_count);
  c["local_grid_size"] = size(s.cglo.local_grid_size);
  c["refit_every"] = size(s.cglo.refit_every, 1);
  c["max_local_points"] = size(s.cglo.max_local_points);
  c["max_iterations"] = size(s.cglo.max_iterations);
  c["fit_starts"] = size(s.cglo.fit_starts, 1);
  c["refit_starts"] = size(s.cglo.refit_starts, 1);
  c["cv_retries"] = integer(s.cglo.cv_retries);

  auto& r = m["rs"];
  r["points"] = size(s.rs.points, 1);
  r["reps_per_point"] = integer(s.rs.reps_per_point, 1);

  auto& g = m["gp-ei-ocba"];
  g["n0"] = size(s.gp.n0, 1);
  g["init_reps"] = integer(s.gp.init_reps);
  g["r_min"] = integer(s.gp.r_min, 1);
  g["b2"] = integer(s.gp.b2);
  g["grid_size"] = size(s.gp.grid_size);
  g["refit_every"] = size(s.gp.refit_every, 1);
  g["fit_starts"] = size(s.gp.fit_starts, 1);
  g["refit_starts"] = size(s.gp.refit_starts, 1);
  g["max_iterations"] = size(s.gp.max_iterations);
  return m;
}

std::uint64_t rep_seed(const ExperimentSpec& spec, std::size_t m) { return spec.master_seed + m; }

}  // namespace

long long ExperimentSpec::resolved_budget() const {
  if (budget > 0) return budget;
  return checkpoints.empty() ? 0 : *std::max_element(checkpoints.begin(), checkpoints.end());
}

ExperimentSpec parse_experiment(std::istream& in, const std::string& source) {
  ExperimentSpec spec;
  auto table = setters(spec);
  std::string section;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const Located at{source + ":" + std::to_string(lineno) + ": "};
    const auto hash = line.find_first_of("#;");
    const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') at.fail("malformed section header '" + text + "'");
      section = trim(text.substr(1, text.size() - 2));
      if (!table.count(section)) at.fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) at.fail("expected 'key = value', got '" + text + "'");
    if (section.empty()) at.fail("key outside of any section");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    const auto& keys = table.at(section);
    const auto it = keys.find(key);
    if (it == keys.end()) at.fail("unknown key '" + key + "' in [" + section + "]");
    if (value.empty()) at.fail("empty value for '" + key + "'");
    it->second(Located{at.prefix + key + ": "}, value);
  }
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  return parse_experiment(in, path);
}

void validate(const ExperimentSpec& spec) {
  const auto objective = [&] {
    try {
      return make_objective(spec.objective);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  const std::size_t d = objective.dim();
  if (spec.macroreps < 1) throw ConfigError("macroreps must be >= 1");
  if (spec.optimizers.empty()) throw ConfigError("no optimizers listed");
  if (spec.checkpoints.empty()) throw ConfigError("at least one checkpoint is required");
  const long long T = spec.resolved_budget();
  for (auto c : spec.checkpoints) {
    if (c > T) {
      throw ConfigError("checkpoint " + std::to_string(c) + " exceeds budget " + std::to_string(T));
    }
  }
  for (const auto& o : spec.optimizers) {
    if (o == "cglo") {
      auto c = spec.cglo;
      c.total_budget = T;
      c.validate(d);
    } else if (o == "rs") {
      auto c = spec.rs;
      c.total_budget = T;
      c.validate();
    } else if (o == "gp-ei-ocba") {
      auto c = spec.gp;
      c.total_budget = T;
      c.validate(d);
    } else {
      throw ConfigError("unknown optimizer '" + o + "'");
    }
  }
}

std::string echo_config(const ExperimentSpec& spec) {
  const std::size_t d = make_objective(spec.objective).dim();
  std::ostringstream out;
  auto join = [](const auto& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ", ";
      if constexpr (std::is_same_v<std::decay_t<decltype(v[i])>, std::string>) {
        s += v[i];
      } else {
        s += std::to_string(v[i]);
      }
    }
    return s;
  };
  out << "[experiment]\n"
      << "objective = " << spec.objective << "\n"
      << "optimizers = " << join(spec.optimizers) << "\n"
      << "macroreps = " << spec.macroreps << "\n"
      << "checkpoints = " << join(spec.checkpoints) << "\n"
      << "budget = " << spec.resolved_budget() << "\n"
      << "seed = " << spec.master_seed << "\n"
      << "output = " << spec.output_dir << "\n";
  const auto has = [&](const std::string& o) {
    return std::find(spec.optimizers.begin(), spec.optimizers.end(), o) != spec.optimizers.end();
  };
  if (has("cglo")) {
    const auto c = spec.cglo.resolve(d);
    out << "\n[cglo]\n"
        << "n0 = " << c.n0 << "\n"
        << "K = " << c.regions << "\n"
        << "init_reps = " << c.init_reps << "\n"
        << "r_min = " << c.r_min << "\n"
        << "b2 = " << c.b2 << "\n"
        << "kappa_coef = " << shortest(c.kappa_coef) << "\n"
        << "v = " << shortest(c.v) << "\n"
        << "mean_lo = " << (c.mean_lo ? shortest(*c.mean_lo) : "auto") << "\n"
        << "mean_hi = " << (c.mean_hi ? shortest(*c.mean_hi) : "auto") << "\n"
        << "candidate_count = " << c.candidate_count << "\n"
        << "local_grid_size = " << c.local_grid_size << "\n"
        << "refit_every = " << c.refit_every << "\n"
        << "max_local_points = " << c.max_local_points << "\n"
        << "max_iterations = " << c.max_iterations << "\n"
        << "fit_starts = " << c.fit_starts << "\n"
        << "refit_starts = " << c.refit_starts << "\n"
        << "cv_retries = " << c.cv_retries << "\n";
  }
  if (has("rs")) {
    out << "\n[rs]\n"
        << "points = " << spec.rs.points << "\n"
        << "reps_per_point = " << spec.rs.reps_per_point << "\n";
  }
  if (has("gp-ei-ocba")) {
    const auto g = spec.gp.resolve(d);
    out << "\n[gp-ei-ocba]\n"
        << "n0 = " << g.n0 << "\n"
        << "init_reps = " << g.init_reps << "\n"
        << "r_min = " << g.r_min << "\n"
        << "b2 = " << g.b2 << "\n"
        << "grid_size = " << g.grid_size << "\n"
        << "refit_every = " << g.refit_every << "\n"
        << "fit_starts = " << g.fit_starts << "\n"
        << "refit_starts = " << g.refit_starts << "\n"
        << "max_iterations = " << g.max_iterations << "\n";
  }
  return out.str();
}

RunResult run_optimizer(const std::string& optimizer, const StochasticObjective& objective,
                        const ExperimentSpec& spec, std::uint64_t seed) {
  const long long T = spec.resolved_budget();
  if (optimizer == "cglo") {
    auto c = spec.cglo;
    c.total_budget = T;
    c.seed = seed;
    return run_cglo(objective, c);
  }
  if (optimizer == "rs") {
    auto c = spec.rs;
    c.total_budget = T;
    c.seed = seed;
    return random_search(objective, c);
  }
  if (optimizer == "gp-ei-ocba") {
    auto c = spec.gp;
    c.total_budget = T;
    c.seed = seed;
    return gp_ei_optimize(objective, c);
  }
  throw ConfigError("unknown optimizer '" + optimizer + "'");
}

std::vector<RepRow> checkpoint_metrics(const StochasticObjective& objective, const RunTrace& trace,
                                       const std::vector<long long>& checkpoints) {
  std::vector<RepRow> out;
  const auto& opt = objective.true_opt();
  for (auto c : checkpoints) {
    RepRow r;
    r.checkpoint = c;
    const TraceRow* at = nullptr;
    for (const auto& row : trace.rows) {
      if (row.consumed <= c) at = &row;
    }
    r.complete = !trace.rows.empty() && trace.rows.back().consumed >= c && at != nullptr;
    if (at) {
      r.best_mean = at->best_mean;
      if (opt) {
        r.dx = (at->best_x - opt->x).norm();
        r.dy = std::abs(at->best_mean - objective.to_reported(opt->value));
        r.dy_true = std::abs(objective.mean(at->best_x) - opt->value);
      }
    }
    out.push_back(r);
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<RepRow>& reps, const std::vector<std::string>& optimizers,
                                  const std::vector<long long>& checkpoints) {
  std::vector<SummaryRow> out;
  for (const auto& o : optimizers) {
    for (auto c : checkpoints) {
      SummaryRow s;
      s.optimizer = o;
      s.checkpoint = c;
      std::vector<double> dx;
      std::vector<double> dy;
      for (const auto& r : reps) {
        if (r.optimizer == o && r.checkpoint == c && r.complete) {
          dx.push_back(r.dx);
          dy.push_back(r.dy);
        }
      }
      s.count = dx.size();
      auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = 0.0;
        sd = 0.0;
        if (v.empty()) return;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        if (v.size() < 2) return;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
      };
      stats(dx, s.mean_dx, s.std_dx);
      stats(dy, s.mean_dy, s.std_dy);
      out.push_back(s);
    }
  }
  return out;
}

int worker_count() {
  if (const char* env = std::getenv("CGLO_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return kernels::max_threads();
}

ExperimentResult run_experiment(const ExperimentSpec& spec, bool write_files) {
  validate(spec);
  namespace fs = std::filesystem;
  const fs::path dir(spec.output_dir);
  if (write_files) {
    std::error_code ec;
    fs::create_directories(dir / "traces", ec);
    std::ofstream probe(dir / "config.ini");
    if (ec || !probe) throw std::runtime_error("cannot write to output directory " + dir.string());
    probe << echo_config(spec);
  }

  const auto objective = make_objective(spec.objective);
  const std::size_t n_opt = spec.optimizers.size();
  const std::size_t jobs = n_opt * spec.macroreps;
  std::vector<RunTrace> traces(jobs);
  std::vector<std::exception_ptr> errors(jobs);

#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
  for (std::size_t j = 0; j < jobs; ++j) {
    try {
      const std::size_t o = j / spec.macroreps;
      const std::size_t m = j % spec.macroreps;
      traces[j] = run_optimizer(spec.optimizers[o], objective, spec, rep_seed(spec, m)).trace;
    } catch (...) {
      errors[j] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ExperimentResult result;
  result.traces.resize(n_opt);
  for (std::size_t o = 0; o < n_opt; ++o) {
    for (std::size_t m = 0; m < spec.macroreps; ++m) {
      const auto& trace = traces[o * spec.macroreps + m];
      result.traces[o].push_back(trace);
      for (auto r : checkpoint_metrics(objective, trace, spec.checkpoints)) {
        r.optimizer = spec.optimizers[o];
        r.macrorep = m;
        r.seed = rep_seed(spec, m);
        result.reps.push_back(r);
      }
    }
  }
  result.summary = summarize(result.reps, spec.optimizers, spec.checkpoints);

  if (write_files) {
    std::ofstream reps(dir / "reps.csv");
    write_reps_csv(reps, result.reps);
    std::ofstream summary(dir / "summary.csv");
    write_summary_csv(summary, result.summary);
    for (std::size_t o = 0; o < n_opt; ++o) {
      for (std::size_t m = 0; m < spec.macroreps; ++m) {
        emit_trace_csv(result.traces[o][m], objective.dim(),
                       (dir / "traces" / (spec.optimizers[o] + "_" + std::to_string(m) + ".csv")).string());
      }
    }
    if (!reps || !summary) throw std::runtime_error("failed writing results to " + dir.string());
  }
  return result;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, std::size_t dim) {
  out << "iter,consumed_reps,region,n_new_points,B1,B2";
  for (std::size_t i = 1; i <= dim; ++i) out << ",best_x" << i;
  out << ",best_mean,wall_ms\n";
  for (const auto& r : trace.rows) {
    out << r.iter << ',' << r.consumed << ',' << r.region << ',' << r.n_new << ',' << r.b1 << ',' << r.b2;
    for (Eigen::Index i = 0; i < r.best_x.size(); ++i) out << ',' << fmt(r.best_x[i]);
    out << ',' << fmt(r.best_mean) << ',' << fmt(r.wall_ms) << '\n';
  }
}

void emit_trace_csv(const RunTrace& trace, std::size_t dim, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_trace_csv(out, trace, dim);
  if (!out) throw std::runtime_error("failed writing " + path);
}

RunTrace read_trace_csv(std::istream& in) {
  RunTrace trace;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace csv: missing header");
  const auto header = split(line, ',');
  if (header.size() < 8 || header[0] != "iter" || header[header.size() - 1] != "wall_ms") {
    throw std::runtime_error("trace csv: unexpected header '" + line + "'");
  }
  const std::size_t dim = header.size() - 8;
  for (int lineno = 2; std::getline(in, line); ++lineno) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) {
      throw std::runtime_error("trace csv line " + std::to_string(lineno) + ": expected " +
                               std::to_string(header.size()) + " fields");
    }
    TraceRow r;
    r.iter = std::stoull(f[0]);
    r.consumed = std::stoll(f[1]);
    r.region = std::stoull(f[2]);
    r.n_new = std::stoull(f[3]);
    r.b1 = std::stoll(f[4]);
    r.b2 = std::stoll(f[5]);
    r.best_x.resize(to_index(dim));
    for (std::size_t i = 0; i < dim; ++i) r.best_x[to_index(i)] = std::stod(f[6 + i]);
    r.best_mean = std::stod(f[6 + dim]);
    r.wall_ms = std::stod(f[7 + dim]);
    trace.rows.push_back(std::move(r));
  }
  return trace;
}

RunTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_trace_csv(in);
}

void write_reps_csv(std::ostream& out, const std::vector<RepRow>& reps) {
  out << "optimizer,macrorep,seed,checkpoint,complete,dx,dy,best_mean,dy_true\n";
  for (const auto& r : reps) {
    out << r.optimizer << ',' << r.macrorep << ',' << r.seed << ',' << r.checkpoint << ',' << (r.complete ? 1 : 0)
        << ',' << fmt(r.dx) << ',' << fmt(r.dy) << ',' << fmt(r.best_mean) << ',' << fmt(r.dy_true) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary) {
  out << "optimizer,checkpoint,count,mean_dx,std_dx,mean_dy,std_dy\n";
  for (const auto& s : summary) {
    out << s.optimizer << ',' << s.checkpoint << ',' << s.count << ',' << fmt(s.mean_dx) << ',' << fmt(s.std_dx)
        << ',' << fmt(s.mean_dy) << ',' << fmt(s.std_dy) << '\n';
  }
}

}  // namespace cglo
