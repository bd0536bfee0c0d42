// cgcouple: config-driven experiment runner for the coupling library.
// Subcommands: solve, converge, bifurcate, compare.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>

#include "acc/analysis.hpp"
#include "acc/baselines.hpp"
#include "acc/crack.hpp"
#include "acc/quadrature.hpp"

namespace fs = std::filesystem;
using namespace acc;

namespace {

// ---------------------------------------------------------------------------
// flat key = value config with [sections] and '#' comments

struct Entry {
  std::string value;
  int line = 0;
};

class Config {
 public:
  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    Config cfg;
    cfg.path_ = path;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::string s = trim(line);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']')
          cfg.fail(lineno, "malformed section header: " + s);
        section = trim(s.substr(1, s.size() - 2));
        if (section.empty()) cfg.fail(lineno, "empty section name");
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos)
        cfg.fail(lineno, "expected key = value, got: " + s);
      std::string key = trim(s.substr(0, eq));
      std::string val = trim(s.substr(eq + 1));
      if (key.empty()) cfg.fail(lineno, "empty key");
      std::string full = section.empty() ? key : section + "." + key;
      if (cfg.kv_.count(full))
        cfg.fail(lineno, "duplicate key: " + full);
      cfg.kv_[full] = Entry{val, lineno};
    }
    return cfg;
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& def = "") const {
    used_.insert(key);
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second.value;
  }

  double num(const std::string& key, double def) const {
    used_.insert(key);
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    try {
      size_t pos = 0;
      double v = std::stod(it->second.value, &pos);
      if (pos != it->second.value.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(it->second.line, "not a number: " + key + " = " + it->second.value);
    }
    return def;
  }

  int integer(const std::string& key, int def) const {
    double v = num(key, def);
    int i = static_cast<int>(v);
    if (i != v) {
      auto it = kv_.find(key);
      fail(it->second.line, "not an integer: " + key);
    }
    return i;
  }

  bool flag(const std::string& key, bool def) const {
    std::string v = str(key, def ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(kv_.at(key).line, "not a boolean: " + key + " = " + v);
    return def;
  }

  std::vector<std::string> list(const std::string& key,
                                const std::string& def) const {
    std::string v = str(key, def);
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  /// every present key must have been consulted by the schema
  void check_unknown() const {
    for (const auto& [key, entry] : kv_)
      if (!used_.count(key)) fail(entry.line, "unknown key: " + key);
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(path_ + ":" + std::to_string(line) + ": " + msg);
  }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
  std::string path_;
  std::map<std::string, Entry> kv_;
  mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// problem construction

Potential build_potential(const Config& cfg, bool crack) {
  double k0 = cfg.num("model.k0", 4.0);
  double k1 = cfg.num("model.k1", crack ? 0.4 : 1.4);
  std::string kind = cfg.str("model.potential", "harmonic");
  if (kind == "harmonic") return Harmonic{k0, k1};
  if (kind == "lennard_jones") return lj_matching(k0, k1);
  throw ConfigError("model.potential must be harmonic or lennard_jones");
}

Chain build_chain(const Config& cfg, int n, const Potential& pot) {
  std::string bc = cfg.str("model.boundary", "extrapolated");
  BoundarySpec spec;
  if (bc == "pinned")
    spec.kind = BoundaryKind::DirichletPinned;
  else if (bc == "extrapolated")
    spec.kind = BoundaryKind::DirichletExtrapolated;
  else
    throw ConfigError("model.boundary must be pinned or extrapolated");
  return make_chain(n, pot, spec);
}

int atom_at(double x, int n) {
  int j = static_cast<int>(std::lround(x * n)) - 1;
  return std::clamp(j, 0, n - 1);
}

ExternalForce build_force(const Config& cfg, int n) {
  std::string kind = cfg.str("force.kind", "zero");
  cfg.num("force.magnitude", 1.0);
  cfg.num("force.position", -1.0);
  cfg.integer("force.atom", -1);
  if (kind == "zero") return zero_force();
  if (kind == "point") {
    double mag = cfg.num("force.magnitude", 1.0);
    double pos = cfg.num("force.position", -1.0);
    int atom = (pos >= 0) ? atom_at(pos, n) : cfg.integer("force.atom", -1);
    if (atom < 0 || atom >= n)
      throw ConfigError("point force needs force.atom or force.position");
    return point_force(atom, mag);
  }
  if (kind == "half_sine") return half_sine();
  if (kind == "full_sine") return full_sine();
  throw ConfigError("force.kind must be zero|point|half_sine|full_sine");
}

MeshSpec build_mesh(const Config& cfg) {
  std::string kind = cfg.str("partition.mesh", "uniform");
  int stride = cfg.integer("partition.stride", 8);
  int initial = cfg.integer("partition.initial", 1);
  int cap = cfg.integer("partition.cap", 8);
  int repeat = cfg.integer("partition.repeat", 1);
  if (kind == "uniform") return uniform_mesh(stride);
  if (kind == "graded") return graded_mesh(initial, cap, repeat);
  throw ConfigError("partition.mesh must be uniform or graded");
}

RegionPartition build_partition(const Config& cfg, int n, bool crack) {
  std::string kind = cfg.str("partition.kind", "left_continuum");
  MeshSpec mesh = build_mesh(cfg);
  int inter = cfg.integer("partition.interbedded", 2);
  cfg.num("partition.split", 0.5);
  cfg.num("partition.a_first", 0.0);
  cfg.num("partition.a_last", 0.0);
  if (kind == "all_atomistic") return all_atomistic(n);
  if (kind == "left_continuum") {
    int split = atom_at(cfg.num("partition.split", 0.5), n) + 1;
    RegionPartition p = left_continuum(n, split, mesh);
    p.interbedded_elems = inter;
    return p;
  }
  if (kind == "five_region") {
    int a_first = atom_at(cfg.num("partition.a_first", 0.375), n);
    int a_last = atom_at(cfg.num("partition.a_last", 0.625), n);
    if (crack) {
      // the traction boundary pins the last two atoms, which must stay
      // coarse variables; keep them as a two-atom atomistic tail
      RegionPartition p;
      p.segments.push_back({false, 0, a_first - 1, mesh});
      p.segments.push_back({true, a_first, a_last, {}});
      p.segments.push_back({false, a_last + 1, n - 3, mesh});
      p.segments.push_back({true, n - 2, n - 1, {}});
      p.interbedded_elems = inter;
      return p;
    }
    return five_region(n, a_first, a_last, mesh, inter);
  }
  throw ConfigError(
      "partition.kind must be all_atomistic|left_continuum|five_region");
}

EnrichmentConfig build_enrich(const Config& cfg) {
  EnrichmentConfig e;
  e.m = cfg.integer("method.m", 6);
  e.ell = cfg.integer("method.ell", 5);
  e.deflation_tol = cfg.num("method.deflation_tol", 1e-10);
  std::string seeds = cfg.str("method.seeds", "interface");
  if (seeds == "all_continuum")
    e.seeds_all_continuum = true;
  else if (seeds != "interface")
    throw ConfigError("method.seeds must be interface or all_continuum");
  return e;
}

struct Problem {
  bool crack = false;
  Chain chain;                       // chain problems
  std::optional<CrackModel> cm;      // crack problems
  ExternalForce force;
  RegionPartition partition;
  EnrichmentConfig enrich;
  bool quadrature = false;
};

Problem build_problem(const Config& cfg, int n) {
  Problem p;
  p.crack = cfg.flag("crack.enabled", false);
  Potential pot = build_potential(cfg, p.crack);
  if (p.crack) {
    int n_broken = cfg.integer("crack.n_broken", -1);
    CrackModel cm = make_crack_model(n, cfg.num("crack.load", 1.0), pot,
                                     n_broken);
    cm.k2 = cfg.num("crack.k2", 0.5);
    cm.u_cut = cfg.num("crack.u_cut", 0.5);
    cm.gamma_as_printed = cfg.flag("crack.gamma_as_printed", true);
    cm.load_consistent = cfg.flag("crack.load_consistent", true);
    p.chain = cm.chain;
    p.cm = cm;
    p.force = custom_force(traction_forces(cm));
    cfg.str("model.boundary", "");  // ignored for crack; mark consulted
  } else {
    p.chain = build_chain(cfg, n, pot);
    p.force = build_force(cfg, n);
  }
  p.partition = build_partition(cfg, n, p.crack);
  p.enrich = build_enrich(cfg);
  p.quadrature = cfg.flag("method.quadrature", false);
  return p;
}

struct MethodRun {
  SolveReport report;
  int dofs = 0;
};

MethodRun run_method(const Problem& p, const std::string& name) {
  MethodRun out;
  if (p.crack) {
    CrackMethod cm;
    if (name == "atomistic")
      cm = CrackMethod::Atomistic;
    else if (name == "galerkin")
      cm = CrackMethod::Galerkin;
    else if (name == "enriched")
      cm = CrackMethod::Enriched;
    else if (name == "qnl")
      cm = CrackMethod::Qnl;
    else if (name == "force_based")
      cm = CrackMethod::ForceBased;
    else
      throw ConfigError("unknown method: " + name);
    if (cm == CrackMethod::Atomistic) {
      out.report = solve_crack(*p.cm, cm);
      out.dofs = p.chain.n_atoms;
      return out;
    }
    CGMap cg = build_cgmap(p.chain, p.partition);
    out.report = solve_crack(*p.cm, cm, &cg, p.enrich);
    out.dofs = (cm == CrackMethod::Galerkin || cm == CrackMethod::Enriched)
                   ? static_cast<int>(out.report.coeffs.size())
                   : p.chain.n_atoms;
    return out;
  }
  if (name == "atomistic") {
    out.report = solve_atomistic(p.chain, p.force);
    out.dofs = p.chain.n_atoms;
    return out;
  }
  if (name == "qnl") {
    out.report = solve_qnl(p.chain, p.partition, p.force);
    out.dofs = p.chain.n_atoms;
    return out;
  }
  if (name == "force_based") {
    out.report = solve_force_based(p.chain, p.partition, p.force);
    out.dofs = p.chain.n_atoms;
    return out;
  }
  CGMap cg = build_cgmap(p.chain, p.partition);
  if (name == "galerkin") {
    out.report = p.quadrature
                     ? solve_galerkin_quadrature(cg, p.chain, p.force)
                     : solve_standard_galerkin(cg, p.chain, p.force);
    out.dofs = cg.n;
    return out;
  }
  if (name == "enriched") {
    SpMat a = hessian(p.chain, Vec::Zero(p.chain.n_atoms));
    KrylovBasis kb = build_enrichment(cg, a, p.enrich);
    out.report = p.quadrature
                     ? solve_enriched_quadrature(cg, kb, p.chain, p.force)
                     : solve_enriched(cg, kb, p.chain, p.force);
    out.dofs = cg.n + kb.k();
    return out;
  }
  throw ConfigError("unknown method: " + name);
}

Vec reference_solution(const Problem& p) {
  if (p.crack) return solve_crack(*p.cm, CrackMethod::Atomistic).u;
  return solve_atomistic(p.chain, p.force).u;
}

// ---------------------------------------------------------------------------
// subcommands

struct CommonArgs {
  std::string config;
  std::string out = ".";
  int jobs = 1;
  int seed = 0;  // reserved for randomized harness states
};

void ensure_out(const CommonArgs& args) {
  fs::create_directories(args.out);
}

std::string join_path(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

int run_solve(const CommonArgs& args) {
  Config cfg = Config::parse_file(args.config);
  int n = cfg.integer("model.n_atoms", 1024);
  std::string method = cfg.str("method.name", "galerkin");
  Problem p = build_problem(cfg, n);
  cfg.check_unknown();
  ensure_out(args);

  auto t0 = std::chrono::steady_clock::now();
  MethodRun run = run_method(p, method);
  auto t1 = std::chrono::steady_clock::now();
  Vec ref = reference_solution(p);
  Vec err = run.report.u - ref;
  ErrorReport norms = error_norms(err, p.chain.epsilon);

  std::vector<std::vector<std::string>> sol, errrows;
  for (int j = 0; j < n; ++j) {
    sol.push_back({std::to_string(j), format_g17(p.chain.x(j)),
                   format_g17(run.report.u[j])});
    errrows.push_back({std::to_string(j), format_g17(p.chain.x(j)),
                       format_g17(err[j])});
  }
  write_csv(join_path(args.out, "solution.csv"), {"atom", "x", "u"}, sol);
  write_csv(join_path(args.out, "error.csv"), {"atom", "x", "error"}, errrows);

  double secs = std::chrono::duration<double>(t1 - t0).count();
  std::cout << "method=" << run.report.method_tag << " dofs=" << run.dofs
            << " newton_iters=" << run.report.newton_iters
            << " w11=" << format_g17(norms.w11)
            << " h1=" << format_g17(norms.h1)
            << " w1inf=" << format_g17(norms.w1inf) << " seconds=" << secs
            << "\n";
  return 0;
}

int run_converge(const CommonArgs& args) {
  Config cfg = Config::parse_file(args.config);
  cfg.integer("model.n_atoms", 0);  // overridden per study size
  std::vector<std::string> n_list_s = cfg.list("study.n_list", "");
  if (n_list_s.size() < 2)
    throw ConfigError("study.n_list needs at least two sizes");
  std::vector<std::string> methods =
      cfg.list("study.methods", cfg.str("method.name", "galerkin"));
  std::vector<int> n_list;
  for (const auto& s : n_list_s) n_list.push_back(std::stoi(s));

  // validate the schema once up front on the smallest size
  build_problem(cfg, n_list.front());
  cfg.check_unknown();
  ensure_out(args);

  struct Cell {
    std::string method;
    int n;
    StudyRow row;
  };
  std::vector<Cell> cells;
  for (const auto& m : methods)
    for (int n : n_list) cells.push_back(Cell{m, n, {}});

  auto run_cell = [&](Cell& c) {
    Problem p = build_problem(cfg, c.n);
    MethodRun run = run_method(p, c.method);
    Vec ref = reference_solution(p);
    c.row.n_atoms = c.n;
    c.row.epsilon = p.chain.epsilon;
    c.row.err = error_norms(run.report.u - ref, p.chain.epsilon);
  };

  if (args.jobs <= 1) {
    for (auto& c : cells) run_cell(c);
  } else {
    std::vector<std::future<void>> futs;
    size_t next = 0;
    std::mutex mu;
    for (int t = 0; t < args.jobs; ++t)
      futs.push_back(std::async(std::launch::async, [&]() {
        for (;;) {
          size_t i;
          {
            std::lock_guard<std::mutex> lk(mu);
            if (next >= cells.size()) return;
            i = next++;
          }
          run_cell(cells[i]);
        }
      }));
    for (auto& f : futs) f.get();
  }

  EnrichmentConfig e = build_enrich(cfg);
  std::vector<std::vector<std::string>> rows;
  for (const auto& m : methods) {
    ConvergenceStudy study;
    study.method_tag = m;
    if (m == "enriched") study.m = e.m, study.ell = e.ell;
    for (const auto& c : cells)
      if (c.method == m) study.rows.push_back(c.row);
    for (const auto& r : study.rows)
      rows.push_back({std::to_string(r.n_atoms), format_g17(r.epsilon),
                      format_g17(r.err.w11), format_g17(r.err.h1),
                      format_g17(r.err.w1inf), format_g17(r.err.w11_grad),
                      format_g17(r.err.h1_grad), format_g17(r.err.w1inf_grad),
                      std::to_string(study.m), std::to_string(study.ell), m});
    // footer rows: fitted slopes and prefactors per norm
    try {
      RateFit a = study.rate_w11(), b = study.rate_h1(), c2 = study.rate_w1inf();
      rows.push_back({"0", "0", format_g17(a.rate), format_g17(b.rate),
                      format_g17(c2.rate), "0", "0", "0",
                      std::to_string(study.m), std::to_string(study.ell),
                      m + ":rate"});
      rows.push_back({"0", "0", format_g17(a.prefactor),
                      format_g17(b.prefactor), format_g17(c2.prefactor), "0",
                      "0", "0", std::to_string(study.m),
                      std::to_string(study.ell), m + ":prefactor"});
    } catch (const DegenerateFit& ex) {
      std::cerr << "rate fit skipped for " << m << ": " << ex.what() << "\n";
    }
  }
  write_csv(join_path(args.out, "study.csv"),
            {"n_atoms", "epsilon", "w11", "h1", "w1inf", "w11_grad", "h1_grad",
             "w1inf_grad", "m", "ell", "method_tag"},
            rows);
  std::cout << "study cells=" << cells.size() << " methods=" << methods.size()
            << "\n";
  return 0;
}

int run_bifurcate(const CommonArgs& args) {
  Config cfg = Config::parse_file(args.config);
  int n = cfg.integer("model.n_atoms", 256);
  if (!cfg.flag("crack.enabled", true))
    throw ConfigError("bifurcate needs crack.enabled = true");
  Problem p = build_problem(cfg, n);
  double lo = cfg.num("bifurcate.load_lo", 0.0);
  double hi = cfg.num("bifurcate.load_hi", 0.0);
  int steps = cfg.integer("bifurcate.steps", 40);
  std::vector<std::string> methods =
      cfg.list("bifurcate.methods", "atomistic,galerkin");
  cfg.check_unknown();
  ensure_out(args);

  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::vector<double>> folds;
  for (const auto& name : methods) {
    CrackMethod cm;
    if (name == "atomistic")
      cm = CrackMethod::Atomistic;
    else if (name == "galerkin")
      cm = CrackMethod::Galerkin;
    else if (name == "qnl")
      cm = CrackMethod::Qnl;
    else
      throw ConfigError("bifurcate.methods: unsupported method " + name);
    std::optional<CGMap> cg;
    if (cm != CrackMethod::Atomistic)
      cg = build_cgmap(p.chain, p.partition);
    try {
      BifurcationResult res = bifurcation_sweep(
          *p.cm, cm, cg ? &*cg : nullptr, lo, hi, steps);
      for (const auto& pt : res.points)
        rows.push_back({format_g17(pt.load), format_g17(pt.u_first),
                        format_g17(pt.u_tip), format_g17(pt.min_eig),
                        pt.stable ? "1" : "0", res.method_tag});
      folds[name] = res.folds;
    } catch (const BranchLost& ex) {
      std::cerr << "branch lost for " << name << ": " << ex.what() << "\n";
    }
  }
  write_csv(join_path(args.out, "bifurcation.csv"),
            {"P", "u_1", "u_n", "min_eigenvalue", "stable_flag", "method_tag"},
            rows);
  for (const auto& [name, fl] : folds) {
    std::cout << "folds " << name << ":";
    for (double f : fl) std::cout << " " << format_g17(f);
    std::cout << "\n";
  }
  return 0;
}

int run_compare(const CommonArgs& args) {
  Config cfg = Config::parse_file(args.config);
  int n = cfg.integer("model.n_atoms", 1024);
  std::vector<std::string> methods =
      cfg.list("compare.methods", "galerkin,enriched");
  Problem p = build_problem(cfg, n);
  cfg.check_unknown();
  ensure_out(args);

  Vec ref = reference_solution(p);
  std::vector<std::vector<std::string>> rows;
  for (const auto& m : methods) {
    MethodRun run = run_method(p, m);
    ErrorReport e = error_norms(run.report.u - ref, p.chain.epsilon);
    rows.push_back({run.report.method_tag, std::to_string(run.dofs),
                    format_g17(e.w11), format_g17(e.h1),
                    format_g17(e.w1inf)});
    std::cout << "method=" << run.report.method_tag << " dofs=" << run.dofs
              << " w1inf=" << format_g17(e.w1inf) << "\n";
  }
  write_csv(join_path(args.out, "compare.csv"),
            {"method_tag", "dofs", "w11", "h1", "w1inf"}, rows);
  return 0;
}

int run_check(const CommonArgs& args) {
  Config cfg = Config::parse_file(args.config);
  int n = cfg.integer("model.n_atoms", 1024);
  std::vector<std::string> n_list_s = cfg.list("study.n_list", "");
  if (!n_list_s.empty()) n = std::stoi(n_list_s.front());
  // touch every subcommand's keys so a config is validated as a whole
  cfg.str("method.name", "galerkin");
  cfg.list("study.methods", "");
  cfg.num("bifurcate.load_lo", 0.0);
  cfg.num("bifurcate.load_hi", 0.0);
  cfg.integer("bifurcate.steps", 40);
  cfg.list("bifurcate.methods", "");
  cfg.list("compare.methods", "");
  build_problem(cfg, n);
  cfg.check_unknown();
  std::cout << "ok " << args.config << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"atomistic/continuum coupling experiment runner"};
  app.require_subcommand(1);

  CommonArgs args;
  int rc = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "config file path")->required();
    sub->add_option("--out", args.out, "output directory");
    sub->add_option("--jobs", args.jobs, "parallel study cells");
    sub->add_option("--seed", args.seed, "seed for randomized states");
  };

  auto* solve = app.add_subcommand("solve", "single equilibrium solve");
  auto* conv = app.add_subcommand("converge", "mesh-refinement study");
  auto* bif = app.add_subcommand("bifurcate", "crack load sweep");
  auto* cmp = app.add_subcommand("compare", "several methods, one problem");
  auto* chk = app.add_subcommand("check", "validate a config without solving");
  for (auto* s : {solve, conv, bif, cmp, chk}) add_common(s);

  solve->callback([&]() { rc = run_solve(args); });
  conv->callback([&]() { rc = run_converge(args); });
  bif->callback([&]() { rc = run_bifurcate(args); });
  cmp->callback([&]() { rc = run_compare(args); });
  chk->callback([&]() { rc = run_check(args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return rc;
}
