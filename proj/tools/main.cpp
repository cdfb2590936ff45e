// Command-line front end. Every subcommand that writes artifacts also drops
// a config echo (config.txt) and a run manifest (manifest.json) into the
// output directory, so runs are diffable and reproducible byte for byte
// apart from the manifest's run block.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "subergm/basis.hpp"
#include "subergm/combine.hpp"
#include "subergm/design.hpp"
#include "subergm/diagnose.hpp"
#include "subergm/glm.hpp"
#include "subergm/graph.hpp"
#include "subergm/io.hpp"
#include "subergm/npfit.hpp"

#ifndef SUBERGM_VERSION
#define SUBERGM_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace subergm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits a config value on whitespace, treating "..." groups as one token
// and stripping their quotes. An empty result means the key is unset.
std::vector<std::string> split_value(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : v) {
    if (c == '"') {
      quoted = !quoted;
    } else if (!quoted && (c == ' ' || c == '\t')) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Flat key=value config with command-line override. CLI11 only applies
// set_config at the root app, not on subcommands, so --config is handled
// before the real parse: each key that was not given explicitly is injected
// as a --key token at the end of the argument list (still inside the
// subcommand's scope). Empty values mean "unset" and are skipped.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file path");
      if (!path.empty()) throw UsageError("--config given twice");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      if (!path.empty()) throw UsageError("--config given twice");
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(lineno) +
                       ": expected key=value");
    std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
    std::string flag = "--" + key;
    bool overridden = false;
    for (const std::string& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        overridden = true;
        break;
      }
    if (overridden) continue;
    std::vector<std::string> vals = split_value(trim(t.substr(eq + 1)));
    if (vals.empty()) continue;  // unset option, e.g. drop-node=""
    if (vals.size() == 1) {
      args.push_back(flag + "=" + vals[0]);  // also works for flags (=true)
    } else {
      args.push_back(flag);
      for (auto& v : vals) args.push_back(std::move(v));
    }
  }
  return args;
}

// Display-only: --config tokens are consumed by apply_config_file before
// CLI11 ever sees them.
void add_config_option(CLI::App* cmd) {
  cmd->add_option("--config",
                  "Flat key=value file; explicit flags override its keys");
}

fs::path ensure_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + out);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return f;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const std::string& config_text, Clock::time_point t0,
                    const std::string& started) {
  {
    std::ofstream cfg = open_out(dir / "config.txt");
    cfg << config_text;
  }
  json j;
  j["tool"] = "subergm";
  j["version"] = SUBERGM_VERSION;
  j["command"] = command;
  j["config_text"] = config_text;
  j["run"] = {{"started", started}, {"wall_seconds", seconds_since(t0)}};
  std::ofstream f = open_out(dir / "manifest.json");
  f << j.dump(2) << "\n";
}

// Shared input options: edge list plus the node-drop policy for odd orders.
struct InputOpts {
  std::string path;
  std::string drop = "none";  // none | highest | <id>
  int n_override = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--input", path, "Edge list file (i j per line, # comments)")
        ->required();
    cmd->add_option("--drop-node", drop,
                    "Policy for odd node counts: none | highest | <node id>");
    cmd->add_option("--n", n_override, "Node count override (ids may be sparse)");
  }

  UndirectedGraph load(std::ostream& log) const {
    std::optional<NodeId> n;
    if (n_override >= 0) n = static_cast<NodeId>(n_override);
    UndirectedGraph g = load_edge_list_file(path, n);
    if (drop == "none") {
      if (g.node_count() % 2 != 0)
        throw std::invalid_argument(
            "graph has an odd number of nodes (" + std::to_string(g.node_count()) +
            "); pass --drop-node highest or --drop-node <id>");
      return g;
    }
    NodeId victim;
    if (drop == "highest") {
      if (g.node_count() % 2 == 0) return g;  // nothing to do
      victim = g.node_count() - 1;
    } else {
      victim = static_cast<NodeId>(std::stol(drop));
    }
    UndirectedGraph d = drop_node(g, victim);
    if (d.node_count() % 2 != 0)
      throw std::invalid_argument("node count still odd after dropping " +
                                  std::to_string(victim));
    log << "dropped node " << victim << "; n=" << d.node_count()
        << " edges=" << d.edge_count() << "\n";
    return d;
  }
};

struct NpOpts {
  FitConfig cfg;

  void attach(CLI::App* cmd) {
    cmd->add_option("--basis-size", cfg.K, "Number of basis functions")
        ->capture_default_str();
    cmd->add_option("--gamma-min", cfg.gamma_min, "Smallest basis rate")
        ->capture_default_str();
    cmd->add_option("--gamma-max", cfg.gamma_max, "Largest basis rate")
        ->capture_default_str();
    cmd->add_option("--np-min-ones", cfg.min_ones,
                    "Skip rounds with fewer observed edges than this")
        ->capture_default_str();
    cmd->add_option("--zero-threshold", cfg.zero_threshold,
                    "Sup-norm below which a failing effect is zeroed")
        ->capture_default_str();
    cmd->add_option("--conv-tol", cfg.conv_tol, "Convergence tolerance")
        ->capture_default_str();
    cmd->add_option("--t-max", cfg.t_max, "Inner Newton iteration cap")
        ->capture_default_str();
    cmd->add_option("--s-max", cfg.s_max, "Penalty update cap")
        ->capture_default_str();
    cmd->add_option("--lambda-init", cfg.lambda_init, "Initial penalty")
        ->capture_default_str();
    cmd->add_option("--lambda-max", cfg.lambda_max,
                    "Penalty treated as infinite (effect zeroed)")
        ->capture_default_str();
  }
};

json fit_config_to_json(const FitConfig& c) {
  return json{{"K", c.K},
              {"gamma_min", c.gamma_min},
              {"gamma_max", c.gamma_max},
              {"min_ones", c.min_ones},
              {"zero_threshold", c.zero_threshold},
              {"conv_tol", c.conv_tol},
              {"t_max", c.t_max},
              {"s_max", c.s_max},
              {"lambda_init", c.lambda_init},
              {"lambda_max", c.lambda_max}};
}

const char* kEffectNames[2] = {"twostars", "triangles"};

void write_rounds_csv(const fs::path& p, const OneFactorization& f) {
  std::ofstream out = open_out(p);
  out << "round,i,j\n";
  for (const auto& m : f.rounds)
    for (auto [i, j] : m.pairs)
      out << m.round << "," << i << "," << j << "\n";
}

void write_glm_fits_csv(const fs::path& p, const std::vector<GlmRecord>& records) {
  std::ofstream out = open_out(p);
  out << "round,status,converged,ones_count,theta_edges,theta_twostars,"
         "theta_triangles,se_edges,se_twostars,se_triangles\n";
  for (const auto& r : records) {
    out << r.round << "," << to_string(r.status) << ","
        << (r.status == GlmStatus::Fit && r.fit.converged ? 1 : 0) << ","
        << r.ones_count;
    if (r.status == GlmStatus::Fit) {
      Eigen::VectorXd se = r.fit.standard_errors();
      for (int c = 0; c < 3; ++c) out << "," << num_str(r.fit.theta(c));
      for (int c = 0; c < 3; ++c) out << "," << num_str(se(c));
    } else {
      out << ",,,,,,";
    }
    out << "\n";
  }
}

void write_glm_summary_csv(const fs::path& p, const AggregateSummary& s) {
  std::ofstream out = open_out(p);
  out << "parameter,mean,median,q05,q95\n";
  for (std::size_t c = 0; c < s.names.size(); ++c) {
    auto i = static_cast<Eigen::Index>(c);
    out << s.names[c] << "," << num_str(s.mean(i)) << "," << num_str(s.median(i))
        << "," << num_str(s.q05(i)) << "," << num_str(s.q95(i)) << "\n";
  }
}

void print_glm_summary(std::ostream& os, const AggregateSummary& s) {
  os << "parameter    mean       median     q05        q95\n";
  for (std::size_t c = 0; c < s.names.size(); ++c) {
    auto i = static_cast<Eigen::Index>(c);
    os << s.names[c];
    for (std::size_t pad = s.names[c].size(); pad < 13; ++pad) os << ' ';
    os << num_str(s.mean(i)) << " " << num_str(s.median(i)) << " "
       << num_str(s.q05(i)) << " " << num_str(s.q95(i)) << "\n";
  }
  os << "used " << s.n_used << " fits; skipped " << s.n_skipped
     << "; excluded " << s.n_excluded_extreme << " extreme intercepts\n";
}

void write_np_tally_csv(const fs::path& p, const NpTally& t) {
  std::ofstream out = open_out(p);
  out << "outcome,count\n";
  out << "no_fit," << t.no_fit << "\n";
  out << "M1," << t.m1 << "\n";
  out << "M2," << t.m2 << "\n";
  out << "M3," << t.m3 << "\n";
  out << "M4," << t.m4 << "\n";
  out << "hit_max_iterations," << t.hit_max_iterations << "\n";
  out << "aborted," << t.aborted << "\n";
}

void print_np_tally(std::ostream& os, const NpTally& t) {
  os << "rounds " << t.total << ": no-fit " << t.no_fit << ", M1 " << t.m1
     << ", M2 " << t.m2 << ", M3 " << t.m3 << ", M4 " << t.m4 << ", max-iter "
     << t.hit_max_iterations << ", aborted " << t.aborted << "\n";
}

json sweep_to_json(const NpSweep& sweep, const ExpBasis& basis, const FitConfig& cfg) {
  json j;
  j["basis"] = basis_to_json(basis);
  j["config"] = fit_config_to_json(cfg);
  j["max_delta"] = sweep.max_delta;
  j["tally"] = {{"total", sweep.tally.total},
                {"no_fit", sweep.tally.no_fit},
                {"M1", sweep.tally.m1},
                {"M2", sweep.tally.m2},
                {"M3", sweep.tally.m3},
                {"M4", sweep.tally.m4},
                {"hit_max_iterations", sweep.tally.hit_max_iterations},
                {"aborted", sweep.tally.aborted}};
  json models = json::array();
  for (const auto& m : sweep.models) models.push_back(np_model_to_json(m));
  j["models"] = std::move(models);
  return j;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return j;
}

// Combined artifact: basis, depth ranking, median and mean models, curves.
struct Combined {
  ExpBasis basis;
  CurveFamily family;
  DepthResult depth;
  MedianModel median;
  NpModel mean_model;  // coefficient averages of the converged fits
  Eigen::VectorXd mean;
};

Combined combine_sweep(const std::vector<NpModel>& models, const ExpBasis& basis,
                       const std::vector<double>& xmax, int grid_size) {
  Combined c{basis, {}, {}, {}, {}, {}};
  c.family = evaluate_curve_family(models, basis, xmax, grid_size);
  c.depth = modified_band_depth(c.family);
  c.median = select_median(c.family, models);
  c.mean = mean_curve(c.family);

  c.mean_model.round = -1;
  c.mean_model.status = NpStatus::Converged;
  c.mean_model.theta0 = 0.0;
  c.mean_model.u = {Eigen::VectorXd::Zero(basis.K), Eigen::VectorXd::Zero(basis.K)};
  c.mean_model.lambda = Eigen::Vector2d::Zero();
  c.mean_model.signs = {1, 1};
  c.mean_model.max_delta = xmax;
  int used = 0;
  for (const auto& m : models) {
    if (!m.converged()) continue;
    c.mean_model.theta0 += m.theta0;
    c.mean_model.u[0] += m.u[0];
    c.mean_model.u[1] += m.u[1];
    ++used;
  }
  c.mean_model.theta0 /= used;
  c.mean_model.u[0] /= used;
  c.mean_model.u[1] /= used;
  c.mean_model.label = c.mean_model.u[0].isZero(0.0)
                           ? (c.mean_model.u[1].isZero(0.0) ? ModelLabel::M4
                                                            : ModelLabel::M2)
                           : (c.mean_model.u[1].isZero(0.0) ? ModelLabel::M3
                                                            : ModelLabel::M1);
  return c;
}

void write_combined(const fs::path& dir, const Combined& c) {
  json j;
  j["basis"] = basis_to_json(c.basis);
  j["grid_size"] = c.family.grid_size;
  json xmax = json::array();
  for (const auto& g : c.family.grids) xmax.push_back(g(g.size() - 1));
  j["xmax"] = std::move(xmax);
  j["median"] = {{"round", c.median.round},
                 {"bd", c.median.bd},
                 {"mbd", c.median.mbd},
                 {"model", np_model_to_json(c.median.model)}};
  j["mean_model"] = np_model_to_json(c.mean_model);
  json depths = json::array();
  for (std::size_t i = 0; i < c.family.round_ids.size(); ++i) {
    auto e = static_cast<Eigen::Index>(i);
    depths.push_back({{"round", c.family.round_ids[i]},
                      {"bd", c.depth.bd(e)},
                      {"mbd", c.depth.mbd(e)},
                      {"bd_pairs", c.depth.bd_pairs[i]},
                      {"mbd_points", c.depth.mbd_points[i]}});
  }
  j["depths"] = std::move(depths);
  std::ofstream f = open_out(dir / "combined.json");
  f << j.dump(2) << "\n";

  std::ofstream curves = open_out(dir / "curves.csv");
  curves << "effect,x,mean,median\n";
  const int G = c.family.grid_size;
  for (int l = 0; l < c.family.p; ++l) {
    for (int t = 0; t < G; ++t) {
      double x = c.family.grids[static_cast<std::size_t>(l)](t);
      curves << kEffectNames[l] << "," << num_str(x) << ","
             << num_str(c.mean(1 + l * G + t)) << ","
             << num_str(c.median.model.effect(l, x, c.basis)) << "\n";
    }
  }
}

void write_residuals_csv(const fs::path& p, const ResidualReport& r) {
  std::ofstream out = open_out(p);
  out << "node,avg_pearson,degree\n";
  for (Eigen::Index i = 0; i < r.node_avg.size(); ++i)
    out << i << "," << num_str(r.node_avg(i)) << ","
        << r.degrees[static_cast<std::size_t>(i)] << "\n";
}

void print_top_residuals(std::ostream& os, const ResidualReport& r, int top) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(r.node_avg.size()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (r.node_avg(a) != r.node_avg(b)) return r.node_avg(a) > r.node_avg(b);
    return a < b;
  });
  os << "top node-average Pearson residuals:\n";
  for (int k = 0; k < top && k < static_cast<int>(order.size()); ++k)
    os << "  node " << order[static_cast<std::size_t>(k)] << "  "
       << num_str(r.node_avg(order[static_cast<std::size_t>(k)])) << "\n";
}

void write_trace_csv(const fs::path& p, const GibbsTrace& t) {
  std::ofstream out = open_out(p);
  out << "sweep,density\n";
  for (std::size_t s = 0; s < t.density_path.size(); ++s)
    out << (s + 1) << "," << num_str(t.density_path[s]) << "\n";
}

// Model choice shared by residuals and simulate: a parametric theta vector
// or a model picked out of a combined.json file.
struct ModelOpts {
  std::vector<double> theta;
  std::string combined_path;
  std::string use = "median";

  void attach(CLI::App* cmd) {
    auto* t = cmd->add_option("--theta", theta,
                              "Parametric coefficients: edges twostars triangles")
                  ->expected(3);
    auto* c = cmd->add_option("--combined", combined_path,
                              "combined.json from the combine step");
    cmd->add_option("--use", use, "Which combined model to use: median | mean")
        ->check(CLI::IsMember({"median", "mean"}));
    t->excludes(c);
    c->excludes(t);
  }

  bool parametric() const { return !theta.empty(); }

  void require_one() const {
    if (theta.empty() && combined_path.empty())
      throw UsageError("pass either --theta or --combined");
  }

  std::pair<NpModel, ExpBasis> load_np() const {
    json j = load_json_file(combined_path);
    ExpBasis basis = basis_from_json(j.at("basis"));
    NpModel model = np_model_from_json(use == "mean" ? j.at("mean_model")
                                                     : j.at("median").at("model"));
    return {std::move(model), std::move(basis)};
  }
};

// One stage of the pipeline; code shared with the standalone subcommands.

std::vector<GlmRecord> stage_glm(const UndirectedGraph& g, int min_ones,
                                 double intercept_floor, unsigned workers,
                                 const fs::path& dir, std::ostream& os) {
  std::vector<GlmRecord> records = fit_parametric_all(g, min_ones, workers);
  write_glm_fits_csv(dir / "glm_fits.csv", records);
  AggregateSummary summary = aggregate_estimates(records, intercept_floor);
  write_glm_summary_csv(dir / "glm_summary.csv", summary);
  print_glm_summary(os, summary);
  return records;
}

NpSweep stage_np(const UndirectedGraph& g, const FitConfig& cfg, const ExpBasis& basis,
                 unsigned workers, const fs::path& dir, std::ostream& os) {
  NpSweep sweep = fit_np_all(g, cfg, basis, workers);
  {
    std::ofstream f = open_out(dir / "np_fits.json");
    f << sweep_to_json(sweep, basis, cfg).dump(2) << "\n";
  }
  write_np_tally_csv(dir / "np_tally.csv", sweep.tally);
  print_np_tally(os, sweep.tally);
  return sweep;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subsampled ERGM estimation on undirected networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SUBERGM_VERSION);

  // ---- factorize ----------------------------------------------------------
  struct {
    int n = 0;
    std::string input;
    bool check = false;
    std::string out;
    int dump_round = -1;
  } fac;
  {
    CLI::App* cmd = app.add_subcommand(
        "factorize", "Build the round-robin dyad schedule (1-factorization)");
    add_config_option(cmd);
    auto* n_opt = cmd->add_option("--n", fac.n, "Number of nodes (even)");
    auto* in_opt = cmd->add_option("--input", fac.input,
                                   "Edge list; node count is taken from it");
    cmd->add_flag("--check", fac.check, "Validate the full factorization");
    cmd->add_option("--out", fac.out, "Output directory for rounds.csv");
    cmd->add_option("--dump-round", fac.dump_round,
                    "With --input: write this round's subsample CSV");
    n_opt->excludes(in_opt);
    cmd->callback([&, cmd]() {
      auto t0 = Clock::now();
      std::string started = iso8601_now();
      std::optional<UndirectedGraph> g;
      NodeId n = static_cast<NodeId>(fac.n);
      if (!fac.input.empty()) {
        g = load_edge_list_file(fac.input);
        n = g->node_count();
      } else {
        if (n <= 0) throw UsageError("pass --n or --input");
        if (n % 2 != 0) throw UsageError("--n must be even");
      }
      OneFactorization f = one_factorization(n);
      std::cout << "n=" << n << " rounds=" << f.rounds.size() << " pairs-per-round="
                << f.rounds.front().pairs.size() << "\n";
      if (fac.check) {
        ValidationReport rep = validate_factorization(f);
        if (!rep.ok) throw NumericError("factorization invalid: " + rep.violation);
        std::cout << "validation ok: every dyad covered exactly once\n";
      }
      if (!fac.out.empty()) {
        fs::path dir = ensure_dir(fac.out);
        write_rounds_csv(dir / "rounds.csv", f);
        if (fac.dump_round >= 0) {
          if (!g) throw UsageError("--dump-round needs --input");
          if (fac.dump_round >= static_cast<int>(f.rounds.size()))
            throw UsageError("round out of range");
          Subsample s = extract_subsample(
              *g, f.rounds[static_cast<std::size_t>(fac.dump_round)]);
          std::ofstream out = open_out(
              dir / ("subsample_" + std::to_string(fac.dump_round) + ".csv"));
          write_subsample_csv(s, out);
        }
        write_manifest(dir, "factorize", cmd->config_to_str(true, false), t0, started);
      }
    });
  }

  // ---- ego-net ------------------------------------------------------------
  struct {
    std::string input;
    int ego = -1;
    std::string out;
  } ego;
  {
    CLI::App* cmd = app.add_subcommand(
        "ego-net", "Extract the induced subgraph on a node's neighbors");
    add_config_option(cmd);
    cmd->add_option("--input", ego.input, "Edge list file")->required();
    cmd->add_option("--ego", ego.ego, "Ego node id (0-based)")->required();
    cmd->add_option("--out", ego.out, "Output directory")->required();
    cmd->callback([&, cmd]() {
      auto t0 = Clock::now();
      std::string started = iso8601_now();
      UndirectedGraph g = load_edge_list_file(ego.input);
      EgoNet net = ego_net(g, static_cast<NodeId>(ego.ego));
      fs::path dir = ensure_dir(ego.out);
      {
        std::ofstream f =
            open_out(dir / ("ego_" + std::to_string(ego.ego) + ".txt"));
        write_edge_list(net.graph, f);
      }
      {
        std::ofstream f =
            open_out(dir / ("ego_" + std::to_string(ego.ego) + "_nodes.csv"));
        f << "local,parent\n";
        for (std::size_t i = 0; i < net.to_parent.size(); ++i)
          f << i << "," << net.to_parent[i] << "\n";
      }
      std::cout << "ego " << ego.ego << ": " << net.graph.node_count() << " nodes, "
                << net.graph.edge_count() << " edges\n";
      write_manifest(dir, "ego-net", cmd->config_to_str(true, false), t0, started);
    });
  }

  // ---- fit-glm -------------------------------------------------------------
  struct {
    InputOpts in;
    int min_ones = 3;
    double intercept_floor = -10.0;
    unsigned workers = 0;
    std::string out;
  } glm;
  {
    CLI::App* cmd = app.add_subcommand(
        "fit-glm", "Fit the parametric conditional model on every round");
    add_config_option(cmd);
    glm.in.attach(cmd);
    cmd->add_option("--min-ones", glm.min_ones, "Skip rounds with fewer ones")
        ->capture_default_str();
    cmd->add_option("--intercept-floor", glm.intercept_floor,
                    "Exclude fits with smaller intercept from the summary")
        ->capture_default_str();
    cmd->add_option("--workers", glm.workers, "Worker threads (0 = hardware)");
    cmd->add_option("--out", glm.out, "Output directory")->required();
    cmd->callback([&, cmd]() {
      auto t0 = Clock::now();
      std::string started = iso8601_now();
      UndirectedGraph g = glm.in.load(std::cout);
      fs::path dir = ensure_dir(glm.out);
      stage_glm(g, glm.min_ones, glm.intercept_floor, glm.workers, dir, std::cout);
      write_manifest(dir, "fit-glm", cmd->config_to_str(true, false), t0, started);
    });
  }

  // ---- fit-np --------------------------------------------------------------
  struct {
    InputOpts in;
    NpOpts np;
    unsigned workers = 0;
    std::string out;
  } npc;
  {
    CLI::App* cmd = app.add_subcommand(
        "fit-np", "Fit the monotone bounded nonparametric model on every round");
    add_config_option(cmd);
    npc.in.attach(cmd);
    npc.np.attach(cmd);
    cmd->add_option("--workers", npc.workers, "Worker threads (0 = hardware)");
    cmd->add_option("--out", npc.out, "Output directory")->required();
    cmd->callback([&, cmd]() {
      auto t0 = Clock::now();
      std::string started = iso8601_now();
      UndirectedGraph g = npc.in.load(std::cout);
      ExpBasis basis =
          build_basis(npc.np.cfg.K, npc.np.cfg.gamma_min, npc.np.cfg.gamma_max);
      fs::path dir = ensure_dir(npc.out);
      stage_np(g, npc.np.cfg, basis, npc.workers, dir, std::cout);
      write_manifest(dir, "fit-np", cmd->config_to_str(true, false), t0, started);
    });
  }

  // ---- combine ---------------------------------------------------------------
  struct {
    std::string fits;
    int grid_size = 200;
    std::string out;
  } comb;
  {
    CLI::App* cmd = app.add_subcommand(
        "combine", "Rank per-round curves by band depth; median and mean models");
    add_config_option(cmd);
    cmd->add_option("--fits", comb.fits, "np_fits.json from fit-np")->required();
    cmd->add_option("--grid-size", comb.grid_size, "Curve evaluation grid")
        ->capture_default_str();
    cmd->add_option("--out", comb.out, "Output directory")->required();
    cmd->callback([&, cmd]() {
      auto t0 = Clock::now();
      std::string started = iso8601_now();
      json j = load_json_file(comb.fits);
      ExpBasis basis = basis_from_json(j.at("basis"));
      std::vector<NpModel> models;
      for (const auto& mj : j.at("models")) models.push_back(np_model_from_json(mj));
      auto xmax = j.at("max_delta").get<std::vector<double>>();
      Combined c = combine_sweep(models, basis, xmax, comb.grid_size);
      fs::path dir = ensure_dir(comb.out);
      write_combined(dir, c);
      std::cout << "median round " << c.median.round << " (bd " << num_str(c.median.bd)
                << ", mbd " << num_str(c.median.mbd) << ") over "
                << c.family.round_ids.size() << " converged fits\n";
      write_manifest(dir, "combine", cmd->config_to_str(true, false), t0, started);
    });
  }

  // ---- residuals -------------------------------------------------------------
  struct {
    InputOpts in;
    ModelOpts model;
    unsigned workers = 0;
    std::string out;
    int top = 15;
  } res;
  {
    CLI::App* cmd = app.add_subcommand(
        "residuals", "Node-average Pearson residuals under a fitted model");
    add_config_option(cmd);
    res.in.attach(cmd);
    res.model.attach(cmd);
    cmd->add_option("--workers", res.workers, "Worker threads (0 = hardware)");
    cmd->add_option("--top", res.top, "How many nodes to print")
        ->capture_default_str();
    cmd->add_option("--out", res.out, "Output directory")->required();
    cmd->callback([&, cmd]() {
      auto t0 = Clock::now();
      std::string started = iso8601_now();
      res.model.require_one();
      UndirectedGraph g = res.in.load(std::cout);
      ResidualReport rep;
      if (res.model.parametric()) {
        Eigen::VectorXd theta =
            Eigen::Map<const Eigen::VectorXd>(res.model.theta.data(), 3);
        rep = pearson_node_residuals(
            g, [&](const StatVector& d) { return predict_edge_prob(theta, d); },
            res.workers);
      } else {
        auto [model, basis] = res.model.load_np();
        rep = pearson_node_residuals(
            g,
            [&](const StatVector& d) { return predict_edge_prob(model, basis, d); },
            res.workers);
      }
      fs::path dir = ensure_dir(res.out);
      write_residuals_csv(dir / "residuals.csv", rep);
      print_top_residuals(std::cout, rep, res.top);
      write_manifest(dir, "residuals", cmd->config_to_str(true, false), t0, started);
    });
  }

  // ---- simulate ---------------------------------------------------------------
  struct {
    int n = 0;
    ModelOpts model;
    int sweeps = 500;
    std::uint64_t seed = 1;
    double init_density = 0.5;
    std::string out;
  } sim;
  {
    CLI::App* cmd = app.add_subcommand(
        "simulate", "Gibbs-sample a model and trace the edge density");
    add_config_option(cmd);
    cmd->add_option("--n", sim.n, "Number of nodes")->required();
    sim.model.attach(cmd);
    cmd->add_option("--sweeps", sim.sweeps, "Full dyad sweeps")
        ->capture_default_str();
    cmd->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--init-density", sim.init_density,
                    "Erdos-Renyi starting density")
        ->capture_default_str();
    cmd->add_option("--out", sim.out, "Output directory")->required();
    cmd->callback([&, cmd]() {
      auto t0 = Clock::now();
      std::string started = iso8601_now();
      sim.model.require_one();
      GibbsConfig gc;
      gc.sweeps = sim.sweeps;
      gc.seed = sim.seed;
      gc.init_density = sim.init_density;
      GibbsTrace trace;
      if (sim.model.parametric()) {
        Eigen::VectorXd theta =
            Eigen::Map<const Eigen::VectorXd>(sim.model.theta.data(), 3);
        trace = gibbs_simulate(theta, static_cast<NodeId>(sim.n), gc);
      } else {
        auto [model, basis] = sim.model.load_np();
        trace = gibbs_simulate(model, basis, static_cast<NodeId>(sim.n), gc);
      }
      fs::path dir = ensure_dir(sim.out);
      write_trace_csv(dir / "trace.csv", trace);
      {
        std::ofstream f = open_out(dir / "final_graph.txt");
        write_edge_list(trace.final_graph, f);
      }
      bool exited = density_exits_band(trace);
      std::cout << "final density " << num_str(trace.density_path.back())
                << (exited ? " (left the (0.001, 0.9) band: degenerate)"
                           : " (stayed inside the (0.001, 0.9) band)")
                << "\n";
      write_manifest(dir, "simulate", cmd->config_to_str(true, false), t0, started);
    });
  }

  // ---- pipeline ---------------------------------------------------------------
  struct {
    InputOpts in;
    NpOpts np;
    int min_ones = 3;
    double intercept_floor = -10.0;
    int grid_size = 200;
    unsigned workers = 0;
    std::string out;
  } pipe;
  {
    CLI::App* cmd = app.add_subcommand(
        "pipeline", "Full run: parametric sweep, nonparametric sweep, combine, "
                    "residuals");
    add_config_option(cmd);
    pipe.in.attach(cmd);
    pipe.np.attach(cmd);
    cmd->add_option("--min-ones", pipe.min_ones,
                    "Parametric sweep: skip rounds with fewer ones")
        ->capture_default_str();
    cmd->add_option("--intercept-floor", pipe.intercept_floor,
                    "Parametric summary exclusion threshold")
        ->capture_default_str();
    cmd->add_option("--grid-size", pipe.grid_size, "Curve evaluation grid")
        ->capture_default_str();
    cmd->add_option("--workers", pipe.workers, "Worker threads (0 = hardware)");
    cmd->add_option("--out", pipe.out, "Output directory")->required();
    cmd->callback([&, cmd]() {
      auto t0 = Clock::now();
      std::string started = iso8601_now();
      UndirectedGraph g = pipe.in.load(std::cout);
      fs::path dir = ensure_dir(pipe.out);

      auto t_glm = Clock::now();
      stage_glm(g, pipe.min_ones, pipe.intercept_floor, pipe.workers, dir, std::cout);
      std::cout << "[glm " << num_str(seconds_since(t_glm)) << "s]\n";

      ExpBasis basis =
          build_basis(pipe.np.cfg.K, pipe.np.cfg.gamma_min, pipe.np.cfg.gamma_max);
      auto t_np = Clock::now();
      NpSweep sweep = stage_np(g, pipe.np.cfg, basis, pipe.workers, dir, std::cout);
      std::cout << "[np " << num_str(seconds_since(t_np)) << "s]\n";

      Combined c = combine_sweep(sweep.models, basis, sweep.max_delta, pipe.grid_size);
      write_combined(dir, c);
      std::cout << "median round " << c.median.round << "\n";

      auto t_res = Clock::now();
      ResidualReport rep = pearson_node_residuals(
          g,
          [&](const StatVector& d) {
            return predict_edge_prob(c.median.model, basis, d);
          },
          pipe.workers);
      write_residuals_csv(dir / "residuals.csv", rep);
      print_top_residuals(std::cout, rep, 15);
      std::cout << "[residuals " << num_str(seconds_since(t_res)) << "s]\n";

      write_manifest(dir, "pipeline", cmd->config_to_str(true, false), t0, started);
    });
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config_file(std::move(args));
    std::reverse(args.begin(), args.end());  // parse(vector) wants reversed tokens
    app.parse(args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
