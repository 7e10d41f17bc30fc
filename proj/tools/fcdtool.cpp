// fcdtool: metrics, schedules, sweeps and descent runs from the command line.

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "cli_support.hpp"
#include "fcd/fcd.hpp"

namespace fcdtool {
namespace {

using fcd::AnyCloud;
using fcd::InvalidInput;
using fcd::PointCloud;

/// Files produced by a command. The first one is also echoed to stdout.
struct Artifacts {
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<fs::path> inputs;
  std::uint64_t seed = 0;

  void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
};

template <std::size_t D>
std::string xyz_text(const PointCloud<D>& c) {
  std::ostringstream out;
  fcd::write_xyz(out, c);
  return out.str();
}

// ---------------------------------------------------------------- metrics

struct MetricOptions {
  double fscore_threshold = fcd::kDefaultFscoreThreshold;
  double dcd_temperature = fcd::kDefaultDcdTemperature;
  bool emd_approx = false;
  std::size_t emd_iterations = fcd::kDefaultAuctionBids;
  double emd_epsilon = fcd::kDefaultAuctionEpsilon;
  bool emd_sum = false;
  std::uint64_t seed = 42;

  void attach(CLI::App& app) {
    app.add_option("--fscore-threshold", fscore_threshold, "F-score distance threshold")->capture_default_str();
    app.add_option("--dcd-temperature", dcd_temperature, "DCD temperature")->capture_default_str();
    app.add_flag("--emd-approx", emd_approx, "use the auction approximation (also for unequal sizes)");
    app.add_option("--emd-iterations", emd_iterations, "auction bid budget")->capture_default_str();
    app.add_option("--emd-epsilon", emd_epsilon, "auction final epsilon")->capture_default_str();
    app.add_flag("--emd-sum", emd_sum, "report the summed rather than mean EMD cost");
    app.add_option("--seed", seed, "seed for subsampling")->capture_default_str();
  }
};

template <std::size_t D>
void point_cloud_metrics(const PointCloud<D>& P, const PointCloud<D>& G, const MetricOptions& o,
                         fcd::MetricReport& r) {
  const auto c = fcd::correspond(P, G);
  const auto t1 = fcd::chamfer_terms(c, fcd::DistanceOrder::First);
  const auto t2 = fcd::chamfer_terms(c, fcd::DistanceOrder::Second);
  r.cd_l1 = 0.5 * (t1.local + t1.global);
  r.cd_l2 = t2.local + t2.global;
  r.dcd = fcd::dcd(c, P.size(), G.size(), o.dcd_temperature);
  r.fscore = fcd::fscore(P, G, o.fscore_threshold);
  r.hausdorff = fcd::hausdorff(P, G);

  const auto reduction = o.emd_sum ? fcd::EmdReduction::Sum : fcd::EmdReduction::Mean;
  if (o.emd_approx) {
    const std::size_t n = std::min(P.size(), G.size());
    const auto Ps = P.size() == n ? P : fcd::subsample(P, n, fcd::SampleMethod::Random, o.seed);
    const auto Gs = G.size() == n ? G : fcd::subsample(G, n, fcd::SampleMethod::Random, o.seed);
    r.emd = fcd::emd_approx(Ps, Gs, o.emd_iterations, o.emd_epsilon, reduction);
  } else if (P.size() == G.size() && P.size() <= fcd::kExactEmdMaxPoints) {
    r.emd = fcd::emd_exact(P, G, reduction);
  }
}

std::string dims_message(const char* metric, const AnyCloud& a, const char* a_name, const AnyCloud& b,
                         const char* b_name) {
  return std::string(metric) + ": " + a_name + " is " + std::to_string(fcd::dimension_of(a)) + "D but " + b_name +
         " is " + std::to_string(fcd::dimension_of(b)) + "D";
}

fcd::MetricReport compute_report(const AnyCloud& pred, const AnyCloud& gt, const std::optional<fcd::TriangleMesh>& mesh,
                                 const std::optional<AnyCloud>& input, const MetricOptions& o) {
  if (pred.index() != gt.index()) throw InvalidInput(dims_message("cd_l1", pred, "prediction", gt, "ground truth"));
  if (fcd::size_of(pred) == 0) throw InvalidInput("cd_l1: prediction is empty");
  if (fcd::size_of(gt) == 0) throw InvalidInput("cd_l1: ground truth is empty");
  fcd::MetricReport r;
  std::visit(
      [&](const auto& P) {
        using Cloud = std::decay_t<decltype(P)>;
        point_cloud_metrics(P, std::get<Cloud>(gt), o, r);
        if (input) {
          if (input->index() != pred.index())
            throw InvalidInput(dims_message("fidelity", *input, "input", pred, "prediction"));
          r.fidelity = fcd::fidelity(std::get<Cloud>(*input), P);
        }
        if (mesh) {
          if constexpr (std::is_same_v<Cloud, PointCloud<3>>)
            r.p2f = fcd::point_to_mesh(P, *mesh);
          else
            throw InvalidInput("p2f: prediction is 2D but meshes are 3D");
        }
      },
      pred);
  return r;
}

struct MetricsCommand {
  std::string pred, gt, mesh, input, csv;
  MetricOptions opts;

  void attach(CLI::App& app) {
    app.add_option("--pred", pred, "predicted cloud (.xyz or .ply)")->required();
    app.add_option("--gt", gt, "ground-truth cloud (.xyz or .ply)")->required();
    app.add_option("--mesh", mesh, "ground-truth mesh (.ply) for p2f");
    app.add_option("--input", input, "partial input cloud for fidelity");
    app.add_option("--csv", csv, "also write header and row as CSV to this file");
    opts.attach(app);
  }

  Artifacts run() const {
    Artifacts a;
    a.seed = opts.seed;
    const auto P = fcd::read_cloud(pred);
    const auto G = fcd::read_cloud(gt);
    a.inputs = {pred, gt};
    std::optional<fcd::TriangleMesh> m;
    std::optional<AnyCloud> in;
    if (!mesh.empty()) {
      m = fcd::read_mesh(mesh);
      a.inputs.push_back(mesh);
    }
    if (!input.empty()) {
      in = fcd::read_cloud(input);
      a.inputs.push_back(input);
    }
    const auto report = compute_report(P, G, m, in, opts);
    a.add("metrics.json", report.to_json().dump() + "\n");
    const std::string table = fcd::MetricReport::csv_header() + "\n" + report.csv_row() + "\n";
    if (!csv.empty()) write_text(csv, table);
    a.add("metrics.csv", table);
    return a;
  }
};

// ---------------------------------------------------------------- schedule

/// Schedule flags. Values have no captured defaults so that a schedule file
/// stays authoritative for keys the command line does not mention.
struct ScheduleFlags {
  std::string kind, file;
  double theta = 0, tau = 0, sigma = 0;
  int t = 0, T = 0;
  CLI::Option *o_kind{}, *o_theta{}, *o_tau{}, *o_t{}, *o_T{}, *o_sigma{};

  void attach(CLI::App& app, const std::string& kind_flag) {
    o_kind = app.add_option(kind_flag, kind, "schedule kind");
    app.add_option("--schedule-file", file, "schedule as key=value lines or JSON");
    o_theta = app.add_option("--theta", theta, "upper weight bound (default 2)");
    o_tau = app.add_option("--tau", tau, "lower weight bound (default 1)");
    o_t = app.add_option("--t", t, "transition epoch (default 200)");
    o_T = app.add_option("--T", T, "total epochs (default 400)");
    o_sigma = app.add_option("--sigma", sigma, "exponential decay rate (default 200)");
  }

  fcd::ScheduleSpec resolve(std::vector<fs::path>& inputs) const {
    fcd::ScheduleSpec s;
    if (!file.empty()) {
      std::ifstream in(file, std::ios::binary);
      if (!in) throw fcd::IoError("cannot open '" + file + "'");
      std::stringstream buf;
      buf << in.rdbuf();
      const std::string text = buf.str();
      const auto first = text.find_first_not_of(" \t\r\n");
      if (first != std::string::npos && text[first] == '{') {
        try {
          s = fcd::schedule_from_json(nlohmann::json::parse(text));
        } catch (const nlohmann::json::exception& e) {
          throw InvalidInput("schedule file '" + file + "': " + e.what());
        }
      } else {
        s = fcd::schedule_from_key_value(text);
      }
      inputs.push_back(file);
    }
    if (o_kind->count() && kind != "none") s.kind = fcd::parse_schedule_kind(kind);
    if (o_theta->count()) s.theta = theta;
    if (o_tau->count()) s.tau = tau;
    if (o_t->count()) s.t = t;
    if (o_T->count()) s.T = T;
    if (o_sigma->count()) s.sigma = sigma;
    s.validate();
    return s;
  }

  /// "none" as kind means no schedule unless a schedule file is given.
  bool active() const { return (o_kind->count() > 0 && kind != "none") || !file.empty(); }
};

struct ScheduleCommand {
  ScheduleFlags flags;
  std::string format = "csv";

  void attach(CLI::App& app) {
    flags.attach(app, "--kind");
    app.add_option("--format", format, "csv (epoch,alpha,beta rows), json or kv (the spec itself)")
        ->check(CLI::IsMember({"csv", "json", "kv"}))
        ->capture_default_str();
  }

  Artifacts run() const {
    Artifacts a;
    const auto s = flags.resolve(a.inputs);
    if (format == "json") {
      a.add("schedule.json", fcd::to_json(s).dump() + "\n");
    } else if (format == "kv") {
      a.add("schedule.kv", fcd::to_key_value(s));
    } else {
      if (s.kind == fcd::ScheduleKind::Uncertainty)
        throw InvalidInput("uncertainty weights depend on the training losses; use 'optimize' to trace them");
      std::ostringstream out;
      out << "epoch,alpha,beta\n";
      for (int e = 0; e <= s.T; ++e) {
        const auto w = fcd::schedule_weights(s, e);
        out << e << ',' << fcd::format_double(w.alpha) << ',' << fcd::format_double(w.beta) << '\n';
      }
      a.add("schedule.csv", out.str());
    }
    return a;
  }
};

// ---------------------------------------------------------------- sweep

struct SweepCommand {
  double from = 0.6, to = 3.4, step = 0.1, alpha = 1.0, beta = 2.0, p1x = 0.5;

  void attach(CLI::App& app) {
    app.add_option("--from", from, "first x of p2 = (x, 0)")->capture_default_str();
    app.add_option("--to", to, "last x")->capture_default_str();
    app.add_option("--step", step, "x increment")->capture_default_str();
    app.add_option("--alpha", alpha, "FCD local weight")->capture_default_str();
    app.add_option("--beta", beta, "FCD global weight")->capture_default_str();
    app.add_option("--p1x", p1x, "x of the fixed prediction p1 = (x, 0)")->capture_default_str();
  }

  Artifacts run() const {
    fcd::StalemateSetup setup;
    setup.p1 = {p1x, 0.0};
    setup.weights = fcd::FcdWeights(alpha, beta);
    const auto config = fcd::SweepConfig::range(from, to, step, setup);
    Artifacts a;
    a.add("sweep.csv", fcd::sweep_csv(config, fcd::sweep(config)));
    return a;
  }
};

// ---------------------------------------------------------------- optimize

struct OptimizeCommand {
  std::string init, target, benchmark;
  std::string objective = "fcd", order = "1", update_rule = "plain";
  double alpha = 1.0, beta = 2.0, dcd_temperature = fcd::kDefaultDcdTemperature;
  fcd::OptimizerConfig config;
  std::vector<std::size_t> pin;
  std::size_t coarse_count = 0, children = 4;
  double offset_scale = 1e-2;
  ScheduleFlags sched;

  void attach(CLI::App& app) {
    app.add_option("--init", init, "initial prediction cloud");
    app.add_option("--target", target, "target cloud");
    app.add_option("--benchmark", benchmark, "built-in problem instead of --init/--target")
        ->check(CLI::IsMember({"clustered-grid"}));
    app.add_option("--objective", objective, "fcd, cd-l1, cd-l2 or dcd-loss")
        ->check(CLI::IsMember({"fcd", "cd-l1", "cd-l2", "dcd-loss"}))
        ->capture_default_str();
    app.add_option("--alpha", alpha, "static FCD local weight")->capture_default_str();
    app.add_option("--beta", beta, "static FCD global weight")->capture_default_str();
    app.add_option("--order", order, "distance order for fcd: 1 or 2")->capture_default_str();
    app.add_option("--dcd-temperature", dcd_temperature, "temperature for dcd-loss and trace dcd")
        ->capture_default_str();
    sched.attach(app, "--schedule");
    sched.o_kind->description("schedule kind for the fine weights, or none (static --alpha/--beta)");
    app.add_option("--steps", config.steps, "descent steps")->capture_default_str();
    app.add_option("--step-size", config.step_size, "learning rate")->capture_default_str();
    app.add_option("--update-rule", update_rule, "plain or momentum")->capture_default_str();
    app.add_option("--momentum", config.momentum_coeff, "momentum coefficient")->capture_default_str();
    app.add_option("--seed", config.seed, "seed for every random choice")->capture_default_str();
    app.add_option("--record-every", config.record_every, "trace row interval")->capture_default_str();
    app.add_option("--snapshot-points", config.snapshot_points, "EMD snapshot size cap")->capture_default_str();
    app.add_option("--pin", pin, "indices of points held fixed");
    app.add_option("--coarse-count", coarse_count, "enable the coarse-to-fine generator with this many coarse points");
    app.add_option("--children", children, "fine points per coarse point")->capture_default_str();
    app.add_option("--offset-scale", offset_scale, "initial child offset range")->capture_default_str();
  }

  template <std::size_t D>
  void run_flat(const PointCloud<D>& P0, const PointCloud<D>& G, Artifacts& a) const {
    fcd::ObjectiveSpec spec;
    switch (fcd::parse_objective_kind(objective)) {
      case fcd::ObjectiveKind::CdL1: spec = fcd::ObjectiveSpec::cd_l1(); break;
      case fcd::ObjectiveKind::CdL2: spec = fcd::ObjectiveSpec::cd_l2(); break;
      case fcd::ObjectiveKind::DcdLoss: spec = fcd::ObjectiveSpec::dcd_loss(dcd_temperature); break;
      case fcd::ObjectiveKind::Fcd:
        spec = fcd::ObjectiveSpec::fcd(fcd::FcdWeights(alpha, beta), fcd::parse_distance_order(order));
        break;
    }
    std::optional<fcd::ScheduleSpec> schedule;
    if (sched.active()) {
      if (spec.kind != fcd::ObjectiveKind::Fcd) throw InvalidInput("--schedule applies only to --objective fcd");
      schedule = sched.resolve(a.inputs);
    }
    const auto result = fcd::optimize(P0, G, spec, schedule, config, pin);
    emit(result.final, result.trace, a);
  }

  template <std::size_t D>
  void run_hierarchical(const PointCloud<D>& P0, const PointCloud<D>& G, Artifacts& a) const {
    if (objective != "fcd") throw InvalidInput("--coarse-count requires --objective fcd");
    if (!pin.empty()) throw InvalidInput("--pin is not supported with --coarse-count");
    fcd::ScheduleSpec s;
    if (sched.active()) {
      s = sched.resolve(a.inputs);
    } else {
      s.tau = alpha;
      s.theta = beta;
    }
    fcd::HierarchySpec h;
    h.coarse_count = coarse_count;
    h.children_per_coarse = children;
    h.offset_scale = offset_scale;
    const auto coarse0 =
        P0.size() == coarse_count ? P0 : fcd::subsample(P0, coarse_count, fcd::SampleMethod::FarthestPoint, config.seed);
    const auto result = fcd::optimize_hierarchical(coarse0, h, G, s, config, fcd::parse_distance_order(order));
    emit(result.fine, result.trace, a);
    a.add("coarse.xyz", xyz_text(result.coarse));
  }

  template <std::size_t D>
  void emit(const PointCloud<D>& final_cloud, const fcd::OptimizationTrace& trace, Artifacts& a) const {
    const auto& last = trace.rows.back();
    ordered_json summary = {{"steps", config.steps}, {"objective", last.objective},
                            {"cd_l1", last.cd_l1 ? ordered_json(*last.cd_l1) : ordered_json(nullptr)},
                            {"dcd", last.dcd ? ordered_json(*last.dcd) : ordered_json(nullptr)},
                            {"emd", last.emd ? ordered_json(*last.emd) : ordered_json(nullptr)}};
    a.add("summary.json", summary.dump() + "\n");
    a.add("final.xyz", xyz_text(final_cloud));
    a.add("trace.csv", trace.to_csv());
  }

  Artifacts run() {
    Artifacts a;
    a.seed = config.seed;
    config.update_rule = fcd::parse_update_rule(update_rule);
    config.snapshot_temperature = dcd_temperature;
    AnyCloud P0, G;
    if (!benchmark.empty()) {
      if (!init.empty()) throw InvalidInput("--benchmark and --init are exclusive");
      auto b = fcd::make_clustered_grid_benchmark(config.seed);
      P0 = std::move(b.init);
      G = std::move(b.target);
    } else {
      if (init.empty()) throw InvalidInput("optimize needs --init or --benchmark");
      P0 = fcd::read_cloud(init);
      a.inputs.push_back(init);
    }
    if (!target.empty()) {
      G = fcd::read_cloud(target);
      a.inputs.push_back(target);
    } else if (benchmark.empty()) {
      throw InvalidInput("optimize needs --target");
    }
    if (P0.index() != G.index()) throw InvalidInput(dims_message("optimize", P0, "initial cloud", G, "target"));
    std::visit(
        [&](const auto& p) {
          using Cloud = std::decay_t<decltype(p)>;
          if (coarse_count > 0)
            run_hierarchical(p, std::get<Cloud>(G), a);
          else
            run_flat(p, std::get<Cloud>(G), a);
        },
        P0);
    return a;
  }
};

// ---------------------------------------------------------------- batch

struct BatchCommand {
  std::string dir, glob = "*";
  unsigned parallelism = 1;
  MetricOptions opts;

  void attach(CLI::App& app) {
    app.add_option("--dir", dir, "directory with pred/ and gt/ holding same-named files")->required();
    app.add_option("--glob", glob, "file name pattern")->capture_default_str();
    app.add_option("--parallelism", parallelism, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    opts.attach(app);
  }

  Artifacts run() const {
    Artifacts a;
    a.seed = opts.seed;
    const fs::path root(dir);
    if (!fs::is_directory(root)) throw fcd::IoError("'" + dir + "' is not a directory");
    std::vector<std::string> names;
    if (fs::is_directory(root / "pred"))
      for (const auto& e : fs::directory_iterator(root / "pred")) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && fnmatch(glob.c_str(), name.c_str(), 0) == 0) names.push_back(name);
      }
    std::sort(names.begin(), names.end());
    for (const auto& n : names) {
      if (!fs::exists(root / "gt" / n)) throw fcd::IoError("no ground truth for '" + n + "' in " + (root / "gt").string());
      a.inputs.push_back(root / "pred" / n);
      a.inputs.push_back(root / "gt" / n);
    }

    std::vector<std::string> rows(names.size());
    std::vector<std::exception_ptr> errors(names.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next++) < names.size();) {
        try {
          const auto r = compute_report(fcd::read_cloud(root / "pred" / names[i]),
                                        fcd::read_cloud(root / "gt" / names[i]), std::nullopt, std::nullopt, opts);
          rows[i] = r.csv_row();
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const unsigned n_threads = std::min<std::size_t>(parallelism, std::max<std::size_t>(names.size(), 1));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n_threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);

    std::string table = "name," + fcd::MetricReport::csv_header() + "\n";
    for (std::size_t i = 0; i < names.size(); ++i) table += names[i] + "," + rows[i] + "\n";
    a.add("batch.csv", table);
    return a;
  }
};

// ---------------------------------------------------------------- ambiguity

struct AmbiguityCommand {
  std::size_t n = 64;
  std::uint64_t seed = 42;

  void attach(CLI::App& app) {
    app.add_option("--n", n, "points per cloud (even, >= 8)")->capture_default_str();
    app.add_option("--seed", seed, "jitter seed")->capture_default_str();
  }

  Artifacts run() const {
    const auto pair = fcd::build_ambiguity_pair(n, seed);
    const auto& r = pair.report;
    ordered_json j = {{"cd_clustered", r.cd_clustered},   {"cd_uniform", r.cd_uniform},
                      {"dcd_clustered", r.dcd_clustered}, {"dcd_uniform", r.dcd_uniform},
                      {"cluster_scale", r.cluster_scale}, {"iterations", r.iterations}};
    Artifacts a;
    a.seed = seed;
    a.add("report.json", j.dump() + "\n");
    a.add("clustered.xyz", xyz_text(pair.clustered));
    a.add("uniform.xyz", xyz_text(pair.uniform));
    a.add("reference.xyz", xyz_text(pair.reference));
    return a;
  }
};

// ---------------------------------------------------------------- driver

int run(std::vector<std::string> argv);

int report_error(const char* kind, const std::string& what, int code) {
  std::cerr << "fcdtool: " << kind << what << '\n';
  return code;
}

int dispatch(CLI::App& app, CLI::App* sub, const std::function<Artifacts()>& body, const std::string& out_dir) {
  Artifacts a = body();
  std::cout << a.files.front().second << std::flush;
  if (out_dir.empty()) return kOk;
  const fs::path out(out_dir);
  ensure_dir(out);
  for (const auto& [name, content] : a.files) write_text(out / name, content);
  Manifest m;
  m.command = sub->get_name();
  m.args = resolved_args(*sub, {"--out-dir"});
  m.seed = a.seed;
  m.inputs = a.inputs;
  m.write(out);
  (void)app;
  return kOk;
}

int replay(const std::string& manifest_path, const std::string& out_dir) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw fcd::IoError("cannot open '" + manifest_path + "'");
  nlohmann::json m;
  try {
    in >> m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("manifest '" + manifest_path + "': " + e.what());
  }
  if (m.value("tool", "") != "fcdtool") throw InvalidInput("'" + manifest_path + "' is not an fcdtool manifest");
  if (m.value("version", "") != fcd::kVersion)
    std::cerr << "fcdtool: manifest written by version " << m.value("version", "?") << ", replaying with "
              << fcd::kVersion << '\n';
  for (const auto& [path, digest] : m.at("inputs").items())
    if (file_digest(path) != digest.get<std::string>())
      throw InvalidInput("input '" + path + "' changed since the manifest was written");
  std::vector<std::string> argv{"fcdtool", m.at("command").get<std::string>()};
  for (const auto& arg : m.at("args")) argv.push_back(arg.get<std::string>());
  if (!out_dir.empty()) {
    argv.push_back("--out-dir");
    argv.push_back(out_dir);
  }
  return run(std::move(argv));
}

int run(std::vector<std::string> argv) {
  CLI::App app{"Flexible-weighted Chamfer distance toolkit"};
  app.set_version_flag("--version", std::string(fcd::kVersion));
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values; command-line flags take precedence");
  app.require_subcommand(1);

  std::string out_dir;
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out-dir", out_dir, "write outputs and manifest.json here"); };

  MetricsCommand metrics;
  auto* s_metrics = app.add_subcommand("metrics", "metric report for one prediction / ground-truth pair");
  metrics.attach(*s_metrics);
  add_out(s_metrics);

  ScheduleCommand schedule;
  auto* s_schedule = app.add_subcommand("schedule", "FCD weights for every epoch of a schedule");
  schedule.attach(*s_schedule);
  add_out(s_schedule);

  SweepCommand sweep;
  auto* s_sweep = app.add_subcommand("sweep", "CD / FCD values and gradients along the two-point stalemate");
  sweep.attach(*s_sweep);
  add_out(s_sweep);

  OptimizeCommand optimize;
  auto* s_optimize = app.add_subcommand("optimize", "gradient descent of free points against a target");
  optimize.attach(*s_optimize);
  add_out(s_optimize);

  BatchCommand batch;
  auto* s_batch = app.add_subcommand("batch", "metric table over pred/ and gt/ file pairs");
  batch.attach(*s_batch);
  add_out(s_batch);

  AmbiguityCommand ambiguity;
  auto* s_ambiguity = app.add_subcommand("ambiguity", "clustered and uniform predictions with equal CD");
  ambiguity.attach(*s_ambiguity);
  add_out(s_ambiguity);

  std::string manifest;
  auto* s_replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  s_replay->add_option("manifest", manifest, "manifest.json")->required();
  add_out(s_replay);

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::FileError& e) {
    return report_error("", e.what(), kIoError);
  } catch (const CLI::ParseError& e) {
    return report_error("", e.what(), kValidation);
  }

  try {
    if (s_metrics->parsed()) return dispatch(app, s_metrics, [&] { return metrics.run(); }, out_dir);
    if (s_schedule->parsed()) return dispatch(app, s_schedule, [&] { return schedule.run(); }, out_dir);
    if (s_sweep->parsed()) return dispatch(app, s_sweep, [&] { return sweep.run(); }, out_dir);
    if (s_optimize->parsed()) return dispatch(app, s_optimize, [&] { return optimize.run(); }, out_dir);
    if (s_batch->parsed()) return dispatch(app, s_batch, [&] { return batch.run(); }, out_dir);
    if (s_ambiguity->parsed()) return dispatch(app, s_ambiguity, [&] { return ambiguity.run(); }, out_dir);
    if (s_replay->parsed()) return replay(manifest, out_dir);
  } catch (const fcd::IoError& e) {
    return report_error("i/o error: ", e.what(), kIoError);
  } catch (const fs::filesystem_error& e) {
    return report_error("i/o error: ", e.what(), kIoError);
  } catch (const fcd::InvalidInput& e) {
    return report_error("invalid input: ", e.what(), kValidation);
  } catch (const nlohmann::json::exception& e) {
    return report_error("invalid input: ", e.what(), kValidation);
  } catch (const fcd::NumericalError& e) {
    return report_error("numerical failure: ", e.what(), kNumerical);
  } catch (const std::exception& e) {
    return report_error("error: ", e.what(), kFailure);
  }
  return kFailure;
}

}  // namespace
}  // namespace fcdtool

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(true);
  return fcdtool::run(std::vector<std::string>(argv, argv + argc));
}
