#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ccopt/rng.hpp"
#include "ccopt/sim/bbr.hpp"
#include "ccopt/sim/fluid.hpp"
#include "ccopt/sim/oracle.hpp"
#include "ccopt/sim/trace.hpp"
#include "ccopt/utility/utility.hpp"

using namespace ccopt::sim;
namespace fs = std::filesystem;

namespace {

fs::path write_temp_trace(const std::string& name, const std::string& body) {
    fs::path p = fs::temp_directory_path() / name;
    std::ofstream(p) << body;
    return p;
}

NetworkCondition make_condition(Trace trace, double rtt_ms, double queue_mult) {
    double bdp = trace.avg_bandwidth_mbps() * 1e6 / 8.0 * (rtt_ms / 1000.0);
    NetworkCondition cond;
    cond.id = "test";
    cond.trace = std::move(trace);
    cond.rtt_ms = rtt_ms;
    cond.queue_bytes = std::max<int64_t>(1500, static_cast<int64_t>(bdp * queue_mult));
    return cond;
}

}  // namespace

TEST_CASE("a 1000-line one-second trace is 12 Mbps") {
    std::string body;
    for (int i = 0; i < 1000; ++i) body += std::to_string(i) + "\n";
    auto p = write_temp_trace("ccopt_t12.trace", body);
    auto t = load_trace(p);
    CHECK(t.deliveries_ms.size() == 1000);
    CHECK(t.duration_ms == 1000);
    CHECK(t.avg_bandwidth_mbps() == doctest::Approx(12.0));
    fs::remove(p);
}

TEST_CASE("trace parse errors") {
    auto empty = write_temp_trace("ccopt_empty.trace", "");
    CHECK_THROWS_WITH_AS(load_trace(empty), doctest::Contains("empty"), TraceError);
    auto noninteger = write_temp_trace("ccopt_bad.trace", "0\nfoo\n");
    CHECK_THROWS_WITH_AS(load_trace(noninteger), doctest::Contains("non-integer"), TraceError);
    auto backwards = write_temp_trace("ccopt_mono.trace", "5\n3\n");
    CHECK_THROWS_WITH_AS(load_trace(backwards), doctest::Contains("non-monotonic"), TraceError);
    CHECK_THROWS_AS(load_trace("does/not/exist.trace"), TraceError);
    fs::remove(empty);
    fs::remove(noninteger);
    fs::remove(backwards);
}

TEST_CASE("trace write/load round-trip") {
    auto t = make_constant_trace(6.0, 2000);
    fs::path p = fs::temp_directory_path() / "ccopt_rt.trace";
    write_trace(t, p);
    auto back = load_trace(p);
    CHECK(back.deliveries_ms == t.deliveries_ms);
    fs::remove(p);
}

TEST_CASE("dataset-speed traces sit within 5% of their nominal BDP") {
    struct Row {
        double mbps;
        double bdp_bytes;
    } rows[] = {{1.3, 16000}, {1.9, 24000}, {18.1, 230000}, {31.7, 400000}};
    for (const auto& row : rows) {
        auto t = make_constant_trace(row.mbps, 10000);
        double bdp = t.avg_bandwidth_mbps() * 1e6 / 8.0 * 0.1;  // 100 ms RTT
        CHECK(std::abs(bdp - row.bdp_bytes) / row.bdp_bytes < 0.05);
    }
}

TEST_CASE("synthetic trace generators hit their targets deterministically") {
    auto c = make_constant_trace(10.0, 5000);
    CHECK(c.avg_bandwidth_mbps() == doctest::Approx(10.0).epsilon(0.01));

    auto sq = make_square_wave_trace(2.0, 10.0, 1000, 8000);
    CHECK(sq.avg_bandwidth_mbps() == doctest::Approx(6.0).epsilon(0.05));

    auto w1 = make_random_walk_trace(5.0, 1.0, 10.0, 1.0, 5000, 3);
    auto w2 = make_random_walk_trace(5.0, 1.0, 10.0, 1.0, 5000, 3);
    auto w3 = make_random_walk_trace(5.0, 1.0, 10.0, 1.0, 5000, 4);
    CHECK(w1.deliveries_ms == w2.deliveries_ms);
    CHECK(w1.deliveries_ms != w3.deliveries_ms);
    CHECK(w1.avg_bandwidth_mbps() > 1.0);
    CHECK(w1.avg_bandwidth_mbps() < 10.0);
}

TEST_CASE("one-eighth scaling keeps every eighth delivery") {
    auto t = make_constant_trace(8.0, 3000);
    auto scaled = t.scaled_down(8);
    CHECK(scaled.deliveries_ms.size() ==
          (t.deliveries_ms.size() + 7) / 8);
    CHECK(scaled.duration_ms == t.duration_ms);
    CHECK(scaled.avg_bandwidth_mbps() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("bandwidth series reflects a square wave") {
    auto sq = make_square_wave_trace(2.0, 10.0, 1000, 4000);
    auto series = sq.bandwidth_series(500);
    REQUIRE(series.size() == 8);
    CHECK(series[0] > series[2]);  // high phase first, then low
}

TEST_CASE("condition grid is a traces-by-queue-multipliers cross product") {
    std::vector<TraceSpec> specs;
    specs.push_back({make_constant_trace(5.0, 4000), DatasetTag::FCC, "fcc0"});
    auto grid1 = build_condition_grid(specs);
    REQUIRE(grid1.size() == 2);
    CHECK(grid1[0].queue_bytes == doctest::Approx(2 * grid1[1].queue_bytes).epsilon(0.02));

    for (int i = 1; i < 204; ++i)
        specs.push_back({make_constant_trace(5.0, 4000), DatasetTag::FCC,
                         "fcc" + std::to_string(i)});
    CHECK(build_condition_grid(specs).size() == 408);
}

TEST_CASE("starlink traces are throughput-scaled before gridding") {
    std::vector<TraceSpec> specs;
    specs.push_back({make_constant_trace(8.0, 4000), DatasetTag::Starlink, "sl0"});
    auto grid = build_condition_grid(specs);
    REQUIRE(grid.size() == 2);
    CHECK(grid[0].trace.avg_bandwidth_mbps() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("parameter defaults and grid variants") {
    BbrParams d;
    CHECK(d.initial_window_packets == 16);
    CHECK(d.high_gain == doctest::Approx(2885.0 / 1000.0 + 1.0));
    CHECK(d.startup_growth_target == doctest::Approx(1.25));
    CHECK(d.drain_gain == doctest::Approx(1000.0 / 2885.0));
    CHECK(d.cwnd_gain == doctest::Approx(2.0));
    auto c = BbrParams::conservative();
    auto a = BbrParams::aggressive();
    CHECK(c.initial_window_packets < d.initial_window_packets);
    CHECK(a.initial_window_packets > d.initial_window_packets);
    CHECK(c.high_gain < d.high_gain);
    CHECK(a.high_gain > d.high_gain);
}

TEST_CASE("rate-matched goodput approaches but never exceeds capacity") {
    auto cond = make_condition(make_constant_trace(10.0, 2000), 100.0, 1.0);
    BbrModel cc;
    auto stats = simulate(cond, cc, 10000, Workload::BulkDownload, 1);
    CHECK(stats.goodput_mbps > 6.0);
    CHECK(stats.goodput_mbps <= 10.0 * 1.001);
}

TEST_CASE("conservation holds exactly on random traces") {
    for (uint64_t seed = 0; seed < 50; ++seed) {
        auto trace = make_random_walk_trace(1.0 + (seed % 7), 0.5, 20.0, 1.5, 4000, seed);
        auto cond = make_condition(trace, 40.0 + 10 * (seed % 5), (seed % 2) ? 1.0 : 0.5);
        BbrModel cc((seed % 3 == 0) ? BbrParams::aggressive()
                                    : (seed % 3 == 1) ? BbrParams::defaults()
                                                      : BbrParams::conservative());
        auto stats = simulate(cond, cc, 6000, Workload::BulkDownload, seed);
        CHECK(stats.injected == stats.delivered + stats.dropped + stats.queue_residual);
        CHECK(stats.injected > 0);
    }
}

TEST_CASE("delivered bytes never exceed trace opportunities") {
    auto trace = make_constant_trace(4.0, 3000);
    auto cond = make_condition(trace, 80.0, 1.0);
    BbrModel cc(BbrParams::aggressive());
    auto stats = simulate(cond, cc, 9000, Workload::BulkDownload, 2);
    // 9 s of a 4 Mbps link is at most 4.5e6 bytes
    CHECK(stats.delivered <= static_cast<uint64_t>(9000.0 / 3000.0 *
                                                   trace.deliveries_ms.size() * 1500 + 1500));
}

TEST_CASE("request-response waits at least one RTT per transaction") {
    auto cond = make_condition(make_constant_trace(10.0, 2000), 60.0, 1.0);
    BbrModel cc;
    auto stats = simulate(cond, cc, 10000, Workload::RequestResponse, 3);
    REQUIRE_FALSE(stats.request_completions_ms.empty());
    for (double ms : stats.request_completions_ms) CHECK(ms >= 60.0);
}

TEST_CASE("a dead link starves cleanly") {
    Trace dead;
    dead.deliveries_ms = {0};
    dead.duration_ms = 100000;
    NetworkCondition cond;
    cond.id = "dead";
    cond.trace = dead;
    cond.rtt_ms = 100.0;
    cond.queue_bytes = 15000;
    BbrModel cc;
    auto meas = measure(cond, cc, 5);
    CHECK(meas.tput_mbps < 0.05);
    CHECK(meas.lat_ms == doctest::Approx(30000.0));
}

TEST_CASE("measurement is deterministic and seed-sensitive") {
    auto cond = make_condition(make_constant_trace(6.0, 2500), 100.0, 1.0);
    BbrModel cc;
    auto a = measure(cond, cc, 9);
    auto b = measure(cond, cc, 9);
    CHECK(a.tput_mbps == b.tput_mbps);
    CHECK(a.lat_ms == b.lat_ms);
    CHECK(a.tput_mbps > 0.0);
    CHECK(a.lat_ms >= 100.0);
}

TEST_CASE("sim backend scores the default parameters at zero utility") {
    std::vector<TraceSpec> specs;
    specs.push_back({make_constant_trace(5.0, 3000), DatasetTag::Synthetic, "c"});
    specs.push_back({make_square_wave_trace(2.0, 8.0, 700, 3000), DatasetTag::Synthetic, "sq"});
    SimBackend backend(build_condition_grid(specs), 31);
    backend.register_candidate("default", BbrParams::defaults());
    backend.register_candidate("aggr", BbrParams::aggressive());
    for (int j = 0; j < backend.num_conditions(); ++j) {
        auto m = backend.measure("default", j);
        REQUIRE(m.has_value());
        auto base = backend.baseline(j);
        double u = ccopt::util::compute_utility(*m, base);
        CHECK(u == doctest::Approx(0.0).epsilon(1e-12));
        auto other = backend.measure("aggr", j);
        REQUIRE(other.has_value());
        CHECK(std::isfinite(ccopt::util::compute_utility(*other, base)));
    }
    CHECK_FALSE(backend.measure("unregistered", 0).has_value());
}

TEST_CASE("oracle backend recovers its drawn utilities exactly") {
    ccopt::Rng rng(44);
    const int m = 6;
    Eigen::MatrixXd f(m, 3);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < 3; ++j) f(i, j) = rng.normal();
    ccopt::gauss::GaussianModel model;
    model.mu = Eigen::VectorXd::Constant(m, 0.02);
    model.sigma = f * f.transpose() * 0.01;
    for (int i = 0; i < m; ++i) model.sigma(i, i) += 0.005;

    GaussianOracleBackend backend(model, 7);
    for (const char* id : {"x", "y", "z"}) {
        auto u = backend.utilities(id);
        for (int j = 0; j < m; ++j) {
            auto meas = backend.measure(id, j);
            REQUIRE(meas.has_value());
            double got = ccopt::util::compute_utility(*meas, backend.baseline(j));
            CHECK(std::abs(got - u(j)) < 1e-12);
        }
    }
    // same id twice -> identical vector; distinct ids differ
    CHECK(backend.utilities("x") == backend.utilities("x"));
    CHECK(backend.utilities("x") != backend.utilities("y"));
}

TEST_CASE("oracle draws have the declared covariance") {
    ccopt::gauss::GaussianModel model;
    model.mu = Eigen::VectorXd::Zero(2);
    model.sigma = Eigen::MatrixXd(2, 2);
    model.sigma << 0.04, 0.024, 0.024, 0.09;
    GaussianOracleBackend backend(model, 55);
    const int n = 20000;
    Eigen::MatrixXd draws(n, 2);
    for (int i = 0; i < n; ++i)
        draws.row(i) = backend.utilities("cand-" + std::to_string(i)).transpose();
    Eigen::RowVectorXd mean = draws.colwise().mean();
    Eigen::MatrixXd centered = draws.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * centered / (n - 1);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double se = std::sqrt((model.sigma(i, i) * model.sigma(j, j) +
                                   model.sigma(i, j) * model.sigma(i, j)) /
                                  n);
            CHECK(std::abs(cov(i, j) - model.sigma(i, j)) < 5.0 * se);
        }
}
