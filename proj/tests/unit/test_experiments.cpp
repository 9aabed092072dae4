#include "linsync/experiments.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

using namespace linsync;

namespace {

SweepSpec small_sweep() {
    SweepSpec s;
    s.n = 20;
    s.d = 4;
    s.p_values = {0.0, 0.2, 1.0};
    s.c_values = {0.5, 0.8};
    s.realizations = 6;
    s.seed = 42;
    s.low_orders = {0, 3, 8};
    return s;
}

std::string rows_csv(const SweepResult& r) {
    std::ostringstream o;
    write_sweep_rows_csv(r, o);
    return o.str();
}

std::string summary_csv(const SweepResult& r) {
    std::ostringstream o;
    write_sweep_summary_csv(r, o);
    return o.str();
}

} // namespace

TEST_CASE("parallel_for visits every index once and rethrows the lowest failure") {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(97, 4, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK_NOTHROW(parallel_for(0, 3, [](std::size_t) {}));
    try {
        parallel_for(50, 3, [](std::size_t i) {
            if (i == 17 || i == 40) throw std::runtime_error(std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "17");
    }
}

TEST_CASE("thread count resolution") {
    CHECK(resolve_thread_count(5) == 5);
    setenv("LINSYNC_THREADS", "3", 1);
    CHECK(resolve_thread_count() == 3);
    CHECK(resolve_thread_count(2) == 2);
    setenv("LINSYNC_THREADS", "zero", 1);
    CHECK_THROWS_AS(resolve_thread_count(), std::invalid_argument);
    unsetenv("LINSYNC_THREADS");
    CHECK(resolve_thread_count() >= 1);
}

TEST_CASE("log-log slope") {
    CHECK(loglog_slope({1, 10, 100}, {1, 0.1, 0.01}) == doctest::Approx(-1.0));
    CHECK(loglog_slope({100, 1000, 10000}, {0.1, 0.1 / std::sqrt(10.0), 0.01}) == doctest::Approx(-0.5));
}

TEST_CASE("sweep spec validation") {
    SweepSpec s = small_sweep();
    CHECK_NOTHROW(s.validate());
    s.p_values.clear();
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = small_sweep();
    s.realizations = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = small_sweep();
    s.c_values = {1.5};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s = small_sweep();
    s.d = 3;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("sweep JSON") {
    SweepSpec s;
    apply_sweep_json(nlohmann::json::parse(R"({"n":30,"d":2,"p_values":[0.1,0.5],"realizations":7,
        "dynamics":{"kind":"discrete","zeta":2},"tolerances":{"tol":1e-9,"max_terms":500},
        "method":"series","low_orders":[1,4]})"),
                     s);
    CHECK(s.n == 30);
    CHECK(s.d == 2);
    CHECK(s.p_values == std::vector<double>{0.1, 0.5});
    CHECK(s.realizations == 7);
    CHECK(s.dynamics.kind == DynamicsKind::discrete);
    CHECK(s.dynamics.zeta == 2.0);
    CHECK(s.tol == 1e-9);
    CHECK(s.max_terms == 500);
    CHECK(s.method == SigmaMethod::series);
    CHECK(s.low_orders == std::vector<std::size_t>{1, 4});
    CHECK_THROWS(apply_sweep_json(nlohmann::json::parse(R"({"n":30,"colour":"red"})"), s));
    CHECK_THROWS(apply_sweep_json(nlohmann::json::parse(R"({"method":"guess"})"), s));
}

TEST_CASE("sweep output does not depend on the thread count") {
    const SweepSpec s = small_sweep();
    const auto one = run_sweep(s, 1);
    const auto three = run_sweep(s, 3);
    CHECK(rows_csv(one) == rows_csv(three));
    CHECK(summary_csv(one) == summary_csv(three));
    REQUIRE(one.rows.size() == 36);
    for (std::size_t k = 1; k < one.rows.size(); ++k) {
        const auto& a = one.rows[k - 1];
        const auto& b = one.rows[k];
        CHECK((a.p < b.p || (a.p == b.p && (a.c < b.c || (a.c == b.c && a.realization_id < b.realization_id)))));
    }
    const std::string header = rows_csv(one).substr(0, rows_csv(one).find('\n'));
    CHECK(header == "p,c,realization_id,seed,sigma2,sigma2_M0,sigma2_M3,sigma2_M8,re_lambda1,re_lambda2,rho_cu,"
                    "valid,converged");
}

TEST_CASE("summary means are recomputable from the rows") {
    const auto r = run_sweep(small_sweep(), 2);
    REQUIRE(r.cells.size() == 6);
    for (const auto& cell : r.cells) {
        double sum = 0.0;
        std::size_t k = 0;
        for (const auto& row : r.rows) {
            if (row.p == cell.p && row.c == cell.c && row.valid && row.converged) {
                sum += row.sigma2;
                ++k;
            }
        }
        REQUIRE(k > 0);
        CHECK(cell.sigma2.mean == doctest::Approx(sum / static_cast<double>(k)).epsilon(1e-12));
        CHECK(cell.rows_total == 6);
    }
}

TEST_CASE("rows outside the convergence domain are discarded and counted") {
    // Ring with c = 1 and d = 2 on 10 nodes has eigenvalue -1.
    SweepSpec s;
    s.n = 10;
    s.d = 2;
    s.c_values = {1.0};
    s.p_values = {0.0};
    s.realizations = 4;
    const auto r = run_sweep(s, 1);
    REQUIRE(r.cells.size() == 1);
    CHECK(r.cells[0].rows_discarded == 4);
    CHECK(r.cells[0].rows_valid == 0);
    for (const auto& row : r.rows) {
        CHECK_FALSE(row.valid);
        CHECK(std::isnan(row.sigma2));
        CHECK(row.rho_cu == doctest::Approx(1.0));
    }
    CHECK(std::isnan(r.cells[0].sigma2.mean));
}

TEST_CASE("discrete low-order columns are ordered") {
    SweepSpec s = small_sweep();
    s.dynamics = DynamicsParams::discrete();
    const auto r = run_sweep(s, 1);
    for (const auto& row : r.rows) {
        if (!row.valid) continue;
        CHECK(row.sigma2_m[0] <= row.sigma2_m[1] + 1e-12);
        CHECK(row.sigma2_m[1] <= row.sigma2_m[2] + 1e-12);
        CHECK(row.sigma2_m[2] <= row.sigma2 * (1.0 + 1e-9));
    }
}

TEST_CASE("small converge run") {
    ConvergeSpec s;
    s.n = 12;
    s.d = 2;
    s.p_values = {0.0, 1.0};
    s.l_values = {50, 500};
    s.realizations = 4;
    s.seed = 3;
    const auto a = run_converge(s, 1);
    REQUIRE(a.size() == 4);
    CHECK(a[0].p == 0.0);
    CHECK(a[0].l == 50);
    CHECK(a[1].l == 500);
    for (const auto& cell : a) {
        CHECK(cell.realizations == 4);
        CHECK(cell.valid == cell.rel_errors.size());
        CHECK(cell.valid == 4);
        CHECK(cell.mean_rel_error > 0.0);
    }
    const auto b = run_converge(s, 3);
    std::ostringstream oa, ob;
    write_converge_csv(a, oa);
    write_converge_csv(b, ob);
    CHECK(oa.str() == ob.str());
    CHECK(oa.str().rfind("p,L,realizations,valid,mean_rel_error,log10_sd,mean_log10_error\n", 0) == 0);
    s.realizations = 0;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
