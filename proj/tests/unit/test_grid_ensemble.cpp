#include <cmath>
#include <sstream>
#include <vector>

#include "helpers.hpp"
#include "kpz/grid_ensemble.hpp"
#include "kpz/philox.hpp"
#include "kpz/stats.hpp"

using namespace kpz;

TEST_CASE("make_grid points") {
    const Grid g = make_grid(0.0, 0.5, 3);
    CHECK(g.count == 3);
    CHECK(g.point(0) == 0.0);
    CHECK(g.point(1) == 0.5);
    CHECK(g.point(2) == 1.0);

    const Grid h = make_grid(-1.0, 1.0, 3);
    CHECK(h.point(0) == -1.0);
    CHECK(h.point(1) == 0.0);
    CHECK(h.point(2) == 1.0);
}

TEST_CASE("make_grid rejects bad step and count") {
    CHECK_CODE(make_grid(0.0, -0.1, 5), ErrorCode::NonPositiveStep);
    CHECK_CODE(make_grid(0.0, 0.0, 5), ErrorCode::NonPositiveStep);
    CHECK_CODE(make_grid(0.0, 0.1, 1), ErrorCode::CountTooSmall);
}

TEST_CASE("grid nearest index and cover") {
    const Grid g = make_grid(-1.0, 0.25, 9);
    CHECK(g.nearest_index(0.0) == 4);
    CHECK(g.nearest_index(0.1) == 4);
    CHECK(g.nearest_index(0.13) == 5);
    CHECK(g.nearest_index(-7.0) == 0);
    CHECK(g.nearest_index(7.0) == 8);
    CHECK(g.covers(1.1));
    CHECK_FALSE(g.covers(1.2));
}

// Known-answer vectors for Philox4x64-10.
TEST_CASE("philox4x64 known answers") {
    const auto z = philox4x64({0, 0, 0, 0}, {0, 0});
    CHECK(z[0] == 0x16554d9eca36314cULL);
    CHECK(z[1] == 0xdb20fe9d672d0fdcULL);
    CHECK(z[2] == 0xd7e772cee186176bULL);
    CHECK(z[3] == 0x7e68b68aec7ba23bULL);

    const std::uint64_t ones = ~0ULL;
    const auto o = philox4x64({ones, ones, ones, ones}, {ones, ones});
    CHECK(o[0] == 0x87b092c3013fe90bULL);
    CHECK(o[1] == 0x438c3c67be8d0224ULL);
    CHECK(o[2] == 0x9cc7d7c69cd777b6ULL);
    CHECK(o[3] == 0xa09caebf594f0ba0ULL);

    const auto p = philox4x64({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                              {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL});
    CHECK(p[0] == 0xa528f45403e61d95ULL);
    CHECK(p[1] == 0x38c72dbd566e9788ULL);
    CHECK(p[2] == 0xa5a1610e72fd18b5ULL);
    CHECK(p[3] == 0x57bd43b5e52b7fe6ULL);
}

TEST_CASE("philox stream walks the block counter") {
    PhiloxStream s({0, 0}, 0, 0, 0);
    const auto b0 = philox4x64({0, 0, 0, 0}, {0, 0});
    const auto b1 = philox4x64({1, 0, 0, 0}, {0, 0});
    for (int i = 0; i < 4; ++i) CHECK(s() == b0[i]);
    CHECK(s() == 0x02f4ba6408e4d89bULL);
    CHECK(b1[0] == 0x02f4ba6408e4d89bULL);
    for (int i = 1; i < 4; ++i) CHECK(s() == b1[i]);
}

TEST_CASE("extended values") {
    CHECK(ExtendedValue::finite(2.5).value() == 2.5);
    CHECK_CODE(ExtendedValue::finite(NAN), ErrorCode::ContractViolation);
    CHECK_CODE(ExtendedValue::minus_infinity().value(), ErrorCode::ContractViolation);
    CHECK(ExtendedValue::from_double(-INFINITY) == ExtendedValue::minus_infinity());
    CHECK(std::isinf(ExtendedValue::minus_infinity().as_double()));
    CHECK(ExtendedValue::minus_infinity() < ExtendedValue::finite(-1e300));
    CHECK(ExtendedValue::finite(1.0) < ExtendedValue::finite(2.0));
    CHECK_FALSE(ExtendedValue::minus_infinity() < ExtendedValue::minus_infinity());
}

namespace {

GridFunction wedge(const Grid& g, std::size_t apex, double v) {
    std::vector<ExtendedValue> vals(g.count, ExtendedValue::minus_infinity());
    vals[apex] = ExtendedValue::finite(v);
    return GridFunction(g, vals);
}

}  // namespace

TEST_CASE("grid function eval and shift") {
    const Grid g = make_grid(-1.0, 1.0, 3);
    const GridFunction w = wedge(g, 1, 0.0);
    CHECK_CODE(w.eval(3), ErrorCode::IndexOutOfRange);

    const GridFunction w5 = w.shift_values(5.0);
    CHECK(w5.eval(1) == ExtendedValue::finite(5.0));
    CHECK_FALSE(w5.eval(0).is_finite());
    CHECK_FALSE(w5.eval(2).is_finite());

    const GridFunction f = GridFunction::from_dense(g, std::vector<double>{1.0, -2.0, 0.5});
    CHECK(f.shift_values(0.0).values() == f.values());
    CHECK(w.shift_values(0.37).shift_values(-0.37).values() == w.values());

    CHECK_CODE(GridFunction(g, std::vector<ExtendedValue>(3, ExtendedValue::minus_infinity())),
               ErrorCode::ContractViolation);
    CHECK_CODE(GridFunction(g, std::vector<ExtendedValue>(2, ExtendedValue::finite(0.0))),
               ErrorCode::ContractViolation);
}

TEST_CASE("grid function csv") {
    const Grid g = make_grid(0.0, 0.5, 3);
    const GridFunction w = wedge(g, 1, 2.0);
    std::ostringstream os;
    write_csv(os, w);
    CHECK(os.str() == "x,value\n0,-inf\n0.5,2\n1,-inf\n");
}

TEST_CASE("ensemble sampling is deterministic and pinned") {
    const Grid g = make_grid(-2.0, 0.01, 401);
    const RngKey key{42, 3, 1};
    const auto a = sample_line_ensemble(g, 5, key);
    const auto b = sample_line_ensemble(g, 5, key);
    REQUIRE(a.k() == 5);
    for (std::size_t j = 1; j <= 5; ++j) {
        const auto la = a.line(j), lb = b.line(j);
        CHECK(la.size() == g.count);
        CHECK(la[0] == 0.0);
        CHECK(std::equal(la.begin(), la.end(), lb.begin()));
    }
    CHECK_CODE(sample_line_ensemble(g, 0, key), ErrorCode::BadK);
    CHECK_CODE(a.line(0), ErrorCode::LineOutOfRange);
    CHECK_CODE(a.line(6), ErrorCode::LineOutOfRange);

    const auto c = sample_line_ensemble(g, 5, RngKey{42, 3, 2});
    CHECK_FALSE(std::equal(a.line(1).begin(), a.line(1).end(), c.line(1).begin()));
}

TEST_CASE("ensemble increments have variance step") {
    const double step = 0.01;
    const Grid g = make_grid(0.0, step, 100000);
    const auto ens = sample_line_ensemble(g, 1, RngKey{2024, 0, 0});
    const auto l = ens.line(1);
    std::vector<double> inc(l.size() - 1);
    for (std::size_t i = 0; i + 1 < l.size(); ++i) inc[i] = l[i + 1] - l[i];
    CHECK(std::abs(sample_variance(inc) / step - 1.0) < 0.05);
    CHECK(std::abs(mean(inc)) < 4.0 * std::sqrt(step / inc.size()));
}

TEST_CASE("lines with distinct keys are uncorrelated") {
    const Grid g = make_grid(0.0, 1.0, 20001);
    const auto ens = sample_line_ensemble(g, 3, RngKey{5, 0, 0});
    const auto other = sample_line_ensemble(g, 1, RngKey{5, 0, 1});
    auto incs = [](std::span<const double> l) {
        std::vector<double> d(l.size() - 1);
        for (std::size_t i = 0; i + 1 < l.size(); ++i) d[i] = l[i + 1] - l[i];
        return d;
    };
    const auto a = incs(ens.line(1)), b = incs(ens.line(2)), c = incs(ens.line(3)), d = incs(other.line(1));
    const double bound = 3.0 / std::sqrt(static_cast<double>(a.size()));
    CHECK(std::abs(correlation(a, b)) < bound);
    CHECK(std::abs(correlation(b, c)) < bound);
    CHECK(std::abs(correlation(a, d)) < bound);
}

TEST_CASE("two-sided bm: degenerate diffusion is the drift line") {
    const Grid g = make_grid(-1.0, 0.25, 9);
    const auto b = sample_two_sided_bm(g, 0.0, 3.0, RngKey{1, 0, 0});
    for (std::size_t i = 0; i < g.count; ++i) CHECK(b.eval(i).value() == 3.0 * g.point(i));
}

TEST_CASE("two-sided bm: pinned and variance 2 at x = 1") {
    const Grid g = make_grid(-1.0, 0.05, 41);
    const std::size_t pin = g.nearest_index(0.0), one = g.nearest_index(1.0), minus = g.nearest_index(-1.0);
    std::vector<double> right, left;
    for (std::uint64_t r = 0; r < 10000; ++r) {
        const auto b = sample_two_sided_bm(g, 2.0, 0.0, RngKey{99, r, 0});
        CHECK(b.eval(pin).value() == 0.0);
        right.push_back(b.eval(one).value());
        left.push_back(b.eval(minus).value());
    }
    CHECK(std::abs(sample_variance(right) / 2.0 - 1.0) < 0.05);
    CHECK(std::abs(sample_variance(left) / 2.0 - 1.0) < 0.05);
    CHECK(std::abs(correlation(left, right)) < 3.0 / std::sqrt(10000.0));
}

TEST_CASE("two-sided bm needs the origin") {
    const Grid g = make_grid(1.0, 0.1, 10);
    CHECK_CODE(sample_two_sided_bm(g, 2.0, 0.0, RngKey{}), ErrorCode::OriginNotOnGrid);
    CHECK_CODE(sample_two_sided_bm(make_grid(-1.0, 0.1, 21), -1.0, 0.0, RngKey{}), ErrorCode::ContractViolation);
}
