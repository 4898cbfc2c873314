#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "kpz/grid_ensemble.hpp"
#include "kpz/lpp_core.hpp"

using namespace kpz;

namespace {

LineEnsemble two_line_example() {
    // line 1 on top, line 2 below it
    return LineEnsemble::from_lines(make_grid(0.0, 1.0, 3), {{0.0, 1.0, 5.0}, {0.0, 3.0, 1.0}});
}

LineEnsemble random_ensemble(std::mt19937_64& rng, std::size_t k, std::size_t count) {
    std::normal_distribution<double> z;
    std::vector<std::vector<double>> lines(k, std::vector<double>(count, 0.0));
    for (auto& l : lines)
        for (std::size_t i = 1; i < count; ++i) l[i] = l[i - 1] + z(rng);
    return LineEnsemble::from_lines(make_grid(0.0, 1.0, static_cast<long long>(count)), lines);
}

// Independent enumeration of every nondecreasing jump tuple.
double enumerate_paths(const LineEnsemble& ens, LppEndpoint start, LppEndpoint end) {
    const std::size_t jumps = start.line - end.line;
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> j(jumps);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t q, std::size_t from) {
        if (q == jumps) {
            double s = 0.0;
            std::size_t enter = start.space_index;
            for (std::size_t m = 0; m < jumps; ++m) {
                auto l = ens.line(start.line - m);
                s += l[j[m]] - l[enter];
                enter = j[m];
            }
            auto l = ens.line(end.line);
            s += l[end.space_index] - l[enter];
            best = std::max(best, s);
            return;
        }
        for (std::size_t x = from; x <= end.space_index; ++x) {
            j[q] = x;
            rec(q + 1, x);
        }
    };
    rec(0, start.space_index);
    return best;
}

}  // namespace

TEST_CASE("two-line example") {
    const auto ens = two_line_example();
    const auto v = last_passage(ens, {0, 2}, {2, 1}, true);
    CHECK(v.value == doctest::Approx(7.0).epsilon(1e-15));
    REQUIRE(v.path.has_value());
    REQUIRE(v.path->jump_indices.size() == 1);
    CHECK(v.path->jump_indices[0] == 1);
    CHECK(brute_force_last_passage(ens, {0, 2}, {2, 1}) == doctest::Approx(7.0));
    CHECK(enumerate_paths(ens, {0, 2}, {2, 1}) == doctest::Approx(7.0));
}

TEST_CASE("single line is the increment") {
    const auto ens = two_line_example();
    CHECK(last_passage(ens, {0, 1}, {2, 1}).value == 5.0);
    CHECK(last_passage(ens, {1, 2}, {2, 2}).value == -2.0);
    CHECK(geodesic(ens, {0, 1}, {2, 1}).jump_indices.empty());
    CHECK(brute_force_last_passage(ens, {0, 2}, {1, 2}) == 3.0);
}

TEST_CASE("endpoint errors") {
    const auto ens = two_line_example();
    CHECK_CODE(last_passage(ens, {2, 2}, {0, 1}), ErrorCode::BadOrder);
    CHECK_CODE(last_passage(ens, {0, 1}, {2, 2}), ErrorCode::BadOrder);
    CHECK_CODE(last_passage(ens, {0, 3}, {2, 1}), ErrorCode::LineOutOfRange);
    CHECK_CODE(last_passage(ens, {0, 2}, {2, 0}), ErrorCode::LineOutOfRange);
    CHECK_CODE(last_passage(ens, {0, 2}, {3, 1}), ErrorCode::IndexOutOfRange);
    CHECK_CODE(composition_identity_gap(ens, {0, 2}, {2, 2}, 1), ErrorCode::BadOrder);
}

TEST_CASE("forward sweep matches exhaustive enumeration") {
    std::mt19937_64 rng(314159);
    double worst = 0.0;
    for (int inst = 0; inst < 500; ++inst) {
        const std::size_t k = 1 + rng() % 4, count = 2 + rng() % 7;
        const auto ens = random_ensemble(rng, k, count);
        const std::size_t sl = k - rng() % k, el = 1 + rng() % sl;
        std::size_t a = rng() % count, b = rng() % count;
        if (a > b) std::swap(a, b);
        const double dp = last_passage(ens, {a, sl}, {b, el}).value;
        worst = std::max(worst, std::abs(dp - enumerate_paths(ens, {a, sl}, {b, el})));
        worst = std::max(worst, std::abs(dp - brute_force_last_passage(ens, {a, sl}, {b, el})));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("profiles agree with repeated point queries") {
    std::mt19937_64 rng(7);
    for (int inst = 0; inst < 20; ++inst) {
        const auto ens = random_ensemble(rng, 5, 12);
        const std::size_t s = rng() % 6;
        const auto prof = last_passage_profile(ens, {s, 5}, 2);
        for (std::size_t j = 0; j < 12; ++j) {
            if (j < s) {
                CHECK(std::isinf(prof[j]));
            } else {
                CHECK(prof[j] == doctest::Approx(last_passage(ens, {s, 5}, {j, 2}).value).epsilon(1e-12));
            }
        }
        const std::size_t e = 6 + rng() % 6;
        const auto back = last_passage_profile_to(ens, 4, {e, 1});
        for (std::size_t j = 0; j < 12; ++j) {
            if (j > e) {
                CHECK(std::isinf(back[j]));
            } else {
                CHECK(back[j] == doctest::Approx(last_passage(ens, {j, 4}, {e, 1}).value).epsilon(1e-12));
            }
        }
    }
    const auto ens = random_ensemble(rng, 3, 9);
    CHECK(last_passage_profile(ens, {4, 2}, 2)[4] == 0.0);
    const auto one = last_passage_profile(ens, {2, 1}, 1);
    for (std::size_t j = 2; j < 9; ++j) CHECK(one[j] == ens.line(1)[j] - ens.line(1)[2]);
}

TEST_CASE("geodesic value and rightmost monotonicity") {
    std::mt19937_64 rng(11);
    int violations = 0;
    double worst = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
        const auto ens = random_ensemble(rng, 6, 40);
        std::size_t a1 = rng() % 20, a2 = rng() % 20, b1 = 20 + rng() % 20, b2 = 20 + rng() % 20;
        if (a1 > a2) std::swap(a1, a2);
        if (b1 > b2) std::swap(b1, b2);
        const auto v1 = last_passage(ens, {a1, 6}, {b1, 1}, true);
        const auto v2 = last_passage(ens, {a2, 6}, {b2, 1}, true);
        worst = std::max(worst, std::abs(path_value(ens, {a1, 6}, {b1, 1}, *v1.path) - v1.value));
        worst = std::max(worst, std::abs(path_value(ens, {a2, 6}, {b2, 1}, *v2.path) - v2.value));
        for (std::size_t q = 0; q < 5; ++q) {
            if (v1.path->jump_indices[q] > v2.path->jump_indices[q]) ++violations;
            if (q > 0 && v1.path->jump_indices[q] < v1.path->jump_indices[q - 1]) ++violations;
        }
        CHECK(v1.path->jump_indices.front() >= a1);
        CHECK(v1.path->jump_indices.back() <= b1);
    }
    CHECK(violations == 0);
    CHECK(worst <= 1e-12);
}

TEST_CASE("geodesic prefers the rightmost tie") {
    // both jump points give value 1
    const auto ens = LineEnsemble::from_lines(make_grid(0.0, 1.0, 3), {{0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}});
    CHECK(geodesic(ens, {0, 2}, {2, 1}).jump_indices[0] == 1);
    const auto flat = LineEnsemble::from_lines(make_grid(0.0, 1.0, 3), {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}});
    CHECK(geodesic(flat, {0, 2}, {2, 1}).jump_indices[0] == 2);
}

TEST_CASE("sweep keeps the rightmost origin on ties") {
    std::vector<double> line{0.0, 0.0, 0.0, 0.0};
    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<double> v{1.0, 1.0, ninf, 0.5};
    std::vector<std::int64_t> origin{0, 1, -1, 3};
    sweep_line(line, v, origin);
    CHECK(v == std::vector<double>{1.0, 1.0, 1.0, 1.0});
    CHECK(origin == std::vector<std::int64_t>{0, 1, 1, 1});

    std::vector<double> w{ninf, 2.0, ninf};
    sweep_line_backward(std::vector<double>{0.0, 1.0, 3.0}, w);
    CHECK(w[0] == 3.0);
    CHECK(w[1] == 2.0);
    CHECK(std::isinf(w[2]));
}

TEST_CASE("composition gap and superadditivity") {
    const auto ens2 = two_line_example();
    CHECK(composition_identity_gap(ens2, {0, 2}, {2, 1}, 2) <= 1e-12);
    CHECK(composition_identity_gap(ens2, {0, 2}, {2, 1}, 1) <= 1e-12);

    std::mt19937_64 rng(23);
    double worst = 0.0, slack = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const auto ens = random_ensemble(rng, 8, 30);
        for (std::size_t m = 1; m <= 8; ++m) worst = std::max(worst, composition_identity_gap(ens, {3, 8}, {27, 1}, m));
        const double full = last_passage(ens, {3, 8}, {27, 1}).value;
        for (std::size_t z = 3; z <= 27; z += 3) {
            const std::size_t m = 1 + rng() % 8;
            const double split = last_passage(ens, {3, 8}, {z, m}).value + last_passage(ens, {z, m}, {27, 1}).value;
            slack = std::min(slack, full - split);
        }
    }
    CHECK(worst <= 1e-9);
    CHECK(slack >= -1e-12);
}

TEST_CASE("brute force refuses large instances") {
    std::mt19937_64 rng(1);
    const auto ens = random_ensemble(rng, 10, 200);
    CHECK_CODE(brute_force_last_passage(ens, {0, 10}, {199, 1}), ErrorCode::InstanceTooLarge);
}

TEST_CASE("refining the grid never lowers the value") {
    // coarse grid is every other point of the fine one
    std::mt19937_64 rng(5);
    for (int inst = 0; inst < 50; ++inst) {
        const auto fine = random_ensemble(rng, 4, 41);
        std::vector<std::vector<double>> coarse_lines;
        for (std::size_t j = 1; j <= 4; ++j) {
            std::vector<double> c;
            for (std::size_t i = 0; i < 41; i += 2) c.push_back(fine.line(j)[i]);
            coarse_lines.push_back(c);
        }
        const auto coarse = LineEnsemble::from_lines(make_grid(0.0, 2.0, 21), coarse_lines);
        CHECK(last_passage(fine, {0, 4}, {40, 1}).value >= last_passage(coarse, {0, 4}, {20, 1}).value - 1e-12);
    }
}
