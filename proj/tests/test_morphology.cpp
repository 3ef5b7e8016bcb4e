#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "leafmetric/morphology.hpp"
#include "oracles.hpp"

using namespace leafmetric;
using fixtures::filled_rect_mask;
using fixtures::to_grid;
using fixtures::to_mask;

namespace {

BinaryMask from_rows(std::initializer_list<const char*> rows) {
    const std::size_t h = rows.size();
    const std::size_t w = std::char_traits<char>::length(*rows.begin());
    BinaryMask m(w, h);
    std::size_t y = 0;
    for (const char* r : rows) {
        for (std::size_t x = 0; x < w; ++x)
            m.set(x, y, r[x] == '#');
        ++y;
    }
    return m;
}

bool subset(const BinaryMask& a, const BinaryMask& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.at(i) && !b.at(i))
            return false;
    return true;
}

} // namespace

TEST_CASE("label_components examples", "[morphology][labeling]") {
    SECTION("diagonal pixels are one object") {
        const auto lc = label_components(from_rows({"#.", ".#"}));
        CHECK(lc.count() == 1);
        CHECK(lc.area(1) == 2);
    }
    SECTION("separated pixels are two objects") {
        const auto lc = label_components(from_rows({"#.#"}));
        CHECK(lc.count() == 2);
        CHECK(lc.label(0, 0) == 1);
        CHECK(lc.label(2, 0) == 2);
    }
    SECTION("empty mask") {
        CHECK(label_components(BinaryMask(4, 4)).count() == 0);
    }
    SECTION("U shape merges late") {
        const auto lc = label_components(from_rows({"#..#", "#..#", "####"}));
        CHECK(lc.count() == 1);
        CHECK(lc.area(1) == 8);
    }
    SECTION("ids follow raster order of first pixel") {
        // The object whose first pixel comes first is #1 even though the
        // other object is bigger.
        const auto lc = label_components(from_rows({"..#.", "#...", "#...", "#..."}));
        CHECK(lc.label(2, 0) == 1);
        CHECK(lc.label(0, 1) == 2);
        CHECK(lc.area(1) == 1);
        CHECK(lc.area(2) == 3);
    }
}

TEST_CASE("labeling agrees with flood fill", "[morphology][labeling][property]") {
    std::mt19937 rng(20);
    for (int i = 0; i < 1000; ++i) {
        const oracle::Grid g = oracle::random_grid(rng);
        const auto expected = oracle::flood_fill_label(g);
        const auto lc = label_components(to_mask(g));
        REQUIRE(lc.count() == expected.areas.size());
        REQUIRE(std::vector<std::size_t>(lc.areas().begin(), lc.areas().end()) == expected.areas);
        for (std::size_t k = 0; k < g.v.size(); ++k)
            REQUIRE(static_cast<int>(lc.labels()[k]) == expected.labels[k]);

        std::size_t total = 0;
        for (std::size_t a : lc.areas())
            total += a;
        REQUIRE(total == oracle::count(g));
    }
}

TEST_CASE("remove_small_components", "[morphology][noise]") {
    SECTION("drops specks below the limit") {
        BinaryMask m(10, 10);
        m.set(0, 0, true);
        for (std::size_t y = 5; y < 10; ++y)
            for (std::size_t x = 5; x < 10; ++x)
                m.set(x, y, true);
        const BinaryMask out = remove_small_components(label_components(m), 2);
        CHECK_FALSE(out(0, 0));
        CHECK(count_foreground(out) == 25);
    }
    SECTION("keeps objects exactly at the limit") {
        const BinaryMask m = from_rows({"##..", "..#."});
        CHECK(count_foreground(remove_small_components(label_components(m), 3)) == 3);
        CHECK(count_foreground(remove_small_components(label_components(m), 4)) == 0);
    }
    SECTION("min_area 0 and 1 keep everything") {
        const BinaryMask m = from_rows({"#.#", "...", "#.#"});
        CHECK(remove_small_components(label_components(m), 0) == m);
        CHECK(remove_small_components(label_components(m), 1) == m);
    }
}

TEST_CASE("remove_small_components properties", "[morphology][noise][property]") {
    std::mt19937 rng(21);
    std::uniform_int_distribution<std::size_t> limit(0, 40);
    for (int i = 0; i < 300; ++i) {
        const BinaryMask m = to_mask(oracle::random_grid(rng));
        const std::size_t a = limit(rng), b = limit(rng);
        const BinaryMask once = remove_small_components(label_components(m), a);
        REQUIRE(subset(once, m));
        REQUIRE(remove_small_components(label_components(once), a) == once);
        const std::size_t lo = std::min(a, b), hi = std::max(a, b);
        REQUIRE(subset(remove_small_components(label_components(m), hi),
                       remove_small_components(label_components(m), lo)));
        for (std::size_t area : label_components(once).areas())
            REQUIRE(area >= a);
    }
}

TEST_CASE("zhang_suen matches the textbook sweep", "[morphology][thinning][property]") {
    std::mt19937 rng(22);
    for (int i = 0; i < 1000; ++i) {
        const oracle::Grid g = oracle::random_grid(rng);
        REQUIRE(to_grid(zhang_suen(to_mask(g))) == oracle::zhang_suen(g));
    }
}

TEST_CASE("thin properties", "[morphology][thinning][property]") {
    std::mt19937 rng(23);
    for (int i = 0; i < 1000; ++i) {
        const BinaryMask m = to_mask(oracle::random_grid(rng));
        const BinaryMask s = thin(m);
        REQUIRE(subset(s, m));
        REQUIRE(thin(s) == s);
        REQUIRE_FALSE(oracle::has_2x2_block(to_grid(s)));
    }
}

TEST_CASE("thin examples", "[morphology][thinning]") {
    SECTION("3x3 block keeps its centre") {
        const BinaryMask s = thin(from_rows({"###", "###", "###"}));
        CHECK(count_foreground(s) == 1);
        CHECK(s(1, 1));
    }
    SECTION("one-pixel line is already thin") {
        const BinaryMask line = filled_rect_mask(10, 1, 0, 0, 10, 1);
        CHECK(thin(line) == line);
    }
    SECTION("empty stays empty") {
        CHECK(count_foreground(thin(BinaryMask(5, 5))) == 0);
    }
    SECTION("300x150 rectangle") {
        const BinaryMask rect = filled_rect_mask(400, 230, 50, 40, 300, 150);
        CHECK(count_foreground(rect) == 45000);
        const BinaryMask s = thin(rect);
        CHECK(count_foreground(s) == 150);
        CHECK(s == zhang_suen(rect));
    }
    SECTION("thick plus and T junctions") {
        BinaryMask plus(31, 31), tee(31, 31);
        for (std::size_t a = 0; a < 31; ++a)
            for (std::size_t b = 13; b < 18; ++b) {
                plus.set(a, b, true);
                plus.set(b, a, true);
                tee.set(a, b, true);
                if (a < 15)
                    tee.set(b, a, true);
            }
        for (const BinaryMask* m : {&plus, &tee}) {
            const BinaryMask s = thin(*m);
            CHECK(s == zhang_suen(*m));
            CHECK(label_components(s).count() == 1);
            CHECK(count_branch_points(s) == 1);
        }
    }
}

TEST_CASE("horizontal bars thin to a centre line", "[morphology][thinning]") {
    for (std::size_t k : {1u, 3u, 5u}) {
        for (std::size_t len : {20u, 50u}) {
            CAPTURE(k, len);
            const BinaryMask bar = filled_rect_mask(len + 10, k + 10, 5, 5, len, k);
            const BinaryMask s = thin(bar);
            const std::size_t n = count_foreground(s);
            CHECK(to_grid(s) == oracle::zhang_suen(to_grid(bar)));
            CHECK(n >= len - k);
            CHECK(n <= len);
            CHECK(label_components(s).count() == 1);
        }
    }
    // Frozen from the textbook sweep.
    CHECK(count_foreground(thin(filled_rect_mask(30, 11, 5, 5, 20, 1))) == 20);
    CHECK(count_foreground(thin(filled_rect_mask(30, 13, 5, 5, 20, 3))) == 17);
    CHECK(count_foreground(thin(filled_rect_mask(60, 15, 5, 5, 50, 5))) == 45);
}

namespace {

// True when every component of `mask` keeps at least one pixel in `skeleton`.
bool every_component_survives(const BinaryMask& mask, const BinaryMask& skeleton) {
    const LabeledComponents lc = label_components(mask);
    std::vector<bool> seen(lc.count() + 1, false);
    for (std::size_t i = 0; i < skeleton.size(); ++i)
        if (skeleton.at(i))
            seen[lc.labels()[i]] = true;
    return std::all_of(seen.begin() + 1, seen.end(), [](bool b) { return b; });
}

} // namespace

TEST_CASE("thinning preserves component count on shapes that survive it", "[morphology][thinning]") {
    std::mt19937 rng(24);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        oracle::Grid g(64, 64);
        const int shapes = std::uniform_int_distribution<int>(1, 4)(rng);
        for (int s = 0; s < shapes; ++s) {
            // Disjoint disks and bars in separate quadrants.
            const int qx = (s % 2) * 32, qy = (s / 2) * 32;
            const int r = std::uniform_int_distribution<int>(2, 12)(rng);
            const bool disk = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
            const double c = std::uniform_int_distribution<int>(0, 1)(rng) ? 16.0 : 16.5;
            for (int y = 0; y < 32; ++y)
                for (int x = 0; x < 32; ++x) {
                    const bool in = disk ? oracle::disk_contains(c, c, r, x, y)
                                         : std::abs(x - 16) <= r && std::abs(y - 16) <= r / 3;
                    if (in)
                        g.put(qx + x, qy + y, 1);
                }
        }
        const BinaryMask m = to_mask(g);
        const BinaryMask s = thin(m);
        REQUIRE(to_grid(s) == oracle::zhang_suen(g));
        if (!every_component_survives(m, s))
            continue;
        ++checked;
        REQUIRE(label_components(s).count() == label_components(m).count());
    }
    CHECK(checked > 100);
}

TEST_CASE("symmetric even-diameter disks vanish under Zhang-Suen", "[morphology][thinning]") {
    // Centred on a pixel corner the disk is 4-fold symmetric with no middle
    // pixel, and the two subiterations erode it away completely.
    for (int r : {1, 3, 8, 12}) {
        oracle::Grid g(32, 32);
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x)
                g.put(x, y, oracle::disk_contains(16, 16, r, x, y) ? 1 : 0);
        CHECK(count_foreground(thin(to_mask(g))) == 0);
        CHECK(oracle::count(oracle::zhang_suen(g)) == 0);
    }
}

TEST_CASE("count_branch_points", "[morphology][thinning]") {
    CHECK(count_branch_points(from_rows({"#####"})) == 0);
    CHECK(count_branch_points(from_rows({"#.#.#", ".###.", "..#..", "..#.."})) >= 1);
    CHECK(count_branch_points(from_rows({".#.", "###", ".#."})) == 1);
    CHECK(count_branch_points(BinaryMask(3, 3)) == 0);
}
