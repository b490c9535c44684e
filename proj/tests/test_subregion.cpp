#include "ipdnn/subregion.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace ipdnn;

TEST_CASE("threshold_mask on a uniform map activates everything")
{
    // sigma of the bottom 30% is 0, so the threshold equals the common value
    PermittivityMap m(6);
    m.values.array() += cplx(0.7, 0.0); // Re = 1.7 everywhere
    const BinaryMask b = threshold_mask(m);
    CHECK(b.count() == 36);
}

TEST_CASE("threshold_mask isolates a single outlier")
{
    // a strictly uniform background is degenerate (sigma = 0 puts the
    // threshold at the background itself and the >= test passes everywhere),
    // so the background carries a small spread: bottom 30% (8 cells) ramp
    // 1.00..1.07, the rest sit at 1.08, mu + 3 sigma ~ 1.104
    PermittivityMap m(5);
    m.values.setConstant(cplx(1.08, 0.0));
    for (int k = 0; k < 8; ++k) m.values(k / 5, k % 5) = cplx(1.0 + 0.01 * k, 0.0);
    m.values(2, 3) = cplx(4.0, 0.0);
    const BinaryMask b = threshold_mask(m);
    CHECK(b.count() == 1);
    CHECK(b.bits(2, 3));
}

TEST_CASE("threshold_mask statistics use the smallest 30 percent")
{
    // 4x4: bottom ceil(0.3*16) = 5 values. Put spread into the bottom so
    // sigma > 0 and mid-level cells stay below mu + 3 sigma.
    PermittivityMap m(4);
    double lows[5] = {1.00, 1.02, 1.04, 1.06, 1.08};
    for (int k = 0; k < 5; ++k) m.values(k / 4, k % 4) = cplx(lows[k], 0.0);
    for (int k = 5; k < 15; ++k) m.values(k / 4, k % 4) = cplx(1.11, 0.0);
    m.values(3, 3) = cplx(3.0, 0.0);
    // mu = 1.04, sigma = sqrt(0.0008) ~ 0.0283 -> thr ~ 1.1249
    const BinaryMask b = threshold_mask(m);
    CHECK(b.count() == 1);
    CHECK(b.bits(3, 3));
}

TEST_CASE("stability tracker")
{
    SECTION("warm-up is never stable")
    {
        StabilityTracker t;
        t.window = 5;
        for (int k = 0; k < 5; ++k) CHECK_FALSE(stability_update(t, 100));
    }

    SECTION("settled count becomes stable at a full window")
    {
        StabilityTracker t;
        t.window = 5;
        for (int k = 0; k < 5; ++k) stability_update(t, 100);
        CHECK(stability_update(t, 100)); // sigma 0, |100-100| <= 0 (closed)
    }

    SECTION("jump outside one sigma is unstable")
    {
        StabilityTracker t;
        t.window = 5;
        int vals[5] = {100, 104, 96, 102, 98};
        for (int v : vals) stability_update(t, v);
        // mu = 100, sigma ~ 2.83
        CHECK(stability_update(t, 101));
        CHECK_FALSE(stability_update(t, 120));
    }

    SECTION("window slides")
    {
        StabilityTracker t;
        t.window = 3;
        for (int v : {10, 20, 30, 40}) stability_update(t, v);
        CHECK(t.history.size() == 3);
        CHECK(t.history.front() == 20);
    }
}

TEST_CASE("update_mask semantics")
{
    BinaryMask b0(4), bk(4), cur(4);
    b0.bits(0, 0) = true;
    b0.bits(1, 1) = true;
    bk.bits(1, 1) = true;
    bk.bits(2, 2) = true;
    cur.bits(3, 3) = true;

    SECTION("first update unions with the initial mask")
    {
        const BinaryMask u = update_mask(cur, bk, b0, true);
        CHECK(u.count() == 3);
        CHECK(u.bits(0, 0));
        CHECK(u.bits(1, 1));
        CHECK(u.bits(2, 2));
        // superset of b0 by construction
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (b0.bits(i, j)) CHECK(u.bits(i, j));
    }

    SECTION("later updates replace outright")
    {
        const BinaryMask u = update_mask(cur, bk, b0, false);
        CHECK(u == bk);
    }

    SECTION("empty candidate keeps the current mask")
    {
        bool kept = false;
        const BinaryMask u = update_mask(cur, BinaryMask(4), b0, false, &kept);
        CHECK(kept);
        CHECK(u == cur);
    }

    SECTION("empty first union throws")
    {
        CHECK_THROWS_AS(update_mask(cur, BinaryMask(4), BinaryMask(4), true),
                        std::invalid_argument);
    }
}

TEST_CASE("schedule boundaries")
{
    CHECK(schedule(1) == ScheduleAction::none);
    CHECK(schedule(99) == ScheduleAction::none);
    CHECK(schedule(100) == ScheduleAction::threshold_only);
    CHECK(schedule(101) == ScheduleAction::none);
    CHECK(schedule(400) == ScheduleAction::threshold_only);
    CHECK(schedule(499) == ScheduleAction::none);
    CHECK(schedule(500) == ScheduleAction::threshold_and_maybe_update);
    CHECK(schedule(600) == ScheduleAction::threshold_and_maybe_update);
    CHECK(schedule(650) == ScheduleAction::none);
    // never an update before min_update_iter, thresholds only at multiples
    for (int k = 1; k < 500; ++k)
        CHECK(schedule(k) != ScheduleAction::threshold_and_maybe_update);
    for (int k = 1; k <= 2000; ++k)
        if (k % 100 != 0) CHECK(schedule(k) == ScheduleAction::none);
}

TEST_CASE("threshold output is deterministic and shape-preserving")
{
    PermittivityMap m(7);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) m.values(i, j) = cplx(1.0 + 0.01 * ((i * 7 + j) % 5), 0.0);
    const BinaryMask a = threshold_mask(m);
    const BinaryMask b = threshold_mask(m);
    CHECK(a == b);
    CHECK(a.n_side() == 7);
}
