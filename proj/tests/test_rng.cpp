#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "wbis/harness.hpp"
#include "wbis/rng.hpp"

using wbis::Philox4x32;

TEST_CASE("philox4x32-10 known-answer vectors")
{
    using B = Philox4x32::block_type;
    using K = Philox4x32::key_type;
    CHECK(Philox4x32::philox_block(B{0, 0, 0, 0}, K{0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::philox_block(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::philox_block(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("engine output is the block sequence of the stream counter")
{
    Philox4x32 g(0x0123456789abcdefULL, 7);
    const auto first = Philox4x32::philox_block({0, 0, 7, 0}, {0x89abcdef, 0x01234567});
    const auto second = Philox4x32::philox_block({1, 0, 7, 0}, {0x89abcdef, 0x01234567});
    for (auto v : first) CHECK(g() == v);
    for (auto v : second) CHECK(g() == v);
}

TEST_CASE("uniform stays strictly inside (0, 1)")
{
    Philox4x32 g(1, 2);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = g.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("standard normal draws have unit moments")
{
    Philox4x32 g(3, 4);
    wbis::StandardNormal normal;
    const int n = 400000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = normal(g);
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    CHECK(std::abs(s1 / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(s2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(s4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("repeat streams are distinct and uncorrelated")
{
    const auto s0 = wbis::repeat_stream_id(wbis::Method::IS, 0);
    const auto s1 = wbis::repeat_stream_id(wbis::Method::IS, 1);
    const auto t0 = wbis::repeat_stream_id(wbis::Method::WBIS, 0);
    CHECK(s0 != s1);
    CHECK(s0 != t0);
    CHECK(s0 < wbis::stream_ids::reserved_stream_base);
    CHECK(wbis::repeat_stream_id(wbis::Method::WBIS, (1ULL << 40)) < wbis::stream_ids::reserved_stream_base);

    // cross-correlation smoke test at a few lags
    Philox4x32 a(99, s0), b(99, s1), c(99, t0);
    const int n = 100000;
    std::vector<double> ua(n), ub(n), uc(n);
    for (int i = 0; i < n; ++i) {
        ua[i] = a.uniform() - 0.5;
        ub[i] = b.uniform() - 0.5;
        uc[i] = c.uniform() - 0.5;
    }
    for (int lag : {0, 1, 7}) {
        double ab = 0.0, ac = 0.0;
        for (int i = 0; i + lag < n; ++i) {
            ab += ua[i] * ub[i + lag];
            ac += ua[i] * uc[i + lag];
        }
        const double scale = (n - lag) / 12.0;
        CHECK(std::abs(ab / scale) < 5.0 / std::sqrt(n));
        CHECK(std::abs(ac / scale) < 5.0 / std::sqrt(n));
    }
}

TEST_CASE("same seed and stream reproduce the same sequence")
{
    Philox4x32 a(42, 5), b(42, 5), c(43, 5);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a();
        CHECK(x == b());
        differs |= x != c();
    }
    CHECK(differs);
}
