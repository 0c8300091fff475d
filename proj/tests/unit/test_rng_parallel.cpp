#include "eqpide/parallel.hpp"
#include "eqpide/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

using namespace eqpide;

TEST_SUITE("rng") {

// Known-answer vectors of the Random123 reference implementation.
TEST_CASE("Philox4x32-10 known answers") {
    const auto a = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
    CHECK(a == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    const auto b = Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                        {0xffffffffu, 0xffffffffu});
    CHECK(b == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
}

TEST_CASE("draws are pure functions of their coordinates") {
    const PathStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    CHECK(a.normal(3) == b.normal(3));
    CHECK(a.normal(3) != c.normal(3));
    CHECK(a.normal(3) != d.normal(3));
    CHECK(a.uniforms(3, 0)[0] != a.uniforms(3, 1)[0]);
}

TEST_CASE("normal and uniform moments") {
    const PathStream s(1, 0);
    const std::size_t n = 200000;
    double m = 0.0, m2 = 0.0, u = 0.0;
    bool open_interval = true;
    for (std::uint32_t k = 0; k < n; ++k) {
        const double z = s.normal(k);
        m += z;
        m2 += z * z;
        const double v = s.uniforms(k, 5)[0];
        open_interval = open_interval && v > 0.0 && v < 1.0;
        u += v;
    }
    CHECK(open_interval);
    CHECK(std::abs(m / n) < 5.0 / std::sqrt(double(n)));
    CHECK(std::abs(m2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(u / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("Poisson mean") {
    const PathStream s(9, 3);
    const double mean = 0.3;
    const std::size_t n = 100000;
    double sum = 0.0;
    for (std::uint32_t k = 0; k < n; ++k) sum += s.poisson(k, 0, mean);
    CHECK(std::abs(sum / n - mean) < 5.0 * std::sqrt(mean / n));
    CHECK(s.poisson(0, 0, 0.0) == 0u);
}

}

TEST_SUITE("parallel") {

TEST_CASE("parallel_for covers every index once") {
    for (std::size_t workers : {1u, 3u, 8u}) {
        set_worker_count(workers);
        CHECK(worker_count() == workers);
        std::vector<int> hits(1001, 0);
        parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) ++hits[i];
        });
        CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1001);
        CHECK(*std::min_element(hits.begin(), hits.end()) == 1);
    }
    set_worker_count(0);
}

TEST_CASE("exceptions propagate to the caller") {
    set_worker_count(4);
    CHECK_THROWS_AS(parallel_for(100, [](std::size_t b, std::size_t) {
                        if (b > 0) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
    set_worker_count(0);
}

TEST_CASE("empty range is a no-op") {
    std::atomic<int> calls{0};
    parallel_for(0, [&](std::size_t, std::size_t) { ++calls; });
    CHECK(calls == 0);
}

}
