#include <doctest.h>

#include <algorithm>
#include <random>

#include "dtv/aggregator.hpp"
#include "support/expect.hpp"

using namespace dtv;
using namespace dtv::testing;

namespace {

const AggregatorConfig kHarmonic{};
const AggregatorConfig kMin{AggregationMethod::Min, 0.5, 1e-6};

double agg(std::vector<double> v, const AggregatorConfig& cfg = kHarmonic) { return aggregate(v, cfg); }

}  // namespace

TEST_CASE("aggregate examples") {
    CHECK(agg({0.7}) == 0.7);
    CHECK(agg({0.7}, kMin) == 0.7);
    CHECK(agg({0.8, 0.4}) == doctest::Approx(2.0 / (1.0 / 0.8 + 1.0 / 0.4)).epsilon(1e-15));
    CHECK(agg({0.8, 0.4}) == doctest::Approx(0.5333).epsilon(1e-4));
    const double clamped = agg({1.0, 0.0});
    CHECK(clamped == doctest::Approx(2.0 / (1.0 + 1e6)).epsilon(1e-12));
    CHECK(classify(clamped, kHarmonic) == Label::Unsupported);
    CHECK(agg({0.8, 0.4}, kMin) == 0.4);
    CHECK(agg({0.0}, kMin) == 1e-6);
}

TEST_CASE("aggregate errors") {
    CHECK(thrown_kind([] { agg({}); }) == ErrorKind::EmptyScores);
    CHECK(thrown_kind([] { agg({1.5}); }) == ErrorKind::OutOfRange);
    CHECK(thrown_kind([] { agg({-0.1}); }) == ErrorKind::OutOfRange);
}

TEST_CASE("classify threshold") {
    CHECK(classify(0.51, kHarmonic) == Label::Supported);
    CHECK(classify(0.5, kHarmonic) == Label::Unsupported);
    CHECK(classify(0.4999, kHarmonic) == Label::Unsupported);
}

TEST_CASE("config validation") {
    CHECK_NOTHROW(kHarmonic.validate());
    CHECK(thrown_kind([] { AggregatorConfig{AggregationMethod::Min, 1.0, 1e-6}.validate(); }) == ErrorKind::InvalidConfig);
    CHECK(thrown_kind([] { AggregatorConfig{AggregationMethod::Min, 0.5, 0.0}.validate(); }) == ErrorKind::InvalidConfig);
    CHECK(thrown_kind([] { AggregatorConfig{AggregationMethod::Min, 0.5, 0.01}.validate(); }) == ErrorKind::InvalidConfig);
    CHECK(parse_aggregation_method(to_string(AggregationMethod::Min)) == AggregationMethod::Min);
}

TEST_CASE("harmonic mean properties on random vectors") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(1e-6, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> v(1 + rng() % 10);
        for (auto& s : v) s = u(rng);
        double inv = 0.0;
        for (double s : v) inv += 1.0 / s;
        const double oracle = static_cast<double>(v.size()) / inv;
        const double got = agg(v);
        CHECK(std::abs(got - oracle) <= 1e-12);
        CHECK(got >= *std::min_element(v.begin(), v.end()));
        CHECK(got <= *std::max_element(v.begin(), v.end()));

        auto shuffled = v;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(std::abs(agg(shuffled) - got) <= 1e-12);

        auto raised = v;
        const std::size_t i = rng() % raised.size();
        raised[i] = std::min(1.0, raised[i] + 0.1);
        CHECK(agg(raised) >= got - 1e-15);
    }
}

TEST_CASE("harmonic mean of equal values is the value") {
    for (double x : {1e-6, 0.1, 0.5, 0.77, 1.0}) {
        for (std::size_t n = 1; n <= 10; ++n) {
            CHECK(agg(std::vector<double>(n, x)) == doctest::Approx(x).epsilon(1e-14));
        }
    }
}
