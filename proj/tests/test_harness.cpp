#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "test_support.hpp"
#include "wbis/error.hpp"
#include "wbis/harness.hpp"
#include "wbis/metrics.hpp"
#include "wbis/rng.hpp"

using namespace wbis;

TEST_CASE("metric examples")
{
    const std::vector<double> a{1.1, 0.9};
    CHECK(nmse(a, 1.0, 100) == doctest::Approx(1.0).epsilon(1e-12));
    const std::vector<double> b{3.0, 5.0};
    CHECK(rmse(b, 4.0) == 1.0);
    const std::vector<double> exact{2.0, 2.0, 2.0};
    CHECK(rmse(exact, 2.0) == 0.0);
    CHECK(nmse(exact, 2.0, 100) == 0.0);

    const std::vector<double> shifted{2.5, 2.5, 2.5};
    const auto bv = bias_variance(shifted, 2.0);
    CHECK(bv.bias_squared == 0.25);
    CHECK(bv.variance == 0.0);

    const std::vector<double> empty;
    CHECK_THROWS_AS(nmse(empty, 1.0, 10), domain_error);
    CHECK_THROWS_AS(rmse(empty, 1.0), domain_error);
    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(bias_variance(one, 1.0), domain_error);
}

TEST_CASE("metric identities")
{
    Philox4x32 g(1, 1);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> est(2 + t);
        for (auto& e : est) e = 1.0 + 0.1 * (g.uniform() - 0.3);
        const std::size_t n = 1000 + 17 * t;
        const auto s = summarize_metrics(est, 1.0, n);
        CHECK(s.rmse * s.rmse == doctest::Approx(s.bias_squared + s.variance).epsilon(1e-12));
        CHECK(s.nmse == doctest::Approx(double(n) * s.rmse * s.rmse).epsilon(1e-12));
        CHECK(s.repeats == est.size());
        CHECK(s.n == n);
        CHECK_FALSE(s.mean_threshold_r.has_value());
    }
    const std::vector<double> est{1.0, 2.0};
    const std::vector<double> r{10.0, 30.0};
    CHECK(summarize_metrics(est, 1.5, 4, r).mean_threshold_r == 20.0);
}

TEST_CASE("config parsing")
{
    const auto c = parse_config(R"({"problem": "mixture", "method": "wbis", "n": 10000, "repeats": 5,
                                   "significance": 0.05, "master_seed": 3})");
    CHECK(c.method == Method::WBIS);
    CHECK(c.c_constant == default_c_constant);
    CHECK(c.master_seed == 3);

    const auto round = parse_config(dump_config(c));
    CHECK(dump_config(round) == dump_config(c));

    auto msg = [](std::string_view text) {
        try {
            parse_config(text);
        } catch (const config_error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(msg(R"({"problem": "mixture", "method": "IS", "n": 100, "repeats": 1, "bogus": 1})").find("bogus") !=
          std::string::npos);
    CHECK(msg(R"({"problem": "mixture", "method": "IS", "n": 100, "repeats": 1, "mixture": {"thetta": 1}})")
              .find("thetta") != std::string::npos);
    CHECK(msg(R"({"problem": "mixture", "method": "DIS", "n": 100, "repeats": 1})").find("alpha") !=
          std::string::npos);
    CHECK(msg(R"({"problem": "mixture", "method": "IS", "n": 100, "repeats": 1, "alpha": 0.1})").find("alpha") !=
          std::string::npos);
    CHECK(msg(R"({"problem": "mixture", "method": "WBIS", "n": 10000, "repeats": 1})").find("significance") !=
          std::string::npos);
    CHECK(msg(R"({"problem": "mixture", "method": "WBIS", "n": 10000, "repeats": 1, "significance": 0.1})")
              .find("significance") != std::string::npos);
    CHECK(msg(R"({"problem": "mixture", "method": "MC", "n": 100, "repeats": 1, "c_constant": 1})")
              .find("c_constant") != std::string::npos);
    CHECK(msg(R"({"problem": "mixture", "method": "MC", "n": 0, "repeats": 1})").find("'n'") != std::string::npos);
    CHECK(msg(R"({"problem": "mixture", "method": "MC", "repeats": 1})").find("'n'") != std::string::npos);
    CHECK(msg(R"({"problem": "bond", "method": "MC", "n": 10, "repeats": 1})") != "");
    CHECK(msg(R"({"problem": "mixture", "method": "WBIS", "n": 500, "repeats": 1, "significance": 0.05})") != "");
    CHECK(msg("not json") != "");
}

TEST_CASE("stream ids")
{
    CHECK(repeat_stream_id(Method::MC, 0) != repeat_stream_id(Method::IS, 0));
    CHECK(repeat_stream_id(Method::WBIS, 5) == ((4ULL << 48) | 5));
    CHECK(repeat_stream_id(Method::WBIS, 1u << 30) < stream_ids::reserved_stream_base);
}

TEST_CASE("run_experiment on the mixture problem")
{
    ExperimentConfig c;
    c.method = Method::WBIS;
    c.n = 2000;
    c.repeats = 1;
    c.significance = 0.05;
    c.c_constant = 0.5;
    c.master_seed = 8;
    const auto single = run_experiment(c);
    REQUIRE(single.size() == 1);
    REQUIRE(single[0].threshold_r.has_value());
    const auto s = summarize_records(single, 1.0, c.n);
    const double err = single[0].estimate - 1.0;
    CHECK(s.nmse == doctest::Approx(double(c.n) * err * err).epsilon(1e-12));
    CHECK(s.variance == 0.0);

    c.repeats = 7;
    const auto serial = run_experiment(c, 1);
    const auto again = run_experiment(c, 1);
    const auto parallel = run_experiment(c, 3);
    REQUIRE(serial.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(serial[i].run_id == i);
        CHECK(serial[i].seed == repeat_stream_id(Method::WBIS, i));
        CHECK(serial[i].estimate == again[i].estimate);
        CHECK(serial[i].estimate == parallel[i].estimate);
        CHECK(serial[i].threshold_r == parallel[i].threshold_r);
    }
    CHECK(serial[0].estimate == single[0].estimate);

    std::ostringstream a, b;
    write_records_csv(a, serial, false);
    write_records_csv(b, parallel, false);
    CHECK(a.str() == b.str());

    for (Method m : {Method::MC, Method::IS, Method::DIS}) {
        ExperimentConfig o;
        o.method = m;
        o.n = 500;
        o.repeats = 3;
        if (m == Method::DIS) o.alpha = 0.2;
        const auto recs = run_experiment(o);
        for (const auto& r : recs) {
            CHECK(r.estimate > 0.0);
            CHECK_FALSE(r.threshold_r.has_value());
        }
    }
}

TEST_CASE("records CSV round trip")
{
    std::vector<RunRecord> recs{{0, 11, 0.1 + 0.2, 123.456789, 1.5}, {1, 12, 1.0 / 3.0, std::nullopt, 0.25}};
    std::ostringstream out;
    write_records_csv(out, recs);
    const std::string text = out.str();
    CHECK(text.rfind(std::string(records_csv_header) + "\n", 0) == 0);
    std::istringstream in(text);
    const auto back = read_records_csv(in);
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[i].run_id == recs[i].run_id);
        CHECK(back[i].seed == recs[i].seed);
        CHECK(back[i].estimate == recs[i].estimate);
        CHECK(back[i].threshold_r == recs[i].threshold_r);
        CHECK(back[i].elapsed_ms == recs[i].elapsed_ms);
    }
    std::ostringstream untimed;
    write_records_csv(untimed, recs, false);
    CHECK(untimed.str().find("1.5") == std::string::npos);
}

TEST_CASE("summary json and references")
{
    ExperimentConfig c;
    c.method = Method::IS;
    c.n = 100;
    c.repeats = 2;
    const std::vector<double> est{0.9, 1.2};
    const auto m = summarize_metrics(est, 1.0, 100);
    const auto j = nlohmann::json::parse(summary_json(c, m, 1.0));
    CHECK(j["reference"] == 1.0);
    CHECK(j["metrics"]["nmse"].get<double>() == doctest::Approx(m.nmse));
    CHECK(j["metrics"]["mean_threshold_r"].is_null());
    CHECK(j["config"]["method"] == "IS");

    CHECK(config_reference(c) == 1.0);
    c.problem = Problem::credit;
    CHECK_THROWS_AS(config_reference(c), config_error);
    c.reference_value = 3e-6;
    CHECK(config_reference(c) == 3e-6);
    CHECK(parse_problem("credit") == Problem::credit);
    CHECK_THROWS_AS(parse_problem("x"), config_error);
}
