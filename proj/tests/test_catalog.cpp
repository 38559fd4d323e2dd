#include "flarecast/catalog.hpp"
#include "flarecast/errors.hpp"
#include "support/builders.hpp"

#include <doctest.h>

#include <numeric>
#include <sstream>

using namespace flarecast;
using namespace flarecast::catalog;
using flarecast::testing::at;
using flarecast::testing::flare;

namespace {

const char* kHeader = "event_id,start_time,peak_time,end_time,peak_flux,class\n";

ParseResult parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_catalog(in);
}

} // namespace

TEST_CASE("class_of_flux follows the half-open decade bands") {
    CHECK(class_of_flux(5.0e-6) == FlareClass::C);
    CHECK(class_of_flux(1.0e-5) == FlareClass::M);
    CHECK(class_of_flux(2.628e-3) == FlareClass::X);
    CHECK(class_of_flux(2.071e-8) == FlareClass::A);
    CHECK(class_of_flux(1e-8) == FlareClass::A);
    CHECK(class_of_flux(9.999e-8) == FlareClass::A);
    CHECK(class_of_flux(1e-7) == FlareClass::B);
    CHECK(class_of_flux(1e-6) == FlareClass::C);
    CHECK(class_of_flux(1e-4) == FlareClass::X);
    CHECK_THROWS_AS(class_of_flux(9.9e-9), DomainError);
    CHECK_THROWS_AS(class_of_flux(std::nan("")), DomainError);
}

TEST_CASE("class ordinals and letters round trip") {
    for (int k = 1; k <= 5; ++k) {
        const FlareClass c = class_from_ordinal(k);
        CHECK(ordinal(c) == k);
        CHECK(class_from_letter(letter(c)) == c);
    }
    CHECK(std::string("ABCMX") == std::string{letter(FlareClass::A), letter(FlareClass::B), letter(FlareClass::C),
                                              letter(FlareClass::M), letter(FlareClass::X)});
    CHECK_FALSE(class_from_letter('Q').has_value());
    CHECK(is_large(FlareClass::M));
    CHECK(is_large(FlareClass::X));
    CHECK_FALSE(is_large(FlareClass::C));
}

TEST_CASE("parse_catalog reads valid rows sorted by peak time") {
    const auto r = parse_text(std::string(kHeader) +
                              "b,2011-02-15T01:44:00Z,2011-02-15T01:56:00Z,2011-02-15T02:06:00Z,2.2e-3,X\n"
                              "a,2011-02-14T17:20:00Z,2011-02-14T17:26:00Z,2011-02-14T17:32:00Z,2.2e-5,M\n");
    REQUIRE(r.catalog.size() == 2);
    CHECK(r.rejections.empty());
    CHECK(r.catalog.events()[0].event_id == "a");
    CHECK(r.catalog.events()[1].flare_class == FlareClass::X);
    CHECK(r.catalog.events()[1].peak_flux == 2.2e-3);
}

TEST_CASE("a missing required column is a schema error naming it") {
    std::istringstream in("event_id,start_time,peak_time,end_time,class\nx,2011-01-01T00:00Z,2011-01-01T00:01Z,"
                          "2011-01-01T00:02Z,C\n");
    try {
        parse_catalog(in);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.column() == "peak_flux");
        CHECK(std::string(e.what()).find("peak_flux") != std::string::npos);
    }
}

TEST_CASE("header-only and empty input raise EmptyCatalogError") {
    CHECK_THROWS_AS(parse_text(kHeader), EmptyCatalogError);
    CHECK_THROWS_AS(parse_text(""), EmptyCatalogError);
}

TEST_CASE("invalid rows are quarantined with their line numbers") {
    const auto r = parse_text(std::string(kHeader) +
                              "ok1,2012-03-07T00:02:00Z,2012-03-07T00:24:00Z,2012-03-07T00:40:00Z,5.4e-4,X\n"
                              "backwards,2012-03-07T05:00:00Z,2012-03-07T04:30:00Z,2012-03-07T04:00:00Z,3e-6,C\n"
                              "badflux,2012-03-07T06:00:00Z,2012-03-07T06:05:00Z,2012-03-07T06:10:00Z,abc,C\n"
                              "badtime,2012-13-07T06:00:00Z,2012-03-07T06:05:00Z,2012-03-07T06:10:00Z,3e-6,C\n"
                              "mismatch,2012-03-07T07:00:00Z,2012-03-07T07:05:00Z,2012-03-07T07:10:00Z,3e-6,M\n"
                              "subA,2012-03-07T08:00:00Z,2012-03-07T08:05:00Z,2012-03-07T08:10:00Z,5e-9,A\n"
                              "short,2012-03-07T09:00:00Z\n"
                              "ok1,2012-03-07T10:00:00Z,2012-03-07T10:05:00Z,2012-03-07T10:10:00Z,3e-6,C\n"
                              "ok2,2012-03-07T11:00:00Z,2012-03-07T11:05:00Z,2012-03-07T11:10:00Z,3e-6,C\n");
    CHECK(r.catalog.size() == 2);
    REQUIRE(r.rejections.size() == 7);
    std::vector<std::size_t> lines;
    for (const auto& rej : r.rejections) {
        lines.push_back(rej.line);
        CHECK_FALSE(rej.reason.empty());
    }
    CHECK(lines == std::vector<std::size_t>{3, 4, 5, 6, 7, 8, 9});
    CHECK(r.rejections[0].raw.rfind("backwards", 0) == 0);
    const auto j = to_json(r.rejections);
    CHECK(j.size() == 7);
}

TEST_CASE("every accepted event's class matches its flux") {
    std::mt19937_64 rng(11);
    std::ostringstream text;
    text << kHeader;
    const char letters[] = "ABCMX";
    for (int i = 0; i < 300; ++i) {
        const double flux = std::pow(10.0, std::uniform_real_distribution<double>(-8.2, -2.6)(rng));
        const char cls = letters[rng() % 5];
        text << "e" << i << ",2015-01-01T00:00:00Z,2015-01-01T00:05:00Z,2015-01-01T00:10:00Z," << flux << ',' << cls
             << '\n';
    }
    std::istringstream in(text.str());
    const auto r = parse_catalog(in);
    CHECK(r.catalog.size() + r.rejections.size() == 300);
    for (const auto& e : r.catalog.events()) {
        CHECK(class_of_flux(e.peak_flux) == e.flare_class);
    }
}

TEST_CASE("canonical output parses back to the same catalog") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto cat = flarecast::testing::random_catalog(rng, 1 + rng() % 60);
        std::vector<FlareEvent> events = cat.events();
        if (trial % 2 == 0) {
            events.front().total_flux = 1.234e-3;
            events.front().multiple_id = "m7";
        }
        cat = FlareCatalog(events);
        std::stringstream io;
        write_catalog(io, cat);
        const auto back = parse_catalog(io);
        CHECK(back.rejections.empty());
        CHECK(back.catalog == cat);
    }
}

TEST_CASE("FlareCatalog rejects duplicate ids and inverted times") {
    const auto e = flare("dup", at("2013-05-13T02:17:00Z"), 1.7e-4);
    CHECK_THROWS_AS(FlareCatalog({e, e}), DomainError);
    auto bad = e;
    bad.end_time = bad.start_time - std::chrono::seconds(1);
    CHECK_THROWS_AS(FlareCatalog({bad}), DomainError);
}

TEST_CASE("single-event summary") {
    const FlareCatalog cat({flare("one", at("2014-05-02T12:00:00Z"), 3e-6)});
    const auto s = summarize(cat);
    CHECK(s.class_counts == std::array<std::size_t, 5>{0, 0, 1, 0, 0});
    CHECK(s.total_days == 1);
    CHECK(s.zero_flare_days == 0);
    CHECK(s.mean_daily_count == 1.0);
    CHECK(s.max_daily_count == 1);
    CHECK(format_date(s.max_day) == "2014-05-02");
    CHECK(s.daily_count_histogram == std::map<std::size_t, std::size_t>{{1, 1}});
}

TEST_CASE("summary counts zero-flare days over the inclusive span") {
    const FlareCatalog cat({flare("a", at("2020-01-01T01:00:00Z"), 2e-7), flare("b", at("2020-01-01T05:00:00Z"), 2e-5),
                            flare("c", at("2020-01-04T05:00:00Z"), 2e-4), flare("d", at("2020-01-04T09:00:00Z"), 3e-8),
                            flare("e", at("2020-01-04T10:00:00Z"), 3e-8)});
    const auto s = summarize(cat);
    CHECK(s.total_days == 4);
    CHECK(s.zero_flare_days == 2);
    CHECK(s.mean_daily_count == doctest::Approx(5.0 / 4.0));
    CHECK(s.max_daily_count == 3);
    CHECK(format_date(s.max_day) == "2020-01-04");
    CHECK(s.daily_count_histogram == std::map<std::size_t, std::size_t>{{0, 2}, {2, 1}, {3, 1}});
    CHECK(std::accumulate(s.class_counts.begin(), s.class_counts.end(), std::size_t{0}) == cat.size());
    const auto j = to_json(s);
    CHECK(j["zero_flare_days"] == 2);
    CHECK_THROWS_AS(summarize(FlareCatalog{}), EmptyCatalogError);
}

TEST_CASE("class counts always sum to the event count") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const auto cat = flarecast::testing::random_catalog(rng, 1 + rng() % 400, 0.5 + (rng() % 100) / 4.0);
        const auto s = summarize(cat);
        CHECK(std::accumulate(s.class_counts.begin(), s.class_counts.end(), std::size_t{0}) == cat.size());
        std::size_t days = 0;
        std::size_t flares = 0;
        for (const auto& [count, n_days] : s.daily_count_histogram) {
            days += n_days;
            flares += count * n_days;
        }
        CHECK(days == s.total_days);
        CHECK(flares == cat.size());
        CHECK(s.daily_count_histogram.count(0) ? s.daily_count_histogram.at(0) == s.zero_flare_days
                                               : s.zero_flare_days == 0);
    }
}

TEST_CASE("time parsing accepts the documented variants") {
    CHECK(format_iso8601(at("2014-05-02T12:34:56Z")) == "2014-05-02T12:34:56Z");
    CHECK(format_iso8601(*parse_iso8601("2014-05-02 12:34")) == "2014-05-02T12:34:00Z");
    CHECK(format_iso8601(*parse_iso8601("2014-05-02T12:34:56.789")) == "2014-05-02T12:34:56Z");
    CHECK_FALSE(parse_iso8601("2014-02-30T00:00:00Z").has_value());
    CHECK_FALSE(parse_iso8601("yesterday").has_value());
}
