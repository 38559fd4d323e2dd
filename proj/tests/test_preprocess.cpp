#include "flarecast/errors.hpp"
#include "flarecast/preprocess.hpp"
#include "support/builders.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

using namespace flarecast;
using namespace flarecast::preprocess;
using flarecast::testing::at;
using flarecast::testing::flare;

TEST_CASE("500 bins give 501 edges with exact endpoints") {
    const SmoothingConfig cfg;
    const auto edges = bin_edges(cfg);
    REQUIRE(edges.size() == 501);
    CHECK(edges.front() == 2.071e-8);
    CHECK(edges.back() == 2.628e-3);
    CHECK(std::is_sorted(edges.begin(), edges.end()));
    // log spacing: constant ratio between neighbours
    CHECK(edges[1] / edges[0] == doctest::Approx(edges[400] / edges[399]).epsilon(1e-9));

    SmoothingConfig lin;
    lin.spacing = BinSpacing::linear;
    const auto le = bin_edges(lin);
    CHECK(le[2] - le[1] == doctest::Approx(le[300] - le[299]).epsilon(1e-6));
}

TEST_CASE("bin_index respects half-open bins and the closed last bin") {
    SmoothingConfig cfg;
    cfg.n_bins = 4;
    cfg.spacing = BinSpacing::linear;
    cfg.flux_min = 0.0;
    cfg.flux_max = 4.0;
    const auto edges = bin_edges(cfg);
    CHECK(bin_index(cfg, edges, 0.0) == 0);
    CHECK(bin_index(cfg, edges, 1.0) == 1);
    CHECK(bin_index(cfg, edges, 3.999) == 3);
    CHECK(bin_index(cfg, edges, 4.0) == 3);
    CHECK_THROWS_AS(bin_index(cfg, edges, 4.0001), DomainError);
    CHECK_THROWS_AS(bin_index(cfg, edges, -0.1), DomainError);
}

TEST_CASE("smoothing config validation") {
    SmoothingConfig cfg;
    cfg.n_bins = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.flux_min = cfg.flux_max;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.flux_min = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.spacing = BinSpacing::linear;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("constant fluxes are unchanged by smoothing") {
    const std::vector<double> v(7, 3.3e-6);
    CHECK(smooth_values(v, {}) == v);
}

TEST_CASE("two fluxes sharing a bin become their mean") {
    SmoothingConfig cfg;
    cfg.n_bins = 5;
    const double a = 1.00e-6;
    const double b = 1.05e-6;
    const auto edges = bin_edges(cfg);
    REQUIRE(bin_index(cfg, edges, a) == bin_index(cfg, edges, b));
    const auto out = smooth_values(std::vector<double>{a, 2e-4, b}, cfg);
    CHECK(out[0] == (a + b) / 2.0);
    CHECK(out[2] == (a + b) / 2.0);
    CHECK(out[1] == 2e-4);
}

TEST_CASE("smoothing is idempotent and preserves bins") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        SmoothingConfig cfg;
        cfg.n_bins = 1 + static_cast<int>(rng() % 600);
        cfg.spacing = trial % 3 == 0 ? BinSpacing::linear : BinSpacing::logarithmic;
        const auto cat = flarecast::testing::random_catalog(rng, 1 + rng() % 500);
        std::vector<double> flux;
        for (const auto& e : cat.events()) {
            flux.push_back(e.peak_flux);
        }
        const auto once = smooth_values(flux, cfg);
        const auto twice = smooth_values(once, cfg);
        CHECK(once == twice);
        const auto edges = bin_edges(cfg);
        for (std::size_t i = 0; i < flux.size(); ++i) {
            CHECK(bin_index(cfg, edges, flux[i]) == bin_index(cfg, edges, once[i]));
        }
    }
}

TEST_CASE("smooth_fluxes keeps labels and rejects out-of-domain flux") {
    const catalog::FlareCatalog cat({flare("a", at("2011-01-01T00:00:00Z"), 9.9e-6),
                                     flare("b", at("2011-01-01T01:00:00Z"), 1.0e-5)});
    SmoothingConfig coarse;
    coarse.n_bins = 1;
    const auto out = smooth_fluxes(cat, coarse);
    CHECK(out.events()[0].flare_class == catalog::FlareClass::C);
    CHECK(out.events()[1].flare_class == catalog::FlareClass::M);
    CHECK(out.events()[0].peak_flux == out.events()[1].peak_flux);

    SmoothingConfig narrow;
    narrow.flux_max = 1e-5 * 0.5;
    CHECK_THROWS_AS(smooth_fluxes(cat, narrow), DomainError);
    CHECK(smooth_fluxes(catalog::FlareCatalog{}, {}).empty());
}

TEST_CASE("waiting times are peak to peak with a leading zero") {
    const auto t0 = at("2016-07-23T00:00:00Z");
    const catalog::FlareCatalog cat({flare("a", t0, 1e-6), flare("b", t0 + std::chrono::seconds(100), 1e-6),
                                     flare("c", t0 + std::chrono::seconds(250), 1e-6)});
    const auto s = build_irregular_series(cat);
    REQUIRE(s.size() == 3);
    CHECK(s.entries[0].waiting_time == 0.0);
    CHECK(s.entries[1].waiting_time == 100.0);
    CHECK(s.entries[2].waiting_time == 150.0);

    const auto single = build_irregular_series(catalog::FlareCatalog({flare("z", t0, 1e-6)}));
    REQUIRE(single.size() == 1);
    CHECK(single.entries[0].waiting_time == 0.0);
}

TEST_CASE("min-max scaling") {
    const auto p = fit_minmax(std::vector<double>{2, 4, 10});
    CHECK(p.apply(2) == 0.0);
    CHECK(p.apply(10) == 1.0);
    CHECK(p.apply(18) == 2.0);
    const auto c = fit_minmax(std::vector<double>{5, 5, 5});
    CHECK(apply_minmax(std::vector<double>{5, 5, 7}, c) == std::vector<double>{0, 0, 0});
    CHECK_THROWS_AS(fit_minmax(std::vector<double>{}), DomainError);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(2 + rng() % 100);
        for (auto& x : v) {
            x = std::uniform_real_distribution<double>(-1e3, 1e3)(rng);
        }
        const auto out = apply_minmax(v, fit_minmax(v));
        CHECK(*std::min_element(out.begin(), out.end()) == 0.0);
        CHECK(*std::max_element(out.begin(), out.end()) == 1.0);
    }
}

TEST_CASE("regularize tiles an active day into eight slots") {
    const catalog::FlareCatalog cat({flare("a", at("2014-05-02T01:00:00Z"), 1e-6),
                                     flare("b", at("2014-05-02T02:00:00Z"), 3e-6)});
    const auto s = regularize(cat);
    REQUIRE(s.runs.size() == 1);
    const auto& run = s.runs[0];
    REQUIRE(run.size() == 8);
    CHECK(run.start == at("2014-05-02T00:00:00Z"));
    CHECK(run.max_flux[0] == 3e-6);
    CHECK(run.fill[0] == SlotFill::observed);
    for (std::size_t i = 1; i < 8; ++i) {
        CHECK(run.max_flux[i] == kFloorFlux);
        CHECK(run.fill[i] == SlotFill::floor);
    }
    CHECK(s.active_days() == 1);
}

TEST_CASE("short gaps take the nearer flare's boundary flux") {
    auto a = flare("a", at("2014-05-02T01:00:00Z"), 1e-6);
    a.background_flux = 4e-8;
    auto b = flare("b", at("2014-05-02T10:00:00Z"), 2e-6);
    b.start_time = at("2014-05-02T03:30:00Z");
    b.background_flux = 6e-8;
    const auto s = regularize(catalog::FlareCatalog({a, b}));
    REQUIRE(s.runs.size() == 1);
    const auto& run = s.runs[0];
    // a ends 01:10, b starts 03:30: a 2h20m gap
    CHECK(run.fill[1] == SlotFill::boundary); // [03,06): b is nearer
    CHECK(run.max_flux[1] == 6e-8);
    CHECK(run.fill[2] == SlotFill::boundary); // [06,09)
    CHECK(run.fill[3] == SlotFill::observed); // [09,12)
    CHECK(run.fill[4] == SlotFill::floor);    // after the last flare
}

TEST_CASE("boundary fill never goes below the floor") {
    auto a = flare("a", at("2014-05-02T01:00:00Z"), 1e-6);
    a.background_flux = 1e-9;
    auto b = flare("b", at("2014-05-02T07:00:00Z"), 2e-6);
    b.start_time = at("2014-05-02T03:00:00Z");
    b.background_flux = 1e-9;
    const auto s = regularize(catalog::FlareCatalog({a, b}));
    CHECK(s.runs[0].fill[1] == SlotFill::boundary);
    CHECK(s.runs[0].max_flux[1] == kFloorFlux);
}

TEST_CASE("flare-free days are dropped and split runs") {
    const catalog::FlareCatalog cat({flare("a", at("2014-05-01T22:00:00Z"), 1e-6),
                                     flare("b", at("2014-05-03T01:00:00Z"), 1e-6),
                                     flare("c", at("2014-05-03T04:00:00Z"), 1e-6)});
    const auto s = regularize(cat);
    REQUIRE(s.runs.size() == 2);
    CHECK(s.runs[0].size() == 8);
    CHECK(s.runs[1].size() == 8);
    CHECK(s.runs[1].start == at("2014-05-03T00:00:00Z"));
    CHECK(s.total_size() == 16);
}

TEST_CASE("gaps of at least 21 hours split consecutive days") {
    const catalog::FlareCatalog long_gap({flare("a", at("2014-05-01T01:00:00Z"), 1e-6),
                                          flare("b", at("2014-05-02T23:00:00Z"), 1e-6)});
    const auto s = regularize(long_gap);
    REQUIRE(s.runs.size() == 2);
    CHECK(s.runs[0].size() == 1);  // break right after a's slot
    CHECK(s.runs[1].size() == 15);
    CHECK(s.total_size() == 16);

    const catalog::FlareCatalog short_gap({flare("a", at("2014-05-01T20:00:00Z"), 1e-6),
                                           flare("b", at("2014-05-02T02:00:00Z"), 1e-6)});
    CHECK(regularize(short_gap).runs.size() == 1);
}

TEST_CASE("regularize invariants on random catalogs") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        const auto cat = flarecast::testing::random_catalog(rng, 1 + rng() % 300, 0.3 + (rng() % 200) / 5.0);
        RegularizeConfig cfg;
        const int intervals[] = {1, 2, 3, 4, 6, 8, 12, 24};
        cfg.interval_hours = intervals[rng() % 8];
        const auto s = regularize(cat, cfg);
        const std::size_t per_day = 24 / static_cast<std::size_t>(cfg.interval_hours);
        CHECK(s.total_size() == per_day * s.active_days());
        std::set<Day> active;
        for (const auto& e : cat.events()) {
            active.insert(day_of(e.peak_time));
        }
        CHECK(s.active_days() == active.size());
        for (const auto& run : s.runs) {
            CHECK(run.size() > 0);
            for (double f : run.max_flux) {
                CHECK(f >= kFloorFlux);
            }
        }
    }
    RegularizeConfig bad;
    bad.interval_hours = 5;
    CHECK_THROWS_AS(regularize(catalog::FlareCatalog{}, bad), ConfigError);
}

TEST_CASE("series text formats round trip") {
    std::mt19937_64 rng(4);
    const auto cat = flarecast::testing::random_catalog(rng, 200, 4.0);
    const auto irr = build_irregular_series(cat);
    std::stringstream io;
    write_irregular(io, irr);
    const auto irr_back = read_irregular(io);
    REQUIRE(irr_back.size() == irr.size());
    for (std::size_t i = 0; i < irr.size(); ++i) {
        CHECK(irr_back.entries[i].peak_time == irr.entries[i].peak_time);
        CHECK(irr_back.entries[i].peak_flux == irr.entries[i].peak_flux);
        CHECK(irr_back.entries[i].waiting_time == irr.entries[i].waiting_time);
        CHECK(irr_back.entries[i].flare_class == irr.entries[i].flare_class);
    }

    const auto reg = regularize(cat);
    std::stringstream io2;
    write_regular(io2, reg);
    const auto reg_back = read_regular(io2);
    REQUIRE(reg_back.runs.size() == reg.runs.size());
    CHECK(reg_back.interval_hours == reg.interval_hours);
    for (std::size_t r = 0; r < reg.runs.size(); ++r) {
        CHECK(reg_back.runs[r].start == reg.runs[r].start);
        CHECK(reg_back.runs[r].max_flux == reg.runs[r].max_flux);
        CHECK(reg_back.runs[r].fill == reg.runs[r].fill);
    }
}
