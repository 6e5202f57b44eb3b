#include "testscape/dataset.hpp"

#include "testscape/errors.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>

using namespace testscape;
using testhelpers::make_case;
using testhelpers::TempDir;

namespace {

std::set<std::string> id_set(const Corpus& c) {
    std::set<std::string> ids;
    for (const auto& tc : c.cases) ids.insert(tc.id);
    return ids;
}

} // namespace

TEST_CASE("outcome strings round trip") {
    CHECK(to_string(Outcome::Effective) == "effective");
    CHECK(to_string(Outcome::Ineffective) == "ineffective");
    CHECK(outcome_from_string("effective") == Outcome::Effective);
    CHECK_THROWS_AS(outcome_from_string("Effective"), DataError);
}

TEST_CASE("validate_case rejects invariant breaches") {
    TestCase tc = make_case("c1", "t", Outcome::Effective);
    CHECK_NOTHROW(validate_case(tc));

    SUBCASE("single road point") {
        tc.road = {{0.0, 0.0}};
        CHECK_THROWS_WITH_AS(validate_case(tc),
                             doctest::Contains("malformed case c1"), DataError);
    }
    SUBCASE("repeated consecutive point") {
        tc.road = {{0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}};
        CHECK_THROWS_AS(validate_case(tc), DataError);
    }
    SUBCASE("NaN telemetry sample") {
        tc.telemetry[0].samples[1] = std::nan("");
        CHECK_THROWS_WITH_AS(validate_case(tc),
                             doctest::Contains("malformed case c1"), DataError);
    }
    SUBCASE("empty channel") {
        tc.telemetry[0].samples.clear();
        CHECK_THROWS_AS(validate_case(tc), DataError);
    }
}

TEST_CASE("save and load round trip is the identity") {
    TempDir dir("dataset_roundtrip");
    Corpus corpus;
    corpus.provenance = "unit fixture";
    corpus.cases = {make_case("a", "t1", Outcome::Effective),
                    make_case("b", "t1", Outcome::Ineffective, 3.5),
                    make_case("c", "t2", Outcome::Effective, -2.25)};
    save_corpus(corpus, dir.path);

    const Corpus loaded = load_corpus(dir.path);
    REQUIRE(loaded.cases.size() == 3);
    CHECK(loaded.provenance == corpus.provenance);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& a = corpus.cases[i];
        const auto& b = loaded.cases[i];
        CHECK(a.id == b.id);
        CHECK(a.technique == b.technique);
        CHECK(a.outcome == b.outcome);
        REQUIRE(a.road.size() == b.road.size());
        for (std::size_t p = 0; p < a.road.size(); ++p) {
            CHECK(a.road[p].x == b.road[p].x);
            CHECK(a.road[p].y == b.road[p].y);
        }
        REQUIRE(a.telemetry.size() == b.telemetry.size());
        for (std::size_t ch = 0; ch < a.telemetry.size(); ++ch) {
            CHECK(a.telemetry[ch].name == b.telemetry[ch].name);
            CHECK(a.telemetry[ch].samples == b.telemetry[ch].samples);
        }
    }
}

TEST_CASE("load_corpus error reporting") {
    SUBCASE("missing index") {
        CHECK_THROWS_WITH_AS(load_corpus("does_not_exist_xyz"),
                             doctest::Contains("corpus not found"), DataError);
    }
    SUBCASE("malformed cases are aggregated, sorted by id") {
        TempDir dir("dataset_malformed");
        Corpus corpus;
        corpus.cases = {make_case("z_bad", "t", Outcome::Effective),
                        make_case("a_bad", "t", Outcome::Ineffective, 5.0),
                        make_case("ok", "t", Outcome::Effective, 9.0)};
        save_corpus(corpus, dir.path);
        // Corrupt both bad cases on disk: one-point road and a NaN sample.
        write_text_file(dir.path / "roads" / "z_bad.csv", "x,y\n1,2\n");
        write_text_file(dir.path / "telemetry" / "a_bad.csv", "speed,steering\n1,nan_oops\n");
        try {
            load_corpus(dir.path);
            FAIL("expected DataError");
        } catch (const DataError& e) {
            const std::string what = e.what();
            const auto a_pos = what.find("malformed case a_bad");
            const auto z_pos = what.find("malformed case z_bad");
            CHECK(a_pos != std::string::npos);
            CHECK(z_pos != std::string::npos);
            CHECK(a_pos < z_pos);
            CHECK(what.find("ok") == std::string::npos);
        }
    }
    SUBCASE("duplicate id") {
        TempDir dir("dataset_dup");
        Corpus corpus;
        corpus.cases = {make_case("a", "t", Outcome::Effective)};
        save_corpus(corpus, dir.path);
        write_text_file(dir.path / "index.csv",
                        "id,technique,outcome,road_file,telemetry_file\n"
                        "a,t,effective,roads/a.csv,telemetry/a.csv\n"
                        "a,t,effective,roads/a.csv,telemetry/a.csv\n");
        CHECK_THROWS_WITH_AS(load_corpus(dir.path), doctest::Contains("duplicate id"), DataError);
    }
}

TEST_CASE("balanced_subset balances per technique") {
    Corpus corpus;
    for (int i = 0; i < 5; ++i)
        corpus.cases.push_back(make_case("eff_" + std::to_string(i), "A", Outcome::Effective));
    for (int i = 0; i < 20; ++i)
        corpus.cases.push_back(make_case("ineff_" + std::to_string(i), "A", Outcome::Ineffective));
    for (int i = 0; i < 3; ++i)
        corpus.cases.push_back(make_case("b_eff_" + std::to_string(i), "B", Outcome::Effective));
    for (int i = 0; i < 7; ++i)
        corpus.cases.push_back(make_case("b_ineff_" + std::to_string(i), "B", Outcome::Ineffective));

    const Corpus balanced = balanced_subset(corpus, 99);
    int a_eff = 0, a_ineff = 0, b_eff = 0, b_ineff = 0;
    for (const auto& tc : balanced.cases) {
        if (tc.technique == "A") (tc.outcome == Outcome::Effective ? a_eff : a_ineff)++;
        else (tc.outcome == Outcome::Effective ? b_eff : b_ineff)++;
    }
    CHECK(a_eff == 5);
    CHECK(a_ineff == 5);
    CHECK(b_eff == 3);
    CHECK(b_ineff == 3);

    SUBCASE("deterministic for a fixed seed") {
        CHECK(id_set(balanced_subset(corpus, 99)) == id_set(balanced));
        // All seeds balance; different seeds may sample different ids.
        const Corpus other = balanced_subset(corpus, 100);
        CHECK(other.cases.size() == balanced.cases.size());
    }
}

TEST_CASE("balanced_subset rejects unbalanceable techniques") {
    Corpus corpus;
    corpus.cases = {make_case("e1", "A", Outcome::Effective),
                    make_case("e2", "A", Outcome::Effective),
                    make_case("i1", "A", Outcome::Ineffective)};
    CHECK_THROWS_WITH_AS(balanced_subset(corpus, 1),
                         doctest::Contains("cannot balance technique A"), DataError);

    SUBCASE("effective-only technique") {
        corpus.cases = {make_case("e1", "B", Outcome::Effective)};
        CHECK_THROWS_WITH_AS(balanced_subset(corpus, 1),
                             doctest::Contains("cannot balance technique B"), DataError);
    }
}

TEST_CASE("split sizes follow round-half-up") {
    Corpus big;
    for (int i = 0; i < 6122; ++i)
        big.cases.push_back(make_case("c" + std::to_string(i), "t",
                                      i % 2 ? Outcome::Effective : Outcome::Ineffective));
    const auto [train, test] = split(big, 0.8, 3);
    // round-half-up(0.8 * 6122) = round-half-up(4897.6) = 4898.
    CHECK(train.cases.size() == 4898);
    CHECK(test.cases.size() == 1224);

    Corpus ten;
    for (int i = 0; i < 10; ++i)
        ten.cases.push_back(make_case("c" + std::to_string(i), "t", Outcome::Effective));
    const auto [train10, test10] = split(ten, 0.8, 3);
    CHECK(train10.cases.size() == 8);
    CHECK(test10.cases.size() == 2);
}

TEST_CASE("split partitions the corpus") {
    Corpus corpus;
    for (int i = 0; i < 37; ++i)
        corpus.cases.push_back(make_case("c" + std::to_string(i), "t",
                                         i % 3 ? Outcome::Effective : Outcome::Ineffective));
    const auto [train, test] = split(corpus, 0.7, 11);
    auto train_ids = id_set(train), test_ids = id_set(test);
    std::set<std::string> all;
    std::set_union(train_ids.begin(), train_ids.end(), test_ids.begin(), test_ids.end(),
                   std::inserter(all, all.begin()));
    CHECK(all == id_set(corpus));
    std::set<std::string> overlap;
    std::set_intersection(train_ids.begin(), train_ids.end(), test_ids.begin(), test_ids.end(),
                          std::inserter(overlap, overlap.begin()));
    CHECK(overlap.empty());

    SUBCASE("same seed gives the same split") {
        const auto [train2, test2] = split(corpus, 0.7, 11);
        CHECK(id_set(train2) == train_ids);
    }
    SUBCASE("fraction must be inside (0,1)") {
        CHECK_THROWS_AS(split(corpus, 0.0, 1), ArgumentError);
        CHECK_THROWS_AS(split(corpus, 1.0, 1), ArgumentError);
    }
}
