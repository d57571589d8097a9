#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "addae/dataio.hpp"
#include "test_helpers.hpp"

using namespace addae;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

TEST_CASE("load_csv parses plain numeric tables") {
    testutil::TempDir dir;
    const auto path = testutil::write_file(dir, "plain.csv", "1,2\n3,4\n5,6\n");
    const RawTable t = load_csv(path, false);
    REQUIRE(t.values.rows() == 3);
    REQUIRE(t.values.cols() == 2);
    CHECK(t.values(0, 0) == 1.0);
    CHECK(t.values(2, 1) == 6.0);
    CHECK(t.column_names.empty());
}

TEST_CASE("load_csv consumes a header row when asked") {
    testutil::TempDir dir;
    const auto path = testutil::write_file(dir, "hdr.csv", "a,b\n1.5,-2\n");
    const RawTable t = load_csv(path, true);
    REQUIRE(t.values.rows() == 1);
    REQUIRE(t.values.cols() == 2);
    REQUIRE(t.column_names == std::vector<std::string>{"a", "b"});
    CHECK(t.values(0, 1) == -2.0);
}

TEST_CASE("load_csv rejects bad input with located errors") {
    testutil::TempDir dir;
    SECTION("NaN cell") {
        const auto path = testutil::write_file(dir, "nan.csv", "1,2\n3,NaN\n");
        CHECK_THROWS_WITH(load_csv(path, false), ContainsSubstring("row 2") && ContainsSubstring("column 2"));
    }
    SECTION("non-numeric cell") {
        const auto path = testutil::write_file(dir, "bad.csv", "1,2\nx,4\n");
        CHECK_THROWS_WITH(load_csv(path, false), ContainsSubstring("row 2") && ContainsSubstring("column 1"));
    }
    SECTION("empty file") {
        const auto path = testutil::write_file(dir, "empty.csv", "");
        CHECK_THROWS_WITH(load_csv(path, false), ContainsSubstring("no data rows"));
    }
    SECTION("header only") {
        const auto path = testutil::write_file(dir, "honly.csv", "a,b\n");
        CHECK_THROWS(load_csv(path, true));
    }
    SECTION("ragged row") {
        const auto path = testutil::write_file(dir, "ragged.csv", "1,2\n3\n");
        CHECK_THROWS_WITH(load_csv(path, false), ContainsSubstring("row 2"));
    }
    SECTION("missing file") { CHECK_THROWS(load_csv(dir.file("nope.csv"), false)); }
}

TEST_CASE("constant features are eliminated at the sqrt-epsilon threshold") {
    RawTable t;
    t.values.resize(3, 4);
    // col0 constant, col1 range 1e-9 (below), col2 range 1e-7 (above), col3 wide
    t.values << 5.0, 0.0, 0.0, -1.0,
                5.0, 5e-10, 5e-8, 0.5,
                5.0, 1e-9, 1e-7, 2.0;
    const FeatureMask mask = eliminate_constant_features(t);
    CHECK(mask.kept == std::vector<bool>{false, false, true, true});
    CHECK(mask.n == 2);
    CHECK(mask.kept_indices() == std::vector<int>{2, 3});
}

TEST_CASE("all-constant table is an error") {
    RawTable t;
    t.values = Eigen::MatrixXd::Constant(4, 2, 3.25);
    CHECK_THROWS_WITH(eliminate_constant_features(t), ContainsSubstring("no informative features"));
}

TEST_CASE("feature elimination is invariant to row permutation") {
    std::mt19937 gen(17);
    RawTable t;
    t.values = testutil::random_matrix(20, 6, 99);
    t.values.col(2).setConstant(1.0);
    t.values.col(4) *= 1e-9;
    const FeatureMask before = eliminate_constant_features(t);

    std::vector<int> perm(20);
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(perm.begin(), perm.end(), gen);
        RawTable shuffled = t;
        for (int i = 0; i < 20; ++i) shuffled.values.row(i) = t.values.row(perm[static_cast<std::size_t>(i)]);
        CHECK(eliminate_constant_features(shuffled).kept == before.kept);
    }
}

TEST_CASE("normalize maps {0,1,2} to {-1,0,1}") {
    RawTable t;
    t.values.resize(3, 1);
    t.values << 0.0, 1.0, 2.0;
    const Dataset ds = normalize(t, eliminate_constant_features(t));
    CHECK_THAT(ds.data(0, 0), WithinAbs(-1.0, 1e-15));
    CHECK_THAT(ds.data(1, 0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(ds.data(2, 0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(ds.params.means(0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(ds.params.scales(0), WithinAbs(1.0, 1e-15));
}

TEST_CASE("normalize handles the asymmetric {0,0,3} column") {
    RawTable t;
    t.values.resize(3, 1);
    t.values << 0.0, 0.0, 3.0;
    const Dataset ds = normalize(t, eliminate_constant_features(t));
    CHECK_THAT(ds.data(0, 0), WithinAbs(-2.0 / 3.0, 1e-15));
    CHECK_THAT(ds.data(1, 0), WithinAbs(-2.0 / 3.0, 1e-15));
    CHECK_THAT(ds.data(2, 0), WithinAbs(4.0 / 3.0, 1e-15));
    CHECK_THAT(ds.data.col(0).maxCoeff() - ds.data.col(0).minCoeff(), WithinAbs(2.0, 1e-15));
    CHECK_THAT(ds.data.col(0).mean(), WithinAbs(0.0, 1e-15));
}

TEST_CASE("normalized features have zero mean and range two") {
    for (unsigned seed : {1u, 2u, 3u}) {
        RawTable t;
        t.values = testutil::random_matrix(37, 9, seed, 50.0);
        t.values.array().col(3) += 1e4;  // large offset stresses the mean subtraction
        const Dataset ds = normalize(t, eliminate_constant_features(t));
        for (int j = 0; j < ds.features(); ++j) {
            CHECK_THAT(ds.data.col(j).mean(), WithinAbs(0.0, 1e-10));
            CHECK_THAT(ds.data.col(j).maxCoeff() - ds.data.col(j).minCoeff(), WithinAbs(2.0, 1e-10));
        }
    }
}

TEST_CASE("apply_normalization reuses stored parameters") {
    RawTable train;
    train.values = testutil::random_matrix(25, 5, 7, 3.0);
    const FeatureMask mask = eliminate_constant_features(train);
    const Dataset ds = normalize(train, mask);

    SECTION("training table reproduces the fitted dataset") {
        const Dataset again = apply_normalization(ds.params, mask, train);
        CHECK((again.data - ds.data).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("the mean row maps to zero") {
        RawTable row;
        row.values.resize(1, 5);
        for (int j = 0; j < 5; ++j) row.values(0, j) = train.values.col(j).mean();
        const Dataset out = apply_normalization(ds.params, mask, row);
        CHECK(out.data.cwiseAbs().maxCoeff() <= 1e-12);
    }
    SECTION("out-of-range values are not clipped") {
        RawTable row;
        row.values.resize(1, 5);
        for (int j = 0; j < 5; ++j) row.values(0, j) = train.values.col(j).maxCoeff() * 4.0 + 10.0;
        const Dataset out = apply_normalization(ds.params, mask, row);
        CHECK(out.data.cwiseAbs().maxCoeff() > 1.0);
    }
    SECTION("feature-count mismatch is an error") {
        RawTable bad;
        bad.values = Eigen::MatrixXd::Zero(2, 4);
        CHECK_THROWS_WITH(apply_normalization(ds.params, mask, bad), ContainsSubstring("mismatch"));
    }
}

TEST_CASE("denormalization round-trips to the raw values") {
    RawTable t;
    t.values = testutil::random_matrix(30, 6, 11, 100.0);
    const FeatureMask mask = eliminate_constant_features(t);
    const Dataset ds = normalize(t, mask);
    for (int j = 0; j < ds.features(); ++j) {
        for (int i = 0; i < 30; ++i) {
            const double raw = ds.data(i, j) / ds.params.scales(j) + ds.params.means(j);
            const double expected = t.values(i, j);
            CHECK_THAT(raw, WithinAbs(expected, 1e-12 * std::max(1.0, std::abs(expected))));
        }
    }
}
