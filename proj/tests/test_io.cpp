#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "koopman/csv.hpp"
#include "koopman/errors.hpp"
#include "koopman/pipeline.hpp"
#include "koopman/serialization.hpp"
#include "oracles.hpp"

using namespace koopman;

namespace {

SnapshotSet parse(const std::string& text) {
    std::istringstream in(text);
    return read_snapshot_csv(in);
}

ParseError parse_error(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return e;
    }
    FAIL("expected a parse error");
    return ParseError("", 0);
}

KoopmanModel sample_model() {
    std::mt19937_64 rng(40);
    const Eigen::MatrixXd X = oracle::random_matrix(30, 2, rng);
    Eigen::Matrix2d A;
    A << 0.8, -0.5, 0.5, 0.8;
    const Eigen::MatrixXd Xp = X * A.transpose();
    const Dictionary d(2, {basis::Constant{}, basis::Coordinate{0}, basis::Coordinate{1}, basis::Monomial{{2, 0}},
                           basis::GaussianRbf{Eigen::Vector2d(0.1, 0.2), 0.9}, basis::ThinPlateSpline{Eigen::Vector2d(0, 0)}});
    FitOptions opt;
    opt.regularizer = regularizer::Ridge{1e-6};
    return fit(d, SnapshotSet(X, Xp), opt);
}

}  // namespace

TEST_CASE("number formatting round-trips") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, i % 40 - 20);
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
}

TEST_CASE("csv: paired snapshots") {
    const SnapshotSet s = parse("x1,x2,xp1,xp2,y1,yp1\n1,2,3,4,5,6\n-1,0.5,2e-3,7,8,9\n");
    REQUIRE(s.samples() == 2);
    CHECK(s.X()(1, 1) == 0.5);
    CHECK(s.Xplus()(1, 0) == 2e-3);
    CHECK((*s.Y())(0, 0) == 5.0);
    CHECK((*s.Yplus())(1, 0) == 9.0);

    // any column order, BOM and CRLF tolerated
    const SnapshotSet r = parse("\xEF\xBB\xBFxp1,x1\r\n2,1\r\n\r\n4,3\r\n");
    CHECK(r.X()(1, 0) == 3.0);
    CHECK(r.Xplus()(0, 0) == 2.0);
    CHECK_FALSE(r.Y().has_value());
}

TEST_CASE("csv: trajectory variant pairs consecutive rows") {
    const SnapshotSet s = parse("x1,y1\n1,10\n2,20\n3,30\n");
    REQUIRE(s.samples() == 2);
    CHECK(s.X()(0, 0) == 1.0);
    CHECK(s.Xplus()(0, 0) == 2.0);
    CHECK(s.Xplus()(1, 0) == 3.0);
    CHECK((*s.Y())(1, 0) == 20.0);
    CHECK((*s.Yplus())(1, 0) == 30.0);
}

TEST_CASE("csv: errors carry line and column") {
    {
        const ParseError e = parse_error("x1,xp1\n1,2\n3,abc\n");
        CHECK(e.line() == 3);
        CHECK(e.column() == 2);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK(parse_error("x1,xp1\n1,2\n3\n").line() == 3);
    CHECK(parse_error("x1,q1\n1,2\n").line() == 1);
    CHECK(parse_error("x1,x3\n1,2\n").line() == 1);
    CHECK(parse_error("").line() == 1);
    CHECK(parse_error("x1,xp1\n").line() > 0);
    CHECK(parse_error("x1,xp1\n1,nan\n").line() == 2);
    CHECK(parse_error("x1,xp1,yp1\n1,2,3\n").line() == 1);
    CHECK_THROWS_AS(read_snapshot_csv_file("/nonexistent/file.csv"), ParseError);
}

TEST_CASE("csv: write then read is exact") {
    std::mt19937_64 rng(42);
    const SnapshotSet s(oracle::random_matrix(7, 2, rng), oracle::random_matrix(7, 2, rng),
                        oracle::random_matrix(7, 3, rng), oracle::random_matrix(7, 3, rng));
    std::stringstream buf;
    write_snapshot_csv(buf, s);
    const SnapshotSet r = read_snapshot_csv(buf);
    CHECK(r.X() == s.X());
    CHECK(r.Xplus() == s.Xplus());
    CHECK(*r.Y() == *s.Y());
    CHECK(*r.Yplus() == *s.Yplus());
}

TEST_CASE("json: dictionary and regularizer round trips") {
    const KoopmanModel model = sample_model();
    CHECK(dictionary_from_json(to_json(model.dictionary())) == model.dictionary());
    CHECK(dictionary_from_json(json::parse(to_json(model.dictionary()).dump())) == model.dictionary());

    regularizer::Tikhonov t;
    t.Q = Eigen::MatrixXd{{2.0, 0.5}, {0.5, 1.0}};
    t.W0 = Eigen::MatrixXd{{1.0, 0.0}, {0.25, 0.0}};
    t.prior_columns = {0};
    const RegularizerSpec back = regularizer_from_json(json::parse(to_json(t).dump()));
    const auto& tb = std::get<regularizer::Tikhonov>(back);
    CHECK(std::get<Eigen::MatrixXd>(tb.Q) == std::get<Eigen::MatrixXd>(t.Q));
    CHECK(tb.W0 == t.W0);
    CHECK(tb.prior_columns == t.prior_columns);

    const RegularizerSpec scalar = regularizer_from_json(json::parse(R"({"mode":"tikhonov","Q":{"scalar":0.5}})"));
    CHECK(std::get<regularizer::ScaledIdentity>(std::get<regularizer::Tikhonov>(scalar).Q).beta == 0.5);
    CHECK(std::get<regularizer::Ridge>(regularizer_from_json(json::parse(R"({"mode":"ridge","beta":2})"))).beta == 2.0);
    CHECK(std::get<regularizer::Pseudoinverse>(regularizer_from_json(json::parse(R"({"mode":"pseudoinverse"})")))
              .svd_rtol == 1e-12);

    CHECK_THROWS_AS(regularizer_from_json(json::parse(R"({"mode":"lasso"})")), JsonSchemaError);
    CHECK_THROWS_AS(regularizer_from_json(json::parse(R"({"mode":"ridge","beta":-1})")), JsonSchemaError);
    CHECK_THROWS_AS(dictionary_from_json(json::parse(R"({"state_dim":1,"basis":[{"kind":"sine"}]})")), JsonSchemaError);
}

TEST_CASE("json: model round trip is exact and predictions agree") {
    const KoopmanModel model = sample_model();
    const std::string file = std::string(KOOPMAN_TEST_TMPDIR) + "/io_model.json";
    save_model(model, file);
    const KoopmanModel back = load_model(file);
    std::remove(file.c_str());

    CHECK(back.K() == model.K());
    CHECK(back.W() == model.W());
    CHECK(back.V() == model.V());
    CHECK(back.eigenvalues() == model.eigenvalues());
    CHECK(back.modes() == model.modes());
    CHECK(back.dictionary() == model.dictionary());
    CHECK(back.meta().samples == model.meta().samples);
    CHECK(back.meta().gram_condition == model.meta().gram_condition);
    const Eigen::Vector2d x0(0.4, -0.3);
    CHECK(predict_trajectory(back, x0, 25).values == predict_trajectory(model, x0, 25).values);
}

TEST_CASE("json: corrupted model reports the offending path") {
    json j = to_json(sample_model());
    {
        json bad = j;
        bad["K"][1][2] = "x";
        try {
            model_from_json(bad);
            FAIL("expected a schema error");
        } catch (const JsonSchemaError& e) {
            CHECK(e.path() == "/K/1/2");
        }
    }
    {
        json bad = j;
        bad["V"][0].erase(0);
        CHECK_THROWS_AS(model_from_json(bad), JsonSchemaError);
    }
    {
        json bad = j;
        bad.erase("W");
        try {
            model_from_json(bad);
            FAIL("expected a schema error");
        } catch (const JsonSchemaError& e) {
            CHECK(std::string(e.what()).find("'W'") != std::string::npos);
        }
    }
    {
        json bad = j;
        bad["dictionary"]["basis"][3]["kind"] = "unknown";
        try {
            model_from_json(bad);
            FAIL("expected a schema error");
        } catch (const JsonSchemaError& e) {
            CHECK(e.path() == "/dictionary/basis/3/kind");
        }
    }
    {
        json bad = j;
        bad["eigenvalues"].erase(0);
        CHECK_THROWS_AS(model_from_json(bad), JsonSchemaError);
    }
}

TEST_CASE("json: non-finite numbers are written as strings") {
    CHECK(number_to_json(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(number_to_json(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(number_to_json(std::nan("")) == "nan");
    CHECK(json_io::read_number(json("inf"), "") == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(json_io::read_finite(json("nan"), "/x"), JsonSchemaError);
}

TEST_CASE("json: diagnostics report marks missing fields") {
    DiagnosticsReport r;
    r.invariance_defect = 0.25;
    r.span_defect = Eigen::VectorXd::Constant(1, 0.5);
    const json j = to_json(r);
    CHECK(j["invariance_defect"] == 0.25);
    CHECK(j["claim2_gap"] == "unavailable");
}
