#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "cafd/errors.hpp"
#include "cafd/tensor_io.hpp"
#include "test_support.hpp"

using namespace cafd;
using cafd::testing::TempDir;

namespace {

void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out << bytes;
}

std::string fvec_header(std::uint32_t rows, std::uint32_t cols) {
    std::string h("FVEC1\0\0\0", 8);
    for (auto v : {rows, cols}) {
        for (int i = 0; i < 4; ++i) h.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    return h;
}

std::string f32_bytes(float f) {
    std::uint32_t u = 0;
    std::memcpy(&u, &f, 4);
    std::string s;
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((u >> (8 * i)) & 0xFF));
    return s;
}

}  // namespace

TEST_CASE("fvec reads a hand-built 2x3 file") {
    TempDir dir;
    std::string bytes = fvec_header(2, 3);
    for (float v : {1.0f, 2.0f, 3.0f, -4.5f, 0.25f, 6.0f}) bytes += f32_bytes(v);
    write_bytes(dir / "m.fvec", bytes);
    const auto m = read_feature_matrix(dir / "m.fvec");
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 3);
    CHECK(m.values()(0, 2) == 3.0);
    CHECK(m.values()(1, 0) == -4.5);
    CHECK(m.values()(1, 1) == 0.25);
}

TEST_CASE("1x1 matrix is a 20-byte header plus one float") {
    TempDir dir;
    write_feature_matrix(FeatureMatrix::from_rows({{0.5}}), dir / "one.fvec");
    // 8 magic + 2 x u32 + one float32 payload value.
    CHECK(std::filesystem::file_size(dir / "one.fvec") == 8 + 4 + 4 + 4);
    std::ifstream in(dir / "one.fvec", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(bytes == fvec_header(1, 1) + f32_bytes(0.5f));
}

TEST_CASE("round trip is exact at float32 precision") {
    TempDir dir;
    Rng rng(11);
    Eigen::MatrixXd values = cafd::testing::random_matrix(rng, 100, 64);
    // Pre-round so the comparison is exact.
    values = values.cast<float>().cast<double>();
    const FeatureMatrix m(values);
    write_feature_matrix(m, dir / "r.fvec");
    CHECK(read_feature_matrix(dir / "r.fvec") == m);

    // Unrounded doubles come back as their float32 images.
    const FeatureMatrix raw(cafd::testing::random_matrix(rng, 7, 5));
    write_feature_matrix(raw, dir / "raw.fvec");
    const auto back = read_feature_matrix(dir / "raw.fvec");
    CHECK(back.values() == raw.values().cast<float>().cast<double>());
}

TEST_CASE("empty matrix round-trips") {
    TempDir dir;
    const FeatureMatrix empty(Eigen::MatrixXd(0, 4));
    write_feature_matrix(empty, dir / "e.fvec");
    CHECK(std::filesystem::file_size(dir / "e.fvec") == kFvecHeaderBytes);
    const auto back = read_feature_matrix(dir / "e.fvec");
    CHECK(back.rows() == 0);
    CHECK(back.cols() == 4);
}

TEST_CASE("fvec error paths") {
    TempDir dir;
    SUBCASE("bad magic") {
        write_bytes(dir / "bad.fvec", std::string("FVEC2\0\0\0", 8) + std::string(8, '\0'));
        CHECK_THROWS_AS(read_feature_matrix(dir / "bad.fvec"), FormatError);
    }
    SUBCASE("short payload") {
        std::string bytes = fvec_header(2, 3);
        for (int i = 0; i < 5; ++i) bytes += f32_bytes(1.0f);
        write_bytes(dir / "short.fvec", bytes);
        CHECK_THROWS_AS(read_feature_matrix(dir / "short.fvec"), TruncationError);
    }
    SUBCASE("long payload") {
        std::string bytes = fvec_header(1, 1) + f32_bytes(1.0f) + f32_bytes(2.0f);
        write_bytes(dir / "long.fvec", bytes);
        CHECK_THROWS_AS(read_feature_matrix(dir / "long.fvec"), TruncationError);
    }
    SUBCASE("truncated header") {
        write_bytes(dir / "hdr.fvec", std::string("FVEC1\0\0\0\1\0", 10));
        CHECK_THROWS_AS(read_feature_matrix(dir / "hdr.fvec"), TruncationError);
    }
    SUBCASE("NaN names its cell") {
        std::string bytes = fvec_header(2, 2) + f32_bytes(1.0f) + f32_bytes(2.0f) + f32_bytes(3.0f) +
                            f32_bytes(std::numeric_limits<float>::quiet_NaN());
        write_bytes(dir / "nan.fvec", bytes);
        try {
            (void)read_feature_matrix(dir / "nan.fvec");
            FAIL("expected DataError");
        } catch (const DataError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 1") != std::string::npos);
            CHECK(msg.find("column 1") != std::string::npos);
        }
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(read_feature_matrix(dir / "nope.fvec"), IoError); }
}

TEST_CASE("csv features") {
    TempDir dir;
    write_bytes(dir / "x.csv", "1,2,3\n4.5,\"5\",-6e-1\r\n\n");
    const auto m = read_feature_matrix(dir / "x.csv");
    REQUIRE(m.rows() == 2);
    CHECK(m.values()(1, 1) == 5.0);
    CHECK(m.values()(1, 2) == -0.6);

    write_bytes(dir / "ragged.csv", "1,2\n3\n");
    CHECK_THROWS_AS(read_feature_matrix(dir / "ragged.csv"), FormatError);
    write_bytes(dir / "junk.csv", "1,abc\n");
    CHECK_THROWS_AS(read_feature_matrix(dir / "junk.csv"), FormatError);
    write_bytes(dir / "inf.csv", "1,inf\n");
    CHECK_THROWS_AS(read_feature_matrix(dir / "inf.csv"), DataError);

    // CSV keeps full double precision.
    Rng rng(3);
    const FeatureMatrix r(cafd::testing::random_matrix(rng, 9, 4));
    write_feature_matrix(r, dir / "r.csv");
    CHECK(read_feature_matrix(dir / "r.csv") == r);
}

TEST_CASE("labels") {
    TempDir dir;
    write_bytes(dir / "l.txt", "0\n1\n2\n");
    const auto l = read_labels(dir / "l.txt");
    CHECK(l.labels() == std::vector<std::size_t>{0, 1, 2});
    CHECK(l.n_classes() == 3);
    CHECK(read_labels(dir / "l.txt", 5).n_classes() == 5);
    CHECK_THROWS_AS(read_labels(dir / "l.txt", 2), DataError);

    write_bytes(dir / "neg.txt", "0\n-1\n");
    CHECK_THROWS_AS(read_labels(dir / "neg.txt"), DataError);
    write_bytes(dir / "bad.txt", "0\n1.5\n");
    CHECK_THROWS_AS(read_labels(dir / "bad.txt"), FormatError);

    const LabelVector v({3, 0, 2, 2}, 4);
    write_labels(v, dir / "v.labels");
    CHECK(read_labels(dir / "v.labels", 4) == v);
    write_labels(v, dir / "v.fvec");
    CHECK(read_labels(dir / "v.fvec", 4) == v);
    write_labels(v, dir / "v.csv");
    CHECK(read_labels(dir / "v.csv", 4) == v);
}

TEST_CASE("probabilities") {
    TempDir dir;
    write_bytes(dir / "ok.csv", "0.5,0.5\n1,0\n");
    const auto p = read_probabilities(dir / "ok.csv");
    CHECK(p.n_classes() == 2);
    write_bytes(dir / "bad.csv", "0.7,0.7\n");
    CHECK_THROWS_AS(read_probabilities(dir / "bad.csv"), DataError);
    write_bytes(dir / "neg.csv", "1.1,-0.1\n");
    CHECK_THROWS_AS(read_probabilities(dir / "neg.csv"), DataError);

    SUBCASE("float32 storage is renormalized to an exact unit sum") {
        const auto thirds = ProbabilityMatrix::from_rows({{1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.1, 0.2, 0.7}});
        write_probabilities(thirds, dir / "t.fvec");
        const auto back = read_probabilities(dir / "t.fvec");
        for (Eigen::Index i = 0; i < 2; ++i) CHECK(std::abs(back.values().row(i).sum() - 1.0) < 1e-15);
        CHECK(back.values()(1, 2) == doctest::Approx(0.7).epsilon(1e-7));
    }
    SUBCASE("row sum tolerance is 1e-6") {
        CHECK_NOTHROW(ProbabilityMatrix::from_rows({{0.5, 0.5 + 9e-7}}));
        CHECK_THROWS_AS(ProbabilityMatrix::from_rows({{0.5, 0.5 + 2e-6}}), DataError);
    }
}

TEST_CASE("one_hot") {
    const auto p = one_hot(LabelVector({0, 1}, 2), 2);
    CHECK(p.values() == (Eigen::MatrixXd(2, 2) << 1, 0, 0, 1).finished());
    const auto q = one_hot(LabelVector({2}, 3), 3);
    CHECK(q.values() == (Eigen::MatrixXd(1, 3) << 0, 0, 1).finished());
    CHECK_THROWS_AS(one_hot(LabelVector({3}, 4), 3), DataError);
}

TEST_CASE("label marginals") {
    const auto m = LabelMarginal::from_labels(LabelVector({0, 1, 1, 3}, 4));
    CHECK(m[0] == 0.25);
    CHECK(m[1] == 0.5);
    CHECK(m[2] == 0.0);
    CHECK_THROWS_AS(LabelMarginal((Eigen::VectorXd(2) << 0.5, 0.6).finished()), DataError);
    const auto pm = LabelMarginal::from_probabilities(ProbabilityMatrix::from_rows({{1, 0}, {0.5, 0.5}}));
    CHECK(pm[0] == 0.75);
}

TEST_CASE("validate_pair") {
    Rng rng(5);
    const FeatureMatrix r(cafd::testing::random_matrix(rng, 100, 64));
    const FeatureMatrix g(cafd::testing::random_matrix(rng, 200, 64));
    const FeatureMatrix g32(cafd::testing::random_matrix(rng, 200, 32));
    const ProbabilityMatrix rp(cafd::testing::random_posteriors(rng, 100, 10));
    const ProbabilityMatrix gp(cafd::testing::random_posteriors(rng, 200, 10));
    const ProbabilityMatrix gp9(cafd::testing::random_posteriors(rng, 200, 9));
    CHECK_NOTHROW(validate_pair(r, g, rp, gp));
    CHECK_THROWS_AS(validate_pair(r, g32, rp, gp), DimensionError);
    try {
        validate_pair(r, g, rp, gp9);
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("class-count") != std::string::npos);
        CHECK(msg.find("200x9") != std::string::npos);
        CHECK(msg.find("100x10") != std::string::npos);
    }
    CHECK_THROWS_AS(validate_pair(r, g, gp, gp), DimensionError);
}
