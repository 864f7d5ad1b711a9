#include "distgeo/io.hpp"

#include "distgeo/sha256.hpp"
#include "distgeo/stitching.hpp"

#include "support/test_util.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>

using namespace distgeo;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(name) {
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("fmt_double round-trips exactly and stays short") {
    CHECK(fmt_double(0.1) == "0.1");
    CHECK(fmt_double(1.0) == "1");
    CHECK(fmt_double(-2.5e-7) == "-2.5e-07");
    for (double v : {1.0 / 3.0, 0.1 + 0.2, 1e300, -1e-300, 123456.789012345678}) {
        const std::string s = fmt_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("coordinate table CSV round trip") {
    TempDir dir("io_test_coords");
    CoordinateTable t;
    t.ids = {"a", "b", "c"};
    t.coords.resize(3, 2);
    t.coords << 0.25, -1.5, 1.0 / 3.0, 2e-9, 42.0, 0.0;

    const auto path = (dir.path / "coords.csv").string();
    write_coordinate_table(path, t);
    const auto back = read_coordinate_table(path);
    CHECK(back.ids == t.ids);
    CHECK(testutil::max_abs_diff(back.coords, t.coords) == 0.0);

    // header must be exact
    write_text_atomic(path, "idx,x,y\n1,2,3\n");
    CHECK_THROWS_AS(read_coordinate_table(path), std::runtime_error);

    // malformed number reports the line
    write_text_atomic(path, "id,x,y\na,1,2\nb,oops,3\n");
    try {
        read_coordinate_table(path);
        CHECK(false);
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
}

TEST_CASE("matrix CSV round trip") {
    TempDir dir("io_test_matrix");
    Matrix m(2, 3);
    m << 1, 0.5, -2, 3e-8, 7, 0;
    const auto path = (dir.path / "m.csv").string();
    write_text_atomic(path, matrix_csv(m, {"g0", "g1", "g2"}));
    std::vector<std::string> header;
    const Matrix back = read_matrix_csv(path, &header);
    CHECK(header == std::vector<std::string>{"g0", "g1", "g2"});
    CHECK(testutil::max_abs_diff(back, m) == 0.0);
}

TEST_CASE("labeled matrix CSV round trip") {
    TempDir dir("io_test_labeled");
    Matrix m(2, 2);
    m << 0, 1.5, 1.5, 0;
    const auto path = (dir.path / "d.csv").string();
    write_text_atomic(path, labeled_matrix_csv(m, {"p", "q"}));
    std::vector<std::string> ids;
    const Matrix back = read_labeled_matrix_csv(path, ids);
    CHECK(ids == std::vector<std::string>{"p", "q"});
    CHECK(testutil::max_abs_diff(back, m) == 0.0);
}

TEST_CASE("stitched graph CSV round trip") {
    TempDir dir("io_test_graph");
    StitchedGraph g;
    g.num_nodes = 5;
    g.edges.push_back({0, 3, 1.25, 0.9, 3, 0.05});
    g.edges.push_back({1, 4, 0.75, 1.4142, 2, 0.0});
    const auto path = (dir.path / "stitched.csv").string();
    write_stitched_graph(path, g);
    const auto back = read_stitched_graph(path, 5);
    REQUIRE(back.edges.size() == 2);
    CHECK(back.num_nodes == 5);
    CHECK(back.edges[0].i == 0);
    CHECK(back.edges[0].j == 3);
    CHECK(back.edges[0].d == 1.25);
    CHECK(back.edges[1].count == 2);
    CHECK(read_stitched_graph(path).num_nodes == 5);  // inferred from max index
}

TEST_CASE("atomic writes leave no temp files") {
    TempDir dir("io_test_atomic");
    const auto path = (dir.path / "out.txt").string();
    write_text_atomic(path, "hello\n");
    CHECK(read_text(path) == "hello\n");
    write_text_atomic(path, "replaced\n");
    CHECK(read_text(path) == "replaced\n");
    int files = 0;
    for ([[maybe_unused]] const auto& entry :
         std::filesystem::directory_iterator(dir.path))
        ++files;
    CHECK(files == 1);
}

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const std::string million(1000000, 'a');
    CHECK(sha256_hex(million) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}
