#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "havok/errors.hpp"
#include "havok/rng.hpp"
#include "havok/signal.hpp"

using namespace havok;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / name;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

} // namespace

TEST_CASE("wide csv loads with implied dt") {
    const auto path = temp_file("wide_basic.csv");
    write_file(path, "p1,p2\n1,5\n2,6\n3,7\n4,8\n");
    CsvSchema schema;
    schema.dt = 0.1;
    const Dataset ds = load_dataset(path, schema);
    CHECK(ds.size() == 2);
    CHECK(ds.at(0).size() == 4);
    CHECK(ds.at(0).id() == "p1");
    CHECK(ds.at(1).values()[3] == 8.0);
    CHECK(ds.dt() == 0.1);
}

TEST_CASE("wide csv with time column infers dt") {
    const auto path = temp_file("wide_time.csv");
    write_file(path, "t,a\n0.0,1\n0.5,2\n1.0,3\n");
    const Dataset ds = load_dataset(path);
    CHECK(ds.dt() == doctest::Approx(0.5));
}

TEST_CASE("long csv with one id") {
    const auto path = temp_file("long_one.csv");
    write_file(path, "id,t,value\ns,0.0,1\ns,0.1,2\ns,0.2,3\n");
    const Dataset ds = load_dataset(path);
    CHECK(ds.size() == 1);
    CHECK(ds.at(0).size() == 3);
}

TEST_CASE("nan sample reports the sequence id and row") {
    const auto path = temp_file("wide_nan.csv");
    write_file(path, "p1,p3\n1,1\n2,2\n3,3\n4,4\n5,5\n6,6\n7,nan\n");
    CHECK_THROWS_WITH_AS(load_dataset(path, CsvSchema{CsvLayout::wide, 0.1, 1e-9}),
                         doctest::Contains("p3"), DataError);
    try {
        load_dataset(path, CsvSchema{CsvLayout::wide, 0.1, 1e-9});
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 8") != std::string::npos); // header + 7 data rows
    }
}

TEST_CASE("malformed cell reports row and column") {
    const auto path = temp_file("wide_bad.csv");
    write_file(path, "t,a\n0.0,1\n0.1,oops\n");
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("row 3"), DataError);
}

TEST_CASE("non-uniform time step beyond tolerance is rejected") {
    const auto path = temp_file("wide_jitter.csv");
    write_file(path, "t,a\n0.0,1\n0.1,2\n0.21,3\n");
    CHECK_THROWS_AS(load_dataset(path), DataError);
}

TEST_CASE("save/load round-trips samples bit-exactly") {
    Rng rng(99);
    std::vector<double> values(257);
    for (auto& v : values) v = rng.normal() * 1e-7 + rng.uniform(-3.0, 3.0);
    values[0] = 1.0 / 3.0;
    values[1] = 1e-300;
    values[2] = -0.1234567890123456789;
    const Sequence original(values, 0.01, {"roundtrip", {}});

    const auto path = temp_file("roundtrip.csv");
    save_dataset(Dataset({original}), path);
    const Dataset loaded = load_dataset(path);
    REQUIRE(loaded.at(0).size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        CHECK(loaded.at(0).values()[i] == values[i]);
    }
}

TEST_CASE("standardize hits zero mean unit variance") {
    const Sequence s({1.0, 3.0}, 1.0, {"two", {}});
    const Sequence z = standardize(s);
    CHECK(z.values()[0] == doctest::Approx(-1.0));
    CHECK(z.values()[1] == doctest::Approx(1.0));
    CHECK(z.dt() == s.dt());
    CHECK(z.id() == "two");
}

TEST_CASE("standardize is idempotent within 1e-12") {
    Rng rng(7);
    std::vector<double> values(500);
    for (auto& v : values) v = 3.0 * rng.normal() + 11.0;
    const Sequence once = standardize(Sequence(values, 0.5, {"x", {}}));
    const Sequence twice = standardize(once);
    for (std::size_t i = 0; i < values.size(); ++i) {
        CHECK(std::abs(once.values()[i] - twice.values()[i]) < 1e-12);
    }
}

TEST_CASE("constant sequence cannot be standardized") {
    CHECK_THROWS_AS(standardize(Sequence({5.0, 5.0, 5.0}, 1.0, {"flat", {}})), DataError);
}

TEST_CASE("split produces exact halves") {
    std::vector<double> values(2000);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i);
    const Sequence s(values, 0.01, {"long", {}});
    const auto [train, test] = split(s, 1500);
    CHECK(train.size() == 1500);
    CHECK(test.size() == 500);

    // lossless: concatenation reproduces the input
    std::vector<double> rebuilt = train.values();
    rebuilt.insert(rebuilt.end(), test.values().begin(), test.values().end());
    CHECK(rebuilt == values);
}

TEST_CASE("split boundary and error cases") {
    const Sequence s({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 1.0, {"ten", {}});
    const auto [train, test] = split(s, 9);
    CHECK(train.size() == 9);
    CHECK(test.size() == 1);
    CHECK_THROWS_AS(split(s, 10), DataError);
    CHECK_THROWS_AS(split(s, 0), DataError);
}

TEST_CASE("dataset rejects duplicate ids and mixed dt") {
    const Sequence a({1, 2}, 0.1, {"a", {}});
    const Sequence a2({3, 4}, 0.1, {"a", {}});
    CHECK_THROWS_AS(Dataset({a, a2}), DataError);
    const Sequence b({1, 2}, 0.2, {"b", {}});
    CHECK_THROWS_AS(Dataset({a, b}), DataError);
}
