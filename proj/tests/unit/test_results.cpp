#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "multiscale/results.hpp"

using namespace multiscale;

TEST(Csv, Rfc4180Quoting) {
    CsvTable t;
    t.header = {"a", "b"};
    t.rows = {{"plain", "with,comma"}, {"say \"hi\"", "line\nbreak"}, {"", "x"}};
    EXPECT_EQ(render_csv(t), "a,b\r\nplain,\"with,comma\"\r\n\"say \"\"hi\"\"\",\"line\nbreak\"\r\n,x\r\n");
    t.rows.push_back({"ragged"});
    EXPECT_THROW(render_csv(t), std::invalid_argument);
}

TEST(Csv, DoubleFormatting) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) EXPECT_EQ(std::stod(format_double(x)), x);
    EXPECT_EQ(format_double(std::nan("")), "");
    EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(ResultTable, RowsAndLookup) {
    ResultTable t;
    t.add({"exp", 0.1, "stat", 1.5, 0.1, 10, 2});
    t.add({"exp", std::nullopt, "ratio", 2.0, 0.0, 0, 0});
    EXPECT_EQ(t.find("exp", 0.1, "stat").censored_count, 2u);
    EXPECT_EQ(t.find("exp", std::nullopt, "ratio").value, 2.0);
    EXPECT_THROW(t.find("exp", 0.2, "stat"), std::out_of_range);
    EXPECT_THROW(t.add({"exp", 0.1, "bad", 1.0, -1.0, 1, 0}), std::invalid_argument);
    const CsvTable csv = to_csv(t);
    EXPECT_EQ(csv.header.size(), 7u);
    EXPECT_EQ(csv.rows[1][1], "");
}

TEST(ResultTable, EmitWritesSidecar) {
    const auto dir = std::filesystem::path(::testing::TempDir()) / "emit_test";
    ResultTable t;
    t.add({"exp", 0.1, "stat", 1.5, 0.1, 10, 0});
    emit_results(t, dir, "table", {42, "00ff00ff00ff00ff", "converge"});
    std::ifstream csv(dir / "table.csv", std::ios::binary);
    std::stringstream body;
    body << csv.rdbuf();
    EXPECT_EQ(body.str(), render_csv(to_csv(t)));
    const auto meta = nlohmann::json::parse(std::ifstream(dir / "table.meta.json"));
    EXPECT_EQ(meta.at("seed").get<std::uint64_t>(), 42u);
    EXPECT_EQ(meta.at("version").get<std::string>(), version());
    EXPECT_EQ(meta.at("config_hash").get<std::string>(), "00ff00ff00ff00ff");
}
