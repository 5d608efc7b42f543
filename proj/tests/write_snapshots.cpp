// Writes the synthetic snapshots used by the tests as CSV files.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "synthetic.hpp"

int main(int argc, char** argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : ".";
    std::filesystem::create_directories(dir);
    auto put = [&](const char* name, const ftk::MarketSnapshot& s) {
        std::ofstream(dir / name, std::ios::binary) << ftk::serialize_snapshot(s);
        std::cout << (dir / name).string() << " asof " << s.observation_date.to_string() << '\n';
    };
    put("standard.csv", ftk::fixtures::standard_snapshot());
    put("monthly24.csv", ftk::fixtures::monthly_snapshot(24));
    put("seasonal_years.csv", ftk::fixtures::seasonal_year_snapshot());
    put("crossed.csv", ftk::fixtures::crossed_snapshot());
}
