#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace wcoda::cli {

/// Everything a subcommand needs. Round-trips through a plain `key = value` file; every
/// run writes its resolved copy as config.txt beside the outputs.
struct RunConfig {
    std::string command;

    // input
    std::string input;
    std::string format = "csv";
    std::string sex = "female";
    double radix = 100000.0;

    // model
    double kappa = 0.0;
    std::string kappa_grid = "0:0.3:0.001";
    std::size_t k = 6;
    std::string k_rule = "fixed";
    std::size_t evr_max_k = 0;
    std::string score_basis = "unweighted";
    bool closure = true;

    // forecasting and intervals
    std::size_t horizons = 10;
    std::size_t replicates = 1000;
    std::uint64_t seed = 20240101;
    std::vector<double> nu{0.2};

    // backtesting
    std::string plan = "2000:2010:2020";
    std::string segment = "test";
    std::string criterion = "kld";
    int fit_start = 0; ///< 0 = first data year

    // annuities
    std::string ages = "60:105:5";
    std::string maturities = "5:30:5";
    double rate = 0.03;

    // synthetic fixtures
    std::string kind = "regime_change";

    // reporting
    std::string run;
    bool sqrt = false;
    bool plot_data = false;

    std::size_t threads = 1;
    std::string out = ".";
};

std::string serialize(const RunConfig& config);

/// Reads `key = value` lines; blank lines and `#` comments are ignored. Unknown keys and
/// malformed values raise ParseError with the line number.
RunConfig parse_run_config(std::istream& in, RunConfig base = {});

/// Shortest text that reads back to the same double.
std::string format_double(double value);

} // namespace wcoda::cli
