#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "replens/analysis.hpp"
#include "replens/model.hpp"
#include "replens/pde_oracle.hpp"

namespace replens::cli {

enum ExitCode : int {
    kSuccess = 0,
    kExtinctBeforeRange = 2,
    kInvalidInput = 3,
    kOracleInstability = 4,
};

/// `lo:hi:step`, inclusive of hi up to rounding.
struct Range {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    std::vector<double> values() const;
};

Range parse_range(const std::string& text);

/// Datum literals:
///   gaussian:a=<r>,m=<r>
///   mixture:<w1>*gaussian:a=..,m=..;<w2>*gaussian:...
///   table:<path.csv>            two columns x,u0; an optional header line
///   exponential:rate=<r>,m=<r>  Laplace density (rate/2) exp(-rate |y - m|)
/// `custom` is reserved for library use. Throws DatumError(malformed) on bad input.
InitialDatum parse_datum_literal(const std::string& text);

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Comma separated, `\n` line ends, no quoting, header mandatory.
void write_csv(std::ostream& os, const CsvTable& table);
CsvTable read_csv(std::istream& is);

TabulatedDatum read_table(const std::filesystem::path& path);

nlohmann::json to_json(const ConvergenceReport& r);
nlohmann::json to_json(const ErrorReport& r);
nlohmann::json to_json(std::span<const PhaseRow> rows, double sigma);

/// Directory holding the published JSON schema files.
std::filesystem::path schema_dir();

/// Entry point behind the `replens` executable. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace replens::cli
