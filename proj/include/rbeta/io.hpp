#pragma once

// Price panel ingestion, key-value configuration, report writers and run
// manifests.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rbeta/montecarlo.hpp"
#include "rbeta/reactive_volatility.hpp"
#include "rbeta/strategies.hpp"

namespace rbeta::io {

using Json = nlohmann::ordered_json;

/// Wide table: header "date,<col1>,<col2>,...", one row per ISO date.
struct PricePanel {
    std::vector<std::string> dates;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> values;  ///< [column][row], kMissing for empty cells
};

/// True for a valid calendar date written YYYY-MM-DD.
bool is_iso_date(const std::string& s);

/// Parses a wide CSV. Empty, "NA", "NaN" and "null" cells are missing.
/// Errors name `source` and the 1-based line.
PricePanel parse_panel(std::istream& in, const std::string& source);
PricePanel read_panel(const std::filesystem::path& path);

struct UniverseFiles {
    std::filesystem::path prices;
    std::string index_column = "INDEX";
    std::optional<std::filesystem::path> caps;     ///< same layout as prices
    std::optional<std::filesystem::path> sectors;  ///< rows "ticker,sector"
};

/// Builds a universe: the index column is split off, caps must share the
/// price dates and tickers, sector labels are required for every ticker.
strat::Universe load_universe(const UniverseFiles& files);

/// "ticker,sector" lines (header optional); labels are non-negative ints.
std::map<std::string, int> read_sectors(const std::filesystem::path& path);

// ------------------------------------------------------------- config ----

struct RunConfig {
    vol::ReactiveParams reactive;
    mc::McConfig montecarlo;
    strat::BacktestOptions backtest;
    std::size_t burn_in = 250;
    std::uint64_t seed = 1;
    std::string index_column = "INDEX";
    std::map<std::string, std::string> paths;  ///< [paths] section, e.g. prices, caps, sectors

    /// Validates every parameter group; throws ConfigError.
    void validate() const;
    Json to_json() const;
};

/// Sections [reactive], [montecarlo], [backtest], [run], [paths]. Unknown
/// sections or keys and unparseable values raise ConfigError.
RunConfig parse_config(std::istream& in, const std::string& source);
RunConfig read_config(const std::filesystem::path& path);

// ------------------------------------------------------------ outputs ----

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const std::string& bytes);

/// Writes `text` to `path` through a temporary file, creating parent
/// directories.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& doc);

/// CSV with a header row; doubles use max_digits10, kMissing prints empty.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);
    static std::string num(double v);
    void save(const std::filesystem::path& path) const;
    std::size_t rows() const noexcept { return rows_; }
    const std::string& text() const noexcept { return text_; }

private:
    std::size_t width_;
    std::size_t rows_ = 0;
    std::string text_;
};

/// Plot data: x/y columns plus optional fit parameters in a sidecar JSON.
void write_xy(const std::filesystem::path& path, const std::string& x_name,
              const std::vector<double>& x, const std::string& y_name,
              const std::vector<double>& y, const Json& fit = Json::object());

struct Manifest {
    std::string command;
    std::uint64_t seed = 0;
    Json config = Json::object();
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;

    /// Includes the library version and SHA-256 of every input and output.
    Json to_json() const;
};

}  // namespace rbeta::io
