#include "rbeta/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "rbeta/errors.hpp"
#include "rbeta/version.hpp"

namespace rbeta::io {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

std::string where(const std::string& source, std::size_t line) {
    return source + ":" + std::to_string(line) + ": ";
}

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (!s.empty() && *b == '+') {
        ++b;
    }
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

bool is_missing_cell(const std::string& s) {
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    return in;
}

}  // namespace

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        return false;
    }
    for (std::size_t k : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (s[k] < '0' || s[k] > '9') {
            return false;
        }
    }
    const int y = std::stoi(s.substr(0, 4));
    const int m = std::stoi(s.substr(5, 2));
    const int d = std::stoi(s.substr(8, 2));
    if (m < 1 || m > 12 || d < 1) {
        return false;
    }
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    const int limit = kDays[m - 1] + (m == 2 && leap ? 1 : 0);
    return d <= limit;
}

PricePanel parse_panel(std::istream& in, const std::string& source) {
    PricePanel p;
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        auto cells = split_csv(line);
        if (!header) {
            if (cells.size() < 2 || cells[0] != "date") {
                throw InputError(where(source, line_no) +
                                 "header must be 'date' followed by at least one column");
            }
            std::set<std::string> seen;
            for (std::size_t k = 1; k < cells.size(); ++k) {
                if (cells[k].empty()) {
                    throw InputError(where(source, line_no) + "empty column name");
                }
                if (!seen.insert(cells[k]).second) {
                    throw InputError(where(source, line_no) + "duplicate column '" + cells[k] + "'");
                }
                p.columns.push_back(cells[k]);
            }
            p.values.resize(p.columns.size());
            header = true;
            continue;
        }
        if (cells.size() != p.columns.size() + 1) {
            throw InputError(where(source, line_no) + "expected " +
                             std::to_string(p.columns.size() + 1) + " fields, found " +
                             std::to_string(cells.size()));
        }
        const std::string& date = cells[0];
        if (!is_iso_date(date)) {
            throw InputError(where(source, line_no) + "unparseable date '" + date + "'");
        }
        if (!p.dates.empty()) {
            if (date == p.dates.back()) {
                throw InputError(where(source, line_no) + "duplicate date " + date);
            }
            if (date < p.dates.back()) {
                throw InputError(where(source, line_no) + "date " + date + " is not after " +
                                 p.dates.back());
            }
        }
        p.dates.push_back(date);
        for (std::size_t k = 0; k < p.columns.size(); ++k) {
            const std::string& cell = cells[k + 1];
            if (is_missing_cell(cell)) {
                p.values[k].push_back(kMissing);
                continue;
            }
            const auto v = parse_double(cell);
            if (!v) {
                throw InputError(where(source, line_no) + "unparseable value '" + cell +
                                 "' in column " + p.columns[k]);
            }
            p.values[k].push_back(*v);
        }
    }
    if (!header) {
        throw InputError(source + ": empty file");
    }
    if (p.dates.empty()) {
        throw InputError(source + ": no data rows");
    }
    return p;
}

PricePanel read_panel(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_panel(in, path.string());
}

std::map<std::string, int> read_sectors(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::map<std::string, int> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 2) {
            throw InputError(where(path.string(), line_no) + "expected 'ticker,sector'");
        }
        if (line_no == 1 && cells[0] == "ticker") {
            continue;
        }
        int label = -1;
        const auto [ptr, ec] =
            std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), label);
        if (ec != std::errc() || ptr != cells[1].data() + cells[1].size() || label < 0) {
            throw InputError(where(path.string(), line_no) + "sector must be a non-negative integer");
        }
        if (!out.emplace(cells[0], label).second) {
            throw InputError(where(path.string(), line_no) + "duplicate ticker " + cells[0]);
        }
    }
    if (out.empty()) {
        throw InputError(path.string() + ": empty file");
    }
    return out;
}

strat::Universe load_universe(const UniverseFiles& files) {
    const PricePanel prices = read_panel(files.prices);
    const auto idx = std::find(prices.columns.begin(), prices.columns.end(), files.index_column);
    if (idx == prices.columns.end()) {
        throw InputError(files.prices.string() + ": no index column '" + files.index_column + "'");
    }
    const std::size_t index_col = static_cast<std::size_t>(idx - prices.columns.begin());

    strat::Universe u;
    u.dates = prices.dates;
    u.index = prices.values[index_col];
    for (std::size_t d = 0; d < u.index.size(); ++d) {
        if (is_missing(u.index[d]) || !(u.index[d] > 0.0)) {
            throw InputError(files.prices.string() + ": index price missing or non-positive on " +
                             u.dates[d]);
        }
    }
    for (std::size_t k = 0; k < prices.columns.size(); ++k) {
        if (k == index_col) {
            continue;
        }
        for (std::size_t d = 0; d < prices.dates.size(); ++d) {
            const double v = prices.values[k][d];
            if (!is_missing(v) && !(v > 0.0)) {
                throw InputError(files.prices.string() + ": non-positive price for " +
                                 prices.columns[k] + " on " + prices.dates[d]);
            }
        }
        u.tickers.push_back(prices.columns[k]);
        u.prices.push_back(prices.values[k]);
    }
    if (u.tickers.empty()) {
        throw InputError(files.prices.string() + ": no stock columns");
    }

    if (files.caps) {
        const PricePanel caps = read_panel(*files.caps);
        if (caps.dates != prices.dates) {
            throw InputError(files.caps->string() + ": dates differ from the price file");
        }
        for (const auto& t : u.tickers) {
            const auto it = std::find(caps.columns.begin(), caps.columns.end(), t);
            if (it == caps.columns.end()) {
                throw InputError(files.caps->string() + ": no column for " + t);
            }
            u.caps.push_back(caps.values[static_cast<std::size_t>(it - caps.columns.begin())]);
        }
    }
    if (files.sectors) {
        const auto labels = read_sectors(*files.sectors);
        for (const auto& t : u.tickers) {
            const auto it = labels.find(t);
            if (it == labels.end()) {
                throw InputError(files.sectors->string() + ": no sector for " + t);
            }
            u.sectors.push_back(it->second);
        }
    }
    u.validate();
    return u;
}

// ------------------------------------------------------------- config ----

namespace {

using boost::property_tree::ptree;

struct ConfigReader {
    const ptree& section;
    std::string name;
    std::string source;
    std::set<std::string> used;

    const std::string* raw(const std::string& key) {
        const auto it = section.find(key);
        if (it == section.not_found()) {
            return nullptr;
        }
        used.insert(key);
        return &it->second.data();
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError(source + ": [" + name + "] " + key + ": " + what);
    }

    void number(const std::string& key, double& out) {
        if (const auto* s = raw(key)) {
            const auto v = parse_double(trim(*s));
            if (!v) fail(key, "expected a number, got '" + *s + "'");
            out = *v;
        }
    }

    template <typename Int>
    void integer(const std::string& key, Int& out) {
        if (const auto* s = raw(key)) {
            const std::string t = trim(*s);
            Int v{};
            const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
            if (ec != std::errc() || ptr != t.data() + t.size()) {
                fail(key, "expected an integer, got '" + *s + "'");
            }
            out = v;
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (const auto* s = raw(key)) {
            const std::string t = trim(*s);
            if (t == "true" || t == "1" || t == "yes") {
                out = true;
            } else if (t == "false" || t == "0" || t == "no") {
                out = false;
            } else {
                fail(key, "expected a boolean, got '" + *s + "'");
            }
        }
    }

    template <typename F>
    void text(const std::string& key, F&& apply) {
        if (const auto* s = raw(key)) {
            try {
                apply(trim(*s));
            } catch (const std::exception& e) {
                fail(key, e.what());
            }
        }
    }

    void check_unknown() const {
        for (const auto& [key, value] : section) {
            if (!used.count(key)) {
                fail(key, "unknown key");
            }
        }
    }
};

mc::LevelMapping parse_mapping(const std::string& s) {
    if (s == "reactive") return mc::LevelMapping::Reactive;
    if (s == "specific") return mc::LevelMapping::Specific;
    if (s == "slow") return mc::LevelMapping::Slow;
    throw ConfigError("level mapping must be reactive, specific or slow");
}

std::string mapping_name(mc::LevelMapping m) {
    switch (m) {
        case mc::LevelMapping::Reactive: return "reactive";
        case mc::LevelMapping::Specific: return "specific";
        case mc::LevelMapping::Slow: return "slow";
    }
    return "reactive";
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
    ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(source + ": line " + std::to_string(e.line()) + ": " + e.message());
    }
    RunConfig c;
    static const std::set<std::string> kSections = {"reactive", "montecarlo", "backtest", "run",
                                                    "paths"};
    for (const auto& [name, sec] : tree) {
        if (!kSections.count(name) || (!sec.data().empty() && sec.empty())) {
            throw ConfigError(source + ": unknown section or top-level key '" + name + "'");
        }
    }
    const ptree empty;
    auto section = [&](const std::string& name) -> const ptree& {
        const auto it = tree.find(name);
        return it == tree.not_found() ? empty : it->second;
    };

    {
        ConfigReader r{section("reactive"), "reactive", source, {}};
        auto& p = c.reactive;
        r.number("lambda_s", p.lambda_s);
        r.number("lambda_f", p.lambda_f);
        r.number("lambda_sigma", p.lambda_sigma);
        r.number("lambda_beta", p.lambda_beta);
        r.number("ell", p.ell);
        r.number("ell_prime", p.ell_prime);
        r.number("phi", p.phi);
        r.number("elasticity_lo", p.elasticity_lo);
        r.number("elasticity_hi", p.elasticity_hi);
        r.number("elasticity_slope", p.elasticity_slope);
        r.number("elasticity_plateau", p.elasticity_plateau);
        r.boolean("renormalize_by_index_vol", p.renormalize_by_index_vol);
        r.check_unknown();
    }
    {
        ConfigReader r{section("run"), "run", source, {}};
        r.integer("seed", c.seed);
        r.integer("burn_in", c.burn_in);
        r.text("index_column", [&](const std::string& s) { c.index_column = s; });
        r.check_unknown();
    }
    {
        ConfigReader r{section("montecarlo"), "montecarlo", source, {}};
        auto& m = c.montecarlo;
        r.text("model", [&](const std::string& s) { m.model = mc::parse_model(s); });
        r.integer("T", m.T);
        r.integer("n_paths", m.n_paths);
        r.number("stock_vol", m.stock_vol);
        r.boolean("stock_vol_is_residual", m.stock_vol_is_residual);
        r.number("index_vol", m.index_vol);
        r.number("beta", m.beta);
        r.integer("t_dof", m.t_dof);
        r.number("ou_relaxation", m.ou_relaxation);
        r.number("ou_volvol", m.ou_volvol);
        r.number("annualization", m.annualization);
        r.number("initial_price", m.initial_price);
        r.number("return_floor", m.return_floor);
        r.text("level_mapping", [&](const std::string& s) { m.level_mapping = parse_mapping(s); });
        r.check_unknown();
    }
    {
        ConfigReader r{section("backtest"), "backtest", source, {}};
        auto& b = c.backtest;
        r.text("strategy", [&](const std::string& s) { b.strategy = strat::parse_strategy(s); });
        r.text("beta_source",
               [&](const std::string& s) { b.beta_source = strat::parse_beta_source(s); });
        double p = std::numeric_limits<double>::quiet_NaN();
        r.number("p", p);
        if (!std::isnan(p)) b.p = p;
        r.boolean("long_high_beta", b.long_high_beta);
        r.integer("reversal_window", b.reversal_window);
        r.integer("momentum_window", b.momentum_window);
        r.integer("corr_window", b.corr_window);
        r.check_unknown();
    }
    for (const auto& [key, value] : section("paths")) {
        c.paths[key] = trim(value.data());
    }

    c.montecarlo.seed = c.seed;
    c.montecarlo.reactive = c.reactive;
    c.backtest.reactive = c.reactive;
    c.backtest.burn_in = c.burn_in;
    c.validate();
    return c;
}

RunConfig read_config(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_config(in, path.string());
}

void RunConfig::validate() const {
    reactive.validate();
    montecarlo.validate();
    if (backtest.p && !(*backtest.p > 0.0 && *backtest.p <= 0.5)) {
        throw ConfigError("backtest p must lie in (0, 0.5]");
    }
    if (backtest.reversal_window == 0 || backtest.momentum_window == 0) {
        throw ConfigError("lookback windows must be positive");
    }
    if (backtest.corr_window < 2) {
        throw ConfigError("correlation window must be at least 2");
    }
    if (index_column.empty()) {
        throw ConfigError("index column name must not be empty");
    }
}

Json RunConfig::to_json() const {
    Json j;
    const auto& r = reactive;
    j["reactive"] = {{"lambda_s", r.lambda_s},
                     {"lambda_f", r.lambda_f},
                     {"lambda_sigma", r.lambda_sigma},
                     {"lambda_beta", r.lambda_beta},
                     {"ell", r.ell},
                     {"ell_prime", r.ell_prime},
                     {"phi", r.phi},
                     {"elasticity_lo", r.elasticity_lo},
                     {"elasticity_hi", r.elasticity_hi},
                     {"elasticity_slope", r.elasticity_slope},
                     {"elasticity_plateau", r.elasticity_plateau},
                     {"renormalize_by_index_vol", r.renormalize_by_index_vol}};
    const auto& m = montecarlo;
    j["montecarlo"] = {{"model", mc::model_name(m.model)},
                       {"T", m.T},
                       {"n_paths", m.n_paths},
                       {"stock_vol", m.stock_vol},
                       {"stock_vol_is_residual", m.stock_vol_is_residual},
                       {"index_vol", m.index_vol},
                       {"beta", m.beta},
                       {"t_dof", m.t_dof},
                       {"ou_relaxation", m.ou_relaxation},
                       {"ou_volvol", m.ou_volvol},
                       {"annualization", m.annualization},
                       {"initial_price", m.initial_price},
                       {"return_floor", m.return_floor},
                       {"level_mapping", mapping_name(m.effective_level_mapping())}};
    const auto& b = backtest;
    j["backtest"] = {{"strategy", strat::strategy_name(b.strategy)},
                     {"beta_source", strat::beta_source_name(b.beta_source)},
                     {"p", b.p.value_or(strat::default_quantile(b.strategy))},
                     {"long_high_beta", b.long_high_beta},
                     {"reversal_window", b.reversal_window},
                     {"momentum_window", b.momentum_window},
                     {"corr_window", b.corr_window}};
    j["run"] = {{"seed", seed}, {"burn_in", burn_in}, {"index_column", index_column}};
    Json paths_json = Json::object();
    for (const auto& [k, v] : paths) paths_json[k] = v;
    j["paths"] = paths_json;
    return j;
}

// ------------------------------------------------------------ outputs ----

std::string sha256_bytes(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw NumericalError("SHA-256 computation failed");
    }
    std::ostringstream out;
    for (unsigned int k = 0; k < len; ++k) {
        out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[k]);
    }
    return out.str();
}

std::string sha256_file(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_bytes(buf.str());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write '" + tmp.string() + "'");
        }
        out << text;
        if (!out) {
            throw InputError("write failed for '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

void write_json(const std::filesystem::path& path, const Json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
    if (header.empty()) {
        throw InputError("CSV header must not be empty");
    }
    row(header);
    rows_ = 0;
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) {
        throw InputError("CSV row width differs from the header");
    }
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) text_ += ',';
        text_ += cells[k];
    }
    text_ += '\n';
    ++rows_;
}

std::string CsvWriter::num(double v) {
    if (is_missing(v)) {
        return {};
    }
    std::ostringstream out;
    out << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return out.str();
}

void CsvWriter::save(const std::filesystem::path& path) const { write_text(path, text_); }

void write_xy(const std::filesystem::path& path, const std::string& x_name,
              const std::vector<double>& x, const std::string& y_name,
              const std::vector<double>& y, const Json& fit) {
    if (x.size() != y.size()) {
        throw InputError("plot data: x and y lengths differ");
    }
    CsvWriter w({x_name, y_name});
    for (std::size_t k = 0; k < x.size(); ++k) {
        w.row({CsvWriter::num(x[k]), CsvWriter::num(y[k])});
    }
    w.save(path);
    if (!fit.empty()) {
        auto side = path;
        side.replace_extension(".fit.json");
        write_json(side, fit);
    }
}

Json Manifest::to_json() const {
    Json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["seed"] = seed;
    j["config"] = config;
    auto digests = [](const std::vector<std::filesystem::path>& files) {
        Json arr = Json::array();
        for (const auto& f : files) {
            arr.push_back({{"path", f.string()}, {"sha256", sha256_file(f)}});
        }
        return arr;
    };
    j["inputs"] = digests(inputs);
    j["outputs"] = digests(outputs);
    return j;
}

}  // namespace rbeta::io
