#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace isingclt::cli {

using Json = nlohmann::ordered_json;

enum class Format { Csv, Json };

Format parse_format(const std::string& name);

/// One table cell. An empty cell is written as an empty CSV field or JSON null.
using Cell = std::variant<std::monostate, double, std::int64_t, std::uint64_t, bool, std::string>;

/// %.12g, with -0 written as 0 and non-finite values as nan / inf / -inf.
std::string format_number(double x);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

/// Everything a subcommand prints: the version line, the resolved
/// configuration and a list of named tables.
class Report {
public:
    Report(std::string command, Json config);

    Table& table(std::string name, std::vector<std::string> columns);
    const std::vector<Table>& tables() const { return tables_; }
    const Json& config() const { return config_; }

    void write(std::ostream& os, Format format) const;

private:
    std::string command_;
    Json config_;
    std::vector<Table> tables_;
};

/// "ising-clt <version>"
std::string version_line();

/// CSV comment lines that open every output file.
void write_preamble(std::ostream& os, const std::string& command, const Json& config);

}  // namespace isingclt::cli
