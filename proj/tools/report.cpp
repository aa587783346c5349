#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <stdexcept>

#include "isingclt/errors.hpp"
#include "isingclt/version.hpp"

namespace isingclt::cli {

Format parse_format(const std::string& name) {
    if (name == "csv") return Format::Csv;
    if (name == "json") return Format::Json;
    throw ValidationError("unknown output format '" + name + "' (expected csv or json)");
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size())
        throw std::logic_error("table '" + name + "': row width does not match header");
    rows.push_back(std::move(row));
}

Report::Report(std::string command, Json config) : command_(std::move(command)), config_(std::move(config)) {}

Table& Report::table(std::string name, std::vector<std::string> columns) {
    tables_.push_back(Table{std::move(name), std::move(columns), {}});
    return tables_.back();
}

std::string version_line() { return std::string("ising-clt ") + kVersion; }

void write_preamble(std::ostream& os, const std::string& command, const Json& config) {
    os << "# " << version_line() << '\n';
    os << "# command: " << command << '\n';
    os << "# config: " << config.dump() << '\n';
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

struct CsvCell {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double x) const { return format_number(x); }
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(std::uint64_t x) const { return std::to_string(x); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return csv_escape(s); }
};

struct JsonCell {
    Json operator()(std::monostate) const { return nullptr; }
    Json operator()(double x) const {
        if (!std::isfinite(x)) return nullptr;
        // Round through the printed form so JSON and CSV carry the same digits.
        return std::strtod(format_number(x).c_str(), nullptr);
    }
    Json operator()(std::int64_t x) const { return x; }
    Json operator()(std::uint64_t x) const { return x; }
    Json operator()(bool b) const { return b; }
    Json operator()(const std::string& s) const { return s; }
};

}  // namespace

void Report::write(std::ostream& os, Format format) const {
    if (format == Format::Csv) {
        write_preamble(os, command_, config_);
        for (const Table& t : tables_) {
            os << "# table: " << t.name << '\n';
            for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
            os << '\n';
            for (const auto& row : t.rows) {
                for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << std::visit(CsvCell{}, row[c]);
                os << '\n';
            }
        }
        return;
    }
    Json doc;
    doc["version"] = version_line();
    doc["command"] = command_;
    doc["config"] = config_;
    Json tables = Json::object();
    for (const Table& t : tables_) {
        Json rows = Json::array();
        for (const auto& row : t.rows) {
            Json obj = Json::object();
            for (std::size_t c = 0; c < row.size(); ++c) obj[t.columns[c]] = std::visit(JsonCell{}, row[c]);
            rows.push_back(std::move(obj));
        }
        tables[t.name] = std::move(rows);
    }
    doc["tables"] = std::move(tables);
    os << doc.dump(2) << '\n';
}

}  // namespace isingclt::cli
