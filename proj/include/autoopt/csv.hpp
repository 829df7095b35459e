#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace autoopt {

// Minimal CSV with `# key=value` comment headers. Fields never contain commas
// here (identifiers and numbers only), so no quoting is implemented.
struct CsvTable {
    std::map<std::string, std::string> annotations;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::out_of_range("csv: no column '" + name + "'");
    }
    const std::string& cell(std::size_t row, const std::string& column) const {
        return rows.at(row).at(column_index(column));
    }
    double number(std::size_t row, const std::string& column) const {
        return std::stod(cell(row, column));
    }
};

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void annotate(const std::string& key, const std::string& value) {
        annotations_.emplace_back(key, value);
    }
    void add_row(const std::vector<std::string>& row) {
        if (row.size() != columns_.size())
            throw std::invalid_argument("csv: row width does not match header");
        rows_.push_back(row);
    }

    static std::string format(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    std::string str() const {
        std::ostringstream os;
        for (const auto& [k, v] : annotations_) os << "# " << k << "=" << v << "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i)
            os << (i ? "," : "") << columns_[i];
        os << "\n";
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
            os << "\n";
        }
        return os.str();
    }

    void write_file(const std::string& path) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + path + " for writing");
        os << str();
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> annotations_;
    std::vector<std::vector<std::string>> rows_;
};

inline CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream is(text);
    std::string line;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body.front() == ' ') body.erase(body.begin());
            const auto eq = body.find('=');
            if (eq != std::string::npos)
                table.annotations[body.substr(0, eq)] = body.substr(eq + 1);
            continue;
        }
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (!have_header) {
            table.columns = fields;
            have_header = true;
        } else {
            if (fields.size() != table.columns.size())
                throw std::runtime_error("csv: ragged row");
            table.rows.push_back(fields);
        }
    }
    if (!have_header) throw std::runtime_error("csv: missing header row");
    return table;
}

inline CsvTable load_csv_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_csv(buf.str());
}

} // namespace autoopt
