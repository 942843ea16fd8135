#include "csv.hpp"

#include <cstdio>

#include "gpsl/errors.hpp"

namespace gpsl::cli {

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& metadata)
    : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot create output file: " + path);
    out_ << "# " << metadata << "\n";
}

void CsvWriter::header(const std::vector<std::string>& columns) { line(columns); }

void CsvWriter::row(const std::vector<std::string>& cells) { line(cells); }

void CsvWriter::line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

}  // namespace gpsl::cli
