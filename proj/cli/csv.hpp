#pragma once

#include <fstream>
#include <string>
#include <vector>

/// CSV output: comma separated, '.' decimal point, one leading '#' metadata
/// line carrying the resolved run configuration and seed, then a header row.
/// Numbers are printed with %.17g so equal doubles give equal bytes.

namespace gpsl::cli {

/// Shortest round-trip-exact decimal form of v.
std::string csv_num(double v);

class CsvWriter {
public:
    /// Opens `path` and writes "# <metadata>". Throws ConfigError if the
    /// file cannot be created.
    CsvWriter(const std::string& path, const std::string& metadata);

    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    void line(const std::vector<std::string>& cells);
};

}  // namespace gpsl::cli
