#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace evl::io {

/// Shortest-safe round-trip text for a double: 17 significant digits.
std::string format_double(double x);
/// Empty field for a missing value.
std::string format_optional(const std::optional<double>& x);

/// Builds a CSV document in memory; fields are written as given (no quoting needed for
/// the numeric and identifier columns this project emits).
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void row(const std::vector<std::string>& fields);
    const std::string& str() const { return text_; }

private:
    std::size_t columns_;
    std::string text_;
};

/// Writes to a temporary sibling and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Splits CSV text into rows of fields (no quoting support).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace evl::io
