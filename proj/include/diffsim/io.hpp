#pragma once

#include "diffsim/calibration.hpp"

#include <filesystem>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace diffsim {

/// Unreadable, unwritable or malformed files.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// 17 significant digits, '.' decimal separator, locale independent.
std::string format_double(double v);

/// Reads a `maturity_years,zero_rate` CSV (header required, decimal rates).
/// Throws IoError with the offending line number.
ZeroCouponCurve read_curve_csv(const std::filesystem::path& path);

/// Reads a single-column series; a non-numeric first line is taken as a header.
/// With several columns the last one is used.
std::vector<double> read_series_csv(const std::filesystem::path& path);

/// Column-oriented CSV writer. Builds the whole text before touching the
/// file so a failed run leaves no partial output.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::span<const double> values);
    void add_row(std::initializer_list<double> values) { add_row(std::span<const double>(values.begin(), values.size())); }
    /// Row whose first cell is text; the header counts the label column.
    void add_labeled_row(const std::string& label, std::span<const double> values);
    std::string str() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Writes text atomically (temporary file + rename).
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace diffsim
