#include "diffsim/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace diffsim {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, sep)) out.push_back(trim(field));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    const auto res = std::from_chars(begin, s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line) + ": ";
}

} // namespace

ZeroCouponCurve read_curve_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    std::size_t i = 0;
    while (i < lines.size() && trim(lines[i]).empty()) ++i;
    if (i == lines.size()) throw IoError(path.string() + ": empty curve file");
    const auto header = split(trim(lines[i]), ',');
    if (header.size() != 2 || header[0] != "maturity_years" || header[1] != "zero_rate")
        throw IoError(where(path, i + 1) + "expected header 'maturity_years,zero_rate'");
    std::vector<CurvePoint> points;
    for (++i; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        CurvePoint p{};
        if (fields.size() != 2 || !parse_number(fields[0], p.maturity) || !parse_number(fields[1], p.rate))
            throw IoError(where(path, i + 1) + "expected two numeric fields");
        points.push_back(p);
    }
    if (points.empty()) throw IoError(path.string() + ": curve has no data rows");
    try {
        return ZeroCouponCurve::from_rates(std::move(points));
    } catch (const std::invalid_argument& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::vector<double> read_series_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    std::vector<double> values;
    bool first = true;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty()) continue;
        const auto fields = split(line, ',');
        double v = 0.0;
        if (!parse_number(fields.back(), v)) {
            if (first) {
                first = false;
                continue;
            }
            throw IoError(where(path, i + 1) + "non-numeric value '" + fields.back() + "'");
        }
        first = false;
        values.push_back(v);
    }
    if (values.empty()) throw IoError(path.string() + ": series has no data rows");
    return values;
}

void CsvTable::add_row(std::span<const double> values) {
    if (values.size() != header_.size()) throw std::invalid_argument("CsvTable: row width differs from header");
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(format_double(v));
    rows_.push_back(std::move(cells));
}

void CsvTable::add_labeled_row(const std::string& label, std::span<const double> values) {
    if (values.size() + 1 != header_.size()) throw std::invalid_argument("CsvTable: row width differs from header");
    std::vector<std::string> cells{label};
    for (double v : values) cells.push_back(format_double(v));
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    for (std::size_t j = 0; j < header_.size(); ++j) {
        if (j) out += ',';
        out += header_[j];
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += row[j];
        }
        out += '\n';
    }
    return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
    write_text_file(path, str());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        out << text;
        if (!out) throw IoError("write failed for '" + path.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot write '" + path.string() + "'");
    }
}

} // namespace diffsim
