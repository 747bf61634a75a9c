#include "loggle/csv.hpp"

#include "loggle/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace loggle {

namespace {

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    s = s.substr(first, last - first + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

double parse_number(const std::string& field, std::size_t line, std::size_t col)
{
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    if (!field.empty() && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, value);
    if (field.empty() || res.ec != std::errc() || res.ptr != end) {
        throw InvalidDataError("line " + std::to_string(line) + ", column " + std::to_string(col) +
                               ": cannot parse '" + field + "' as a number");
    }
    return value;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

TimeSeriesDataset read_dataset_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidDataError("cannot open '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split_csv_line(line);
            break;
        }
    }
    if (header.empty()) throw InvalidDataError("'" + path + "' has no header row");
    if (!header.empty() && header.front().size() >= 3 && header.front().compare(0, 3, "\xEF\xBB\xBF") == 0) {
        header.front().erase(0, 3);
    }
    const bool has_time = header.front() == "time";
    std::vector<std::string> names(header.begin() + (has_time ? 1 : 0), header.end());
    if (names.empty()) throw InvalidDataError("'" + path + "' has no variable columns");

    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw InvalidDataError("line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                   " fields, expected " + std::to_string(header.size()));
        }
        std::vector<double> row;
        row.reserve(names.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const double v = parse_number(fields[c], line_no, c + 1);
            if (has_time && c == 0) {
                times.push_back(v);
            } else {
                row.push_back(v);
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidDataError("'" + path + "' has no data rows");

    Matrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < names.size(); ++c) {
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    TimeGrid grid = has_time ? TimeGrid(std::move(times)) : TimeGrid::uniform(rows.size());
    return TimeSeriesDataset(std::move(values), std::move(grid), std::move(names));
}

void write_dataset_csv(const std::string& path, const TimeSeriesDataset& data, bool with_time)
{
    std::ofstream out(path);
    if (!out) throw InvalidDataError("cannot write '" + path + "'");
    if (with_time) out << "time";
    for (std::size_t c = 0; c < data.cols(); ++c) out << ((with_time || c > 0) ? "," : "") << data.names()[c];
    out << '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        if (with_time) out << format_double(data.grid()[r]);
        for (std::size_t c = 0; c < data.cols(); ++c) {
            out << ((with_time || c > 0) ? "," : "")
                << format_double(data.values()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        }
        out << '\n';
    }
}

std::map<std::string, std::string> read_labels_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidDataError("cannot open '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) {
            throw InvalidDataError("line " + std::to_string(line_no) + " of '" + path + "' must have two fields");
        }
        if (line_no == 1 && fields[0] == "name") continue;
        out[fields[0]] = fields[1];
    }
    return out;
}

}  // namespace loggle
