#include "koopman/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <vector>

#include "koopman/errors.hpp"

namespace koopman {

namespace {

enum class Family { X, XPlus, Y, YPlus };

struct ColumnRef {
    Family family;
    std::size_t index;  // 0-based within the family
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

ColumnRef classify(std::string_view name, std::size_t column) {
    static const std::array<std::pair<std::string_view, Family>, 4> prefixes{{
        {"xp", Family::XPlus}, {"yp", Family::YPlus}, {"x", Family::X}, {"y", Family::Y}}};
    for (const auto& [prefix, family] : prefixes) {
        if (name.size() <= prefix.size() || name.substr(0, prefix.size()) != prefix) continue;
        const std::string_view digits = name.substr(prefix.size());
        std::size_t idx = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
        if (ec != std::errc() || ptr != digits.data() + digits.size() || idx == 0) continue;
        return {family, idx - 1};
    }
    throw ParseError("unrecognized header column '" + std::string(name) + "'", 1, column);
}

double parse_number(std::string_view field, std::size_t line, std::size_t column) {
    if (field.empty()) throw ParseError("missing field", line, column);
    if (field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("invalid number '" + std::string(field) + "'", line, column);
    if (!std::isfinite(value)) throw ParseError("non-finite value", line, column);
    return value;
}

std::size_t family_count(const std::map<std::size_t, std::size_t>& fam, const char* name) {
    for (std::size_t i = 0; i < fam.size(); ++i)
        if (!fam.count(i))
            throw ParseError(std::string("header is missing column ") + name + std::to_string(i + 1), 1);
    return fam.size();
}

}  // namespace

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

SnapshotSet read_snapshot_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty input: expected a header row", 1);
    ++line_no;
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = split(line);
    std::vector<ColumnRef> columns;
    std::array<std::map<std::size_t, std::size_t>, 4> families;  // family index -> column position
    for (std::size_t c = 0; c < header.size(); ++c) {
        const ColumnRef ref = classify(header[c], c + 1);
        auto& fam = families[static_cast<std::size_t>(ref.family)];
        if (!fam.emplace(ref.index, c).second)
            throw ParseError("duplicate header column '" + std::string(header[c]) + "'", 1, c + 1);
        columns.push_back(ref);
    }
    const std::size_t n = family_count(families[0], "x");
    const std::size_t n_plus = family_count(families[1], "xp");
    const std::size_t p = family_count(families[2], "y");
    const std::size_t p_plus = family_count(families[3], "yp");
    if (n == 0) throw ParseError("header has no state columns", 1);
    if (n_plus != 0 && n_plus != n) throw ParseError("xp column count differs from x column count", 1);
    if (p_plus != 0 && p_plus != p) throw ParseError("yp column count differs from y column count", 1);
    const bool trajectory = n_plus == 0;
    if (trajectory && p_plus != 0) throw ParseError("yp columns need xp columns", 1);

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no, std::min(fields.size(), header.size()) + 1);
        std::vector<double> row(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) row[c] = parse_number(fields[c], line_no, c + 1);
        rows.push_back(std::move(row));
    }

    auto gather = [&](Family fam, std::size_t count, std::size_t first, std::size_t nrows) {
        Eigen::MatrixXd M(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(count));
        const auto& positions = families[static_cast<std::size_t>(fam)];
        for (std::size_t r = 0; r < nrows; ++r)
            for (std::size_t j = 0; j < count; ++j)
                M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = rows[first + r][positions.at(j)];
        return M;
    };

    if (trajectory) {
        if (rows.size() < 2) throw ParseError("trajectory file needs at least two rows", line_no);
        const std::size_t m = rows.size() - 1;
        std::optional<Eigen::MatrixXd> Y, Yp;
        if (p > 0) {
            Y = gather(Family::Y, p, 0, m);
            Yp = gather(Family::Y, p, 1, m);
        }
        return SnapshotSet(gather(Family::X, n, 0, m), gather(Family::X, n, 1, m), std::move(Y), std::move(Yp));
    }
    if (rows.empty()) throw ParseError("no data rows", line_no);
    std::optional<Eigen::MatrixXd> Y, Yp;
    if (p > 0) Y = gather(Family::Y, p, 0, rows.size());
    if (p_plus > 0) Yp = gather(Family::YPlus, p, 0, rows.size());
    return SnapshotSet(gather(Family::X, n, 0, rows.size()), gather(Family::XPlus, n, 0, rows.size()), std::move(Y),
                       std::move(Yp));
}

SnapshotSet read_snapshot_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    return read_snapshot_csv(in);
}

void write_snapshot_csv(std::ostream& out, const SnapshotSet& data) {
    const auto n = data.X().cols();
    const Eigen::Index p = data.Y() ? data.Y()->cols() : 0;
    const bool has_plus = data.Yplus().has_value();
    std::string sep;
    auto name = [&](const char* prefix, Eigen::Index count) {
        for (Eigen::Index j = 0; j < count; ++j) {
            out << sep << prefix << (j + 1);
            sep = ",";
        }
    };
    name("x", n);
    name("xp", n);
    name("y", p);
    if (has_plus) name("yp", p);
    out << "\n";
    for (Eigen::Index k = 0; k < data.X().rows(); ++k) {
        sep.clear();
        auto values = [&](const Eigen::MatrixXd& M) {
            for (Eigen::Index j = 0; j < M.cols(); ++j) {
                out << sep << format_double(M(k, j));
                sep = ",";
            }
        };
        values(data.X());
        values(data.Xplus());
        if (data.Y()) values(*data.Y());
        if (has_plus) values(*data.Yplus());
        out << "\n";
    }
}

}  // namespace koopman
