#include "wcoda/lifetable.hpp"

#include "wcoda/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>

namespace wcoda {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Comma-delimited lines keep empty fields so that "1751,,0.2" is reported as missing.
std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> tokens;
    if (line.find(',') != std::string_view::npos) {
        std::size_t start = 0;
        while (true) {
            const auto end = line.find(',', start);
            tokens.push_back(trim(line.substr(start, end == std::string_view::npos ? end : end - start)));
            if (end == std::string_view::npos) break;
            start = end + 1;
        }
        return tokens;
    }
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i == line.size()) break;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        tokens.push_back(line.substr(i, j - i));
        i = j;
    }
    return tokens;
}

bool blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

int parse_int(std::string_view tok, std::size_t line, const char* what) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(std::string("invalid ") + what + " '" + std::string(tok) + "'", line);
    return value;
}

int parse_age(std::string_view tok, std::size_t line) {
    if (!tok.empty() && tok.back() == '+') tok.remove_suffix(1);
    return parse_int(tok, line, "age");
}

double parse_value(std::string_view tok, std::size_t line) {
    if (tok.empty() || tok == "." || tok == "NA" || tok == "NaN" || tok == "nan")
        throw ParseError("missing value", line);
    if (tok.front() == '+') tok.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(value))
        throw ParseError("invalid number '" + std::string(tok) + "'", line);
    if (value < 0.0)
        throw DomainError("line " + std::to_string(line) + ": negative value " + std::string(tok));
    return value;
}

struct Cells {
    std::map<int, std::map<int, double>> by_year;

    void add(int year, int age, double value, std::size_t line) {
        auto [it, inserted] = by_year[year].emplace(age, value);
        if (!inserted)
            throw StructuralError("line " + std::to_string(line) + ": duplicate cell (" +
                                  std::to_string(year) + ", " + std::to_string(age) + ")");
    }

    void to_matrix(std::vector<int>& years, std::vector<int>& ages, Eigen::MatrixXd& m) const {
        if (by_year.empty()) throw StructuralError("table has no data rows");
        years.clear();
        for (const auto& [year, row] : by_year) {
            if (!years.empty() && year != years.back() + 1)
                throw StructuralError("years are not contiguous: " + std::to_string(years.back()) +
                                      " is followed by " + std::to_string(year));
            years.push_back(year);
        }
        const auto& first = by_year.begin()->second;
        ages.clear();
        for (const auto& [age, v] : first) {
            if (age != static_cast<int>(ages.size()))
                throw StructuralError("ages must be contiguous from 0; found age " +
                                      std::to_string(age) + " at position " +
                                      std::to_string(ages.size()));
            ages.push_back(age);
        }
        m.resize(static_cast<Eigen::Index>(years.size()), static_cast<Eigen::Index>(ages.size()));
        Eigen::Index r = 0;
        for (const auto& [year, row] : by_year) {
            if (row.size() != ages.size())
                throw StructuralError("year " + std::to_string(year) + " has " +
                                      std::to_string(row.size()) + " ages, expected " +
                                      std::to_string(ages.size()));
            Eigen::Index c = 0;
            for (const auto& [age, v] : row) {
                if (age != c)
                    throw StructuralError("year " + std::to_string(year) + " has non-contiguous ages");
                m(r, c++) = v;
            }
            ++r;
        }
    }
};

std::optional<std::size_t> find_column(const std::vector<std::string>& header, std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

LifeTableSeries close_counts(std::vector<int> years, std::vector<int> ages, Eigen::MatrixXd counts,
                             double radix, Sex sex) {
    LifeTableSeries out;
    out.years = std::move(years);
    out.ages = std::move(ages);
    out.counts = std::move(counts);
    out.radix = radix;
    out.sex = sex;
    for (Eigen::Index r = 0; r < out.counts.rows(); ++r) {
        const double total = out.counts.row(r).sum();
        if (!(total > 0.0))
            throw DomainError("year " + std::to_string(out.years[static_cast<std::size_t>(r)]) +
                              " has no deaths");
        out.counts.row(r) *= radix / total;
        out.repaired_cells += repair_and_close(out.counts.row(r), radix);
    }
    return out;
}

} // namespace

Sex parse_sex(std::string_view name) {
    const auto s = lower(name);
    if (s == "female" || s == "f") return Sex::female;
    if (s == "male" || s == "m") return Sex::male;
    if (s == "total" || s == "t") return Sex::total;
    throw DomainError("unknown sex '" + std::string(name) + "'");
}

std::string_view to_string(Sex sex) {
    switch (sex) {
    case Sex::female: return "female";
    case Sex::male: return "male";
    case Sex::total: return "total";
    }
    return "total";
}

TableFormat parse_table_format(std::string_view name) {
    const auto s = lower(name);
    if (s == "hmd_deaths") return TableFormat::hmd_deaths;
    if (s == "hmd_qx") return TableFormat::hmd_qx;
    if (s == "csv") return TableFormat::csv;
    throw DomainError("unknown table format '" + std::string(name) + "'");
}

void MortalityInputs::validate() const {
    if (years.empty() || ages.empty()) throw StructuralError("empty mortality table");
    if (qx.rows() != static_cast<Eigen::Index>(years.size()) ||
        qx.cols() != static_cast<Eigen::Index>(ages.size()))
        throw StructuralError("qx shape does not match the year/age axes");
    for (std::size_t i = 1; i < years.size(); ++i)
        if (years[i] != years[i - 1] + 1) throw StructuralError("years are not contiguous");
    for (std::size_t i = 0; i < ages.size(); ++i)
        if (ages[i] != static_cast<int>(i)) throw StructuralError("ages must be contiguous from 0");
    if (!(radix > 0.0)) throw DomainError("radix must be positive");
    const Eigen::Index last = qx.cols() - 1;
    for (Eigen::Index r = 0; r < qx.rows(); ++r) {
        for (Eigen::Index c = 0; c < qx.cols(); ++c) {
            const double q = qx(r, c);
            const bool ok = c == last ? std::abs(q - 1.0) <= 1e-9 : (q >= 0.0 && q < 1.0);
            if (!ok)
                throw DomainError("q(" + std::to_string(years[static_cast<std::size_t>(r)]) + ", " +
                                  std::to_string(c) + ") = " + std::to_string(q) +
                                  (c == last ? " but the terminal age must have q = 1"
                                             : " outside [0, 1)"));
        }
    }
}

void LifeTableSeries::validate() const {
    if (years.empty() || ages.empty()) throw StructuralError("empty life table");
    if (counts.rows() != static_cast<Eigen::Index>(years.size()) ||
        counts.cols() != static_cast<Eigen::Index>(ages.size()))
        throw StructuralError("count matrix shape does not match the year/age axes");
    for (std::size_t i = 1; i < years.size(); ++i)
        if (years[i] != years[i - 1] + 1) throw StructuralError("years are not contiguous");
    for (std::size_t i = 0; i < ages.size(); ++i)
        if (ages[i] != static_cast<int>(i)) throw StructuralError("ages must be contiguous from 0");
    if (!(radix > 0.0)) throw DomainError("radix must be positive");
    for (Eigen::Index r = 0; r < counts.rows(); ++r) {
        for (Eigen::Index c = 0; c < counts.cols(); ++c)
            if (!(counts(r, c) > 0.0) || !std::isfinite(counts(r, c)))
                throw DomainError("non-positive death count at (" +
                                  std::to_string(years[static_cast<std::size_t>(r)]) + ", " +
                                  std::to_string(c) + ")");
        if (std::abs(counts.row(r).sum() - radix) > 1e-6 * radix)
            throw DomainError("year " + std::to_string(years[static_cast<std::size_t>(r)]) +
                              " does not sum to the radix");
    }
}

LifeTableSeries LifeTableSeries::slice_years(std::size_t first, std::size_t count) const {
    if (first + count > years.size() || count == 0)
        throw DomainError("year slice out of range");
    LifeTableSeries out;
    out.years.assign(years.begin() + static_cast<std::ptrdiff_t>(first),
                     years.begin() + static_cast<std::ptrdiff_t>(first + count));
    out.ages = ages;
    out.counts = counts.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
    out.radix = radix;
    out.sex = sex;
    return out;
}

std::size_t LifeTableSeries::year_index(int year) const {
    if (years.empty() || year < years.front() || year > years.back())
        throw DomainError("year " + std::to_string(year) + " is outside the series");
    return static_cast<std::size_t>(year - years.front());
}

ParsedTable parse_life_table(std::istream& in, TableFormat format, Sex sex, double radix) {
    if (!(radix > 0.0)) throw DomainError("radix must be positive");
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;

    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        auto tokens = tokenize(line);
        std::vector<std::string> names;
        for (auto t : tokens) names.push_back(lower(t));
        if (format == TableFormat::csv) {
            header = std::move(names);
            break;
        }
        if (find_column(names, "year") && find_column(names, "age")) {
            header = std::move(names);
            break;
        }
    }
    if (header.empty()) throw ParseError("no header row found", line_no);

    const auto year_col = find_column(header, "year");
    const auto age_col = find_column(header, "age");
    if (!year_col || !age_col) throw ParseError("header must name Year and Age columns", line_no);

    std::optional<std::size_t> value_col;
    bool values_are_counts = false;
    switch (format) {
    case TableFormat::csv:
        if (header.size() != 3 || *year_col != 0 || *age_col != 1)
            throw ParseError("CSV header must be year,age,value or year,age,count", line_no);
        if (header[2] == "value") {
            values_are_counts = false;
        } else if (header[2] == "count") {
            values_are_counts = true;
        } else {
            throw ParseError("unknown CSV value column '" + header[2] + "'", line_no);
        }
        value_col = 2;
        break;
    case TableFormat::hmd_qx:
        value_col = find_column(header, "qx");
        if (!value_col) value_col = find_column(header, to_string(sex));
        break;
    case TableFormat::hmd_deaths:
        values_are_counts = true;
        value_col = find_column(header, "dx");
        if (!value_col) value_col = find_column(header, to_string(sex));
        break;
    }
    if (!value_col)
        throw ParseError("no value column for sex '" + std::string(to_string(sex)) + "'", line_no);

    Cells cells;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        const auto tokens = tokenize(line);
        if (tokens.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(tokens.size()),
                             line_no);
        const int year = parse_int(tokens[*year_col], line_no, "year");
        const int age = parse_age(tokens[*age_col], line_no);
        for (std::size_t i = 0; i < tokens.size(); ++i)
            if (i != *year_col && i != *age_col && (tokens[i].empty() || tokens[i] == "."))
                throw ParseError("missing value in column '" + header[i] + "'", line_no);
        const double value = parse_value(tokens[*value_col], line_no);
        cells.add(year, age, value, line_no);
    }

    std::vector<int> years, ages;
    Eigen::MatrixXd values;
    cells.to_matrix(years, ages, values);

    if (values_are_counts) return close_counts(std::move(years), std::move(ages), std::move(values), radix, sex);

    MortalityInputs inputs;
    inputs.years = std::move(years);
    inputs.ages = std::move(ages);
    inputs.qx = std::move(values);
    inputs.radix = radix;
    inputs.sex = sex;
    for (Eigen::Index r = 0; r < inputs.qx.rows(); ++r)
        for (Eigen::Index c = 0; c < inputs.qx.cols(); ++c)
            if (inputs.qx(r, c) > 1.0)
                throw DomainError("q(" + std::to_string(inputs.years[static_cast<std::size_t>(r)]) +
                                  ", " + std::to_string(c) + ") exceeds 1");
    return inputs;
}

std::size_t repair_and_close(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, double radix) {
    std::size_t repaired = 0;
    for (Eigen::Index c = 0; c < row.size(); ++c) {
        if (!(row[c] >= kCountFloor)) {
            row[c] = kCountFloor;
            ++repaired;
        }
    }
    if (repaired > 0) row *= radix / row.sum();
    return repaired;
}

LifeTableSeries derive_death_counts(const MortalityInputs& inputs) {
    inputs.validate();
    LifeTableSeries out;
    out.years = inputs.years;
    out.ages = inputs.ages;
    out.radix = inputs.radix;
    out.sex = inputs.sex;
    out.counts.resize(inputs.qx.rows(), inputs.qx.cols());
    const Eigen::Index last = inputs.qx.cols() - 1;
    for (Eigen::Index r = 0; r < inputs.qx.rows(); ++r) {
        double survivors = inputs.radix;
        for (Eigen::Index c = 0; c < last; ++c) {
            const double deaths = survivors * inputs.qx(r, c);
            out.counts(r, c) = deaths;
            survivors -= deaths;
        }
        out.counts(r, last) = survivors;
        out.repaired_cells += repair_and_close(out.counts.row(r), inputs.radix);
    }
    return out;
}

double gini_coefficient(const Eigen::Ref<const Eigen::VectorXd>& deaths) {
    if (deaths.size() == 0) throw DomainError("gini of an empty vector");
    std::vector<double> shares(deaths.data(), deaths.data() + deaths.size());
    for (double v : shares)
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("gini needs nonnegative finite counts");
    std::sort(shares.begin(), shares.end());
    const double total = std::accumulate(shares.begin(), shares.end(), 0.0);
    if (!(total > 0.0)) throw DomainError("gini of an all-zero vector");

    // Trapezoid area under the Lorenz polyline at population fractions i/N.
    const auto n = static_cast<double>(shares.size());
    double cumulative = 0.0, previous = 0.0, area = 0.0;
    for (double s : shares) {
        cumulative += s;
        const double lorenz = cumulative / total;
        area += 0.5 * (previous + lorenz) / n;
        previous = lorenz;
    }
    return 2.0 * (0.5 - area);
}

double life_expectancy_at_birth(const Eigen::Ref<const Eigen::VectorXd>& deaths, double radix,
                                double interval_fraction) {
    if (!(radix > 0.0)) throw DomainError("radix must be positive");
    if (std::abs(deaths.sum() - radix) > 1e-6 * radix)
        throw DomainError("death counts do not sum to the radix");
    double years = 0.0;
    for (Eigen::Index x = 0; x < deaths.size(); ++x)
        years += (static_cast<double>(x) + interval_fraction) * deaths[x];
    return years / radix;
}

void write_counts_csv(std::ostream& out, const LifeTableSeries& series) {
    out << "year,age,count\n";
    char buf[64];
    for (Eigen::Index r = 0; r < series.counts.rows(); ++r) {
        for (Eigen::Index c = 0; c < series.counts.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.6f\n", series.years[static_cast<std::size_t>(r)],
                          series.ages[static_cast<std::size_t>(c)], series.counts(r, c));
            out << buf;
        }
    }
}

} // namespace wcoda
