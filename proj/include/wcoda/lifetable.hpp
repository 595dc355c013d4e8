#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wcoda {

enum class Sex { female, male, total };

Sex parse_sex(std::string_view name);
std::string_view to_string(Sex sex);

inline constexpr double kDefaultRadix = 100000.0;

/// Smallest death count kept after derivation; cells below it are floored and the row re-closed.
inline constexpr double kCountFloor = 1e-6;

/// Death probabilities q_t(x), one row per calendar year.
struct MortalityInputs {
    std::vector<int> years;
    std::vector<int> ages;
    Eigen::MatrixXd qx; // years x ages
    double radix = kDefaultRadix;
    Sex sex = Sex::female;

    /// Throws StructuralError on axis problems and DomainError on q outside [0,1)
    /// below the terminal age or q != 1 at the terminal age.
    void validate() const;
};

/// Life-table death counts d_t(u) under a fixed radix. Rows are years, columns ages.
struct LifeTableSeries {
    std::vector<int> years;
    std::vector<int> ages;
    Eigen::MatrixXd counts;
    double radix = kDefaultRadix;
    Sex sex = Sex::female;
    /// Number of cells raised to kCountFloor when the series was built.
    std::size_t repaired_cells = 0;

    std::size_t num_years() const { return years.size(); }
    std::size_t num_ages() const { return ages.size(); }
    int terminal_age() const { return ages.back(); }

    /// Throws StructuralError / DomainError when the invariants do not hold.
    void validate() const;

    /// Rows [first, first + count) as a new series.
    LifeTableSeries slice_years(std::size_t first, std::size_t count) const;
    /// Index of `year` in `years`; throws DomainError when absent.
    std::size_t year_index(int year) const;
};

enum class TableFormat { hmd_deaths, hmd_qx, csv };

TableFormat parse_table_format(std::string_view name);

using ParsedTable = std::variant<MortalityInputs, LifeTableSeries>;

/// Reads an HMD-style or CSV table.
///
/// hmd_* inputs are whitespace or comma delimited with a header naming Year and Age and
/// either per-sex columns (Female Male Total) or, for hmd_qx, a `qx` column as in HMD
/// period life tables. Lines before the header are skipped. csv inputs carry a
/// `year,age,value` header (death probabilities) or `year,age,count` (death counts).
/// Death counts are closed to `radix` and zero cells repaired on the way in.
ParsedTable parse_life_table(std::istream& in, TableFormat format, Sex sex = Sex::female,
                             double radix = kDefaultRadix);

/// l_0 = radix, d_x = l_x q_x, l_{x+1} = l_x - d_x, per year; then floor-and-close repair.
LifeTableSeries derive_death_counts(const MortalityInputs& inputs);

/// Raises cells below kCountFloor to the floor and rescales the row to `radix`.
/// Returns the number of cells raised.
std::size_t repair_and_close(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, double radix);

/// Gini coefficient of an age-at-death distribution from the discrete Lorenz curve.
double gini_coefficient(const Eigen::Ref<const Eigen::VectorXd>& deaths);

/// e(0) = sum_x (x + a) d_x / radix for ages 0..A-1.
double life_expectancy_at_birth(const Eigen::Ref<const Eigen::VectorXd>& deaths, double radix,
                                double interval_fraction = 0.5);

/// Canonical `year,age,count` CSV with six decimals.
void write_counts_csv(std::ostream& out, const LifeTableSeries& series);

} // namespace wcoda
