#include "cli.hpp"

#include "run_config.hpp"

#include "wcoda/annuity.hpp"
#include "wcoda/error.hpp"
#include "wcoda/evaluation.hpp"
#include "wcoda/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace wcoda::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string num(double v) { return format_double(v); }

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

template <typename T>
T to_number(const std::string& text, const std::string& what) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw UsageError("invalid " + what + " '" + text + "'");
    return value;
}

std::vector<int> int_range(const std::string& text, const std::string& what) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError(what + " must look like lo:hi:step");
    const int lo = to_number<int>(parts[0], what), hi = to_number<int>(parts[1], what),
              step = to_number<int>(parts[2], what);
    if (step <= 0 || hi < lo) throw UsageError(what + " needs lo <= hi and a positive step");
    std::vector<int> out;
    for (int v = lo; v <= hi; v += step) out.push_back(v);
    return out;
}

std::vector<double> parse_grid(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw UsageError("kappa grid must look like lo:hi:step");
    return kappa_grid(to_number<double>(parts[0], "kappa grid"), to_number<double>(parts[1], "kappa grid"),
                      to_number<double>(parts[2], "kappa grid"));
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path resolve_input(const RunConfig& cfg) {
    if (cfg.input.empty()) throw UsageError("--input is required");
    fs::path path(cfg.input);
    if (fs::exists(path) || path.is_absolute()) return path;
    if (const char* dir = std::getenv("WCODA_DATA_DIR")) {
        const fs::path candidate = fs::path(dir) / path;
        if (fs::exists(candidate)) return candidate;
    }
    return path;
}

LifeTableSeries load_series(const RunConfig& cfg, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open input " + path.string());
    const auto parsed = parse_life_table(in, parse_table_format(cfg.format), parse_sex(cfg.sex), cfg.radix);
    if (const auto* q = std::get_if<MortalityInputs>(&parsed)) return derive_death_counts(*q);
    auto series = std::get<LifeTableSeries>(parsed);
    series.validate();
    return series;
}

FpcaOptions fpca_options(const RunConfig& cfg) {
    FpcaOptions o;
    if (cfg.k_rule == "fixed") o.rule = ComponentRule::fixed(cfg.k);
    else if (cfg.k_rule == "evr") o.rule = ComponentRule::evr(cfg.evr_max_k);
    else throw UsageError("--k-rule must be fixed or evr");
    if (cfg.score_basis == "unweighted") o.basis = ScoreBasis::unweighted;
    else if (cfg.score_basis == "weighted") o.basis = ScoreBasis::weighted;
    else throw UsageError("--score-basis must be unweighted or weighted");
    return o;
}

InverseOptions inverse_options(const RunConfig& cfg) { return InverseOptions{cfg.closure}; }

struct Fitted {
    ClrDecomposition decomp;
    FpcaModel model;
};

Fitted fit(const RunConfig& cfg, const LifeTableSeries& series) {
    Fitted f;
    f.decomp = clr_forward(series, make_weights(cfg.kappa, series.num_years()));
    f.model = fit_wfpca(f.decomp, fpca_options(cfg));
    return f;
}

/// Collects output files, then writes config.txt and manifest.txt beside them.
class OutputDir {
public:
    explicit OutputDir(const std::string& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& content) {
        const fs::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out << content;
        out.close();
        if (!out) throw IoError("failed writing " + path.string());
        if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
    }

    void finish(const RunConfig& cfg, const std::optional<fs::path>& input) {
        write("config.txt", serialize(cfg));
        std::string m;
        m += "tool = wcoda " + std::string(kVersion) + "\n";
        m += "eigen = " + std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
             std::to_string(EIGEN_MINOR_VERSION) + "\n";
        m += "command = " + cfg.command + "\n";
        m += "seed = " + std::to_string(cfg.seed) + "\n";
        m += "config = config.txt\n";
        m += notes_;
        if (input) {
            m += "input = " + input->string() + "\n";
            m += "input_sha256 = " + sha256_file(*input) + "\n";
        }
        for (const auto& f : files_) m += "output." + f + ".sha256 = " + sha256_file(dir_ / f) + "\n";
        write("manifest.txt", m);
    }

    /// Extra `key = value` line for the manifest.
    void note(const std::string& key, const std::string& value) { notes_ += key + " = " + value + "\n"; }

    const fs::path& path() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
    std::string notes_;
};

// ---------------------------------------------------------------------------
// Error-report tables
// ---------------------------------------------------------------------------

struct ReportRow {
    std::string label;
    double kld = 0.0, jsd_s = 0.0, jsd_g = 0.0;
    std::vector<CoverageStat> coverage;
};

std::string error_table(const std::string& title, const std::vector<ReportRow>& rows, bool sqrt_jsd) {
    std::string out = title + "\n";
    const std::string js = sqrt_jsd ? "sqrt JSD" : "JSD";
    out += pad("h", 5) + pad("KLD", 10) + pad(js + "(s)", 12) + pad(js + "(g)", 12);
    if (!rows.empty())
        for (const auto& c : rows.front().coverage) {
            const std::string lvl = num(100.0 * (1.0 - c.nu)) + "%";
            out += pad("ECP(" + lvl + ")", 12) + pad("CPD(" + lvl + ")", 12);
        }
    out += "\n";
    for (const auto& r : rows) {
        const double s = sqrt_jsd ? std::sqrt(r.jsd_s) : r.jsd_s;
        const double g = sqrt_jsd ? std::sqrt(r.jsd_g) : r.jsd_g;
        out += pad(r.label, 5) + pad(fixed(100.0 * r.kld, 3), 10) + pad(fixed(100.0 * s, 3), 12) +
               pad(fixed(100.0 * g, 3), 12);
        for (const auto& c : r.coverage) out += pad(fixed(c.ecp, 3), 12) + pad(fixed(c.cpd, 3), 12);
        out += "\n";
    }
    return out;
}

std::vector<ReportRow> rows_with_mean(std::vector<ReportRow> rows) {
    if (rows.empty()) return rows;
    ReportRow mean;
    mean.label = "Mean";
    mean.coverage = rows.front().coverage;
    for (auto& c : mean.coverage) c.ecp = c.cpd = 0.0;
    for (const auto& r : rows) {
        mean.kld += r.kld;
        mean.jsd_s += r.jsd_s;
        mean.jsd_g += r.jsd_g;
        for (std::size_t i = 0; i < mean.coverage.size(); ++i) {
            mean.coverage[i].ecp += r.coverage[i].ecp;
            mean.coverage[i].cpd += r.coverage[i].cpd;
        }
    }
    const auto n = static_cast<double>(rows.size());
    mean.kld /= n;
    mean.jsd_s /= n;
    mean.jsd_g /= n;
    for (auto& c : mean.coverage) {
        c.ecp /= n;
        c.cpd /= n;
    }
    rows.push_back(mean);
    return rows;
}

std::string table_title(const RunConfig& cfg) {
    const auto plan = BacktestPlan::parse(cfg.plan, cfg.horizons);
    const bool test = cfg.segment != "validation";
    const int first = test ? plan.validation_end + 1 : plan.train_end + 1;
    const int last = test ? plan.test_end : plan.validation_end;
    return "Point forecast errors (x100), " + std::string(test ? "test" : "validation") + " years " +
           std::to_string(first) + "-" + std::to_string(last) + ", kappa = " + num(cfg.kappa) +
           (cfg.k_rule == "evr" ? ", K by EVR" : ", K = " + std::to_string(cfg.k));
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void cmd_ingest(const RunConfig& cfg, std::ostream& out) {
    const auto input = resolve_input(cfg);
    const auto series = load_series(cfg, input);
    OutputDir dir(cfg.out);
    std::ostringstream counts;
    write_counts_csv(counts, series);
    dir.write("counts.csv", counts.str());
    std::string summary = "year,e0,gini\n";
    for (std::size_t t = 0; t < series.num_years(); ++t) {
        const Eigen::VectorXd d = series.counts.row(static_cast<Eigen::Index>(t)).transpose();
        summary += std::to_string(series.years[t]) + "," + num(life_expectancy_at_birth(d, series.radix)) + "," +
                   num(gini_coefficient(d)) + "\n";
    }
    dir.write("summary.csv", summary);
    dir.note("repaired_cells", std::to_string(series.repaired_cells));
    dir.finish(cfg, input);
    out << "years " << series.years.front() << "-" << series.years.back() << ", ages 0-" << series.terminal_age()
        << ", repaired cells " << series.repaired_cells << "\n";
}

void cmd_transform(const RunConfig& cfg, std::ostream& out) {
    const auto input = resolve_input(cfg);
    const auto series = load_series(cfg, input);
    const auto decomp = clr_forward(series, make_weights(cfg.kappa, series.num_years()));
    OutputDir dir(cfg.out);
    std::string w = "year,weight\n", a = "age,alpha\n", b = "year,age,beta\n";
    for (std::size_t t = 0; t < series.num_years(); ++t)
        w += std::to_string(series.years[t]) + "," + num(decomp.scheme.weights[static_cast<Eigen::Index>(t)]) + "\n";
    for (Eigen::Index u = 0; u < decomp.alpha.size(); ++u) a += std::to_string(u) + "," + num(decomp.alpha[u]) + "\n";
    for (Eigen::Index t = 0; t < decomp.beta.rows(); ++t)
        for (Eigen::Index u = 0; u < decomp.beta.cols(); ++u)
            b += std::to_string(series.years[static_cast<std::size_t>(t)]) + "," + std::to_string(u) + "," +
                 num(decomp.beta(t, u)) + "\n";
    dir.write("weights.csv", w);
    dir.write("alpha.csv", a);
    dir.write("beta.csv", b);
    dir.note("repaired_cells", std::to_string(series.repaired_cells));
    dir.finish(cfg, input);
    out << "transformed " << series.num_years() << " years with kappa = " << num(cfg.kappa) << "\n";
}

void cmd_fit(const RunConfig& cfg, std::ostream& out) {
    const auto input = resolve_input(cfg);
    const auto series = load_series(cfg, input);
    const auto f = fit(cfg, series);
    OutputDir dir(cfg.out);
    std::string e = "component,eigenvalue\n", p = "age,component,phi\n", s = "year,component,score\n";
    for (Eigen::Index k = 0; k < f.model.eigenvalues.size(); ++k)
        e += std::to_string(k + 1) + "," + num(f.model.eigenvalues[k]) + "\n";
    for (Eigen::Index u = 0; u < f.model.phi.rows(); ++u)
        for (Eigen::Index k = 0; k < f.model.phi.cols(); ++k)
            p += std::to_string(u) + "," + std::to_string(k + 1) + "," + num(f.model.phi(u, k)) + "\n";
    for (Eigen::Index t = 0; t < f.model.scores.rows(); ++t)
        for (Eigen::Index k = 0; k < f.model.scores.cols(); ++k)
            s += std::to_string(series.years[static_cast<std::size_t>(t)]) + "," + std::to_string(k + 1) + "," +
                 num(f.model.scores(t, k)) + "\n";
    dir.write("eigenvalues.csv", e);
    dir.write("eigenfunctions.csv", p);
    dir.write("scores.csv", s);
    dir.note("repaired_cells", std::to_string(series.repaired_cells));
    dir.finish(cfg, input);
    out << "K = " << f.model.k << "\n";
}

void cmd_forecast(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto input = resolve_input(cfg);
    const auto series = load_series(cfg, input);
    const auto f = fit(cfg, series);
    const auto set = forecast_death_counts(f.model, f.decomp, cfg.horizons, inverse_options(cfg));
    if (set.clamped_cells > 0) err << "warning: " << set.clamped_cells << " forecast cells clamped\n";
    OutputDir dir(cfg.out);
    dir.note("clamped_cells", std::to_string(set.clamped_cells));
    std::string csv = "horizon,age,count\n";
    for (Eigen::Index h = 0; h < set.curves.rows(); ++h)
        for (Eigen::Index u = 0; u < set.curves.cols(); ++u)
            csv += std::to_string(h + 1) + "," + std::to_string(u) + "," + num(set.curves(h, u)) + "\n";
    dir.write("forecast.csv", csv);
    dir.note("repaired_cells", std::to_string(series.repaired_cells));
    dir.finish(cfg, input);
    out << "forecast " << cfg.horizons << " years beyond " << series.years.back() << " with K = " << f.model.k
        << "\n";
}

void cmd_intervals(const RunConfig& cfg, std::ostream& out) {
    if (cfg.nu.empty()) throw UsageError("--nu needs at least one level");
    const auto input = resolve_input(cfg);
    const auto series = load_series(cfg, input);
    const auto f = fit(cfg, series);
    BootstrapOptions opt;
    opt.replicates = cfg.replicates;
    opt.seed = cfg.seed;
    opt.threads = cfg.threads;
    opt.inverse = inverse_options(cfg);
    const auto ensemble = bootstrap_paths(f.model, f.decomp, cfg.horizons, opt);
    OutputDir dir(cfg.out);
    for (double nu : cfg.nu) {
        const auto band = prediction_band(ensemble, nu);
        std::string csv = "horizon,age,lower,upper\n";
        for (Eigen::Index h = 0; h < band.lower.rows(); ++h)
            for (Eigen::Index u = 0; u < band.lower.cols(); ++u)
                csv += std::to_string(h + 1) + "," + std::to_string(u) + "," + num(band.lower(h, u)) + "," +
                       num(band.upper(h, u)) + "\n";
        const std::string name = cfg.nu.size() == 1 ? "intervals.csv" : "intervals_" + num(100.0 * (1.0 - nu)) + ".csv";
        dir.write(name, csv);
    }
    dir.note("repaired_cells", std::to_string(series.repaired_cells));
    dir.finish(cfg, input);
    out << "bands from " << cfg.replicates << " replicates, seed " << cfg.seed << "\n";
}

MethodConfig method_config(const RunConfig& cfg) {
    MethodConfig m;
    m.kappa = cfg.kappa;
    m.fpca = fpca_options(cfg);
    m.inverse = inverse_options(cfg);
    if (cfg.fit_start != 0) m.fit_start = cfg.fit_start;
    m.replicates = cfg.replicates;
    m.nus = cfg.replicates > 0 ? cfg.nu : std::vector<double>{};
    m.seed = cfg.seed;
    m.threads = cfg.threads;
    return m;
}

void cmd_select_kappa(const RunConfig& cfg, std::ostream& out) {
    const auto input = resolve_input(cfg);
    const auto series = load_series(cfg, input);
    const auto plan = BacktestPlan::parse(cfg.plan, cfg.horizons);
    const auto criterion = Criterion::parse(cfg.criterion, cfg.nu.empty() ? 0.2 : cfg.nu.front());
    const auto sel = select_kappa(series, plan, criterion, parse_grid(cfg.kappa_grid), method_config(cfg));
    OutputDir dir(cfg.out);
    std::string best = "horizon,kappa," + criterion.name() + "\n";
    std::string text = "Selected kappa by " + criterion.name() + " over validation years " +
                       std::to_string(plan.train_end + 1) + "-" + std::to_string(plan.validation_end) + "\n" +
                       pad("h", 5) + pad("kappa", 10) + pad(criterion.name(), 16) + "\n";
    for (std::size_t h = 0; h < sel.best_kappa.size(); ++h) {
        best += std::to_string(h + 1) + "," + num(sel.best_kappa[h]) + "," + num(sel.best_value[h]) + "\n";
        text += pad(std::to_string(h + 1), 5) + pad(num(sel.best_kappa[h]), 10) + pad(fixed(sel.best_value[h], 8), 16) +
                "\n";
    }
    std::string all = "kappa,horizon," + criterion.name() + "\n";
    for (std::size_t i = 0; i < sel.grid.size(); ++i)
        for (std::size_t h = 0; h < sel.values[i].size(); ++h)
            all += num(sel.grid[i]) + "," + std::to_string(h + 1) + "," + num(sel.values[i][h]) + "\n";
    dir.write("kappa_selection.csv", best);
    dir.write("kappa_values.csv", all);
    dir.write("kappa_selection.txt", text);
    dir.note("repaired_cells", std::to_string(series.repaired_cells));
    dir.finish(cfg, input);
    out << text;
}

void cmd_backtest(const RunConfig& cfg, std::ostream& out) {
    const auto input = resolve_input(cfg);
    const auto series = load_series(cfg, input);
    const auto plan = BacktestPlan::parse(cfg.plan, cfg.horizons);
    Segment segment = Segment::test;
    if (cfg.segment == "validation") segment = Segment::validation;
    else if (cfg.segment != "test") throw UsageError("--segment must be test or validation");
    const auto report = expanding_window_backtest(series, plan, method_config(cfg), segment);

    std::string csv = "horizon,forecasts,kld,jsd_s,jsd_g";
    for (double nu : report.nus) csv += ",ecp_" + num(nu) + ",cpd_" + num(nu);
    csv += "\n";
    std::vector<ReportRow> rows;
    for (const auto& h : report.horizons) {
        csv += std::to_string(h.horizon) + "," + std::to_string(h.forecasts) + "," + num(h.kld) + "," +
               num(h.jsd_simple) + "," + num(h.jsd_geometric);
        for (const auto& c : h.coverage) csv += "," + num(c.ecp) + "," + num(c.cpd);
        csv += "\n";
        rows.push_back({std::to_string(h.horizon), h.kld, h.jsd_simple, h.jsd_geometric, h.coverage});
    }
    std::string origins = "origin,horizon,target,kld,jsd_s,jsd_g\n";
    for (const auto& o : report.origins)
        origins += std::to_string(o.origin) + "," + std::to_string(o.horizon) + "," + std::to_string(o.target) + "," +
                   num(o.kld) + "," + num(o.jsd_simple) + "," + num(o.jsd_geometric) + "\n";
    const std::string text = error_table(table_title(cfg), rows_with_mean(rows), cfg.sqrt);
    OutputDir dir(cfg.out);
    dir.write("backtest.csv", csv);
    dir.write("origins.csv", origins);
    dir.write("backtest.txt", text);
    dir.note("repaired_cells", std::to_string(series.repaired_cells));
    dir.finish(cfg, input);
    out << text;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(split(line, ','));
    return rows;
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
    if (cfg.run.empty()) throw UsageError("--run must name a backtest output directory");
    const fs::path run(cfg.run);
    RunConfig source;
    {
        std::istringstream in(read_file(run / "config.txt"));
        source = parse_run_config(in);
    }
    const auto rows = read_csv(run / "backtest.csv");
    if (rows.empty() || rows.front().size() < 5 || rows.front()[0] != "horizon")
        throw ParseError("backtest.csv has no horizon header");
    const auto& header = rows.front();
    std::vector<double> nus;
    for (std::size_t c = 5; c + 1 < header.size(); c += 2) {
        if (header[c].rfind("ecp_", 0) != 0) throw ParseError("unexpected column '" + header[c] + "' in backtest.csv");
        nus.push_back(to_number<double>(header[c].substr(4), "significance level"));
    }
    std::vector<ReportRow> table;
    std::string plot = "metric,horizon,value\n";
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() != header.size()) throw ParseError("ragged row in backtest.csv", r + 1);
        ReportRow row;
        row.label = f[0];
        row.kld = to_number<double>(f[2], "kld");
        row.jsd_s = to_number<double>(f[3], "jsd_s");
        row.jsd_g = to_number<double>(f[4], "jsd_g");
        for (std::size_t i = 0; i < nus.size(); ++i)
            row.coverage.push_back({nus[i], to_number<double>(f[5 + 2 * i], "ecp"), to_number<double>(f[6 + 2 * i], "cpd")});
        const double s = cfg.sqrt ? std::sqrt(row.jsd_s) : row.jsd_s;
        const double g = cfg.sqrt ? std::sqrt(row.jsd_g) : row.jsd_g;
        plot += "kld," + row.label + "," + num(row.kld) + "\n";
        plot += "jsd_s," + row.label + "," + num(s) + "\n";
        plot += "jsd_g," + row.label + "," + num(g) + "\n";
        for (const auto& c : row.coverage) {
            plot += "ecp_" + num(c.nu) + "," + row.label + "," + num(c.ecp) + "\n";
            plot += "cpd_" + num(c.nu) + "," + row.label + "," + num(c.cpd) + "\n";
        }
        table.push_back(row);
    }
    const std::string text = error_table(table_title(source), rows_with_mean(table), cfg.sqrt);
    OutputDir dir(cfg.out);
    dir.write("report.txt", text);
    if (cfg.plot_data) dir.write("plot_data.csv", plot);
    dir.finish(cfg, run / "backtest.csv");
    out << text;
}

void cmd_annuity(const RunConfig& cfg, std::ostream& out) {
    const auto input = resolve_input(cfg);
    const auto series = load_series(cfg, input);
    AnnuityGrid grid;
    grid.ages = int_range(cfg.ages, "--ages");
    grid.maturities = int_range(cfg.maturities, "--maturities");
    grid.rate = cfg.rate;
    const bool with_interval = !cfg.nu.empty();
    if (with_interval) grid.nu = cfg.nu.front();

    const auto f = fit(cfg, series);
    const int horizons = *std::max_element(grid.maturities.begin(), grid.maturities.end());
    const auto set = forecast_death_counts(f.model, f.decomp, static_cast<std::size_t>(horizons), inverse_options(cfg));
    std::optional<BootstrapEnsemble> ensemble;
    if (with_interval) {
        BootstrapOptions opt;
        opt.replicates = cfg.replicates;
        opt.seed = cfg.seed;
        opt.threads = cfg.threads;
        opt.inverse = inverse_options(cfg);
        ensemble = bootstrap_paths(f.model, f.decomp, static_cast<std::size_t>(horizons), opt);
    }
    const auto quotes = annuity_table(set, grid, ensemble ? &*ensemble : nullptr);

    std::map<std::pair<int, int>, AnnuityQuote> cells;
    std::string csv = with_interval ? "age,maturity,price,lower,upper\n" : "age,maturity,price\n";
    for (const auto& q : quotes) {
        cells[{q.age, q.maturity}] = q;
        csv += std::to_string(q.age) + "," + std::to_string(q.maturity) + "," + num(q.price);
        if (q.interval) csv += "," + num(q.interval->lower) + "," + num(q.interval->upper);
        csv += "\n";
    }
    const std::size_t width = with_interval ? 18 : 9;
    std::string text = "Annuity prices, rate " + num(100.0 * cfg.rate) + "%" +
                       (with_interval ? ", " + num(100.0 * (1.0 - *grid.nu)) + "% intervals" : std::string()) + "\n" +
                       pad("Age", 5);
    for (int t : grid.maturities) text += pad("T=" + std::to_string(t), width);
    text += "\n";
    for (int a : grid.ages) {
        text += pad(std::to_string(a), 5);
        for (int t : grid.maturities) {
            const auto it = cells.find({a, t});
            std::string cell;
            if (it != cells.end())
                cell = with_interval ? "(" + fixed(it->second.interval->lower, 3) + ", " +
                                           fixed(it->second.interval->upper, 3) + ")"
                                     : fixed(it->second.price, 3);
            text += pad(cell, width);
        }
        text += "\n";
    }
    OutputDir dir(cfg.out);
    dir.write("annuity.csv", csv);
    dir.write("annuity.txt", text);
    dir.note("repaired_cells", std::to_string(series.repaired_cells));
    dir.finish(cfg, input);
    out << text;
}

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
    const auto spec = SyntheticSpec::defaults(parse_synthetic_kind(cfg.kind), cfg.seed);
    auto synthetic = spec;
    synthetic.radix = cfg.radix;
    const auto series = make_synthetic(synthetic);
    OutputDir dir(cfg.out);
    std::ostringstream counts;
    write_counts_csv(counts, series);
    dir.write("counts.csv", counts.str());
    dir.finish(cfg, std::nullopt);
    out << cfg.kind << ": " << series.years.front() << "-" << series.years.back() << "\n";
}

std::string find_config_path(int argc, const char* const* argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

int fail(std::ostream& err, int code, const char* kind, const std::string& message) {
    err << "wcoda: " << message << "\n";
    nlohmann::json line{{"kind", kind}, {"exit", code}, {"message", message}};
    err << "wcoda-error " << line.dump() << "\n";
    return code;
}

} // namespace

std::string sha256_file(const fs::path& path) {
    const std::string bytes = read_file(path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw IoError("SHA-256 failed for " + path.string());
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        const std::string config_path = find_config_path(argc, argv);
        if (!config_path.empty()) {
            std::istringstream in(read_file(config_path));
            cfg = parse_run_config(in);
        }
    } catch (const ParseError& e) {
        return fail(err, exit_parse, "parse", std::string("config: ") + e.what());
    } catch (const IoError& e) {
        return fail(err, exit_io, "io", e.what());
    }

    CLI::App app{"Weighted compositional forecasting of life-table death counts", "wcoda"};
    app.set_version_flag("--version", kVersion);
    app.fallthrough();
    app.require_subcommand(1);
    std::string config_path;
    bool no_closure = !cfg.closure;
    std::size_t replicates = cfg.replicates;

    app.add_option("--config", config_path, "Read settings from a key = value file (flags override it)");
    app.add_option("--input,-i", cfg.input, "Input table (relative paths also tried under $WCODA_DATA_DIR)");
    app.add_option("--format", cfg.format, "hmd_qx | hmd_deaths | csv");
    app.add_option("--sex", cfg.sex, "female | male | total");
    app.add_option("--radix", cfg.radix, "Life-table radix");
    app.add_option("--kappa", cfg.kappa, "Weight decay parameter in [0, 1]");
    app.add_option("--kappa-grid", cfg.kappa_grid, "Search grid lo:hi:step");
    app.add_option("--k", cfg.k, "Number of components for the fixed rule");
    app.add_option("--k-rule", cfg.k_rule, "fixed | evr");
    app.add_option("--evr-max-k", cfg.evr_max_k, "Largest K for the eigenvalue-ratio rule (0 = auto)");
    app.add_option("--score-basis", cfg.score_basis, "unweighted | weighted");
    app.add_flag("--no-closure", no_closure, "Skip rescaling forecasts to the radix");
    app.add_option("--horizons,-H", cfg.horizons, "Forecast horizons");
    auto* b_option = app.add_option("--B,--replicates", replicates, "Bootstrap replicates");
    app.add_option("--seed", cfg.seed, "Bootstrap seed");
    auto* nu_option = app.add_option("--nu", cfg.nu, "Significance levels (repeatable)");
    app.add_option("--plan", cfg.plan, "Backtest years train:validation:test");
    app.add_option("--segment", cfg.segment, "test | validation");
    app.add_option("--criterion", cfg.criterion, "kld | jsd_s | jsd_g | cpd");
    app.add_option("--fit-start", cfg.fit_start, "First training year (0 = first data year)");
    app.add_option("--ages", cfg.ages, "Annuity ages lo:hi:step");
    app.add_option("--maturities", cfg.maturities, "Annuity maturities lo:hi:step");
    app.add_option("--rate", cfg.rate, "Constant interest rate");
    app.add_option("--kind", cfg.kind, "Synthetic surface: stationary | regime_change | gaussian");
    app.add_option("--run", cfg.run, "Backtest output directory to report on");
    app.add_flag("--sqrt", cfg.sqrt, "Report square roots of the JS divergences");
    app.add_flag("--plot-data", cfg.plot_data, "Also write long-format plot data");
    app.add_option("--threads", cfg.threads, "Worker threads (results do not depend on it)");
    app.add_option("--out,-o", cfg.out, "Output directory");

    const std::vector<std::pair<const char*, const char*>> commands = {
        {"ingest", "Parse a table and write canonical death counts"},
        {"transform", "Weighted centered log-ratio decomposition"},
        {"fit", "Weighted functional principal components"},
        {"select-kappa", "Choose kappa on the validation segment"},
        {"forecast", "Point forecasts of death counts"},
        {"intervals", "Bootstrap prediction bands"},
        {"backtest", "Expanding-window forecast errors"},
        {"annuity", "Temporary immediate annuity prices"},
        {"report", "Format a backtest run as a table"},
        {"synth", "Write a synthetic fixture surface"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream message;
        const int code = app.exit(e, out, message);
        if (code == 0) return exit_ok;
        return fail(err, exit_usage, "usage", e.what());
    }

    cfg.command = app.get_subcommands().front()->get_name();
    cfg.closure = !no_closure;
    cfg.replicates = replicates;
    if (cfg.command == "select-kappa" && cfg.criterion == "cpd" && b_option->count() == 0 && config_path.empty())
        cfg.replicates = 200;
    if (cfg.command == "select-kappa" && cfg.criterion != "cpd") cfg.replicates = 0;
    // Annuity quotes carry intervals only when a level is asked for.
    if (cfg.command == "annuity" && nu_option->count() == 0 && config_path.empty()) cfg.nu.clear();

    try {
        if (cfg.command == "ingest") cmd_ingest(cfg, out);
        else if (cfg.command == "transform") cmd_transform(cfg, out);
        else if (cfg.command == "fit") cmd_fit(cfg, out);
        else if (cfg.command == "select-kappa") cmd_select_kappa(cfg, out);
        else if (cfg.command == "forecast") cmd_forecast(cfg, out, err);
        else if (cfg.command == "intervals") cmd_intervals(cfg, out);
        else if (cfg.command == "backtest") cmd_backtest(cfg, out);
        else if (cfg.command == "annuity") cmd_annuity(cfg, out);
        else if (cfg.command == "report") cmd_report(cfg, out);
        else if (cfg.command == "synth") cmd_synth(cfg, out);
    } catch (const UsageError& e) {
        return fail(err, exit_usage, "usage", e.what());
    } catch (const ParseError& e) {
        return fail(err, exit_parse, "parse", e.what());
    } catch (const StructuralError& e) {
        return fail(err, exit_domain, "structure", e.what());
    } catch (const std::domain_error& e) {
        return fail(err, exit_domain, "domain", e.what());
    } catch (const IoError& e) {
        return fail(err, exit_io, "io", e.what());
    } catch (const std::exception& e) {
        return fail(err, exit_internal, "internal", e.what());
    }
    return exit_ok;
}

} // namespace wcoda::cli
