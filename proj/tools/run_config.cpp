#include "run_config.hpp"

#include "wcoda/error.hpp"

#include <charconv>
#include <functional>
#include <istream>
#include <sstream>

namespace wcoda::cli {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& text, std::size_t line) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ParseError("invalid number '" + text + "'", line);
    return value;
}

bool parse_bool(const std::string& text, std::size_t line) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ParseError("invalid boolean '" + text + "'", line);
}

struct Field {
    const char* key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&, std::size_t)> set;
};

template <typename T>
Field number(const char* key, T RunConfig::*member) {
    return {key,
            [member](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) return format_double(c.*member);
                else return std::to_string(c.*member);
            },
            [member](RunConfig& c, const std::string& v, std::size_t line) { c.*member = parse_number<T>(v, line); }};
}

Field text(const char* key, std::string RunConfig::*member) {
    return {key, [member](const RunConfig& c) { return c.*member; },
            [member](RunConfig& c, const std::string& v, std::size_t) { c.*member = v; }};
}

Field flag(const char* key, bool RunConfig::*member) {
    return {key, [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); },
            [member](RunConfig& c, const std::string& v, std::size_t line) { c.*member = parse_bool(v, line); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> all = {
        text("command", &RunConfig::command),
        text("input", &RunConfig::input),
        text("format", &RunConfig::format),
        text("sex", &RunConfig::sex),
        number("radix", &RunConfig::radix),
        number("kappa", &RunConfig::kappa),
        text("kappa_grid", &RunConfig::kappa_grid),
        number("k", &RunConfig::k),
        text("k_rule", &RunConfig::k_rule),
        number("evr_max_k", &RunConfig::evr_max_k),
        text("score_basis", &RunConfig::score_basis),
        flag("closure", &RunConfig::closure),
        number("horizons", &RunConfig::horizons),
        number("replicates", &RunConfig::replicates),
        number("seed", &RunConfig::seed),
        {"nu",
         [](const RunConfig& c) {
             std::string s;
             for (std::size_t i = 0; i < c.nu.size(); ++i) s += (i ? "," : "") + format_double(c.nu[i]);
             return s;
         },
         [](RunConfig& c, const std::string& v, std::size_t line) {
             c.nu.clear();
             std::stringstream ss(v);
             std::string item;
             while (std::getline(ss, item, ',')) c.nu.push_back(parse_number<double>(trim(item), line));
         }},
        text("plan", &RunConfig::plan),
        text("segment", &RunConfig::segment),
        text("criterion", &RunConfig::criterion),
        number("fit_start", &RunConfig::fit_start),
        text("ages", &RunConfig::ages),
        text("maturities", &RunConfig::maturities),
        number("rate", &RunConfig::rate),
        text("kind", &RunConfig::kind),
        text("run", &RunConfig::run),
        flag("sqrt", &RunConfig::sqrt),
        flag("plot_data", &RunConfig::plot_data),
        number("threads", &RunConfig::threads),
        text("out", &RunConfig::out),
    };
    return all;
}

} // namespace

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

std::string serialize(const RunConfig& config) {
    std::string out;
    for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(config) + "\n";
    return out;
}

RunConfig parse_run_config(std::istream& in, RunConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        bool known = false;
        for (const auto& f : fields()) {
            if (key == f.key) {
                f.set(base, value, line_no);
                known = true;
                break;
            }
        }
        if (!known) throw ParseError("unknown config key '" + key + "'", line_no);
    }
    return base;
}

} // namespace wcoda::cli
