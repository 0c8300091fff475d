#include "eqpide/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace eqpide {

namespace {

std::string position(const std::string& source, std::size_t line, std::size_t column) {
    std::string s = source;
    if (line > 0) {
        s += ":" + std::to_string(line);
        if (column > 0) s += ":" + std::to_string(column);
    }
    return s;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_unsigned(std::string_view s, std::uint64_t& out) {
    s = trim(s);
    if (s.empty()) return false;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// Typed access that remembers which keys were read so leftovers can be
// reported as unknown.
class Reader {
public:
    explicit Reader(const IniDocument& doc) : doc_(doc) {}

    const IniEntry* find(const std::string& section, const std::string& key) {
        known_sections_.insert(section);
        const auto s = doc_.sections.find(section);
        if (s == doc_.sections.end()) return nullptr;
        const auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        used_.insert(section + "." + key);
        return &k->second;
    }

    const IniEntry& require(const std::string& section, const std::string& key) {
        const IniEntry* e = find(section, key);
        if (!e) throw ConfigError(doc_.source, 0, 0, "missing required key '" + key + "' in section [" + section + "]");
        return *e;
    }

    [[noreturn]] void fail(const IniEntry& e, const std::string& what) const {
        throw ConfigError(doc_.source, e.line, e.column, what);
    }

    double number(const IniEntry& e, const std::string& key) const {
        double v = 0.0;
        if (!parse_double(e.value, v)) fail(e, "key '" + key + "': expected a number, got '" + e.value + "'");
        return v;
    }

    std::vector<double> numbers(const IniEntry& e, const std::string& key) const {
        std::vector<double> out;
        for (auto part : split_list(e.value)) {
            double v = 0.0;
            if (!parse_double(part, v))
                fail(e, "key '" + key + "': expected a comma-separated list of numbers, got '" + e.value + "'");
            out.push_back(v);
        }
        return out;
    }

    double get(const std::string& section, const std::string& key, double fallback) {
        const IniEntry* e = find(section, key);
        return e ? number(*e, key) : fallback;
    }

    double get_positive(const std::string& section, const std::string& key, double fallback) {
        const IniEntry* e = find(section, key);
        if (!e) return fallback;
        const double v = number(*e, key);
        if (!(v > 0.0)) fail(*e, "key '" + key + "' must be positive");
        return v;
    }

    std::uint64_t get_count(const std::string& section, const std::string& key, std::uint64_t fallback,
                            std::uint64_t minimum = 1) {
        const IniEntry* e = find(section, key);
        if (!e) return fallback;
        std::uint64_t v = 0;
        if (!parse_unsigned(e->value, v)) fail(*e, "key '" + key + "': expected a non-negative integer, got '" + e->value + "'");
        if (v < minimum) fail(*e, "key '" + key + "' must be at least " + std::to_string(minimum));
        return v;
    }

    bool get_flag(const std::string& section, const std::string& key, bool fallback) {
        const IniEntry* e = find(section, key);
        if (!e) return fallback;
        std::string v(trim(e->value));
        std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        fail(*e, "key '" + key + "': expected true or false, got '" + e->value + "'");
    }

    std::vector<double> get_list(const std::string& section, const std::string& key, std::vector<double> fallback) {
        const IniEntry* e = find(section, key);
        return e ? numbers(*e, key) : fallback;
    }

    std::string get_string(const std::string& section, const std::string& key, std::string fallback) {
        const IniEntry* e = find(section, key);
        return e ? e->value : fallback;
    }

    void mark_section(const std::string& section) { known_sections_.insert(section); }

    void check_unused() const {
        for (const auto& [name, keys] : doc_.sections) {
            if (!known_sections_.count(name)) {
                const auto line = doc_.section_lines.count(name) ? doc_.section_lines.at(name) : 0;
                throw ConfigError(doc_.source, line, 1, "unknown section [" + name + "]");
            }
            for (const auto& [key, e] : keys)
                if (!used_.count(name + "." + key))
                    throw ConfigError(doc_.source, e.line, e.key_column,
                                      "unknown key '" + key + "' in section [" + name + "]");
        }
    }

private:
    const IniDocument& doc_;
    std::set<std::string> used_;
    std::set<std::string> known_sections_;
};

CoefficientFn coefficient(Reader& rd, const IniEntry& e, const std::string& key, double horizon) {
    const auto v = rd.numbers(e, key);
    if (v.size() == 1) return CoefficientFn::constant(v[0], horizon);
    return CoefficientFn(v, horizon);
}

std::string canonical(const IniDocument& doc) {
    std::string out;
    for (const auto& [name, keys] : doc.sections)
        for (const auto& [key, e] : keys) {
            if (name == "output" && key == "dir") continue;
            out += name + "." + key + "=" + e.value + "\n";
        }
    return out;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(position(source, line, column) + ": " + message), line_(line), column_(column) {}

IniDocument parse_ini(std::string_view text, const std::string& source) {
    IniDocument doc;
    doc.source = source;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        if (const auto hash = raw.find_first_of("#;"); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::size_t first = raw.find_first_not_of(" \t");
        if (first == std::string_view::npos) continue;
        const std::size_t col = first + 1;
        if (raw[first] == '[') {
            const std::size_t close = raw.find(']', first);
            if (close == std::string_view::npos) throw ConfigError(source, line_no, col, "unterminated section header");
            if (!trim(raw.substr(close + 1)).empty())
                throw ConfigError(source, line_no, close + 2, "unexpected text after section header");
            section = std::string(trim(raw.substr(first + 1, close - first - 1)));
            if (section.empty()) throw ConfigError(source, line_no, col + 1, "empty section name");
            if (doc.sections.count(section)) throw ConfigError(source, line_no, col, "duplicate section [" + section + "]");
            doc.sections[section];
            doc.section_lines[section] = line_no;
            continue;
        }
        const std::size_t eq = raw.find('=');
        if (eq == std::string_view::npos) throw ConfigError(source, line_no, col, "expected 'key = value'");
        const std::string key(trim(raw.substr(first, eq - first)));
        if (key.empty()) throw ConfigError(source, line_no, col, "empty key");
        if (section.empty()) throw ConfigError(source, line_no, col, "key '" + key + "' appears before any section");
        const std::string_view rest = raw.substr(eq + 1);
        const std::size_t vfirst = rest.find_first_not_of(" \t");
        const std::string value(trim(rest));
        if (value.empty()) throw ConfigError(source, line_no, eq + 2, "key '" + key + "' has no value");
        auto& keys = doc.sections[section];
        if (keys.count(key)) throw ConfigError(source, line_no, col, "duplicate key '" + key + "'");
        keys[key] = IniEntry{value, line_no, eq + 2 + (vfirst == std::string_view::npos ? 0 : vfirst), col};
    }
    return doc;
}

void apply_override(IniDocument& doc, std::string_view assignment) {
    const std::string text(assignment);
    const std::size_t eq = assignment.find('=');
    const std::size_t dot = assignment.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq)
        throw ConfigError("--set " + text, 0, 0, "expected section.key=value");
    const std::string section(trim(assignment.substr(0, dot)));
    const std::string key(trim(assignment.substr(dot + 1, eq - dot - 1)));
    const std::string value(trim(assignment.substr(eq + 1)));
    if (section.empty() || key.empty() || value.empty())
        throw ConfigError("--set " + text, 0, 0, "expected section.key=value");
    doc.sections[section][key] = IniEntry{value, 0, 0, 0};
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig build_config(const IniDocument& doc) {
    Reader rd(doc);
    RunConfig cfg;

    const IniEntry& horizon = rd.require("market", "horizon");
    const double T = rd.number(horizon, "horizon");
    if (!(T > 0.0)) rd.fail(horizon, "key 'horizon' must be positive");
    MarketSpec& m = cfg.market;
    m.horizon = T;
    m.r0 = coefficient(rd, rd.require("market", "r0"), "r0", T);
    m.r = coefficient(rd, rd.require("market", "r"), "r", T);
    m.sigma = coefficient(rd, rd.require("market", "sigma"), "sigma", T);
    m.mu = rd.number(rd.require("market", "mu"), "mu");
    m.x0 = rd.number(rd.require("market", "x0"), "x0");
    m.ellipticity_eps = rd.get_positive("market", "ellipticity_eps", m.ellipticity_eps);

    rd.mark_section("jumps");
    if (const auto it = doc.sections.find("jumps"); it != doc.sections.end()) {
        for (const auto& [name, e] : it->second) {
            rd.find("jumps", name);
            const auto v = rd.numbers(e, name);
            if (v.size() < 3) rd.fail(e, "jump '" + name + "': expected 'size, intensity, coefficient[, ...]'");
            JumpAtom atom;
            atom.size = v[0];
            atom.intensity = v[1];
            if (!(atom.intensity > 0.0)) rd.fail(e, "jump '" + name + "': intensity must be positive");
            const std::vector<double> c(v.begin() + 2, v.end());
            atom.coefficient = c.size() == 1 ? CoefficientFn::constant(c[0], T) : CoefficientFn(c, T);
            m.jumps.push_back(std::move(atom));
        }
    }

    const auto nx = rd.get_count("grid", "nx", 81, 3);
    const auto nz = rd.get_count("grid", "nz", nx, 3);
    if (nz != nx) {
        const IniEntry* e = rd.find("grid", "nz");
        throw ConfigError(doc.source, e ? e->line : 0, e ? e->column : 0, "grid needs nz == nx (identical axes)");
    }
    const auto nt = rd.get_count("grid", "nt", 200);
    const double lower = rd.get("grid", "lower", -2.0);
    const double upper = rd.get("grid", "upper", 2.0);
    if (!(upper > lower)) throw ConfigError(doc.source, 0, 0, "grid needs lower < upper");
    cfg.grid = StateGrid2D(lower, upper, nx, nt, T);
    cfg.max_iters = rd.get_count("grid", "max_iters", cfg.max_iters);
    cfg.policy_tol = rd.get_positive("grid", "tol", cfg.policy_tol);

    cfg.ode_steps = rd.get_count("ode", "n_steps", cfg.ode_steps, 10);
    cfg.quad_steps = rd.get_count("closed_form", "quad_steps", cfg.quad_steps, 2);

    cfg.mc.n_paths = rd.get_count("mc", "n_paths", cfg.mc.n_paths);
    cfg.mc.n_steps = rd.get_count("mc", "n_steps", cfg.mc.n_steps);
    cfg.mc.seed = rd.get_count("mc", "seed", cfg.mc.seed, 0);
    cfg.mc.antithetic = rd.get_flag("mc", "antithetic", cfg.mc.antithetic);
    if (cfg.mc.antithetic && cfg.mc.n_paths % 2 != 0)
        throw ConfigError(doc.source, 0, 0, "mc.antithetic needs an even mc.n_paths");

    VerifySettings& v = cfg.verify;
    v.times = rd.get_list("verify", "times", v.times);
    v.offsets = rd.get_list("verify", "offsets", v.offsets);
    v.epsilons = rd.get_list("verify", "epsilons", v.epsilons);
    v.y = rd.get("verify", "y", v.y);
    v.strategy_scale = rd.get("verify", "strategy_scale", v.strategy_scale);
    v.strategy_file = rd.get_string("verify", "strategy_file", v.strategy_file);
    v.k_se = rd.get_positive("verify", "k_se", v.k_se);
    v.identity_tol = rd.get_positive("verify", "identity_tol", v.identity_tol);
    v.ode_tol = rd.get_positive("verify", "ode_tol", v.ode_tol);
    v.pide_tol = rd.get_positive("verify", "pide_tol", v.pide_tol);
    v.policy_tol = rd.get_positive("verify", "policy_tol", v.policy_tol);
    v.spike_paths = rd.get_count("verify", "spike_paths", v.spike_paths, 2);
    v.spike_steps = rd.get_count("verify", "spike_steps", v.spike_steps);
    v.adjoint_paths = rd.get_count("verify", "adjoint_paths", v.adjoint_paths, 2);
    v.adjoint_steps = rd.get_count("verify", "adjoint_steps", v.adjoint_steps);
    v.adjoint_intervals = rd.get_count("verify", "adjoint_intervals", v.adjoint_intervals);
    v.terminal_paths = rd.get_count("verify", "terminal_paths", v.terminal_paths);
    v.u_lower = rd.get("verify", "u_lower", v.u_lower);
    v.u_upper = rd.get("verify", "u_upper", v.u_upper);
    v.u_points = rd.get_count("verify", "u_points", v.u_points, 2);
    for (double t : v.times)
        if (!(t >= 0.0 && t < T)) throw ConfigError(doc.source, 0, 0, "verify.times must lie in [0, horizon)");
    for (double e : v.epsilons)
        if (!(e > 0.0)) throw ConfigError(doc.source, 0, 0, "verify.epsilons must be positive");
    if (v.epsilons.empty() || v.times.empty() || v.offsets.empty())
        throw ConfigError(doc.source, 0, 0, "verify lists must not be empty");
    if (v.spike_paths % 2 != 0 || v.adjoint_paths % 2 != 0)
        throw ConfigError(doc.source, 0, 0, "verify.spike_paths and verify.adjoint_paths must be even (antithetic pairs)");
    if (!(v.u_upper > v.u_lower)) throw ConfigError(doc.source, 0, 0, "verify needs u_lower < u_upper");

    cfg.output_dir = rd.get_string("output", "dir", cfg.output_dir);
    cfg.csv_time_stride = rd.get_count("output", "csv_time_stride", cfg.csv_time_stride);

    rd.check_unused();
    cfg.config_hash = fnv1a_hex(canonical(doc));
    return cfg;
}

RunConfig parse_config(std::string_view text, const std::string& source, const std::vector<std::string>& overrides) {
    IniDocument doc = parse_ini(text, source);
    for (const auto& o : overrides) apply_override(doc, o);
    return build_config(doc);
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, 0, 0, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path, overrides);
}

LinearStrategy load_strategy_csv(const std::string& path, double horizon) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, 0, "cannot open strategy file");
    std::vector<double> ts, as;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view l = trim(line);
        if (l.empty() || l.front() == '#') continue;
        const auto parts = split_list(l);
        double t = 0.0, a = 0.0;
        if (parts.size() < 2 || !parse_double(parts[0], t) || !parse_double(parts[1], a)) {
            if (ts.empty()) continue;  // header row
            throw ConfigError(path, line_no, 1, "expected 't, alpha'");
        }
        if (!ts.empty() && !(t > ts.back())) throw ConfigError(path, line_no, 1, "times must increase");
        ts.push_back(t);
        as.push_back(a);
    }
    if (ts.size() < 2) throw ConfigError(path, 0, 0, "strategy file needs at least two rows");
    const std::size_t n = 1000;
    std::vector<double> samples(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const double s = horizon * static_cast<double>(k) / static_cast<double>(n);
        const auto it = std::upper_bound(ts.begin(), ts.end(), s);
        if (it == ts.begin()) {
            samples[k] = as.front();
        } else if (it == ts.end()) {
            samples[k] = as.back();
        } else {
            const std::size_t j = static_cast<std::size_t>(it - ts.begin());
            const double w = (s - ts[j - 1]) / (ts[j] - ts[j - 1]);
            samples[k] = (1.0 - w) * as[j - 1] + w * as[j];
        }
    }
    return {CoefficientFn(std::move(samples), horizon)};
}

}  // namespace eqpide
