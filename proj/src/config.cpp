#include "jumpctl/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "jumpctl/errors.hpp"

namespace jumpctl {

namespace {

using TomlValue = std::variant<bool, std::int64_t, double, std::string,
                               std::vector<double>, std::vector<std::int64_t>,
                               std::vector<std::string>>;

struct TomlEntry {
    TomlValue value;
    int line = 0;
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

bool parse_int(const std::string& s, std::int64_t& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto r = std::from_chars(b, e, out);
    return r.ec == std::errc() && r.ptr == e;
}

bool parse_float(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

TomlValue parse_scalar(const std::string& raw, int line) {
    if (raw.empty()) throw ParseError(line, "missing value");
    if (raw == "true") return true;
    if (raw == "false") return false;
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"') throw ParseError(line, "unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
            if (raw[i] == '\\' && i + 2 < raw.size()) {
                ++i;
                switch (raw[i]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: throw ParseError(line, "unsupported escape");
                }
            } else {
                out += raw[i];
            }
        }
        return out;
    }
    std::int64_t iv;
    if (parse_int(raw, iv)) return iv;
    double dv;
    if (parse_float(raw, dv)) return dv;
    throw ParseError(line, "cannot parse value '" + raw + "'");
}

TomlValue parse_value(const std::string& raw, int line) {
    if (raw.empty()) throw ParseError(line, "missing value");
    if (raw.front() != '[') return parse_scalar(raw, line);
    if (raw.back() != ']') throw ParseError(line, "unterminated array");
    const std::string inner = trim(raw.substr(1, raw.size() - 2));
    std::vector<std::string> items;
    std::string cur;
    bool in_string = false;
    for (char ch : inner) {
        if (ch == '"') in_string = !in_string;
        if (ch == ',' && !in_string) {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    if (items.empty()) return std::vector<double>{};
    for (const std::string& it : items)
        if (it.empty()) throw ParseError(line, "empty array element");
    // Classify by the first element; mixed floats/ints promote to double.
    if (items.front().front() == '"') {
        std::vector<std::string> out;
        for (const std::string& it : items) {
            TomlValue v = parse_scalar(it, line);
            if (!std::holds_alternative<std::string>(v))
                throw ParseError(line, "mixed array types");
            out.push_back(std::get<std::string>(v));
        }
        return out;
    }
    bool all_int = true;
    std::vector<double> dbl;
    std::vector<std::int64_t> ints;
    for (const std::string& it : items) {
        TomlValue v = parse_scalar(it, line);
        if (std::holds_alternative<std::int64_t>(v)) {
            ints.push_back(std::get<std::int64_t>(v));
            dbl.push_back(static_cast<double>(std::get<std::int64_t>(v)));
        } else if (std::holds_alternative<double>(v)) {
            all_int = false;
            dbl.push_back(std::get<double>(v));
        } else {
            throw ParseError(line, "mixed array types");
        }
    }
    if (all_int) return ints;
    return dbl;
}

std::map<std::string, TomlEntry> parse_toml(const std::string& text) {
    std::map<std::string, TomlEntry> entries;
    std::istringstream in(text);
    std::string rawline;
    std::string section;
    int line_no = 0;
    while (std::getline(in, rawline)) {
        ++line_no;
        const std::string line = trim(strip_comment(rawline));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ParseError(line_no, "empty section name");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError(line_no, "empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (entries.count(full)) throw ParseError(line_no, "duplicate key '" + full + "'");
        entries[full] = {parse_value(trim(line.substr(eq + 1)), line_no), line_no};
    }
    return entries;
}

class ConfigReader {
   public:
    explicit ConfigReader(std::map<std::string, TomlEntry> entries)
        : entries_(std::move(entries)) {}

    void take_double(const std::string& key, double& out) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        if (std::holds_alternative<double>(it->second.value))
            out = std::get<double>(it->second.value);
        else if (std::holds_alternative<std::int64_t>(it->second.value))
            out = static_cast<double>(std::get<std::int64_t>(it->second.value));
        else
            throw ParseError(it->second.line, "'" + key + "' must be a number");
        entries_.erase(it);
    }

    void take_int(const std::string& key, std::int64_t& out) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        if (!std::holds_alternative<std::int64_t>(it->second.value))
            throw ParseError(it->second.line, "'" + key + "' must be an integer");
        out = std::get<std::int64_t>(it->second.value);
        entries_.erase(it);
    }

    void take_uint(const std::string& key, std::uint64_t& out) {
        std::int64_t v = static_cast<std::int64_t>(out);
        take_int(key, v);
        if (v < 0) throw ValidationError(key + " >= 0");
        out = static_cast<std::uint64_t>(v);
    }

    void take_size(const std::string& key, std::size_t& out) {
        std::int64_t v = static_cast<std::int64_t>(out);
        take_int(key, v);
        if (v < 0) throw ValidationError(key + " >= 0");
        out = static_cast<std::size_t>(v);
    }

    void take_bool(const std::string& key, bool& out) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        if (!std::holds_alternative<bool>(it->second.value))
            throw ParseError(it->second.line, "'" + key + "' must be a boolean");
        out = std::get<bool>(it->second.value);
        entries_.erase(it);
    }

    void take_string(const std::string& key, std::string& out) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        if (!std::holds_alternative<std::string>(it->second.value))
            throw ParseError(it->second.line, "'" + key + "' must be a string");
        out = std::get<std::string>(it->second.value);
        entries_.erase(it);
    }

    void take_double_list(const std::string& key, std::vector<double>& out) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        if (std::holds_alternative<std::vector<double>>(it->second.value))
            out = std::get<std::vector<double>>(it->second.value);
        else if (std::holds_alternative<std::vector<std::int64_t>>(it->second.value)) {
            out.clear();
            for (std::int64_t v : std::get<std::vector<std::int64_t>>(it->second.value))
                out.push_back(static_cast<double>(v));
        } else {
            throw ParseError(it->second.line, "'" + key + "' must be a numeric array");
        }
        entries_.erase(it);
    }

    void take_int_list(const std::string& key, std::vector<std::int64_t>& out) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        if (!std::holds_alternative<std::vector<std::int64_t>>(it->second.value))
            throw ParseError(it->second.line, "'" + key + "' must be an integer array");
        out = std::get<std::vector<std::int64_t>>(it->second.value);
        entries_.erase(it);
    }

    void take_string_list(const std::string& key, std::vector<std::string>& out) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        if (!std::holds_alternative<std::vector<std::string>>(it->second.value))
            throw ParseError(it->second.line, "'" + key + "' must be a string array");
        out = std::get<std::vector<std::string>>(it->second.value);
        entries_.erase(it);
    }

    void reject_unknown() const {
        if (entries_.empty()) return;
        const auto& first = *entries_.begin();
        throw ParseError(first.second.line, "unknown key '" + first.first + "'");
    }

   private:
    std::map<std::string, TomlEntry> entries_;
};

}  // namespace

RunConfig parse_config(const std::string& text) {
    ConfigReader reader(parse_toml(text));
    RunConfig c;

    std::string model_type = "surplus";
    reader.take_string("model.type", model_type);
    if (model_type != "surplus")
        throw ValidationError("model.type must be \"surplus\"");
    reader.take_double("model.delta", c.model.delta);
    reader.take_double("model.beta", c.model.beta);
    reader.take_double("model.threshold", c.model.threshold);
    reader.take_double("model.sigma", c.model.sigma);
    reader.take_double("model.lambda", c.model.lambda);
    reader.take_double("model.mu", c.model.mu);
    reader.take_double("model.tau", c.model.tau);
    reader.take_double("model.a_max", c.model.a_max);
    reader.take_double("model.x0", c.model.x0);
    reader.take_bool("model.diffusion_approx", c.model.diffusion_approx);

    reader.take_double("sim.T", c.sim.horizon);
    reader.take_double("sim.dt", c.sim.dt);
    reader.take_size("sim.n_paths", c.sim.n_paths);
    reader.take_uint("sim.seed", c.sim.seed);
    std::string scheme = "direct_euler";
    reader.take_string("sim.scheme", scheme);
    if (scheme == "direct_euler")
        c.sim.scheme = Scheme::direct_euler;
    else if (scheme == "transformed")
        c.sim.scheme = Scheme::transformed;
    else
        throw ValidationError("sim.scheme in {direct_euler, transformed}");

    reader.take_string("experiment.axis", c.experiment.axis);
    reader.take_string_list("experiment.policies", c.experiment.policies);
    reader.take_string("experiment.policy", c.experiment.policy);
    reader.take_double_list("experiment.T_list", c.experiment.T_list);
    reader.take_double_list("experiment.lambda_list", c.experiment.lambda_list);
    reader.take_double_list("experiment.tau_list", c.experiment.tau_list);
    reader.take_int_list("experiment.n_levels", c.experiment.n_levels);
    reader.take_double_list("experiment.t_list", c.experiment.t_list);
    reader.take_int_list("experiment.beta_n", c.experiment.beta_n);
    reader.take_double_list("experiment.beta_t", c.experiment.beta_t);
    reader.take_double("experiment.band_eps", c.experiment.band_eps);
    reader.take_int("experiment.probes", c.experiment.probes);
    reader.take_int("experiment.inner_paths", c.experiment.inner_paths);
    reader.take_int("experiment.grid_a_points", c.experiment.grid_a_points);
    reader.take_double("experiment.violation_max", c.experiment.violation_max);
    reader.take_double("experiment.sign_min", c.experiment.sign_min);
    reader.take_double("experiment.band_ratio_max", c.experiment.band_ratio_max);

    reader.take_string("output.directory", c.output.directory);
    reader.take_string_list("output.formats", c.output.formats);

    reader.reject_unknown();

    // Surface invariant violations now, with the violated constraint by name.
    try {
        c.model.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    try {
        c.sim.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    if (c.experiment.axis != "T" && c.experiment.axis != "lambda" && c.experiment.axis != "tau")
        throw ValidationError("experiment.axis in {T, lambda, tau}");
    for (std::int64_t n : c.experiment.n_levels)
        if (n < 1) throw ValidationError("experiment.n_levels >= 1");
    if (c.experiment.inner_paths < 1) throw ValidationError("experiment.inner_paths >= 1");
    if (c.experiment.probes < 1) throw ValidationError("experiment.probes >= 1");
    return c;
}

RunConfig load_config(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open config " + file);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    std::string s(buf);
    // Keep floats visibly floats so emission round-trips by type.
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

std::string fmt_double_list(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fmt_double(v[i]);
    }
    return s + "]";
}

std::string fmt_int_list(const std::vector<std::int64_t>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(v[i]);
    }
    return s + "]";
}

std::string fmt_string_list(const std::vector<std::string>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += "\"" + v[i] + "\"";
    }
    return s + "]";
}

}  // namespace

std::string emit_config(const RunConfig& c) {
    std::ostringstream out;
    out << "[model]\n";
    out << "type = \"surplus\"\n";
    out << "delta = " << fmt_double(c.model.delta) << "\n";
    out << "beta = " << fmt_double(c.model.beta) << "\n";
    out << "threshold = " << fmt_double(c.model.threshold) << "\n";
    out << "sigma = " << fmt_double(c.model.sigma) << "\n";
    out << "lambda = " << fmt_double(c.model.lambda) << "\n";
    out << "mu = " << fmt_double(c.model.mu) << "\n";
    out << "tau = " << fmt_double(c.model.tau) << "\n";
    out << "a_max = " << fmt_double(c.model.a_max) << "\n";
    out << "x0 = " << fmt_double(c.model.x0) << "\n";
    out << "diffusion_approx = " << (c.model.diffusion_approx ? "true" : "false") << "\n";
    out << "\n[sim]\n";
    out << "T = " << fmt_double(c.sim.horizon) << "\n";
    out << "dt = " << fmt_double(c.sim.dt) << "\n";
    out << "n_paths = " << c.sim.n_paths << "\n";
    out << "seed = " << c.sim.seed << "\n";
    out << "scheme = \""
        << (c.sim.scheme == Scheme::transformed ? "transformed" : "direct_euler") << "\"\n";
    out << "\n[experiment]\n";
    out << "axis = \"" << c.experiment.axis << "\"\n";
    out << "policies = " << fmt_string_list(c.experiment.policies) << "\n";
    out << "policy = \"" << c.experiment.policy << "\"\n";
    out << "T_list = " << fmt_double_list(c.experiment.T_list) << "\n";
    out << "lambda_list = " << fmt_double_list(c.experiment.lambda_list) << "\n";
    out << "tau_list = " << fmt_double_list(c.experiment.tau_list) << "\n";
    out << "n_levels = " << fmt_int_list(c.experiment.n_levels) << "\n";
    out << "t_list = " << fmt_double_list(c.experiment.t_list) << "\n";
    out << "beta_n = " << fmt_int_list(c.experiment.beta_n) << "\n";
    out << "beta_t = " << fmt_double_list(c.experiment.beta_t) << "\n";
    out << "band_eps = " << fmt_double(c.experiment.band_eps) << "\n";
    out << "probes = " << c.experiment.probes << "\n";
    out << "inner_paths = " << c.experiment.inner_paths << "\n";
    out << "grid_a_points = " << c.experiment.grid_a_points << "\n";
    out << "violation_max = " << fmt_double(c.experiment.violation_max) << "\n";
    out << "sign_min = " << fmt_double(c.experiment.sign_min) << "\n";
    out << "band_ratio_max = " << fmt_double(c.experiment.band_ratio_max) << "\n";
    out << "\n[output]\n";
    out << "directory = \"" << c.output.directory << "\"\n";
    out << "formats = " << fmt_string_list(c.output.formats) << "\n";
    return out.str();
}

}  // namespace jumpctl
