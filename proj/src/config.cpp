#include "skewlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace skewlab {

namespace {

const std::set<std::string> kSystemKeys = {"driver", "alpha", "omega0", "matrix", "h", "matrices"};
const std::set<std::string> kNumericsKeys = {"mode", "mantissa_bits", "seed"};
const std::map<std::string, std::set<std::string>> kCommandKeys = {
    {"simulate", {"x1", "x2", "n", "observable", "checkpoints", "starts"}},
    {"entropy", {"eps", "nmin", "nmax", "grid"}},
    {"deviation", {"alpha", "delta", "eps", "nmin", "nmax", "grid"}},
    {"shadow", {"spec", "eps", "clat"}},
    {"irregular",
     {"alpha0", "alpha1", "levels", "eta", "observable", "tol_target", "growth", "mantissa_cap",
      "anchor_grid", "strict_lengths", "delta1"}},
    {"dense-variant", {"x1", "x2", "target1", "target2", "eps", "levels", "observable"}},
    {"lyapunov", {"n", "control"}},
};

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string strip_quotes(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

} // namespace

Mat2i parse_matrix(const std::string& csv) {
    std::istringstream in(csv);
    std::string tok;
    std::vector<long> e;
    while (std::getline(in, tok, ',')) e.push_back(std::stol(trim(tok)));
    if (e.size() != 4) throw ConfigInvalid("matrix needs 4 integers, got '" + csv + "'");
    return {e[0], e[1], e[2], e[3]};
}

std::vector<Mat2i> parse_matrix_list(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    std::vector<Mat2i> out;
    while (std::getline(in, tok, ';'))
        if (!trim(tok).empty()) out.push_back(parse_matrix(tok));
    return out;
}

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[' && s.back() == ']') {
            section = trim(s.substr(1, s.size() - 2));
            bool known = section == "system" || section == "numerics" ||
                         kCommandKeys.count(section) > 0;
            if (!known)
                throw ConfigInvalid("line " + std::to_string(lineno) + ": unknown section [" +
                                    section + "]");
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigInvalid("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string val = strip_quotes(trim(s.substr(eq + 1)));
        if (section == "system") {
            if (!kSystemKeys.count(key))
                throw ConfigInvalid("unknown key '" + key + "' in [system]");
            if (key == "driver") cfg.driver = val;
            else if (key == "alpha") cfg.alpha = val;
            else if (key == "omega0") cfg.omega0 = val;
            else if (key == "matrix") cfg.matrix = val;
            else if (key == "h") cfg.h = val;
            else cfg.matrices = val;
        } else if (section == "numerics") {
            if (!kNumericsKeys.count(key))
                throw ConfigInvalid("unknown key '" + key + "' in [numerics]");
            if (key == "mode") cfg.mode = val;
            else if (key == "mantissa_bits") cfg.mantissa_bits = std::stol(val);
            else cfg.seed = std::stoul(val);
        } else if (kCommandKeys.count(section)) {
            if (!kCommandKeys.at(section).count(key))
                throw ConfigInvalid("unknown key '" + key + "' in [" + section + "]");
            cfg.command[section][key] = val;
        } else {
            throw ConfigInvalid("line " + std::to_string(lineno) + ": key outside any section");
        }
    }
    if (cfg.driver != "rotation" && cfg.driver != "sturmian")
        throw ConfigInvalid("driver must be 'rotation' or 'sturmian', got '" + cfg.driver + "'");
    if (cfg.mode != "double" && cfg.mode != "bigfloat")
        throw ConfigInvalid("mode must be 'double' or 'bigfloat', got '" + cfg.mode + "'");
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string RunConfig::emit() const {
    std::ostringstream out;
    out << "[system]\n";
    out << "driver = " << driver << "\n";
    out << "alpha = " << alpha << "\n";
    out << "omega0 = " << omega0 << "\n";
    out << "matrix = " << matrix << "\n";
    out << "h = " << h << "\n";
    out << "matrices = " << matrices << "\n";
    out << "[numerics]\n";
    out << "mode = " << mode << "\n";
    out << "mantissa_bits = " << mantissa_bits << "\n";
    out << "seed = " << seed << "\n";
    for (const auto& [section, kv] : command) {
        out << "[" << section << "]\n";
        for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
    }
    return out.str();
}

std::map<std::string, std::string> RunConfig::flatten() const {
    std::map<std::string, std::string> f;
    f["system.driver"] = driver;
    f["system.alpha"] = alpha;
    f["system.omega0"] = omega0;
    f["system.matrix"] = matrix;
    f["system.h"] = h;
    f["system.matrices"] = matrices;
    f["numerics.mode"] = mode;
    f["numerics.mantissa_bits"] = std::to_string(mantissa_bits);
    f["numerics.seed"] = std::to_string(seed);
    for (const auto& [section, kv] : command)
        for (const auto& [k, v] : kv) f[section + "." + k] = v;
    return f;
}

DriverPtr RunConfig::make_driver() const {
    AlphaSpec a = AlphaSpec::parse(alpha);
    if (driver == "rotation") {
        AlphaSpec w0;
        if (omega0 == "0" || omega0.empty()) {
            w0.kind = AlphaSpec::Kind::Decimal;
            w0.decimal = "0";
        } else {
            w0.kind = AlphaSpec::Kind::Decimal;
            w0.decimal = omega0;
            BigFloat probe(omega0, 64);
            if (probe.cmp_d(0.0) < 0 || probe.cmp_d(1.0) >= 0)
                throw ConfigInvalid("omega0 must lie in [0,1)");
        }
        return std::make_shared<CircleRotation>(a, w0);
    }
    long base = omega0.empty() ? 0 : std::stol(omega0);
    return std::make_shared<SturmianDriver>(a, base);
}

SkewSystem RunConfig::make_system() const {
    OffsetKind off;
    std::vector<std::array<double, 2>> table;
    if (h == "zero") off = OffsetKind::Zero;
    else if (h == "omega") off = OffsetKind::OmegaX;
    else if (h.rfind("table:", 0) == 0) {
        off = OffsetKind::Tabulated;
        std::ifstream in(h.substr(6));
        if (!in) throw ConfigInvalid("cannot read offset table " + h.substr(6));
        double u, v;
        while (in >> u >> v) table.push_back({u, v});
    } else {
        throw ConfigInvalid("h must be zero | omega | table:<path>, got '" + h + "'");
    }
    return make_affine_system(make_driver(), parse_matrix(matrix), off, std::move(table));
}

SkewSystem RunConfig::make_cocycle_system() const {
    if (driver != "sturmian")
        throw ConfigInvalid("cocycle systems need the sturmian driver");
    return skewlab::make_cocycle_system(make_driver(), parse_matrix_list(matrices));
}

NumericsContext RunConfig::make_context() const {
    if (mode == "double") return NumericsContext::double_mode();
    return NumericsContext::bigfloat(mantissa_bits);
}

std::string RunConfig::command_param(const std::string& section, const std::string& key,
                                     const std::string& fallback) const {
    auto s = command.find(section);
    if (s == command.end()) return fallback;
    auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

} // namespace skewlab
