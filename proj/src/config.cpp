#include "reuse/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "reuse/error.hpp"

namespace reuse::config {

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    throw Error(ErrorKind::Config, "config key '" + key + "': " + why);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string as_string(const std::string& key, const io::Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    bad(key, "expected a scalar");
}

double as_double(const std::string& key, const io::Json& v) {
    if (v.is_number()) return v.get<double>();
    try {
        std::size_t pos = 0;
        const std::string s = trim(as_string(key, v));
        const double x = std::stod(s, &pos);
        if (pos != s.size()) bad(key, "not a number: '" + s + "'");
        return x;
    } catch (const std::logic_error&) {
        bad(key, "not a number");
    }
}

std::int64_t as_int(const std::string& key, const io::Json& v) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    const double x = as_double(key, v);
    if (x != std::floor(x)) bad(key, "expected an integer");
    return static_cast<std::int64_t>(x);
}

std::uint64_t as_u64(const std::string& key, const io::Json& v) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0) bad(key, "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }
    const std::string s = trim(as_string(key, v));
    try {
        std::size_t pos = 0;
        const auto x = std::stoull(s, &pos);
        if (pos != s.size() || s.starts_with('-')) bad(key, "expected a nonnegative integer");
        return x;
    } catch (const std::logic_error&) {
        bad(key, "expected a nonnegative integer");
    }
}

bool as_bool(const std::string& key, const io::Json& v) {
    if (v.is_boolean()) return v.get<bool>();
    std::string s = trim(as_string(key, v));
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    bad(key, "expected a boolean");
}

std::vector<double> as_doubles(const std::string& key, const io::Json& v) {
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto& e : v) out.push_back(as_double(key, e));
        return out;
    }
    if (v.is_number()) return {v.get<double>()};
    try {
        return parse_number_list(as_string(key, v));
    } catch (const Error& e) {
        bad(key, e.what());
    }
}

std::vector<std::string> as_strings(const std::string& key, const io::Json& v) {
    std::vector<std::string> out;
    if (v.is_array()) {
        for (const auto& e : v) out.push_back(as_string(key, e));
        return out;
    }
    std::stringstream ss(as_string(key, v));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class F>
auto wrap(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Config) throw;
        bad(key, e.what());
    }
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
    std::string t = trim(text);
    if (!t.empty() && t.front() == '[') {
        if (t.back() != ']') throw Error(ErrorKind::Config, "unterminated list '" + text + "'");
        t = t.substr(1, t.size() - 2);
    }
    std::vector<double> out;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw Error(ErrorKind::Config, "empty entry in list '" + text + "'");
        std::size_t pos = 0;
        double x = 0;
        try {
            x = std::stod(item, &pos);
        } catch (const std::logic_error&) {
            pos = 0;
        }
        if (pos != item.size()) throw Error(ErrorKind::Config, "not a number: '" + item + "'");
        out.push_back(x);
    }
    return out;
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "link.hermite", "link.monomial", "link.direction", "link.power_cap",
        "data.d", "data.noise_std",
        "network.N", "network.activation", "network.c_q", "network.c", "network.r", "network.c_relu",
        "network.fixed", "network.fixed_relu",
        "trainer.mode", "trainer.eta_weak", "trainer.eta_strong", "trainer.c_xi", "trainer.xi_strong",
        "trainer.strong_odd_eta_zero", "trainer.T11", "trainer.T12", "trainer.T2", "trainer.lambda",
        "trainer.batch_size", "trainer.loss", "trainer.c_a", "trainer.C_b", "trainer.steps",
        "trainer.full_batch_n", "trainer.max_checkpoints", "trainer.backend",
        "run.seed", "run.test_samples", "run.thresholds",
        "sweep.d_values", "sweep.n_values", "sweep.modes", "sweep.seeds", "sweep.strong_fraction", "sweep.svg",
    };
    return keys;
}

void apply_value(Settings& st, const std::string& key, const io::Json& v) {
    auto& r = st.run();
    auto& s = r.schedule;
    auto& a = r.activation;
    auto& g = st.sweep;
    const auto positive = [&](std::int64_t x) {
        if (x <= 0) bad(key, "must be positive");
        return x;
    };
    const auto nonneg = [&](auto x) {
        if (x < 0) bad(key, "must be nonnegative");
        return x;
    };

    if (key == "link.hermite") {
        r.link = hermite::HermiteSeries(as_doubles(key, v));
    } else if (key == "link.monomial") {
        const auto c = as_doubles(key, v);
        r.link = hermite::from_monomial(std::span<const double>(c.data(), c.size()));
    } else if (key == "link.direction") {
        r.direction = wrap(key, [&] { return model::parse_direction_mode(as_string(key, v)); });
    } else if (key == "link.power_cap") {
        r.power_cap = static_cast<int>(positive(as_int(key, v)));
    } else if (key == "data.d") {
        const auto d = as_int(key, v);
        if (d < 2) bad(key, "dimension must be >= 2");
        r.d = static_cast<int>(d);
    } else if (key == "data.noise_std") {
        r.noise_std = nonneg(as_double(key, v));
    } else if (key == "network.N") {
        r.N = static_cast<int>(positive(as_int(key, v)));
    } else if (key == "network.activation") {
        a.family = wrap(key, [&] { return network::parse_activation_family(as_string(key, v)); });
    } else if (key == "network.c_q") {
        a.c_q = static_cast<int>(nonneg(as_int(key, v)));
    } else if (key == "network.c") {
        a.c = nonneg(as_double(key, v));
    } else if (key == "network.r") {
        a.r = nonneg(as_double(key, v));
    } else if (key == "network.c_relu") {
        a.c_relu = nonneg(as_double(key, v));
    } else if (key == "network.fixed") {
        a.fixed = hermite::HermiteSeries(as_doubles(key, v));
    } else if (key == "network.fixed_relu") {
        a.fixed_relu = nonneg(as_double(key, v));
    } else if (key == "trainer.mode") {
        s.mode = wrap(key, [&] { return trainer::parse_train_mode(as_string(key, v)); });
    } else if (key == "trainer.eta_weak") {
        s.eta_phase1_weak = nonneg(as_double(key, v));
    } else if (key == "trainer.eta_strong") {
        s.eta_phase1_strong = nonneg(as_double(key, v));
    } else if (key == "trainer.c_xi") {
        s.xi_weak = nonneg(as_double(key, v));
    } else if (key == "trainer.xi_strong") {
        s.xi_strong = as_double(key, v);
    } else if (key == "trainer.strong_odd_eta_zero") {
        s.strong_phase_odd_step_eta_zero = as_bool(key, v);
    } else if (key == "trainer.T11") {
        s.T11 = nonneg(as_int(key, v));
    } else if (key == "trainer.T12") {
        s.T12 = nonneg(as_int(key, v));
    } else if (key == "trainer.T2") {
        s.T2 = nonneg(as_int(key, v));
    } else if (key == "trainer.lambda") {
        s.lambda = as_double(key, v);
    } else if (key == "trainer.batch_size") {
        s.batch_size = static_cast<int>(positive(as_int(key, v)));
    } else if (key == "trainer.loss") {
        s.loss = wrap(key, [&] { return kernels::parse_loss_mode(as_string(key, v)); });
    } else if (key == "trainer.c_a") {
        s.c_a = nonneg(as_double(key, v));
    } else if (key == "trainer.C_b") {
        s.C_b = nonneg(as_double(key, v));
    } else if (key == "trainer.steps") {
        s.steps = nonneg(as_int(key, v));
    } else if (key == "trainer.full_batch_n") {
        s.full_batch_n = nonneg(as_int(key, v));
    } else if (key == "trainer.max_checkpoints") {
        s.max_checkpoints = static_cast<int>(positive(as_int(key, v)));
    } else if (key == "trainer.backend") {
        s.backend = wrap(key, [&] { return kernels::parse_backend(as_string(key, v)); });
    } else if (key == "run.seed") {
        r.seed = as_u64(key, v);
    } else if (key == "run.test_samples") {
        r.test_samples = static_cast<std::uint64_t>(positive(as_int(key, v)));
    } else if (key == "run.thresholds") {
        r.thresholds = as_doubles(key, v);
    } else if (key == "sweep.d_values") {
        g.d_values.clear();
        for (double x : as_doubles(key, v)) {
            if (x < 2 || x != std::floor(x)) bad(key, "dimensions must be integers >= 2");
            g.d_values.push_back(static_cast<int>(x));
        }
    } else if (key == "sweep.n_values") {
        g.n_values.clear();
        for (double x : as_doubles(key, v)) {
            if (x < 1 || x != std::floor(x)) bad(key, "budgets must be positive integers");
            g.n_values.push_back(static_cast<std::int64_t>(x));
        }
    } else if (key == "sweep.modes") {
        g.modes.clear();
        for (const auto& m : as_strings(key, v)) g.modes.push_back(wrap(key, [&] { return trainer::parse_train_mode(m); }));
    } else if (key == "sweep.seeds") {
        g.seeds = static_cast<int>(positive(as_int(key, v)));
    } else if (key == "sweep.strong_fraction") {
        const double f = as_double(key, v);
        if (f < 0 || f > 1) bad(key, "must lie in [0, 1]");
        g.strong_fraction = f;
    } else if (key == "sweep.svg") {
        st.svg = as_bool(key, v);
    } else {
        throw Error(ErrorKind::Config, "unknown config key '" + key + "'");
    }
}

void load_text(Settings& s, const std::string& text, const std::string& origin) {
    const std::string t = trim(text);
    if (!t.empty() && t.front() == '{') {
        io::Json j;
        try {
            j = io::Json::parse(t);
        } catch (const io::Json::parse_error& e) {
            throw Error(ErrorKind::Config, origin + ": " + e.what());
        }
        for (const auto& [section, body] : j.items()) {
            if (!body.is_object()) throw Error(ErrorKind::Config, origin + ": section '" + section + "' must be an object");
            for (const auto& [k, v] : body.items()) apply_value(s, section + "." + k, v);
        }
        return;
    }
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::Config, origin + ":" + std::to_string(lineno) + ": expected 'section.key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        try {
            apply_value(s, key, io::Json(value));
        } catch (const Error& e) {
            throw Error(e.kind(), origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void load_file(Settings& s, const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::Usage, "cannot open config file " + path.string());
    std::stringstream buf;
    buf << is.rdbuf();
    load_text(s, buf.str(), path.string());
}

void apply_env(Settings& s, char** envp) {
    if (!envp) return;
    const std::string prefix = kEnvPrefix;
    for (char** e = envp; *e; ++e) {
        const std::string entry = *e;
        if (!entry.starts_with(prefix)) continue;
        const auto eq = entry.find('=');
        const std::string name = entry.substr(prefix.size(), eq - prefix.size());
        const std::string value = eq == std::string::npos ? "" : entry.substr(eq + 1);
        std::string match;
        for (const auto& k : known_keys()) {
            std::string up = k;
            std::replace(up.begin(), up.end(), '.', '_');
            std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
            if (up == name) match = k;
        }
        if (match.empty()) throw Error(ErrorKind::Config, "unknown environment override " + prefix + name);
        apply_value(s, match, io::Json(value));
    }
}

io::Json resolved_json(const Settings& s) {
    io::Json j = experiments::to_json(s.run());
    std::vector<std::string> modes;
    for (auto m : s.sweep.modes) modes.emplace_back(trainer::to_string(m));
    j["sweep"] = {{"d_values", s.sweep.d_values},
                  {"n_values", s.sweep.n_values},
                  {"modes", modes},
                  {"seeds", s.sweep.seeds},
                  {"strong_fraction", s.sweep.strong_fraction},
                  {"svg", s.svg}};
    return j;
}

}  // namespace reuse::config
