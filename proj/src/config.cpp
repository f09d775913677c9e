#include "drheo/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace drheo {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

config config::parse_string(const std::string& text) {
    config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(error_kind::config, "config line " + std::to_string(lineno) + ": missing '='");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            fail(error_kind::config, "config line " + std::to_string(lineno) + ": empty key");
        c.kv_[key] = val;
    }
    return c;
}

config config::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(error_kind::io, "cannot read config file " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_string(ss.str());
}

std::string config::get_string(const std::string& key, const std::string& dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
}

double config::get_double(const std::string& key, double dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    char* end = nullptr;
    double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        fail(error_kind::config, "config key " + key + ": not a number: " + it->second);
    return v;
}

double config::require_double(const std::string& key) const {
    if (!has(key)) fail(error_kind::config, "config key " + key + " is required");
    return get_double(key, 0.0);
}

long config::get_long(const std::string& key, long dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    char* end = nullptr;
    long v = std::strtol(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        fail(error_kind::config, "config key " + key + ": not an integer: " + it->second);
    return v;
}

bool config::get_bool(const std::string& key, bool dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    const std::string& s = it->second;
    if (s == "on" || s == "true" || s == "1" || s == "yes") return true;
    if (s == "off" || s == "false" || s == "0" || s == "no") return false;
    fail(error_kind::config, "config key " + key + ": not a boolean: " + s);
}

std::uint64_t config::get_u64(const std::string& key, std::uint64_t dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    char* end = nullptr;
    unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        fail(error_kind::config, "config key " + key + ": not an integer: " + it->second);
    return v;
}

std::vector<double> config::get_double_list(const std::string& key) const {
    std::vector<double> out;
    auto it = kv_.find(key);
    if (it == kv_.end()) return out;
    std::istringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        char* end = nullptr;
        double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0')
            fail(error_kind::config, "config key " + key + ": bad list entry: " + item);
        out.push_back(v);
    }
    return out;
}

std::vector<int> config::get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (double v : get_double_list(key)) out.push_back(static_cast<int>(v));
    return out;
}

std::string config::echo() const {
    std::string out;
    for (const auto& [k, v] : kv_) out += k + " = " + v + "\n";
    return out;
}

rheology_model config::make_model() const {
    int d = static_cast<int>(get_long("grid.d", 2));
    std::string kind = get_string("rheology.kind", "newtonian");
    double my_eps = get_double("rheology.moreau_yosida", 0.0);

    auto isotropic = [&](const std::string& k) -> rheology_model {
        if (k == "newtonian") return rheology_model::newtonian(d, get_double("rheology.mu", 1.0));
        if (k == "power_law")
            return rheology_model::power_law(d, get_double("rheology.mu2", 1.0),
                                             require_double("rheology.p"),
                                             get_double("rheology.mu1", 0.0));
        if (k == "carreau")
            return rheology_model::carreau(d, get_double("rheology.mu1", 1.0),
                                           get_double("rheology.mu2", 1.0),
                                           require_double("rheology.p"));
        if (k == "bingham_regularized")
            return rheology_model::bingham_regularized(d, get_double("rheology.mu", 1.0),
                                                       get_double("rheology.tau0", 0.0),
                                                       get_double("rheology.eps_reg", 1e-3));
        fail(error_kind::config, "rheology.kind " + k + " is not isotropic");
    };

    rheology_model model = [&]() -> rheology_model {
        if (kind == "euler") return rheology_model::euler(d);
        if (kind != "anisotropic_wrap") return isotropic(kind);
        // wrapped base selected by the parameters present: p -> power family,
        // tau0 -> bingham, otherwise newtonian
        std::string base_kind = has("rheology.p")      ? "power_law"
                                : has("rheology.tau0") ? "bingham_regularized"
                                                       : "newtonian";
        rheology_model base = isotropic(base_kind);
        std::vector<double> lv = get_double_list("rheology.L");
        const int n = d * d;
        if (static_cast<int>(lv.size()) != n * n)
            fail(error_kind::config, "rheology.L must have d^2 x d^2 entries");
        Eigen::MatrixXd L(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) L(i, j) = lv[static_cast<std::size_t>(i * n + j)];
        return rheology_model::anisotropic_wrap(base, L);
    }();

    if (my_eps > 0.0) model = model.with_moreau_yosida(my_eps);
    return model;
}

} // namespace drheo
