#include "slotcr/cli/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "slotcr/error.hpp"

namespace slotcr::cli {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ConfigParse, what); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    parse_error(key + ": expected a number, got '" + raw + "'");
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        parse_error(key + ": expected an integer, got '" + raw + "'");
    }
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& raw) {
    std::vector<double> out;
    std::string s = trim(raw);
    if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
    if (trim(s).empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    return out;
}

std::string format_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

SimMode parse_mode(const std::string& key, const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "discretized") return SimMode::Discretized;
    if (s == "exact" || s == "exact-ctmc") return SimMode::ExactCtmc;
    parse_error(key + ": expected 'discretized' or 'exact', got '" + raw + "'");
}

struct Field {
    std::string key;
    std::function<void(Scenario&, const std::string&)> set;
    std::function<std::string(const Scenario&)> get;
};

Field number(std::string key, double Scenario::*m) {
    return {key, [m, key](Scenario& s, const std::string& v) { s.*m = parse_double(key, v); },
            [m](const Scenario& s) { return format_double(s.*m); }};
}

template <typename Int>
Field integer(std::string key, Int Scenario::*m) {
    return {key, [m, key](Scenario& s, const std::string& v) { s.*m = parse_int<Int>(key, v); },
            [m](const Scenario& s) { return std::to_string(s.*m); }};
}

Field list(std::string key, std::vector<double> Scenario::*m) {
    return {key, [m, key](Scenario& s, const std::string& v) { s.*m = parse_list(key, v); },
            [m](const Scenario& s) { return format_list(s.*m); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(number("primary.lambda_ms", &Scenario::lambda_ms));
        f.push_back(number("primary.mu_ms", &Scenario::mu_ms));
        f.push_back(number("sensing.ts_ms", &Scenario::ts_ms));
        f.push_back(number("modulation.ber_target", &Scenario::ber_target));
        f.push_back(integer("modulation.n_rates", &Scenario::n_rates));
        f.push_back(list("modulation.rates", &Scenario::rates));
        f.push_back(list("modulation.thresholds_db", &Scenario::thresholds_db));
        f.push_back({"fading.model", [](Scenario& s, const std::string& v) { s.fading_model = trim(v); },
                     [](const Scenario& s) { return s.fading_model; }});
        f.push_back(number("fading.mean_snr_db", &Scenario::mean_snr_db));
        f.push_back(list("fading.table_snr_db", &Scenario::table_snr_db));
        f.push_back(list("fading.table_cdf", &Scenario::table_cdf));
        f.push_back(number("queue.p_a", &Scenario::p_a));
        f.push_back(integer("queue.capacity", &Scenario::capacity));
        f.push_back(number("packet.h_t_bits", &Scenario::h_t_bits));
        f.push_back(number("packet.symbols_per_slot", &Scenario::symbols_per_slot));
        f.push_back(number("packet.fixed_rate", &Scenario::fixed_rate));
        f.push_back(integer("edt.l_max", &Scenario::l_max));
        f.push_back(integer("sim.seed", &Scenario::seed));
        f.push_back(integer("sim.slots", &Scenario::slots));
        f.push_back(integer("sim.samples", &Scenario::samples));
        f.push_back(integer("sim.burn_in", &Scenario::burn_in));
        f.push_back({"sim.mode", [](Scenario& s, const std::string& v) { s.mode = parse_mode("sim.mode", v); },
                     [](const Scenario& s) {
                         return std::string(s.mode == SimMode::Discretized ? "discretized" : "exact");
                     }});
        f.push_back(integer("sim.workers", &Scenario::workers));
        f.push_back(list("collision.lambda_ms", &Scenario::collision_lambda_ms));
        f.push_back(list("collision.mu_ms", &Scenario::collision_mu_ms));
        f.push_back(list("collision.ts_ms", &Scenario::collision_ts_ms));
        f.push_back(list("queue_dist.lambda_ms", &Scenario::queue_dist_lambda_ms));
        f.push_back(list("queue_dist.ts_ms", &Scenario::queue_dist_ts_ms));
        f.push_back(list("queue_dist.mean_snr_db", &Scenario::queue_dist_mean_snr_db));
        f.push_back(list("queue_metrics.p_a", &Scenario::queue_metrics_p_a));
        f.push_back(list("queue_metrics.lambda_ms", &Scenario::queue_metrics_lambda_ms));
        f.push_back(list("queue_metrics.mu_ms", &Scenario::queue_metrics_mu_ms));
        f.push_back(list("queue_metrics.mean_snr_db", &Scenario::queue_metrics_mean_snr_db));
        f.push_back(list("edt_fixed.h_t_bits", &Scenario::edt_fixed_h_t_bits));
        f.push_back(list("edt_fixed.lambda_ms", &Scenario::edt_fixed_lambda_ms));
        f.push_back(list("edt_fixed.mu_ms", &Scenario::edt_fixed_mu_ms));
        f.push_back(list("edt_adaptive.mean_snr_db", &Scenario::edt_adaptive_mean_snr_db));
        f.push_back(list("edt_adaptive.h_t_bits", &Scenario::edt_adaptive_h_t_bits));
        return f;
    }();
    return table;
}

void flatten(const YAML::Node& node, const std::string& prefix, FlatConfig& out) {
    switch (node.Type()) {
    case YAML::NodeType::Map:
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            flatten(kv.second, prefix.empty() ? key : prefix + "." + key, out);
        }
        break;
    case YAML::NodeType::Sequence: {
        std::string joined;
        for (std::size_t i = 0; i < node.size(); ++i) {
            if (!node[i].IsScalar()) parse_error(prefix + ": lists may only hold scalars");
            if (i) joined += ',';
            joined += node[i].as<std::string>();
        }
        out[prefix] = joined;
        break;
    }
    case YAML::NodeType::Scalar: out[prefix] = node.as<std::string>(); break;
    case YAML::NodeType::Null: out[prefix] = ""; break;
    case YAML::NodeType::Undefined: break;
    }
}

void require_nonempty(const std::vector<double>& axis, const char* name) {
    if (axis.empty()) throw Error(ErrorCode::InvalidConfig, std::string(name) + " sweep axis is empty");
    for (double v : axis) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, std::string(name) + " has a non-finite entry");
    }
}

} // namespace

FlatConfig parse_config_text(const std::string& text) {
    FlatConfig out;
    try {
        const YAML::Node root = YAML::Load(text);
        if (root.IsNull()) return out;
        if (!root.IsMap()) parse_error("configuration must be a mapping of sections");
        flatten(root, "", out);
    } catch (const YAML::Exception& e) {
        parse_error(e.what());
    }
    return out;
}

FlatConfig load_config_file(const std::string& path) {
    try {
        const YAML::Node root = YAML::LoadFile(path);
        FlatConfig out;
        if (root.IsNull()) return out;
        if (!root.IsMap()) parse_error("configuration must be a mapping of sections");
        flatten(root, "", out);
        return out;
    } catch (const YAML::BadFile&) {
        throw Error(ErrorCode::Io, "cannot read configuration file " + path);
    } catch (const YAML::Exception& e) {
        parse_error(e.what());
    }
}

void apply_override(FlatConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) parse_error("override must look like key=value: '" + assignment + "'");
    config[trim(assignment.substr(0, eq))] = assignment.substr(eq + 1);
}

Scenario::Scenario() {
    for (int k = 1; k <= 19; ++k) queue_metrics_p_a.push_back(k / 20.0);
}

Scenario Scenario::from_config(const FlatConfig& config) {
    Scenario s;
    for (const auto& [key, value] : config) {
        const auto& table = fields();
        const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
        if (it == table.end()) parse_error("unknown configuration key '" + key + "'");
        it->set(s, value);
    }
    s.validate();
    return s;
}

FlatConfig Scenario::to_config() const {
    FlatConfig out;
    for (const auto& f : fields()) out[f.key] = f.get(*this);
    return out;
}

std::string Scenario::describe() const {
    std::string out;
    for (const auto& [key, value] : to_config()) {
        if (!out.empty()) out += ';';
        out += key + '=' + value;
    }
    return out;
}

AmScheme Scenario::scheme() const {
    if (rates.empty()) return rate_thresholds(ber_target, n_rates);
    std::vector<double> t;
    for (double db : thresholds_db) t.push_back(db_to_linear(db));
    return AmScheme(rates, t);
}

FadingModel Scenario::fading() const {
    if (fading_model == "rayleigh") return FadingModel::rayleigh(db_to_linear(mean_snr_db));
    if (fading_model == "table") {
        std::vector<double> snr;
        for (double db : table_snr_db) snr.push_back(db_to_linear(db));
        return FadingModel::tabulated(snr, table_cdf);
    }
    throw Error(ErrorCode::InvalidConfig, "fading.model must be 'rayleigh' or 'table'");
}

SimConfig Scenario::sim_config() const {
    SimConfig c;
    c.seed = seed;
    c.n_slots = slots;
    c.burn_in = burn_in;
    c.n_edt_samples = samples;
    c.mode = mode;
    c.scenario.primary = primary();
    c.scenario.sensing = sensing();
    c.scenario.scheme = scheme();
    c.scenario.fading = fading();
    c.scenario.arrivals = arrivals();
    c.scenario.queue = queue();
    c.scenario.packet = packet();
    c.scenario.fixed_rate = fixed_rate;
    return c;
}

void Scenario::validate() const {
    try {
        primary().validate();
        sensing().validate();
        (void)scheme();
        (void)fading();
        arrivals().validate();
        queue().validate();
        packet().validate();
        if (!(fixed_rate > 0.0)) throw Error(ErrorCode::InvalidParameter, "packet.fixed_rate must be positive");
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigParse) throw;
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    if (workers < 1) throw Error(ErrorCode::InvalidConfig, "sim.workers must be >= 1");
    if (l_max < 0) throw Error(ErrorCode::InvalidConfig, "edt.l_max must be >= 0");
    require_nonempty(collision_lambda_ms, "collision.lambda_ms");
    require_nonempty(collision_mu_ms, "collision.mu_ms");
    require_nonempty(collision_ts_ms, "collision.ts_ms");
    require_nonempty(queue_dist_lambda_ms, "queue_dist.lambda_ms");
    require_nonempty(queue_dist_ts_ms, "queue_dist.ts_ms");
    require_nonempty(queue_dist_mean_snr_db, "queue_dist.mean_snr_db");
    require_nonempty(queue_metrics_p_a, "queue_metrics.p_a");
    require_nonempty(queue_metrics_lambda_ms, "queue_metrics.lambda_ms");
    require_nonempty(queue_metrics_mu_ms, "queue_metrics.mu_ms");
    require_nonempty(queue_metrics_mean_snr_db, "queue_metrics.mean_snr_db");
    require_nonempty(edt_fixed_h_t_bits, "edt_fixed.h_t_bits");
    require_nonempty(edt_fixed_lambda_ms, "edt_fixed.lambda_ms");
    require_nonempty(edt_fixed_mu_ms, "edt_fixed.mu_ms");
    require_nonempty(edt_adaptive_mean_snr_db, "edt_adaptive.mean_snr_db");
    require_nonempty(edt_adaptive_h_t_bits, "edt_adaptive.h_t_bits");
}

} // namespace slotcr::cli
