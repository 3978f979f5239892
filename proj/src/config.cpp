#include "dsel/config.hpp"

#include <algorithm>
#include <fstream>

namespace dsel {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

long parse_long(const std::string& v, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        long out = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw config_error(ctx + ": expected an integer, got '" + v + "'");
    }
}

std::size_t parse_size(const std::string& v, const std::string& ctx) {
    const long out = parse_long(v, ctx);
    if (out < 0) throw config_error(ctx + ": expected a nonnegative integer, got '" + v + "'");
    return static_cast<std::size_t>(out);
}

std::uint64_t parse_u64(const std::string& v, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        unsigned long long out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw config_error(ctx + ": expected an unsigned integer, got '" + v + "'");
    }
}

double parse_double(const std::string& v, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw config_error(ctx + ": expected a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& ctx) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw config_error(ctx + ": expected a boolean, got '" + v + "'");
}

}  // namespace

void RunConfig::apply_key(const std::string& key, const std::string& value,
                          const std::string& ctx) {
    if (key == "corpus") corpus_path = value;
    else if (key == "out") output_dir = value;
    else if (key == "ref") reference_path = value;
    else if (key == "model") model_path = value;
    else if (key == "preset") preset = value;
    else if (key == "gen") generator_path = value;
    else if (key == "raw") raw_path = value;
    else if (key == "points") points = parse_size(value, ctx);
    else if (key == "emit_ref") emit_ref = parse_size(value, ctx);
    else if (key == "ref_noise") ref_noise = parse_double(value, ctx);
    else if (key == "T") T = parse_long(value, ctx);
    else if (key == "U") U = parse_long(value, ctx);
    else if (key == "k") k = parse_size(value, ctx);
    else if (key == "batch_size") batch_size = parse_size(value, ctx);
    else if (key == "m") m = parse_size(value, ctx);
    else if (key == "seed") seed = parse_u64(value, ctx);
    else if (key == "actor_eta") actor_eta = parse_double(value, ctx);
    else if (key == "console_eta") console_eta = parse_double(value, ctx);
    else if (key == "regime") regime = value;
    else if (key == "policy") policy = value;
    else if (key == "n_interp") n_interp = value;
    else if (key == "dynamic_theta") dynamic_theta = parse_bool(value, ctx);
    else if (key == "learning_rate") learning_rate = parse_double(value, ctx);
    else if (key == "model_kind") model_kind = value;
    else if (key == "ridge") ridge = parse_double(value, ctx);
    else if (key == "reward_mode") reward_mode = value;
    else if (key == "projection_dim") projection_dim = parse_size(value, ctx);
    else if (key == "projection_seed") projection_seed = parse_u64(value, ctx);
    else if (key == "identity_projection") identity_projection = parse_bool(value, ctx);
    else if (key == "cg_tol") cg_tol = parse_double(value, ctx);
    else if (key == "cg_max_iters") cg_max_iters = static_cast<int>(parse_long(value, ctx));
    else if (key == "damping") damping = value == "auto" ? -1.0 : parse_double(value, ctx);
    else if (key == "init") init = value;
    else if (key == "init_configs") init_configs = parse_size(value, ctx);
    else if (key == "init_family") init_family = value;
    else if (key == "init_concentration") init_concentration = parse_double(value, ctx);
    else if (key == "init_candidates") init_candidates = parse_size(value, ctx);
    else if (key == "init_ridge") init_ridge = parse_double(value, ctx);
    else if (key == "ref_sample") ref_sample = parse_size(value, ctx);
    else if (key == "stage") stage = static_cast<int>(parse_long(value, ctx));
    else throw config_error(ctx + ": unknown key '" + key + "'");
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string ctx = path + ":" + std::to_string(line_no);
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') continue;  // section headers are cosmetic
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw config_error(ctx + ": expected key=value, got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw config_error(ctx + ": empty key");
        cfg.apply_key(key, value, ctx);
    }
}

}  // namespace dsel
