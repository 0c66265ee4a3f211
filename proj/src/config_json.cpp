#include "stochfire/config_json.hpp"

#include <fstream>

#include "stochfire/errors.hpp"

namespace stochfire {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const char* what) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError(std::string(what) + ": unknown key \"" + key + "\"");
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config key \"") + key + "\" has the wrong type");
    }
}

}  // namespace

nlohmann::json sim_config_to_json(const SimConfig& c) {
    json j;
    j["rows"] = c.rows;
    j["cols"] = c.cols;
    j["density"] = c.density;
    j["s_level"] = c.s_level;
    j["q_threshold"] = c.q_threshold;
    j["i_seed"] = c.i_seed;
    j["q_die"] = c.q_die;
    j["q_dead"] = c.q_dead;
    j["alpha"] = c.alpha;
    j["radius"] = c.radius;
    j["max_steps"] = c.max_steps;
    j["n_seeds"] = c.n_seeds;
    j["seed_cells"] = c.seed_cells;
    j["master_seed"] = c.master_seed;
    j["shared_initial"] = c.shared_initial;
    return j;
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown_keys(j,
                        {"rows", "cols", "density", "s_level", "q_threshold", "i_seed",
                         "q_die", "q_dead", "alpha", "radius", "max_steps", "n_seeds",
                         "seed_cells", "master_seed", "shared_initial"},
                        "config");
    SimConfig c;
    read_field(j, "rows", c.rows);
    read_field(j, "cols", c.cols);
    read_field(j, "density", c.density);
    read_field(j, "s_level", c.s_level);
    read_field(j, "q_threshold", c.q_threshold);
    read_field(j, "i_seed", c.i_seed);
    read_field(j, "q_die", c.q_die);
    read_field(j, "q_dead", c.q_dead);
    read_field(j, "alpha", c.alpha);
    read_field(j, "radius", c.radius);
    read_field(j, "max_steps", c.max_steps);
    read_field(j, "n_seeds", c.n_seeds);
    read_field(j, "seed_cells", c.seed_cells);
    read_field(j, "master_seed", c.master_seed);
    read_field(j, "shared_initial", c.shared_initial);
    c.validate();
    return c;
}

nlohmann::json ensemble_spec_to_json(const EnsembleSpec& spec) {
    json j;
    j["config"] = sim_config_to_json(spec.config);
    j["n_sims"] = spec.n_sims;
    j["pad_to"] = spec.pad_to;
    return j;
}

EnsembleSpec ensemble_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("ensemble spec must be a JSON object");
    reject_unknown_keys(j, {"config", "n_sims", "pad_to"}, "ensemble spec");
    EnsembleSpec spec;
    if (j.contains("config")) spec.config = sim_config_from_json(j.at("config"));
    read_field(j, "n_sims", spec.n_sims);
    read_field(j, "pad_to", spec.pad_to);
    spec.validate();
    return spec;
}

EnsembleSpec load_spec_file(const std::filesystem::path& path) {
    const json j = parse_json_file(path);
    if (j.is_object() && j.contains("config")) return ensemble_spec_from_json(j);
    EnsembleSpec spec;
    spec.config = sim_config_from_json(j);
    spec.validate();
    return spec;
}

nlohmann::json parse_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace stochfire
