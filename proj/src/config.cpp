#include "growfem/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "growfem/error.hpp"

namespace growfem {

namespace {

using nlohmann::json;

/// Typed field access with "section.key" paths in every message.
class Section {
public:
    Section(const json& j, std::string path, const std::string& source,
            std::initializer_list<const char*> allowed, std::vector<std::string>& unknown)
        : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw Error(source + ": " + path_ + ": expected an object");
        std::set<std::string> ok;
        for (const char* k : allowed)
            ok.insert(k);
        for (const auto& [key, value] : j_.items())
            if (!ok.count(key))
                unknown.push_back(path_.empty() ? key : path_ + "." + key);
        source_ = source;
    }

    bool has(const char* key) const { return j_.contains(key); }

    double num(const char* key, double def) const {
        if (!has(key))
            return def;
        if (!j_[key].is_number())
            throw Error(where(key) + ": expected a number");
        return j_[key].get<double>();
    }

    std::optional<double> opt_num(const char* key) const {
        if (!has(key))
            return std::nullopt;
        return num(key, 0.0);
    }

    int integer(const char* key, int def) const {
        if (!has(key))
            return def;
        if (!j_[key].is_number_integer())
            throw Error(where(key) + ": expected an integer");
        return j_[key].get<int>();
    }

    bool boolean(const char* key, bool def) const {
        if (!has(key))
            return def;
        if (!j_[key].is_boolean())
            throw Error(where(key) + ": expected true or false");
        return j_[key].get<bool>();
    }

    std::string str(const char* key, const std::string& def) const {
        if (!has(key))
            return def;
        if (!j_[key].is_string())
            throw Error(where(key) + ": expected a string");
        return j_[key].get<std::string>();
    }

private:
    std::string where(const char* key) const {
        return source_ + ": " + (path_.empty() ? std::string(key) : path_ + "." + key);
    }

    const json& j_;
    std::string path_;
    std::string source_;
};

const json kEmptyObject = json::object();

const json& section_or_empty(const json& doc, const char* key) {
    return doc.contains(key) ? doc[key] : kEmptyObject;
}

} // namespace

RunConfig parse_config(const std::string& json_text, const std::string& source_name) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(source_name + ": " + e.what());
    }

    std::vector<std::string> unknown;
    RunConfig cfg;
    const Section top(doc, "", source_name, {"mode", "geometry", "solver", "params", "output"}, unknown);

    const Section geometry(section_or_empty(doc, "geometry"), "geometry", source_name,
                           {"t", "t1", "n_points_per_segment", "target_edge_length"}, unknown);
    const Section solver(section_or_empty(doc, "solver"), "solver", source_name,
                         {"dt", "t_end", "picard_tol", "picard_max_iters", "linear_solver_tol", "strict_mesh"},
                         unknown);
    const Section params(section_or_empty(doc, "params"), "params", source_name,
                         {"T", "L", "rho_A", "rho_B", "rho_C", "d_A", "d_B", "d_C", "D", "D_A", "D_B", "D_C",
                          "K_BA", "K_AB", "K_CB", "K_AC"},
                         unknown);
    const Section output(section_or_empty(doc, "output"), "output", source_name, {"dir", "snapshot_every"}, unknown);

    if (!unknown.empty()) {
        std::string msg = source_name + ": unknown config keys:";
        for (const auto& k : unknown)
            msg += " " + k;
        throw Error(msg);
    }

    const std::string mode = top.str("mode", "model2");
    if (mode == "model1")
        cfg.mode = Mode::Model1;
    else if (mode == "model2")
        cfg.mode = Mode::Model2;
    else
        throw Error(source_name + ": mode: expected \"model1\" or \"model2\", got \"" + mode + "\"");

    cfg.geometry_t = geometry.str("t", "");
    cfg.geometry_t1 = geometry.str("t1", "");
    if (cfg.geometry_t.empty())
        throw Error(source_name + ": geometry.t is required");
    if (cfg.geometry_t1.empty())
        throw Error(source_name + ": geometry.t1 is required");
    cfg.n_points_per_segment = geometry.integer("n_points_per_segment", cfg.n_points_per_segment);
    if (cfg.n_points_per_segment < 2)
        throw Error(source_name + ": geometry.n_points_per_segment: must be at least 2");
    cfg.target_edge_length = geometry.num("target_edge_length", cfg.target_edge_length);
    if (!(cfg.target_edge_length >= 0.0))
        throw Error(source_name + ": geometry.target_edge_length: must be >= 0");

    cfg.solver.dt = solver.num("dt", cfg.solver.dt);
    cfg.solver.t_end = solver.num("t_end", cfg.solver.t_end);
    cfg.solver.picard_tol = solver.num("picard_tol", cfg.solver.picard_tol);
    cfg.solver.picard_max_iters = solver.integer("picard_max_iters", cfg.solver.picard_max_iters);
    cfg.solver.linear_solver_tol = solver.num("linear_solver_tol", cfg.solver.linear_solver_tol);
    // Model1 runs lenient unless asked otherwise, so degraded meshes are
    // reported in quality.csv instead of aborting the run.
    cfg.solver.strict_mesh =
        solver.boolean("strict_mesh", cfg.mode == Mode::Model1 ? false : cfg.solver.strict_mesh);
    try {
        cfg.solver.validate();
    } catch (const Error& e) {
        throw Error(source_name + ": solver: " + e.what());
    }

    cfg.T = params.num("T", cfg.T);
    if (!(cfg.T > 0.0))
        throw Error(source_name + ": params.T: must be positive");
    cfg.L = params.num("L", cfg.L);
    if (!(cfg.L > 0.0))
        throw Error(source_name + ": params.L: must be positive");
    cfg.params.rate.rho_A = params.num("rho_A", 1e-4 * cfg.T);
    cfg.params.rate.rho_B = params.num("rho_B", 5e-3 * cfg.T);
    cfg.params.rate.rho_C = params.num("rho_C", 2e-2 * cfg.T);
    cfg.params.rate.d_A = params.num("d_A", 1e-6 * cfg.T);
    cfg.params.rate.d_B = params.num("d_B", 1e-6 * cfg.T);
    cfg.params.rate.d_C = params.num("d_C", 1e-6 * cfg.T);
    cfg.params.rate.D_diff = params.num("D", 1.0 * cfg.T);
    cfg.params.rate.D_A = params.opt_num("D_A");
    cfg.params.rate.D_B = params.opt_num("D_B");
    cfg.params.rate.D_C = params.opt_num("D_C");
    cfg.params.hill.K_BA = params.num("K_BA", cfg.params.hill.K_BA);
    cfg.params.hill.K_AB = params.num("K_AB", cfg.params.hill.K_AB);
    cfg.params.hill.K_CB = params.num("K_CB", cfg.params.hill.K_CB);
    cfg.params.hill.K_AC = params.num("K_AC", cfg.params.hill.K_AC);
    try {
        validate_params(cfg.params);
    } catch (const Error& e) {
        throw Error(source_name + ": params: " + e.what());
    }

    cfg.output_dir = output.str("dir", cfg.output_dir);
    cfg.snapshot_every = output.integer("snapshot_every", cfg.snapshot_every);
    if (cfg.snapshot_every < 0)
        throw Error(source_name + ": output.snapshot_every: must be >= 0");

    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open config: " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    RunConfig cfg = parse_config(buf.str(), path);

    // Relative geometry paths are taken relative to the config file.
    const auto base = std::filesystem::path(path).parent_path();
    for (std::string* p : {&cfg.geometry_t, &cfg.geometry_t1}) {
        std::filesystem::path gp(*p);
        if (gp.is_relative())
            gp = base / gp;
        if (!std::filesystem::exists(gp))
            throw Error(path + ": geometry file not found: " + gp.string());
        *p = gp.string();
    }
    return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
    json doc;
    doc["mode"] = cfg.mode == Mode::Model1 ? "model1" : "model2";
    doc["geometry"] = {{"t", cfg.geometry_t},
                       {"t1", cfg.geometry_t1},
                       {"n_points_per_segment", cfg.n_points_per_segment},
                       {"target_edge_length", cfg.target_edge_length}};
    doc["solver"] = {{"dt", cfg.solver.dt},
                     {"t_end", cfg.solver.t_end},
                     {"picard_tol", cfg.solver.picard_tol},
                     {"picard_max_iters", cfg.solver.picard_max_iters},
                     {"linear_solver_tol", cfg.solver.linear_solver_tol},
                     {"strict_mesh", cfg.solver.strict_mesh}};
    json p = {{"T", cfg.T},           {"L", cfg.L},
              {"rho_A", cfg.params.rate.rho_A}, {"rho_B", cfg.params.rate.rho_B},
              {"rho_C", cfg.params.rate.rho_C}, {"d_A", cfg.params.rate.d_A},
              {"d_B", cfg.params.rate.d_B},     {"d_C", cfg.params.rate.d_C},
              {"D", cfg.params.rate.D_diff},    {"K_BA", cfg.params.hill.K_BA},
              {"K_AB", cfg.params.hill.K_AB},   {"K_CB", cfg.params.hill.K_CB},
              {"K_AC", cfg.params.hill.K_AC}};
    if (cfg.params.rate.D_A)
        p["D_A"] = *cfg.params.rate.D_A;
    if (cfg.params.rate.D_B)
        p["D_B"] = *cfg.params.rate.D_B;
    if (cfg.params.rate.D_C)
        p["D_C"] = *cfg.params.rate.D_C;
    doc["params"] = std::move(p);
    doc["output"] = {{"dir", cfg.output_dir}, {"snapshot_every", cfg.snapshot_every}};
    return doc.dump(2) + "\n";
}

} // namespace growfem
