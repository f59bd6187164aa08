#include "bvqft/instance.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace bvqft {

using json = nlohmann::ordered_json;

namespace {

void reject_floats(const json& j, const std::string& where) {
    if (j.is_number_float()) throw ParseError("float scalar rejected at " + where + "; use \"p/q\" strings");
    if (j.is_object())
        for (auto& [k, v] : j.items()) reject_floats(v, where + "." + k);
    if (j.is_array()) {
        int i = 0;
        for (auto& v : j) reject_floats(v, where + "[" + std::to_string(i++) + "]");
    }
}

Rat scalar_of(const json& j, const std::string& where) {
    if (j.is_number_integer()) return Rat(static_cast<long>(j.get<long long>()));
    if (j.is_string()) return parse_rat(j.get<std::string>());
    throw ParseError("expected rational scalar at " + where);
}

std::vector<CVec> parse_functional(const json& j, const GradedBasis& basis, const std::string& where) {
    std::vector<CVec> levels;
    for (auto& [lvl, table] : j.items()) {
        int l = std::stoi(lvl);
        if (l < 0) throw ParseError("negative level in " + where);
        if (static_cast<int>(levels.size()) <= l) levels.resize(static_cast<size_t>(l) + 1);
        CVec v;
        for (auto& [label, val] : table.items()) v.set(basis.at(label), scalar_of(val, where));
        levels[static_cast<size_t>(l)] = v;
    }
    return levels;
}

json functional_to_json(const std::vector<CVec>& levels, const GradedBasis& basis) {
    json out = json::object();
    for (size_t l = 0; l < levels.size(); ++l) {
        if (levels[l].zero()) continue;
        json table = json::object();
        for (auto& [i, v] : levels[l].c) table[basis.labels[static_cast<size_t>(i)]] = rat_str(v);
        out[std::to_string(l)] = table;
    }
    return out;
}

}  // namespace

AlgebraSpec parse_instance(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    reject_floats(j, "$");
    if (!j.contains("basis") || !j.contains("unit") || !j.contains("product"))
        throw ParseError("instance requires basis, unit, and product");

    AlgebraSpec spec;
    spec.name = j.value("name", "unnamed");
    for (auto& b : j.at("basis")) {
        if (!b.contains("label") || !b.contains("ghost")) throw ParseError("basis entries need label and ghost");
        if (!b.at("ghost").is_number_integer()) throw ParseError("ghost numbers must be integers");
        spec.basis.add(b.at("label").get<std::string>(), b.at("ghost").get<int>());
    }
    spec.basis.unit = spec.basis.at(j.at("unit").get<std::string>());

    for (auto& row : j.at("product")) {
        if (!row.is_array() || row.size() != 4) throw ParseError("product rows are [i, j, k, value]");
        int i = spec.basis.at(row[0].get<std::string>());
        int jj = spec.basis.at(row[1].get<std::string>());
        int k = spec.basis.at(row[2].get<std::string>());
        Rat v = scalar_of(row[3], "product");
        if (v != 0) spec.product[{i, jj}].set(k, v);
    }
    if (j.contains("K")) {
        for (auto& [lvl, rows] : j.at("K").items()) {
            int l = std::stoi(lvl);
            if (l < 0) throw ParseError("negative K level");
            if (static_cast<int>(spec.K.size()) <= l) {
                LinearMap zero;
                zero.rows = zero.cols = spec.dim();
                zero.ghost_shift = 1;
                spec.K.resize(static_cast<size_t>(l) + 1, zero);
            }
            for (auto& row : rows) {
                if (!row.is_array() || row.size() != 3) throw ParseError("K rows are [from, to, value]");
                int from = spec.basis.at(row[0].get<std::string>());
                int to = spec.basis.at(row[1].get<std::string>());
                spec.K[static_cast<size_t>(l)].set(to, from, scalar_of(row[2], "K"));
            }
        }
    }
    if (spec.K.empty()) {
        LinearMap zero;
        zero.rows = zero.cols = spec.dim();
        zero.ghost_shift = 1;
        spec.K.push_back(zero);
    }
    if (j.contains("cycle")) {
        CycleSpec c;
        c.dimension = j.at("cycle").at("dimension").get<int>();
        c.levels = parse_functional(j.at("cycle").at("maps"), spec.basis, "cycle");
        spec.cycle = c;
    }
    if (j.contains("integral")) {
        IntegralSpec c;
        c.dimension = j.at("integral").at("dimension").get<int>();
        c.levels = parse_functional(j.at("integral").at("maps"), spec.basis, "integral");
        spec.integral = c;
    }
    if (j.contains("truncation")) {
        auto& t = j.at("truncation");
        spec.trunc.t_order = t.value("t_order", 4);
        spec.trunc.hbar_cap = t.value("hbar_max", 6);
    } else {
        spec.trunc.t_order = 4;
        spec.trunc.hbar_cap = 6;
    }
    spec.finalize();
    return spec;
}

AlgebraSpec load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open instance file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instance(ss.str());
}

std::string serialize_instance(const AlgebraSpec& spec) {
    json j;
    j["schema"] = "bvqft-instance/1";
    j["name"] = spec.name;
    json basis = json::array();
    for (int i = 0; i < spec.dim(); ++i)
        basis.push_back({{"label", spec.basis.labels[static_cast<size_t>(i)]}, {"ghost", spec.basis.ghost(i)}});
    j["basis"] = basis;
    j["unit"] = spec.basis.labels[static_cast<size_t>(spec.basis.unit)];
    json product = json::array();
    for (auto& [ij, v] : spec.product)
        for (auto& [k, x] : v.c)
            product.push_back({spec.basis.labels[static_cast<size_t>(ij.first)],
                               spec.basis.labels[static_cast<size_t>(ij.second)],
                               spec.basis.labels[static_cast<size_t>(k)], rat_str(x)});
    j["product"] = product;
    json K = json::object();
    for (size_t l = 0; l < spec.K.size(); ++l) {
        if (spec.K[l].zero()) continue;
        json rows = json::array();
        for (auto& [rc, x] : spec.K[l].a)
            rows.push_back({spec.basis.labels[static_cast<size_t>(rc.second)],
                            spec.basis.labels[static_cast<size_t>(rc.first)], rat_str(x)});
        K[std::to_string(l)] = rows;
    }
    j["K"] = K;
    if (spec.cycle) {
        j["cycle"] = {{"dimension", spec.cycle->dimension},
                      {"maps", functional_to_json(spec.cycle->levels, spec.basis)}};
    }
    if (spec.integral) {
        j["integral"] = {{"dimension", spec.integral->dimension},
                         {"maps", functional_to_json(spec.integral->levels, spec.basis)}};
    }
    j["truncation"] = {{"t_order", spec.trunc.t_order}, {"hbar_max", spec.trunc.hbar_cap}};
    return j.dump(2) + "\n";
}

}  // namespace bvqft
