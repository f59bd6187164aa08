#include "bvqft/commands.hpp"

#include <json.hpp>
#include <sstream>

#include "bvqft/observables.hpp"
#include "bvqft/wdvv.hpp"

namespace bvqft {

using json = nlohmann::ordered_json;

namespace {

json ledger_json(const Ledger& led) {
    json out = json::array();
    for (auto& c : led.checks) {
        json row;
        row["id"] = c.id;
        row["status"] = c.pass ? "pass" : "fail";
        if (!c.pass) row["witness"] = c.witness;
        out.push_back(row);
    }
    return out;
}

std::string human_ledger(const Ledger& led) {
    std::ostringstream os;
    for (auto& c : led.checks) {
        os << (c.pass ? "[PASS] " : "[FAIL] ") << c.id;
        if (!c.pass && !c.witness.empty()) os << "  (" << c.witness << ")";
        os << "\n";
    }
    return os.str();
}

json hbar_scalar_json(const HbarScalar& h) {
    json out = json::object();
    for (auto& [p, v] : h) out[std::to_string(p)] = rat_str(v);
    return out;
}

json scalar_series_json(const ScalarSeries& s, const std::vector<std::string>& hlabels) {
    json out = json::array();
    for (auto& [k, v] : s.terms) {
        json row;
        json word = json::array();
        for (int a : k.w.a) word.push_back(hlabels[static_cast<size_t>(a)]);
        row["word"] = word;
        row["hbar"] = k.h;
        row["value"] = rat_str(v);
        out.push_back(row);
    }
    return out;
}

json element_json(const Element& e, const std::vector<std::string>& hlabels,
                  const std::vector<std::string>& clabels) {
    json out = json::array();
    for (auto& [k, v] : e.terms) {
        json row;
        json word = json::array();
        for (int a : k.w.a) word.push_back(hlabels[static_cast<size_t>(a)]);
        row["word"] = word;
        row["hbar"] = k.h;
        json val = json::object();
        for (auto& [i, x] : v.c) val[clabels[static_cast<size_t>(i)]] = rat_str(x);
        row["value"] = val;
        out.push_back(row);
    }
    return out;
}

json report_shell(const std::string& command, const AlgebraSpec& spec) {
    json j;
    j["schema"] = "bvqft-report/1";
    j["command"] = command;
    j["instance"] = spec.name;
    return j;
}

struct SolveBundle {
    CohomologyData coh;
    TransferData td;
    SolverState st;
    int order = 0;
};

json classes_json(const TransferData& td, const AlgebraSpec& spec) {
    json out = json::array();
    for (int h = 0; h < td.coh.H.dim(); ++h) {
        json row;
        row["label"] = td.coh.H.labels[static_cast<size_t>(h)];
        row["ghost"] = td.coh.H.ghost(h);
        json rep = json::object();
        for (auto& [i, x] : td.coh.reps[static_cast<size_t>(h)].c)
            rep[spec.basis.labels[static_cast<size_t>(i)]] = rat_str(x);
        row["representative"] = rep;
        out.push_back(row);
    }
    return out;
}

json anomaly_json(const AnomalyReport& rep, const TransferData& td, const AlgebraSpec& spec) {
    json a;
    a["anomaly_free"] = rep.anomaly_free;
    a["invisibles"] = rep.invisibles;
    if (!rep.anomaly_free) {
        json kappa = json::object();
        for (int l = 1; l <= td.levels; ++l) {
            if (td.kappa[static_cast<size_t>(l)].zero()) continue;
            json rows = json::array();
            for (auto& [rc, x] : td.kappa[static_cast<size_t>(l)].a)
                rows.push_back({td.coh.H.labels[static_cast<size_t>(rc.second)],
                                td.coh.H.labels[static_cast<size_t>(rc.first)], rat_str(x)});
            kappa[std::to_string(l)] = rows;
        }
        a["kappa"] = kappa;
    }
    (void)spec;
    return a;
}

// shared solve pipeline used by the three tensor commands
int run_solve(const AlgebraSpec& spec, const CommandOptions& opt, json& j, std::ostringstream& human,
              SolveBundle& out, Ledger& led) {
    Ledger axioms = validate_algebra(spec);
    led.merge(axioms);
    if (!axioms.all_pass()) {
        human << human_ledger(axioms);
        return 1;
    }
    out.order = opt.order > 0 ? opt.order : spec.trunc.t_order;
    int hbar_max = opt.hbar_max > 0 ? opt.hbar_max : (spec.trunc.hbar_cap == kNoCap ? 6 : spec.trunc.hbar_cap);
    out.coh = CohomologyData::compute(spec);
    out.td = build_quantization_map(spec, out.coh, hbar_max);
    AnomalyReport anomaly = check_anomaly_free(out.td);
    j["anomaly"] = anomaly_json(anomaly, out.td, spec);
    j["classes"] = classes_json(out.td, spec);
    j["transfer_exact"] = out.td.exact;
    if (!anomaly.anomaly_free) {
        human << "anomalous instance; invisibles:";
        for (auto& s : anomaly.invisibles) human << " " << s;
        human << "\n";
        return 2;
    }
    try {
        out.st = qme_solve(spec, out.td, out.order, opt.seed);
    } catch (const IdentityError& e) {
        led.add(e.id, false, e.what());
        human << "[FAIL] " << e.what() << "\n";
        return 1;
    }
    led.merge(out.st.ledger);
    Ledger tensor = verify_tensor_package(out.st);
    led.merge(tensor);
    return tensor.all_pass() && out.st.ledger.all_pass() ? 0 : 1;
}

json a_tensor_json(const SolverState& st) {
    json out = json::array();
    for (int a = 0; a < st.hdim(); ++a)
        for (int b = 0; b < st.hdim(); ++b)
            for (int g = 0; g < st.hdim(); ++g) {
                ScalarSeries s = st.a_series(a, b, g);
                if (s.zero()) continue;
                json row;
                row["lower"] = {st.cx.hlabels[static_cast<size_t>(a)], st.cx.hlabels[static_cast<size_t>(b)]};
                row["upper"] = st.cx.hlabels[static_cast<size_t>(g)];
                row["series"] = scalar_series_json(s, st.cx.hlabels);
                out.push_back(row);
            }
    return out;
}

}  // namespace

CommandResult cmd_validate(const AlgebraSpec& spec) {
    CommandResult res;
    json j = report_shell("validate", spec);
    Ledger led = validate_algebra(spec);
    j["ledger"] = ledger_json(led);
    res.exit_code = led.all_pass() ? 0 : 1;
    res.report_json = j.dump(2) + "\n";
    res.human = human_ledger(led);
    return res;
}

CommandResult cmd_solve(const AlgebraSpec& spec, const CommandOptions& opt) {
    CommandResult res;
    json j = report_shell("solve", spec);
    std::ostringstream human;
    SolveBundle bundle;
    Ledger led;
    res.exit_code = run_solve(spec, opt, j, human, bundle, led);
    j["order"] = bundle.order;
    j["seed"] = opt.seed;
    j["ledger"] = ledger_json(led);
    if (res.exit_code == 0) {
        j["A"] = a_tensor_json(bundle.st);
        j["theta"] = element_json(bundle.st.theta, bundle.st.cx.hlabels, spec.basis.labels);
        json lam = json::array();
        for (auto& [key, e] : bundle.st.Lambda.raw()) {
            json row;
            row["pair"] = {bundle.st.cx.hlabels[static_cast<size_t>(key[0])],
                           bundle.st.cx.hlabels[static_cast<size_t>(key[1])]};
            row["series"] = element_json(e, bundle.st.cx.hlabels, spec.basis.labels);
            lam.push_back(row);
        }
        j["lambda"] = lam;
        human << human_ledger(led);
        human << "solved to order " << bundle.order << "; all identities pass\n";
    }
    res.report_json = j.dump(2) + "\n";
    res.human = human.str();
    return res;
}

CommandResult cmd_observables(const AlgebraSpec& spec, const CommandOptions& opt) {
    CommandResult res;
    json j = report_shell("observables", spec);
    std::ostringstream human;
    SolveBundle bundle;
    Ledger led;
    res.exit_code = run_solve(spec, opt, j, human, bundle, led);
    if (res.exit_code == 0) {
        try {
            PTensors pt = p_tensors(bundle.st, led);
            QuantumCoordinates qc = quantum_coordinates(bundle.st, pt, led);
            int max_arity = std::min(bundle.order, 4);
            CorrelatorSet cs = correlators(bundle.st, pt, max_arity, led);
            json tj = json::array();
            for (int g = 0; g < bundle.st.hdim(); ++g) {
                json row;
                row["class"] = bundle.st.cx.hlabels[static_cast<size_t>(g)];
                row["series"] = scalar_series_json(qc.T[static_cast<size_t>(g)], bundle.st.cx.hlabels);
                tj.push_back(row);
            }
            j["T"] = tj;
            json pj = json::array();
            for (auto& [key, hv] : cs.pi) {
                if (hv.zero()) continue;
                json row;
                json tuple = json::array();
                for (int a : key) tuple.push_back(bundle.st.cx.hlabels[static_cast<size_t>(a)]);
                row["tuple"] = tuple;
                json levels = json::object();
                for (auto& [l, v] : hv.lv) {
                    json val = json::object();
                    for (auto& [i, x] : v.c) val[spec.basis.labels[static_cast<size_t>(i)]] = rat_str(x);
                    levels[std::to_string(l)] = val;
                }
                row["levels"] = levels;
                pj.push_back(row);
            }
            j["correlators_origin"] = pj;
            if (spec.cycle) {
                ScalarSeries Z = generating_function(bundle.st, pt, qc, cs, *spec.cycle, led);
                j["Z"] = scalar_series_json(Z, bundle.st.cx.hlabels);
                FreeEnergy fe = free_energy(bundle.st, qc, *spec.cycle, led);
                if (!fe.F.zero() || !fe.phi.empty()) {
                    j["F"] = scalar_series_json(fe.F, bundle.st.cx.hlabels);
                    json phi1 = json::object();
                    for (int a = 0; a < bundle.st.hdim(); ++a) {
                        auto it = fe.phi.find({a});
                        if (it != fe.phi.end() && !it->second.empty())
                            phi1[bundle.st.cx.hlabels[static_cast<size_t>(a)]] = hbar_scalar_json(it->second);
                    }
                    j["phi1"] = phi1;
                }
            } else {
                j["notes"] = {"instance has no cycle; generating function and free energy skipped"};
            }
            res.exit_code = led.all_pass() ? 0 : 1;
        } catch (const IdentityError& e) {
            led.add(e.id, false, e.what());
            res.exit_code = 1;
        }
        human << human_ledger(led);
    }
    j["order"] = bundle.order;
    j["seed"] = opt.seed;
    j["ledger"] = ledger_json(led);
    res.report_json = j.dump(2) + "\n";
    res.human = human.str();
    return res;
}

CommandResult cmd_wdvv(const AlgebraSpec& spec, const CommandOptions& opt) {
    CommandResult res;
    json j = report_shell("wdvv", spec);
    std::ostringstream human;
    if (!spec.integral) {
        j["error"] = "instance has no integral";
        res.exit_code = 3;
        res.report_json = j.dump(2) + "\n";
        res.human = "instance has no integral; nothing to do\n";
        return res;
    }
    SolveBundle bundle;
    Ledger led;
    res.exit_code = run_solve(spec, opt, j, human, bundle, led);
    if (res.exit_code == 0) {
        try {
            PairingData pd = pairings(bundle.st, *spec.integral, led);
            auto g = metric(bundle.st, *spec.integral, led);
            PTensors pt = p_tensors(bundle.st, led);
            int max_arity = std::min(bundle.order, 4);
            CorrelatorSet cs = correlators(bundle.st, pt, max_arity, led);
            WdvvResult wr = wdvv(bundle.st, *spec.integral, g, &cs, led);
            json gj = json::array();
            for (int a = 0; a < bundle.st.hdim(); ++a)
                for (int b = 0; b < bundle.st.hdim(); ++b) {
                    const ScalarSeries& s = g[static_cast<size_t>(a)][static_cast<size_t>(b)];
                    if (s.zero()) continue;
                    json row;
                    row["pair"] = {bundle.st.cx.hlabels[static_cast<size_t>(a)],
                                   bundle.st.cx.hlabels[static_cast<size_t>(b)]};
                    row["series"] = scalar_series_json(s, bundle.st.cx.hlabels);
                    gj.push_back(row);
                }
            j["metric"] = gj;
            j["semi_classical"] = wr.semi_classical;
            j["metric_invertible"] = wr.metric_invertible;
            if (wr.phi_built) j["Phi"] = scalar_series_json(wr.Phi, bundle.st.cx.hlabels);
            json qj = json::array();
            for (int a = 0; a < bundle.st.hdim(); ++a)
                for (int b = 0; b < bundle.st.hdim(); ++b) {
                    if (pd.quantum[static_cast<size_t>(a)][static_cast<size_t>(b)].empty()) continue;
                    json row;
                    row["pair"] = {bundle.st.cx.hlabels[static_cast<size_t>(a)],
                                   bundle.st.cx.hlabels[static_cast<size_t>(b)]};
                    row["series"] = hbar_scalar_json(pd.quantum[static_cast<size_t>(a)][static_cast<size_t>(b)]);
                    qj.push_back(row);
                }
            j["quantum_pairing"] = qj;
            res.exit_code = led.all_pass() ? 0 : 1;
        } catch (const IdentityError& e) {
            led.add(e.id, false, e.what());
            res.exit_code = 1;
        }
        human << human_ledger(led);
    }
    j["order"] = bundle.order;
    j["seed"] = opt.seed;
    j["ledger"] = ledger_json(led);
    res.report_json = j.dump(2) + "\n";
    res.human = human.str();
    return res;
}

}  // namespace bvqft
