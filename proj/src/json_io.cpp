#include "lolight/json_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>

namespace lolight::io {

namespace {

void require_keys(const json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const char* what) {
    if (!j.is_object()) throw MalformedInput(std::string(what) + ": expected an object");
    for (const char* k : required)
        if (!j.contains(k))
            throw MalformedInput(std::string(what) + ": missing key '" + k + "'");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : required)
            if (it.key() == k) known = true;
        for (const char* k : optional)
            if (it.key() == k) known = true;
        if (!known)
            throw MalformedInput(std::string(what) + ": unknown key '" + it.key() + "'");
    }
}

double num(const json& j, const char* what) {
    if (!j.is_number()) throw MalformedInput(std::string(what) + ": expected a number");
    return j.get<double>();
}

long integer(const json& j, const char* what) {
    if (!j.is_number_integer()) throw MalformedInput(std::string(what) + ": expected an integer");
    return j.get<long>();
}

json coeff_pairs(const std::vector<double>& a, const std::vector<double>& b) {
    json arr = json::array();
    for (std::size_t i = 0; i < a.size(); ++i) arr.push_back(json::array({a[i], b[i]}));
    return arr;
}

} // namespace

json to_json(const Fn1& f) {
    json j;
    j["max_freq"] = f.max_freq;
    j["coeffs"] = coeff_pairs(f.a, f.b);
    return j;
}

Fn1 fn1_from_json(const json& j) {
    require_keys(j, {"max_freq", "coeffs"}, {}, "Fourier1D");
    int mf = static_cast<int>(integer(j["max_freq"], "max_freq"));
    if (mf < 0) throw MalformedInput("max_freq must be non-negative");
    const json& c = j["coeffs"];
    if (!c.is_array() || c.size() != static_cast<std::size_t>(mf + 1))
        throw MalformedInput("Fourier1D: coeffs length must be max_freq + 1");
    Fn1 f(mf);
    for (int i = 0; i <= mf; ++i) {
        const json& p = c[i];
        if (!p.is_array() || p.size() != 2)
            throw MalformedInput("Fourier1D: coefficients are [a, b] pairs");
        f.a[i] = num(p[0], "coeff");
        f.b[i] = num(p[1], "coeff");
    }
    if (f.b[0] != 0.0) throw MalformedInput("Fourier1D: b[0] must be 0");
    return f;
}

json to_json(const Fn2& f) {
    json j;
    j["max_freq"] = json::array({f.max_y, f.max_z});
    j["coeffs"] = coeff_pairs(f.a, f.b);
    return j;
}

Fn2 fn2_from_json(const json& j) {
    require_keys(j, {"max_freq", "coeffs"}, {}, "Fourier2D");
    const json& mf = j["max_freq"];
    if (!mf.is_array() || mf.size() != 2)
        throw MalformedInput("Fourier2D: max_freq must be [M, N]");
    int my = static_cast<int>(integer(mf[0], "max_freq")),
        mz = static_cast<int>(integer(mf[1], "max_freq"));
    if (my < 0 || mz < 0) throw MalformedInput("max_freq must be non-negative");
    Fn2 f(my, mz);
    const json& c = j["coeffs"];
    if (!c.is_array() || c.size() != f.mode_count())
        throw MalformedInput("Fourier2D: coeffs length must match the canonical mode count");
    for (std::size_t i = 0; i < f.mode_count(); ++i) {
        const json& p = c[i];
        if (!p.is_array() || p.size() != 2)
            throw MalformedInput("Fourier2D: coefficients are [a, b] pairs");
        f.a[i] = num(p[0], "coeff");
        f.b[i] = num(p[1], "coeff");
    }
    if (f.b[0] != 0.0) throw MalformedInput("Fourier2D: b at mode (0,0) must be 0");
    return f;
}

json to_json(const Theta& t) {
    json j;
    switch (t.kind) {
        case Theta::Kind::rational:
            j["kind"] = "rational";
            j["p"] = t.rat.p;
            j["q"] = t.rat.q;
            break;
        case Theta::Kind::quadratic:
            j["kind"] = "quadratic";
            j["a"] = t.qa;
            j["b"] = t.qb;
            j["c"] = t.qc;
            j["d"] = t.qd;
            break;
        case Theta::Kind::declared:
            j["kind"] = "float";
            j["value"] = t.declared_value;
            j["diophantine"] = t.declared_diophantine;
            j["eps_div"] = t.eps_div;
            break;
    }
    return j;
}

Theta theta_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind")) throw MalformedInput("theta: missing kind");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "rational") {
        require_keys(j, {"kind", "p", "q"}, {}, "theta");
        return Theta::rational(integer(j["p"], "p"), integer(j["q"], "q"));
    }
    if (kind == "quadratic") {
        require_keys(j, {"kind", "a", "b", "c", "d"}, {}, "theta");
        return Theta::quadratic(integer(j["a"], "a"), integer(j["b"], "b"),
                                integer(j["c"], "c"), integer(j["d"], "d"));
    }
    if (kind == "float") {
        require_keys(j, {"kind", "value", "diophantine"}, {"eps_div"}, "theta");
        double eps = j.contains("eps_div") ? num(j["eps_div"], "eps_div") : 1e-8;
        return Theta::declared(num(j["value"], "value"), j["diophantine"].get<bool>(), eps);
    }
    throw MalformedInput("theta: unknown kind '" + kind + "'");
}

namespace {

json cert_to_json(const CertValue& c) {
    json j;
    if (c.kind == CertValue::Kind::rational) {
        j["kind"] = "rational";
        j["p"] = c.value.p;
        j["q"] = c.value.q;
    } else {
        j["kind"] = "irrational";
    }
    return j;
}

CertValue cert_from_json(const json& j) {
    CertValue c;
    if (!j.is_object() || !j.contains("kind")) throw MalformedInput("certificate: missing kind");
    std::string kind = j["kind"].get<std::string>();
    if (kind == "rational") {
        require_keys(j, {"kind", "p", "q"}, {}, "certificate");
        c.kind = CertValue::Kind::rational;
        c.value = Rational(integer(j["p"], "p"), integer(j["q"], "q"));
    } else if (kind == "irrational") {
        require_keys(j, {"kind"}, {}, "certificate");
        c.kind = CertValue::Kind::irrational;
    } else {
        throw MalformedInput("certificate: unknown kind '" + kind + "'");
    }
    return c;
}

} // namespace

json to_json(const ArithCertificates& certs) {
    json j = json::object();
    if (certs.Lcal_over_Lambda.kind != CertValue::Kind::absent)
        j["Lcal_over_Lambda"] = cert_to_json(certs.Lcal_over_Lambda);
    if (certs.k_over_Lambda.kind != CertValue::Kind::absent)
        j["k_over_Lambda"] = cert_to_json(certs.k_over_Lambda);
    if (certs.period) {
        j["period"] = json::object();
        j["period"]["P"] = certs.period->first;
        j["period"]["Pprime"] = certs.period->second;
    }
    return j;
}

ArithCertificates certs_from_json(const json& j) {
    require_keys(j, {}, {"Lcal_over_Lambda", "k_over_Lambda", "period"}, "arith");
    ArithCertificates c;
    if (j.contains("Lcal_over_Lambda")) c.Lcal_over_Lambda = cert_from_json(j["Lcal_over_Lambda"]);
    if (j.contains("k_over_Lambda")) c.k_over_Lambda = cert_from_json(j["k_over_Lambda"]);
    if (j.contains("period")) {
        require_keys(j["period"], {"P", "Pprime"}, {}, "period");
        c.period = std::make_pair(static_cast<int>(integer(j["period"]["P"], "P")),
                                  static_cast<int>(integer(j["period"]["Pprime"], "Pprime")));
    }
    return c;
}

json to_json(const MetricSpec& spec) {
    json j;
    json m;
    switch (spec.lattice.kind) {
        case Lattice::Kind::gamma:
            m["type"] = "gamma";
            m["n"] = spec.lattice.n;
            m["c1"] = spec.lattice.c1;
            m["c2"] = spec.lattice.c2;
            break;
        case Lattice::Kind::torusA:
        case Lattice::Kind::torusB:
            m["type"] = spec.lattice.kind == Lattice::Kind::torusA ? "torusA" : "torusB";
            m["tau"] = spec.lattice.tau;
            m["r1"] = spec.lattice.r1;
            m["r2"] = spec.lattice.r2;
            break;
    }
    j["manifold"] = m;
    j["theta"] = to_json(spec.theta);
    j["Lambda"] = spec.Lambda;
    j["L2"] = to_json(spec.L2);
    j["nu"] = to_json(spec.nu);
    j["mu"] = to_json(spec.mu);
    j["arith"] = to_json(spec.arith);
    return j;
}

MetricSpec spec_from_json(const json& j) {
    require_keys(j, {"manifold", "theta", "Lambda", "L2", "nu", "mu"}, {"arith"}, "spec");
    MetricSpec s;
    const json& m = j["manifold"];
    if (!m.is_object() || !m.contains("type"))
        throw MalformedInput("manifold: missing type");
    std::string type = m["type"].get<std::string>();
    if (type == "gamma") {
        require_keys(m, {"type", "n"}, {"c1", "c2"}, "manifold");
        s.lattice = Lattice::gamma(static_cast<int>(integer(m["n"], "n")),
                                   m.contains("c1") ? num(m["c1"], "c1") : 0.0,
                                   m.contains("c2") ? num(m["c2"], "c2") : 0.0);
    } else if (type == "torusA" || type == "torusB") {
        require_keys(m, {"type", "tau", "r1", "r2"}, {}, "manifold");
        double tau = num(m["tau"], "tau"), r1 = num(m["r1"], "r1"), r2 = num(m["r2"], "r2");
        s.lattice = type == "torusA" ? Lattice::torusA(tau, r1, r2)
                                     : Lattice::torusB(tau, r1, r2);
    } else {
        throw MalformedInput("manifold: unknown type '" + type + "'");
    }
    s.theta = theta_from_json(j["theta"]);
    s.Lambda = num(j["Lambda"], "Lambda");
    s.L2 = fn2_from_json(j["L2"]);
    s.nu = fn2_from_json(j["nu"]);
    s.mu = fn2_from_json(j["mu"]);
    if (j.contains("arith")) s.arith = certs_from_json(j["arith"]);
    s.validate();
    return s;
}

json to_json(const NormalFormDio& nf) {
    json j;
    j["family"] = "diophantine";
    j["n"] = nf.n;
    j["theta"] = to_json(nf.theta);
    j["Lambda"] = nf.Lambda;
    j["L"] = nf.L;
    j["k"] = nf.k;
    j["mu"] = to_json(nf.mu);
    j["arith"] = to_json(nf.arith);
    return j;
}

json to_json(const NormalFormClosed& nf) {
    json j;
    j["family"] = "closed";
    j["n"] = nf.n;
    j["Lambda"] = nf.Lambda;
    j["k"] = nf.k;
    j["L2"] = to_json(nf.L2);
    j["mu"] = to_json(nf.mu);
    j["Lcal"] = nf.Lcal();
    j["arith"] = to_json(nf.arith);
    return j;
}

json to_json(const AffMap& map) {
    json j;
    j["x_sign"] = map.s1;
    j["linear"] = json::array({map.m11, map.m12, map.m21, map.m22});
    j["translation"] = json::array({map.xs.c, map.ty, map.tz});
    json xs;
    xs["Ay"] = map.xs.Ay;
    xs["Bz"] = map.xs.Bz;
    xs["quadratic"] = json::array({map.xs.qyy, map.xs.qyz, map.xs.qzz});
    if (map.xs.py.max_abs_coeff() > 0) xs["py"] = to_json(map.xs.py);
    if (map.xs.p1.max_abs_coeff() > 0) xs["p1"] = to_json(map.xs.p1);
    if (map.xs.f2.max_abs_coeff() > 0) xs["f2"] = to_json(map.xs.f2);
    j["x_shear"] = xs;
    if (map.sy.max_abs_coeff() > 0) j["y_shift"] = to_json(map.sy);
    return j;
}

json to_json(const ClassReport& rep) {
    json j;
    j["table1_row"] = std::string(1, rep.table1_row);
    if (rep.special.empty()) {
        j["table2_case"] = rep.table2_case;
    } else {
        j["table2_case"] = rep.special;
    }
    j["group"] = rep.group;
    j["flat"] = rep.flat;
    j["r_sup"] = rep.r_sup;
    switch (rep.isom_compact) {
        case Tribool::yes:
            j["isom_compact"] = true;
            break;
        case Tribool::no:
            j["isom_compact"] = false;
            break;
        case Tribool::undecided:
            j["isom_compact"] = "undecided";
            break;
    }
    j["imC"] = rep.imC;
    j["imC_samples"] = rep.imC_samples;
    json gens = json::array();
    for (const auto& g : rep.generators) {
        json q;
        q["kind"] = g.kind;
        q["C"] = g.C;
        q["residual"] = g.residual;
        q["N_squared"] = g.N_squared;
        q["r_invariance"] = g.r_invariance;
        q["normalizes_lattice"] = g.normalizes;
        gens.push_back(q);
    }
    j["generators"] = gens;
    j["caveats"] = rep.caveats;
    return j;
}

MetricSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedInput("cannot open spec file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw MalformedInput(std::string("invalid JSON: ") + e.what());
    }
    return spec_from_json(j);
}

namespace {

void dump_rec(const json& j, std::string& out, int indent, int depth) {
    std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
    std::string pad1(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            std::size_t i = 0;
            for (auto it = j.begin(); it != j.end(); ++it, ++i) {
                out += pad1 + "\"" + it.key() + "\": ";
                dump_rec(it.value(), out, indent, depth + 1);
                if (i + 1 < j.size()) out += ",";
                out += "\n";
            }
            out += pad + "}";
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // compact small numeric pairs, one-per-line otherwise
            bool all_scalar = true;
            for (const auto& v : j)
                if (!v.is_number() && !v.is_string() && !v.is_boolean()) all_scalar = false;
            if (all_scalar && j.size() <= 4) {
                out += "[";
                for (std::size_t i = 0; i < j.size(); ++i) {
                    dump_rec(j[i], out, indent, depth);
                    if (i + 1 < j.size()) out += ", ";
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                out += pad1;
                dump_rec(j[i], out, indent, depth + 1);
                if (i + 1 < j.size()) out += ",";
                out += "\n";
            }
            out += pad + "]";
            return;
        }
        case json::value_t::number_float: {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.12e", j.get<double>());
            out += buf;
            return;
        }
        case json::value_t::number_integer:
        case json::value_t::number_unsigned: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%" PRId64, j.get<std::int64_t>());
            out += buf;
            return;
        }
        default:
            out += j.dump();
            return;
    }
}

} // namespace

std::string dump_deterministic(const json& j, int indent) {
    std::string out;
    dump_rec(j, out, indent, 0);
    out += "\n";
    return out;
}

} // namespace lolight::io
