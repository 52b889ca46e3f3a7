// lolight3: batch front-end for the Lorentzian 3-manifold library. Loads a
// metric spec (JSON), runs the requested analysis, and prints a deterministic
// JSON (or CSV) report on stdout.
//
// Exit codes: 0 success, 1 verification failure, 2 malformed input,
// 3 undecided (missing certificates).
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "lolight/acceptance.hpp"
#include "lolight/classify.hpp"
#include "lolight/curvature.hpp"
#include "lolight/deform.hpp"
#include "lolight/json_io.hpp"

using namespace lolight;
using io::json;

namespace {

struct Options {
    std::string spec_path;
    int grid = 64;
    double tol = 1e-9;
    std::string out;
    std::string format = "json";
};

void emit(const Options& opt, const json& j) {
    std::string text = io::dump_deterministic(j);
    if (!opt.out.empty()) {
        std::ofstream f(opt.out);
        f << text;
    }
    std::cout << text;
}

json invariant_checks(const MetricSpec& spec, const Options& opt) {
    json j;
    j["lattice_invariance"] = check_invariance(spec, 16);
    j["lorentzian_signature"] = signature_is_lorentzian(spec, 16);
    MetricSpec g = spec;
    if (!g.lattice.is_gamma()) g.lattice = Lattice::gamma(0);
    j["parallel_X_residual"] = check_parallel_X(g, 16);
    j["r_sup"] = curvature_r_sup(g, std::min(opt.grid, 64));
    return j;
}

// reductions routed by slope; returns the normal form as JSON plus the spec
// of the reduced form for further work
struct Normalized {
    json form;
    json change;
    MetricSpec reduced;
    bool closed = false;
    NormalFormClosed nfc;
    NormalFormDio nfd;
};

Normalized normalize_spec(const MetricSpec& spec) {
    if (!spec.lattice.is_gamma())
        throw MalformedInput("normalize applies to gamma-lattice specs; torus specs are "
                             "already in their reduced shape");
    Normalized n;
    if (spec.theta.is_rational()) {
        auto red = reduce_closed(spec);
        n.form = io::to_json(red.form);
        n.change = io::to_json(red.change);
        n.reduced = red.form.to_spec();
        n.closed = true;
        n.nfc = red.form;
    } else {
        auto red = reduce_diophantine(spec);
        n.form = io::to_json(red.form);
        n.change = io::to_json(red.change);
        n.reduced = red.form.to_spec();
        n.nfd = red.form;
    }
    return n;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lolight3: compact Lorentzian 3-manifolds with a parallel lightlike field"};
    app.require_subcommand(1);

    Options opt;
    std::string map_kind;
    double flow_s = 1.0;
    int p_ell = 0, p_A = 0, p_B = 0;
    std::string t_list = "0,0.25,0.5,0.75,1";
    double hol_z = 0.0;
    std::string corpus_dir = "specs";

    auto add_common = [&](CLI::App* c, bool needs_spec = true) {
        if (needs_spec) c->add_option("spec", opt.spec_path, "metric spec JSON file")->required();
        c->add_option("--grid", opt.grid, "grid resolution (default 64)");
        c->add_option("--tol", opt.tol, "tolerance override");
        c->add_option("--out", opt.out, "also write the report to this path");
        c->add_option("--format", opt.format, "json|csv (curvature only)");
    };

    CLI::App* inspect = app.add_subcommand("inspect", "echo the normalized spec + invariants");
    add_common(inspect);
    CLI::App* curv = app.add_subcommand("curvature", "the scalar invariant r on a grid");
    add_common(curv);
    CLI::App* par = app.add_subcommand("check-parallel", "residual of nabla d_x = 0");
    add_common(par);
    CLI::App* gb = app.add_subcommand("gauss-bonnet", "integral of r against the parallel volume");
    add_common(gb);
    CLI::App* norm = app.add_subcommand("normalize", "reduce to the unique normal form");
    add_common(norm);
    CLI::App* cls = app.add_subcommand("classify", "Table-1 row / Table-2 case report");
    add_common(cls);
    CLI::App* vm = app.add_subcommand("verify-map", "construct and verify a generator");
    add_common(vm);
    vm->add_option("--map", map_kind, "sigma|chi|chi_prime|psi|phi0|flowY|flowZ|flow_frame|phi_lAB")
        ->required();
    vm->add_option("--s", flow_s, "flow time parameter");
    vm->add_option("--ell", p_ell, "phi_lAB ell");
    vm->add_option("--A", p_A, "phi_lAB A");
    vm->add_option("--B", p_B, "phi_lAB B");
    CLI::App* def = app.add_subcommand("deform", "verify a generator along the flat path");
    add_common(def);
    def->add_option("--t", t_list, "comma list of path parameters in [0,1]");
    def->add_option("--map", map_kind, "generator kind (default: the case generator sigma)");
    def->add_option("--s", flow_s, "flow time parameter");
    CLI::App* hol = app.add_subcommand("holonomy", "leaf holonomy at height z");
    add_common(hol);
    hol->add_option("--z", hol_z, "leaf height")->required();
    CLI::App* self = app.add_subcommand("selftest", "run the acceptance suite");
    self->add_option("--corpus", corpus_dir, "corpus directory (default specs/)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (self->parsed()) {
            auto results = acceptance::run_all(corpus_dir);
            int failures = acceptance::report(results);
            return failures == 0 ? 0 : 1;
        }

        MetricSpec spec = io::load_spec_file(opt.spec_path);

        if (inspect->parsed()) {
            json j;
            j["spec"] = io::to_json(spec);
            j["checks"] = invariant_checks(spec, opt);
            emit(opt, j);
            double res = j["checks"]["lattice_invariance"].get<double>();
            return res < 1e-9 ? 0 : 1;
        }
        if (curv->parsed()) {
            MetricSpec g = spec;
            if (!g.lattice.is_gamma()) g.lattice = Lattice::gamma(0);
            CurvatureEvaluator ev(g);
            if (opt.format == "csv") {
                std::ostringstream csv;
                csv << "y,z,r\n";
                for (int i = 0; i < opt.grid; ++i)
                    for (int jdx = 0; jdx < opt.grid; ++jdx) {
                        double y = static_cast<double>(i) / opt.grid;
                        double z = static_cast<double>(jdx) / opt.grid;
                        char line[96];
                        std::snprintf(line, sizeof(line), "%.12e,%.12e,%.12e\n", y, z, ev(y, z));
                        csv << line;
                    }
                if (!opt.out.empty()) std::ofstream(opt.out) << csv.str();
                std::cout << csv.str();
                return 0;
            }
            json j;
            j["grid"] = opt.grid;
            double sup = 0;
            json rows = json::array();
            for (int i = 0; i < opt.grid; ++i) {
                json row = json::array();
                for (int jdx = 0; jdx < opt.grid; ++jdx) {
                    double v = ev(static_cast<double>(i) / opt.grid,
                                  static_cast<double>(jdx) / opt.grid);
                    sup = std::max(sup, std::abs(v));
                    row.push_back(v);
                }
                rows.push_back(row);
            }
            j["r_sup"] = sup;
            j["r"] = rows;
            emit(opt, j);
            return 0;
        }
        if (par->parsed()) {
            MetricSpec g = spec;
            if (!g.lattice.is_gamma()) g.lattice = Lattice::gamma(0);
            double res = check_parallel_X(g, std::min(opt.grid, 64));
            json j;
            j["parallel_X_residual"] = res;
            j["tolerance"] = opt.tol;
            emit(opt, j);
            return res < opt.tol ? 0 : 1;
        }
        if (gb->parsed()) {
            MetricSpec g = spec;
            if (!g.lattice.is_gamma()) g.lattice = Lattice::gamma(0);
            json j;
            double v = gauss_bonnet(g, opt.grid);
            double v2 = gauss_bonnet(g, 2 * opt.grid);
            j["grid"] = opt.grid;
            j["integral"] = v;
            j["integral_refined"] = v2;
            emit(opt, j);
            return std::abs(v) < 1e-6 ? 0 : 1;
        }
        if (norm->parsed()) {
            Normalized n = normalize_spec(spec);
            json j;
            j["normal_form"] = n.form;
            j["change"] = n.change;
            emit(opt, j);
            return 0;
        }
        if (cls->parsed()) {
            ClassReport rep = classify(ClassifyInput{spec});
            json j = io::to_json(rep);
            emit(opt, j);
            if (!rep.special.empty() && rep.special == "undecided") return 3;
            return 0;
        }
        if (vm->parsed()) {
            Normalized n = normalize_spec(spec);
            GeneratorParams p;
            p.s = flow_s;
            p.ell = p_ell;
            p.A = p_A;
            p.B = p_B;
            AffMap map = n.closed ? make_generator(map_kind, p, n.nfc)
                                  : make_generator_dio(map_kind, p, n.nfd);
            AffineDefect d = affine_defect(n.reduced, map, std::min(opt.grid, 32));
            auto [E, N] = decompose_E(n.reduced, map, {0, 0.29, 0.63});
            json j;
            j["map"] = map_kind;
            j["normalizes_lattice"] = normalizes_lattice(map, n.reduced.lattice);
            j["C"] = d.C;
            j["residual"] = d.residual;
            j["C_spread"] = d.C_spread;
            j["lambda"] = d.lambda;
            j["N_squared"] = (N * N).max_abs();
            j["r_invariance"] = check_r_invariance(n.reduced, map, 16);
            j["structure"] = io::to_json(map);
            emit(opt, j);
            bool ok = j["normalizes_lattice"].get<bool>() && d.residual < 1e-8 &&
                      d.C_spread < 1e-8;
            return ok ? 0 : 1;
        }
        if (def->parsed()) {
            Normalized n = normalize_spec(spec);
            std::vector<double> ts;
            std::stringstream ss(t_list);
            std::string item;
            while (std::getline(ss, item, ',')) ts.push_back(std::stod(item));
            GeneratorParams p;
            p.s = flow_s;
            std::string kind = map_kind.empty() ? "sigma" : map_kind;
            json j;
            j["map"] = kind;
            json samples = json::array();
            if (n.closed && (kind == "chi" || kind == "chi_prime")) {
                CaseIvFamily fam = case_iv_family(n.nfc);
                for (double t : ts) {
                    AffineDefect d = fam.defect_at(t);
                    if (d.residual > 1e-8 || d.C_spread > 1e-8)
                        throw VerificationFailed("chi defect broke at t = " + std::to_string(t));
                    json s;
                    s["t"] = t;
                    s["C"] = d.C;
                    s["residual"] = d.residual;
                    samples.push_back(s);
                }
                j["path"] = "case_iv_family";
            } else {
                auto defects = n.closed
                                   ? verify_along_path(n.nfc, make_generator(kind, p, n.nfc), ts)
                                   : verify_along_path_dio(
                                         n.nfd, make_generator_dio(kind, p, n.nfd), ts);
                for (const auto& pd : defects) {
                    json s;
                    s["t"] = pd.t;
                    s["C"] = pd.defect.C;
                    s["residual"] = pd.defect.residual;
                    samples.push_back(s);
                }
                j["path"] = "generic";
            }
            j["samples"] = samples;
            emit(opt, j);
            return 0;
        }
        if (hol->parsed()) {
            Normalized n = normalize_spec(spec);
            json j;
            j["z"] = hol_z;
            j["alpha"] = leaf_holonomy_alpha(n.reduced, hol_z);
            Holonomy2 h2 = parallel_transport_loop(n.reduced, hol_z, 2);
            Holonomy2 h1 = parallel_transport_loop(n.reduced, hol_z, 1, 1 << 12);
            j["gamma2"] = json::array({json::array({h2.m[0][0], h2.m[0][1]}),
                                       json::array({h2.m[1][0], h2.m[1][1]})});
            j["gamma1"] = json::array({json::array({h1.m[0][0], h1.m[0][1]}),
                                       json::array({h1.m[1][0], h1.m[1][1]})});
            j["off_leaf_residual"] = h2.off_leaf_residual;
            emit(opt, j);
            return 0;
        }
    } catch (const MalformedInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CertificateMissing& e) {
        std::cerr << "undecided: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
