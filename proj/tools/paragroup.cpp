// Batch front door for the SU(2)/S^2 para-differential toolkit: forward and
// inverse transforms, invariant check suites, Dirichlet-Neumann comparisons,
// capillary-drop time evolution and dispersion fits. JSON config in, CSV and
// JSON artifacts out; deterministic given config and seed.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "paragroup/io.hpp"
#include "paragroup/waves.hpp"

using namespace paragroup;
namespace fs = std::filesystem;

namespace {

template <class T>
T cfg(const json& j, const std::string& key, T fallback) {
    return j.value(key, fallback);
}

SphFn sphfn_from_config(const json& j, int l_max) {
    // Either {"file": path} or {"modes": [[n, m, re], ...]}; real fields are
    // completed with the conjugate partner unless im is given explicitly.
    if (j.contains("file")) return sphfn_from_json(load_json(j["file"])).truncated_fn(l_max);
    SphFn f(l_max);
    if (j.contains("modes"))
        for (const auto& m : j["modes"]) {
            int n = m.at(0).get<int>(), mu = m.at(1).get<int>();
            double re = m.at(2).get<double>(), im = m.size() > 3 ? m.at(3).get<double>() : 0.0;
            f.coeff(n, mu) = cplx(re, im);
            if (mu != 0 && m.size() <= 3) {
                cplx c = f.coeff(n, mu);
                f.coeff(n, -mu) = (mu % 2 == 0 ? 1.0 : -1.0) * std::conj(c);
            }
        }
    return f;
}

int checks_failed = 0;
void report(const std::string& name, bool ok, double detail) {
    std::cout << (ok ? "PASS  " : "FAIL  ") << name << "  [" << detail << "]\n";
    if (!ok) ++checks_failed;
}

// --------------------------- transform ------------------------------------
int cmd_transform(const json& c) {
    int twl = 2 * cfg(c, "l_max", 6);
    std::uint64_t seed = cfg(c, "seed", std::uint64_t(1234));
    std::string out_dir = cfg<std::string>(c, "out_dir", "transform_out");
    fs::create_directories(out_dir);

    EulerGrid grid = EulerGrid::for_band(2 * twl);
    TransformPlan plan(grid, RepLabel(twl));
    SpectralFn a = SpectralFn::random(RepLabel(twl), 0, twl, seed);
    GridFn f = plan.inverse(a);
    SpectralFn back = plan.forward(f);

    double rt = 0;
    for (int tw = 0; tw <= twl; ++tw)
        rt = std::max(rt, (back.block(tw) - a.block(tw)).cwiseAbs().maxCoeff());
    double pl = std::abs(f.l2_norm() * f.l2_norm() - a.plancherel_sq());

    CsvWriter csv(out_dir + "/report.csv");
    csv.header({"quantity", "value"});
    csv.row("roundtrip_max_defect", rt);
    csv.row("plancherel_defect", pl);
    csv.row("l2_norm", a.l2_norm());
    save_json(to_json(a), out_dir + "/coefficients.json");
    save_grid_csv(f, out_dir + "/gridfn.csv");
    std::cout << "round-trip defect " << rt << ", Plancherel defect " << pl << "\n";
    return (rt < 1e-10 && pl < 1e-10 * a.plancherel_sq()) ? 0 : 1;
}

// ----------------------------- check ---------------------------------------
int cmd_check(const json& c) {
    std::uint64_t seed = cfg(c, "seed", std::uint64_t(7));
    checks_failed = 0;

    {  // repr: unitarity, Casimir
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.1, 2.9);
        double worst = 0;
        for (int tw = 0; tw <= 8; ++tw) {
            RepLabel l(tw);
            EulerPoint x{u(rng), u(rng), u(rng)};
            Mat T = wigner_matrix(l, x);
            worst = std::max(worst,
                             (T * T.adjoint() - Mat::Identity(l.dim(), l.dim())).norm());
        }
        report("repr.unitarity", worst < 1e-10, worst);
        double cas = 0;
        for (int tw = 0; tw <= 8; ++tw) {
            RepLabel l(tw);
            Mat sp = sigma(PiTag::plus, l), sm = sigma(PiTag::minus, l),
                s0 = sigma(PiTag::zero, l);
            Mat res = -0.5 * (sm * sp + sp * sm) - s0 * s0 -
                      laplace_multiplier(l) * Mat::Identity(l.dim(), l.dim());
            cas = std::max(cas, res.cwiseAbs().maxCoeff());
        }
        report("repr.casimir", cas < 1e-12, cas);
    }
    {  // diffops: D_mu sigma_nu = delta Id; Taylor moment system
        double worst = 0;
        for (PiTag mu : {PiTag::plus, PiTag::minus, PiTag::zero})
            for (PiTag nu : {PiTag::plus, PiTag::minus, PiTag::zero}) {
                MultiplierFamily s = MultiplierFamily::sigma_family(nu, 10);
                MultiplierFamily d = rt_difference(mu, s);
                for (int tw = 0; tw <= 8; ++tw) {
                    Mat want = Mat::Zero(tw + 1, tw + 1);
                    if (mu == nu) want = Mat::Identity(tw + 1, tw + 1);
                    worst = std::max(worst, (d.blocks[tw] - want).cwiseAbs().maxCoeff());
                }
            }
        report("diffops.D_mu_sigma_nu", worst < 1e-12, worst);
        TaylorOps ops(2);
        report("diffops.taylor_moments", ops.moment_residual() < 1e-10,
               ops.moment_residual());
    }
    {  // lp: partitions of unity
        double worst = 0;
        for (double lam : {0.7, 3.3, 19.0}) {
            double s = CutoffFamily::phi(lam);
            for (int j = 0; j <= 8; ++j) s += CutoffFamily::theta(lam / std::pow(2.0, j));
            worst = std::max(worst, std::abs(s - 1.0));
        }
        report("lp.dyadic_partition", worst < 1e-13, worst);
    }
    {  // symcalc + paradiff: quantize identity, spectral condition
        RepLabel L(10);
        EulerGrid g = EulerGrid::for_band(2 * L.twice_l + 4);
        TransformPlan plan(g, L);
        SpectralFn f = SpectralFn::random(L, 0, 8, seed + 1);
        GridFn qf = quantize(Symbol::identity(L.twice_l), f, plan);
        GridFn direct = plan.inverse(f);
        double dq = (qf.values - direct.values).cwiseAbs().maxCoeff();
        report("symcalc.quantize_identity", dq < 1e-10, dq);

        AdmissibleCutoff chi{0.25};
        SpectralFn ch = SpectralFn::random(L, 0, 8, seed + 2);
        GridFn cf = plan.inverse(ch);
        Symbol a = Symbol::scalar_field(cf, L.twice_l, 0.0);
        Symbol ar = regularize(a, chi, plan);
        double viol = 0;
        for (int tw : {4, 8}) {
            SpectralFn spec = plan.forward(ar.terms[0].c_l[tw]);
            double lam = RepLabel(tw).bracket();
            for (int te = 0; te <= L.twice_l; ++te)
                if (RepLabel(te).freq() >= chi.delta * lam)
                    viol = std::max(viol, spec.block(te).cwiseAbs().maxCoeff());
        }
        report("paradiff.spectral_condition", viol < 1e-12, viol);
    }
    std::cout << (checks_failed == 0 ? "all checks passed\n" : "CHECKS FAILED\n");
    return checks_failed == 0 ? 0 : 1;
}

// --------------------------- dn-compare ------------------------------------
int cmd_dn_compare(const json& c) {
    int l_max = cfg(c, "l_max", 12);
    int n_max = cfg(c, "n_max", 16);
    double delta = cfg(c, "delta", 0.25);
    std::string out_path = cfg<std::string>(c, "out", "dn_compare.csv");

    SphGrid grid = SphGrid::for_band(4 * l_max + 8, 4 * l_max + 8);
    SphFn zeta = c.contains("zeta") ? sphfn_from_config(c["zeta"], l_max) : SphFn(l_max);
    SurfaceState st(zeta, grid);
    DnSymbols dn = build_factorization(st, 2 * l_max + 4, 2 * l_max + 2);
    AdmissibleCutoff chi{delta};

    CsvWriter csv(out_path);
    csv.header({"n", "oracle_mode", "para_mode", "abs_diff", "lambda_minus_n", "rem_Hs",
                "rem_Hs_half", "ratio"});
    for (int n = 1; n <= l_max; ++n) {
        SphFn phi = SphFn::basis(l_max, n, 0);
        ParaDnReport rep = paralinearized_dn(st, phi, dn, chi, n_max);
        double om = std::abs(rep.oracle.coeff(n, 0));
        double pm = std::abs(rep.value.coeff(n, 0));
        csv.row(n, om, pm, std::abs(om - pm), pm - n, rep.rem_s, rep.rem_s_half,
                rep.rem_s_half / std::max(rep.value_s_half, 1e-300));
        std::cout << "n=" << n << "  oracle " << om << "  para " << pm << "  |diff| "
                  << std::abs(om - pm) << "\n";
    }
    return 0;
}

// ---------------------------- simulate --------------------------------------
int cmd_simulate(const json& c) {
    WaveParams params;
    params.l_max = cfg(c, "l_max", 12);
    params.n_max_oracle = cfg(c, "n_max", 16);
    params.dn_mode = cfg<std::string>(c, "dn_mode", "oracle") == "para"
                         ? WaveParams::DnMode::para
                         : WaveParams::DnMode::oracle;
    double dt = cfg(c, "dt", 1e-3);
    double T = cfg(c, "T", 0.5);
    int cadence = cfg(c, "output_every", 50);
    int snapshot_every = cfg(c, "snapshot_every", 0);
    std::string out_dir = cfg<std::string>(c, "out_dir", "simulate_out");
    fs::create_directories(out_dir);

    SphGrid grid = SphGrid::for_band(4 * params.l_max + 8, 4 * params.l_max + 8);
    WaveWorkspace wk(grid, params);
    WaveState ws;
    ws.zeta = c.contains("zeta") ? sphfn_from_config(c["zeta"], params.l_max)
                                 : SphFn(params.l_max);
    ws.phi = c.contains("phi") ? sphfn_from_config(c["phi"], params.l_max)
                               : SphFn(params.l_max);

    double lam_top = dispersion_omega(params.l_max);
    if (dt * lam_top > 2.5)
        std::cerr << "warning: dt above the order-3/2 stability gate (" << 2.5 / lam_top
                  << ")\n";

    CsvWriter csv(out_dir + "/timeseries.csv");
    csv.header({"t", "volume", "area", "kinetic", "hamiltonian", "momentum_x", "momentum_y",
                "momentum_z", "center_x", "center_y", "center_z", "zeta_20_re", "phi_20_re"});
    int steps = int(std::round(T / dt));
    for (int s = 0; s <= steps; ++s) {
        if (s % cadence == 0 || s == steps) {
            ConservedQuantities q = conserved(ws, wk);
            csv.row(ws.t, q.volume, q.area, q.kinetic, q.hamiltonian, q.momentum[0],
                    q.momentum[1], q.momentum[2], q.center[0], q.center[1], q.center[2],
                    ws.zeta.coeff(2, 0).real(), ws.phi.coeff(2, 0).real());
        }
        if (snapshot_every > 0 && s % snapshot_every == 0) {
            save_json(to_json(ws.zeta), out_dir + "/zeta_" + std::to_string(s) + ".json");
            save_json(to_json(ws.phi), out_dir + "/phi_" + std::to_string(s) + ".json");
        }
        if (s < steps) ws = wave_step(ws, dt, wk);
    }
    std::cout << "wrote " << out_dir << "/timeseries.csv (" << steps << " steps)\n";
    return 0;
}

// ---------------------------- spectrum --------------------------------------
int cmd_spectrum(const json& c) {
    WaveParams params;
    params.l_max = cfg(c, "l_max", 12);
    params.n_max_oracle = cfg(c, "n_max", 16);
    double amp = cfg(c, "amplitude", 1e-3);
    double periods = cfg(c, "periods", 3.2);
    int steps_per_period = cfg(c, "steps_per_period", 160);
    std::vector<int> modes = c.contains("modes") ? c["modes"].get<std::vector<int>>()
                                                 : std::vector<int>{2, 3, 4};
    std::string out_path = cfg<std::string>(c, "out", "spectrum.csv");

    SphGrid grid = SphGrid::for_band(4 * params.l_max + 8, 4 * params.l_max + 8);
    WaveWorkspace wk(grid, params);
    CsvWriter csv(out_path);
    csv.header({"n", "omega_fit", "omega_theory", "rel_error"});
    int rc = 0;
    for (int n : modes) {
        double omega = dispersion_omega(n);
        double period = 2.0 * pi / omega;
        double dt = period / steps_per_period;
        int steps = int(std::ceil(periods * period / dt));
        WaveState ws;
        ws.zeta = SphFn::basis(params.l_max, n, 0, amp);
        ws.phi = SphFn(params.l_max);
        wk.oracle_seed = Vec();
        std::vector<double> series;
        series.reserve(steps + 1);
        for (int s = 0; s <= steps; ++s) {
            series.push_back(ws.zeta.coeff(n, 0).real());
            if (s < steps) ws = wave_step(ws, dt, wk);
        }
        double w_fit = fit_frequency(series, dt);
        double rel = std::abs(w_fit - omega) / omega;
        csv.row(n, w_fit, omega, rel);
        std::cout << "n=" << n << "  fitted " << w_fit << "  theory " << omega << "  rel "
                  << rel << "\n";
        if (rel > 0.02) rc = 1;
    }
    return rc;
}

json default_config(const std::string& sub) {
    if (sub == "transform")
        return {{"l_max", 6}, {"seed", 1234}, {"out_dir", "transform_out"}};
    if (sub == "check") return {{"seed", 7}};
    if (sub == "dn-compare")
        return {{"l_max", 12},
                {"n_max", 16},
                {"delta", 0.25},
                {"zeta", {{"modes", json::array()}}},
                {"out", "dn_compare.csv"}};
    if (sub == "simulate")
        return {{"l_max", 12},
                {"n_max", 16},
                {"dt", 1e-3},
                {"T", 0.5},
                {"dn_mode", "oracle"},
                {"output_every", 50},
                {"snapshot_every", 0},
                {"out_dir", "simulate_out"},
                {"zeta", {{"modes", {{2, 0, 0.01}}}}},
                {"phi", {{"modes", json::array()}}}};
    if (sub == "spectrum")
        return {{"l_max", 12},
                {"n_max", 16},
                {"amplitude", 1e-3},
                {"periods", 3.2},
                {"steps_per_period", 160},
                {"modes", {2, 3, 4}},
                {"out", "spectrum.csv"}};
    return json::object();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Global para-differential calculus on SU(2)/S^2 and the spherical "
                 "capillary water-waves solver"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    long long seed = -1;
    bool deterministic = false, print_config = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "override the config seed");
    app.add_flag("--deterministic", deterministic,
                 "single-threaded, bit-stable reduction order");
    app.add_flag("--print-config", print_config, "print the effective config and exit");

    app.add_subcommand("transform", "round-trip and Plancherel report");
    app.add_subcommand("check", "run the invariant suites");
    app.add_subcommand("dn-compare", "oracle vs para-linearized DN table");
    app.add_subcommand("simulate", "time-evolve the capillary system");
    app.add_subcommand("spectrum", "dispersion-fit experiment");

    CLI11_PARSE(app, argc, argv);

    if (deterministic) setenv("PARAGROUP_THREADS", "1", 1);

    std::string sub = app.get_subcommands().front()->get_name();
    json c = default_config(sub);
    if (!config_path.empty()) c.update(load_json(config_path));
    if (seed >= 0) c["seed"] = seed;
    if (print_config) {
        std::cout << c.dump(1) << "\n";
        return 0;
    }

    try {
        if (sub == "transform") return cmd_transform(c);
        if (sub == "check") return cmd_check(c);
        if (sub == "dn-compare") return cmd_dn_compare(c);
        if (sub == "simulate") return cmd_simulate(c);
        return cmd_spectrum(c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
