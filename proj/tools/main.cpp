#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/tools/roots.hpp>

#include "output.hpp"
#include "subsense/errors.hpp"
#include "subsense/lattice.hpp"
#include "subsense/parallel.hpp"
#include "subsense/precision.hpp"
#include "subsense/scene_io.hpp"
#include "subsense/sense.hpp"

using namespace subsense;
using subsense::cli::CsvFile;
using subsense::cli::Run;
using nlohmann::json;

namespace {

struct Common {
    std::string scene;
    std::string out = ".";
    std::string figure;
    std::optional<std::uint64_t> seed;
};

std::vector<double> parse_range(const std::string& text) {
    double a = 0, b = 0;
    long long n = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(text);
    if (!(is >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || !is.eof())
        throw ValidationError("range '" + text + "' is not start:stop:n");
    if (n < 1) throw ValidationError("range '" + text + "' has no points");
    if (!std::isfinite(a) || !std::isfinite(b)) throw ValidationError("range '" + text + "' is not finite");
    std::vector<double> out;
    for (long long i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("'" + item + "' is not a number");
        }
    }
    return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool stochastic(const SceneSpec& spec) {
    return spec.missing_fraction > 0.0 || std::holds_alternative<MonteCarlo>(spec.motion.quadrature);
}

// Missing atoms and Monte Carlo motion both draw from the run seed.
Scene realize(const SceneSpec& spec, std::optional<std::uint64_t> seed) {
    if (stochastic(spec) && !seed) throw ValidationError("this scene is stochastic: pass --seed");
    SceneSpec s = spec;
    if (seed)
        if (auto* mc = std::get_if<MonteCarlo>(&s.motion.quadrature)) mc->seed = *seed;
    return instantiate(s, seed);
}

Run open_run(const std::string& command, const Common& c, const SceneSpec* spec) {
    Run run(command, c.out);
    run.set_figure(c.figure);
    if (spec) run.set_scene(c.scene, scene_hash(*spec));
    if (c.seed) run.add_seed("seed", *c.seed);
    return run;
}

void add_common(CLI::App* cmd, Common& c, bool needs_scene = true) {
    auto* opt = cmd->add_option("--scene", c.scene, "scene file (TOML)");
    if (needs_scene) opt->required();
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
    cmd->add_option("--figure", c.figure, "label of the figure this run targets, recorded in the manifest");
    cmd->add_option("--seed", c.seed, "seed for stochastic scenes (missing atoms, Monte Carlo motion)");
}

Wrt parse_wrt(const std::string& s) {
    if (s == "detunings") return Wrt::Detunings;
    if (s == "positions") return Wrt::Positions;
    throw ValidationError("--wrt is detunings or positions");
}

// spectrum -------------------------------------------------------------------------------

int cmd_spectrum(const Common& c, const std::string& grid_text, bool refine) {
    const auto spec = load_scene(c.scene);
    const auto scene = realize(spec, c.seed);
    const auto g = parse_range(grid_text);
    GridSpec grid{g.front(), g.back(), g.size(), refine};
    auto run = open_run("spectrum", c, &spec);
    run.params()["grid"] = grid_text;
    run.params()["refine"] = refine;
    const auto rec = sweep_spectrum(scene, grid);
    CsvFile csv(run, "spectrum.csv", "Delta_L,t_re,t_im,r_re,r_im,T,R");
    for (const auto& p : rec.points) csv.row({p.detuning, p.t.real(), p.t.imag(), p.r.real(), p.r.imag(), p.T, p.R});
    const auto [smax, where] = rec.max_sensitivity();
    run.results()["points"] = rec.points.size();
    run.results()["inserted_points"] = rec.inserted_points;
    run.results()["max_abs_dT_on_grid"] = smax;
    run.results()["max_abs_dT_detuning"] = where;
    run.finish();
    std::cout << "spectrum: " << rec.points.size() << " points (" << rec.inserted_points << " refined), max |dT/dDelta| "
              << smax << " at " << where << '\n';
    return 0;
}

// sweep ----------------------------------------------------------------------------------

void scale_detuning(DetuningProfile& p, double v) {
    std::visit(
        [&](auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, DetuningProfile::Uniform>)
                k.value = v;
            else if constexpr (std::is_same_v<K, DetuningProfile::Antisymmetric> ||
                               std::is_same_v<K, DetuningProfile::PlaneWave2D>)
                k.delta0 = v;
            else if constexpr (std::is_same_v<K, DetuningProfile::Sinusoidal1D>)
                k.amplitude = v;
            else if constexpr (std::is_same_v<K, DetuningProfile::Linear1D>)
                k.slope = v;
            else
                throw ValidationError("delta0 sweeps need a parametric [detuning] profile");
        },
        p.kind);
}

SceneSpec with_value(SceneSpec s, const std::string& var, double x) {
    auto& a = s.config.array;
    if (var == "spacing") {
        a.spacing = x;
    } else if (var == "delta0") {
        scale_detuning(s.config.detuning, x);
    } else if (var == "gamma_prime") {
        a.gamma_prime = x;
    } else if (var == "sigma") {
        s.motion.sigma = x;
    } else if (var == "missing") {
        if (!(x >= 0.0 && x < 1.0)) throw ValidationError("missing fraction must lie in [0, 1)");
        s.missing_fraction = x;
    } else if (var == "N") {
        const double r = std::round(x);
        if (r < 1.0) throw ValidationError("N sweep needs positive sizes");
        const auto n = static_cast<std::size_t>(r);
        if (a.geometry == Geometry::Square)
            a.nx = a.ny = n;
        else if (a.geometry == Geometry::Chain)
            a.count = n;
        else
            throw ValidationError("N sweeps need a chain or square geometry");
    } else {
        throw ValidationError("unknown sweep variable '" + var + "' (spacing, delta0, gamma_prime, sigma, missing, N)");
    }
    return s;
}

int cmd_sweep(const Common& c, const std::string& sweep_text, int realizations, bool keep) {
    const auto eq = sweep_text.find('=');
    if (eq == std::string::npos) throw ValidationError("--sweep expects var=start:stop:n");
    const std::string var = sweep_text.substr(0, eq);
    const auto xs = parse_range(sweep_text.substr(eq + 1));
    if (realizations < 1) throw ValidationError("--realizations must be at least 1");

    const auto base = load_scene(c.scene);
    bool random = stochastic(base) || var == "missing";
    if (random && !c.seed) throw ValidationError("stochastic sweeps need --seed");
    if (!random) realizations = 1;

    auto run = open_run("sweep", c, &base);
    run.params()["sweep"] = sweep_text;
    run.params()["realizations"] = realizations;
    if (random) run.params()["seed_rule"] = "splitmix64(seed + realization)";

    CsvFile csv(run, "sweep.csv", var + ",S_max,stderr,realizations");
    std::optional<CsvFile> per;
    if (keep) per.emplace(run, "sweep_realizations.csv", var + ",realization,seed,S_max,detuning");

    for (double x : xs) {
        const auto spec = with_value(base, var, x);
        std::vector<double> values;
        for (int r = 0; r < realizations; ++r) {
            std::optional<std::uint64_t> seed;
            if (random) seed = splitmix64(*c.seed + static_cast<std::uint64_t>(r));
            const bool needs_seed = stochastic(spec);
            const auto scene = realize(spec, needs_seed ? seed : std::nullopt);
            const auto best = max_sensitivity(scene);
            values.push_back(best.value);
            if (per) per->row({x, static_cast<double>(r), seed ? static_cast<double>(*seed) : 0.0, best.value, best.detuning});
        }
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double se = 0.0;
        if (values.size() > 1) {
            double var_sum = 0.0;
            for (double v : values) var_sum += (v - mean) * (v - mean);
            se = std::sqrt(var_sum / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
        }
        csv.row({x, mean, se, static_cast<double>(values.size())});
        std::cout << var << " = " << x << "  S_max = " << mean;
        if (values.size() > 1) std::cout << " +/- " << se;
        std::cout << '\n';
    }
    run.finish();
    return 0;
}

// lattice --------------------------------------------------------------------------------

Eigen::Vector3cd parse_polarization(const std::string& p) {
    if (p == "x") return Eigen::Vector3cd::UnitX();
    if (p == "y") return Eigen::Vector3cd::UnitY();
    if (p == "z") return Eigen::Vector3cd::UnitZ();
    if (p == "diagonal") return Eigen::Vector3cd(1, 1, 0) / std::sqrt(2.0);
    if (p == "circular") return Eigen::Vector3cd(cplx(1, 0), cplx(0, 1), 0) / std::sqrt(2.0);
    const auto v = parse_list(p);
    if (v.size() != 3) throw ValidationError("--polarization is x, y, z, diagonal, circular or dx,dy,dz");
    Eigen::Vector3cd d(v[0], v[1], v[2]);
    if (!(d.norm() > 0.0)) throw ValidationError("polarization has zero norm");
    return d / d.norm();
}

Eigen::Vector2d dark_k(const std::string& which, double a) {
    if (which == "corner") return Eigen::Vector2d::Constant(kPi / a);
    if (which == "edge") return Eigen::Vector2d(kPi / a, 0.0);
    throw ValidationError("--k is corner or edge");
}

int cmd_lattice(const Common& c, const std::string& range, const std::string& pol, const std::string& k) {
    const auto as = parse_range(range);
    const auto d = parse_polarization(pol);
    auto run = open_run("lattice", c, nullptr);
    run.params()["spacing"] = range;
    run.params()["polarization"] = pol;
    run.params()["k_dark"] = k;

    const auto diff = [&](double a) {
        const auto m = lattice_bright_dark(a, d, 0.0, dark_k(k, a));
        return m.J_B() - m.J_D();
    };

    CsvFile csv(run, "lattice.csv", "a,J_B,Gamma_B,J_D,Gamma_D,abs_JB_minus_JD");
    std::vector<double> gaps(as.size());
    for (std::size_t i = 0; i < as.size(); ++i) {
        const auto m = lattice_bright_dark(as[i], d, 0.0, dark_k(k, as[i]));
        const double gamma_d = -2.0 * m.lambda_D.imag();
        gaps[i] = m.J_B() - m.J_D();
        csv.row({as[i], m.J_B(), m.Gamma_B(), m.J_D(), gamma_d, std::abs(gaps[i])});
    }

    json crossings = json::array();
    for (std::size_t i = 0; i + 1 < as.size(); ++i) {
        if (gaps[i] == 0.0 || gaps[i] * gaps[i + 1] >= 0.0) continue;
        std::uintmax_t iters = 60;
        const auto [lo, hi] = boost::math::tools::toms748_solve(diff, as[i], as[i + 1], gaps[i], gaps[i + 1],
                                                                boost::math::tools::eps_tolerance<double>(40), iters);
        const double a0 = 0.5 * (lo + hi);
        const double h = 1e-3 * a0;
        const double left = (std::abs(diff(a0)) - std::abs(diff(a0 - h))) / h;
        const double right = (std::abs(diff(a0 + h)) - std::abs(diff(a0))) / h;
        crossings.push_back({{"a", a0}, {"slope_left", left}, {"slope_right", right}});
        std::cout << "J_B - J_D changes sign at a = " << a0 << " (|J_B - J_D| slope " << left << " -> " << right << ")\n";
    }
    if (crossings.empty()) std::cout << "no sign change of J_B - J_D in the scanned range\n";
    run.results()["crossings"] = crossings;
    run.finish();
    return 0;
}

// modes ----------------------------------------------------------------------------------

int cmd_modes(const Common& c) {
    const auto spec = load_scene(c.scene);
    const auto scene = realize(spec, c.seed);
    const auto modes = eigenmodes(coupling_matrix(scene.array), scene.array.detunings);
    auto run = open_run("modes", c, &spec);
    CsvFile csv(run, "modes.csv", "alpha,J,Gamma,class");
    for (Eigen::Index a = 0; a < modes.size(); ++a)
        csv.raw(std::to_string(a) + "," + cli::fmt(modes.shift(a)) + "," + cli::fmt(modes.decay(a)) + "," +
                std::string(mode_class_name(modes.classes[static_cast<std::size_t>(a)])));
    run.results()["modes"] = modes.size();
    run.finish();
    std::cout << modes.size() << " modes\n";
    return 0;
}

// sense ----------------------------------------------------------------------------------

int cmd_sense(const Common& c, const std::string& grid_text, bool integrated, const std::string& wrt) {
    const auto spec = load_scene(c.scene);
    const auto scene = realize(spec, c.seed);
    const auto grid = parse_range(grid_text);
    auto run = open_run("sense", c, &spec);
    run.params()["grid"] = grid_text;
    const auto curve = sensitivity_curve(scene, grid);
    CsvFile csv(run, "sense.csv", "Delta_L,S");
    for (std::size_t i = 0; i < grid.size(); ++i) csv.row({curve.grid[i], curve.S[i]});
    const auto best = max_sensitivity(scene);
    run.results()["S_max"] = best.value;
    run.results()["S_max_detuning"] = best.detuning;
    std::cout << "S_max = " << best.value << " at Delta_L = " << best.detuning << '\n';
    if (integrated) {
        run.params()["wrt"] = wrt;
        const auto r = integrated_sensitivity(scene, parse_wrt(wrt));
        run.results()["integrated"] = {{"value", r.value},
                                       {"tail", r.tail},
                                       {"quadrature_error", r.quadrature_error},
                                       {"window", {r.window_lo, r.window_hi}}};
        std::cout << "integrated ||grad T|| = " << r.value << " (tail " << r.tail << ")\n";
    }
    run.finish();
    return 0;
}

// jacobian -------------------------------------------------------------------------------

std::vector<double> sample_points(const Scene& scene, const std::string& samples) {
    if (samples == "default") return default_samples(TransmissionModel(scene));
    return parse_range(samples);
}

int cmd_jacobian(const Common& c, const std::string& wrt, const std::string& samples) {
    const auto spec = load_scene(c.scene);
    const auto scene = realize(spec, c.seed);
    const auto freqs = sample_points(scene, samples);
    const auto rep = jacobian(scene, freqs, parse_wrt(wrt));
    auto run = open_run("jacobian", c, &spec);
    run.params()["wrt"] = wrt;
    run.params()["samples"] = samples;
    {
        CsvFile m(run, "jacobian.csv", "i,j,dT_dp");
        for (Eigen::Index i = 0; i < rep.matrix.rows(); ++i)
            for (Eigen::Index j = 0; j < rep.matrix.cols(); ++j)
                m.row({static_cast<double>(i), static_cast<double>(j), rep.matrix(i, j)});
        CsvFile f(run, "jacobian_samples.csv", "i,Delta_L");
        for (std::size_t i = 0; i < freqs.size(); ++i) f.row({static_cast<double>(i), freqs[i]});
        CsvFile s(run, "jacobian_singular_values.csv", "k,sigma");
        for (Eigen::Index k = 0; k < rep.singular_values.size(); ++k) s.row({static_cast<double>(k), rep.singular_values(k)});
        CsvFile summary(run, "jacobian_summary.csv", "rank,kappa");
        summary.row({static_cast<double>(rep.rank), rep.condition_number});
    }
    run.results()["rank"] = rep.rank;
    run.results()["kappa"] = std::isfinite(rep.condition_number) ? json(rep.condition_number) : json("inf");
    run.finish();
    std::cout << "rank=" << rep.rank << ", kappa=" << rep.condition_number << '\n';
    return 0;
}

// reconstruct ----------------------------------------------------------------------------

void read_spectrum(const std::string& path, std::vector<double>& freqs, std::vector<double>& values) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read data file '" + path + "'");
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            if (line.rfind("Delta_L,T", 0) != 0) throw ValidationError("data file must have a Delta_L,T header");
            continue;
        }
        const auto v = parse_list(line);
        if (v.size() < 2) throw ValidationError("data row '" + line + "' needs Delta_L,T");
        freqs.push_back(v[0]);
        values.push_back(v[1]);
    }
}

int cmd_reconstruct(const Common& c, const std::string& wrt_text, const std::string& data, const std::string& truth,
                    const std::string& samples) {
    const auto spec = load_scene(c.scene);
    const auto control = realize(spec, c.seed);
    const Wrt wrt = parse_wrt(wrt_text);
    std::vector<double> freqs, values;
    Eigen::VectorXd p_true;
    if (!data.empty() == !truth.empty()) throw ValidationError("pass exactly one of --data or --truth");
    if (!data.empty()) {
        read_spectrum(data, freqs, values);
    } else {
        const auto t = parse_list(truth);
        p_true = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
        freqs = sample_points(control, samples);
        const TransmissionModel target(perturbed(control, p_true, wrt));
        for (double f : freqs) values.push_back(target.transmittance(f));
    }
    const auto res = reconstruct(control, freqs, values, wrt, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(control.array.size())));

    auto run = open_run("reconstruct", c, &spec);
    run.params()["wrt"] = wrt_text;
    if (!data.empty()) run.params()["data"] = data;
    if (!truth.empty()) run.params()["truth"] = truth;
    run.params()["samples"] = samples;
    {
        CsvFile csv(run, "reconstruct.csv", p_true.size() ? "j,p,p_true,abs_error" : "j,p");
        for (Eigen::Index j = 0; j < res.parameters.size(); ++j) {
            if (p_true.size())
                csv.row({static_cast<double>(j), res.parameters(j), p_true(j), std::abs(res.parameters(j) - p_true(j))});
            else
                csv.row({static_cast<double>(j), res.parameters(j)});
        }
    }
    run.results()["converged"] = res.converged;
    run.results()["iterations"] = res.iterations;
    run.results()["residual_norm"] = res.residual_norm;
    run.results()["kappa"] = res.condition_number;
    if (p_true.size()) run.results()["max_abs_error"] = (res.parameters - p_true).cwiseAbs().maxCoeff();
    run.finish();
    std::cout << (res.converged ? "converged" : "NOT converged") << " after " << res.iterations
              << " iterations, residual " << res.residual_norm << '\n';
    if (p_true.size()) std::cout << "max |p - p_true| = " << (res.parameters - p_true).cwiseAbs().maxCoeff() << '\n';
    return res.converged ? 0 : 3;
}

// precision ------------------------------------------------------------------------------

struct PrecisionArgs {
    std::string preset = "rb-d2";
    std::optional<double> gamma_sub, gamma_sub_fraction, gamma_0, omega_0;
    double atoms = 1000, excitation = 0.01, tau = 1.0, efficiency = 1.0, contrast = 1.0;
};

int cmd_precision(const Common& c, const PrecisionArgs& a) {
    const auto& preset = precision_preset(a.preset);
    PrecisionInputs in;
    in.gamma_0 = a.gamma_0.value_or(preset.gamma_0);
    in.omega_0 = a.omega_0.value_or(preset.omega_0);
    if (a.gamma_sub && a.gamma_sub_fraction) throw ValidationError("pass --gamma-sub or --gamma-sub-fraction, not both");
    in.gamma_sub = a.gamma_sub ? *a.gamma_sub : a.gamma_sub_fraction.value_or(0.01) * in.gamma_0;
    in.atoms = a.atoms;
    in.excitation = a.excitation;
    in.tau = a.tau;
    in.efficiency = a.efficiency;
    in.contrast = a.contrast;
    const auto r = precision_report(in);

    auto run = open_run("precision", c, nullptr);
    run.params() = {{"preset", a.preset}, {"gamma_sub", in.gamma_sub}, {"gamma_0", in.gamma_0},
                    {"omega_0", in.omega_0}, {"N", in.atoms}, {"p", in.excitation},
                    {"tau", in.tau}, {"eta_eff", in.efficiency}, {"C", in.contrast}};
    {
        CsvFile csv(run, "precision.csv", "gamma_sub,gamma_0,omega_0,N,p,tau,eta_eff,C,delta_omega,fractional,power_W");
        csv.row({in.gamma_sub, in.gamma_0, in.omega_0, in.atoms, in.excitation, in.tau, in.efficiency, in.contrast,
                 r.delta_omega, r.fractional, r.power});
    }
    run.results() = {{"delta_omega", r.delta_omega}, {"fractional", r.fractional}, {"power_W", r.power},
                     {"disclaimer", r.disclaimer}};
    run.finish();

    std::cout << "preset            " << preset.name << " (" << preset.description << ")\n"
              << "gamma_sub [1/s]   " << in.gamma_sub << '\n'
              << "N, p, tau [s]     " << in.atoms << ", " << in.excitation << ", " << in.tau << '\n'
              << "delta_omega [1/s] " << r.delta_omega << '\n'
              << "fractional        " << r.fractional << '\n'
              << "power [W]         " << r.power << '\n'
              << "note              " << r.disclaimer << '\n';
    return 0;
}

// dump -----------------------------------------------------------------------------------

int cmd_dump(const Common& c) {
    const auto spec = load_scene(c.scene);
    const auto scene = realize(spec, c.seed);
    json j;
    j["scene_hash"] = scene_hash(spec);
    j["environment"] = scene.array.is_waveguide() ? "waveguide" : "free_space";
    j["kp"] = scene.array.kp;
    j["gamma_prime"] = scene.array.gamma_prime;
    j["positions"] = json::array();
    for (const auto& p : scene.array.positions) j["positions"].push_back({p.x(), p.y(), p.z()});
    j["detunings"] = scene.array.detunings;
    j["dipole"] = json::array();
    for (int i = 0; i < 3; ++i) j["dipole"].push_back({scene.array.dipole(i).real(), scene.array.dipole(i).imag()});
    j["drive"]["amplitude"] = scene.drive.amplitude;
    j["drive"]["laser_detuning"] = scene.drive.laser_detuning;
    if (const auto* g = std::get_if<GaussianBeam>(&scene.drive.kind)) {
        j["drive"]["kind"] = "gaussian";
        j["drive"]["waist"] = g->waist;
    } else {
        j["drive"]["kind"] = "guided";
        j["drive"]["from"] = std::get<GuidedPlaneWave>(scene.drive.kind).from == Side::Left ? "left" : "right";
    }
    j["motion_sigma"] = scene.motion.sigma;
    std::cout << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"subsense: collective transmission spectra and sensitivity of emitter arrays"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "cap on worker threads (0 = all cores)");

    Common c;
    std::string grid = "-5:5:1001", sweep, spacing = "0.2:0.4:41", pol = "x", kdark = "corner", wrt = "detunings",
                samples = "default", data, truth;
    bool refine = false, keep = false, integrated = false;
    int realizations = 1;
    PrecisionArgs pa;

    auto* spectrum = app.add_subcommand("spectrum", "transmission/reflection spectrum");
    add_common(spectrum, c);
    spectrum->add_option("--grid", grid, "start:stop:n")->capture_default_str();
    spectrum->add_flag("--refine", refine, "add points where T changes quickly");

    auto* sweep_cmd = app.add_subcommand("sweep", "maximum sensitivity versus a scene parameter");
    add_common(sweep_cmd, c);
    sweep_cmd->add_option("--sweep", sweep, "var=start:stop:n with var in spacing, delta0, gamma_prime, sigma, missing, N")
        ->required();
    sweep_cmd->add_option("--realizations", realizations, "realizations per point for stochastic sweeps");
    sweep_cmd->add_flag("--keep-realizations", keep, "also write per-realization values");

    auto* lattice = app.add_subcommand("lattice", "bright/dark modes of the infinite square lattice");
    add_common(lattice, c, false);
    lattice->add_option("--spacing", spacing, "start:stop:n")->capture_default_str();
    lattice->add_option("--polarization", pol, "x, y, z, diagonal, circular or dx,dy,dz")->capture_default_str();
    lattice->add_option("--k", kdark, "dark-mode quasi-momentum: corner or edge")->capture_default_str();

    auto* modes = app.add_subcommand("modes", "collective eigenmodes");
    add_common(modes, c);

    auto* sense = app.add_subcommand("sense", "|dT/dDelta| over a grid and its maximum");
    add_common(sense, c);
    sense->add_option("--grid", grid, "start:stop:n")->capture_default_str();
    sense->add_flag("--integrated", integrated, "also integrate ||grad T|| over Delta_L");
    sense->add_option("--wrt", wrt, "detunings or positions")->capture_default_str();

    auto* jac = app.add_subcommand("jacobian", "dT/dp at sample frequencies, rank and condition number");
    add_common(jac, c);
    jac->add_option("--wrt", wrt, "detunings or positions")->capture_default_str();
    jac->add_option("--samples", samples, "default (2N mode-anchored points) or start:stop:n")->capture_default_str();

    auto* rec = app.add_subcommand("reconstruct", "fit a perturbation to a measured spectrum");
    add_common(rec, c);
    rec->add_option("--wrt", wrt, "detunings or positions")->capture_default_str();
    rec->add_option("--data", data, "CSV with Delta_L,T columns");
    rec->add_option("--truth", truth, "comma-separated perturbation for a synthetic round trip");
    rec->add_option("--samples", samples, "sample frequencies for --truth")->capture_default_str();

    auto* prec = app.add_subcommand("precision", "shot-noise frequency precision estimate");
    add_common(prec, c, false);
    prec->add_option("--preset", pa.preset, "rb-d2 or sr-clock")->capture_default_str();
    prec->add_option("--gamma-sub", pa.gamma_sub, "subradiant linewidth, s^-1");
    prec->add_option("--gamma-sub-fraction", pa.gamma_sub_fraction, "subradiant linewidth as a fraction of gamma_0");
    prec->add_option("--gamma0", pa.gamma_0, "override the preset decay rate, s^-1");
    prec->add_option("--omega0", pa.omega_0, "override the preset transition frequency, rad/s");
    prec->add_option("-N,--atoms", pa.atoms, "atom number")->capture_default_str();
    prec->add_option("-p,--excitation", pa.excitation, "excitation probability per atom")->capture_default_str();
    prec->add_option("--tau", pa.tau, "measurement time, s")->capture_default_str();
    prec->add_option("--efficiency", pa.efficiency, "detection efficiency")->capture_default_str();
    prec->add_option("--contrast", pa.contrast, "contrast")->capture_default_str();

    auto* dump = app.add_subcommand("dump", "print the resolved scene as JSON");
    add_common(dump, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        set_thread_limit(threads);
        if (*spectrum) return cmd_spectrum(c, grid, refine);
        if (*sweep_cmd) return cmd_sweep(c, sweep, realizations, keep);
        if (*lattice) return cmd_lattice(c, spacing, pol, kdark);
        if (*modes) return cmd_modes(c);
        if (*sense) return cmd_sense(c, grid, integrated, wrt);
        if (*jac) return cmd_jacobian(c, wrt, samples);
        if (*rec) return cmd_reconstruct(c, wrt, data, truth, samples);
        if (*prec) return cmd_precision(c, pa);
        if (*dump) return cmd_dump(c);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
