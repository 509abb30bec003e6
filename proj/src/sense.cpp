#include "subsense/sense.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "subsense/errors.hpp"
#include "subsense/parallel.hpp"
#include "subsense/steady.hpp"

namespace subsense {

namespace {

constexpr double kRankThreshold = 1e-12;

// Offsets (in linewidths) around every mode resonance used to seed the sensitivity search.
constexpr double kAnchorOffsets[] = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.5, 2.0, 3.0};

MaxSensitivity golden_maximize(const std::function<double(double)>& S, double lo, double hi, double scale) {
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - ratio * (b - a), d = a + ratio * (b - a);
    double fc = S(c), fd = S(d);
    for (int it = 0; it < 200 && (b - a) > 1e-12 * scale; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = S(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = S(d);
        }
    }
    return fc > fd ? MaxSensitivity{c, fc} : MaxSensitivity{d, fd};
}

// Generic search given mode resonances (J, Gamma) and a sensitivity function.
MaxSensitivity search_maximum(const std::vector<std::pair<double, double>>& modes,
                              const std::function<double(double)>& S, const SensitivitySearch& opt) {
    if (modes.empty()) return {};
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, min_width = lo;
    std::vector<double> xs;
    for (const auto& [J, G] : modes) {
        const double w = std::max(G, 1e-12);
        lo = std::min(lo, J - opt.window_linewidths * w);
        hi = std::max(hi, J + opt.window_linewidths * w);
        min_width = std::min(min_width, w);
        for (double c : kAnchorOffsets) {
            xs.push_back(J + c * w);
            xs.push_back(J - c * w);
        }
    }
    const std::size_t n = std::max<std::size_t>(opt.uniform_points, 2);
    for (std::size_t i = 0; i < n; ++i) xs.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::vector<double> ys(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) { ys[i] = S(xs[i]); });

    // refine the few largest local maxima
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const bool left = i == 0 || ys[i] >= ys[i - 1];
        const bool right = i + 1 == xs.size() || ys[i] >= ys[i + 1];
        if (left && right) peaks.push_back(i);
    }
    std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return ys[a] > ys[b]; });
    if (peaks.size() > 4) peaks.resize(4);

    MaxSensitivity best{xs[peaks.front()], ys[peaks.front()]};
    const double scale = std::max({std::abs(lo), std::abs(hi), min_width});
    for (std::size_t i : peaks) {
        const double a = i > 0 ? xs[i - 1] : xs[i];
        const double b = i + 1 < xs.size() ? xs[i + 1] : xs[i];
        if (b <= a) continue;
        const auto cand = golden_maximize(S, a, b, scale);
        if (cand.value > best.value) best = cand;
    }
    return best;
}

void require_positions_supported(const Scene& scene) {
    if (!scene.array.is_waveguide())
        throw ValidationError("position gradients are defined for waveguide chains only");
    if (scene.motion.sigma > 0.0) throw ValidationError("position gradients need static emitters (sigma = 0)");
}

// dT/dx_m for a static guided chain, differentiating drive phases, detection phases and couplings.
Eigen::VectorXd position_gradient(const TransmissionModel& model, const Scene& scene, double laser_detuning) {
    const Eigen::Index n = model.size();
    if (n == 0) return {};
    const auto x = scene.array.axial();
    const double k = scene.array.guided_wavenumber();
    const auto* g = std::get_if<GuidedPlaneWave>(&scene.drive.kind);
    const double s = (g && g->from == Side::Right) ? -1.0 : 1.0;

    const Eigen::MatrixXcd A = steady_system_matrix(model.couplings(), model.detunings(), laser_detuning);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    const Eigen::VectorXcd& u = model.unit_drive();
    const Eigen::VectorXcd q = model.transmission_weights().col(0);
    const Eigen::VectorXcd sigma = lu.solve(u);
    const Eigen::VectorXcd w = lu.solve(q);  // A is complex symmetric
    const cplx t = 1.0 + (q.transpose() * sigma)(0);

    const cplx isk(0.0, s * k);
    Eigen::VectorXd grad(n);
    for (Eigen::Index m = 0; m < n; ++m) {
        cplx dt = -isk * q(m) * sigma(m) + w(m) * isk * u(m);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == m) continue;
            const double sep = x[static_cast<std::size_t>(m)] - x[static_cast<std::size_t>(j)];
            const cplx dA = 0.5 * k * (sep > 0.0 ? 1.0 : -1.0) * std::exp(cplx(0.0, k * std::abs(sep)));
            dt -= dA * (w(m) * sigma(j) + w(j) * sigma(m));
        }
        grad(m) = 2.0 * (std::conj(t) * dt).real();
    }
    return grad;
}

Eigen::VectorXd gradient_with(const TransmissionModel& model, const Scene& scene, double laser_detuning, Wrt wrt) {
    if (wrt == Wrt::Detunings) return model.detuning_gradient(laser_detuning);
    return position_gradient(model, scene, laser_detuning);
}

std::vector<std::pair<double, double>> resonances(const ModeSet& modes) {
    std::vector<std::pair<double, double>> out;
    for (Eigen::Index a = 0; a < modes.size(); ++a) out.emplace_back(modes.shift(a), modes.decay(a));
    return out;
}

JacobianReport build_report(Eigen::MatrixXd matrix, std::vector<double> freqs) {
    JacobianReport rep;
    rep.matrix = std::move(matrix);
    rep.frequencies = std::move(freqs);
    if (rep.matrix.size() == 0) return rep;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(rep.matrix);
    rep.singular_values = svd.singularValues();
    const double smax = rep.singular_values.size() ? rep.singular_values(0) : 0.0;
    rep.rank_threshold = smax * kRankThreshold;
    rep.rank = 0;
    for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i) rep.rank += rep.singular_values(i) > rep.rank_threshold;
    const Eigen::Index full = std::min(rep.matrix.rows(), rep.matrix.cols());
    rep.condition_number = (rep.rank == full && smax > 0.0)
                               ? smax / rep.singular_values(full - 1)
                               : std::numeric_limits<double>::infinity();
    return rep;
}

}  // namespace

double dT_dDelta(const Scene& scene, double laser_detuning) {
    return TransmissionModel(scene).dT_dDelta(laser_detuning);
}

SensitivityCurve sensitivity_curve(const Scene& scene, std::span<const double> grid) {
    const TransmissionModel model(scene);
    SensitivityCurve c;
    c.grid.assign(grid.begin(), grid.end());
    c.S.resize(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { c.S[i] = std::abs(model.dT_dDelta(grid[i])); });
    for (std::size_t i = 0; i < c.S.size(); ++i)
        if (c.S[i] > c.max) {
            c.max = c.S[i];
            c.argmax = c.grid[i];
        }
    return c;
}

MaxSensitivity max_sensitivity(const TransmissionModel& model, const SensitivitySearch& search) {
    return search_maximum(resonances(model.modes()), [&](double d) { return std::abs(model.dT_dDelta(d)); }, search);
}

MaxSensitivity max_sensitivity(const Scene& scene, const SensitivitySearch& search) {
    return max_sensitivity(TransmissionModel(scene), search);
}

MaxSensitivity max_sensitivity(const BrightDarkModel& model, const SensitivitySearch& search) {
    model.validate();
    Eigen::Matrix2cd H;
    H << model.lambda_B, model.coupling, model.coupling, model.lambda_D;
    const Eigen::Vector2cd ev = H.eigenvalues();
    std::vector<std::pair<double, double>> modes;
    for (int i = 0; i < 2; ++i) modes.emplace_back(ev(i).real(), -2.0 * ev(i).imag());
    return search_maximum(modes, [&](double d) { return std::abs(bright_dark_dT(model, d)); }, search);
}

Eigen::VectorXd gradient_T(const Scene& scene, double laser_detuning, Wrt wrt) {
    if (wrt == Wrt::Positions) require_positions_supported(scene);
    return gradient_with(TransmissionModel(scene), scene, laser_detuning, wrt);
}

std::vector<double> default_samples(const TransmissionModel& model) {
    std::vector<double> out;
    const auto& modes = model.modes();
    for (Eigen::Index a = 0; a < modes.size(); ++a) {
        out.push_back(modes.shift(a) - 0.5 * modes.decay(a));
        out.push_back(modes.shift(a) + 0.5 * modes.decay(a));
    }
    return out;
}

JacobianReport jacobian(const Scene& scene, std::span<const double> frequencies, Wrt wrt) {
    if (wrt == Wrt::Positions) require_positions_supported(scene);
    const TransmissionModel model(scene);
    const Eigen::Index n = model.size();
    if (static_cast<Eigen::Index>(frequencies.size()) < n)
        throw ValidationError("Jacobian needs at least as many frequency samples as parameters");
    Eigen::MatrixXd M(static_cast<Eigen::Index>(frequencies.size()), n);
    parallel_for(frequencies.size(), [&](std::size_t i) {
        M.row(static_cast<Eigen::Index>(i)) = gradient_with(model, scene, frequencies[i], wrt).transpose();
    });
    return build_report(std::move(M), std::vector<double>(frequencies.begin(), frequencies.end()));
}

JacobianReport jacobian(const Scene& scene, Wrt wrt) {
    const auto freqs = default_samples(TransmissionModel(scene));
    return jacobian(scene, freqs, wrt);
}

IntegratedSensitivity integrated_sensitivity(const Scene& scene, Wrt wrt, double linewidths) {
    if (wrt == Wrt::Positions) require_positions_supported(scene);
    if (!(linewidths > 0.0)) throw ValidationError("integration window must be positive");
    const TransmissionModel model(scene);
    IntegratedSensitivity out;
    if (model.size() == 0) return out;

    const auto modes = resonances(model.modes());
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::vector<double> cuts;
    for (const auto& [J, G] : modes) {
        const double w = std::max(G, 1e-12);
        lo = std::min(lo, J - linewidths * w);
        hi = std::max(hi, J + linewidths * w);
        for (double c : {-5.0, -1.0, 0.0, 1.0, 5.0}) cuts.push_back(J + c * w);
    }
    cuts.push_back(lo);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double c) { return c < lo || c > hi; }), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto norm_grad = [&](double d) { return gradient_with(model, scene, d, wrt).norm(); };
    std::vector<double> part(cuts.size() - 1), err(cuts.size() - 1);
    parallel_for(part.size(), [&](std::size_t i) {
        double e = 0.0;
        part[i] = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(norm_grad, cuts[i], cuts[i + 1], 20,
                                                                                1e-10, &e);
        err[i] = e * (cuts[i + 1] - cuts[i]);
    });
    double core = 0.0;
    for (std::size_t i = 0; i < part.size(); ++i) {
        core += part[i];
        out.quadrature_error += err[i];
    }

    // ||grad T|| ~ C |Delta - c|^-p far from every resonance; fit p from two points per side
    const double centre = 0.5 * (lo + hi), L = 0.5 * (hi - lo);
    const auto tail_side = [&](double sign) {
        const double g1 = norm_grad(centre + sign * L), g2 = norm_grad(centre + sign * 2.0 * L);
        if (g1 == 0.0) return 0.0;
        const double p = std::log2(g1 / g2);
        if (!(p > 1.2)) throw NumericalError("sensitivity tail does not decay fast enough to be integrable");
        return g1 * L / (p - 1.0);
    };
    out.tail = tail_side(-1.0) + tail_side(1.0);
    out.value = core + out.tail;
    out.window_lo = lo;
    out.window_hi = hi;
    return out;
}

Scene perturbed(const Scene& scene, const Eigen::VectorXd& perturbation, Wrt wrt) {
    if (perturbation.size() != static_cast<Eigen::Index>(scene.array.size()))
        throw ValidationError("perturbation length does not match the array");
    Scene out = scene;
    for (std::size_t j = 0; j < scene.array.size(); ++j) {
        const double p = perturbation(static_cast<Eigen::Index>(j));
        if (wrt == Wrt::Detunings)
            out.array.detunings[j] += p;
        else
            out.array.positions[j].x() += p;
    }
    return out;
}

ReconstructionResult reconstruct(const Scene& control, std::span<const double> frequencies,
                                 std::span<const double> measured, Wrt wrt, const Eigen::VectorXd& initial_guess,
                                 const ReconstructionOptions& options) {
    if (frequencies.size() != measured.size())
        throw ValidationError("measured spectrum and frequency list differ in length");
    const Eigen::Index n = static_cast<Eigen::Index>(control.array.size());
    if (initial_guess.size() != n) throw ValidationError("initial guess length does not match the array");

    const auto at_control = jacobian(control, frequencies, wrt);
    if (at_control.rank < n) {
        std::ostringstream os;
        os << "transmittance is not locally injective at the control point (Jacobian rank " << at_control.rank
           << " of " << n << "); add a control detuning that breaks the symmetry";
        throw ValidationError(os.str());
    }
    if (at_control.condition_number > options.max_condition) {
        std::ostringstream os;
        os << "Jacobian condition number " << at_control.condition_number << " exceeds " << options.max_condition;
        throw ValidationError(os.str());
    }

    const Eigen::Map<const Eigen::VectorXd> data(measured.data(), static_cast<Eigen::Index>(measured.size()));
    const auto residual = [&](const Eigen::VectorXd& p) {
        const TransmissionModel model(perturbed(control, p, wrt));
        Eigen::VectorXd r(static_cast<Eigen::Index>(frequencies.size()));
        parallel_for(frequencies.size(), [&](std::size_t i) {
            r(static_cast<Eigen::Index>(i)) = model.transmittance(frequencies[i]);
        });
        return Eigen::VectorXd(r - data);
    };

    ReconstructionResult res;
    Eigen::VectorXd p = initial_guess;
    Eigen::VectorXd r = residual(p);
    double cost = r.squaredNorm();
    double mu = options.initial_damping;
    bool step_converged = r.norm() == 0.0;
    JacobianReport J = jacobian(perturbed(control, p, wrt), frequencies, wrt);

    for (int it = 0; it < options.max_iterations && !step_converged; ++it) {
        const Eigen::MatrixXd JtJ = J.matrix.transpose() * J.matrix;
        const Eigen::VectorXd g = J.matrix.transpose() * r;
        if (g.norm() == 0.0) {
            step_converged = true;
            break;
        }
        bool accepted = false;
        Eigen::VectorXd step;
        while (mu < 1e12) {
            Eigen::MatrixXd lhs = JtJ;
            lhs.diagonal() += mu * JtJ.diagonal().cwiseMax(1e-300);
            step = -lhs.ldlt().solve(g);
            const Eigen::VectorXd r_new = residual(p + step);
            const double cost_new = r_new.squaredNorm();
            if (cost_new < cost) {
                p += step;
                r = r_new;
                cost = cost_new;
                mu = std::max(mu / 10.0, 1e-15);
                accepted = true;
                break;
            }
            mu *= 10.0;
        }
        res.iterations = it + 1;
        if (!accepted) break;
        J = jacobian(perturbed(control, p, wrt), frequencies, wrt);
        if (step.norm() < options.step_tolerance || r.norm() == 0.0) step_converged = true;
    }

    res.parameters = p;
    res.residual_norm = r.norm();
    res.condition_number = J.condition_number;
    res.converged = step_converged && res.residual_norm <= options.residual_tolerance;
    return res;
}

}  // namespace subsense
