#include "subsense/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Geometry>

#include "subsense/errors.hpp"
#include "subsense/parallel.hpp"

namespace subsense {

namespace {

constexpr double k0 = kWavenumber;

const GaussianBeam* beam_of(const Scene& scene) { return std::get_if<GaussianBeam>(&scene.drive.kind); }

Side incidence(const Scene& scene) {
    const auto* g = std::get_if<GuidedPlaneWave>(&scene.drive.kind);
    return g ? g->from : Side::Left;
}

// Paraxial Gaussian beam, unit amplitude at the focus, in complex-beam-parameter form.
cplx beam_profile(const GaussianBeam& beam, const Eigen::Vector3d& r) {
    const Eigen::Vector3d axis = beam.axis.normalized();
    const Eigen::Vector3d rel = r - beam.focus;
    const double z = rel.dot(axis);
    const double rho2 = std::max(0.0, rel.squaredNorm() - z * z);
    const double zr = 0.5 * k0 * beam.waist * beam.waist;
    const cplx q(z, zr);
    return cplx(0.0, zr) / q * std::exp(cplx(0.0, k0 * z)) * std::exp(cplx(0.0, 0.5 * k0 * rho2) / q);
}

double axial_plane(const EmitterArray& array, const Eigen::Vector3d& axis) {
    if (array.size() == 0) return 0.0;
    double s = 0.0;
    for (const auto& p : array.positions) s += p.dot(axis);
    return s / static_cast<double>(array.size());
}

double centroid_x(const EmitterArray& array) {
    if (array.size() == 0) return 0.0;
    double s = 0.0;
    for (const auto& p : array.positions) s += p.x();
    return s / static_cast<double>(array.size());
}

}  // namespace

// Layout and scene ----------------------------------------------------------------------

double default_beam_waist(std::size_t count, double spacing) {
    return 0.3 * std::sqrt(static_cast<double>(count)) * spacing;
}

std::vector<Eigen::Vector3d> DetectionLayout::points(const EmitterArray& array, const GaussianBeam& beam) const {
    const Eigen::Vector3d axis = beam.axis.normalized();
    const double plane = axial_plane(array, axis);
    double front = plane;
    for (const auto& p : array.positions) front = std::max(front, p.dot(axis));

    const double distance = std::visit([](const auto& k) { return k.distance; }, kind);
    if (!(distance > 0.0)) throw ValidationError("detection plane must lie beyond the array (distance > 0)");
    const Eigen::Vector3d centre = beam.focus + (plane + distance - beam.focus.dot(axis)) * axis;
    if (!(centre.dot(axis) > front)) throw ValidationError("detection point lies behind the array");

    if (std::holds_alternative<SinglePointOnAxis>(kind)) return {centre};

    const auto& disk = std::get<DiskSampling>(kind);
    if (disk.count < 1) throw ValidationError("detection layout needs at least one point");
    const double radius = disk.radius > 0.0 ? disk.radius : 1.2 * beam.waist;
    // transverse basis
    const Eigen::Vector3d helper = std::abs(axis.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    const Eigen::Vector3d e1 = (helper - helper.dot(axis) * axis).normalized();
    const Eigen::Vector3d e2 = axis.cross(e1);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(static_cast<std::size_t>(disk.count));
    for (int i = 0; i < disk.count; ++i) {
        const double rho = radius * std::sqrt((i + 0.5) / disk.count);
        const double th = golden * i;
        pts.push_back(centre + rho * (std::cos(th) * e1 + std::sin(th) * e2));
    }
    return pts;
}

void Scene::validate() const {
    array.validate();
    drive.validate();
    motion.validate();
    if (array.is_waveguide()) {
        if (!std::holds_alternative<GuidedPlaneWave>(drive.kind))
            throw ValidationError("waveguide scenes are driven by a guided plane wave");
        return;
    }
    if (motion.sigma > 0.0) throw ValidationError("motion averaging is implemented for waveguide scenes only");
    const auto* beam = beam_of(*this);
    if (!beam) throw ValidationError("free-space scenes are driven by a Gaussian beam");
    const Eigen::Vector3cd d = array.dipole.normalized();
    if (std::abs(d.dot(beam->axis.normalized().cast<cplx>())) > 1e-9)
        throw ValidationError("dipole must be transverse to the beam axis for a normally incident beam");
}

cplx incident_field(const Scene& scene, const Eigen::Vector3d& r) {
    if (scene.array.is_waveguide()) {
        const double sign = incidence(scene) == Side::Left ? 1.0 : -1.0;
        const double k = scene.array.guided_wavenumber();
        return scene.drive.amplitude * std::exp(cplx(0.0, sign * k * (r.x() - centroid_x(scene.array))));
    }
    const auto* beam = beam_of(scene);
    if (!beam) throw ValidationError("free-space scenes are driven by a Gaussian beam");
    return scene.drive.amplitude * beam_profile(*beam, r);
}

Eigen::Vector3cd scattered_field(const Scene& scene, const Eigen::VectorXcd& coherences, const Eigen::Vector3d& r) {
    const auto& arr = scene.array;
    if (coherences.size() != static_cast<Eigen::Index>(arr.size()))
        throw ValidationError("coherence vector length does not match the array");
    const Eigen::Vector3cd d = arr.dipole.normalized();
    for (const auto& p : arr.positions)
        if ((p - r).norm() < kCoincidenceGuard) throw ValidationError("observation point coincides with an emitter");
    if (arr.is_waveguide()) {
        const double k = arr.guided_wavenumber();
        cplx field = incident_field(scene, r);
        for (std::size_t j = 0; j < arr.size(); ++j)
            field += greens_waveguide(r.x() - arr.positions[j].x(), k) * coherences(static_cast<Eigen::Index>(j));
        return field * d;
    }
    Eigen::Vector3cd field = incident_field(scene, r) * d;
    for (std::size_t j = 0; j < arr.size(); ++j) {
        const Eigen::Vector3d sep = r - arr.positions[j];
        if (sep.norm() < 0.5) warn("observation point is in the near field of an emitter");
        field += (3.0 * kPi / k0) * (greens_freespace(sep, k0) * d) * coherences(static_cast<Eigen::Index>(j));
    }
    return field;
}

// TransmissionModel ---------------------------------------------------------------------

struct TransmissionModel::Solved {
    Eigen::VectorXcd sigma;
    Eigen::VectorXcd amplitudes;
    Eigen::VectorXcd d_amplitudes;
    ShiftedSolver::Factor factor;
};

TransmissionModel::TransmissionModel(const Scene& scene) {
    scene.validate();
    const auto& arr = scene.array;
    waveguide_ = arr.is_waveguide();
    amplitude_ = scene.drive.amplitude;
    detunings_ = arr.detunings;
    const Eigen::Index n = static_cast<Eigen::Index>(arr.size());

    if (waveguide_) {
        AveragedInputs in = motion_averaged_inputs(arr, scene.motion);
        couplings_ = std::move(in.couplings);
        const bool left = incidence(scene) == Side::Left;
        drive_ = left ? in.drive_left : in.drive_right;
        // forward-scattered weights carry the conjugate phase of the drive, reflected ones the same phase
        const Eigen::VectorXcd& forward = left ? in.drive_right : in.drive_left;
        probes_ = cplx(0.0, 0.5) * forward;
        reflect_ = cplx(0.0, 0.5) * drive_;
        probe_offset_ = Eigen::VectorXcd::Ones(1);
        probe_weight_ = 1.0;
    } else {
        couplings_ = coupling_matrix(arr);
        const auto& beam = *beam_of(scene);
        drive_.resize(n);
        for (Eigen::Index j = 0; j < n; ++j) drive_(j) = beam_profile(beam, arr.positions[static_cast<std::size_t>(j)]);
        const auto pts = scene.detection.points(arr, beam);
        const Eigen::Vector3cd d = arr.dipole.normalized();
        probes_.resize(n, static_cast<Eigen::Index>(pts.size()));
        for (std::size_t p = 0; p < pts.size(); ++p) {
            const cplx inc = beam_profile(beam, pts[p]);
            for (Eigen::Index j = 0; j < n; ++j) {
                const Eigen::Vector3d sep = pts[p] - arr.positions[static_cast<std::size_t>(j)];
                probes_(j, static_cast<Eigen::Index>(p)) = (3.0 * kPi / k0) * d.dot(greens_freespace(sep, k0) * d) / inc;
            }
        }
        probe_offset_ = Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(pts.size()));
        probe_weight_ = 1.0 / static_cast<double>(pts.size());
        reflect_ = Eigen::VectorXcd::Zero(n);
    }
    modes_ = eigenmodes(couplings_, detunings_);
    solver_ = ShiftedSolver(system_hamiltonian(couplings_, detunings_));
}

TransmissionModel::Solved TransmissionModel::solve(double laser_detuning, bool with_derivative) const {
    Solved s;
    s.factor = solver_.factor(laser_detuning);
    s.sigma = s.factor.solve(drive_);
    s.amplitudes = probe_offset_ + probes_.transpose() * s.sigma;
    if (with_derivative) s.d_amplitudes = probes_.transpose() * s.factor.solve(s.sigma);

    const double excitation = s.sigma.size() ? s.sigma.cwiseAbs2().maxCoeff() * amplitude_ * amplitude_ : 0.0;
    if (excitation > kExcitationLimit) {
        check_excitation(excitation);
    } else if (excitation > kExcitationWarning && !warned_->exchange(true)) {
        check_excitation(excitation);
    }
    return s;
}

TransmissionModel::Point TransmissionModel::evaluate(double laser_detuning) const {
    const Solved s = solve(laser_detuning, true);
    Point pt;
    pt.detuning = laser_detuning;
    pt.t = s.amplitudes(0);
    double T = 0.0, dT = 0.0;
    for (Eigen::Index p = 0; p < s.amplitudes.size(); ++p) {
        T += std::norm(s.amplitudes(p));
        dT += 2.0 * (std::conj(s.amplitudes(p)) * s.d_amplitudes(p)).real();
    }
    pt.T = probe_weight_ * T;
    pt.dT = probe_weight_ * dT;
    if (waveguide_) {
        pt.r = (reflect_.transpose() * s.sigma)(0);
        pt.R = std::norm(pt.r);
    }
    return pt;
}

Eigen::VectorXd TransmissionModel::detuning_gradient(double laser_detuning) const {
    const Solved s = solve(laser_detuning, false);
    // A is complex symmetric, so A^-T q = A^-1 q
    const Eigen::MatrixXcd W = s.factor.solve(probes_);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(size());
    for (Eigen::Index p = 0; p < s.amplitudes.size(); ++p)
        g += 2.0 * (std::conj(s.amplitudes(p)) * W.col(p).cwiseProduct(s.sigma)).real();
    return probe_weight_ * g;
}

Eigen::VectorXcd TransmissionModel::coherences(double laser_detuning) const {
    return amplitude_ * solve(laser_detuning, false).sigma;
}

// Closed forms ------------------------------------------------------------------------

std::pair<cplx, cplx> waveguide_transmission(const Scene& scene, double laser_detuning, bool force_numeric) {
    scene.validate();
    if (!scene.array.is_waveguide()) throw ValidationError("waveguide_transmission needs a waveguide scene");
    const auto& arr = scene.array;
    const bool analytic = !force_numeric && arr.size() == 2 && scene.motion.sigma == 0.0 &&
                          arr.detunings[0] == arr.detunings[1];
    if (analytic) {
        const double a = std::abs(arr.positions[1].x() - arr.positions[0].x());
        const double k = arr.guided_wavenumber();
        auto [ls, la] = two_atom_eigenvalues(a, k);
        const cplx shift(arr.detunings[0], 0.5 * arr.gamma_prime);
        ls -= shift;
        la -= shift;
        const double c2 = std::pow(std::cos(0.5 * k * a), 2), s2 = std::pow(std::sin(0.5 * k * a), 2);
        const cplx S = c2 / (ls - laser_detuning), A = s2 / (la - laser_detuning);
        const cplx i(0.0, 1.0);
        return {1.0 + i * (S + A), i * (S - A)};
    }
    const auto pt = TransmissionModel(scene).evaluate(laser_detuning);
    return {pt.t, pt.r};
}

cplx bright_dark_transmission(const BrightDarkModel& model, double laser_detuning) {
    model.validate();
    const cplx nb = model.lambda_B - laser_detuning, nd = model.lambda_D - laser_detuning;
    const cplx den = nb * nd - model.coupling * model.coupling;
    return 1.0 + cplx(0.0, 0.5) * model.Gamma_B() * nd / den;
}

double bright_dark_dT(const BrightDarkModel& model, double laser_detuning) {
    model.validate();
    const cplx nb = model.lambda_B - laser_detuning, nd = model.lambda_D - laser_detuning;
    const cplx den = nb * nd - model.coupling * model.coupling;
    const cplx dden = -(nb + nd);
    const cplx t = 1.0 + cplx(0.0, 0.5) * model.Gamma_B() * nd / den;
    const cplx dt = cplx(0.0, 0.5) * model.Gamma_B() * (-den - nd * dden) / (den * den);
    return 2.0 * (std::conj(t) * dt).real();
}

double freespace_transmittance(const Scene& scene, double laser_detuning) {
    if (scene.array.is_waveguide()) throw ValidationError("freespace_transmittance needs a free-space scene");
    return TransmissionModel(scene).transmittance(laser_detuning);
}

// Sweeps ------------------------------------------------------------------------------

void GridSpec::validate() const {
    if (count < 2) throw ValidationError("frequency grid needs at least two points");
    if (!(stop > start) || !std::isfinite(start) || !std::isfinite(stop))
        throw ValidationError("frequency grid needs start < stop");
    if (!(threshold > 0.0)) throw ValidationError("refinement threshold must be positive");
    if (max_levels < 0) throw ValidationError("refinement levels must be non-negative");
}

std::vector<double> GridSpec::uniform() const {
    validate();
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i)
        g[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
    g.back() = stop;
    return g;
}

std::pair<double, double> SpectrumRecord::max_sensitivity() const {
    double best = 0.0, where = points.empty() ? 0.0 : points.front().detuning;
    for (const auto& p : points)
        if (std::abs(p.dT) > best) {
            best = std::abs(p.dT);
            where = p.detuning;
        }
    return {best, where};
}

SpectrumRecord sweep_spectrum(const Scene& scene, const GridSpec& grid) {
    return sweep_spectrum(TransmissionModel(scene), grid);
}

SpectrumRecord sweep_spectrum(const TransmissionModel& model, const GridSpec& grid) {
    std::vector<double> xs = grid.uniform();
    SpectrumRecord rec;
    rec.waveguide = model.waveguide();
    rec.uniform_points = xs.size();
    const double step = (grid.stop - grid.start) / static_cast<double>(grid.count - 1);

    if (grid.refine) {
        // seed under-resolved modes with points across their linewidth
        const auto& modes = model.modes();
        for (Eigen::Index a = 0; a < modes.size(); ++a) {
            const double J = modes.shift(a), G = modes.decay(a);
            if (!(G < 10.0 * step)) continue;
            for (int m = -24; m <= 24; ++m) {
                const double x = J + 0.125 * m * std::max(G, 1e-12);
                if (x > grid.start && x < grid.stop) xs.push_back(x);
            }
        }
    }
    std::sort(xs.begin(), xs.end());
    const double dedupe = 1e-13 * std::max({1.0, std::abs(grid.start), std::abs(grid.stop)});
    xs.erase(std::unique(xs.begin(), xs.end(), [&](double a, double b) { return b - a <= dedupe; }), xs.end());

    auto evaluate_all = [&](const std::vector<double>& x) {
        std::vector<TransmissionModel::Point> out(x.size());
        parallel_for(x.size(), [&](std::size_t i) { out[i] = model.evaluate(x[i]); });
        return out;
    };
    rec.points = evaluate_all(xs);

    if (grid.refine) {
        for (int level = 0; level < grid.max_levels; ++level) {
            std::vector<double> mids;
            for (std::size_t i = 0; i + 1 < rec.points.size(); ++i) {
                const auto& a = rec.points[i];
                const auto& b = rec.points[i + 1];
                if (std::abs(b.T - a.T) > grid.threshold && b.detuning - a.detuning > 2.0 * dedupe)
                    mids.push_back(0.5 * (a.detuning + b.detuning));
            }
            if (mids.empty()) break;
            auto fresh = evaluate_all(mids);
            std::vector<TransmissionModel::Point> merged;
            merged.reserve(rec.points.size() + fresh.size());
            std::merge(rec.points.begin(), rec.points.end(), fresh.begin(), fresh.end(), std::back_inserter(merged),
                       [](const auto& a, const auto& b) { return a.detuning < b.detuning; });
            rec.points = std::move(merged);
            rec.refinement_levels = level + 1;
        }
    }
    rec.inserted_points = rec.points.size() - rec.uniform_points;
    return rec;
}

}  // namespace subsense
