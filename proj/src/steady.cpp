#include "subsense/steady.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "subsense/errors.hpp"
#include "subsense/modes.hpp"

namespace subsense {

namespace {

double relative_residual(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& X, const Eigen::MatrixXcd& B) {
    const double denom = A.norm() * X.norm() + B.norm();
    if (denom == 0.0) return 0.0;
    return (A * X - B).norm() / denom;
}

// Physicists' Gauss-Hermite rule by Golub-Welsch: int exp(-x^2) f(x) dx ~ sum w_i f(x_i).
struct HermiteRule {
    Eigen::VectorXd nodes, weights;
};

const HermiteRule& hermite_rule(int order) {
    thread_local std::vector<std::pair<int, HermiteRule>> cache;
    for (const auto& [n, r] : cache)
        if (n == order) return r;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) T(k, k - 1) = T(k - 1, k) = std::sqrt(0.5 * k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    HermiteRule r;
    r.nodes = es.eigenvalues();
    r.weights = std::sqrt(kPi) * es.eigenvectors().row(0).array().square().transpose();
    cache.emplace_back(order, std::move(r));
    return cache.back().second;
}

// <exp(i k sigma z)> for z ~ N(0, 1), by the same quadrature as the pair terms.
cplx averaged_site_phase(double k, double sigma, int order) {
    if (sigma == 0.0) return 1.0;
    const auto& rule = hermite_rule(order);
    cplx sum = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights(i) * std::exp(cplx(0.0, k * sigma * std::sqrt(2.0) * rule.nodes(i)));
    return sum / std::sqrt(kPi);
}

void fill_couplings(CouplingMatrices& c, Eigen::Index i, Eigen::Index j, cplx avg_phase) {
    // J - i Gamma / 2 = -(i/2) <exp(i k |x|)>
    c.J(i, j) = c.J(j, i) = 0.5 * avg_phase.imag();
    c.Gamma(i, j) = c.Gamma(j, i) = avg_phase.real();
}

AveragedInputs static_inputs(const EmitterArray& array) {
    AveragedInputs out;
    out.couplings = coupling_matrix(array);
    const auto x = array.axial();
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    double centre = 0.0;
    for (double v : x) centre += v;
    if (n > 0) centre /= static_cast<double>(n);
    const double k = array.guided_wavenumber();
    out.drive_left.resize(n);
    out.drive_right.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        out.drive_left(j) = std::exp(cplx(0.0, k * (x[static_cast<std::size_t>(j)] - centre)));
        out.drive_right(j) = std::conj(out.drive_left(j));
    }
    return out;
}

class StratifiedNormal {
public:
    StratifiedNormal(std::uint64_t seed, std::uint64_t stream, int replica)
        : rng_(make_seq(seed, stream, replica)) {}

    // Sample m of a stratified set of `count` standard normal deviates.
    double operator()(std::size_t m, std::size_t count) {
        const double u = (static_cast<double>(m) + uniform_(rng_)) / static_cast<double>(count);
        return boost::math::quantile(normal_, std::clamp(u, 1e-300, 1.0 - 1e-16));
    }

private:
    static std::mt19937_64 make_seq(std::uint64_t seed, std::uint64_t stream, int replica) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          static_cast<std::uint32_t>(replica)};
        return std::mt19937_64(seq);
    }

    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    boost::math::normal_distribution<double> normal_{};
};

// Replica mean and standard error of f(z) under stratified normal sampling.
template <class F>
std::pair<cplx, double> stratified_average(const MonteCarlo& mc, std::uint64_t stream, F&& f) {
    const int R = std::max(mc.replicas, 2);
    const std::size_t per = std::max<std::size_t>(mc.samples / static_cast<std::size_t>(R), 1);
    std::vector<cplx> means(static_cast<std::size_t>(R));
    for (int r = 0; r < R; ++r) {
        StratifiedNormal gen(mc.seed, stream, r);
        cplx sum = 0.0;
        for (std::size_t m = 0; m < per; ++m) sum += f(gen(m, per));
        means[static_cast<std::size_t>(r)] = sum / static_cast<double>(per);
    }
    cplx mean = 0.0;
    for (const auto& v : means) mean += v;
    mean /= static_cast<double>(R);
    double var = 0.0;
    for (const auto& v : means) var += std::norm(v - mean);
    var /= static_cast<double>(R - 1);
    return {mean, std::sqrt(var / R)};
}

}  // namespace

Eigen::MatrixXcd steady_system_matrix(const CouplingMatrices& couplings, std::span<const double> detunings,
                                      double laser_detuning) {
    Eigen::MatrixXcd A = system_hamiltonian(couplings, detunings);
    A.diagonal().array() -= laser_detuning;
    return A;
}

void check_excitation(double max_excitation) {
    if (max_excitation > kExcitationLimit) {
        std::ostringstream os;
        os << "predicted single-site excitation " << max_excitation << " exceeds " << kExcitationLimit
           << "; the weak-drive model does not apply, lower the drive amplitude";
        throw ValidationError(os.str());
    }
    if (max_excitation > kExcitationWarning) {
        std::ostringstream os;
        os << "predicted single-site excitation " << max_excitation << " exceeds " << kExcitationWarning
           << "; weak-drive results are approximate";
        warn(os.str());
    }
}

SteadyState solve_steady_state(const CouplingMatrices& couplings, std::span<const double> detunings,
                               const Eigen::VectorXcd& drive, double laser_detuning) {
    if (drive.size() != couplings.size()) throw ValidationError("drive vector length does not match the array");
    const Eigen::MatrixXcd A = steady_system_matrix(couplings, detunings, laser_detuning);
    SteadyState s;
    s.laser_detuning = laser_detuning;
    if (A.rows() == 0) return s;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    if (!(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon()))
        throw NumericalError("steady-state system is singular (a dark mode sits exactly on resonance); "
                             "offset the laser detuning slightly or add non-guided loss");
    s.coherences = lu.solve(drive);
    s.coherences += lu.solve(Eigen::VectorXcd(drive - A * s.coherences));
    s.residual = relative_residual(A, s.coherences, drive);
    if (!s.coherences.allFinite()) throw NumericalError("steady-state solve produced non-finite coherences");
    check_excitation(s.coherences.cwiseAbs2().maxCoeff());
    return s;
}

// ShiftedSolver ----------------------------------------------------------------------

ShiftedSolver::ShiftedSolver(Eigen::MatrixXcd H) : H_(std::move(H)) {
    if (H_.rows() != H_.cols()) throw ValidationError("shifted solver needs a square matrix");
    if (H_.rows() == 0) return;
    Eigen::HessenbergDecomposition<Eigen::MatrixXcd> hd(H_);
    hess_ = hd.matrixH();
    Q_ = hd.matrixQ();
    norm_ = H_.cwiseAbs().rowwise().sum().maxCoeff();
}

ShiftedSolver::Factor ShiftedSolver::factor(double shift) const {
    Factor f;
    f.owner_ = this;
    f.shift_ = shift;
    const Eigen::Index n = size();
    f.lu_ = hess_;
    f.lu_.diagonal().array() -= shift;
    f.swapped_.assign(static_cast<std::size_t>(n), 0);
    auto& M = f.lu_;
    const double tiny = 1e3 * std::numeric_limits<double>::epsilon() * (norm_ + std::abs(shift));
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (std::abs(M(k + 1, k)) > std::abs(M(k, k))) {
            M.row(k).tail(n - k).swap(M.row(k + 1).tail(n - k));
            f.swapped_[static_cast<std::size_t>(k)] = 1;
        }
        if (std::abs(M(k, k)) <= tiny) throw NumericalError("shifted system is singular at this detuning");
        const cplx l = M(k + 1, k) / M(k, k);
        M.row(k + 1).tail(n - k - 1) -= l * M.row(k).tail(n - k - 1);
        M(k + 1, k) = l;
    }
    if (n > 0 && std::abs(M(n - 1, n - 1)) <= tiny) throw NumericalError("shifted system is singular at this detuning");
    return f;
}

Eigen::MatrixXcd ShiftedSolver::Factor::raw_solve(const Eigen::MatrixXcd& B) const {
    const Eigen::Index n = lu_.rows();
    Eigen::MatrixXcd Y = owner_->Q_.adjoint() * B;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        if (swapped_[static_cast<std::size_t>(k)]) Y.row(k).swap(Y.row(k + 1));
        Y.row(k + 1) -= lu_(k + 1, k) * Y.row(k);
    }
    lu_.triangularView<Eigen::Upper>().solveInPlace(Y);
    return owner_->Q_ * Y;
}

Eigen::MatrixXcd ShiftedSolver::Factor::solve(const Eigen::MatrixXcd& B) const {
    if (B.rows() != lu_.rows()) throw ValidationError("right-hand side has the wrong length");
    Eigen::MatrixXcd X = raw_solve(B);
    Eigen::MatrixXcd R = B - owner_->H_ * X;
    R += shift_ * X;
    X += raw_solve(R);
    return X;
}

Eigen::VectorXcd ShiftedSolver::Factor::solve(const Eigen::VectorXcd& b) const {
    return solve(Eigen::MatrixXcd(b)).col(0);
}

// Motion -----------------------------------------------------------------------------

void MotionModel::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("position spread sigma must be >= 0");
    if (const auto* gh = std::get_if<GaussHermite>(&quadrature); gh && gh->order < 5)
        throw ValidationError("Gauss-Hermite order must be at least 5");
    if (const auto* mc = std::get_if<MonteCarlo>(&quadrature); mc && (mc->samples < 2 || mc->replicas < 2))
        throw ValidationError("Monte Carlo averaging needs at least 2 samples and 2 replicas");
}

cplx averaged_pair_phase(double separation, double k, double sigma, int order) {
    const double d = std::abs(separation);
    if (sigma == 0.0) return std::exp(cplx(0.0, k * d));
    // s = d + sigma_s z, sigma_s = sqrt(2) sigma. exp(i k |s|) = exp(i k s) + [exp(-i k s) - exp(i k s)] on s < 0.
    const double sigma_s = std::sqrt(2.0) * sigma;
    const auto& rule = hermite_rule(order);
    cplx smooth = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
        smooth += rule.weights(i) * std::exp(cplx(0.0, k * (d + sigma_s * std::sqrt(2.0) * rule.nodes(i))));
    smooth /= std::sqrt(kPi);
    const double lo = d - 12.0 * sigma_s;
    if (lo >= 0.0) return smooth;
    const auto pdf = [&](double s) {
        const double z = (s - d) / sigma_s;
        return std::exp(-0.5 * z * z) / (sigma_s * std::sqrt(kTwoPi));
    };
    const double kink = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double s) { return std::sin(k * s) * pdf(s); }, lo, 0.0, 15, 1e-14);
    return smooth + cplx(0.0, -2.0) * kink;
}

AveragedInputs motion_averaged_inputs(const EmitterArray& array, const MotionModel& motion) {
    motion.validate();
    if (!array.is_waveguide())
        throw ValidationError("motion averaging is implemented for waveguide scenes only");
    AveragedInputs out = static_inputs(array);
    if (motion.sigma == 0.0) return out;

    const auto x = array.axial();
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    const double k = array.guided_wavenumber();
    const double sigma = motion.sigma;

    if (const auto* gh = std::get_if<GaussHermite>(&motion.quadrature)) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j)
                fill_couplings(out.couplings, i, j,
                               averaged_pair_phase(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)], k,
                                                   sigma, gh->order));
        const cplx damp = averaged_site_phase(k, sigma, gh->order);
        out.drive_left *= damp;
        out.drive_right *= std::conj(damp);
        return out;
    }

    const auto& mc = std::get<MonteCarlo>(motion.quadrature);
    double se = 0.0;
    std::uint64_t stream = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = std::abs(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]);
            const auto [mean, err] = stratified_average(mc, stream++, [&](double z) {
                return std::exp(cplx(0.0, k * std::abs(d + std::sqrt(2.0) * sigma * z)));
            });
            fill_couplings(out.couplings, i, j, mean);
            se = std::max(se, err);
        }
    // site phases: one stream per emitter, so each drive entry carries its own sampling noise
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto [mean, err] =
            stratified_average(mc, stream++, [&](double z) { return std::exp(cplx(0.0, k * sigma * z)); });
        out.drive_left(j) *= mean;
        out.drive_right(j) *= std::conj(mean);
        se = std::max(se, err);
    }
    out.standard_error = se;
    return out;
}

double check_motion_quadrature(const EmitterArray& array, double sigma, int order, std::size_t samples,
                               std::uint64_t seed, double tolerance) {
    const auto gh = motion_averaged_inputs(array, MotionModel{sigma, GaussHermite{order}});
    const auto mc = motion_averaged_inputs(array, MotionModel{sigma, MonteCarlo{samples, seed, 16}});
    double diff = 0.0;
    diff = std::max(diff, (gh.couplings.J - mc.couplings.J).cwiseAbs().maxCoeff());
    diff = std::max(diff, (gh.couplings.Gamma - mc.couplings.Gamma).cwiseAbs().maxCoeff());
    if (gh.drive_left.size() > 0) diff = std::max(diff, (gh.drive_left - mc.drive_left).cwiseAbs().maxCoeff());
    if (diff > tolerance) {
        std::ostringstream os;
        os << "Gauss-Hermite and Monte Carlo motion averages differ by " << diff << " (tolerance " << tolerance << ")";
        throw NumericalError(os.str());
    }
    return diff;
}

EmitterArray remove_atoms(const EmitterArray& array, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw ValidationError("missing fraction must lie in [0, 1)");
    const std::size_t n = array.size();
    const auto remove = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (n > 0 && remove >= n) throw ValidationError("missing fraction would remove every emitter");
    if (remove == 0) return array;

    // partial Fisher-Yates over site indices; the first `remove` entries are dropped
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6d697373u};
    std::mt19937_64 rng(seq);
    for (std::size_t i = 0; i < remove; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<char> gone(n, 0);
    for (std::size_t i = 0; i < remove; ++i) gone[idx[i]] = 1;

    EmitterArray out = array;
    out.positions.clear();
    out.detunings.clear();
    for (std::size_t i = 0; i < n; ++i) {
        if (gone[i]) continue;
        out.positions.push_back(array.positions[i]);
        out.detunings.push_back(array.detunings[i]);
    }
    return out;
}

}  // namespace subsense
