#include "subsense/scene_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "subsense/errors.hpp"

namespace subsense {

namespace {

using Keys = std::set<std::string_view>;

void check_keys(const toml::table& t, std::string_view section, const Keys& allowed) {
    for (const auto& [k, v] : t)
        if (!allowed.contains(k.str()))
            throw ValidationError("scene: unknown key '" + std::string(k.str()) + "' in [" + std::string(section) + "]");
}

double number(const toml::table& t, std::string_view key, double fallback) {
    const auto* node = t.get(key);
    if (!node) return fallback;
    if (auto v = node->value<double>()) return *v;
    throw ValidationError("scene: '" + std::string(key) + "' must be a number");
}

std::int64_t integer(const toml::table& t, std::string_view key, std::int64_t fallback) {
    const auto* node = t.get(key);
    if (!node) return fallback;
    if (auto v = node->value<std::int64_t>()) return *v;
    throw ValidationError("scene: '" + std::string(key) + "' must be an integer");
}

std::size_t count(const toml::table& t, std::string_view key, std::size_t fallback) {
    const auto v = integer(t, key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw ValidationError("scene: '" + std::string(key) + "' must be non-negative");
    return static_cast<std::size_t>(v);
}

std::string text(const toml::table& t, std::string_view key, std::string_view fallback) {
    const auto* node = t.get(key);
    if (!node) return std::string(fallback);
    if (auto v = node->value<std::string>()) return *v;
    throw ValidationError("scene: '" + std::string(key) + "' must be a string");
}

std::string text_or_empty(const toml::table& t, std::string_view key) {
    const auto* node = t.get(key);
    if (!node) return {};
    return node->value<std::string>().value_or("");
}

std::vector<double> numbers(const toml::node& node, std::string_view key) {
    const auto* arr = node.as_array();
    if (!arr) throw ValidationError("scene: '" + std::string(key) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : *arr) {
        auto v = e.value<double>();
        if (!v) throw ValidationError("scene: '" + std::string(key) + "' must contain only numbers");
        out.push_back(*v);
    }
    return out;
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const toml::table& t, std::string_view key, Eigen::Matrix<double, N, 1> fallback) {
    const auto* node = t.get(key);
    if (!node) return fallback;
    const auto v = numbers(*node, key);
    if (v.size() != N) throw ValidationError("scene: '" + std::string(key) + "' needs " + std::to_string(N) + " entries");
    return Eigen::Map<const Eigen::Matrix<double, N, 1>>(v.data());
}

Eigen::Vector3cd complex_vec(const toml::node& node) {
    const auto* arr = node.as_array();
    if (!arr || arr->size() != 3) throw ValidationError("scene: 'dipole' needs three components");
    Eigen::Vector3cd d;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& e = *arr->get(i);
        if (auto v = e.value<double>()) {
            d(static_cast<Eigen::Index>(i)) = *v;
        } else {
            const auto pair = numbers(e, "dipole");
            if (pair.size() != 2) throw ValidationError("scene: complex dipole components are [re, im]");
            d(static_cast<Eigen::Index>(i)) = cplx(pair[0], pair[1]);
        }
    }
    return d;
}

const toml::table* section(const toml::table& root, std::string_view name) {
    const auto* node = root.get(name);
    if (!node) return nullptr;
    const auto* t = node->as_table();
    if (!t) throw ValidationError("scene: [" + std::string(name) + "] must be a table");
    return t;
}

void read_array(const toml::table& t, ArrayConfig& a) {
    check_keys(t, "array", {"environment", "geometry", "count", "nx", "ny", "spacing", "positions", "dipole", "kp"});
    const auto env = text(t, "environment", "waveguide");
    if (env == "waveguide")
        a.environment = Environment::Waveguide1D;
    else if (env == "free_space")
        a.environment = Environment::FreeSpace;
    else
        throw ValidationError("scene: unknown environment '" + env + "'");

    const auto geo = text(t, "geometry", "chain");
    if (geo == "chain")
        a.geometry = Geometry::Chain;
    else if (geo == "square")
        a.geometry = Geometry::Square;
    else if (geo == "explicit")
        a.geometry = Geometry::Explicit;
    else
        throw ValidationError("scene: unknown geometry '" + geo + "'");

    a.count = count(t, "count", 0);
    a.nx = count(t, "nx", 0);
    a.ny = count(t, "ny", a.nx);
    a.spacing = number(t, "spacing", 0.0);
    a.kp = number(t, "kp", 1.0);
    if (const auto* node = t.get("positions")) {
        const auto* arr = node->as_array();
        if (!arr) throw ValidationError("scene: 'positions' must be an array");
        for (const auto& e : *arr) {
            const auto p = numbers(e, "positions");
            if (p.size() == 1)
                a.positions.emplace_back(p[0], 0.0, 0.0);
            else if (p.size() == 3)
                a.positions.emplace_back(p[0], p[1], p[2]);
            else
                throw ValidationError("scene: positions are [x] or [x, y, z]");
        }
    }
    if (const auto* node = t.get("dipole")) a.dipole = complex_vec(*node);
}

DetuningProfile read_detuning(const toml::table& t, SceneSpec& s) {
    check_keys(t, "detuning",
               {"kind", "value", "delta0", "amplitude", "spatial_frequency", "slope", "k", "values", "offset"});
    DetuningProfile p;
    p.offset = number(t, "offset", 0.0);
    const auto kind = text(t, "kind", "none");
    if (kind == "none")
        p.kind = DetuningProfile::None{};
    else if (kind == "uniform")
        p.kind = DetuningProfile::Uniform{number(t, "value", 0.0)};
    else if (kind == "antisymmetric")
        p.kind = DetuningProfile::Antisymmetric{number(t, "delta0", 0.0)};
    else if (kind == "sinusoidal") {
        s.chain_period = text_or_empty(t, "spatial_frequency") == "chain";
        p.kind = DetuningProfile::Sinusoidal1D{number(t, "amplitude", 0.0),
                                               s.chain_period ? 0.0 : number(t, "spatial_frequency", 0.0)};
    }
    else if (kind == "linear")
        p.kind = DetuningProfile::Linear1D{number(t, "slope", 0.0)};
    else if (kind == "plane_wave") {
        s.corner_k = text_or_empty(t, "k") == "corner";
        p.kind = DetuningProfile::PlaneWave2D{number(t, "delta0", 0.0),
                                              s.corner_k ? Eigen::Vector2d::Zero() : vec<2>(t, "k", Eigen::Vector2d::Zero())};
    }
    else if (kind == "per_site") {
        const auto* node = t.get("values");
        if (!node) throw ValidationError("scene: per_site detuning needs 'values'");
        p.kind = DetuningProfile::PerSite{numbers(*node, "values")};
    } else
        throw ValidationError("scene: unknown detuning kind '" + kind + "'");
    return p;
}

void read_drive(const toml::table& t, SceneSpec& s) {
    check_keys(t, "drive", {"kind", "from", "waist", "focus", "axis", "amplitude", "laser_detuning"});
    const auto kind = text(t, "kind", s.config.array.environment == Environment::FreeSpace ? "gaussian" : "guided");
    s.drive.amplitude = number(t, "amplitude", s.drive.amplitude);
    s.drive.laser_detuning = number(t, "laser_detuning", 0.0);
    if (kind == "guided") {
        const auto from = text(t, "from", "left");
        if (from != "left" && from != "right") throw ValidationError("scene: drive 'from' is left or right");
        s.drive.kind = GuidedPlaneWave{from == "left" ? Side::Left : Side::Right};
    } else if (kind == "gaussian") {
        GaussianBeam g;
        s.derived_waist = !t.contains("waist");
        g.waist = number(t, "waist", 0.0);
        g.focus = vec<3>(t, "focus", g.focus);
        g.axis = vec<3>(t, "axis", g.axis);
        s.drive.kind = g;
    } else
        throw ValidationError("scene: unknown drive kind '" + kind + "'");
}

void read_imperfections(const toml::table& t, SceneSpec& s) {
    check_keys(t, "imperfections",
               {"gamma_prime", "sigma", "motion", "order", "samples", "seed", "replicas", "missing_fraction"});
    s.config.array.gamma_prime = number(t, "gamma_prime", 0.0);
    s.motion.sigma = number(t, "sigma", 0.0);
    const auto method = text(t, "motion", "gauss_hermite");
    if (method == "gauss_hermite") {
        s.motion.quadrature = GaussHermite{static_cast<int>(integer(t, "order", 40))};
    } else if (method == "monte_carlo") {
        if (!t.contains("seed")) throw ValidationError("scene: Monte Carlo motion averaging needs an explicit seed");
        MonteCarlo mc;
        mc.samples = count(t, "samples", mc.samples);
        mc.seed = static_cast<std::uint64_t>(integer(t, "seed", 0));
        mc.replicas = static_cast<int>(integer(t, "replicas", mc.replicas));
        s.motion.quadrature = mc;
    } else
        throw ValidationError("scene: unknown motion method '" + method + "'");
    s.missing_fraction = number(t, "missing_fraction", 0.0);
    if (!(s.missing_fraction >= 0.0 && s.missing_fraction < 1.0))
        throw ValidationError("scene: missing_fraction must lie in [0, 1)");
}

void read_detection(const toml::table& t, SceneSpec& s) {
    check_keys(t, "detection", {"kind", "distance", "radius", "count"});
    const auto kind = text(t, "kind", "disk");
    if (kind == "on_axis") {
        s.detection.kind = DetectionLayout::SinglePointOnAxis{number(t, "distance", 1.1)};
    } else if (kind == "disk") {
        DetectionLayout::DiskSampling d;
        d.distance = number(t, "distance", d.distance);
        d.radius = number(t, "radius", d.radius);
        d.count = static_cast<int>(integer(t, "count", d.count));
        if (d.count < 1) throw ValidationError("scene: detection count must be positive");
        s.detection.kind = d;
    } else
        throw ValidationError("scene: unknown detection kind '" + kind + "'");
}

}  // namespace

SceneSpec parse_scene(std::string_view source, std::string_view origin) {
    toml::table root;
    try {
        root = toml::parse(source, origin);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "scene: " << e.description() << " (" << origin << ':' << e.source().begin.line << ')';
        throw ValidationError(os.str());
    }
    check_keys(root, "top level", {"units", "array", "drive", "detuning", "imperfections", "detection"});

    SceneSpec s;
    s.source = std::string(source);
    const auto* array = section(root, "array");
    if (!array) throw ValidationError("scene: missing [array] section");
    read_array(*array, s.config.array);
    if (const auto* t = section(root, "units")) {
        check_keys(*t, "units", {"rate_unit", "length_unit"});
        s.units = Units::make(number(*t, "rate_unit", 0.0), number(*t, "length_unit", 0.0));
    }
    if (const auto* t = section(root, "detuning")) s.config.detuning = read_detuning(*t, s);
    if (const auto* t = section(root, "imperfections")) read_imperfections(*t, s);
    if (const auto* t = section(root, "drive"))
        read_drive(*t, s);
    else
        read_drive(toml::table{}, s);
    if (const auto* t = section(root, "detection")) read_detection(*t, s);

    instantiate(s, s.missing_fraction > 0.0 ? std::optional<std::uint64_t>(0) : std::nullopt);  // validate early
    return s;
}

SceneSpec load_scene(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read scene file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scene(buf.str(), path.string());
}

Scene instantiate(const SceneSpec& spec, std::optional<std::uint64_t> missing_seed) {
    ArrayScene config = spec.config;
    const double a = config.array.spacing;
    if (spec.corner_k || spec.chain_period) {
        if (!(a > 0.0)) throw ValidationError("scene: spacing-relative detuning needs a positive spacing");
        if (auto* pw = std::get_if<DetuningProfile::PlaneWave2D>(&config.detuning.kind); pw && spec.corner_k)
            pw->k = Eigen::Vector2d::Constant(kPi / a);
        if (auto* sn = std::get_if<DetuningProfile::Sinusoidal1D>(&config.detuning.kind); sn && spec.chain_period) {
            const std::size_t n = config.array.geometry == Geometry::Square ? config.array.nx : config.array.count;
            sn->spatial_frequency = kPi / (static_cast<double>(n) * a);
        }
    }
    Scene scene;
    scene.array = build_array(config);
    scene.drive = spec.drive;
    scene.motion = spec.motion;
    scene.detection = spec.detection;
    if (auto* g = std::get_if<GaussianBeam>(&scene.drive.kind); g && spec.derived_waist) {
        const auto& a = spec.config.array;
        if (!(a.spacing > 0.0)) throw ValidationError("scene: set drive.waist explicitly when the array has no spacing");
        g->waist = default_beam_waist(scene.array.size(), a.spacing);
    }
    if (spec.missing_fraction > 0.0) {
        if (!missing_seed) throw ValidationError("scene: missing atoms need a seed");
        scene.array = remove_atoms(scene.array, spec.missing_fraction, *missing_seed);
    }
    scene.validate();
    return scene;
}

std::string scene_hash(const SceneSpec& spec) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : spec.source) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace subsense
