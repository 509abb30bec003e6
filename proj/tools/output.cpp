#include "output.hpp"

#include <chrono>
#include <ctime>
#include <sstream>

#include "subsense/errors.hpp"

#ifndef SUBSENSE_VERSION
#define SUBSENSE_VERSION "dev"
#endif

namespace subsense::cli {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Run::Run(std::string command, std::filesystem::path out_dir) : command_(std::move(command)), out_dir_(std::move(out_dir)) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir_, ec);
    if (ec) throw ValidationError("cannot create output directory '" + out_dir_.string() + "': " + ec.message());
    manifest_["command"] = command_;
    manifest_["tool_version"] = SUBSENSE_VERSION;
    manifest_["parameters"] = nlohmann::json::object();
    manifest_["results"] = nlohmann::json::object();
    manifest_["seeds"] = nlohmann::json::object();
    manifest_["target_figure"] = nullptr;
    manifest_["scene"] = nullptr;
    manifest_["scene_hash"] = nullptr;
}

void Run::set_scene(const std::string& path, const std::string& hash) {
    manifest_["scene"] = path;
    manifest_["scene_hash"] = hash;
}

void Run::set_figure(const std::string& figure) {
    if (!figure.empty()) manifest_["target_figure"] = figure;
}

void Run::add_seed(const std::string& what, std::uint64_t seed) { manifest_["seeds"][what] = seed; }

std::string Run::header_block() const {
    // no timestamp here: CSV bytes must be reproducible from the manifest
    std::ostringstream os;
    os << "# command: " << command_ << '\n';
    os << "# tool_version: " << SUBSENSE_VERSION << '\n';
    if (!manifest_["scene_hash"].is_null()) os << "# scene_hash: " << manifest_["scene_hash"].get<std::string>() << '\n';
    if (!manifest_["target_figure"].is_null())
        os << "# target_figure: " << manifest_["target_figure"].get<std::string>() << '\n';
    os << "# parameters: " << manifest_["parameters"].dump() << '\n';
    if (!manifest_["seeds"].empty()) os << "# seeds: " << manifest_["seeds"].dump() << '\n';
    os << "# manifest: " << command_ << ".manifest.json\n";
    return os.str();
}

void Run::finish() {
    nlohmann::json out = manifest_;
    out["outputs"] = files_;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    out["timestamp"] = stamp;
    const auto path = out_dir_ / (command_ + ".manifest.json");
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot write " + path.string());
    f << out.dump(2) << '\n';
}

CsvFile::CsvFile(Run& run, const std::string& name, const std::string& header) {
    const auto path = run.out_dir_ / name;
    out_.open(path);
    if (!out_) throw ValidationError("cannot write " + path.string());
    run.files_.push_back(name);
    out_ << run.header_block() << header << '\n';
}

void CsvFile::row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

void CsvFile::row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt(values[i]);
    out_ << '\n';
}

void CsvFile::raw(const std::string& line) { out_ << line << '\n'; }

}  // namespace subsense::cli
