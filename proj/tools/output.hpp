#pragma once

// CSV files with a '#' manifest header, plus a JSON manifest per run.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

namespace subsense::cli {

class Run;

class CsvFile {
public:
    CsvFile(Run& run, const std::string& name, const std::string& header);
    void row(std::initializer_list<double> values);
    void row(const std::vector<double>& values);
    /// Mixed rows (e.g. labels); cells are written verbatim.
    void raw(const std::string& line);

private:
    std::ofstream out_;
};

class Run {
public:
    Run(std::string command, std::filesystem::path out_dir);

    nlohmann::json& params() { return manifest_["parameters"]; }
    nlohmann::json& results() { return manifest_["results"]; }
    void set_scene(const std::string& path, const std::string& hash);
    void set_figure(const std::string& figure);
    void add_seed(const std::string& what, std::uint64_t seed);

    /// Writes <command>.manifest.json listing every file opened through this run.
    void finish();

    const std::filesystem::path& out_dir() const { return out_dir_; }

private:
    friend class CsvFile;
    std::string header_block() const;

    std::string command_;
    std::filesystem::path out_dir_;
    nlohmann::json manifest_;
    std::vector<std::string> files_;
};

std::string fmt(double v);

}  // namespace subsense::cli
