#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "dshell/clifford.hpp"
#include "dshell/interaction.hpp"

namespace testing_support {

inline std::mt19937_64& rng() {
    static std::mt19937_64 r(12345);
    return r;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }
inline double gauss() { return std::normal_distribution<double>()(rng()); }

inline dshell::Vec3 random_unit() {
    dshell::Vec3 v(gauss(), gauss(), gauss());
    return v / v.norm();
}

// Random right-handed frame with the given normal.
inline dshell::Frame random_frame(const dshell::Vec3& nu) {
    dshell::Frame f = dshell::Frame::from_normal(nu);
    double a = uniform(0.0, 6.283185307179586);
    dshell::Vec3 t1 = std::cos(a) * f.t1 + std::sin(a) * f.t2;
    return {t1, f.nu.cross(t1), f.nu};
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("dshell_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

// Runs the command-line tool; stdout and stderr go to `log`.
inline int run_cli(const std::string& args, const std::filesystem::path& log, const std::string& env = "") {
    std::string cmd = env + (env.empty() ? "" : " ") + std::string(DSHELL_CLI) + " " + args + " >" + log.string() + " 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

inline std::string source_path(const std::string& rel) { return std::string(DSHELL_SOURCE_DIR) + "/" + rel; }

} // namespace testing_support
