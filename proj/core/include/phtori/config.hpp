#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "phtori/continuation.hpp"
#include "phtori/seeds.hpp"

namespace phtori {

// Environment variable naming the default configuration file.
inline constexpr const char* kConfigEnv = "PHTORI_CONFIG";

struct RunConfig {
    double mu = 1.215058560962404e-2;
    Generator family = Generator::vertical;
    double rho = 0.031865;
    double amplitude = 1e-3;
    int m = 4;
    int N = 32;
    BundleKind bundle = BundleKind::stable;
    int workers = 0;
    std::string output = "torus.rec";
    std::string family_dir = "family";
    int surface_n1 = 128;
    int surface_n2 = 128;
    ContinuationConfig continuation;
    PoConfig po;

    // Rotation number of the generator: rho for the vertical family, 1 - 1/(1 + rho) for the planar one.
    double omega() const;
    RtbpParams model_params() const;
    IntegratorConfig integrator() const;
    RefineConfig refine() const;
    SeedConfig seed() const;
    // Family name stored in records: "<family>-rho<rho>".
    std::string family_name() const;

    // Sets one key; throws ConfigError for unknown keys or unparsable values.
    void set(const std::string& key, const std::string& value);
    void validate() const;
};

// Every key accepted by RunConfig::set, sorted.
std::vector<std::string> config_keys();

// key = value lines; '#' starts a comment.
void load_config(RunConfig& cfg, std::istream& is, const std::string& source = "<stream>");
void load_config(RunConfig& cfg, const std::filesystem::path& path);

}  // namespace phtori
