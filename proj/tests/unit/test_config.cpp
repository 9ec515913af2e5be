#include <gtest/gtest.h>

#include <sstream>

#include "phtori/config.hpp"
#include "phtori/errors.hpp"

using namespace phtori;

TEST(Config, Defaults) {
    RunConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.family_name(), "vertical-rho0.031865");
    EXPECT_DOUBLE_EQ(c.omega(), 0.031865);
    c.family = Generator::planar;
    EXPECT_DOUBLE_EQ(c.omega(), 1 - 1 / 1.031865);
}

TEST(Config, UnknownKeyRejected) {
    RunConfig c;
    EXPECT_THROW(c.set("continuation.epsilon", "1e-7"), ConfigError);
    EXPECT_THROW(c.set("mu", "abc"), ConfigError);
    EXPECT_THROW(c.set("N", "3.5"), ConfigError);
}

TEST(Config, LoadWithComments) {
    RunConfig c;
    std::istringstream is("# run\nmu = 0.0121\n\nN=64   # grid\ncontinuation.parameter = h\nfamily = planar\n");
    load_config(c, is, "run.cfg");
    EXPECT_DOUBLE_EQ(c.mu, 0.0121);
    EXPECT_EQ(c.N, 64);
    EXPECT_EQ(c.continuation.tag, Parameter::h);
    EXPECT_EQ(c.family, Generator::planar);
}

TEST(Config, ErrorsNameTheLine) {
    RunConfig c;
    std::istringstream is("mu = 0.01\nbogus = 1\n");
    try {
        load_config(c, is, "run.cfg");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("run.cfg:2"), std::string::npos);
    }
}

TEST(Config, Validation) {
    RunConfig c;
    c.N = 48;
    EXPECT_THROW(c.validate(), ConfigError);
    c = RunConfig{};
    c.mu = 0.7;
    EXPECT_THROW(c.validate(), ConfigError);
    c = RunConfig{};
    c.set("continuation.eps1", "1e-6");
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, EveryKeyAccepted) {
    const auto keys = config_keys();
    EXPECT_FALSE(keys.empty());
    for (const auto& k : keys) {
        RunConfig c;
        std::string v = "1";
        if (k == "family") v = "vertical";
        if (k == "bundle") v = "stable";
        if (k == "continuation.parameter") v = "T";
        if (k == "output" || k == "family_dir") v = "x";
        EXPECT_NO_THROW(c.set(k, v)) << k;
    }
}
