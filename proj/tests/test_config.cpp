#include <gtest/gtest.h>

#include "dshell/config.hpp"
#include "support.hpp"

using namespace dshell;
using namespace testing_support;

namespace {

const char* minimal = R"(schema_version = 1
mass = 1.5
[surface]
kind = "plane"
[interaction]
form = "electrostatic_lorentz"
eta = 1.0
tau = { base = 0.5, amplitude = 0.25, rate = 2.0 }
[potential]
kind = "radial_so"
amplitude = 0.5
)";

ErrorKind kind_of(const std::string& text) {
    try {
        parse_config(text, ".");
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Domain;
}

} // namespace

TEST(Config, ParsesMinimal) {
    auto c = parse_config(minimal, ".");
    EXPECT_EQ(c.mass, 1.5);
    EXPECT_EQ(c.surface.kind(), "plane");
    EXPECT_EQ(c.gamma_form, "electrostatic_lorentz");
    auto lim = std::get<ElectrostaticLorentz>(c.gamma.limit(Vec3::UnitX()).variant());
    EXPECT_EQ(lim.eta, 1.0);
    EXPECT_EQ(lim.tau, 0.5);
    EXPECT_EQ(c.solver.n_xi, 64u);
    EXPECT_EQ(c.oracle.cases.size(), default_battery().size());
}

TEST(Config, ErrorsAreConfigErrors) {
    EXPECT_EQ(kind_of("mass = 1"), ErrorKind::Config);                                  // no schema version
    EXPECT_EQ(kind_of("schema_version = 2"), ErrorKind::Config);                        // unsupported
    EXPECT_EQ(kind_of("schema_version = 1\nbogus = 3"), ErrorKind::Config);             // unknown key
    EXPECT_EQ(kind_of("schema_version = 1\nmass = \"one\""), ErrorKind::Config);        // wrong type
    EXPECT_EQ(kind_of("schema_version = 1\nmass = "), ErrorKind::Config);               // TOML syntax
    EXPECT_EQ(kind_of("schema_version = 1\n[surface]\nkind = \"torus\""), ErrorKind::Config);
    EXPECT_EQ(kind_of("schema_version = 1\n[surface]\nkind = \"sphere\"\nradius = -1"), ErrorKind::Config);
    EXPECT_EQ(kind_of("schema_version = 1\n[interaction]\nform = \"diagonal_pair\"\ngamma = 1"), ErrorKind::Config);
    EXPECT_EQ(kind_of("schema_version = 1\n[solver]\nls_threshold = -1"), ErrorKind::Config);
    EXPECT_EQ(kind_of("schema_version = 1\n[solver]\nn_xi = 2"), ErrorKind::Config);
    EXPECT_EQ(kind_of("schema_version = 1\n[potential]\nkind = \"directional_so\"\ndirections = [[0,0,1]]\nvalues = []"),
              ErrorKind::Config);
    EXPECT_EQ(kind_of("schema_version = 1\n[oracle]\ncases = [{ id = \"x\", form = \"free\", p1 = 0, p2 = 0, xi = 0, m = 1 }]"),
              ErrorKind::Config);
}

TEST(Config, HashIgnoresFormattingAndComments) {
    std::string a = minimal;
    std::string b = std::string("# a comment\n") + minimal + "\n\n";
    auto ca = parse_config(a, "."), cb = parse_config(b, ".");
    EXPECT_EQ(fnv1a64(ca.canonical), fnv1a64(cb.canonical));
    std::string c = a;
    c.replace(c.find("mass = 1.5"), 10, "mass = 1.25");
    EXPECT_NE(fnv1a64(parse_config(c, ".").canonical), fnv1a64(ca.canonical));
}

TEST(Config, Fnv1aKnownValues) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
    EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(Config, ExampleConfigsLoad) {
    for (const char* f : {"compact_radial_so", "cone_vanishing_gamma", "plane_constant_el", "plane_critical_el",
                          "cone_critical_pair", "oracle"}) {
        EXPECT_NO_THROW(load_config(source_path(std::string("configs/") + f + ".toml"))) << f;
    }
    try {
        load_config("/nonexistent/file.toml");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
}

TEST(Config, OracleCases) {
    auto c = parse_config(R"(schema_version = 1
[oracle]
reference = "ref.json"
half_length = 12.5
n_scale = 2
cases = [{ id = "a", form = "diagonal_pair", p1 = 0.5, p2 = -0.3, xi = 0.5, m = 1.0 },
         { id = "b", form = "electrostatic_lorentz", p1 = 1.0, p2 = 0.0, xi = 0.0, m = 1.0, phi = 0.2 }]
)",
                          "/tmp");
    ASSERT_EQ(c.oracle.cases.size(), 2u);
    EXPECT_EQ(c.oracle.cases[1].phi, 0.2);
    EXPECT_EQ(*c.oracle.half_length, 12.5);
    EXPECT_EQ(c.oracle.n_scale, 2);
    EXPECT_EQ(c.base_dir, std::filesystem::path("/tmp"));
}
