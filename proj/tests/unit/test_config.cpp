#include <gtest/gtest.h>

#include "fracwave/config.hpp"
#include "fracwave/error.hpp"

using namespace fracwave;

TEST(Config, DefaultsWhenEmpty) {
    const ExperimentConfig cfg = parse_config("");
    EXPECT_EQ(cfg.damping, "cwch");
    EXPECT_EQ(cfg.n_modes, 32);
    EXPECT_EQ(cfg.n_basis, 40);
    EXPECT_EQ(cfg.seed, 1u);
    EXPECT_NO_THROW(validate(cfg));
}

TEST(Config, ParsesSectionsListsAndFlags) {
    const ExperimentConfig cfg = parse_config(R"(
# comment line
[model]
damping = "fz"
b1 = 0.3
b2 = 0.05
alpha1 = 0.7
alpha2 = 0.4
allow_unphysical = true

[discretization]
n_modes = 12
bc = "dd"

[reconstruction]
noise_levels = [0.001, 0.005, 0.01]
seed = 18446744073709551615

[sweep]
c = [1, 5]
)");
    EXPECT_EQ(cfg.damping, "fz");
    EXPECT_DOUBLE_EQ(cfg.b1, 0.3);
    EXPECT_DOUBLE_EQ(cfg.alpha2, 0.4);
    EXPECT_TRUE(cfg.allow_unphysical);
    EXPECT_EQ(cfg.n_modes, 12);
    EXPECT_EQ(bc_of(cfg), BoundaryConfig::DirichletDirichlet);
    ASSERT_EQ(cfg.noise_levels.size(), 3u);
    EXPECT_DOUBLE_EQ(cfg.noise_levels[2], 0.01);
    EXPECT_EQ(cfg.seed, 18446744073709551615ULL);
    ASSERT_EQ(cfg.sweep_c.size(), 2u);
    EXPECT_TRUE(is_fz(model_of(cfg)));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(parse_config("[model]\nalhpa = 0.5\n"), SpecificationError);
    EXPECT_THROW(parse_config("[model]\nalpha = half\n"), SpecificationError);
    EXPECT_THROW(parse_config("[discretization]\nn_modes = 3.5\n"), SpecificationError);
    EXPECT_THROW(parse_config("[model]\nallow_unphysical = maybe\n"), SpecificationError);
    EXPECT_THROW(load_config("/nonexistent/fracwave.toml"), SpecificationError);
}

TEST(Config, ValidationNamesTheViolatedInvariant) {
    auto message = [](const std::string& text) {
        try {
            validate(parse_config(text));
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message("[model]\nalpha = 1.5\n").find("(0, 1]"), std::string::npos);
    EXPECT_NE(message("[discretization]\nn_x = 100\n").find("n_x"), std::string::npos);
    EXPECT_NE(message("[observation]\nx0 = 1.2\n").find("x0"), std::string::npos);
    EXPECT_NE(message("[reconstruction]\ntau = 1.0\n").find("tau"), std::string::npos);
    EXPECT_NE(message("[reconstruction]\ntruth = \"wave\"\n").find("profile"), std::string::npos);
    EXPECT_NE(message("[model]\ndamping = \"kelvin\"\n").find("damping"), std::string::npos);
    EXPECT_NE(message("[model]\ndamping = \"fz\"\nalpha1 = 0.3\nalpha2 = 0.6\n").find("alpha1 >= alpha2"),
              std::string::npos);
    EXPECT_NE(message("[inversion]\nn_modes_fit = 40\n").find("n_modes_fit"), std::string::npos);
}

TEST(Config, HashIsStableAndSensitive) {
    const ExperimentConfig a = parse_config("[model]\nalpha = 0.5\n");
    const ExperimentConfig b = parse_config("[model]\nalpha = 5e-1\n");
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(canonical(a), canonical(b));

    ExperimentConfig c = a;
    c.alpha = std::nextafter(0.5, 1.0);
    EXPECT_NE(config_hash(a), config_hash(c));
    ExperimentConfig d = a;
    d.seed = 2;
    EXPECT_NE(config_hash(a), config_hash(d));

    ExperimentConfig e = a;
    e.out_dir = "elsewhere";
    EXPECT_EQ(config_hash(a), config_hash(e));
    EXPECT_EQ(hash_hex(config_hash(a)).size(), 16u);
}

TEST(Config, FnvMatchesReferenceVectors) {
    // 64-bit FNV-1a of the empty string is the offset basis.
    EXPECT_EQ(hash_hex(0xcbf29ce484222325ULL), "cbf29ce484222325");
    const std::string text = canonical(parse_config(""));
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) h = (h ^ ch) * 0x100000001b3ULL;
    EXPECT_EQ(h, config_hash(parse_config("")));
}

TEST(Config, CanonicalFormRoundTrips) {
    ExperimentConfig cfg;
    cfg.alpha = 0.1 + 0.2;
    cfg.noise_levels = {1.0 / 3.0, 0.0};
    cfg.damping = "cwch";
    std::string text;
    std::string section;
    for (std::size_t start = 0; start < canonical(cfg).size();) {
        const std::string all = canonical(cfg);
        const std::size_t end = all.find('\n', start);
        const std::string line = all.substr(start, end - start);
        start = end + 1;
        const std::size_t dot = line.find('.');
        const std::string sec = line.substr(0, dot);
        if (sec != section) {
            text += "[" + sec + "]\n";
            section = sec;
        }
        text += line.substr(dot + 1) + "\n";
    }
    const ExperimentConfig back = parse_config(text);
    EXPECT_EQ(back.alpha, cfg.alpha);
    EXPECT_EQ(back.noise_levels, cfg.noise_levels);
    EXPECT_EQ(canonical(back), canonical(cfg));
}

TEST(Config, CoefficientProfiles) {
    const SpectralBasis basis = build_basis(BoundaryConfig::DirichletNeumann, 4, 40);
    const GridFunction ramp = kappa_profile("ramp", 0.2, basis);
    const GridFunction quad = kappa_profile("quadratic", 0.1, basis);
    const GridFunction tent = kappa_profile("tent", 0.2, basis);
    for (int i = 0; i < basis.n_nodes(); ++i) {
        const double x = basis.grid()[i];
        EXPECT_NEAR(ramp[i], x <= 0.5 ? 0.0 : 0.2 * (2 * x - 1), 1e-15);
        EXPECT_NEAR(quad[i], 0.1 * x * (1 - x), 1e-15);
        EXPECT_GE(tent[i], 0.05 - 1e-15);
    }
    EXPECT_NEAR(tent[24], 0.2, 1e-15);
    EXPECT_DOUBLE_EQ(kappa_profile("constant", 0.3, basis)[7], 0.3);
    EXPECT_EQ(kappa_profile("zero", 1.0, basis).norm(), 0.0);
    EXPECT_THROW(kappa_profile("wave", 1.0, basis), SpecificationError);
}

TEST(Config, NewtonOptionsFollowConfig) {
    const ExperimentConfig cfg =
        parse_config("[reconstruction]\ngamma0 = 0.5\ngamma_decay = 0.9\ntau = 2.5\nmax_iter = 7\n");
    const NewtonOptions o = newton_options_of(cfg);
    EXPECT_DOUBLE_EQ(o.gamma0, 0.5);
    EXPECT_DOUBLE_EQ(o.gamma_decay, 0.9);
    EXPECT_DOUBLE_EQ(o.tau, 2.5);
    EXPECT_EQ(o.max_iter, 7);
}
