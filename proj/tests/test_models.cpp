#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "sqstat/ensemble.hpp"
#include "sqstat/models.hpp"

using namespace sqstat;

TEST(TwoLevelModel, Rows)
{
    const auto s = two_level(1.0);
    ASSERT_EQ(s.rows.size(), 2u);
    EXPECT_EQ(s.rows[0].x[0], 0.0);
    EXPECT_EQ(s.rows[1].x[0], 1.0);
    EXPECT_EQ(s.rows[0].ln_g, 0.0);
    EXPECT_EQ(s.rows[1].ln_g, 0.0);
    EXPECT_THROW(two_level(0.0), model_error);
}

TEST(SpinHalf, SmallBinomials)
{
    const auto s2 = spin_half_paramagnet(2);
    ASSERT_EQ(s2.rows.size(), 3u);
    EXPECT_EQ(s2.rows[0].ln_g, 0.0);
    EXPECT_NEAR(s2.rows[1].ln_g, std::log(2.0), 1e-15);
    EXPECT_EQ(s2.rows[2].ln_g, 0.0);
    EXPECT_EQ(s2.rows[0].x[0], -2.0);
    EXPECT_EQ(s2.rows[2].x[0], 2.0);
    const auto s4 = spin_half_paramagnet(4);
    EXPECT_NEAR(s4.rows[2].ln_g, std::log(6.0), 1e-15);
    EXPECT_EQ(*s4.rows[2].count, 6.0);
}

TEST(SpinHalf, TotalIsPowerOfTwo)
{
    EXPECT_NEAR(spin_half_paramagnet(1000).ln_total(), 1000.0 * std::log(2.0), 1e-10);
}

TEST(SpinHalf, ExactCountsOnlyWhileRepresentable)
{
    const auto s = spin_half_paramagnet(100);
    EXPECT_TRUE(s.rows[0].count.has_value());
    EXPECT_FALSE(s.rows[50].count.has_value());
    EXPECT_THROW(spin_half_paramagnet(0), model_error);
    EXPECT_THROW(spin_half_paramagnet(2.5), model_error);
}

TEST(EinsteinSolidModel, StarsAndBars)
{
    EXPECT_EQ(*einstein_solid(2, 10).rows[3].count, 4.0);
    EXPECT_EQ(*einstein_solid(3, 10).rows[0].count, 1.0);
    // Σ_{m ≤ M} C(m+N-1, m) = C(M+N, M)
    EXPECT_NEAR(einstein_solid(50, 300).ln_total(), log_binomial(350, 300), 1e-10);
    EXPECT_THROW(einstein_solid(1, -1), model_error);
}

TEST(LatticeGasModel, Rows)
{
    const auto s = lattice_gas(2, 2);
    ASSERT_EQ(s.rows.size(), 3u);
    EXPECT_EQ(*s.rows[0].count, 1.0);
    EXPECT_EQ(*s.rows[1].count, 2.0);
    EXPECT_EQ(*s.rows[2].count, 1.0);
    for (const auto& r : s.rows) EXPECT_EQ(r.x[0], 0.0);
    EXPECT_NEAR(lattice_gas(2000, 2000).ln_total(), 2000.0 * std::log(2.0), 1e-10);
    EXPECT_THROW(lattice_gas(3, 4), model_error);
}

TEST(LatticeGasModel, SymmetricFillingAtZeroNu)
{
    const auto s = lattice_gas(100, 100);
    const EnsembleSpec env{{{"E", 1.0}, {"N", 0.0}}, {}};
    const auto fam = SqueezeFamily::identity();
    const double mean = observed_mean(s, env, fam, s.column("N"));
    EXPECT_NEAR(mean, 50.0, 1e-10);
    // binomial variance sites·p(1-p), p from the engine distribution
    std::vector<double> sq;
    for (const auto& r : s.rows) sq.push_back((r.x[1] - mean) * (r.x[1] - mean));
    const double p = mean / 100.0;
    EXPECT_NEAR(observed_mean(s, env, fam, sq), 100.0 * p * (1.0 - p), 1e-9);
}

TEST(Descriptor, DefaultsAndValidation)
{
    const auto d = describe_model("lattice_gas", {{"sites", 10}});
    EXPECT_EQ(d.parameters.at("N_max"), 10.0);
    EXPECT_EQ(d.parameters.at("epsilon"), 0.0);
    EXPECT_EQ(d.variables, (std::vector<std::string>{"E", "N"}));
    EXPECT_EQ(describe_model("two_level", {}).parameters.at("epsilon"), 1.0);
    EXPECT_THROW(describe_model("ising", {}), model_error);
    EXPECT_THROW(describe_model("two_level", {{"N", 3}}), model_error);
    EXPECT_THROW(describe_model("einstein_solid", {{"N", 3}}), model_error);
}

TEST(Descriptor, SizeParameterAndResize)
{
    const auto d = describe_model("lattice_gas", {{"sites", 10}});
    EXPECT_EQ(*size_parameter(d), "sites");
    const auto r = resized(d, 20);
    EXPECT_EQ(r.parameters.at("sites"), 20.0);
    EXPECT_EQ(r.parameters.at("N_max"), 20.0);
    const auto t = resized(describe_model("lattice_gas", {{"sites", 10}, {"N_max", 5}}), 20);
    EXPECT_EQ(t.parameters.at("N_max"), 5.0);
    EXPECT_FALSE(size_parameter(describe_model("two_level", {})).has_value());
    EXPECT_THROW(resized(describe_model("two_level", {}), 3), model_error);
}

TEST(Descriptor, EveryModelBuilds)
{
    const std::map<std::string, std::map<std::string, double>> params{
        {"two_level", {}}, {"spin_half_paramagnet", {{"N", 5}}}, {"einstein_solid", {{"N", 3}, {"E_max", 5}}},
        {"lattice_gas", {{"sites", 4}}}};
    for (const auto& name : model_names()) {
        const auto d = describe_model(name, params.at(name));
        const auto s = build_spectrum(d);
        EXPECT_NO_THROW(s.validate());
        EXPECT_EQ(s.variable_names, d.variables);
    }
}

TEST(SpectrumOps, IsolatedAndRestrict)
{
    const auto s = spin_half_paramagnet(10);
    const auto iso = isolated(s);
    ASSERT_EQ(iso.rows.size(), 1u);
    EXPECT_EQ(*iso.rows[0].count, 1024.0);
    const auto r = restrict_to(s, "M", 0.0);
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_EQ(*r.rows[0].count, 252.0);
    EXPECT_TRUE(r.variable_names.empty());
    EXPECT_THROW(restrict_to(s, "M", 1.0), model_error);
}

TEST(SpectrumOps, ValidationRejectsBadRows)
{
    DegeneracySpectrum dup{{"E"}, {SpectrumRow{{1.0}, 0.0, std::nullopt}, SpectrumRow{{1.0}, 0.0, std::nullopt}}};
    EXPECT_THROW(dup.validate(), model_error);
    DegeneracySpectrum bad{{"E"}, {SpectrumRow{{1.0, 2.0}, 0.0, std::nullopt}}};
    EXPECT_THROW(bad.validate(), model_error);
    DegeneracySpectrum empty{{"E"}, {}};
    EXPECT_THROW(empty.validate(), model_error);
}
