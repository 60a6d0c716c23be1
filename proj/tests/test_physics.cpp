#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "propwave/physics.hpp"
#include "propwave/problem.hpp"
#include "propwave/quad.hpp"

using namespace propwave;

TEST_CASE("pyrolysis mass flux follows the Arrhenius law", "[physics]") {
  PhysicalParams p = PhysicalParams::reference();

  SECTION("direct evaluation") {
    p.A_p = 1000.0;
    p.T_ap = 9000.0;
    CHECK(pyrolysis_mass_flux(600.0, p) ==
          Catch::Approx(1000.0 * std::exp(-15.0)).epsilon(1e-14));
  }
  SECTION("Ts = T_ap cancels e") {
    p.A_p = std::exp(1.0);
    p.T_ap = 9000.0;
    CHECK(pyrolysis_mass_flux(9000.0, p) == Catch::Approx(1.0).epsilon(1e-14));
  }
  SECTION("limit Ts -> infinity approaches A_p") {
    CHECK(pyrolysis_mass_flux(1e15, p) ==
          Catch::Approx(p.A_p).epsilon(1e-10));
  }
  SECTION("strictly increasing in Ts") {
    double prev = 0.0;
    for (double Ts = 350.0; Ts < 3500.0; Ts += 50.0) {
      const double m = pyrolysis_mass_flux(Ts, p);
      CHECK(m > prev);
      prev = m;
    }
  }
  SECTION("non-finite or nonpositive Ts rejected") {
    CHECK_THROWS_AS(pyrolysis_mass_flux(std::nan(""), p), std::domain_error);
    CHECK_THROWS_AS(pyrolysis_mass_flux(-5.0, p), std::domain_error);
  }
}

TEST_CASE("surface temperature inverts the pyrolysis law", "[physics]") {
  PhysicalParams p = PhysicalParams::reference();

  SECTION("ln cancellation at mdot = A_p/e") {
    const double c = -p.A_p * std::exp(-1.0) / p.rho_s;
    CHECK(surface_temperature_from_c(c, p) ==
          Catch::Approx(p.T_ap).epsilon(1e-13));
  }
  SECTION("round trip with the forward law") {
    p.A_p = 1000.0;
    p.T_ap = 9000.0;
    const double mdot = pyrolysis_mass_flux(600.0, p);
    const double Ts = surface_temperature_from_c(-mdot / p.rho_s, p);
    CHECK(Ts == Catch::Approx(600.0).epsilon(1e-12));
  }
  SECTION("no regression and non-invertible inputs rejected") {
    CHECK_THROWS_AS(surface_temperature_from_c(0.0, p), std::domain_error);
    CHECK_THROWS_AS(surface_temperature_from_c(1e-3, p), std::domain_error);
    CHECK_THROWS_AS(surface_temperature_from_c(-2.0 * p.A_p / p.rho_s, p),
                    std::domain_error);
  }
  SECTION("round trip with the cut-off enabled uses the numeric inverse") {
    p.cutoff.enabled = true;
    p.cutoff.width = 40.0;
    const double Ts_ref = 800.0;
    const double mdot = pyrolysis_mass_flux(Ts_ref, p);
    const double Ts = surface_temperature_from_mass_flux(mdot, p);
    CHECK(Ts == Catch::Approx(Ts_ref).epsilon(1e-10));
  }
}

TEST_CASE("pyrolysis heat is affine in Ts", "[physics]") {
  PhysicalParams p = PhysicalParams::reference();
  SECTION("constant when c_s = c_p") {
    CHECK(q_pyro(400.0, p) == p.Q_p_std);
    CHECK(q_pyro(3000.0, p) == p.Q_p_std);
  }
  SECTION("Ts = T_std gives the standard value") {
    p.c_p = 2400.0;
    CHECK(q_pyro(p.T_std, p) == p.Q_p_std);
  }
  SECTION("slope (c_s - c_p)") {
    p.c_s = 1200.0;
    p.c_p = 2400.0;
    CHECK(q_pyro(p.T_std + 100.0, p) ==
          Catch::Approx(p.Q_p_std - 1.2e5).epsilon(1e-14));
  }
}

TEST_CASE("flame temperature from the global energy balance", "[physics]") {
  PhysicalParams p = PhysicalParams::reference();
  SECTION("reference constants give 3700 K") {
    CHECK(flame_temperature(p) == Catch::Approx(3700.0).epsilon(1e-13));
  }
  SECTION("both forms coincide when c_s = c_p, any T_std") {
    p.T_std = 1234.5;
    CHECK(flame_temperature(p) ==
          Catch::Approx(p.T0 + (p.Q_g + p.Q_p_std) / p.c_p).epsilon(1e-13));
  }
  SECTION("degenerate heat release rejected") {
    p.Q_p_std = -p.Q_g;
    CHECK_THROWS_AS(flame_temperature(p), ConfigError);
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
}

TEST_CASE("mass fraction of theta from constant enthalpy", "[physics]") {
  PhysicalParams p = PhysicalParams::reference();
  SECTION("complete combustion") {
    CHECK(mass_fraction_of_theta(1.0, p) == 0.0);
  }
  SECTION("unity at the zero-feedback surface temperature") {
    const double theta_min = p.Q_p_std / (p.Q_p_std + p.Q_g);
    CHECK(mass_fraction_of_theta(theta_min, p) ==
          Catch::Approx(1.0).epsilon(1e-12));
  }
  SECTION("midpoint arithmetic") {
    CHECK(mass_fraction_of_theta(0.5, p) ==
          Catch::Approx(0.5 * (3.9e6 + 1.8e5) / 3.9e6).epsilon(1e-13));
  }
  SECTION("domain guard") {
    CHECK_THROWS_AS(mass_fraction_of_theta(-0.1, p), std::domain_error);
    CHECK_THROWS_AS(mass_fraction_of_theta(1.1, p), std::domain_error);
  }
}

TEST_CASE("ideal gas density", "[physics]") {
  PhysicalParams p = PhysicalParams::reference();
  SECTION("identity case") {
    p.P = kGasConstant;
    p.M = 1.0;
    CHECK(gas_density(1.0, p) == Catch::Approx(1.0).epsilon(1e-14));
  }
  SECTION("inverse proportionality in T") {
    CHECK(gas_density(2000.0, p) ==
          Catch::Approx(0.5 * gas_density(1000.0, p)).epsilon(1e-14));
  }
  SECTION("reference arithmetic") {
    CHECK(gas_density(3700.0, p) ==
          Catch::Approx(5e6 * 0.024 / (kGasConstant * 3700.0)).epsilon(1e-14));
  }
  SECTION("nonpositive T rejected") {
    CHECK_THROWS_AS(gas_density(0.0, p), std::domain_error);
  }
}

TEST_CASE("reaction rate", "[physics]") {
  PhysicalParams p = PhysicalParams::reference();
  SECTION("zero iff no reactant") {
    CHECK(reaction_rate(2000.0, 0.0, p) == 0.0);
    CHECK(reaction_rate(2000.0, 0.4, p) > 0.0);
  }
  SECTION("temperature factors cancel when T_a = 0") {
    p.T_a = 0.0;
    const double expected = p.A_reac * (p.P / kGasConstant) * 0.4;
    CHECK(reaction_rate(700.0, 0.4, p) ==
          Catch::Approx(expected).epsilon(1e-13));
    CHECK(reaction_rate(3100.0, 0.4, p) ==
          Catch::Approx(expected).epsilon(1e-13));
  }
  SECTION("linear in the pre-exponential") {
    const double w1 = reaction_rate(1500.0, 0.3, p);
    p.A_reac *= 2.0;
    CHECK(reaction_rate(1500.0, 0.3, p) == Catch::Approx(2.0 * w1));
  }
  SECTION("negative mass fraction rejected") {
    CHECK_THROWS_AS(reaction_rate(1500.0, -0.1, p), std::domain_error);
  }
}

TEST_CASE("dimensionless heat source", "[problem]") {
  PhysicalParams p = PhysicalParams::reference();
  DimensionlessProblem pb(p);

  SECTION("vanishes at the burnt state") {
    CHECK(pb.psi(1.0) == 0.0);
  }
  SECTION("nonnegative over [0, 1]") {
    for (int i = 0; i <= 100; ++i) CHECK(pb.psi(i / 100.0) >= 0.0);
  }
  SECTION("scales with L^2") {
    PhysicalParams p2 = p;
    p2.L_ref *= 3.0;
    DimensionlessProblem pb2(p2);
    CHECK(pb2.psi(0.5) == Catch::Approx(9.0 * pb.psi(0.5)).epsilon(1e-12));
  }
  SECTION("domain guard") {
    CHECK_THROWS_AS(pb.psi(1.5), std::domain_error);
  }
  SECTION("analytic burnt-state slope matches the finite difference") {
    const double beta = pb.psi_slope_at_burnt();
    CHECK(beta < 0.0);
    CHECK(pb.psi_slope_at_burnt_fd() == Catch::Approx(beta).epsilon(1e-5));
  }
}

TEST_CASE("pyrolysis flux target S", "[problem]") {
  PhysicalParams p = PhysicalParams::reference();

  SECTION("zero heat of pyrolysis gives S = 0") {
    p.Q_p_std = 0.0;
    DimensionlessProblem pb(p);
    CHECK(pb.target_S(-3.0) == 0.0);
    CHECK(pb.target_S(-0.01) == 0.0);
  }
  SECTION("S(0) = 0") {
    DimensionlessProblem pb(p);
    CHECK(pb.target_S(0.0) == 0.0);
  }
  SECTION("eta = 2, Q_p = Q_g gives S = c~") {
    p.lambda_s = 2.0 * p.lambda_g;
    p.Q_p_std = p.Q_g;
    DimensionlessProblem pb(p);
    CHECK(pb.target_S(-1.7) == Catch::Approx(-1.7).epsilon(1e-12));
  }
  SECTION("reduces to eta c~ Q_p/(Q_p+Q_g) when c_s = c_p") {
    DimensionlessProblem pb(p);
    const double ct = -2.0;
    const double expected =
        pb.eta() * ct * p.Q_p_std / (p.Q_p_std + p.Q_g);
    CHECK(pb.target_S(ct) == Catch::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("surface-temperature map and its inverse", "[problem]") {
  PhysicalParams p = PhysicalParams::reference();
  DimensionlessProblem pb(p);

  SECTION("round trip to 1e-12 relative") {
    for (double theta_s : {0.05, 0.2, 0.5, 0.9}) {
      const double ct = pb.c_of_theta_s(theta_s);
      CHECK(pb.theta_s_of_c(ct) == Catch::Approx(theta_s).epsilon(1e-12));
    }
  }
  SECTION("strictly decreasing in c~") {
    double prev = 2.0;
    const double ct_max = pb.c_tilde_max();
    for (int i = 40; i >= 1; --i) {  // c~ increasing towards 0
      const double ct = ct_max * i / 41.0;
      const double th = pb.theta_s_of_c(ct);
      CHECK(th < prev);
      prev = th;
    }
  }
}

TEST_CASE("derived quantities and admissibility", "[problem]") {
  PhysicalParams p = PhysicalParams::reference();
  const auto d = DerivedQuantities::from(p);

  CHECK(d.T_f > p.T0);
  CHECK(d.c_max < 0.0);
  REQUIRE(d.has_c_min);
  CHECK(d.c_max < d.c_min);
  CHECK(d.c_min < 0.0);
  CHECK(d.theta_s_min ==
        Catch::Approx(p.Q_p_std / (p.Q_p_std + p.Q_g)).epsilon(1e-12));
  CHECK(d.theta_s_min > 0.0);
  CHECK(d.theta_s_min < 1.0);

  SECTION("H11 rejection") {
    p.Q_p_std = -1.01 * p.Q_g;
    CHECK_THROWS_AS(DerivedQuantities::from(p), ConfigError);
  }
  SECTION("endothermic pyrolysis has no c_min") {
    p.Q_p_std = -2e5;
    const auto d2 = DerivedQuantities::from(p);
    CHECK_FALSE(d2.has_c_min);
  }
}

TEST_CASE("psi properties hold over random admissible parameter sets",
          "[problem][property]") {
  std::mt19937 rng(20260809u);
  auto uni = [&](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };
  int tested = 0;
  while (tested < 25) {
    PhysicalParams p;
    p.T0 = uni(250.0, 400.0);
    p.P = uni(5e5, 2e7);
    p.rho_s = uni(900.0, 2500.0);
    p.lambda_s = uni(0.1, 1.2);
    p.c_s = uni(800.0, 2600.0);
    p.lambda_g = uni(0.03, 0.3);
    p.c_p = p.c_s;
    p.M = uni(0.012, 0.06);
    p.nu = -uni(0.5, 2.0);
    p.Q_g = uni(1e6, 6e6);
    p.Q_p_std = uni(-0.3, 0.4) * p.Q_g;
    p.A_reac = uni(10.0, 1e4);
    p.T_a = uni(0.0, 2e4);
    p.A_p = uni(1e4, 1e7);
    p.T_ap = uni(4e3, 2e4);
    try {
      p.validate();
    } catch (const ConfigError&) {
      continue;
    }
    ++tested;
    DimensionlessProblem pb(p);
    CHECK(pb.psi(1.0) == 0.0);
    for (int i = 0; i <= 50; ++i) CHECK(pb.psi(i / 50.0) >= 0.0);
    // theta_s(c~) strictly decreasing: finite-difference sign over a grid
    const double ct_max = pb.c_tilde_max();
    double prev = 2.0;
    for (int i = 12; i >= 1; --i) {  // c~ increasing towards 0
      const double th = pb.theta_s_of_c(ct_max * i / 13.0);
      CHECK(th < prev);
      prev = th;
    }
  }
}

TEST_CASE("flame temperature is independent of the mass flux", "[problem]") {
  // the returned value takes no T_s or mdot argument; both Remark forms agree
  PhysicalParams p = PhysicalParams::reference();
  const double direct = p.T0 + (p.Q_g + p.Q_p_std) / p.c_p;
  CHECK(flame_temperature(p) == Catch::Approx(direct).epsilon(1e-13));
}
