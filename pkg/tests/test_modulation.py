"""Tests for modulated intensities."""

import math

import numpy as np
import pytest
from scipy import integrate, special

from hyperpark.analytics.harmonic import mean_distance_analytic
from hyperpark.analytics.modulation import (
    ModulationKind,
    ModulationLaw,
    gamma_G_closed_form,
    modulated_G,
    modulated_mean_distance,
)
from hyperpark.errors import DomainError
from hyperpark.model.config import CityConfig


def test_parse_laws() -> None:
    """Test the text forms accepted by parse."""
    assert ModulationLaw.parse("none") == ModulationLaw.constant(1.0)
    assert ModulationLaw.parse("constant:2") == ModulationLaw.constant(2.0)
    assert ModulationLaw.parse("gamma:0.5") == ModulationLaw.gamma(0.5, 1.0)
    assert ModulationLaw.parse("Gamma:0.5:2") == ModulationLaw.gamma(0.5, 2.0)
    assert ModulationLaw.parse("lognormal:-1:0.5") == ModulationLaw.lognormal(-1.0, 0.5)


@pytest.mark.parametrize("text", ["bogus", "gamma:x", "gamma", "lognormal:0", "gamma:-1:1", "constant:0"])
def test_parse_rejects(text: str) -> None:
    """Test that malformed laws raise DomainError."""
    with pytest.raises(DomainError):
        ModulationLaw.parse(text)


@pytest.mark.parametrize(
    "law",
    [ModulationLaw.constant(3.0), ModulationLaw.gamma(0.5, 2.0), ModulationLaw.lognormal(0.0, 1.0)],
)
def test_str_parses_back(law: ModulationLaw) -> None:
    """Test that the text form parses to the same law."""
    assert ModulationLaw.parse(str(law)) == law


def test_moments_match_scipy() -> None:
    """Test closed-form moments against integrating the density."""
    for law in (ModulationLaw.gamma(0.5, 2.0), ModulationLaw.lognormal(0.3, 0.6)):
        first, _ = integrate.quad(lambda t: t * float(law.pdf(t)), 0.0, np.inf)
        second, _ = integrate.quad(lambda t: t * t * float(law.pdf(t)), 0.0, np.inf)
        assert law.mean == pytest.approx(first, rel=1e-7)
        assert law.second_moment == pytest.approx(second, rel=1e-7)


def test_constant_law_has_no_density() -> None:
    """Test that the constant law refuses pdf."""
    with pytest.raises(DomainError):
        ModulationLaw.constant(1.0).pdf(1.0)


def test_constant_sampling_consumes_no_draws() -> None:
    """Test that constant weights leave the generator untouched."""
    gen = np.random.default_rng(3)
    before = gen.bit_generator.state
    weights = ModulationLaw.constant(2.0).sample(gen, 5)
    assert gen.bit_generator.state == before
    np.testing.assert_array_equal(weights, np.full(5, 2.0))
    assert ModulationLaw.gamma(2.0).sample(gen, 7).shape == (7,)


def test_small_mass_condition() -> None:
    """Test that only gamma laws have power-law mass near zero."""
    assert ModulationLaw.gamma(0.5).satisfies_small_mass_condition()
    assert not ModulationLaw.lognormal(0.0, 1.0).satisfies_small_mass_condition()
    assert not ModulationLaw.constant(1.0).satisfies_small_mass_condition()
    assert ModulationLaw.gamma(0.5).kind is ModulationKind.GAMMA


def test_G_basics() -> None:
    """Test G(0) = 1, the constant closed form and negative arguments."""
    law = ModulationLaw.gamma(2.0, 1.0)
    assert modulated_G(0.0, law) == 1.0
    assert modulated_G(3.0, ModulationLaw.constant(1.0)) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        modulated_G(-1.0, law)


@pytest.mark.parametrize("shape", [0.5, 2.0])
@pytest.mark.parametrize("u", [0.01, 1.0, 100.0, 1e4])
def test_gamma_quadrature_matches_closed_form(shape: float, u: float) -> None:
    """Test the generic quadrature against Tricomi's function."""
    law = ModulationLaw.gamma(shape, 1.5)
    assert modulated_G(u, law) == pytest.approx(gamma_G_closed_form(u, shape, 1.5), rel=1e-8)


@pytest.mark.parametrize("u", [0.01, 1.0, 100.0, 1e4])
def test_exponential_weight_closed_form(u: float) -> None:
    """Test G for W ~ Exp(θ) against z e^z E_1(z), z = 1/(uθ)."""
    z = 1.0 / (u * 1.5)
    expected = z * math.exp(z) * float(special.exp1(z))
    assert modulated_G(u, ModulationLaw.gamma(1.0, 1.5)) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("u", [1e-4, 1.0, 1e6])
def test_heavy_lognormal_tail(u: float) -> None:
    """Test G for a wide lognormal against quadrature over the underlying normal."""
    law = ModulationLaw.lognormal(0.5, 2.5)

    def integrand(z: float) -> float:
        return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi) / (1.0 + u * math.exp(0.5 + 2.5 * z))

    expected, _ = integrate.quad(integrand, -12.0, 12.0, epsabs=0.0, epsrel=1e-12, limit=200)
    value = modulated_G(u, law)
    assert 0.0 < value < 1.0
    assert value == pytest.approx(expected, rel=1e-8)


def test_G_is_decreasing_and_convex() -> None:
    """Test the shape of G on a log grid."""
    law = ModulationLaw.lognormal(0.0, 0.8)
    u = np.linspace(0.0, 20.0, 41)
    values = np.array([modulated_G(float(v), law) for v in u])
    assert np.all(np.diff(values) < 0.0)
    assert np.all(np.diff(values, 2) > 0.0)


def test_gamma_power_law_tail() -> None:
    """Test G(u) u^β -> π / (sin(πβ) Γ(β) θ^β) for β = 1/2."""
    limit = math.log(math.sqrt(math.pi))
    for u in (1e4, 1e5, 1e6):
        assert abs(math.log(gamma_G_closed_form(u, 0.5, 1.0)) + 0.5 * math.log(u) - limit) < 0.05
    assert abs(math.log(gamma_G_closed_form(1e6, 0.5, 1.0)) + 0.5 * math.log(1e6) - limit) < 0.01


def test_constant_law_reproduces_jumpless_mean(deep_city: CityConfig, infinite_city: CityConfig) -> None:
    """Test that W = 1 gives exactly the unmodulated mean."""
    law = ModulationLaw.constant(1.0)
    for cfg in (deep_city, infinite_city):
        assert modulated_mean_distance(cfg, law).value == mean_distance_analytic(cfg).value


def test_modulated_mean_without_slots() -> None:
    """Test that λ = 0 gives L for any law."""
    cfg = CityConfig(L=2.0)
    assert modulated_mean_distance(cfg, ModulationLaw.gamma(0.5)).value == pytest.approx(2.0, rel=1e-13)


def test_constant_scale_acts_like_lambda(deep_city: CityConfig) -> None:
    """Test that W = w is the same as multiplying λ by w."""
    scaled = modulated_mean_distance(deep_city, ModulationLaw.constant(4.0)).value
    assert scaled == pytest.approx(mean_distance_analytic(deep_city.with_lambda(400.0)).value, rel=1e-13)


def test_gamma_modulation_lengthens_search(deep_city: CityConfig) -> None:
    """Test that mean-one random weights give a longer search than constant ones."""
    modulated = modulated_mean_distance(deep_city, ModulationLaw.gamma(1.0, 1.0)).value
    assert modulated > mean_distance_analytic(deep_city).value
