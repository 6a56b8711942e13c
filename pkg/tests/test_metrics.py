import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from mudiv.fading import NakagamiM, Rayleigh, Rician
from mudiv.metrics import (
    ExpForm,
    QForm,
    asymptote_constants,
    avg_error_fixed_n,
    avg_error_random_n,
    capacity_scaling,
    ergodic_capacity_fixed_n,
    ergodic_capacity_random_n,
    error_derivative_mag,
    high_snr_asymptote,
    instantaneous_error,
    parse_error_model,
    poisson_rayleigh_error_closed,
)
from mudiv.numerics import DomainError
from mudiv.usercount import Deterministic, Geometric, Poisson, ZeroTruncatedPoisson


def beta_oracle(n, eta_rho, alpha=1.0):
    # alpha N Gamma(N) Gamma(1 + eta rho) / Gamma(N + 1 + eta rho), exponential Pe over Rayleigh
    return alpha * math.exp(math.lgamma(n + 1) + math.lgamma(1 + eta_rho)
                            - math.lgamma(n + 1 + eta_rho))


def by_parts_oracle(rho, users, fading, err):
    # E[Pe(rho g)] = rho int B(rho x) U(F(x)) dx; integrated on a finite range with scipy directly
    hi = 60.0 / (err.eta * rho) + 60.0
    f = lambda x: rho * float(err.b(rho * x)) * float(users.pgf(fading.cdf(x))) if x > 0 else 0.0
    pts = [p for p in (1.0 / rho, math.log(users.mean() + 1) + 1) if p < hi]
    val, _ = integrate.quad(f, 0.0, hi, points=pts, limit=2000, epsabs=0.0, epsrel=1e-12)
    return val


def mixture(users, fixed, at_zero):
    k_max = users.tail_cutoff(1e-14)
    total = users.pmf(0) * at_zero
    return total + math.fsum(users.pmf(k) * fixed(k) for k in range(1, k_max + 1))


class TestErrorModels:
    def test_instantaneous(self):
        assert instantaneous_error(ExpForm(1, 1), 0.0) == 1.0
        assert instantaneous_error(QForm(2, 2), 0.0) == pytest.approx(1.0)
        assert instantaneous_error(ExpForm(1, 1), math.log(2)) == pytest.approx(0.5)

    def test_clamp_warns(self):
        with pytest.warns(RuntimeWarning):
            assert instantaneous_error(ExpForm(2.0, 1.0), 0.0) == 1.0

    def test_derivative(self):
        assert error_derivative_mag(ExpForm(1, 1), 1e-300) == pytest.approx(1.0)
        assert error_derivative_mag(ExpForm(2, 3), 1.0) == pytest.approx(6 * math.exp(-3))
        assert error_derivative_mag(QForm(1, 2), 1.0) == pytest.approx(
            0.5 * math.sqrt(1 / math.pi) * math.exp(-1), rel=1e-14)

    @pytest.mark.parametrize("err", [ExpForm(1.3, 0.7), QForm(0.8, 2.0), QForm(1.0, 1.0)], ids=str)
    def test_derivative_is_minus_slope(self, err):
        for s in (0.1, 1.0, 3.0):
            h = 1e-6
            fd = -(err.pe(s + h) - err.pe(s - h)) / (2 * h)
            assert error_derivative_mag(err, s) == pytest.approx(fd, rel=1e-7)

    def test_domain(self):
        with pytest.raises(DomainError):
            instantaneous_error(ExpForm(), -1.0)
        with pytest.raises(DomainError):
            error_derivative_mag(QForm(), 0.0)
        with pytest.raises(DomainError):
            ExpForm(alpha=0.0)

    def test_defaults(self):
        assert (ExpForm().alpha, ExpForm().eta) == (1.0, 1.0)
        assert (QForm().alpha, QForm().eta) == (1.0, 2.0)

    @pytest.mark.parametrize("err", [ExpForm(), QForm(), ExpForm(0.5, 3.0), QForm(2.0, 0.25)], ids=str)
    def test_parse_roundtrip(self, err):
        assert parse_error_model(str(err)) == err

    @pytest.mark.parametrize("text", ["bpsk", "exp:a=x", "qf:b=2", "exp:a=-1"])
    def test_parse_bad(self, text):
        with pytest.raises(ValueError):
            parse_error_model(text)


class TestFixedN:
    def test_spot_values(self):
        assert avg_error_fixed_n(1.0, 1, Rayleigh(), ExpForm()) == pytest.approx(0.5, rel=1e-12)
        assert avg_error_fixed_n(1.0, 2, Rayleigh(), ExpForm()) == pytest.approx(1 / 3, rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3.5, 10, 64, 1000])
    @pytest.mark.parametrize("eta_rho", [0.5, 1.0, 4.0, 31.6, 1000.0, 31622.8])
    def test_beta_oracle(self, n, eta_rho):
        got = avg_error_fixed_n(eta_rho, n, Rayleigh(), ExpForm())
        assert got == pytest.approx(beta_oracle(n, eta_rho), rel=1e-9)

    def test_eta_enters_as_product(self):
        a = avg_error_fixed_n(3.0, 4, Rayleigh(), ExpForm(1.0, 2.0))
        b = avg_error_fixed_n(6.0, 4, Rayleigh(), ExpForm(1.0, 1.0))
        assert a == pytest.approx(b, rel=1e-11)

    @pytest.mark.parametrize("rho", [0.3, 1.0, 10.0, 1000.0])
    def test_qform_single_user(self, rho):
        # E[Q(sqrt(eta rho g))] for exponential g = (1 - sqrt(c / (1 + c))) / 2 with c = eta rho / 2
        c = rho
        expected = 0.5 * (1 - math.sqrt(c / (1 + c)))
        assert avg_error_fixed_n(rho, 1, Rayleigh(), QForm()) == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("fading", [NakagamiM(2.0), Rician(3.0)], ids=str)
    @pytest.mark.parametrize("err", [ExpForm(), QForm()], ids=str)
    def test_by_parts_oracle(self, fading, err):
        for rho, n in [(1.0, 1), (4.0, 3), (100.0, 8)]:
            got = avg_error_fixed_n(rho, n, fading, err)
            assert got == pytest.approx(by_parts_oracle(rho, Deterministic(n), fading, err), rel=1e-8)

    def test_nakagami_single_user_exp(self):
        # E[e^{-s g}] for g ~ Gamma(m, 1/m) is (1 + s/m)^-m
        for m in (0.5, 2.0, 3.7):
            for rho in (0.5, 10.0, 1e4):
                got = avg_error_fixed_n(rho, 1, NakagamiM(m), ExpForm())
                assert got == pytest.approx((1 + rho / m) ** -m, rel=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            avg_error_fixed_n(1.0, 0.5, Rayleigh(), ExpForm())
        with pytest.raises(DomainError):
            avg_error_fixed_n(0.0, 2, Rayleigh(), ExpForm())


class TestRandomN:
    def test_deterministic_dispatch(self):
        for n in (1, 5):
            assert avg_error_random_n(2.0, Deterministic(n), Rayleigh(), QForm()) == pytest.approx(
                avg_error_fixed_n(2.0, n, Rayleigh(), QForm()), abs=1e-12)
        assert avg_error_random_n(2.0, Deterministic(0), Rayleigh(), QForm()) == 0.5

    def test_poisson_spot(self):
        val = avg_error_random_n(1.0, Poisson(1.0), Rayleigh(), ExpForm())
        assert val == pytest.approx(1 - math.exp(-1), rel=1e-12)

    @pytest.mark.parametrize("users", [Poisson(3.0), Geometric(0.2), ZeroTruncatedPoisson(2.0)], ids=str)
    @pytest.mark.parametrize("fading", [Rayleigh(), NakagamiM(2.0), Rician(3.0)], ids=str)
    @pytest.mark.parametrize("err", [ExpForm(), QForm()], ids=str)
    def test_mixture_consistency(self, users, fading, err):
        rho = 4.0
        got = avg_error_random_n(rho, users, fading, err)
        expected = mixture(users, lambda k: avg_error_fixed_n(rho, k, fading, err), float(err.pe(0.0)))
        assert got == pytest.approx(expected, rel=1e-7)

    @pytest.mark.parametrize("users", [Poisson(8.0), Geometric(0.1), ZeroTruncatedPoisson(3.0)], ids=str)
    @pytest.mark.parametrize("err", [ExpForm(), QForm()], ids=str)
    def test_by_parts_oracle(self, users, err):
        for rho in (1.0, 30.0):
            got = avg_error_random_n(rho, users, NakagamiM(2.0), err)
            assert got == pytest.approx(by_parts_oracle(rho, users, NakagamiM(2.0), err), rel=1e-8)

    @pytest.mark.parametrize("users", [Poisson(4.0), Geometric(0.2), ZeroTruncatedPoisson(3.0)], ids=str)
    @pytest.mark.parametrize("db", [0, 6, 10, 20])
    def test_jensen_error(self, users, db):
        rho = 10 ** (db / 10)
        random = avg_error_random_n(rho, users, Rayleigh(), ExpForm())
        fixed = avg_error_fixed_n(rho, users.mean(), Rayleigh(), ExpForm())
        assert random >= fixed - 1e-10


class TestClosedForm:
    @pytest.mark.parametrize("lam", [0.5, 1, 2, 8])
    @pytest.mark.parametrize("eta_rho", [0.5, 1, 2, 4])
    def test_against_quadrature(self, lam, eta_rho):
        closed = poisson_rayleigh_error_closed(eta_rho, lam, ExpForm())
        quad = avg_error_random_n(eta_rho, Poisson(lam), Rayleigh(), ExpForm())
        assert closed == pytest.approx(quad, rel=1e-8)

    def test_spot_and_limits(self):
        assert poisson_rayleigh_error_closed(1.0, 1.0, ExpForm()) == pytest.approx(1 - math.exp(-1), rel=1e-14)
        assert poisson_rayleigh_error_closed(1.0, 1e-9, ExpForm(0.7, 1.0)) == pytest.approx(0.7, rel=1e-8)

    def test_power_law_decay(self):
        val = poisson_rayleigh_error_closed(2.0, 100.0, ExpForm())
        assert val == pytest.approx(2e-4, rel=0.02)
        assert val == pytest.approx(math.gamma(3) * 100.0**-2, rel=0.02)

    def test_alpha_eta_scaling(self):
        a = poisson_rayleigh_error_closed(2.0, 5.0, ExpForm(0.5, 3.0))
        b = 0.5 * poisson_rayleigh_error_closed(6.0, 5.0, ExpForm())
        assert a == pytest.approx(b, rel=1e-14)

    def test_rejects_qform(self):
        with pytest.raises(DomainError):
            poisson_rayleigh_error_closed(1.0, 1.0, QForm())


class TestCapacity:
    def test_single_user(self):
        assert ergodic_capacity_fixed_n(1.0, 1, Rayleigh()) == pytest.approx(math.e * special.exp1(1.0), rel=1e-12)
        assert ergodic_capacity_fixed_n(1.0, 1, Rayleigh()) == pytest.approx(0.59634, abs=1e-5)

    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    @pytest.mark.parametrize("rho", [0.1, 1.0, 10.0, 100.0])
    def test_exponential_integral_oracle(self, n, rho):
        # 1 - F^n = sum_k (-1)^{k+1} C(n,k) e^{-kx}; each term integrates to e^{k/rho} E1(k/rho)
        expected = math.fsum((-1) ** (k + 1) * math.comb(n, k) * special.exp1(k / rho) * math.exp(k / rho)
                             for k in range(1, n + 1))
        assert ergodic_capacity_fixed_n(rho, n, Rayleigh()) == pytest.approx(expected, rel=1e-9)

    def test_small_rho(self):
        assert ergodic_capacity_fixed_n(1e-8, 4, Rayleigh()) == pytest.approx(1e-8 * 25 / 12, rel=1e-6)
        assert ergodic_capacity_random_n(1e-8, Deterministic(0), Rayleigh()) == 0.0

    def test_deterministic_dispatch(self):
        assert ergodic_capacity_random_n(3.0, Deterministic(6), NakagamiM(2.0)) == pytest.approx(
            ergodic_capacity_fixed_n(3.0, 6, NakagamiM(2.0)), abs=1e-14)

    @pytest.mark.parametrize("users", [Poisson(3.0), Geometric(0.2), ZeroTruncatedPoisson(2.0)], ids=str)
    @pytest.mark.parametrize("fading", [Rayleigh(), NakagamiM(2.0), Rician(3.0)], ids=str)
    def test_mixture_consistency(self, users, fading):
        rho = 10.0
        got = ergodic_capacity_random_n(rho, users, fading)
        expected = mixture(users, lambda k: ergodic_capacity_fixed_n(rho, k, fading), 0.0)
        assert got == pytest.approx(expected, rel=1e-7)

    @pytest.mark.parametrize("users", [Poisson(4.0), Geometric(0.2), ZeroTruncatedPoisson(3.0)], ids=str)
    @pytest.mark.parametrize("db", [0, 6, 10, 20])
    def test_jensen_capacity(self, users, db):
        rho = 10 ** (db / 10)
        random = ergodic_capacity_random_n(rho, users, Rayleigh())
        fixed = ergodic_capacity_fixed_n(rho, users.mean(), Rayleigh())
        assert random <= fixed + 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            ergodic_capacity_fixed_n(-1.0, 2, Rayleigh())


class TestAsymptotics:
    def test_constants(self):
        assert asymptote_constants(ExpForm(), 1.0) == (1.0, 1.0)
        c1, c2 = asymptote_constants(QForm(), 1.0)
        assert c1 == pytest.approx(0.25, rel=1e-15)
        assert c2 == 1.0

    @pytest.mark.parametrize("err", [ExpForm(), QForm()], ids=str)
    @pytest.mark.parametrize("users", [ZeroTruncatedPoisson(2.0), Deterministic(2), Poisson(3.0)], ids=str)
    def test_ratio_at_40db(self, err, users):
        rho = 1e4
        ratio = avg_error_random_n(rho, users, Rayleigh(), err) / high_snr_asymptote(rho, users, Rayleigh(), err)
        assert ratio == pytest.approx(1.0, abs=0.05)

    def test_nakagami_asymptote(self):
        rho = 1e5
        users = Deterministic(1)
        ratio = (avg_error_random_n(rho, users, NakagamiM(2.0), ExpForm())
                 / high_snr_asymptote(rho, users, NakagamiM(2.0), ExpForm()))
        assert ratio == pytest.approx(1.0, abs=0.05)

    def test_capacity_scaling_value(self):
        assert capacity_scaling(10.0, 1e4) == pytest.approx(math.log(1 + 10 * math.log(1e4)), rel=1e-15)
        assert capacity_scaling(10.0, 1e4) == pytest.approx(4.534, abs=1e-3)
        assert capacity_scaling(1e-12, 10.0) == pytest.approx(0.0, abs=1e-11)
        with pytest.raises(DomainError):
            capacity_scaling(10.0, 1.0)

    def test_capacity_scaling_approached(self):
        gaps = [abs(ergodic_capacity_random_n(10.0, Poisson(lam), Rayleigh()) - capacity_scaling(10.0, lam))
                for lam in (1e2, 1e3, 1e4)]
        assert gaps[0] > gaps[1] > gaps[2]


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 50.0), st.floats(0.05, 200.0))
def test_closed_form_bounds_property(lam, eta_rho):
    val = poisson_rayleigh_error_closed(eta_rho, lam, ExpForm())
    # bounded below by the empty-cell atom and above by the single-user value at N = 0 (Pe(0) = 1)
    assert math.exp(-lam) <= val <= 1.0
    assert np.isfinite(val)
