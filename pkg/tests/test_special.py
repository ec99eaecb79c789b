import math
from fractions import Fraction

import pytest

from rdsym import special
from conftest import fn_central_diff


def kummer_series_oracle(a, b, z, terms=200):
    """Exact-rational long series for M(a,b,z); independent of the kernel."""
    a, b, z = Fraction(a), Fraction(b), Fraction(z)
    total = Fraction(1)
    term = Fraction(1)
    for n in range(terms):
        term *= (a + n) / (b + n) * z / (n + 1)
        total += term
    return float(total)


def agm_oracle_K(k):
    """Complete elliptic integral K(k) by a plain AGM loop."""
    a, b = 1.0, math.sqrt(1.0 - k * k)
    for _ in range(40):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2 * a)


class TestKummer:
    def test_unit_at_origin(self):
        assert special.kummer_m(0.7, 1.3, 0.0) == 1.0

    def test_exponential_closed_form(self):
        for z in (0.5, 2.0, -3.0, 10.0):
            assert abs(special.kummer_m(1, 1, z) - math.exp(z)) <= 1e-11 * math.exp(z)

    @pytest.mark.parametrize("a,b,z", [
        (0.5, 1.5, 1.0), (-0.25, 0.75, 2.0), (2.0, 0.5, -4.0),
        (1.25, 2.5, 10.0), (0.3, -0.6, 3.0),
    ])
    def test_against_long_series_oracle(self, a, b, z):
        want = kummer_series_oracle(a, b, z)
        got = special.kummer_m(a, b, z)
        assert abs(got - want) <= 1e-11 * max(1.0, abs(want))

    def test_parameter_pole(self):
        with pytest.raises(special.SpecialFunctionError):
            special.kummer_m(1.0, -2.0, 1.0)

    def test_argument_range(self):
        with pytest.raises(special.SpecialFunctionError):
            special.kummer_m(1.0, 2.0, 40.0)


class TestWhittaker:
    def test_elementary_value(self):
        # M_{-1/2,0}(1) = e^{1/2}
        assert abs(special.whittaker_m(-0.5, 0.0, 1.0) - math.exp(0.5)) < 1e-10
        assert abs(special.whittaker_m(-0.5, 0.0, 1.0) - 1.6487212707) < 1e-9

    @pytest.mark.parametrize("kappa", [-1.0, -0.5, 0.3])
    def test_closed_form_identity(self, kappa):
        # M_{k, -k-1/2}(z) = e^{z/2} z^{-k}
        mu = -kappa - 0.5
        for i in range(25):
            z = 0.1 + i * (10.0 - 0.1) / 24
            want = math.exp(z / 2) * z ** (-kappa)
            got = special.whittaker_m(kappa, mu, z)
            assert abs(got - want) <= 1e-9 * abs(want)

    def test_erf_representation(self):
        # M_{-1/4,1/4}(z) = (sqrt(pi)/2) z^(1/4) e^(z/2) erf(sqrt(z))
        for i in range(30):
            z = 0.1 + i * (10.0 - 0.1) / 29
            want = 0.5 * math.sqrt(math.pi) * z ** 0.25 * math.exp(z / 2) \
                * math.erf(math.sqrt(z))
            got = special.whittaker_m(-0.25, 0.25, z)
            assert abs(got - want) <= 1e-9 * abs(want)

    @pytest.mark.parametrize("kappa,mu,z", [
        (0.3, 0.25, 2.0), (-0.875, 0.11180339887498949, 5.0), (1.2, 0.8, 0.7),
    ])
    def test_against_series_oracle(self, kappa, mu, z):
        a = Fraction(mu - kappa + 0.5)
        b = Fraction(1 + 2 * mu)
        want = math.exp(-z / 2) * z ** (mu + 0.5) * kummer_series_oracle(a, b, z)
        got = special.whittaker_m(kappa, mu, z)
        assert abs(got - want) <= 1e-10 * max(1.0, abs(want))

    def test_negative_argument_rejected(self):
        with pytest.raises(special.SpecialFunctionError):
            special.whittaker_m(0.3, 0.25, -1.0)


class TestJacobi:
    def test_origin(self):
        assert special.jacobi(0.0, 0.5) == (0.0, 1.0, 1.0)

    def test_quarter_period(self):
        k = math.sqrt(2) / 2
        K = agm_oracle_K(k)
        assert abs(K - 1.854074677301372) < 1e-12
        sn, cn, dn = special.jacobi(K, k)
        assert abs(sn - 1.0) < 1e-10
        assert abs(cn) < 1e-10
        assert abs(dn - math.sqrt(1 - k * k)) < 1e-10

    @pytest.mark.parametrize("k", [0.3, math.sqrt(2) / 2, 0.9])
    def test_pythagorean_identities(self, k):
        for i in range(41):
            z = -4.0 + 8.0 * i / 40
            sn, cn, dn = special.jacobi(z, k)
            assert abs(sn * sn + cn * cn - 1.0) <= 1e-10
            assert abs(dn * dn + k * k * sn * sn - 1.0) <= 1e-10

    def test_parity(self):
        for z in (0.4, 1.3, 2.8):
            s1, c1, d1 = special.jacobi(z, 0.4)
            s2, c2, d2 = special.jacobi(-z, 0.4)
            assert abs(s1 + s2) < 1e-12
            assert abs(c1 - c2) < 1e-12
            assert abs(d1 - d2) < 1e-12

    @pytest.mark.parametrize("k", [0.3, 0.7])
    def test_derivative_relations(self, k):
        for z in (0.3, 1.2, 2.1, -1.6):
            sn, cn, dn = special.jacobi(z, k)
            dsn = fn_central_diff(lambda y: special.jacobi(y, k)[0], z)
            dcn = fn_central_diff(lambda y: special.jacobi(y, k)[1], z)
            ddn = fn_central_diff(lambda y: special.jacobi(y, k)[2], z)
            assert abs(dsn - cn * dn) <= 1e-6
            assert abs(dcn + sn * dn) <= 1e-6
            assert abs(ddn + k * k * sn * cn) <= 1e-6

    def test_modulus_range(self):
        with pytest.raises(special.SpecialFunctionError):
            special.jacobi(1.0, 1.5)


class TestDsSd:
    def test_sd_at_origin(self):
        assert special.sd(0.0, 0.5) == 0.0

    def test_reciprocal_relation(self):
        for i in range(32):
            z = 0.2 + i * 0.11
            try:
                v = special.ds(z, 0.6) * special.sd(z, 0.6)
            except special.SpecialFunctionError:
                continue
            assert abs(v - 1.0) <= 1e-10

    def test_small_argument_series(self):
        # ds behaves like 1/z near the origin
        assert abs(1e-4 * special.ds(1e-4, 0.5) - 1.0) < 1e-7

    def test_pole_guard(self):
        with pytest.raises(special.SpecialFunctionError):
            special.ds(0.0, 0.5)


class TestErf:
    def test_origin(self):
        assert special.erf(0.0) == 0.0

    def test_parity(self):
        for x in (0.3, 1.1, 2.7, 4.5):
            assert special.erf(-x) == -special.erf(x)

    def test_against_quadrature_oracle(self):
        two_over = 2.0 / math.sqrt(math.pi)
        for x in (0.25, 1.0, 2.0, 3.0, 3.5, 5.0):
            want = two_over * special.adaptive_simpson(
                lambda t: math.exp(-t * t), 0.0, x, tol=1e-14)
            assert abs(special.erf(x) - want) <= 1e-12

    def test_asymptote(self):
        assert special.erf(10.0) == 1.0
        assert abs(special.erf(5.5) - 1.0) < 1e-12


class TestHermiteTable:
    def test_reproduces_smooth_function(self):
        xs = [0.1 * i for i in range(31)]
        ys = [math.sin(v) for v in xs]
        ds = [math.cos(v) for v in xs]
        cs = [-math.sin(v) for v in xs]
        grid, coeffs = special.hermite_table(xs, ys, ds, cs)
        for t in (0.137, 1.04, 2.555, 2.999):
            assert abs(special.hermite_eval(grid, coeffs, t, 0) - math.sin(t)) < 1e-10
            assert abs(special.hermite_eval(grid, coeffs, t, 1) - math.cos(t)) < 1e-9
            assert abs(special.hermite_eval(grid, coeffs, t, 2) + math.sin(t)) < 1e-6

    def test_out_of_range(self):
        grid, coeffs = special.hermite_table([0.0, 1.0], [0.0, 1.0], [1.0, 1.0],
                                             [0.0, 0.0])
        with pytest.raises(special.SpecialFunctionError):
            special.hermite_eval(grid, coeffs, 2.0)


def test_adaptive_simpson_exact_polynomial():
    assert abs(special.adaptive_simpson(lambda t: t ** 3, 0.0, 2.0) - 4.0) < 1e-13
    assert abs(special.adaptive_simpson(math.exp, 0.0, 1.0) - (math.e - 1)) < 1e-12


def test_ds_at_quarter_period_matches_agm_oracle():
    k = math.sqrt(2) / 2
    K = agm_oracle_K(k)
    # ds(K, k) = dn/sn = sqrt(1-k^2)
    assert abs(special.ds(K, k) - math.sqrt(1 - k * k)) < 1e-10
