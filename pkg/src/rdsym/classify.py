"""Structural classification of equations against the row templates:
parameter extraction by log-linear least squares on sampled points, exact
confirmation by numeric equality, and the admissible-transformation
subclass predicate.

Matching order runs from the most specific templates downward; footnote
exclusions are checked before a row is accepted.  Anything unmatched
lands in the kernel case (row 0, algebra <d_t>).
"""

from __future__ import annotations

import math

import numpy as np

from . import tables
from .expr import (
    Expr,
    EvalDomainError,
    compile_expr,
    const,
    diff,
    exp,
    func,
    ln,
    num_equal,
    pow_,
    simplify,
    substitute,
    var,
)
from .model import (
    AdmissibleForm,
    ClassificationResult,
    DoubleImagedEquation,
    Equation,
    ImagedEquation,
    Interval,
    RDEquation,
    VectorField,
    require_valid,
)
from .sampling import halton_scaled
from .transforms import sqrt_resolved

X = var("x")

_FIT_SAMPLES = 32
_FIT_TOL = 1e-7
_CONFIRM_TOL = 1e-9
_ZERO_TOL = 1e-9


def _samples(domain: Interval, n: int = _FIT_SAMPLES) -> list[float]:
    return [p[0] for p in halton_scaled([(domain.lo, domain.hi)], n)]


def _eval_many(e: Expr, xs: list[float]) -> list[float] | None:
    fn = compile_expr(e, ("x",))
    out = []
    for xv in xs:
        try:
            out.append(fn((xv,)))
        except EvalDomainError:
            return None
    return out


def _lstsq(rows: list[list[float]], rhs: list[float]) -> tuple[np.ndarray, float]:
    A = np.array(rows)
    b = np.array(rhs)
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    res = float(np.max(np.abs(A @ coef - b))) / max(1.0, float(np.max(np.abs(b))))
    return coef, res


def _shifted(e: Expr, nu: float) -> Expr:
    return e if nu == 0.0 else simplify(substitute(e, "x", X + const(nu)))


class _NoFit(Exception):
    pass


def _fit_H_family(H: Expr, domain: Interval, asm) -> dict:
    """Fit H = delta |x+nu|^k exp(p x^2 + q x) via the log-derivative
    H'/H = k/(x+nu) + 2p x + q."""
    xs = _samples(domain)
    s_expr = simplify(diff(H, "x", asm) / H)
    sv = _eval_many(s_expr, xs)
    hv = _eval_many(H, xs)
    if sv is None or hv is None or any(v == 0.0 for v in hv):
        raise _NoFit("H not evaluable on the domain")

    def finish(nu: float, p: float, q: float, k: float) -> dict:
        core = [k * math.log(abs(x + nu)) + p * x * x + q * x for x in xs]
        logd = [math.log(abs(h)) - c for h, c in zip(hv, core)]
        delta = math.copysign(math.exp(sum(logd) / len(logd)), hv[0])
        spread = max(abs(d - math.log(abs(delta))) for d in logd)
        if spread > 1e-6:
            raise _NoFit("H does not factor over the template family")
        return {"nu": nu, "p": p, "q": q, "k": k, "delta": delta}

    # pure exponential branch (no pole): s = 2p x + q
    coef, res = _lstsq([[x, 1.0] for x in xs], sv)
    if res <= _FIT_TOL:
        p, q = 0.5 * float(coef[0]), float(coef[1])
        if abs(p) < _ZERO_TOL:
            p = 0.0
        if abs(q) < _ZERO_TOL:
            q = 0.0
        return finish(0.0, p, q, 0.0)
    # power branch: s x = -nu s + 2p x^2 + A x + B
    rows = [[-s, x * x, x, 1.0] for s, x in zip(sv, xs)]
    coef, res = _lstsq(rows, [s * x for s, x in zip(sv, xs)])
    if res > _FIT_TOL:
        raise _NoFit("H log-derivative is not rational of the template form")
    nu, p2, A, B = (float(c) for c in coef)
    p = 0.5 * p2
    if abs(p) < _ZERO_TOL:
        p = 0.0
    q = A - 2.0 * p * nu
    if abs(q) < _ZERO_TOL:
        q = 0.0
    k = B - q * nu
    if abs(k) < _ZERO_TOL:
        k = 0.0
    if abs(nu) < _ZERO_TOL:
        nu = 0.0
    return finish(nu, p, q, k)


def _fit_F_poly(F: Expr, domain: Interval, nu: float) -> tuple[float, float, float]:
    """Fit F = c2 (x+nu)^2 + c0 + a2 (x+nu)^(-2)."""
    xs = _samples(domain)
    fv = _eval_many(F, xs)
    if fv is None:
        raise _NoFit("F not evaluable")
    rows = [[(x + nu) ** 2, 1.0, (x + nu) ** -2] for x in xs]
    coef, res = _lstsq(rows, fv)
    if res > _FIT_TOL:
        raise _NoFit("F is not of the quadratic-plus-pole form")
    c2, c0, a2 = (float(c) for c in coef)
    return (0.0 if abs(c2) < _ZERO_TOL else c2,
            0.0 if abs(c0) < _ZERO_TOL else c0,
            0.0 if abs(a2) < _ZERO_TOL else a2)


def _shift_ops(ops, nu: float):
    if nu == 0.0:
        return tuple(ops)
    sh = X + const(nu)
    out = []
    for q in ops:
        out.append(VectorField(
            simplify(substitute(q.tau, "x", sh)),
            simplify(substitute(q.xi, "x", sh)),
            simplify(substitute(q.eta, "x", sh)),
            q.dep))
    return tuple(out)


def _norm_note(delta: float) -> tuple[str, ...]:
    if abs(abs(delta) - 1.0) < 1e-12:
        return ()
    return (f"delta={delta:.12g} normalizes to {math.copysign(1.0, delta):+.0f} "
            "by a scaling of the dependent variable",)


def classify_imaged(eq: ImagedEquation) -> ClassificationResult:
    """Match (H, F) against the imaged-class rows; returns the kernel case
    T1/0 when no template fits."""
    require_valid(eq)
    m = eq.m
    asm = eq.assumptions()
    box = {"x": (eq.domain.lo, eq.domain.hi)}

    def kernel(*notes: str) -> ClassificationResult:
        return ClassificationResult("T1/0", {},
                                    (tables._dt("v"),), tuple(notes))

    try:
        hfit = _fit_H_family(eq.H, eq.domain, asm)
    except _NoFit:
        return kernel()
    nu, p, q, k, delta = (hfit[n] for n in ("nu", "p", "q", "k", "delta"))

    def confirmed(row: int, params: dict, shift: float,
                  notes: tuple[str, ...] = ()) -> ClassificationResult | None:
        H_t = _shifted(tables.imaged_H(row, params), shift)
        F_t = _shifted(tables.imaged_F(row, params, m), shift)
        try:
            if not (num_equal(eq.H, H_t, box, 64, _CONFIRM_TOL)
                    and num_equal(eq.F, F_t, box, 64, _CONFIRM_TOL)):
                return None
        except EvalDomainError:
            return None
        ops = _shift_ops(tables.imaged_operators(row, params, m), shift)
        out_params = dict(params)
        if shift != 0.0:
            out_params["nu"] = shift
            notes = notes + ("template shifted by x -> x + nu, removable by "
                             "an equivalence translation",)
        notes = notes + _norm_note(params["delta"])
        return ClassificationResult(f"T1/{row}", out_params, ops, notes)

    if p == 0.0 and k == 0.0:
        # exponential rows 1 / 2: F must be constant
        try:
            c2, c0, a2 = _fit_F_poly(eq.F, eq.domain, 0.0)
        except _NoFit:
            return kernel()
        if c2 != 0.0 or a2 != 0.0:
            return kernel()
        alpha = tables.alpha_of(q, m)
        delta_eff = delta * math.exp(q * nu) if nu else delta
        if abs(c0 + alpha * alpha) < _ZERO_TOL:
            r = confirmed(2, {"delta": delta_eff, "q": q}, 0.0)
            if r:
                return r
        r = confirmed(1, {"delta": delta_eff, "q": q, "a1": c0}, 0.0)
        return r or kernel()

    if p == 0.0:
        # power row 3 (shift allowed); the template has no drift term
        if q != 0.0:
            return kernel("power-type H with an exponential drift factor "
                          "matches no row")
        try:
            c2, c0, a2 = _fit_F_poly(eq.F, eq.domain, nu)
        except _NoFit:
            return kernel()
        if c2 != 0.0 or c0 != 0.0:
            return kernel()
        if k == 0.0 and a2 == 0.0:
            return confirmed(2, {"delta": delta, "q": 0.0}, 0.0) or kernel()
        r = confirmed(3, {"delta": delta, "k": k, "a2": a2}, nu)
        return r or kernel()

    # Gaussian rows 4 / 5 / 6
    beta = tables.beta_of(p, m)
    if k == 0.0:
        shift = q / (2.0 * p)
        delta_eff = delta * math.exp(-p * shift * shift) if shift else delta
    else:
        if abs(q - 2.0 * p * nu) > 1e-7 * max(1.0, abs(q)):
            return kernel("Gaussian-power H with unmatched drift "
                          "(q != 2 p nu) matches no row")
        shift = nu
        delta_eff = delta * math.exp(-p * shift * shift) if shift else delta
    try:
        c2, c0, a2 = _fit_F_poly(eq.F, eq.domain, shift)
    except _NoFit:
        return kernel()
    if abs(c2 + beta * beta) > 1e-7 * max(1.0, beta * beta):
        return kernel()
    if k == 0.0 and a2 == 0.0:
        a3 = c0 / beta
        notes: tuple[str, ...] = ()
        if abs(a3 - (5.0 - m) / (1.0 - m)) < _ZERO_TOL:
            r = confirmed(6, {"delta": delta_eff, "p": p}, shift)
            if r:
                return r
        if m == 2.0 and abs(a3 - 5.0) < _ZERO_TOL:
            notes = ("a3=5 with m=2 is excluded from row 5 and is "
                     "point-equivalent to row 6",)
        r = confirmed(5, {"delta": delta_eff, "p": p, "a3": a3}, shift, notes)
        return r or kernel()
    c0_row4 = beta * (2.0 * k + 5.0 - m) / (1.0 - m)
    if abs(c0 - c0_row4) > 1e-7 * max(1.0, abs(c0_row4)):
        return kernel()
    r = confirmed(4, {"delta": delta_eff, "k": k, "p": p, "a2": a2}, shift)
    return r or kernel()


def classify_double_imaged(eq: DoubleImagedEquation) -> ClassificationResult:
    """Match (H, G) against the double-imaged rows."""
    require_valid(eq)
    asm = eq.assumptions()
    box = {"x": (eq.domain.lo, eq.domain.hi)}
    xs = _samples(eq.domain)

    def kernel(*notes: str) -> ClassificationResult:
        return ClassificationResult("T2/0", {},
                                    (tables._dt("w"),), tuple(notes))

    try:
        hfit = _fit_H_family(eq.H, eq.domain, asm)
    except _NoFit:
        return kernel()
    nu, p, q, k, delta = (hfit[n] for n in ("nu", "p", "q", "k", "delta"))

    def confirmed(row: int, params: dict, shift: float,
                  notes: tuple[str, ...] = ()) -> ClassificationResult | None:
        H_t = _shifted(tables.double_H(row, params), shift)
        G_t = _shifted(tables.double_G(row, params), shift)
        try:
            if not (num_equal(eq.H, H_t, box, 64, _CONFIRM_TOL)
                    and num_equal(eq.G, G_t, box, 64, _CONFIRM_TOL)):
                return None
        except EvalDomainError:
            return None
        ops = _shift_ops(tables.double_operators(row, params), shift)
        out_params = dict(params)
        if shift != 0.0:
            out_params["nu"] = shift
            notes = notes + ("template shifted by x -> x + nu",)
        notes = notes + _norm_note(params["delta"])
        return ClassificationResult(f"T2/{row}", out_params, ops, notes)

    def const_fit(e: Expr) -> float | None:
        vals = _eval_many(e, xs)
        if vals is None:
            return None
        c = sorted(vals)[len(vals) // 2]
        if max(abs(v - c) for v in vals) > _FIT_TOL * max(1.0, abs(c)):
            return None
        return c

    if p == 0.0 and k == 0.0:
        delta_eff = delta * math.exp(q * nu) if nu else delta
        b1 = const_fit(simplify(eq.G * exp(const(q) * X)))
        if b1 is None:
            # row 3 with k=0 keeps a pole in G even though H is constant
            if q == 0.0:
                r = _double_row3_from_G(eq, delta, box, confirmed)
                if r:
                    return r
            return kernel()
        if abs(b1 - q ** 4 / (4.0 * delta_eff)) < _ZERO_TOL:
            r = confirmed(2, {"delta": delta_eff, "q": q}, 0.0)
            if r:
                return r
        r = confirmed(1, {"delta": delta_eff, "q": q, "b1": b1}, 0.0)
        return r or kernel()

    if p == 0.0:
        if q != 0.0:
            return kernel()
        b2 = const_fit(simplify(eq.G * const(delta)
                                * pow_(X + const(nu), const(k + 4.0))))
        if b2 is None:
            return kernel()
        r = confirmed(3, {"delta": delta, "k": k, "b2": b2}, nu)
        return r or kernel()

    if k == 0.0:
        shift = q / (2.0 * p)
        delta_eff = delta * math.exp(-p * shift * shift) if shift else delta
    else:
        if abs(q - 2.0 * p * nu) > 1e-7 * max(1.0, abs(q)):
            return kernel()
        shift = nu
        delta_eff = delta * math.exp(-p * shift * shift) if shift else delta
    xhat = X + const(shift)
    if k == 0.0:
        probe = simplify(eq.G * const(delta_eff) * exp(const(p) * xhat ** 2)
                         / const(p * p)
                         - const(4 * p * p) * xhat ** 4 + const(20 * p) * xhat ** 2)
        b3 = const_fit(probe)
        if b3 is not None:
            if abs(b3 + 11.0) < _ZERO_TOL:
                r = confirmed(6, {"delta": delta_eff, "p": p}, shift)
                if r:
                    return r
            r = confirmed(5, {"delta": delta_eff, "p": p, "b3": b3}, shift)
            if r:
                return r
    # row 4 (with k possibly 0 when G carries the pole polynomial)
    P_wo_b2 = simplify(tables.t2_poly_P({"p": p, "k": k, "b2": 0.0}))
    probe = simplify(eq.G * const(delta_eff) * pow_(xhat, const(k + 4.0))
                     * exp(const(p) * xhat ** 2) - _shifted(P_wo_b2, shift))
    b2 = const_fit(probe)
    if b2 is None:
        return kernel()
    r = confirmed(4, {"delta": delta_eff, "k": k, "p": p, "b2": b2}, shift)
    return r or kernel()


def _double_row3_from_G(eq, delta, box, confirmed):
    """Row 3 with k=0: H is constant, the pole position must be read
    off G'/G = -(k+4)/(x+nu)."""
    xs = _samples(eq.domain)
    s_expr = simplify(diff(eq.G, "x") / eq.G)
    sv = _eval_many(s_expr, xs)
    if sv is None or any(abs(v) < 1e-12 for v in sv):
        return None
    rows = [[1.0, -s] for s in sv]
    coef, res = _lstsq(rows, [s * x for s, x in zip(sv, xs)])
    if res > _FIT_TOL:
        return None
    slope_inv, nu = float(coef[0]), float(coef[1])
    k = -slope_inv - 4.0
    if abs(k) < _ZERO_TOL:
        k = 0.0
    vals = _eval_many(simplify(eq.G * const(delta)
                               * pow_(X + const(nu), const(k + 4.0))), xs)
    if vals is None:
        return None
    b2 = sorted(vals)[len(vals) // 2]
    return confirmed(3, {"delta": delta, "k": k, "b2": b2},
                     0.0 if abs(nu) < _ZERO_TOL else nu)


# -- initial class ---------------------------------------------------------------

def _log_linear(e: Expr, domain: Interval, basis: list[Expr]) -> tuple[list[float], float] | None:
    """Fit log|e| = sum c_i basis_i(x); returns coefficients and residual."""
    xs = _samples(domain)
    ev = _eval_many(e, xs)
    if ev is None or any(v == 0.0 for v in ev):
        return None
    rows = []
    for xv in xs:
        row = []
        for b in basis:
            try:
                row.append(compile_expr(b, ("x",))((xv,)))
            except EvalDomainError:
                return None
        rows.append(row)
    coef, res = _lstsq(rows, [math.log(abs(v)) for v in ev])
    return [float(c) for c in coef], res


def classify_initial(eq: RDEquation) -> ClassificationResult:
    """Match a gauged-class equation (f=g) against the tabulated cases."""
    require_valid(eq)
    if eq.f != eq.g:
        raise ValueError("classification applies to the gauged class f=g")
    m = eq.m
    box = {"x": (eq.domain.lo, eq.domain.hi)}
    ONE_B = [const(1), X]

    def kernel(*notes: str) -> ClassificationResult:
        return ClassificationResult("T3/0", {},
                                    (tables._dt("u"),), tuple(notes))

    def confirmed(case: str, params: dict,
                  notes: tuple[str, ...] = ()) -> ClassificationResult | None:
        f_t, h_t = tables.initial_fh(case, params, m)
        try:
            if not (num_equal(eq.f, f_t, box, 64, _CONFIRM_TOL)
                    and num_equal(eq.h, h_t, box, 64, _CONFIRM_TOL)):
                return None
        except EvalDomainError:
            return None
        ops = tables.initial_operators(case, params, m)
        return ClassificationResult(f"T3/{case}", dict(params), ops,
                                    notes + _norm_note(params["delta"]))

    # constant f
    fit_f = _log_linear(eq.f, eq.domain, ONE_B)
    if fit_f is not None and fit_f[1] <= _FIT_TOL and abs(fit_f[0][0]) < 1e-10 \
            and abs(fit_f[0][1]) < _ZERO_TOL:
        fit_h = _log_linear(eq.h, eq.domain, ONE_B)
        if fit_h is None or fit_h[1] > _FIT_TOL:
            return kernel()
        c, q = fit_h[0]
        mid = 0.5 * (eq.domain.lo + eq.domain.hi)
        sgn = 1.0 if compile_expr(eq.h, ("x",))((mid,)) > 0 else -1.0
        delta = sgn * math.exp(c)
        if abs(q) < _ZERO_TOL:
            return confirmed("2.1", {"delta": delta}) or kernel()
        notes = () if q == 1.0 else (
            "q normalizes to 1 by a scaling equivalence",)
        return confirmed("1.1", {"delta": delta, "q": q}, notes) or kernel()

    # f = e^x family
    if fit_f is not None and fit_f[1] <= _FIT_TOL and abs(fit_f[0][0]) < 1e-10 \
            and abs(fit_f[0][1] - 1.0) < 1e-10:
        fit_h = _log_linear(eq.h, eq.domain, ONE_B)
        if fit_h is None or fit_h[1] > _FIT_TOL:
            return kernel()
        c, r = fit_h[0]
        mid = 0.5 * (eq.domain.lo + eq.domain.hi)
        sgn = 1.0 if compile_expr(eq.h, ("x",))((mid,)) > 0 else -1.0
        delta = sgn * math.exp(c)
        if abs(r - 1.0) < _ZERO_TOL:
            return confirmed("2.2", {"delta": delta}) or kernel()
        if abs(r - m) < _ZERO_TOL:
            return ClassificationResult(
                "T3/2.2", {"delta": delta, "r": r}, (tables._dt("u"),),
                ("r=m is excluded from case 1.3; the equation is "
                 "point-equivalent to case 2.2 (operators not instantiated)",))
        return confirmed("1.3", {"delta": delta, "r": r}) or kernel()

    # f = cos^2 x
    if num_equal(eq.f, func("cos", X) ** 2, box, 48, _CONFIRM_TOL):
        ratio = simplify(eq.h / func("abs", func("cos", X)) ** const(m + 1.0))
        fit_h = _log_linear(ratio, eq.domain, ONE_B)
        if fit_h is None or fit_h[1] > _FIT_TOL:
            return kernel()
        c, q = fit_h[0]
        mid = 0.5 * (eq.domain.lo + eq.domain.hi)
        sgn = 1.0 if compile_expr(ratio, ("x",))((mid,)) > 0 else -1.0
        delta = sgn * math.exp(c)
        return confirmed("1.2", {"delta": delta, "q": q}) or kernel()

    # f = x^lambda
    fit_pow = _log_linear(eq.f, eq.domain, [const(1), ln(X)])
    if fit_pow is not None and fit_pow[1] <= _FIT_TOL and abs(fit_pow[0][0]) < 1e-10:
        lam = fit_pow[0][1]
        fit_h = _log_linear(eq.h, eq.domain, [const(1), ln(X)])
        if fit_h is None or fit_h[1] > _FIT_TOL:
            return kernel()
        c, gam = fit_h[0]
        if abs(gam) < _ZERO_TOL:
            gam = 0.0
        mid = 0.5 * (eq.domain.lo + eq.domain.hi)
        sgn = 1.0 if compile_expr(eq.h, ("x",))((mid,)) > 0 else -1.0
        delta = sgn * math.exp(c)
        excluded = [(0.0, 0.0), (2.0, m + 1.0)]
        if m == 2.0:
            excluded += [(-6.0, -9.0), (2.0, 3.0), (8.0, 12.0)]
        for le, ge in excluded:
            if abs(lam - le) < _ZERO_TOL and abs(gam - ge) < _ZERO_TOL:
                return ClassificationResult(
                    "T3/2.1", {"delta": delta, "lam": lam, "gam": gam},
                    tables.initial_operators("2.1", {"delta": delta}, m),
                    (f"(lambda,gamma)=({lam:g},{gam:g}) is equivalent to the "
                     "constant-coefficient case via lambda -> 2-lambda, "
                     "gamma -> gamma+(m+1)(1-lambda)",))
        return confirmed("3.1", {"delta": delta, "lam": lam, "gam": gam}) or kernel()

    # remaining shapes are driven by the image F = -(sqrt|f|)_xx / sqrt|f|
    try:
        rt, _, asm = sqrt_resolved(eq.f, eq.domain, (eq.h,))
        F = simplify(-diff(diff(rt, "x", asm), "x", asm) / rt, asm)
        c2, c0, a2f = _fit_F_poly(F, eq.domain, 0.0)
    except Exception:
        return kernel()

    if c2 == 0.0 and c0 == 0.0 and a2f > 0.25:
        # f = x cos(rho ln x)^2
        rho = math.sqrt(4.0 * a2f - 1.0) / 2.0
        cosln = func("cos", const(rho) * ln(X))
        if not num_equal(eq.f, X * cosln ** 2, box, 48, _CONFIRM_TOL):
            return kernel()
        ratio = simplify(eq.h / func("abs", cosln) ** const(m + 1.0))
        fit_h = _log_linear(ratio, eq.domain, [const(1), ln(X)])
        if fit_h is None or fit_h[1] > _FIT_TOL:
            return kernel()
        c, l = fit_h[0]
        mid = 0.5 * (eq.domain.lo + eq.domain.hi)
        sgn = 1.0 if compile_expr(ratio, ("x",))((mid,)) > 0 else -1.0
        delta = sgn * math.exp(c)
        return confirmed("3.2", {"delta": delta, "rho": rho, "l": l}) or kernel()

    if c2 >= 0.0:
        return kernel()
    beta = math.sqrt(-c2)
    p = beta * (m - 1.0) / 2.0
    if a2f > 0.25:
        return kernel("oscillatory Whittaker branch (a2 > 1/4) is not "
                      "instantiated")
    kappa = c0 / (4.0 * beta)
    mu = math.sqrt(1.0 - 4.0 * a2f) / 4.0
    w = func("whitM", const(kappa), const(mu), const(beta) * X ** 2)
    ratio = simplify(eq.h / (exp(const(p) * X ** 2)
                             * func("abs", w) ** const(m + 1.0)))
    fit_h = _log_linear(ratio, eq.domain, [const(1), ln(X)])
    if fit_h is None or fit_h[1] > _FIT_TOL:
        return kernel()
    c, s = fit_h[0]
    mid = 0.5 * (eq.domain.lo + eq.domain.hi)
    sgn = 1.0 if compile_expr(ratio, ("x",))((mid,)) > 0 else -1.0
    delta = sgn * math.exp(c)
    if abs(mu - 0.25) < 1e-9 and abs(s + (m + 1.0) / 2.0) < 1e-9:
        kappa3 = (5.0 - m) / (4.0 * (1.0 - m))
        if abs(kappa - kappa3) < 1e-9:
            r = confirmed("6", {"delta": delta, "p": p})
            if r:
                return r
        r = confirmed("5", {"delta": delta, "p": p, "a3": 4.0 * kappa})
        if r:
            return r
    # general Whittaker case with s free
    a2_tab = (1.0 - 16.0 * mu * mu) / 4.0
    if abs(kappa - (s + 3.0) / (2.0 * (1.0 - m))) > 1e-7 * max(1.0, abs(kappa)):
        return kernel()
    r = confirmed("4", {"delta": delta, "p": p, "s": s, "a2": a2_tab})
    return r or kernel()


# -- admissible-transformation subclasses -----------------------------------------

ADMISSIBLE_CLASSES = ("trivial", "E1", "E2", "E3", "E4")


def classify_admissible(form: AdmissibleForm, m: float,
                        zero_tol: float = 1e-12) -> str:
    """Partition of the admissible-form family by the invariants
    (K2, K1, K0) and the side conditions on (k, kappa, p, q, nu):

      trivial: (K2, K1) != (0, 0), or the side conditions fail
      E1: K0 != 0, k = kappa = p = 0
      E2: K0 != 0, k = kappa = 0, p != 0
      E3: K0 = 0, (k, kappa) != (0, 0), q = 2 p nu
      E4: K0 = k = kappa = 0
    """
    if m in (0.0, 1.0, 2.0):
        raise ValueError("the admissible-transformation partition assumes "
                         "m not in {0, 1, 2}")
    K2, K1, K0 = form.K_values(m)

    def is_zero(v: float) -> bool:
        return abs(v) <= zero_tol

    if not (is_zero(K2) and is_zero(K1)):
        return "trivial"
    if is_zero(form.k) and is_zero(form.kappa):
        if is_zero(K0):
            return "E4"
        return "E1" if is_zero(form.p) else "E2"
    if is_zero(K0) and is_zero(form.q - 2.0 * form.p * form.nu):
        return "E3"
    return "trivial"


def classify_admissible_result(form: AdmissibleForm, m: float) -> ClassificationResult:
    """Partition outcome as a serializable result with an "adm/..." case id."""
    label = classify_admissible(form, m)
    K2, K1, K0 = form.K_values(m)
    params = dict(form.as_dict())
    params.update({"K2": K2, "K1": K1, "K0": K0, "m": m})
    return ClassificationResult(f"adm/{label}", params)


def classify(eq: Equation) -> ClassificationResult:
    """Dispatch on the equation class."""
    if isinstance(eq, ImagedEquation):
        return classify_imaged(eq)
    if isinstance(eq, DoubleImagedEquation):
        return classify_double_imaged(eq)
    if isinstance(eq, RDEquation):
        return classify_initial(eq)
    raise TypeError(f"cannot classify {type(eq).__name__}")
