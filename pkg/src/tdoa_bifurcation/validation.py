"""Self-check report behind ``tdoa-bif validate``."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Tuple

import numpy as np

from .bifurcation import (
    asymptote_sum,
    asymptotes,
    build_quintic,
    lemma_identity_residual,
    meets_at_infinity_twice,
    residual_chain,
    sample_curve,
    verify_leading_form,
)
from .geometry import ReceiverConfig
from .localize import localize, localize_many
from .oracles import newton_cluster_localize, numeric_vs_exact_F, sign_map_compare
from .tdoa import ellipse_value, tau2_forward_array


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass
class ValidationReport:
    checks: List[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail} ({c.seconds:.2f}s)" for c in self.checks]
        npass = sum(c.passed for c in self.checks)
        lines.append(f"{npass}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail, "seconds": round(c.seconds, 3)}
                for c in self.checks
            ],
        }


def _random_points(cfg: ReceiverConfig, rng, n: int) -> np.ndarray:
    half = 3.0 * cfg.length_scale
    return cfg.points.mean(axis=0) + rng.uniform(-half, half, size=(n, 2))


def run_validation(cfg: ReceiverConfig, deep: bool = False, seed: int = 0) -> ValidationReport:
    rng = np.random.default_rng(seed)
    n_round = 10_000 if deep else 1_000
    n_oracle = 1_000 if deep else 50
    n_lemma = 10_000 if deep else 1_000
    grid = 200 if deep else 100
    report = ValidationReport()

    def run(name: str, fn: Callable[[], Tuple[bool, str]]):
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crash of the report
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        report.checks.append(Check(name, bool(ok), detail, time.perf_counter() - t0))

    curve = build_quintic(cfg)

    def degree():
        zero_hi = all(curve.F.homogeneous_component(d).is_zero() for d in (6, 7, 8))
        return curve.F.total_degree == 5 and zero_hi, f"total degree {curve.F.total_degree}"

    def leading():
        return verify_leading_form(cfg), "degree-5 part vs product form"

    def receivers():
        vals = [curve.F.eval(*m) for m in cfg.receivers]
        return all(v == curve.W8 for v in vals), f"F(m_i)/W^8 = {[str(v / curve.W8) for v in vals]}"

    def permutations():
        same = all(build_quintic(p).F == curve.F for p in cfg.permutations())
        return same, "F identical under the 6 receiver orderings"

    def asym():
        total = asymptote_sum(cfg)
        sum_ok = total == -cfg.W
        twice = [meets_at_infinity_twice(cfg, ln) for ln in asymptotes(cfg)]
        return sum_ok and all(twice), f"sum of lines = {total.to_string()}, double at infinity {twice}"

    def lemma():
        pts = rng.integers(-10**6, 10**6, size=(n_lemma, 2))
        dens = rng.integers(1, 1000, size=(n_lemma, 2))
        bad = sum(
            lemma_identity_residual(cfg, (Fraction(int(a), int(c)), Fraction(int(b), int(d)))) != 0
            for (a, b), (c, d) in zip(pts, dens)
        )
        return bad == 0, f"{bad}/{n_lemma} nonzero residuals"

    def roundtrip():
        x = _random_points(cfg, rng, n_round)
        taus = tau2_forward_array(cfg, x)
        b = localize_many(cfg, taus)
        with np.errstate(invalid="ignore"):
            err = np.fmin(
                np.hypot(b.sources[:, 0, 0] - x[:, 0], b.sources[:, 0, 1] - x[:, 1]),
                np.hypot(b.sources[:, 1, 0] - x[:, 0], b.sources[:, 1, 1] - x[:, 1]),
            )
        missed = int(np.sum(~(err < 1e-7)))
        a = ellipse_value(cfg, taus)
        sel = np.abs(a) > 1e-6 * float(cfg.W) ** 2
        wrong = int(np.sum(b.counts[sel] != np.where(a[sel] < 0, 1, 2)))
        return missed == 0 and wrong == 0, f"{missed} missed, {wrong} wrong counts of {n_round}"

    def oracle():
        x = _random_points(cfg, rng, n_oracle)
        taus = tau2_forward_array(cfg, x)
        bad = 0
        for tau in taus:
            r = localize(cfg, tau)
            o = newton_cluster_localize(cfg, tau, starts=256, rng=rng)
            if len(r) != len(o) or any(np.hypot(s[0] - q[0], s[1] - q[1]) > 1e-6 for s, q in zip(r.sources, o)):
                bad += 1
        return bad == 0, f"{bad}/{n_oracle} disagreements"

    def signmap():
        c = cfg.points.mean(axis=0)
        h = 3.0 * cfg.length_scale
        rep = sign_map_compare(cfg, (c[0] - h, c[0] + h, c[1] - h, c[1] + h), grid)
        return rep.ok, f"{rep.mismatches} mismatches, {rep.excluded} in bands, {rep.samples} samples"

    def numeric():
        dev = numeric_vs_exact_F(cfg, 1000 if deep else 200, rng=rng)
        return dev < 1e-7, f"max relative deviation {dev:.2e}"

    def sampling():
        arcs = sample_curve(cfg, 720)
        pts = np.vstack([a.points for a in arcs])
        fv = curve.value(pts[:, 0], pts[:, 1])
        gx, gy = curve.gradient(pts[:, 0], pts[:, 1])
        sampson = float(np.max(np.abs(fv) / np.hypot(gx, gy)))
        r2 = residual_chain(cfg, pts).r2
        chain = float(np.max(np.abs(r2))) / float(cfg.W) ** 2
        ok = len(arcs) == 3 and sampson < 1e-6 and chain < 1e-6
        return ok, f"{len(arcs)} arcs, max Sampson {sampson:.1e}, max ellipse residual {chain:.1e}"

    def gradient():
        x = _random_points(cfg, rng, 1000)
        h = 1e-6 * max(1.0, cfg.length_scale)
        fx = (curve.value(x[:, 0] + h, x[:, 1]) - curve.value(x[:, 0] - h, x[:, 1])) / (2 * h)
        fy = (curve.value(x[:, 0], x[:, 1] + h) - curve.value(x[:, 0], x[:, 1] - h)) / (2 * h)
        gx, gy = curve.gradient(x[:, 0], x[:, 1])
        rel = float(np.max(np.hypot(fx - gx, fy - gy) / np.hypot(gx, gy)))
        return rel < 1e-5, f"max relative gap {rel:.1e}"

    run("degree-5 certificate", degree)
    run("leading form", leading)
    run("receiver values", receivers)
    run("permutation invariance", permutations)
    run("asymptotes", asym)
    run("lemma identity", lemma)
    run("round-trip localization", roundtrip)
    run("newton oracle", oracle)
    run("sign map", signmap)
    run("numeric vs exact F", numeric)
    run("curve sampling", sampling)
    run("gradient vs differences", gradient)
    return report
