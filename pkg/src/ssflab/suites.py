"""Seeded verification suites behind the command-line subcommands.

Every suite takes a validated parameter dict plus a seed and returns an
:class:`~ssflab.reports.ExperimentReport`.  All randomness derives from
``(seed, suite tag, trial index)`` streams, so reports are deterministic for
fixed configuration regardless of worker count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import dirac, doi, functions, scattering, ssf
from .reports import (
    ExperimentReport,
    check_flag,
    check_gt,
    check_info,
    check_le,
    merge_reports,
)
from .spectral import eig_hermitian
from .utils import random_hermitian, rng_from

__all__ = [
    "SUITE_RUNNERS",
    "suite_all",
    "suite_birman_krein",
    "suite_dirac_schatten",
    "suite_doi_check",
    "suite_rm_cert",
    "suite_trace_check",
]

_TRACE_TAG = 11
_DOI_TAG = 12
_CERT_TAG = 13
_DIRAC_TAG = 14
_BK_TAG = 15


def _map_ordered(fn, items, jobs: int) -> list:
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _random_pair(rng, dim: int, scale: float):
    a0 = random_hermitian(rng, dim)
    v = scale * random_hermitian(rng, dim)
    return eig_hermitian(a0), eig_hermitian(a0 + v), v


def _function_families(rng) -> list:
    """Five scalar test families with randomized parameters."""
    cubic = functions.polynomial(rng.uniform(-1.0, 1.0, size=4))
    bump = functions.gaussian_bump(
        center=float(rng.uniform(-1.0, 1.0)),
        width=float(rng.uniform(0.5, 1.5)),
        height=float(rng.uniform(0.5, 2.0)),
    )
    lorentz = functions.squared_lorentzian()
    resolvent = functions.resolvent_function(
        complex(rng.uniform(-1.0, 1.0), rng.uniform(1.0, 2.0)), 1, part="re"
    )
    compact = functions.bump_c2(float(rng.uniform(1.0, 3.0)))
    return [cubic, bump, lorentz, resolvent, compact]


# ---------------------------------------------------------------------------
# trace-check


def suite_trace_check(seed: int, params: dict, jobs: int = 1) -> ExperimentReport:
    t0 = time.perf_counter()
    dims = params["dims"]
    trials = params["trials"]
    det_trials = params["det_trials"]
    det_points = params["det_points"]
    maps = {m: ssf.build_power_map(m, 1.0) for m in (3, 5)}

    def one_trial(idx: int):
        rng = rng_from(seed, _TRACE_TAG, idx)
        dim = int(dims[idx % len(dims)])
        d0, d, _ = _random_pair(rng, dim, 0.4)
        worst = 0.0
        for f in _function_families(rng):
            lhs, rhs = ssf.trace_formula_sides(d0, d, f)
            scale_ref = max(abs(lhs), abs(rhs), 1.0)
            worst = max(worst, abs(lhs - rhs) / scale_ref)
        mismatches = 0
        for m in (3, 5):
            got = ssf.ssf_via_invariance(d0, d, maps[m])
            if not ssf.steps_equal(ssf.ssf_counting(d0, d), got, bp_tol=1e-9):
                mismatches += 1
        return worst, mismatches

    results = _map_ordered(one_trial, range(trials), jobs)
    worst_trace = max(r[0] for r in results)
    total_mismatch = sum(r[1] for r in results)

    def one_det_trial(idx: int):
        rng = rng_from(seed, _TRACE_TAG, 10_000 + idx)
        d0, d, v = _random_pair(rng, 8, 0.4)
        counting = ssf.ssf_counting(d0, d)
        bps = counting.breakpoints
        lo = bps[0] - 1.0
        hi = bps[-1] + 1.0
        candidates = np.concatenate(
            [[lo, hi], 0.5 * (bps[:-1] + bps[1:]), bps[:-1] + 0.75 * np.diff(bps)]
        )
        worst = 0.0
        used = 0
        for lam in candidates:
            if used >= det_points:
                break
            gap = np.abs(
                np.concatenate([d0.eigenvalues, d.eigenvalues]) - lam
            ).min()
            if gap < 1e-3:
                continue
            xi = ssf.ssf_via_determinant(d0, v, float(lam))
            worst = max(worst, abs(xi - counting(float(lam))))
            used += 1
        return worst

    det_results = _map_ordered(one_det_trial, range(det_trials), jobs)
    records = (
        check_le("trace_formula.max_relative_residual", worst_trace, 1e-10),
        check_le("invariance.step_mismatches", float(total_mismatch), 0.0),
        check_le("determinant.max_counting_deviation", max(det_results), 1e-6),
    )
    config = dict(params)
    return ExperimentReport(
        subcommand="trace-check",
        seed=seed,
        config=config,
        records=records,
        timings={"total_s": time.perf_counter() - t0},
    )


# ---------------------------------------------------------------------------
# doi-check


def suite_doi_check(seed: int, params: dict, jobs: int = 1) -> ExperimentReport:
    t0 = time.perf_counter()
    dim = params["dim"]
    trials = params["trials"]
    split_trials = params["split_trials"]
    configs = [(int(c["m"]), complex(c["z"][0], c["z"][1])) for c in params["mz_list"]]

    records = []
    for m, z in configs:
        tag = f"m{m}"

        def one_trial(idx: int, m=m, z=z):
            regenerations = 0
            for attempt in range(50):
                rng = rng_from(seed, _DOI_TAG, m, idx, attempt)
                d0, d, _ = _random_pair(rng, dim, 0.3)
                f = functions.gaussian_bump(
                    center=float(rng.uniform(-0.5, 0.5)),
                    width=float(rng.uniform(0.8, 1.5)),
                )
                try:
                    return doi.doi_identity_residual(d0, d, f, m, z), regenerations
                except doi.AntidiagonalCollisionError:
                    regenerations += 1
            raise RuntimeError("exhausted regeneration attempts for a DOI pair")

        results = _map_ordered(one_trial, range(trials), jobs)
        records.append(
            check_le(
                f"identity.{tag}.max_residual", max(r[0] for r in results), 1e-8
            )
        )
        records.append(
            check_info(
                f"identity.{tag}.collision_regenerations",
                float(sum(r[1] for r in results)),
            )
        )

    # direct vs factored agreement away from the coincidence band
    rng = rng_from(seed, _DOI_TAG, 999)
    f = functions.gaussian_bump(0.1, 1.0, 1.0)
    kd = doi.resolvent_kernel(f, 3, 2j, mode="direct")
    kf = doi.resolvent_kernel(f, 3, 2j, mode="factored")
    lam = rng.uniform(-5.0, 5.0, size=400)
    mu = rng.uniform(-5.0, 5.0, size=400)
    keep = np.abs(lam - mu) > 2e-5 * (1.0 + np.abs(lam))
    vd = doi.kernel_eval(kd, lam[keep], mu[keep])
    vf = doi.kernel_eval(kf, lam[keep], mu[keep])
    agree = float((np.abs(vd - vf) / np.maximum(np.abs(vd), 1e-30)).max())
    records.append(check_le("kernel.direct_vs_factored_rel", agree, 1e-9))

    def one_split(idx: int):
        rng = rng_from(seed, _DOI_TAG, 5000 + idx)
        d0, d, _ = _random_pair(rng, 10, 0.3)
        return doi.resolvent_cutoff_split(d0, d, 3, 1.0).residual

    split_results = _map_ordered(one_split, range(split_trials), jobs)
    records.append(check_le("cutoff_split.max_residual", max(split_results), 1e-10))

    return ExperimentReport(
        subcommand="doi-check",
        seed=seed,
        config=dict(params),
        records=tuple(records),
        timings={"total_s": time.perf_counter() - t0},
    )


# ---------------------------------------------------------------------------
# rm-cert


def _hypotheses_grid(inner: float, outer: float, n_inner: int, n_tail: int):
    pos = np.geomspace(inner, outer, n_tail + 1)[1:]
    return np.concatenate([-pos[::-1], np.linspace(-inner, inner, n_inner), pos])


def suite_rm_cert(seed: int, params: dict, jobs: int = 1) -> ExperimentReport:
    t0 = time.perf_counter()
    grid_n = params["grid_n"]
    records = []

    for m, r, a in [tuple(c) for c in params["bounded_certs"]]:
        p = doi.CofactorPolynomial(int(m), complex(0.0, a))
        cert = doi.cofactor_lower_bound_cert(p, doi.BoundedRegion(r), grid_n)
        records.append(
            check_gt(
                f"bounded.m{int(m)}_r{r:g}_a{a:g}.lower_bound",
                cert.c_observed - cert.slack,
                0.0,
            )
        )
    for m, r, a, lam_max in [tuple(c) for c in params["exterior_certs"]]:
        p = doi.CofactorPolynomial(int(m), complex(0.0, a))
        cert = doi.cofactor_lower_bound_cert(
            p, doi.ExteriorRegion(r, lam_max), grid_n
        )
        records.append(
            check_gt(
                f"exterior.m{int(m)}_r{r:g}_a{a:g}.lower_bound",
                cert.c_observed - cert.slack,
                0.0,
            )
        )

    # violated largeness/smallness conditions must visibly fail
    ctrl_b = doi.cofactor_lower_bound_cert(
        doi.CofactorPolynomial(3, 0.01j), doi.BoundedRegion(1.0), grid_n
    )
    records.append(check_flag("control.bounded_small_a_fails", ctrl_b.passed, False))
    ctrl_e = doi.cofactor_lower_bound_cert(
        doi.CofactorPolynomial(3, 10.0j), doi.ExteriorRegion(1.0, 100.0), grid_n
    )
    records.append(check_flag("control.exterior_large_a_fails", ctrl_e.passed, False))

    axis = _hypotheses_grid(3.0, params["grid_edge"], 401, 160)
    compact = doi.resolvent_kernel(
        functions.bump_c2(1.0), 3, 10.0j, mode="factored"
    )
    tail = doi.resolvent_kernel(
        functions.product(
            functions.smoothstep_cutoff(1.0), functions.power_shift_inverse(3)
        ),
        3,
        0.01j,
        mode="factored",
    )
    for name, kernel in (("compact_support", compact), ("tail_power", tail)):
        rep = doi.kernel_hypotheses_report(kernel, axis, axis, region_r=2.0)
        records.append(
            check_flag(f"hypotheses.{name}.sup_abs_finite", bool(np.isfinite(rep.sup_abs)))
        )
        records.append(
            check_flag(
                f"hypotheses.{name}.weighted_dlambda_finite",
                bool(np.isfinite(rep.sup_weighted_dlambda)),
            )
        )
        records.append(
            check_le(f"hypotheses.{name}.limit_mismatch", rep.limit_mismatch, 1e-6)
        )
        records.append(
            check_info(f"hypotheses.{name}.dlambda_tail_exponent", rep.dlambda_tail_exponent)
        )

    return ExperimentReport(
        subcommand="rm-cert",
        seed=seed,
        config=dict(params),
        records=tuple(records),
        timings={"total_s": time.perf_counter() - t0},
    )


# ---------------------------------------------------------------------------
# dirac-schatten


def suite_dirac_schatten(seed: int, params: dict, jobs: int = 1) -> ExperimentReport:
    t0 = time.perf_counter()
    z = complex(params["z"][0], params["z"][1])
    mass = params["mass"]
    mpow = params["mpow"]
    records = []

    def one_identity(args):
        n, idx = args
        rng = rng_from(seed, _DIRAC_TAG, n, idx)
        model = dirac.LatticeModel(d=1, n=n, h=dirac.balanced_spacing(n), mass=mass)
        v0 = dirac.random_bounded_potential(model, rng, params["v0_bound"])
        v = dirac.random_decaying_potential(model, rng, params["decay_c"], params["rho"])
        rep = dirac.resolvent_power_difference(model, v0, v, z, mpow)
        comm = dirac.commutator_identity_residual(
            model, v0, v, params["r"], params["k"], z
        )
        return rep.relative_residual, comm

    cases = [(n, i) for n in params["identity_n_list"] for i in range(params["seeds"])]
    results = _map_ordered(one_identity, cases, jobs)
    records.append(
        check_le(
            "identity.power_expansion.max_rel",
            max(r[0] for r in results),
            1e-9,
        )
    )
    records.append(
        check_le(
            "identity.weight_commutator.max_rel",
            max(r[1] for r in results),
            1e-10,
        )
    )

    n_list = params["refinement_n_list"]
    study_22 = dirac.schatten_refinement_study(1, 2.0, 2, z, [1.5], n_list, mass=mass)
    records.append(
        check_flag("threshold.r2k2.p1_5_stabilizes", study_22.stabilized[1.5])
    )
    study_11 = dirac.schatten_refinement_study(1, 1.0, 1, z, [1.0], n_list, mass=mass)
    records.append(check_flag("threshold.r1k1.p1_grows", study_11.grows[1.0]))

    # threshold law across (r, k) pairs at fixed spacing (volume refinement)
    law_h = params["law_h"]
    for r_law, k_law in ((1.0, 1), (2.0, 1), (1.0, 2), (2.0, 3)):
        p_star = 1.0 / min(r_law, float(k_law))
        p_stab = max(1.0, 1.25 * p_star)
        p_list = [p_stab] + ([p_star] if p_star >= 1.0 and p_star != p_stab else [])
        study = dirac.schatten_refinement_study(
            1, r_law, k_law, z, p_list, n_list, mass=mass, h=law_h
        )
        tag = f"law.r{r_law:g}k{k_law}"
        records.append(check_flag(f"{tag}.p{p_stab:g}_stabilizes", study.stabilized[p_stab]))
        if p_star >= 1.0 and p_star != p_stab:
            records.append(check_flag(f"{tag}.p{p_star:g}_grows", study.grows[p_star]))

    n_fact = params["factorization_n"]
    model = dirac.LatticeModel(d=1, n=n_fact, h=dirac.balanced_spacing(n_fact), mass=mass)
    rng = rng_from(seed, _DIRAC_TAG, 777)
    v4 = dirac.random_decaying_potential(model, rng, params["decay_c"], params["rho"])
    rep4 = dirac.weighted_factorization_report(model, v4, params["k"], mpow, z)
    records.append(check_flag("factorization.rho4.feasible", rep4.feasible))
    records.append(check_flag("factorization.rho4.holder_ok", bool(rep4.holder_ok)))
    records.append(
        check_le(
            "factorization.rho4.residual_rel",
            rep4.factorization_residual / max(rep4.direct_trace_norm, 1e-30),
            1e-9,
        )
    )
    v1 = dirac.random_decaying_potential(model, rng, params["decay_c"], 1.0)
    rep1 = dirac.weighted_factorization_report(model, v1, params["k"], mpow, z)
    records.append(check_flag("factorization.rho_eq_d.infeasible", rep1.feasible, False))

    sups, stable = dirac.commutator_decay_study(
        1, params["r"], params["decay_n_list"], mass=mass
    )
    records.append(check_flag("commutator_decay.sup_stable", stable))
    records.append(check_info("commutator_decay.sup_constant", sups[-1]))

    return ExperimentReport(
        subcommand="dirac-schatten",
        seed=seed,
        config=dict(params),
        records=tuple(records),
        timings={"total_s": time.perf_counter() - t0},
    )


# ---------------------------------------------------------------------------
# birman-krein


def _build_potential(spec: dict) -> scattering.LatticeScatteringModel:
    if spec["kind"] == "single":
        return scattering.LatticeScatteringModel.single_site(
            spec["value"], spec.get("site", 0)
        )
    return scattering.LatticeScatteringModel.centered(spec["values"])


def suite_birman_krein(seed: int, params: dict, jobs: int = 1) -> ExperimentReport:
    t0 = time.perf_counter()
    eps_schedule = params["eps_schedule"]
    models = [_build_potential(s) for s in params["potentials"]]

    def sweep(args):
        idx, model = args
        return idx, scattering.band_sweep(
            model, params["band_points"], params["band_margin"], eps_schedule
        )

    sweeps = _map_ordered(sweep, list(enumerate(models)), jobs)
    rows = []
    worst_residual = 0.0
    worst_unitarity = 0.0
    for idx, recs in sweeps:
        for rec in recs:
            worst_residual = max(worst_residual, rec.residual)
            worst_unitarity = max(worst_unitarity, rec.unitarity)
            rows.append(
                {
                    "potential": idx,
                    "lam": rec.lam,
                    "det_re": rec.det_s.real,
                    "det_im": rec.det_s.imag,
                    "xi": rec.xi,
                    "residual": rec.residual,
                }
            )

    records = [
        check_le("band.max_residual", worst_residual, 1e-5),
        check_le("band.max_unitarity_defect", worst_unitarity, 1e-8),
    ]

    attractive = scattering.LatticeScatteringModel.single_site(-1.5)
    for lam in (-2.25, -2.75):
        xi = scattering.ssf_scattering(attractive, lam, eps_schedule)
        count = scattering.bound_state_count_below(attractive, lam, l_trunc=2000)
        records.append(
            check_le(
                f"below_band.lam{lam:g}.count_deviation",
                abs(xi + count),
                1e-6,
            )
        )

    return ExperimentReport(
        subcommand="birman-krein",
        seed=seed,
        config=dict(params),
        records=tuple(records),
        tables={"band_sweep": rows},
        timings={"total_s": time.perf_counter() - t0},
    )


# ---------------------------------------------------------------------------


def suite_all(seed: int, all_params: dict, jobs: int = 1) -> ExperimentReport:
    parts = {
        "trace": suite_trace_check(seed, all_params["trace-check"], jobs),
        "doi": suite_doi_check(seed, all_params["doi-check"], jobs),
        "cert": suite_rm_cert(seed, all_params["rm-cert"], jobs),
        "dirac": suite_dirac_schatten(seed, all_params["dirac-schatten"], jobs),
        "bk": suite_birman_krein(seed, all_params["birman-krein"], jobs),
    }
    return merge_reports("all", seed, parts)


SUITE_RUNNERS = {
    "trace-check": suite_trace_check,
    "doi-check": suite_doi_check,
    "rm-cert": suite_rm_cert,
    "dirac-schatten": suite_dirac_schatten,
    "birman-krein": suite_birman_krein,
}
