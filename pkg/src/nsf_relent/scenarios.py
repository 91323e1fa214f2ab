"""Scenario runners: audit, twin, sweep, perturb.

A scenario takes a ScenarioConfig, produces delimited artifacts (CSV time
series and snapshots, key=value summaries, a run manifest) plus SVG figures in
the output directory, and returns a RunResult whose checks determine the CLI
exit code.  All numeric output is printed with 17 significant digits so a
reload is bit-faithful; reruns with identical config and seed produce
byte-identical files.

Sweep and perturb members are independent solver runs and execute on a thread
pool (numpy releases the GIL in the kernels); the environment variable
NSF_RELENT_THREADS caps the worker count.  Each member writes only inside its
own subdirectory and the merged tables are written by the single coordinating
thread afterwards.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import pi
from pathlib import Path

import numpy as np

from . import __version__
from .audit import stability_audit
from .config import ScenarioConfig, canonical_text
from .errors import ConfigError
from .plotting import plot_csv
from .reference import ReferenceSolution, eval_reference, make_source_fn
from .relent import RelEntReport, bands_from_reference, d8_ledger, gronwall_fit
from .solver1d import Grid1D, budget_residuals, simulate, state_from_primitives
from .thermo import EssResBands, GasModel

__all__ = ["CheckResult", "RunResult", "run_scenario"]

_FMT = "{:.17g}"


def _fmt(v) -> str:
    return _FMT.format(float(v))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class RunResult:
    kind: str
    out_dir: Path
    checks: list[CheckResult] = field(default_factory=list)
    artifacts: list[Path] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed, detail: str = "") -> None:
        self.checks.append(CheckResult(name, bool(passed), detail))

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            suffix = f" ({c.detail})" if c.detail else ""
            out.append(f"[{status}] {c.name}{suffix}")
        return out


def _write_lines(path: Path, lines) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def _write_csv(path: Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return _write_lines(path, lines)


def _write_manifest(cfg: ScenarioConfig, out_dir: Path, extra: dict[str, str]) -> Path:
    model = cfg.model()
    lines = [
        f"config_hash={cfg.config_hash()}",
        f"version={__version__}",
        f"kind={cfg.kind}",
        f"model.a={_fmt(model.a)}",
        f"model.mu0={_fmt(model.mu0)}",
        f"model.mu1={_fmt(model.mu1)}",
        f"model.kappa0={_fmt(model.kappa0)}",
        f"model.kappa2={_fmt(model.kappa2)}",
        f"model.kappa3={_fmt(model.kappa3)}",
        f"model.family={model.family.name}",
        f"model.p_infty={_fmt(model.p_infty)}",
    ]
    lines += [f"{k}={v}" for k, v in sorted(extra.items())]
    lines.append("config:")
    lines.append(canonical_text(cfg.values).rstrip("\n"))
    return _write_lines(out_dir / "run_manifest.txt", lines)


def _initial_state(model: GasModel, grid: Grid1D, ref: ReferenceSolution, eps: float, wavenumber: int):
    """Reference fields at t = 0, density multiplied by (1 + eps sin(2 pi k x / L))."""
    g = eval_reference(ref, 0.0, grid.x)
    rho0 = g.r * (1.0 + eps * np.sin(2.0 * pi * wavenumber * grid.x / ref.L))
    return state_from_primitives(model, grid, 0.0, rho0, g.u, g.theta)


def _l2_errors(grid: Grid1D, traj, ref: ReferenceSolution):
    """L2-in-space errors of (rho, u, theta) against the reference at t_end."""
    g = eval_reference(ref, traj.times[-1], grid.x)
    st = traj.states[-1]
    pr = traj.prims[-1]
    dx = grid.dx

    def l2(a, b):
        return float(np.sqrt(np.sum((a - b) ** 2) * dx))

    return l2(st.rho, g.r), l2(pr.u, g.u), l2(pr.theta, g.theta)


@dataclass
class TwinRunArtifacts:
    report: RelEntReport
    budget: object
    errors: tuple[float, float, float]
    max_I: float
    margin_min: float


def _twin_run(
    cfg: ScenarioConfig,
    n: int,
    eps: float,
    out_dir: Path,
    n_outputs: int | None = None,
    bands: EssResBands | None = None,
) -> TwinRunArtifacts:
    """One forced twin run; writes the per-run CSV artifacts into out_dir."""
    model = cfg.model()
    grid = cfg.grid(n=n)
    ref = cfg.reference()
    if grid.bc != "periodic":
        raise ConfigError("grid.bc: twin runs use manufactured forcing and need periodic bc")
    if abs(grid.L - ref.L) > 1.0e-14 * max(grid.L, ref.L):
        raise ConfigError(f"grid.L={grid.L} and ref.L={ref.L} must match for twin runs")
    sources = make_source_fn(model, ref)
    state0 = _initial_state(model, grid, ref, eps, cfg.get_int("perturb.wavenumber"))
    outputs = n_outputs if n_outputs is not None else cfg.n_outputs()
    traj = simulate(
        model,
        grid,
        state0,
        t_end=cfg.get_float("time.t_end"),
        cfl=cfg.get_float("time.cfl"),
        n_outputs=outputs,
        sources=sources,
    )
    if bands is None:
        bands = bands_from_reference(ref, traj.times, grid.x)
    report = d8_ledger(model, grid, traj, ref, sources=sources, bands=bands)
    budget = budget_residuals(model, grid, traj, sources=sources)

    _write_csv(
        out_dir / "timeseries.csv",
        ["t", "I", "kinetic", "entropy_part", "dissipation_acc", "margin", "res_fraction"],
        report.csv_rows(),
    )
    st, pr = traj.states[-1], traj.prims[-1]
    _write_csv(
        out_dir / "snapshot_final.csv",
        ["x", "rho", "u", "theta", "p", "s", "sigma"],
        zip(grid.x, st.rho, pr.u, pr.theta, pr.p, pr.s, pr.sigma),
    )
    return TwinRunArtifacts(
        report=report,
        budget=budget,
        errors=_l2_errors(grid, traj, ref),
        max_I=float(np.max(report.I)),
        margin_min=float(np.min(report.margin)),
    )


def _order_fit(ns, values) -> float:
    """Least-squares convergence order of values against dx = L/n."""
    ns = np.asarray(ns, dtype=float)
    vals = np.maximum(np.asarray(values, dtype=float), 1.0e-300)
    slope = np.polyfit(np.log(1.0 / ns), np.log(vals), 1)[0]
    return float(slope)


def _pool_size(jobs: int) -> int:
    cap = os.environ.get("NSF_RELENT_THREADS")
    if cap is not None:
        try:
            return max(1, min(jobs, int(cap)))
        except ValueError as exc:
            raise ConfigError(f"NSF_RELENT_THREADS: expected an integer, got {cap!r}") from exc
    return max(1, min(jobs, os.cpu_count() or 1))


# -- scenario bodies ---------------------------------------------------------


def _run_audit(cfg: ScenarioConfig, out_dir: Path) -> RunResult:
    result = RunResult(kind="audit", out_dir=out_dir)
    model = cfg.model()
    box = (
        (cfg.get_float("audit.rho_lo"), cfg.get_float("audit.rho_hi")),
        (cfg.get_float("audit.theta_lo"), cfg.get_float("audit.theta_hi")),
    )
    report = stability_audit(model, box=box, samples=cfg.get_int("audit.samples"), seed=cfg.seed)
    result.artifacts.append(_write_lines(out_dir / "audit_report.txt", report.lines()))
    result.artifacts.append(_write_manifest(cfg, out_dir, {}))
    detail = "; ".join(report.failures) if report.failures else (
        f"m4_c={report.constants['m4_c']:.6g}, w1_c={report.constants['w1_c']:.6g}"
    )
    result.check("audit.structural_and_stability", report.passed, detail)
    return result


def _gronwall_checks(result: RunResult, report: RelEntReport, floor: float, tag: str = ""):
    fit = gronwall_fit(report.t, report.I, floor)
    prefix = f"{tag}." if tag else ""
    if fit.verdict == fit.ZERO_VERDICT:
        result.check(f"{prefix}gronwall.zero_at_resolution", fit.bound_satisfied,
                     f"max I={np.max(report.I):.3g} <= floor={floor:.3g}")
    else:
        result.check(f"{prefix}gronwall.bound", fit.bound_satisfied,
                     f"c3={fit.c3:.4g}, floor={floor:.3g}")
        result.check(f"{prefix}gronwall.rate_finite", np.isfinite(fit.c3), f"c3={fit.c3:.4g}")
    return fit


def _common_twin_checks(result: RunResult, art: TwinRunArtifacts, tag: str = ""):
    prefix = f"{tag}." if tag else ""
    scale = 1.0 + float(np.max(np.abs(art.report.I)))
    result.check(
        f"{prefix}distance.integrand_nonnegative",
        art.report.integrand_min >= -1.0e-12 * scale,
        f"min integrand={art.report.integrand_min:.3g}",
    )
    result.check(
        f"{prefix}distance.residual_fraction",
        float(np.max(art.report.res_fraction)) <= 1.0e-12,
        f"max residual fraction={float(np.max(art.report.res_fraction)):.3g}",
    )
    result.check(
        f"{prefix}budget.mass_conserved",
        art.budget.mass_drift_rel <= 1.0e-12,
        f"relative drift={art.budget.mass_drift_rel:.3g}",
    )


def _run_twin(cfg: ScenarioConfig, out_dir: Path) -> RunResult:
    result = RunResult(kind="twin", out_dir=out_dir)
    eps = cfg.get_float("perturb.epsilon")
    n = cfg.get_int("grid.n")

    art = _twin_run(cfg, n, eps, out_dir)
    result.artifacts.append(out_dir / "timeseries.csv")
    result.artifacts.append(out_dir / "snapshot_final.csv")

    if eps > 0.0:
        zero = _twin_run(cfg, n, 0.0, out_dir / "floor_run")
        floor = max(zero.max_I, 1.0e-300)
    else:
        floor = max(art.max_I, 1.0e-300)

    _common_twin_checks(result, art)
    fit = _gronwall_checks(result, art.report, floor)
    result.artifacts.append(_write_lines(out_dir / "gronwall_summary.txt", fit.lines()))
    result.artifacts.append(_write_manifest(cfg, out_dir, {"epsilon": _fmt(eps), "n": str(n)}))

    result.artifacts.append(
        plot_csv(out_dir / "timeseries.csv", ["t", "I"], out_dir / "I_vs_t.svg",
                 logy=bool(np.all(np.asarray(art.report.I[1:]) > 0.0)))
    )
    result.artifacts.append(
        plot_csv(out_dir / "timeseries.csv", ["t", "margin"], out_dir / "margin_vs_t.svg")
    )
    return result


def _run_sweep(cfg: ScenarioConfig, out_dir: Path) -> RunResult:
    result = RunResult(kind="sweep", out_dir=out_dir)
    ns = cfg.get_int_list("sweep.ns")
    if len(ns) < 3:
        raise ConfigError("sweep.ns: need at least three resolutions for an order fit")

    # shared bands from the coarsest grid keep members comparable
    ref = cfg.reference()
    t_end = cfg.get_float("time.t_end")
    bands = bands_from_reference(ref, np.linspace(0.0, t_end, 65), cfg.grid(n=min(ns)).x)

    def job(n: int) -> TwinRunArtifacts:
        # output cadence scales with resolution so the in-time quadratures
        # refine together with the grid
        return _twin_run(cfg, n, 0.0, out_dir / f"n{n:04d}", n_outputs=max(16, n // 4), bands=bands)

    with ThreadPoolExecutor(max_workers=_pool_size(len(ns))) as pool:
        arts = list(pool.map(job, ns))

    err_rho = [a.errors[0] for a in arts]
    err_u = [a.errors[1] for a in arts]
    err_theta = [a.errors[2] for a in arts]
    floors = [a.max_I for a in arts]
    margins = [a.margin_min for a in arts]

    orders = {
        "rho": _order_fit(ns, err_rho),
        "u": _order_fit(ns, err_u),
        "theta": _order_fit(ns, err_theta),
    }
    floor_order_I = _order_fit(ns, floors)
    floor_order_amp = 0.5 * floor_order_I

    rows = [
        (n, e_r, e_u, e_t, fl, mg)
        for n, e_r, e_u, e_t, fl, mg in zip(ns, err_rho, err_u, err_theta, floors, margins)
    ]
    result.artifacts.append(
        _write_csv(
            out_dir / "order_table.csv",
            ["n", "err_rho", "err_u", "err_theta", "max_I", "margin_min"],
            rows,
        )
    )
    summary = [
        f"order_rho={_fmt(orders['rho'])}",
        f"order_u={_fmt(orders['u'])}",
        f"order_theta={_fmt(orders['theta'])}",
        f"floor_order_I={_fmt(floor_order_I)}",
        f"floor_order_amp={_fmt(floor_order_amp)}",
    ]
    result.artifacts.append(_write_lines(out_dir / "sweep_summary.txt", summary))
    result.artifacts.append(_write_manifest(cfg, out_dir, {"ns": ",".join(map(str, ns))}))

    for name, order in orders.items():
        result.check(f"sweep.order_{name}", 1.8 <= order <= 2.2, f"fitted order={order:.3f}")
    # the distance is quadratic in the field errors, so its refinement order is
    # reported on the amplitude scale (sqrt I) where second-order accuracy
    # shows up as an order-2 slope
    result.check(
        "sweep.floor_order_amplitude",
        1.8 <= floor_order_amp <= 2.2,
        f"amplitude order={floor_order_amp:.3f} (I-order {floor_order_I:.3f})",
    )
    viol = [max(0.0, -m) for m in margins]
    if all(v == 0.0 for v in viol):
        result.check("sweep.margin_nonnegative", True, "margin never negative")
    else:
        ok = True
        for k in range(1, len(ns)):
            allowed = max(viol[0] * (ns[0] / ns[k]) ** 1.8, 1.0e-11)
            ok = ok and viol[k] <= allowed
        result.check(
            "sweep.margin_leak_shrinks",
            ok,
            "violations " + ", ".join(f"{v:.3g}" for v in viol),
        )

    worst_res = max(float(np.max(a.report.res_fraction)) for a in arts)
    result.check("sweep.residual_fraction", worst_res <= 1.0e-12, f"max={worst_res:.3g}")
    result.artifacts.append(
        plot_csv(out_dir / "order_table.csv", ["n", "err_rho", "err_u", "err_theta"],
                 out_dir / "convergence.svg", logy=True)
    )
    return result


def _run_perturb(cfg: ScenarioConfig, out_dir: Path) -> RunResult:
    result = RunResult(kind="perturb", out_dir=out_dir)
    eps0 = cfg.get_float("perturb.epsilon")
    if eps0 <= 0.0:
        raise ConfigError("perturb.epsilon: must be > 0 for the perturbation study")
    n = cfg.get_int("grid.n")
    eps_list = [eps0, eps0 / 2.0, eps0 / 4.0]

    def job(eps: float) -> TwinRunArtifacts:
        tag = "zero" if eps == 0.0 else f"eps{eps:.6g}"
        return _twin_run(cfg, n, eps, out_dir / tag)

    with ThreadPoolExecutor(max_workers=_pool_size(len(eps_list) + 1)) as pool:
        futures = [pool.submit(job, e) for e in eps_list + [0.0]]
        arts = [f.result() for f in futures]
    eps_arts = arts[: len(eps_list)]
    floor = max(arts[-1].max_I, 1.0e-300)

    t = eps_arts[0].report.t
    merged_rows = zip(t, *(a.report.I for a in eps_arts))
    header = ["t"] + [f"I_eps{k}" for k in range(len(eps_list))]
    result.artifacts.append(_write_csv(out_dir / "scaling.csv", header, merged_rows))

    summary = [f"floor={_fmt(floor)}"]
    for k, (eps, art) in enumerate(zip(eps_list, eps_arts)):
        fit = _gronwall_checks(result, art.report, floor, tag=f"eps{k}")
        _common_twin_checks(result, art, tag=f"eps{k}")
        summary.append(f"eps{k}={_fmt(eps)}")
        summary.append(f"c3_eps{k}={_fmt(fit.c3)}")
        summary.append(f"maxI_eps{k}={_fmt(art.max_I)}")

    # quadratic amplitude scaling: halving eps divides the distance by ~4
    for k in range(len(eps_list) - 1):
        hi, lo = eps_arts[k], eps_arts[k + 1]
        window = (hi.report.I > 10.0 * floor) & (lo.report.I > 10.0 * floor)
        window[0] = False
        if np.count_nonzero(window) < 2:
            result.check(f"perturb.quadratic_ratio_{k}", False, "window below floor")
            continue
        ratio = float(np.mean(hi.report.I[window] / lo.report.I[window]))
        result.check(
            f"perturb.quadratic_ratio_{k}",
            3.0 <= ratio <= 5.0,
            f"mean I ratio={ratio:.3f} (expect ~4)",
        )
        summary.append(f"ratio_{k}={_fmt(ratio)}")

    result.artifacts.append(_write_lines(out_dir / "perturb_summary.txt", summary))
    result.artifacts.append(
        _write_manifest(cfg, out_dir, {"epsilons": ",".join(_fmt(e) for e in eps_list)})
    )
    result.artifacts.append(
        plot_csv(out_dir / "scaling.csv", header, out_dir / "scaling.svg", logy=True)
    )
    return result


def run_scenario(cfg: ScenarioConfig, out_dir: str | Path | None = None) -> RunResult:
    """Execute the configured scenario; deterministic given config and seed."""
    out = Path(out_dir) if out_dir is not None else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    if cfg.kind == "audit":
        return _run_audit(cfg, out)
    if cfg.kind == "twin":
        return _run_twin(cfg, out)
    if cfg.kind == "sweep":
        return _run_sweep(cfg, out)
    if cfg.kind == "perturb":
        return _run_perturb(cfg, out)
    raise ConfigError(f"scenario.kind: unsupported kind {cfg.kind!r}")
