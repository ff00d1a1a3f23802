"""Command-line front end: simulations, sweeps, named experiments, checks.

Exit codes: 0 success, 1 configuration error, 2 numeric failure, 3 I/O
error, 4 selfcheck/verification failure.  Output files are CSV for data and
JSON for summaries; floats are written with 17 significant digits so values
round-trip exactly.  All randomization (grid jitter) derives from the
configured seed, so identical configurations produce byte-identical output.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import random
import sys
from pathlib import Path

from . import equilibria, geometry, nullclines, regimes, selfcheck
from .integrate import Event, IntegrationError, IntegrationOptions, Trajectory, integrate
from .params import PRESETS, Params, preset

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_IO = 3
EXIT_CHECK = 4

TRAJECTORY_HEADER = ("t", "u", "v", "chart", "event")
FIG4_HEADER = ("u0", "v0", "predicted_side", "simulated_side", "agree")
FIG6_HEADER = ("beta", "u2", "v2", "exists")
SWEEP_HEADER = FIG6_HEADER
CURVE_HEADER = ("u", "v")
FIG5_SUMMARY_HEADER = ("d", "eps", "max_distance")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems with the config exit code."""

    def error(self, message: str):
        raise ConfigError(message)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path} is not valid JSON: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return cfg


def _resolve_params(args, cfg: dict) -> Params:
    name = args.preset or cfg.get("preset")
    if name is not None:
        try:
            base = preset(name)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
        values = dataclasses.asdict(base)
    else:
        values = {"alpha": None, "theta": None, "beta": None, "d": None, "eps": None}
    for key in values:
        if cfg.get(key) is not None:
            values[key] = cfg[key]
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    missing = [key for key, val in values.items() if val is None]
    if missing:
        raise ConfigError(
            f"missing model parameters {missing}; give --preset or explicit values"
        )
    try:
        return Params(**{k: float(v) for k, v in values.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid parameters: {exc}") from exc


def _resolve_opts(args, cfg: dict, **overrides) -> IntegrationOptions:
    kwargs = {}
    if cfg.get("tol_rel") is not None:
        kwargs["rel_tol"] = float(cfg["tol_rel"])
    if cfg.get("tol_abs") is not None:
        kwargs["abs_tol"] = float(cfg["tol_abs"])
    if getattr(args, "tol_rel", None) is not None:
        kwargs["rel_tol"] = args.tol_rel
    if getattr(args, "tol_abs", None) is not None:
        kwargs["abs_tol"] = args.tol_abs
    if getattr(args, "t_max", None) is not None:
        kwargs["t_max"] = args.t_max
    elif cfg.get("t_max") is not None:
        kwargs["t_max"] = float(cfg["t_max"])
    if cfg.get("max_steps") is not None:
        kwargs["max_steps"] = int(cfg["max_steps"])
    kwargs.update(overrides)
    try:
        return IntegrationOptions(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid integration options: {exc}") from exc


def _out_dir(args, cfg: dict) -> Path:
    root = args.out or cfg.get("out") or os.environ.get("GSPT_OUT_DIR") or "."
    path = Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path: Path, header: tuple[str, ...], rows) -> None:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _trajectory_rows(traj: Trajectory, failure: str | None = None):
    merged = [
        (t, s, chart, "")
        for t, s, chart in zip(traj.times, traj.states, traj.charts)
    ]
    for hit in traj.events:
        merged.append((hit.t, hit.state, "", hit.name))
    merged.sort(key=lambda row: (row[0], row[3]))
    rows = [
        (_fmt(t), _fmt(s[0]), _fmt(s[1]), chart, event)
        for t, s, chart, event in merged
    ]
    if failure is not None:
        last_t = traj.times[-1] if traj.times else math.nan
        rows.append((_fmt(last_t), "", "", "", f"integration-failure:{failure}"))
    return rows


def _resolve_ics(args, cfg: dict, p: Params, seed: int) -> list[tuple[float, float]]:
    if getattr(args, "u0", None) is not None or getattr(args, "v0", None) is not None:
        if args.u0 is None or args.v0 is None:
            raise ConfigError("both --u0 and --v0 are required for a single orbit")
        return [(args.u0, args.v0)]
    if "ics" in cfg:
        try:
            ics = [(float(u), float(v)) for u, v in cfg["ics"]]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config field 'ics' must be a list of [u, v] pairs: {exc}")
        if not ics:
            raise ConfigError("config field 'ics' is empty")
        return ics
    if "ic_grid" in cfg:
        spec = cfg["ic_grid"]
        try:
            n_size = int(spec.get("n_size", 5))
            n_mix = int(spec.get("n_mix", 5))
            lo = float(spec.get("lo", 0.1))
            hi = float(spec.get("hi", 0.9))
            jitter = float(spec.get("jitter", 0.0))
        except (AttributeError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad ic_grid spec: {exc}")
        if n_size < 1 or n_mix < 1 or not (0.0 < lo < hi < 1.0):
            raise ConfigError(f"bad ic_grid spec: {spec}")
        grid = geometry.triangle_grid(n_size, n_mix, lo, hi)
        if jitter > 0.0:
            rng = random.Random(seed)
            grid = [
                (u * (1.0 + jitter * (rng.random() - 0.5)), v * (1.0 + jitter * (rng.random() - 0.5)))
                for u, v in grid
            ]
        return grid
    raise ConfigError("no initial conditions: give --u0/--v0, or 'ics'/'ic_grid' in config")


def _report_json(report: equilibria.EquilibriumReport) -> dict:
    return {
        "location": list(report.location),
        "eigenvalues": [[lam.real, lam.imag] for lam in report.eigenvalues],
        "kind": report.kind,
        "in_delta": report.exists_in_delta,
    }


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    p = _resolve_params(args, cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    ics = _resolve_ics(args, cfg, p, seed)
    opts = _resolve_opts(args, cfg)
    out = _out_dir(args, cfg)
    status = EXIT_OK
    for idx, ic in enumerate(ics):
        path = out / f"trajectory_{idx:03d}.csv"
        try:
            traj = integrate(p, ic, opts)
            rows = _trajectory_rows(traj)
        except IntegrationError as exc:
            rows = _trajectory_rows(exc.partial or Trajectory(), failure=exc.kind)
            status = EXIT_NUMERIC
        _write_csv(path, TRAJECTORY_HEADER, rows)
    return status


def cmd_classify(args) -> int:
    cfg = _load_config(args.config)
    p = _resolve_params(args, cfg)
    case = regimes.classify_regime(p)
    numbers = equilibria.reproduction_numbers(p)
    print(
        json.dumps(
            {
                "tag": case.tag,
                "attractor": case.attractor,
                "notes": case.notes,
                "r0": numbers.r0,
                "rd": numbers.rd,
                "alpha_star": numbers.alpha_star,
                "k": p.k,
            },
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


def cmd_equilibria(args) -> int:
    cfg = _load_config(args.config)
    p = _resolve_params(args, cfg)
    payload: dict = {"origin": "singular (see blow-up charts)"}
    dfe_loc = equilibria.dfe(p)
    payload["dfe"] = (
        None if dfe_loc is None else _report_json(equilibria.classify_equilibrium(p, dfe_loc))
    )
    ee_loc = equilibria.ee_exact(p)
    payload["ee"] = (
        None if ee_loc is None else _report_json(equilibria.classify_equilibrium(p, ee_loc))
    )
    if ee_loc is not None:
        payload["ee_expansion"] = list(equilibria.ee_expansion(p))
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_nullclines(args) -> int:
    cfg = _load_config(args.config)
    p = _resolve_params(args, cfg)
    out = _out_dir(args, cfg)
    files = []
    vline = nullclines.v_nullcline(p)
    if vline.slope is not None:
        us = [i / 200 for i in range(201)]
        rows = [(_fmt(u), _fmt(vline.slope * u)) for u in us if vline.slope * u + u <= 1.0]
        _write_csv(out / "nullcline_vline.csv", CURVE_HEADER, rows)
        files.append("nullcline_vline.csv")
    if p.theta > 0.0:
        branches = ["L1"] + (["L2"] if p.alpha > 1.0 else [])
        for branch in branches:
            curve = nullclines.u_nullcline_branch(p, branch, args.n)
            rows = [(_fmt(u), _fmt(v)) for u, v in curve.points]
            _write_csv(out / f"nullcline_{branch}.csv", CURVE_HEADER, rows)
            files.append(f"nullcline_{branch}.csv")
    elif p.alpha > 1.0:
        curve = nullclines.theta0_parabola(p, args.n)
        rows = [(_fmt(u), _fmt(v)) for u, v in curve.points]
        _write_csv(out / "nullcline_parabola.csv", CURVE_HEADER, rows)
        files.append("nullcline_parabola.csv")
    print(json.dumps({"written": files}))
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    p = _resolve_params(args, cfg)
    out = _out_dir(args, cfg)
    branch = equilibria.bifurcation_sweep(p, args.beta_lo, args.beta_hi, args.n)
    rows = []
    for rec in branch.records:
        ee = rec.ee_report.location if rec.ee_report is not None else None
        rows.append(
            (
                _fmt(rec.beta),
                _fmt(ee[0]) if ee else "",
                _fmt(ee[1]) if ee else "",
                "1" if ee else "0",
            )
        )
    _write_csv(out / "sweep.csv", SWEEP_HEADER, rows)
    print(
        json.dumps(
            {
                "transcritical": [
                    None if b is None else b for b in branch.transcritical
                ]
            }
        )
    )
    return EXIT_OK


def cmd_blowup_verify(args) -> int:
    cfg = _load_config(args.config)
    results = [
        r
        for r in selfcheck.run_selfcheck()
        if r.name in ("blowdown-residuals", "transition-identities")
    ]
    ok = all(r.passed for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_selfcheck(args) -> int:
    results = selfcheck.run_selfcheck()
    failed = [r for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail} [{r.seconds:.1f}s]")
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed")
        return EXIT_CHECK
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def _figure_fig4(out: Path, args, cfg) -> None:
    summary = {}
    for eps in (0.001, 0.0005):
        p = PRESETS["fig4"].with_eps(eps)
        score = geometry.score_side_predictions(p)
        rows = [
            (
                _fmt(rec.ic[0]),
                _fmt(rec.ic[1]),
                rec.predicted.value,
                rec.simulated.value,
                "1" if rec.predicted is rec.simulated else "0",
            )
            for rec in score.records
        ]
        _write_csv(out / f"fig4_eps{eps:g}.csv", FIG4_HEADER, rows)
        summary[f"{eps:g}"] = score.agreement
    (out / "fig4_summary.json").write_text(json.dumps({"agreement": summary}, indent=2))


def _figure_fig5(out: Path, args, cfg) -> None:
    eps_list = [0.025, 0.01, 0.005]
    summary_rows = []
    for d in (0.1, 0.3):
        p = dataclasses.replace(PRESETS["fig5a"], d=d)
        us = [0.05 + 0.9 * i / 200 for i in range(201)]
        gamma_rows = []
        for u in us:
            v = geometry.separatrix_gamma(p, u)
            if v >= 0.0:
                gamma_rows.append((_fmt(u), _fmt(v)))
        _write_csv(out / f"fig5_d{d:g}_gamma.csv", CURVE_HEADER, gamma_rows)
        distances = regimes.heteroclinic_cycle_distance(p, eps_list)
        for eps, dist in zip(eps_list, distances):
            summary_rows.append((_fmt(d), _fmt(eps), _fmt(dist)))
        for eps in eps_list:
            pe = p.with_eps(eps)
            opts = IntegrationOptions(
                t_max=4000.0,
                max_step=1.0,
                events=(Event.ball((0.0, 0.0), regimes.R_HOME, terminal=True, name="home"),),
            )
            for j, orbit_ic in enumerate([(0.35, pe.eps**2), (0.55, pe.eps**2)]):
                traj = integrate(pe, orbit_ic, opts)
                _write_csv(
                    out / f"fig5_d{d:g}_eps{eps:g}_orbit{j}.csv",
                    TRAJECTORY_HEADER,
                    _trajectory_rows(traj),
                )
    _write_csv(out / "fig5_distances.csv", FIG5_SUMMARY_HEADER, summary_rows)


def _figure_fig6(out: Path, args, cfg) -> None:
    summary = {}
    for eps in (0.005, 0.0025, 0.001, 0.0005):
        p = PRESETS["fig6"].with_eps(eps)
        numbers = equilibria.reproduction_numbers(p)
        lo = p.d + 0.25 * eps
        hi = p.d + eps * (numbers.alpha_star + 1.5)
        branch = equilibria.bifurcation_sweep(p, lo, hi, 301)
        rows = []
        for rec in branch.records:
            ee = rec.ee_report.location if rec.ee_report is not None else None
            rows.append(
                (
                    _fmt(rec.beta),
                    _fmt(ee[0]) if ee else "",
                    _fmt(ee[1]) if ee else "",
                    "1" if ee else "0",
                )
            )
        _write_csv(out / f"fig6_eps{eps:g}.csv", FIG6_HEADER, rows)
        summary[f"{eps:g}"] = {
            "transcritical": list(branch.transcritical),
            "expected": [p.d + eps, p.d + eps * numbers.alpha_star],
        }
    (out / "fig6_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))


def _figure_fig7(out: Path, args, cfg) -> None:
    p = PRESETS["fig7"]
    ics = [(0.95, 0.02), (0.85, 0.1), (0.6, 0.3), (0.3, 0.55), (0.15, 0.75), (0.45, 0.08)]
    target = equilibria.ee_exact(p)
    assert target is not None
    for idx, ic in enumerate(ics):
        opts = IntegrationOptions(
            t_max=40000.0,
            events=(Event.ball(target, 1e-3, terminal=True, name="arrival"),),
        )
        traj = integrate(p, ic, opts)
        _write_csv(out / f"fig7_orbit_{idx:02d}.csv", TRAJECTORY_HEADER, _trajectory_rows(traj))
    for branch in ("L1", "L2"):
        curve = nullclines.u_nullcline_branch(p, branch, 300)
        _write_csv(
            out / f"fig7_nullcline_{branch}.csv",
            CURVE_HEADER,
            [(_fmt(u), _fmt(v)) for u, v in curve.points],
        )
    vline = nullclines.v_nullcline(p)
    assert vline.slope is not None
    rows = [
        (_fmt(u), _fmt(vline.slope * u))
        for u in (i / 300 for i in range(301))
        if u * (1.0 + vline.slope) <= 1.0
    ]
    _write_csv(out / "fig7_nullcline_vline.csv", CURVE_HEADER, rows)
    (out / "fig7_equilibria.json").write_text(
        json.dumps({"ee": list(target), "dfe": list(equilibria.dfe(p))}, indent=2)
    )


_FIGURES = {"fig4": _figure_fig4, "fig5": _figure_fig5, "fig6": _figure_fig6, "fig7": _figure_fig7}


def cmd_figure(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args, cfg)
    fn = _FIGURES.get(args.name)
    if fn is None:
        raise ConfigError(f"unknown figure {args.name!r}; expected one of {sorted(_FIGURES)}")
    fn(out, args, cfg)
    return EXIT_OK


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override its fields")
    sub.add_argument("--out", help="output directory (default $GSPT_OUT_DIR or .)")
    sub.add_argument("--seed", type=int, help="seed for jittered grids")
    sub.add_argument("--preset", help=f"named parameter set: {sorted(PRESETS)}")
    sub.add_argument("--alpha", type=float)
    sub.add_argument("--theta", type=float)
    sub.add_argument("--beta", type=float)
    sub.add_argument("--d", type=float)
    sub.add_argument("--eps", type=float)
    sub.add_argument("--tol-rel", type=float, dest="tol_rel")
    sub.add_argument("--tol-abs", type=float, dest="tol_abs")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hostpar", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="integrate orbits and write trajectory CSVs")
    _add_common(sim)
    sim.add_argument("--u0", type=float)
    sim.add_argument("--v0", type=float)
    sim.add_argument("--t-max", type=float, dest="t_max")
    sim.set_defaults(fn=cmd_simulate)

    cla = subs.add_parser("classify", help="print the asymptotic regime")
    _add_common(cla)
    cla.set_defaults(fn=cmd_classify)

    eq = subs.add_parser("equilibria", help="print equilibrium reports as JSON")
    _add_common(eq)
    eq.set_defaults(fn=cmd_equilibria)

    nul = subs.add_parser("nullclines", help="write nullcline branch CSVs")
    _add_common(nul)
    nul.add_argument("--n", type=int, default=300, help="samples per branch")
    nul.set_defaults(fn=cmd_nullclines)

    swp = subs.add_parser("sweep", help="sweep the infection rate and write the branch CSV")
    _add_common(swp)
    swp.add_argument("--beta-lo", type=float, required=True, dest="beta_lo")
    swp.add_argument("--beta-hi", type=float, required=True, dest="beta_hi")
    swp.add_argument("--n", type=int, default=301)
    swp.set_defaults(fn=cmd_sweep)

    blv = subs.add_parser("blowup-verify", help="verify blow-up algebra numerically")
    _add_common(blv)
    blv.set_defaults(fn=cmd_blowup_verify)

    fig = subs.add_parser("figure", help="reproduce a named experiment's data files")
    _add_common(fig)
    fig.add_argument("name", choices=sorted(_FIGURES))
    fig.set_defaults(fn=cmd_figure)

    chk = subs.add_parser("selfcheck", help="run the invariant suite")
    _add_common(chk)
    chk.set_defaults(fn=cmd_selfcheck)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
