"""Command-line front end: receiver sweeps and seeded Monte Carlo runs.

Subcommands
-----------
fig1      error probability of each receiver vs mean photon number
fig3      optimal displacement intensity of each receiver vs mean photon number
simulate  one seeded Monte Carlo run cross-checked against its analytic value

Outputs are deterministic functions of the resolved spec and the seed: CSV
with an exact documented header, LF line endings and 12 significant digits,
or JSON carrying the same numbers plus the spec and tool version.  Option
values resolve as command line > config file > environment (seed only) >
built-in defaults; the config file is flat ``key = value`` text (see
README).

Exit codes: 0 success, 2 invalid spec or I/O failure, 3 solver failure,
4 singular control request (equal priors with an uncapped optimal law).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .dolinar import (
    ControlLaw,
    IntegrationError,
    MajorantError,
    SingularControlError,
    evolve_pc,
    helstrom_trajectory,
    simulate_telegraph,
)
from .multicopy import exact_adaptive_pc, simulate_adaptive
from .rootfind import (
    BracketError,
    ConvergenceError,
    optimal_beta_ik,
    optimal_beta_sd,
)
from .statemath import (
    CoherentBinary,
    Priors,
    QubitPair,
    coherent_overlap,
    helstrom_bound,
    improved_kennedy_pc,
    kennedy_pc,
    simplified_dolinar_pc,
)

__all__ = ["main", "SweepSpec", "cmd_fig1", "cmd_fig3", "cmd_simulate", "SEED_ENV_VAR"]

SEED_ENV_VAR = "QSDR_SEED"

EXIT_OK = 0
EXIT_INVALID_SPEC = 2
EXIT_SOLVER_FAILURE = 3
EXIT_SINGULAR_CONTROL = 4

# Canonical column order; selections preserve this order, not the flag order.
FIG1_SCHEMES = (
    "helstrom",
    "kennedy",
    "improved_kennedy",
    "simplified_dolinar",
    "dolinar_ode",
    "dolinar_mc",
)
FIG3_SCHEMES = ("kennedy", "improved_kennedy", "simplified_dolinar")
SIM_SCHEMES = ("dolinar_mc", "multicopy")
KNOWN_SCHEMES = (
    "helstrom",
    "kennedy",
    "improved_kennedy",
    "simplified_dolinar",
    "dolinar_ode",
    "dolinar_mc",
    "multicopy",
)
MC_SCHEMES = ("dolinar_mc", "multicopy")
CONTROL_KINDS = ("dolinar_optimal", "constant", "capped_dolinar")

DEFAULTS = {
    "gamma_sq_min": 0.01,
    "gamma_sq_max": 2.0,
    "points": 30,
    "spacing": "log",
    "q0": 0.5,
    "big_t": 1.0,
    "trials": 10000,
    "format": "csv",
    "psi": 1.0,
    "control": "dolinar_optimal",
}


@dataclass(frozen=True)
class SweepSpec:
    """Fully resolved parameters of one CLI invocation.

    Sweep fields apply to fig1/fig3; the optional tail fields configure the
    Monte Carlo schemes of ``simulate``.  ``seed`` feeds every stochastic
    scheme; analytic sweeps ignore it but still record it in JSON output.
    """

    command: str
    schemes: tuple[str, ...]
    gamma_sq_min: float
    gamma_sq_max: float
    points: int
    spacing: str
    q0: float
    T: float
    seed: int
    trials: int
    format: str
    u_max: float | None = None
    t_floor: float | None = None
    control: str | None = None
    beta: float | None = None
    psi: float | None = None
    theta: float | None = None
    copies: int | None = None

    def __post_init__(self) -> None:
        if len(self.schemes) == 0:
            raise ValueError("scheme list must not be empty")
        unknown = [s for s in self.schemes if s not in KNOWN_SCHEMES]
        if unknown:
            raise ValueError(
                f"unknown scheme(s) {unknown}; known: {', '.join(KNOWN_SCHEMES)}"
            )
        if self.command in ("fig1", "fig3"):
            if not 0.0 < self.gamma_sq_min < self.gamma_sq_max:
                raise ValueError(
                    "sweep needs 0 < gamma_sq_min < gamma_sq_max, got "
                    f"[{self.gamma_sq_min}, {self.gamma_sq_max}]"
                )
            if self.points < 2:
                raise ValueError(f"points must be >= 2, got {self.points}")
            if self.spacing not in ("log", "linear"):
                raise ValueError(f"spacing must be log or linear, got {self.spacing}")
        if any(s in MC_SCHEMES for s in self.schemes) and self.trials < 1:
            raise ValueError(f"trials must be >= 1 for Monte Carlo schemes")
        if not 0.0 <= self.q0 <= 1.0:
            raise ValueError(f"q0 must lie in [0, 1], got {self.q0}")
        if self.T <= 0.0:
            raise ValueError(f"T must be > 0, got {self.T}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, got {self.format}")

    @property
    def priors(self) -> Priors:
        return Priors(self.q0)

    def axis(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.gamma_sq_min, self.gamma_sq_max, self.points)
        return np.linspace(self.gamma_sq_min, self.gamma_sq_max, self.points)

    def public_dict(self) -> dict:
        """Spec fields for embedding in output files (None entries dropped)."""
        d = asdict(self)
        d["schemes"] = list(self.schemes)
        return {k: v for k, v in d.items() if v is not None}


def _sig12(x: float) -> float:
    """Round to the 12 significant digits the CSV format documents."""
    return float(f"{x:.12g}")


def _fmt(x) -> str:
    if isinstance(x, bool):
        raise TypeError("no boolean columns")
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.12g}"


def _write_csv(path: str, header: list[str], rows: list[dict]) -> None:
    # Assemble first so a formatting error cannot leave a partial file.
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(row[c]) for c in header) for row in rows)
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path: str, spec: SweepSpec, rows: list[dict]) -> None:
    rounded = [
        {k: (_sig12(v) if isinstance(v, float) else v) for k, v in row.items()}
        for row in rows
    ]
    doc = {
        "spec": spec.public_dict(),
        "rows": rounded,
        "tool_version": __version__,
        "seed": spec.seed,
    }
    with open(path, "w", newline="") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _write_rows(path: str, spec: SweepSpec, header: list[str], rows: list[dict]) -> None:
    if spec.format == "csv":
        _write_csv(path, header, rows)
    else:
        _write_json(path, spec, rows)


def _dolinar_law(spec: SweepSpec, priors: Priors, psi: float) -> ControlLaw:
    kind = spec.control or "dolinar_optimal"
    if kind == "constant":
        if spec.beta is None:
            raise ValueError("control=constant requires --beta")
        return ControlLaw.constant(spec.beta)
    if kind == "capped_dolinar":
        if spec.u_max is None:
            raise ValueError("control=capped_dolinar requires --u-max")
        return ControlLaw.capped_dolinar(priors, psi, spec.u_max, t_floor=spec.t_floor)
    if kind == "dolinar_optimal":
        return ControlLaw.dolinar_optimal(
            priors, psi, t_floor=spec.t_floor, u_max=spec.u_max
        )
    raise ValueError(f"unknown control kind {kind!r}; known: {', '.join(CONTROL_KINDS)}")


def _row_seeds(seed: int, n: int) -> list[int]:
    # Independent per-row seeds, reproducible from the master seed alone.
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n, np.uint64)]


def cmd_fig1(spec: SweepSpec, output: str) -> list[dict]:
    """Error-probability sweep: one row per gamma_sq value."""
    bad = [s for s in spec.schemes if s not in FIG1_SCHEMES]
    if bad:
        raise ValueError(f"fig1 supports {', '.join(FIG1_SCHEMES)}; got {bad}")
    priors = spec.priors
    schemes = [s for s in FIG1_SCHEMES if s in spec.schemes]
    seeds = _row_seeds(spec.seed, spec.points)
    rows = []
    for i, g in enumerate(spec.axis()):
        g = float(g)
        source = CoherentBinary.from_mean_photons(g, spec.T)
        row: dict = {"gamma_sq": g}
        for scheme in schemes:
            if scheme == "helstrom":
                pc = helstrom_bound(priors, coherent_overlap(g))
            elif scheme == "kennedy":
                pc = kennedy_pc(priors, g)
            elif scheme == "improved_kennedy":
                beta = optimal_beta_ik(priors, source.gamma)
                pc = improved_kennedy_pc(priors, source.gamma, beta)
            elif scheme == "simplified_dolinar":
                beta = optimal_beta_sd(priors, source.psi, spec.T)
                pc = simplified_dolinar_pc(priors, source.psi, beta, spec.T)
            elif scheme == "dolinar_ode":
                law = ControlLaw.dolinar_optimal(
                    priors, source.psi, t_floor=spec.t_floor, u_max=spec.u_max
                )
                pc = evolve_pc(priors, source.psi, law, spec.T).final.pc(priors)
            else:  # dolinar_mc
                law = _dolinar_law(spec, priors, source.psi)
                pc = simulate_telegraph(
                    priors, source.psi, law, spec.T, spec.trials, seeds[i]
                ).estimate
            row[f"{scheme}_pe"] = 1.0 - pc
        rows.append(row)
    header = ["gamma_sq"] + [f"{s}_pe" for s in schemes]
    _write_rows(output, spec, header, rows)
    return rows


def cmd_fig3(spec: SweepSpec, output: str) -> list[dict]:
    """Optimal displacement intensity sweep: |beta|**2 per gamma_sq value."""
    bad = [s for s in spec.schemes if s not in FIG3_SCHEMES]
    if bad:
        raise ValueError(f"fig3 supports {', '.join(FIG3_SCHEMES)}; got {bad}")
    priors = spec.priors
    schemes = [s for s in FIG3_SCHEMES if s in spec.schemes]
    rows = []
    for g in spec.axis():
        g = float(g)
        source = CoherentBinary.from_mean_photons(g, spec.T)
        row: dict = {"gamma_sq": g}
        for scheme in schemes:
            if scheme == "kennedy":
                beta_sq = g  # exact nulling: the reference line
            elif scheme == "improved_kennedy":
                beta_sq = optimal_beta_ik(priors, source.gamma) ** 2
            else:  # simplified_dolinar
                beta_sq = optimal_beta_sd(priors, source.psi, spec.T) ** 2
            row[f"{scheme}_beta_sq"] = beta_sq
        rows.append(row)
    header = ["gamma_sq"] + [f"{s}_beta_sq" for s in schemes]
    _write_rows(output, spec, header, rows)
    return rows


def cmd_simulate(
    spec: SweepSpec, output: str, trajectories_path: str | None = None
) -> dict:
    """One Monte Carlo run with its analytic cross-check."""
    if len(spec.schemes) != 1 or spec.schemes[0] not in SIM_SCHEMES:
        raise ValueError(f"simulate runs exactly one of {', '.join(SIM_SCHEMES)}")
    scheme = spec.schemes[0]
    priors = spec.priors
    trajectories = None
    if scheme == "dolinar_mc":
        if spec.psi is None:
            raise ValueError("dolinar_mc requires --psi")
        law = _dolinar_law(spec, priors, spec.psi)
        result = simulate_telegraph(
            priors,
            spec.psi,
            law,
            spec.T,
            spec.trials,
            spec.seed,
            keep_trajectories=trajectories_path is not None,
        )
        estimate, stderr = result.estimate, result.stderr
        trajectories = result.trajectories
        if law.kind == "constant":
            analytic = simplified_dolinar_pc(priors, spec.psi, spec.beta, spec.T)
        elif law.kind == "dolinar_optimal":
            analytic = helstrom_trajectory(priors, spec.psi, spec.T)
        else:
            analytic = evolve_pc(priors, spec.psi, law, spec.T).final.pc(priors)
    else:
        if trajectories_path is not None:
            raise ValueError("--trajectories applies only to dolinar_mc")
        if spec.theta is None:
            raise ValueError("multicopy requires --theta or --chi")
        if spec.copies is None:
            raise ValueError("multicopy requires --copies")
        estimate, stderr = simulate_adaptive(
            priors, spec.theta, spec.copies, spec.trials, spec.seed
        )
        analytic = exact_adaptive_pc(priors, spec.theta, spec.copies)
    diff = abs(estimate - analytic)
    if diff == 0.0:
        z = 0.0
    elif stderr > 0.0:
        z = diff / stderr
    else:
        z = math.inf
    row = {
        "scheme": scheme,
        "estimate": estimate,
        "stderr": stderr,
        "trials": spec.trials,
        "seed": spec.seed,
        "analytic": analytic,
        "z_score": z,
    }
    header = ["scheme", "estimate", "stderr", "trials", "seed", "analytic", "z_score"]
    _write_rows(output, spec, header, [row])
    if trajectories_path is not None and trajectories is not None:
        _write_trajectories(trajectories_path, spec, trajectories)
    return row


def _write_trajectories(path: str, spec: SweepSpec, trajectories) -> None:
    if spec.format == "csv":
        with open(path, "w", newline="") as fh:
            fh.write("trial,a,z_final,click_times\n")
            for i, tr in enumerate(trajectories):
                times = ";".join(f"{t:.12g}" for t in tr.click_times)
                fh.write(f"{i},{tr.a},{tr.z_final},{times}\n")
    else:
        records = [
            {
                "trial": i,
                "a": tr.a,
                "z_final": tr.z_final,
                "click_times": [_sig12(t) for t in tr.click_times],
            }
            for i, tr in enumerate(trajectories)
        ]
        doc = {
            "spec": spec.public_dict(),
            "trajectories": records,
            "tool_version": __version__,
            "seed": spec.seed,
        }
        with open(path, "w", newline="") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")


def read_config(path: str) -> dict[str, str]:
    """Parse the flat ``key = value`` config format (# starts a comment)."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsdr",
        description="Binary quantum-state discrimination receivers.",
        epilog=f"Seeds default to ${SEED_ENV_VAR} when set. See README for formats.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--output", "-o", help="output file path (required)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--q0", type=float, default=None)
        p.add_argument("--T", type=float, default=None, dest="big_t")

    def add_sweep(p: argparse.ArgumentParser) -> None:
        add_common(p)
        p.add_argument("--gamma-sq-min", type=float, default=None)
        p.add_argument("--gamma-sq-max", type=float, default=None)
        p.add_argument("--points", type=int, default=None)
        p.add_argument("--spacing", choices=("log", "linear"), default=None)
        p.add_argument("--schemes", default=None, help="comma separated scheme list")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--u-max", type=float, default=None)
        p.add_argument("--t-floor", type=float, default=None)

    p1 = sub.add_parser("fig1", help="error probability vs mean photon number")
    add_sweep(p1)
    p3 = sub.add_parser("fig3", help="optimal displacement intensity sweep")
    add_sweep(p3)

    ps = sub.add_parser("simulate", help="seeded Monte Carlo with analytic cross-check")
    add_common(ps)
    ps.add_argument("--scheme", choices=SIM_SCHEMES, default=None)
    ps.add_argument("--trials", type=int, default=None)
    ps.add_argument("--psi", type=float, default=None)
    ps.add_argument(
        "--control", choices=CONTROL_KINDS, default=None, help="dolinar_mc law"
    )
    ps.add_argument("--beta", type=float, default=None)
    ps.add_argument("--u-max", type=float, default=None)
    ps.add_argument("--t-floor", type=float, default=None)
    ps.add_argument("--theta", type=float, default=None)
    ps.add_argument("--chi", type=float, default=None)
    ps.add_argument("--copies", type=int, default=None)
    ps.add_argument(
        "--trajectories", default=None, help="also export per-trial click records"
    )
    return parser


def _resolve(ns, cfg: dict[str, str]):
    """Merge CLI > config > env (seed) > defaults into a SweepSpec."""

    def pick(name: str, cast, default=None):
        v = getattr(ns, name, None)
        if v is not None:
            return v
        if name in cfg:
            return cast(cfg[name])
        return default

    seed = pick("seed", int)
    if seed is None:
        env = os.environ.get(SEED_ENV_VAR)
        try:
            seed = int(env) if env is not None else 0
        except ValueError as exc:
            raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc

    if ns.command == "simulate":
        scheme = pick("scheme", str)
        if scheme is None:
            raise ValueError("simulate requires --scheme")
        schemes = (scheme,)
    else:
        raw = pick("schemes", str)
        if raw is None:
            schemes = FIG1_SCHEMES[:4] if ns.command == "fig1" else FIG3_SCHEMES
        else:
            schemes = tuple(s.strip() for s in raw.split(",") if s.strip())

    theta = pick("theta", float)
    chi = pick("chi", float)
    if chi is not None:
        if theta is not None:
            raise ValueError("give either --theta or --chi, not both")
        theta = QubitPair.from_overlap(chi).theta

    spec = SweepSpec(
        command=ns.command,
        schemes=schemes,
        gamma_sq_min=pick("gamma_sq_min", float, DEFAULTS["gamma_sq_min"]),
        gamma_sq_max=pick("gamma_sq_max", float, DEFAULTS["gamma_sq_max"]),
        points=pick("points", int, DEFAULTS["points"]),
        spacing=pick("spacing", str, DEFAULTS["spacing"]),
        q0=pick("q0", float, DEFAULTS["q0"]),
        T=pick("big_t", float, DEFAULTS["big_t"]),
        seed=seed,
        trials=pick("trials", int, DEFAULTS["trials"]),
        format=pick("format", str, DEFAULTS["format"]),
        u_max=pick("u_max", float),
        t_floor=pick("t_floor", float),
        control=pick("control", str, DEFAULTS["control"]),
        beta=pick("beta", float),
        psi=pick("psi", float, DEFAULTS["psi"]),
        theta=theta,
        copies=pick("copies", int),
    )
    output = pick("output", str)
    if output is None:
        raise ValueError("an output path is required (--output or config)")
    trajectories = pick("trajectories", str)
    return spec, output, trajectories


def main(argv=None) -> int:
    try:
        ns = _build_parser().parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_INVALID_SPEC
        return EXIT_OK if code == 0 else EXIT_INVALID_SPEC
    try:
        cfg = read_config(ns.config) if ns.config else {}
        spec, output, trajectories = _resolve(ns, cfg)
        if spec.command == "fig1":
            cmd_fig1(spec, output)
        elif spec.command == "fig3":
            cmd_fig3(spec, output)
        else:
            cmd_simulate(spec, output, trajectories)
    except SingularControlError as exc:
        print(f"qsdr: singular control: {exc}", file=sys.stderr)
        return EXIT_SINGULAR_CONTROL
    except (BracketError, ConvergenceError, IntegrationError, MajorantError) as exc:
        print(f"qsdr: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER_FAILURE
    except (ValueError, OSError) as exc:
        print(f"qsdr: invalid spec: {exc}", file=sys.stderr)
        return EXIT_INVALID_SPEC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
