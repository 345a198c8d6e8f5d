"""Command line front end: kernel tables, verification ladders and solver runs.

Every command writes CSV with ``#`` metadata lines (tool version and the
full configuration) ahead of the header row.  Exit codes: 0 pass,
1 verification or solver failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import io
import math
import re
import shlex
import sys
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .integral_transforms import TransformConfig, cif_residual, point_monogenic
from .pi_operator import sample_points, verify_pi_identities
from .solvers import BeltramiConfig, BeltramiDivergenceError, solve_beltrami, solve_bvp
from .special_functions import KernelConfig, SingularityError, cauchy_kernel
from .sphere_geometry import build_cap, spherical_to_cartesian
from .spherical_operators import gamma_alpha_field
from .testfields import bump, partner_bump, scalar_field, smooth_field

__all__ = ["main", "parse_alpha", "parse_resolutions", "RunConfig"]

COMMANDS = ("kernel", "verify", "bvp", "beltrami", "info")

_NUM = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_ALPHA = re.compile(rf"^(?P<re>[+-]?{_NUM})?(?:(?P<sign>[+-])(?P<im>{_NUM})?i)?$")
_PURE_IM = re.compile(rf"^(?P<sign>[+-]?)(?P<im>{_NUM})?i$")


class UsageError(ValueError):
    pass


def parse_alpha(text: str) -> complex:
    """Parse ``"a"``, ``"a+bi"``, ``"a-bi"`` or ``"bi"`` (no whitespace)."""
    m = _PURE_IM.match(text)
    if m:
        im = float(m["im"]) if m["im"] else 1.0
        return complex(0.0, -im if m["sign"] == "-" else im)
    m = _ALPHA.match(text)
    if not text or not m or m["re"] is None:
        raise UsageError(f"cannot parse alpha {text!r}; expected a, a+bi or a-bi")
    im = 0.0
    if m["sign"]:
        im = float(m["im"]) if m["im"] else 1.0
        im = -im if m["sign"] == "-" else im
    return complex(float(m["re"]), im)


def format_alpha(a: complex) -> str:
    return f"{a.real!r}{a.imag:+}i"


def parse_resolutions(text: str) -> list[tuple[int, int]]:
    """``"16:32,24:48"`` -> ``[(16, 32), (24, 48)]``."""
    out = []
    for part in text.split(","):
        m = re.fullmatch(r"(\d+):(\d+)", part)
        if not m:
            raise UsageError(f"bad resolution {part!r}; expected Ntheta:Nphi")
        nt, nphi = int(m[1]), int(m[2])
        if nt < 2 or nphi < 4:
            raise UsageError(f"resolution {part!r} is too small")
        out.append((nt, nphi))
    return out


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x] if text else []
    except ValueError as exc:
        raise UsageError(str(exc)) from None


@dataclass
class RunConfig:
    """Validated command line configuration."""

    command: str
    alpha: complex
    cap_angle: float
    resolutions: list
    exclusion_eps: Optional[float]
    pv_eps: Optional[float]
    max_terms: int
    series_tol: float
    fp_tol: float
    max_iter: int
    seed: int
    deterministic: bool
    out_path: str
    q_norms: list
    t_range: tuple
    points: int

    @property
    def theta0(self) -> float:
        return math.radians(self.cap_angle)

    def kernel(self) -> KernelConfig:
        return KernelConfig(alpha=self.alpha, max_terms=self.max_terms, series_tol=self.series_tol)

    def transform(self) -> TransformConfig:
        return TransformConfig(kernel=self.kernel(), exclusion_eps=self.exclusion_eps,
                               pv_eps=self.pv_eps)

    def echo(self) -> list[tuple[str, str]]:
        return [
            ("alpha", format_alpha(self.alpha)),
            ("cap-angle", repr(self.cap_angle)),
            ("res", ",".join(f"{a}:{b}" for a, b in self.resolutions)),
            ("eps", "auto" if self.exclusion_eps is None else repr(self.exclusion_eps)),
            ("pv-eps", "auto" if self.pv_eps is None else repr(self.pv_eps)),
            ("max-terms", str(self.max_terms)),
            ("series-tol", repr(self.series_tol)),
            ("fp-tol", repr(self.fp_tol)),
            ("max-iter", str(self.max_iter)),
            ("seed", str(self.seed)),
            ("deterministic", str(self.deterministic).lower()),
            ("q-norms", ",".join(repr(q) for q in self.q_norms)),
            ("t-range", f"{self.t_range[0]!r}:{self.t_range[1]!r}"),
            ("points", str(self.points)),
        ]

    def argv(self) -> str:
        parts = [self.command]
        for key, val in self.echo():
            if key == "deterministic":
                if self.deterministic:
                    parts.append("--deterministic")
                continue
            if val == "auto":
                continue
            # values such as "-0.99:0.999" would otherwise parse as flags
            parts += [f"--{key}={val}"] if val.startswith("-") else [f"--{key}", val]
        return "spherical-pi " + " ".join(shlex.quote(p) for p in parts)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", default="0.5", help="kernel order, e.g. 0.5 or 0.3+0.2i")
    common.add_argument("--cap-angle", type=float, default=60.0, help="cap angle in degrees")
    common.add_argument("--res", default="12:24,16:32,24:48",
                        help="resolution ladder Ntheta:Nphi[,Ntheta:Nphi...]")
    common.add_argument("--eps", type=float, default=None,
                        help="exclusion radius (default scales with the mesh)")
    common.add_argument("--pv-eps", type=float, default=None,
                        help="principal value gap (default 1.5 boundary spacings)")
    common.add_argument("--max-terms", type=int, default=400)
    common.add_argument("--series-tol", type=float, default=1e-16)
    common.add_argument("--fp-tol", type=float, default=1e-8)
    common.add_argument("--max-iter", type=int, default=200)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--deterministic", action="store_true",
                        help="omit run-dependent metadata so reruns are byte-identical")
    common.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    common.add_argument("--q-norms", default="0,0.1,0.3,0.5", help="beltrami: sup |q| grid")
    common.add_argument("--t-range", default="-0.99:0.999",
                        help="kernel: range of cos(angle) for the sweep, lo:hi")
    common.add_argument("--points", type=int, default=24, help="kernel: sweep length")

    p = argparse.ArgumentParser(prog="spherical-pi", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "kernel": "tabulate the Cauchy kernel along a geodesic",
        "verify": "run the identity suite on a resolution ladder",
        "bvp": "solve the inhomogeneous boundary value problem on a ladder",
        "beltrami": "run the Beltrami fixed-point solver over a grid of |q|",
        "info": "print the configuration and exit",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return p


def _build_config(ns: argparse.Namespace) -> RunConfig:
    alpha = parse_alpha(ns.alpha)
    if not 0 < ns.cap_angle < 180:
        raise UsageError("--cap-angle must lie in (0, 180)")
    for key in ("eps", "pv_eps"):
        val = getattr(ns, key)
        if val is not None and not val > 0:
            raise UsageError(f"--{key.replace('_', '-')} must be positive")
    if ns.max_terms < 1 or ns.max_iter < 1:
        raise UsageError("--max-terms and --max-iter must be >= 1")
    if not ns.series_tol > 0 or not ns.fp_tol > 0:
        raise UsageError("tolerances must be positive")
    if ns.points < 0:
        raise UsageError("--points must be >= 0")
    q_norms = _floats(ns.q_norms)
    bad = [q for q in q_norms if not 0 <= q < 1]
    if bad:
        raise UsageError(f"q norms must lie in [0, 1): {bad}")
    m = re.fullmatch(rf"([+-]?{_NUM}):([+-]?{_NUM})", ns.t_range)
    if not m:
        raise UsageError("--t-range must be lo:hi")
    return RunConfig(ns.command, alpha, ns.cap_angle, parse_resolutions(ns.res), ns.eps,
                     ns.pv_eps, ns.max_terms, ns.series_tol, ns.fp_tol, ns.max_iter, ns.seed,
                     ns.deterministic, ns.out, q_norms, (float(m[1]), float(m[2])), ns.points)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


class _Table:
    """CSV collector: metadata comments, one header row, data rows."""

    def __init__(self, cfg: RunConfig, header: Sequence[str]):
        self.cfg = cfg
        self.header = list(header)
        self.rows: list = []

    def add(self, *row):
        self.rows.append([_fmt(x) for x in row])

    def render(self) -> str:
        buf = io.StringIO()
        buf.write(f"# tool: spherical-pi {__version__}\n")
        buf.write(f"# command: {self.cfg.command}\n")
        for key, val in self.cfg.echo():
            buf.write(f"# {key}: {val}\n")
        buf.write(f"# argv: {self.cfg.argv()}\n")
        if not self.cfg.deterministic:
            stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
            buf.write(f"# created: {stamp}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        return buf.getvalue()

    def write(self):
        text = self.render()
        if self.cfg.out_path == "-":
            sys.stdout.write(text)
        else:
            with open(self.cfg.out_path, "w", newline="") as fh:
                fh.write(text)


def _say(msg: str):
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# commands

def cmd_kernel(cfg: RunConfig) -> int:
    kcfg = cfg.kernel()  # raises SingularityError at integer alpha
    lo, hi = cfg.t_range
    tab = _Table(cfg, ["z", "re_scalar", "im_scalar", "re_e12", "im_e12", "re_e13", "im_e13",
                       "re_e23", "im_e23", "terms_used", "converged"])
    ts = np.linspace(lo, hi, cfg.points) if cfg.points and lo <= hi else np.empty(0)
    upsilon = np.array([0.0, 0.0, 1.0])
    for t in ts:
        omega = spherical_to_cartesian(float(np.arccos(np.clip(t, -1, 1))), 0.0)
        kv = cauchy_kernel(omega, upsilon, kcfg)
        c = kv.value.coeffs
        tab.add(float(t), c[0].real, c[0].imag, c[3].real, c[3].imag, c[5].real, c[5].imag,
                c[6].real, c[6].imag, kv.terms_used, kv.converged)
    tab.write()
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    tcfg = cfg.transform()
    seed = cfg.seed
    fields = {"bump": (lambda d: bump(d, seed), True),
              "smooth": (lambda d: smooth_field(seed), False)}
    V = sample_points(cfg.theta0, 10, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        reports = verify_pi_identities(cfg.theta0, cfg.alpha, fields, cfg.resolutions, tcfg,
                                       sample=V, partner=lambda d: partner_bump(d, seed))

    def data(phi):
        h = np.zeros((phi.size, 8), complex)
        h[:, 0] = 1.0 + 0.5 * np.cos(phi)
        h[:, 3] = 0.3 * np.sin(phi)
        return h

    from .pi_operator import IdentityReport

    cif = IdentityReport("cauchy_integral_formula", "generated", [], "check",
                         "g = F(trace g) for a generated monogenic")
    for nt, nphi in cfg.resolutions:
        dom = build_cap(cfg.theta0, nt, nphi)
        cif.ladder.append((dom.mesh_param, cif_residual(dom, data, cfg.alpha, V, tcfg)))
    cif.ladder.sort(key=lambda t: -t[0])
    reports.append(cif)

    tab = _Table(cfg, ["identity", "field", "kind", "level", "n_theta", "n_phi", "mesh",
                       "residual", "verdict"])
    meshes = {}
    for nt, nphi in cfg.resolutions:
        meshes[round(build_cap(cfg.theta0, nt, nphi).mesh_param, 15)] = (nt, nphi)
    failed = []
    for r in reports:
        for level, (h, res) in enumerate(r.ladder):
            nt, nphi = meshes.get(round(h, 15), (0, 0))
            tab.add(r.name, r.field, r.kind, level, nt, nphi, h, res, r.ok)
        if r.kind != "info" and not r.ok:
            failed.append(f"{r.name}/{r.field}")
    tab.write()
    n_gate = sum(r.kind != "info" for r in reports)
    _say(f"verify: {n_gate - len(failed)}/{n_gate} gated reports pass")
    for name in failed:
        _say(f"  FAIL {name}")
    return 1 if failed else 0


def cmd_bvp(cfg: RunConfig) -> int:
    tcfg = cfg.transform()
    alpha = cfg.alpha
    zero = scalar_field(0.0)
    c = np.zeros(8, complex)
    c[0], c[3] = 1.0, 0.4j
    pole = spherical_to_cartesian(0.5 * (cfg.theta0 + np.pi), 0.4)
    phi = point_monogenic(pole, c, alpha, tcfg)
    tab = _Table(cfg, ["case", "n_theta", "n_phi", "mesh", "solution_error",
                       "equation_residual", "trace_residual"])
    errors: dict = {"cif": [], "bump": []}
    for nt, nphi in cfg.resolutions:
        dom = build_cap(cfg.theta0, nt, nphi)
        V = sample_points(cfg.theta0, 10, seed=cfg.seed)
        b = bump(dom, cfg.seed)
        cases = {"cif": (zero, phi, phi), "bump": (gamma_alpha_field(b, alpha), zero, b)}
        for name, (g, h, exact) in cases.items():
            f, res = solve_bvp(dom, g, h, alpha, tcfg, samples=V)
            ev = exact.values(V)
            err = float(np.max(np.linalg.norm(f.values(V) - ev, axis=1)
                               / (1 + np.linalg.norm(ev, axis=1))))
            errors[name].append(err)
            tab.add(name, nt, nphi, dom.mesh_param, err, res["equation"], res["trace"])
    tab.write()
    ok = all(e[-1] < e[0] or e[-1] < 1e-10 for e in errors.values())
    _say("bvp: solution error decreases along the ladder" if ok
         else "bvp: solution error does not decrease")
    return 0 if ok else 1


def cmd_beltrami(cfg: RunConfig) -> int:
    tcfg = cfg.transform()
    alpha = cfg.alpha
    c = np.zeros(8, complex)
    c[0], c[3] = 1.0, 0.4j
    pole = spherical_to_cartesian(0.5 * (cfg.theta0 + np.pi), 0.4)
    phi = point_monogenic(pole, c, alpha, tcfg)
    tab = _Table(cfg, ["q_norm", "n_theta", "n_phi", "iterations", "converged", "mean_ratio",
                       "be1_residual"])
    diverged = False
    for nt, nphi in cfg.resolutions:
        dom = build_cap(cfg.theta0, nt, nphi)
        V = sample_points(cfg.theta0, 10, seed=cfg.seed)
        for qn in cfg.q_norms:
            bc = BeltramiConfig(scalar_field(qn), phi, alpha, cfg.fp_tol, cfg.max_iter, tcfg)
            try:
                _, tr = solve_beltrami(dom, bc, samples=V)
                tab.add(qn, nt, nphi, tr.iterations, tr.converged, tr.mean_ratio(), tr.residual)
            except BeltramiDivergenceError as exc:
                diverged = True
                tab.add(qn, nt, nphi, exc.iteration, False, exc.ratio, float("nan"))
                _say(f"beltrami: q_norm={qn} at {nt}:{nphi}: {exc}")
    tab.write()
    return 1 if diverged else 0


def cmd_info(cfg: RunConfig) -> int:
    print(f"spherical-pi {__version__}")
    print(f"commands: {', '.join(COMMANDS)}")
    for key, val in cfg.echo():
        print(f"--{key} {val}")
    print(f"# equivalent: {cfg.argv()}")
    return 0


_DISPATCH = {"kernel": cmd_kernel, "verify": cmd_verify, "bvp": cmd_bvp,
             "beltrami": cmd_beltrami, "info": cmd_info}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad flags, 0 on --help
        return int(exc.code or 0)
    try:
        cfg = _build_config(ns)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        _say(f"spherical-pi: error: {exc}")
        return 2
    try:
        return _DISPATCH[cfg.command](cfg)
    except SingularityError as exc:
        _say(f"spherical-pi: pole: {exc}")
        return 1
    except (ArithmeticError, ValueError) as exc:
        _say(f"spherical-pi: {cfg.command} failed: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
