"""Command-line front end.

Exit codes: 0 all checks pass, 1 a verification failed, 2 bad arguments or
unreadable input, 3 invalid domain geometry.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import MobiusMap, RationalFunction
from .appendix import CURVATURE_LABELS, VerificationReport, concentric_circle_check, curvature_pair_checks, verify_annulus
from .extremal import Verdict, extremality_report, monodromy_sum
from .geometry import Domain, DomainFileError, GeometryError, geometric_summary, isoperimetric_slack, load_domain
from .odewkb import TurningPointError, wkb_error_scaling
from .quaddiff import StokesGraphError, classify, render_svg, stokes_graph

log = logging.getLogger("exq")

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_DOMAIN = 0, 1, 2, 3
COMMANDS = ("analyze", "fit", "stokes", "wkb", "appendix")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    domain: Path | None
    samples: int = 512
    basis: tuple[int, int] = (8, 8)
    tol: float = 1e-9
    out: Path = Path("exq-out")
    seed: int = 0
    phi: Path | None = None
    path: tuple[complex, ...] | None = None
    eps: tuple[float, ...] = (0.1, 0.05, 0.025)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.samples < 64:
            raise ConfigError("--samples must be >= 64")
        if not self.tol > 0:
            raise ConfigError("--tol must be positive")
        if min(self.basis) < 1:
            raise ConfigError("--basis degrees must be >= 1")
        if not self.eps or min(self.eps) <= 0:
            raise ConfigError("--eps values must be positive")


def _parse_basis(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected Npoly,Mpole") from exc
    return a, b


def _parse_path(text: str) -> tuple[complex, ...]:
    try:
        pts = tuple(complex(float(x), float(y)) for x, y in (p.split(",") for p in text.split(";")))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected x0,y0;x1,y1;...") from exc
    if len(pts) < 2:
        raise argparse.ArgumentTypeError("a path needs at least two points")
    return pts


def _parse_eps(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("expected comma-separated floats") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="exq", description="Extremal quantization bounds on planar domains.")
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--domain", type=Path, help="domain JSON file")
    p.add_argument("--samples", type=int, default=512, help="samples per contour (>= 64)")
    p.add_argument("--basis", type=_parse_basis, default=(8, 8), help="Npoly,Mpole (default 8,8)")
    p.add_argument("--tol", type=float, default=1e-9, help="tolerance for identity checks")
    p.add_argument("--out", type=Path, default=Path("exq-out"), help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phi", type=Path, help="JSON RationalFunction used as phi' (stokes, wkb)")
    p.add_argument("--path", type=_parse_path, help="wkb path 'x0,y0;x1,y1;...'")
    p.add_argument("--eps", type=_parse_eps, default=(0.1, 0.05, 0.025), help="wkb eps list")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _load(cfg: RunConfig) -> Domain:
    if cfg.domain is None:
        raise ConfigError(f"--domain is required for {cfg.command}")
    dom = load_domain(cfg.domain, cfg.samples)
    dom.validate()
    return dom


def _load_phi(path: Path) -> RationalFunction:
    try:
        return RationalFunction.from_dict(json.loads(path.read_text()))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc


def _fit_samples(cfg: RunConfig) -> int:
    return max(cfg.samples, 256)


# -- commands -------------------------------------------------------------------

def cmd_analyze(cfg: RunConfig) -> int:
    dom = _load(cfg)
    s = geometric_summary(dom)
    report = {
        "equations": ["lambda_min = 2A/P", "isoperimetric slack L1 - 4 pi A/P >= 0", "monodromy sum = integer"],
        "summary": s.as_dict(),
        "n_components": dom.n_components,
        "isoperimetric_slack": isoperimetric_slack(dom),
        "monodromy_sum_over_2pi": monodromy_sum(dom, s.lambda_min),
        "samples": cfg.samples,
    }
    _write(cfg.out, "analyze.json", _dump(report))
    return EXIT_OK


def cmd_fit(cfg: RunConfig) -> int:
    dom = _load(cfg)
    rep = extremality_report(dom, cfg.basis, _fit_samples(cfg))
    _write(cfg.out, "fit.json", rep.to_json() + "\n")
    _write(cfg.out, "fit_residuals.csv", rep.residual_csv())
    return EXIT_OK if rep.verdict == Verdict.EXTREMAL else EXIT_FAIL


def _phi_prime(cfg: RunConfig, dom: Domain | None) -> RationalFunction:
    if cfg.phi is not None:
        return _load_phi(cfg.phi)
    if dom is None:
        raise ConfigError("--phi or --domain is required")
    rep = extremality_report(dom, cfg.basis, _fit_samples(cfg))
    return rep.fitted_phi.derivative()


def cmd_stokes(cfg: RunConfig) -> int:
    dom = _load(cfg)
    fp = _phi_prime(cfg, dom)
    graph = stokes_graph(fp, dom, strict=False)
    problems = graph.check_invariants()
    cls = classify(graph, dom, fp, seed=cfg.seed)
    _write(cfg.out, "stokes.svg", render_svg(graph, dom))
    _write(cfg.out, "stokes.csv", graph.to_csv())
    summary = graph.summary()
    summary.update({
        "equations": ["Im int sqrt(phi') dz = const on plus-arcs", "m+2 arcs per zero", "boundary metric phi' tau^2 = 1 + alpha lam k"],
        "invariant_violations": problems,
        "classification": cls.as_dict(),
        "tolerances": {"angle": 1e-3, "drift": "1e-8 * length * median|sqrt(phi')|"},
        "seed": cfg.seed,
    })
    _write(cfg.out, "stokes.json", _dump(summary))
    return EXIT_FAIL if problems else EXIT_OK


def cmd_wkb(cfg: RunConfig) -> int:
    dom = load_domain(cfg.domain, cfg.samples) if cfg.domain is not None and cfg.phi is None else None
    if dom is not None:
        dom.validate()
    fp = _phi_prime(cfg, dom) if (cfg.phi is not None or dom is not None) else RationalFunction.polynomial([1, 1])
    path = cfg.path if cfg.path is not None else (0.5 + 0j, 1.5 + 0j)
    try:
        table = wkb_error_scaling(fp, 1.0, path, cfg.eps)
    except TurningPointError as exc:
        _write(cfg.out, "wkb.json", _dump({"error": str(exc), "equations": ["WKB approximant lam^(1/2) phi'^(-1/4) exp(+-i Phi/(lam eps))", "error O(eps)"]}))
        return EXIT_FAIL
    _write(cfg.out, "wkb.csv", table.to_csv())
    ok = table.asymptotic and all(0.3 <= r <= 0.7 for r in table.ratios)
    _write(cfg.out, "wkb.json", _dump({
        "equations": ["WKB approximant lam^(1/2) phi'^(-1/4) exp(+-i Phi/(lam eps))", "error O(eps)"],
        "eps": table.eps,
        "errors": table.errors,
        "ratios": table.ratios,
        "asymptotic": table.asymptotic,
        "tolerances": {"ratio_contract": [0.3, 0.7], "asymptotic_band": [0.1, 0.9]},
        "passed": ok,
    }))
    return EXIT_OK if ok else EXIT_FAIL


def _round_annulus(dom: Domain) -> tuple[float, float, complex] | None:
    if dom.n_components != 2:
        return None
    radii, centers = [], []
    for c in dom.contours:
        M = c.M
        k = np.arange(-M, M + 1)
        other = np.abs(c.coeffs[(k != 0) & (k != 1)])
        if other.size and other.max() > 1e-14 * abs(c.coeffs[M + 1]):
            return None
        radii.append(abs(c.coeffs[M + 1]))
        centers.append(complex(c.coeffs[M]))
    if abs(centers[0] - centers[1]) > 1e-14 * radii[0]:
        return None
    return radii[0], radii[1], centers[0]


def cmd_appendix(cfg: RunConfig) -> int:
    dom = _load(cfg)
    if dom.n_components != 2:
        raise GeometryError("the appendix checks need a doubly-connected domain")
    ra = _round_annulus(dom)
    if ra is not None:
        rep = verify_annulus(ra[0], ra[1], cfg.samples, cfg.tol, ra[2])
    else:
        rep = VerificationReport()
        lam = geometric_summary(dom).lambda_min
        c = dom.hole_centers[0]
        ratio = dom.outer.length() / dom.inners[0].length()
        cp = curvature_pair_checks(dom, MobiusMap.linear(ratio, c * (1 - ratio)), lam, cfg.samples)
        for key in ("id", "id2", "rw", "oh", "po"):
            rep.add(CURVATURE_LABELS[key], cp.residuals[key], cfg.tol)
        rep.add("K = 1", abs(cp.K - 1), cfg.tol)
        cc = concentric_circle_check(dom, cfg.samples)
        rep.add("concentric: curvature spread (outer)", cc["outer_curvature_rel_std"], 1e-4)
        rep.add("concentric: curvature spread (inner)", cc["inner_curvature_rel_std"], 1e-4)
        rep.add("concentric: center offset", cc["center_offset"], 1e-6 * cc["scale"])
    _write(cfg.out, "appendix.txt", rep.to_text())
    _write(cfg.out, "appendix.json", _dump(rep.to_dict()))
    return EXIT_OK if rep.passed else EXIT_FAIL


HANDLERS = {"analyze": cmd_analyze, "fit": cmd_fit, "stokes": cmd_stokes, "wkb": cmd_wkb, "appendix": cmd_appendix}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig(args.command, args.domain, args.samples, args.basis, args.tol, args.out, args.seed,
                        args.phi, args.path, args.eps)
        return HANDLERS[cfg.command](cfg)
    except (ConfigError, DomainFileError, OSError) as exc:
        print(f"exq: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except GeometryError as exc:
        print(f"exq: invalid domain: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except StokesGraphError as exc:
        print(f"exq: verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
